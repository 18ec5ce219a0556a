"""Dense simplex kernel shared by every order-theoretic oracle.

Problems have the form

    minimize    c . x
    subject to  G x >= h,   A_eq x = b_eq,   x free,

and are solved by a two-phase tableau simplex (Dantzig pricing, Bland's rule
after a run of degenerate pivots).  Every verdict carries a certificate that
can be checked without looking at solver internals:

* optimal    -- witness ``x`` and dual multipliers ``y >= 0`` with
                ``G^T y + A_eq^T mu = c``;
* infeasible -- Farkas multipliers with ``G^T y + A_eq^T mu = 0`` and
                ``h . y + b_eq . mu = 1``;
* unbounded  -- a feasible point and a ray ``r`` with ``G r >= 0``,
                ``A_eq r = 0``, ``c . r < 0``.

Passing ``exact=True`` runs the identical pivoting code on ``Fraction``
object arrays, which gives an independent adjudicator for boundary cases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

TAU_FEAS = 1e-9
TAU_OBJ = 1e-8
PIVOT_EPS = 1e-11


class LPInputError(ValueError):
    """Malformed linear program (shapes, non-finite entries)."""


class NumericalFailure(RuntimeError):
    """The solver could not reach a trustworthy verdict."""


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        c = _as_array(self.objective, 1, "objective")
        d = c.shape[0]
        if d < 1:
            raise LPInputError("objective must have length >= 1")
        G = _as_array(self.G, 2, "G", cols=d)
        h = _as_array(self.h, 1, "h")
        if h.shape[0] != G.shape[0]:
            raise LPInputError(f"h has length {h.shape[0]}, G has {G.shape[0]} rows")
        if (self.A_eq is None) != (self.b_eq is None):
            raise LPInputError("A_eq and b_eq must be given together")
        if self.A_eq is not None:
            A = _as_array(self.A_eq, 2, "A_eq", cols=d)
            b = _as_array(self.b_eq, 1, "b_eq")
            if b.shape[0] != A.shape[0]:
                raise LPInputError("b_eq length does not match A_eq rows")
        else:
            A = np.zeros((0, d), dtype=G.dtype)
            b = np.zeros(0, dtype=G.dtype)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)

    @property
    def dim(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class LPOutcome:
    status: LPStatus
    value: float
    witness: np.ndarray
    certificate: np.ndarray
    ray: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _as_array(a, ndim, name, cols=None):
    if isinstance(a, np.ndarray) and a.dtype == object:
        arr = a
    else:
        try:
            arr = np.asarray(a, dtype=float)
        except (TypeError, ValueError) as exc:
            raise LPInputError(f"{name}: {exc}") from None
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, cols or 0)
    if arr.ndim != ndim:
        raise LPInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if cols is not None and arr.shape[1] != cols:
        raise LPInputError(f"{name} has {arr.shape[1]} columns, expected {cols}")
    if arr.dtype != object and not np.all(np.isfinite(arr)):
        raise LPInputError(f"{name} contains non-finite entries")
    return arr


def to_fractions(a) -> np.ndarray:
    """Exact object-array copy; floats are converted without rounding."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = v if isinstance(v, Fraction) else Fraction(v)
    return out


def _pivot(T, r, e):
    T[r] = T[r] / T[r, e]
    col = T[:, e].copy()
    col[r] = 0
    T -= col[:, None] * T[r][None, :]


def _simplex(T, basis, allowed, eps, budget, max_iter):
    """Run pivots until optimal; return ``None`` or the entering column of an unbounded ray."""
    n_rows = T.shape[0] - 1
    bland = False
    degenerate = 0
    for _ in range(max_iter):
        rc = T[-1, :-1]
        cand = np.flatnonzero(allowed & np.asarray(rc < -eps, dtype=bool))
        if cand.size == 0:
            return None
        if bland:
            e = int(cand[0])
        else:
            e = int(cand[np.argmin(rc[cand])])
        col = T[:n_rows, e]
        pos = np.flatnonzero(np.asarray(col > eps, dtype=bool))
        if pos.size == 0:
            return e
        ratios = T[pos, -1] / col[pos]
        best = min(ratios)
        ties = pos[np.asarray(ratios <= best + eps, dtype=bool)]
        # smallest basic index among ties keeps the rule deterministic (Bland's leaving rule)
        r = int(min(ties, key=lambda i: basis[i]))
        if best <= eps:
            degenerate += 1
            if degenerate > budget:
                bland = True
        else:
            degenerate = 0
        _pivot(T, r, e)
        basis[r] = e
    raise NumericalFailure(f"simplex exceeded {max_iter} iterations (cycling guard)")


def solve_lp(
    lp: LinearProgram,
    *,
    exact: bool = False,
    tau_feas: float = TAU_FEAS,
    tau_obj: float = TAU_OBJ,
    degeneracy_budget: int = 50,
    max_iter: int = 5000,
) -> LPOutcome:
    d = lp.dim
    G, h, A, b, c = lp.G, lp.h, lp.A_eq, lp.b_eq, lp.objective
    if exact:
        G, h, A, b, c = (to_fractions(v) for v in (G, h, A, b, c))
        zero, one, eps = Fraction(0), Fraction(1), 0
    else:
        G, h, A, b, c = (np.asarray(v, dtype=float) for v in (G, h, A, b, c))
        zero, one = 0.0, 1.0
        scale = max(1.0, float(np.max(np.abs(G), initial=0.0)), float(np.max(np.abs(A), initial=0.0)))
        eps = PIVOT_EPS * scale
    k, e_rows = G.shape[0], A.shape[0]
    R = k + e_rows
    M = np.vstack([G, A]) if R else np.zeros((0, d), dtype=G.dtype)
    rhs = np.concatenate([h, b])
    sigma = np.array([-1 if v < 0 else 1 for v in rhs], dtype=int)

    # columns: x+ (d) | x- (d) | surplus (k) | artificial (R) | rhs
    N = 2 * d + k + R
    dtype = object if exact else float
    T = np.empty((R + 1, N + 1), dtype=dtype)
    T[...] = zero
    for i in range(R):
        s = sigma[i]
        T[i, :d] = M[i] * s
        T[i, d:2 * d] = -M[i] * s
        if i < k:
            T[i, 2 * d + i] = -s * one
        T[i, 2 * d + k + i] = one
        T[i, -1] = rhs[i] * s
    art = np.arange(2 * d + k, N)
    basis = list(art)

    # phase 1: minimise the sum of artificials
    T[-1, :] = zero
    T[-1, art] = one
    for i in range(R):
        T[-1] -= T[i]
    allowed = np.ones(N, dtype=bool)
    if _simplex(T, basis, allowed, eps, degeneracy_budget, max_iter) is not None:
        raise NumericalFailure("phase 1 reported unbounded, which is impossible")
    infeas = -T[-1, -1]
    feas_tol = 0 if exact else tau_feas * max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
    if infeas > feas_tol:
        pi = one - T[-1, art]
        y = np.array([sigma[i] * pi[i] for i in range(R)], dtype=dtype)
        y = y / (rhs @ y)
        if not exact:
            y[:k] = np.maximum(y[:k], 0.0)
        return _checked(LPOutcome(LPStatus.INFEASIBLE, float("nan"), np.zeros(d), _out(y, exact)),
                        lp, exact, tau_feas, tau_obj)

    # drive artificials out of the basis where possible
    allowed = np.ones(N, dtype=bool)
    allowed[art] = False
    for r in range(R):
        if basis[r] in set(art):
            nz = np.flatnonzero(allowed & np.asarray(np.abs(T[r, :-1]) > eps, dtype=bool))
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])

    # phase 2
    cost = np.empty(N, dtype=dtype)
    cost[...] = zero
    cost[:d] = c
    cost[d:2 * d] = -c
    T[-1, :-1] = cost
    T[-1, -1] = zero
    for r in range(R):
        cb = cost[basis[r]]
        if cb != 0:
            T[-1] -= cb * T[r]
    entering = _simplex(T, basis, allowed, eps, degeneracy_budget, max_iter)

    z = np.empty(N, dtype=dtype)
    z[...] = zero
    for r in range(R):
        z[basis[r]] = T[r, -1]
    x = z[:d] - z[d:2 * d]
    if entering is not None:
        dz = np.empty(N, dtype=dtype)
        dz[...] = zero
        dz[entering] = one
        for r in range(R):
            dz[basis[r]] = -T[r, entering]
        ray = dz[:d] - dz[d:2 * d]
        ray = ray / max(abs(v) for v in ray)
        out = LPOutcome(LPStatus.UNBOUNDED, float("-inf"), _out(x, exact), np.zeros(0), _out(ray, exact))
        return _checked(out, lp, exact, tau_feas, tau_obj)
    pi = -T[-1, art]
    y = np.array([sigma[i] * pi[i] for i in range(R)], dtype=dtype)
    value = c @ x
    out = LPOutcome(LPStatus.OPTIMAL, float(value), _out(x, exact), _out(y, exact))
    return _checked(out, lp, exact, tau_feas, tau_obj)


def _out(v, exact):
    return v.copy() if exact else np.asarray(v, dtype=float)


def _checked(out: LPOutcome, lp: LinearProgram, exact, tau_feas, tau_obj) -> LPOutcome:
    """Re-verify the certificate against the raw data; never return an unverified verdict."""
    ok = verify_outcome(lp, out, exact=exact, tau_feas=tau_feas, tau_obj=tau_obj)
    if not ok:
        raise NumericalFailure(f"{out.status.value} certificate failed re-verification")
    return out


def verify_outcome(lp: LinearProgram, out: LPOutcome, *, exact=False,
                   tau_feas=TAU_FEAS, tau_obj=TAU_OBJ) -> bool:
    """Check an outcome's certificate by direct arithmetic on the problem data."""
    G, h, A, b, c = lp.G, lp.h, lp.A_eq, lp.b_eq, lp.objective
    k = G.shape[0]
    if exact:
        G, h, A, b, c = (to_fractions(v) for v in (G, h, A, b, c))
        tf = to = 0
    else:
        G, h, A, b, c = (np.asarray(v, dtype=float) for v in (G, h, A, b, c))
        mag = max(1.0, float(np.max(np.abs(G), initial=0.0)), float(np.max(np.abs(A), initial=0.0)),
                  float(np.max(np.abs(h), initial=0.0)), float(np.max(np.abs(c), initial=0.0)))
        tf, to = tau_feas * mag, tau_obj * mag

    def feasible(x):
        if k and not np.all(G @ x - h >= -tf * (1 + _amax(x))):
            return False
        return not A.shape[0] or np.all(np.abs(A @ x - b) <= tf * (1 + _amax(x)))

    if out.status is LPStatus.INFEASIBLE:
        y, mu = out.certificate[:k], out.certificate[k:]
        if k and not np.all(y >= 0):
            return False
        resid = G.T @ y + A.T @ mu if A.shape[0] else G.T @ y
        if not np.all(np.abs(resid) <= to * (1 + _amax(out.certificate))):
            return False
        return (h @ y + b @ mu) > 0
    if out.status is LPStatus.UNBOUNDED:
        r = out.ray
        if not feasible(out.witness):
            return False
        if k and not np.all(G @ r >= -tf):
            return False
        if A.shape[0] and not np.all(np.abs(A @ r) <= tf):
            return False
        return (c @ r) < -to if not exact else (c @ r) < 0
    x = out.witness
    if not feasible(x):
        return False
    y, mu = out.certificate[:k], out.certificate[k:]
    if k and not np.all(y >= -tf):
        return False
    resid = (G.T @ y if k else 0) + (A.T @ mu if A.shape[0] else 0) - c
    gap = abs(c @ x - (h @ y + b @ mu))
    scale = 1 + _amax(x) + _amax(out.certificate)
    return bool(np.all(np.abs(resid) <= to * scale) and gap <= to * scale)


def _amax(v) -> float:
    return float(max((abs(t) for t in v), default=0))


def minimize(c, G, h, A_eq=None, b_eq=None, **kw) -> LPOutcome:
    return solve_lp(LinearProgram(c, G, h, A_eq, b_eq), **kw)


@dataclass(frozen=True)
class ConeMembership:
    member: bool
    coefficients: np.ndarray | None = None
    separator: np.ndarray | None = None

    def __bool__(self):
        return self.member


def cone_member(rows, target, *, exact=False) -> ConeMembership:
    """Decide ``target in cone(rows)``.

    A positive answer carries nonnegative coefficients; a negative one a
    separating vector ``s`` with ``s . target < 0 <= s . row_i`` for all rows.
    """
    rows = np.asarray(rows, dtype=object if exact else float)
    t = np.asarray(target, dtype=object if exact else float)
    if rows.ndim == 1 and rows.size == 0:
        rows = rows.reshape(0, t.shape[0])
    if rows.ndim != 2 or rows.shape[1] != t.shape[0]:
        raise LPInputError(f"rows shape {rows.shape} incompatible with target length {t.shape[0]}")
    k = rows.shape[0]
    if k == 0:
        if all(v == 0 for v in t):
            return ConeMembership(True, np.zeros(0))
        return ConeMembership(False, separator=-np.asarray(t, dtype=float))
    lp = LinearProgram(np.zeros(k), np.eye(k), np.zeros(k), rows.T, t)
    out = solve_lp(lp, exact=exact)
    if out.status is LPStatus.OPTIMAL:
        return ConeMembership(True, coefficients=np.asarray(out.witness, dtype=float))
    mu = np.asarray(out.certificate[k:], dtype=float)
    return ConeMembership(False, separator=-mu / np.max(np.abs(mu)))
