"""Operator predicates on ordered spaces.

``exact`` methods scan the band lattice of a certified cover; ``sampled``
methods draw disjoint pairs and ask the definitional LP oracle.  Every FALSE
verdict carries a counterexample that has been re-checked by the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .norms import SUP, NormSpec, operator_norm
from .optim import LinearProgram, LPStatus, cone_member, solve_lp
from .spaces import (
    TAU_ZERO,
    OrderedSpace,
    Tri,
    _require_cover,
    band_complement,
    disjoint_complement,
    enumerate_bands,
    is_lattice,
    is_disjoint_oracle,
    null_basis,
    preservation_bands,
)

SAMPLED_PAIRS = 1000


class OperatorInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LinOp:
    matrix: np.ndarray
    space: OrderedSpace
    domain: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        n = self.space.n
        if A.shape != (n, n):
            raise OperatorInputError(f"matrix shape {A.shape} does not match space dim {n}")
        if not np.all(np.isfinite(A)):
            raise OperatorInputError("matrix has non-finite entries")
        object.__setattr__(self, "matrix", A)
        if self.domain is not None:
            D = np.asarray(self.domain, dtype=float)
            if D.ndim != 2 or D.shape[0] != n:
                raise OperatorInputError(f"domain basis must have {n} rows")
            if np.linalg.matrix_rank(D) < D.shape[1]:
                raise OperatorInputError("domain basis columns are dependent")
            object.__setattr__(self, "domain", D)

    @property
    def D(self) -> np.ndarray:
        return np.eye(self.space.n) if self.domain is None else self.domain

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ x

    def with_matrix(self, A) -> "LinOp":
        return LinOp(A, self.space, self.domain)


@dataclass(frozen=True)
class Verdict:
    value: Tri
    certificate: dict = field(default_factory=dict)
    method: str = "exact_bands"

    def __bool__(self):
        return bool(self.value)


def _oracle(space, x, y, tol: float = TAU_ZERO, exact: bool = False) -> Tri:
    v = is_disjoint_oracle(space, x, y, tol)
    if v is Tri.UNDECIDED and exact:
        v = is_disjoint_oracle(space, x, y, tol, exact=True)
    return v


def _tol(op: LinOp, tol: float) -> float:
    return tol * op.space.phi_norm * max(1.0, float(np.max(np.abs(op.matrix))))


def is_positive(op: LinOp, exact: bool = False) -> Verdict:
    """``A (K ∩ D) ⊆ K``, one cone-membership LP per dual row of ``Phi A``."""
    phi, D = op.space.phi, op.D
    rows = phi @ D
    targets = phi @ op.matrix @ D
    for j, t in enumerate(targets):
        res = cone_member(rows, t, exact=exact)
        if not res.member:
            x = D @ np.asarray(res.separator, dtype=float)
            return Verdict(Tri.FALSE, {"x": x.tolist(), "row": j, "Ax": (op.matrix @ x).tolist()})
    return Verdict(Tri.TRUE)


def is_bipositive(op: LinOp) -> Verdict:
    pos = is_positive(op)
    if pos.value is not Tri.TRUE:
        return Verdict(pos.value, {"reason": "not positive", **pos.certificate})
    phi, D = op.space.phi, op.D
    k = D.shape[1]
    PA = phi @ op.matrix @ D
    for j in range(phi.shape[0]):
        # search x in D with A x in K but phi_j(x) <= -1
        G = np.vstack([PA, -(phi[j] @ D)[None, :]])
        h = np.concatenate([np.zeros(PA.shape[0]), [1.0]])
        out = solve_lp(LinearProgram(np.zeros(k), G, h))
        if out.status is LPStatus.OPTIMAL:
            x = D @ out.witness
            return Verdict(Tri.FALSE, {"x": x.tolist(), "row": j, "reason": "Ax >= 0 but x not >= 0"})
    return Verdict(Tri.TRUE)


# -- disjoint pair sampling ---------------------------------------------------


def sample_disjoint_pair(space: OrderedSpace, rng, domain=None, y_domain=None):
    """Random ``x`` (in ``domain``) with prescribed zero rows, and ``y`` generic in ``{x}^d``."""
    _require_cover(space)
    n, m = space.n, space.m
    D = np.eye(n) if domain is None else domain
    for _ in range(100):
        p = rng.random()
        S = np.flatnonzero(rng.random(m) < p)
        V = D @ null_basis(space.phi[S] @ D, D.shape[1]) if len(S) else D
        if V.shape[1] == 0:
            continue
        x = V @ rng.standard_normal(V.shape[1])
        comp = disjoint_complement(space, [x]).basis
        if y_domain is not None:
            comp = y_domain @ null_basis(_band_rows(space, comp) @ y_domain, y_domain.shape[1])
        if comp.shape[1] == 0:
            continue
        y = comp @ rng.standard_normal(comp.shape[1])
        return x, y
    return None


def _band_rows(space, basis):
    # rows vanishing on span(basis), i.e. the zero pattern of that subspace
    vals = np.abs(space.phi @ basis)
    Z = np.flatnonzero(np.max(vals, axis=1, initial=0.0) <= 1e-9 * space.phi_norm)
    return space.phi[Z]


def sample_disjoint_pairs(space: OrderedSpace, count: int, seed: int = 0, domain=None, y_domain=None):
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < count:
        pair = sample_disjoint_pair(space, rng, domain, y_domain)
        if pair is None:
            break
        pairs.append(pair)
    return pairs


# -- locality -------------------------------------------------------------------


def _confirm_local_witness(op: LinOp, x, comp_basis, rng, tries=8, exact=False):
    space = op.space
    for _ in range(tries):
        y = comp_basis @ rng.standard_normal(comp_basis.shape[1])
        if _oracle(space, x, y, exact=exact) is Tri.TRUE and _oracle(space, op.matrix @ x, y, exact=exact) is Tri.FALSE:
            return y
    return None


def band_residual(op: LinOp, b) -> tuple[float, np.ndarray | None]:
    """Largest ``|phi_j(A v)|`` over ``j`` in the pattern and unit ``v`` in ``B ∩ D``."""
    space = op.space
    if not b.pattern:
        return 0.0, None
    D = op.D
    if op.domain is None:
        V = b.basis
    else:
        V = D @ null_basis(space.phi[sorted(b.pattern)] @ D, D.shape[1])
    if V.shape[1] == 0:
        return 0.0, None
    R = space.phi[sorted(b.pattern)] @ op.matrix @ V
    k = int(np.argmax(np.max(np.abs(R), axis=0)))
    return float(np.max(np.abs(R))), V[:, k]


def is_local(op: LinOp, method: str = "exact", tol: float = TAU_ZERO, pairs: int = SAMPLED_PAIRS,
             seed: int = 0, exact: bool = False) -> Verdict:
    """``x ⊥ y, x in D  =>  Ax ⊥ y``; equivalently ``A`` maps every band into itself."""
    _require_cover(op.space)
    if method == "sampled":
        return _is_local_sampled(op, pairs, seed, tol, exact)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    thresh = _tol(op, tol)
    worst = 0.0
    for b in preservation_bands(op.space):
        r, v = band_residual(op, b)
        worst = max(worst, r)
        if r > thresh:
            comp = band_complement(b).basis
            y = _confirm_local_witness(op, v, comp, rng, exact=exact) if comp.shape[1] else None
            if y is None:
                return Verdict(Tri.UNDECIDED, {"band": sorted(b.pattern), "residual": r}, "exact_bands")
            return Verdict(Tri.FALSE, {"band": sorted(b.pattern), "x": v.tolist(), "y": y.tolist(),
                                       "residual": r}, "exact_bands")
    return Verdict(Tri.TRUE, {"max_residual": worst}, "exact_bands")


is_band_preserving = is_local


def _is_local_sampled(op: LinOp, pairs: int, seed: int, tol: float, exact: bool = False) -> Verdict:
    rng = np.random.default_rng(seed)
    undecided = 0
    checked = 0
    for _ in range(pairs):
        pair = sample_disjoint_pair(op.space, rng, op.domain)
        if pair is None:
            break
        x, y = pair
        if _oracle(op.space, x, y, tol, exact=exact) is not Tri.TRUE:
            continue
        checked += 1
        v = _oracle(op.space, op.matrix @ x, y, tol, exact=exact)
        if v is Tri.FALSE:
            return Verdict(Tri.FALSE, {"x": x.tolist(), "y": y.tolist()}, "sampled")
        if v is Tri.UNDECIDED:
            undecided += 1
    value = Tri.UNDECIDED if undecided else Tri.TRUE
    return Verdict(value, {"pairs": checked, "undecided": undecided}, "sampled")


# -- disjointness preservation ------------------------------------------------------


def _subspace_support(space, M, thresh):
    if M.shape[1] == 0:
        return frozenset()
    return frozenset(np.flatnonzero(np.max(np.abs(space.phi @ M), axis=1) > thresh).tolist())


def is_disjointness_preserving(op: LinOp, method: str = "exact", tol: float = TAU_ZERO,
                               pairs: int = SAMPLED_PAIRS, seed: int = 0, exact: bool = False) -> Verdict:
    """``x ⊥ y  =>  Ax ⊥ Ay`` for ``x, y`` in the domain.

    Exact mode: for every band ``B`` the supports of ``A(B ∩ D)`` and
    ``A(B^d ∩ D)`` must not overlap.  A FALSE verdict is only returned with an
    oracle-confirmed pair; an unconfirmed overlap is UNDECIDED.
    """
    space = op.space
    _require_cover(space)
    if method == "sampled":
        return _dp_sampled(op, pairs, seed, tol, exact)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    D = op.D
    thresh = _tol(op, tol)
    if is_lattice(space) and op.domain is None:
        return _dp_lattice(op, thresh, exact)
    for b in enumerate_bands(space):
        c = band_complement(b)
        V1 = D @ null_basis(space.phi[sorted(b.pattern)] @ D, D.shape[1]) if b.pattern else D
        V2 = D @ null_basis(space.phi[sorted(c.pattern)] @ D, D.shape[1]) if c.pattern else D
        if V1.shape[1] == 0 or V2.shape[1] == 0:
            continue
        s1 = _subspace_support(space, op.matrix @ V1, thresh)
        s2 = _subspace_support(space, op.matrix @ V2, thresh)
        overlap = s1 & s2
        if overlap:
            for _ in range(8):
                x = V1 @ rng.standard_normal(V1.shape[1])
                y = V2 @ rng.standard_normal(V2.shape[1])
                if (_oracle(space, x, y, exact=exact) is Tri.TRUE
                        and _oracle(space, op.matrix @ x, op.matrix @ y, exact=exact) is Tri.FALSE):
                    return Verdict(Tri.FALSE, {"band": sorted(b.pattern), "x": x.tolist(), "y": y.tolist(),
                                               "rows": sorted(overlap)}, "exact_bands")
            return Verdict(Tri.UNDECIDED, {"band": sorted(b.pattern), "rows": sorted(overlap)}, "exact_bands")
    return Verdict(Tri.TRUE, {}, "exact_bands")


def _dp_lattice(op: LinOp, thresh: float, exact: bool = False) -> Verdict:
    # atoms Phi^{-1} e_i are pairwise disjoint; DP iff their images have disjoint supports
    space = op.space
    Pinv = np.linalg.inv(space.phi)
    M = np.abs(space.phi @ op.matrix @ Pinv) > thresh
    for i in range(space.n):
        for j in range(i + 1, space.n):
            rows = np.flatnonzero(M[:, i] & M[:, j])
            if len(rows):
                x, y = Pinv[:, i], Pinv[:, j]
                if (_oracle(space, x, y, exact=exact) is Tri.TRUE
                        and _oracle(space, op.matrix @ x, op.matrix @ y, exact=exact) is Tri.FALSE):
                    return Verdict(Tri.FALSE, {"x": x.tolist(), "y": y.tolist(), "rows": rows.tolist()},
                                   "exact_bands")
                return Verdict(Tri.UNDECIDED, {"atoms": [i, j], "rows": rows.tolist()}, "exact_bands")
    return Verdict(Tri.TRUE, {}, "exact_bands")


def _dp_sampled(op, pairs, seed, tol, exact=False):
    rng = np.random.default_rng(seed)
    undecided = checked = 0
    for _ in range(pairs):
        pair = sample_disjoint_pair(op.space, rng, op.domain, op.domain)
        if pair is None:
            break
        x, y = pair
        if _oracle(op.space, x, y, tol, exact=exact) is not Tri.TRUE:
            continue
        checked += 1
        v = _oracle(op.space, op.matrix @ x, op.matrix @ y, tol, exact=exact)
        if v is Tri.FALSE:
            return Verdict(Tri.FALSE, {"x": x.tolist(), "y": y.tolist()}, "sampled")
        undecided += v is Tri.UNDECIDED
    return Verdict(Tri.UNDECIDED if undecided else Tri.TRUE, {"pairs": checked}, "sampled")


def cross_validated_dp(op: LinOp, pairs: int = SAMPLED_PAIRS, seed: int = 0, exact: bool = False) -> Verdict:
    """Exact-candidate verdict checked against the sampled oracle; the sampled side wins."""
    ex = is_disjointness_preserving(op, "exact", seed=seed, exact=exact)
    sa = is_disjointness_preserving(op, "sampled", pairs=pairs, seed=seed, exact=exact)
    if ex.value is sa.value:
        return Verdict(ex.value, {**ex.certificate, "agreement": True}, "exact_bands")
    if ex.value is Tri.FALSE:
        # oracle-confirmed counterexample beats an inconclusive sample
        return Verdict(Tri.FALSE, {**ex.certificate, "agreement": False}, "exact_bands")
    return Verdict(sa.value, {**sa.certificate, "agreement": False, "exact": "undecided"}, "sampled")


# -- combinators ----------------------------------------------------------------------


def locality_algebra_check(S: LinOp, T: LinOp, alpha: float, beta: float) -> dict:
    pre = is_local(S).value is Tri.TRUE and is_local(T).value is Tri.TRUE
    if not pre:
        return {"status": "not applicable", "passed": None}
    lin = is_local(S.with_matrix(alpha * S.matrix + beta * T.matrix))
    prod = is_local(S.with_matrix(S.matrix @ T.matrix))
    ok = lin.value is Tri.TRUE and prod.value is Tri.TRUE
    return {"status": "checked", "passed": ok, "sum_local": lin.value.value,
            "product_local": prod.value.value,
            "certificates": {"sum": lin.certificate, "product": prod.certificate}}


def inverse_local_check(op: LinOp) -> dict:
    A = op.matrix
    if op.domain is not None:
        raise OperatorInputError("inverse check needs a full domain")
    if np.linalg.cond(A) > 1e12:
        raise OperatorInputError("operator is singular or ill-conditioned")
    inv = op.with_matrix(np.linalg.inv(A))
    hyp = {"positive": is_positive(op).value, "inverse_positive": is_positive(inv).value,
           "local": is_local(op).value}
    failing = [k for k, v in hyp.items() if v is not Tri.TRUE]
    if failing:
        return {"status": "not applicable", "failing": failing, "passed": None}
    v = is_local(inv)
    return {"status": "checked", "passed": v.value is Tri.TRUE, "inverse_local": v.value.value,
            "riesz_star_inclusion": "vacuous (full domain)", "certificate": v.certificate}


def positive_off_diagonal_pair(op: LinOp, tol: float = TAU_ZERO) -> Verdict:
    """For every cover ray ``f``: ``x in K, f(x) = 0  =>  f(Ax) = 0`` (checked for ``A`` and ``-A``)."""
    space = op.space
    _require_cover(space)
    phi, n = space.phi, space.n
    A = op.matrix
    box = np.vstack([np.eye(n), -np.eye(n)])
    thresh = _tol(op, tol)
    for j in range(space.m):
        G = np.vstack([phi, box])
        h = np.concatenate([np.zeros(space.m), -np.ones(2 * n)])
        Aeq = phi[j][None, :]
        for sign in (1.0, -1.0):
            out = solve_lp(LinearProgram(-sign * (phi[j] @ A), G, h, Aeq, [0.0]))
            if -out.value > thresh:
                x = out.witness
                return Verdict(Tri.FALSE, {"row": j, "x": x.tolist(), "sign": sign, "value": -out.value})
    return Verdict(Tri.TRUE)


def center_bound_check(op: LinOp, norm: NormSpec = SUP, tol: float = 1e-9) -> dict:
    space = op.space
    _require_cover(space)
    if space.m != space.n:
        return {"status": "not applicable", "reason": "space is not a lattice"}
    P = space.phi
    M = P @ op.matrix @ np.linalg.inv(P)
    off = M - np.diag(np.diag(M))
    local = is_local(op).value
    opn = operator_norm(space, norm, op.matrix)
    scale = max(1.0, float(np.max(np.abs(M))))
    alpha = float(np.max(np.abs(np.diag(M)))) if np.max(np.abs(off)) <= tol * scale else float("inf")
    out = {"status": "checked", "local": local.value, "operator_norm": opn, "alpha_min": alpha}
    if local is Tri.TRUE:
        I = np.eye(space.n)
        upper = is_positive(op.with_matrix(opn * I - op.matrix)).value is Tri.TRUE
        lower = is_positive(op.with_matrix(opn * I + op.matrix)).value is Tri.TRUE
        out["norm_bound_holds"] = upper and lower
        out["passed"] = upper and lower and alpha <= opn * (1 + 1e-9) + 1e-12
    return out
