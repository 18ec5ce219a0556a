"""Polyhedral norms, regularisation, and the cover extension seminorm rho.

Every supported norm is a maximum of finitely many linear functionals,
``||x|| = max_k L_k . x`` with ``L`` closed under negation, so each infimum
below is a single LP.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cover import LatticeCover, embed
from .optim import LinearProgram, LPStatus, NumericalFailure, solve_lp, to_fractions
from .spaces import TAU_ZERO, Band, OrderedSpace, Tri, band_complement, is_disjoint_oracle

KINDS = ("sup", "one", "order_unit", "weighted_sup")


class NormInputError(ValueError):
    pass


@dataclass(frozen=True)
class NormSpec:
    kind: str = "sup"
    u: tuple | None = None
    w: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise NormInputError(f"unknown norm kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "order_unit" and self.u is None:
            raise NormInputError("order_unit norm needs u")
        if self.kind == "weighted_sup":
            if self.w is None or min(self.w) <= 0:
                raise NormInputError("weighted_sup norm needs positive weights w")
        if self.u is not None:
            object.__setattr__(self, "u", tuple(float(v) for v in self.u))
        if self.w is not None:
            object.__setattr__(self, "w", tuple(float(v) for v in self.w))

    @classmethod
    def from_dict(cls, data: dict) -> "NormSpec":
        unknown = set(data) - {"kind", "u", "w"}
        if unknown:
            raise NormInputError(f"unknown fields: {sorted(unknown)}")
        return cls(kind=data.get("kind", "sup"), u=data.get("u"), w=data.get("w"))

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.u is not None:
            out["u"] = list(self.u)
        if self.w is not None:
            out["w"] = list(self.w)
        return out

    def functionals(self, space: OrderedSpace) -> np.ndarray:
        """Rows ``L_k`` with ``||x|| = max_k L_k . x``."""
        n = space.n
        if self.kind == "sup":
            L = np.eye(n)
        elif self.kind == "weighted_sup":
            if len(self.w) != n:
                raise NormInputError(f"weights have length {len(self.w)}, space has dim {n}")
            L = np.diag(self.w)
        elif self.kind == "one":
            return np.array(list(itertools.product((1.0, -1.0), repeat=n)))
        else:
            u = np.asarray(self.u)
            if u.shape != (n,):
                raise NormInputError(f"order unit has length {u.size}, space has dim {n}")
            pu = space.phi @ u
            if np.any(pu <= 0):
                raise NormInputError("order unit u is not interior to K (Phi u > 0 fails)")
            L = space.phi / pu[:, None]
        return np.vstack([L, -L])

    def __call__(self, space: OrderedSpace, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "sup":
            return float(np.max(np.abs(x)))
        if self.kind == "one":
            return float(np.sum(np.abs(x)))
        return float(np.max(self.functionals(space) @ x))


SUP = NormSpec("sup")


@dataclass(frozen=True)
class RegValue:
    value: float
    witness: np.ndarray


def _min_norm_dominating(rows, norm_L, z, exact=False):
    """``min ||y||`` s.t. ``rows y >= z`` and ``rows y >= -z``."""
    m, n = rows.shape
    K = norm_L.shape[0]
    # variables (y, s); minimise s
    dt = object if exact else float
    G = np.zeros((2 * m + K, n + 1)).astype(dt)
    G[:m, :n] = rows
    G[m:2 * m, :n] = rows
    G[2 * m:, :n] = -norm_L
    G[2 * m:, n] = 1.0
    h = np.concatenate([z, -z, np.zeros(K)]).astype(dt)
    c = np.zeros(n + 1)
    c[n] = 1.0
    try:
        out = solve_lp(LinearProgram(c, G, h), exact=exact)
    except NumericalFailure:
        if exact:
            raise
        # degenerate float pivots; the rational solver settles it
        out = solve_lp(LinearProgram(c, to_fractions(G), to_fractions(h)), exact=True)
    if out.status is not LPStatus.OPTIMAL:
        raise NumericalFailure(f"norm LP returned {out.status.value}")
    y = np.asarray(out.witness[:n], dtype=float)
    return RegValue(float(max(out.value, 0.0)), y)


def regular_norm(space: OrderedSpace, norm: NormSpec, x, exact: bool = False) -> RegValue:
    """``inf{||y|| : -y <= x <= y}``."""
    x = space.vec(x)
    rows = space.exact_phi() if exact else space.phi
    z = rows @ (to_fractions(x) if exact else x)
    return _min_norm_dominating(rows, norm.functionals(space), z, exact=exact)


def rho_extension(cover: LatticeCover, norm: NormSpec, z, exact: bool = False) -> RegValue:
    """``rho(z) = inf{||x|| : -i(x) <= z <= i(x)}`` on the cover lattice R^{m_c}."""
    z = np.asarray(z, dtype=float)
    if exact:
        z = to_fractions(z)
    if z.shape != (cover.m,):
        raise ValueError(f"z has shape {z.shape}, cover has {cover.m} coordinates")
    rows = cover.space.exact_phi() if exact else cover.rows
    return _min_norm_dominating(rows, norm.functionals(cover.space), z, exact=exact)


def meet_abs(cover: LatticeCover, u, v) -> np.ndarray:
    return np.minimum(np.abs(embed(cover, u)), np.abs(embed(cover, v)))


def rho_meet(cover: LatticeCover, norm: NormSpec, u, v) -> float:
    return rho_extension(cover, norm, meet_abs(cover, u, v)).value


def rho_meet_disjoint(cover: LatticeCover, norm: NormSpec, u, v, tol: float = TAU_ZERO) -> bool:
    """Sufficient test for ``u ⊥ v``: ``rho(|i(u)| ∧ |i(v)|) <= tol``."""
    scale = max(norm(cover.space, u), norm(cover.space, v), 1e-300)
    return rho_meet(cover, norm, u, v) <= tol * scale


def semimonotone_constant(space: OrderedSpace, norm: NormSpec) -> float:
    """``sup{||x|| : 0 <= x <= y, ||y|| <= 1}``, one LP per norm functional."""
    L = norm.functionals(space)
    m, n = space.phi.shape
    K = L.shape[0]
    # variables (x, y)
    G = np.zeros((2 * m + K, 2 * n))
    G[:m, :n] = space.phi
    G[m:2 * m, :n] = -space.phi
    G[m:2 * m, n:] = space.phi
    G[2 * m:, n:] = -L
    h = np.concatenate([np.zeros(2 * m), -np.ones(K)])
    best = 0.0
    for k in range(K):
        c = np.concatenate([-L[k], np.zeros(n)])
        out = solve_lp(LinearProgram(c, G, h))
        if out.status is LPStatus.UNBOUNDED:
            raise NumericalFailure("semimonotone LP unbounded; the order interval should be bounded")
        if out.status is not LPStatus.OPTIMAL:
            raise NumericalFailure(f"semimonotone LP returned {out.status.value}")
        best = max(best, -out.value)
    return best


def order_unit_norm(space: OrderedSpace, u, x) -> float:
    """``inf{a >= 0 : -a u <= x <= a u}`` as a one-variable LP."""
    u, x = space.vec(u), space.vec(x)
    pu = space.phi @ u
    if np.any(pu <= 0):
        raise NormInputError("u is not an interior point of K")
    px = space.phi @ x
    G = np.concatenate([pu, pu, [1.0]])[:, None]
    h = np.concatenate([px, -px, [0.0]])
    out = solve_lp(LinearProgram([1.0], G, h))
    return float(out.value)


def operator_norm(space: OrderedSpace, norm: NormSpec, A) -> float:
    """Induced norm ``max_k max{L_k A x : ||x|| <= 1}``."""
    A = np.asarray(A, dtype=float)
    L = norm.functionals(space)
    G = -L
    h = -np.ones(L.shape[0])
    best = 0.0
    for k in range(L.shape[0]):
        out = solve_lp(LinearProgram(-(L[k] @ A), G, h))
        best = max(best, -out.value)
    return best


@dataclass
class ClosedProbeReport:
    trials: int = 0
    limits_in_band: int = 0
    rejected_sequences: int = 0
    limit_disjoint_from_complement: int = 0
    failures: list | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and self.limits_in_band + self.rejected_sequences == self.trials


def band_closed_probe(space: OrderedSpace, norm: NormSpec, b: Band, trials: int = 100, seed: int = 0,
                      sequence=None, limit=None, oracle_checks: int = 5) -> ClosedProbeReport:
    """Probe that limits of band sequences stay in the band.

    With ``sequence``/``limit`` given, that single sequence is examined: if its
    terms leave the band it is rejected (it says nothing about closedness).
    Otherwise random sequences ``x_k = x + e_k`` with ``e_k`` in the band and
    ``||e_k|| -> 0`` are generated; the limit must satisfy the zero pattern and
    be oracle-disjoint from elements of the complement.
    """
    rng = np.random.default_rng(seed)
    rep = ClosedProbeReport(failures=[])
    comp = band_complement(b)
    if sequence is not None:
        rep.trials = 1
        if not all(b.contains(xk) for xk in sequence):
            rep.rejected_sequences = 1
        elif b.contains(limit):
            rep.limits_in_band = 1
        else:
            rep.failures.append({"limit": np.asarray(limit).tolist()})
        return rep
    for t in range(trials):
        rep.trials += 1
        if b.dim == 0:
            rep.limits_in_band += 1
            continue
        x = b.sample(rng)
        terms = []
        for k in range(1, 30):
            off = rng.standard_normal(space.n) * 2.0 ** -k
            # project the perturbation back into the band
            e = b.basis @ (b.basis.T @ off)
            terms.append(x + e)
        if not all(b.contains(xk) for xk in terms):
            rep.rejected_sequences += 1
            continue
        lim = x
        if norm(space, terms[-1] - lim) > 1e-6 * max(1.0, norm(space, lim)):
            rep.failures.append({"trial": t, "reason": "sequence did not converge"})
            continue
        if not b.contains(lim):
            rep.failures.append({"trial": t, "limit": lim.tolist()})
            continue
        rep.limits_in_band += 1
        if t < oracle_checks and comp.dim:
            y = comp.sample(rng)
            if is_disjoint_oracle(space, lim, y) is Tri.TRUE:
                rep.limit_disjoint_from_complement += 1
            else:
                rep.failures.append({"trial": t, "reason": "limit not disjoint from complement"})
    return rep
