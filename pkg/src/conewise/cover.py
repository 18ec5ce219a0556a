"""Functional-representation lattice cover ``x -> Phi_c x`` into R^{m_c}.

The canonical rows are the extreme rays of the dual cone, obtained from the
input functionals by dropping every row that lies in the cone of the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optim import LinearProgram, LPStatus, NumericalFailure, cone_member, solve_lp
from .spaces import OrderedSpace, certified

DENSITY_SAMPLES = 256


class CoverInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class DensityReport:
    samples: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass(frozen=True, eq=False)
class LatticeCover:
    space: OrderedSpace  # certified copy whose rows are the canonical rows
    source: OrderedSpace
    kept: tuple
    removed: tuple
    density: DensityReport | None = None

    @property
    def rows(self) -> np.ndarray:
        return self.space.phi

    @property
    def m(self) -> int:
        return self.space.m

    def embed(self, x) -> np.ndarray:
        return embed(self, x)


def _scale(rows):
    return rows / np.max(np.abs(rows), axis=1)[:, None]


def canonicalize(space: OrderedSpace) -> LatticeCover:
    rows = _scale(space.phi)
    exact_rows = None
    if space.phi_q is not None:
        exact_rows = np.array([[v / max(abs(t) for t in r) for v in r] for r in space.phi_q], dtype=object)
    keep = list(range(space.m))
    removed = []
    for j in range(space.m):
        others = [k for k in keep if k != j]
        if not others:
            continue
        if cone_member(rows[others], rows[j]).member:
            keep.remove(j)
            removed.append(j)
    if not keep:
        raise CoverInvariantError("every row was removable; the cone cannot be pointed and generating")
    canon = rows[keep]
    # K is unchanged: dropped rows are conic combinations of the kept ones
    for j in removed:
        if not cone_member(canon, rows[j]).member:
            raise CoverInvariantError(f"row {j} is not generated by the canonical rows")
    if np.linalg.matrix_rank(canon) < space.n:
        raise CoverInvariantError("canonical rows lost rank")
    new = certified(space, canon, exact_rows[keep] if exact_rows is not None else None)
    object.__setattr__(new, "interior", space.interior)
    return LatticeCover(space=new, source=space, kept=tuple(keep), removed=tuple(removed))


def raw_cover(space: OrderedSpace) -> LatticeCover:
    """Cover candidate built from the rows as given, without redundancy removal.

    Only meant for negative controls of :func:`certify_order_density`.
    """
    return LatticeCover(space=certified(space, _scale(space.phi)), source=space,
                        kept=tuple(range(space.m)), removed=())


def embed(cover: LatticeCover, x) -> np.ndarray:
    return cover.rows @ cover.space.vec(x)


def rc_element(cover: LatticeCover, A, B) -> np.ndarray:
    """``sup i[A] - sup i[B]`` computed componentwise in R^{m_c}."""
    if not len(A) or not len(B):
        raise ValueError("A and B must be nonempty")
    up = np.max([embed(cover, a) for a in A], axis=0)
    down = np.max([embed(cover, b) for b in B], axis=0)
    return up - down


def density_infimum(cover: LatticeCover, z) -> np.ndarray:
    """Componentwise infimum of ``{Phi_c x : Phi_c x >= z}``."""
    rows = cover.rows
    z = np.asarray(z, dtype=float)
    out = np.empty(cover.m)
    for j in range(cover.m):
        res = solve_lp(LinearProgram(rows[j], rows, z))
        if res.status is LPStatus.INFEASIBLE:
            raise CoverInvariantError("up-set of z in i[X] is empty; i[X] should majorize")
        if res.status is not LPStatus.OPTIMAL:
            raise NumericalFailure(f"row {j}: {res.status.value}")
        out[j] = res.value
    return out


def certify_order_density(cover: LatticeCover, samples: int = DENSITY_SAMPLES, seed: int = 0,
                          tol: float = 1e-8, points=None) -> DensityReport:
    """Check ``z = inf{i(x) : i(x) >= z}`` on sampled ``z`` (plus any given ``points``)."""
    rng = np.random.default_rng(seed)
    zs = [np.asarray(p, dtype=float) for p in (points or [])]
    zs += list(rng.standard_normal((samples, cover.m)))
    failures = []
    for idx, z in enumerate(zs):
        c = density_infimum(cover, z)
        if np.max(np.abs(c - z)) > tol * (1 + np.max(np.abs(z))):
            failures.append({"index": idx, "z": z.tolist(), "infimum": c.tolist()})
    return DensityReport(samples=len(zs), seed=seed, failures=failures)


def certify(cover: LatticeCover, samples: int = DENSITY_SAMPLES, seed: int = 0) -> LatticeCover:
    report = certify_order_density(cover, samples, seed)
    return LatticeCover(cover.space, cover.source, cover.kept, cover.removed, report)


def bipositive_on(cover: LatticeCover, x) -> bool:
    """``x in K`` decided through the source rows equals ``i(x) >= 0``; returns agreement."""
    x = np.asarray(x, dtype=float)
    a = bool(np.all(cover.source.phi @ x >= 0))
    b = bool(np.all(embed(cover, x) >= 0))
    return a == b


def cover_report(cover: LatticeCover) -> dict:
    d = cover.density
    return {
        "space": cover.space.name,
        "canonical_rows": cover.rows.tolist(),
        "removed_rows": list(cover.removed),
        "density_samples": d.samples if d else 0,
        "density_seed": d.seed if d else None,
        "density_failures": d.failures if d else [],
        "density_passed": d.passed if d else None,
    }
