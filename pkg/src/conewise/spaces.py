"""Finite-dimensional ordered spaces with polyhedral cones.

A space is given by dual functionals ``Phi`` (rows), ``K = {x : Phi x >= 0}``.
Disjointness is decided either from the definition (upper-bound sets compared
by LP) or, once the rows are a certified lattice cover, by comparing zero
patterns of ``Phi x`` and ``Phi y``.  Bands are subspaces cut out by zero
patterns of cover coordinates.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .optim import LinearProgram, LPStatus, NumericalFailure, solve_lp, to_fractions

TAU_ZERO = 1e-9
M_MAX = 16


class ConeError(ValueError):
    """The given rows do not describe a closed, pointed, generating cone."""


class SpaceFormatError(ValueError):
    """Malformed space file."""


class CoverRequired(RuntimeError):
    """The operation needs a certified lattice cover; use the LP oracle instead."""


class BandEnumerationRefused(RuntimeError):
    pass


class Tri(enum.Enum):
    """Three-valued verdict; ``UNDECIDED`` refuses to act as a boolean."""

    TRUE = "true"
    FALSE = "false"
    UNDECIDED = "undecided"

    def __bool__(self):
        if self is Tri.UNDECIDED:
            raise TypeError("undecided verdict has no truth value")
        return self is Tri.TRUE

    @classmethod
    def of(cls, flag: bool) -> "Tri":
        return cls.TRUE if flag else cls.FALSE


@dataclass(frozen=True, eq=False)
class OrderedSpace:
    phi: np.ndarray
    interior: np.ndarray
    name: str = "space"
    cover_certified: bool = False
    phi_q: np.ndarray | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def pointed(self) -> bool:
        return True  # enforced by make_space

    @property
    def generating(self) -> bool:
        return True

    @property
    def phi_norm(self) -> float:
        return float(np.max(np.sum(np.abs(self.phi), axis=1)))

    def vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"vector of shape {x.shape} does not belong to {self.name} (dim {self.n})")
        return x

    def positive(self, x, tol: float = TAU_ZERO) -> bool:
        x = self.vec(x)
        return bool(np.all(self.phi @ x >= -tol * self.phi_norm * max(np.max(np.abs(x)), 1e-300)))

    def exact_phi(self) -> np.ndarray:
        return self.phi_q if self.phi_q is not None else to_fractions(self.phi)


def make_space(phi, name: str = "space", phi_q=None) -> OrderedSpace:
    if phi_q is not None:
        phi_q = np.asarray(phi_q, dtype=object)
        phi = np.array(phi_q, dtype=float)
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.size == 0 or phi.ndim != 2:
        raise ConeError("Phi must be a nonempty matrix")
    if not np.all(np.isfinite(phi)):
        raise ConeError("Phi has non-finite entries")
    norms = np.max(np.abs(phi), axis=1)
    if np.any(norms == 0):
        raise ConeError(f"zero dual functional at rows {np.flatnonzero(norms == 0).tolist()}")
    m, n = phi.shape
    if np.linalg.matrix_rank(phi / norms[:, None]) < n:
        raise ConeError("cone not pointed: rank(Phi) < dim, so K contains a line")
    x = _interior_point(phi / norms[:, None])
    if x is None:
        raise ConeError("cone not generating: no interior point")
    return OrderedSpace(phi=phi, interior=x, name=name, phi_q=phi_q)


def _interior_point(phi):
    m, n = phi.shape
    # maximise s subject to Phi x >= s, s <= 1
    G = np.zeros((m + 1, n + 1))
    G[:m, :n] = phi
    G[:m, n] = -1.0
    G[m, n] = -1.0
    h = np.zeros(m + 1)
    h[m] = -1.0
    c = np.zeros(n + 1)
    c[n] = -1.0
    out = solve_lp(LinearProgram(c, G, h))
    if out.status is not LPStatus.OPTIMAL or out.witness[n] <= 1e-9:
        return None
    x = out.witness[:n]
    return x / np.max(np.abs(x))


def load_space(path) -> OrderedSpace:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpaceFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return space_from_dict(data)


def space_from_dict(data) -> OrderedSpace:
    if not isinstance(data, dict):
        raise SpaceFormatError("top level must be an object")
    unknown = set(data) - {"dim", "dual_rays", "name"}
    if unknown:
        raise SpaceFormatError(f"unknown fields: {sorted(unknown)}")
    for key in ("dim", "dual_rays"):
        if key not in data:
            raise SpaceFormatError(f"missing field {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise SpaceFormatError("field 'dim' must be a positive integer")
    rays = data["dual_rays"]
    if not isinstance(rays, list) or not rays:
        raise SpaceFormatError("field 'dual_rays' must be a nonempty list")
    rows = []
    for i, row in enumerate(rays):
        if not isinstance(row, list) or len(row) != dim:
            raise SpaceFormatError(f"dual_rays[{i}] must be a list of length {dim}")
        try:
            rows.append([parse_number(v) for v in row])
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise SpaceFormatError(f"dual_rays[{i}]: {exc}") from None
    return make_space(None, name=str(data.get("name", "space")), phi_q=np.array(rows, dtype=object))


def parse_number(v) -> Fraction:
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return Fraction(v) if isinstance(v, int) else Fraction(str(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot parse {v!r} as a number")


def space_to_dict(space: OrderedSpace) -> dict:
    rows = space.phi_q if space.phi_q is not None else space.phi
    return {"dim": space.n, "dual_rays": [[_fmt(v) for v in row] for row in rows], "name": space.name}


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    v = float(v)
    return int(v) if v.is_integer() else v


# -- upper bounds and the definitional disjointness oracle -------------------


@dataclass(frozen=True)
class UpperBoundSet:
    """``{u : Phi u >= bounds}``; ``point`` is one member (the set is never empty here)."""

    bounds: np.ndarray
    point: np.ndarray


def upper_bounds(space: OrderedSpace, points) -> UpperBoundSet:
    vals = np.array([space.phi @ space.vec(p) for p in points])
    c = np.max(vals, axis=0)
    s = space.phi @ space.interior
    alpha = max(0.0, float(np.max(c / s)))
    return UpperBoundSet(bounds=c, point=alpha * space.interior)


def _contained(phi, c_in, c_out, tol, exact) -> Tri:
    """Is ``{u : Phi u >= c_in}`` inside ``{u : Phi u >= c_out}``?"""
    undecided = False
    for j in range(phi.shape[0]):
        # Phi u >= c_in already forces phi_j(u) >= c_in[j]
        if c_out[j] <= c_in[j] + tol:
            continue
        try:
            out = solve_lp(LinearProgram(phi[j], phi, c_in), exact=exact)
        except NumericalFailure:
            undecided = True
            continue
        if out.status is not LPStatus.OPTIMAL:
            undecided = True
            continue
        lo = out.witness @ phi[j] if exact else out.value
        if lo < c_out[j] - tol:
            return Tri.FALSE
    return Tri.UNDECIDED if undecided else Tri.TRUE


def is_disjoint_oracle(space: OrderedSpace, x, y, tol: float = TAU_ZERO, exact: bool = False) -> Tri:
    """Decide ``x ⊥ y`` from the definition ``{x+y, -x-y}^u = {x-y, -x+y}^u``.

    Uses only the H-representation; each inclusion is checked row by row with
    one LP ``min phi_j(u)`` over the first upper-bound set.
    """
    x, y = space.vec(x), space.vec(y)
    if exact:
        phi = space.exact_phi()
        xq, yq = to_fractions(x), to_fractions(y)
        c1 = np.array([abs(v) for v in phi @ (xq + yq)], dtype=object)
        c2 = np.array([abs(v) for v in phi @ (xq - yq)], dtype=object)
        t = 0
    else:
        phi = space.phi
        c1 = np.abs(phi @ (x + y))
        c2 = np.abs(phi @ (x - y))
        t = tol * space.phi_norm * max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1e-300)
    first = _contained(phi, c1, c2, t, exact)
    if first is Tri.FALSE:
        return first
    second = _contained(phi, c2, c1, t, exact)
    if second is Tri.FALSE:
        return second
    if Tri.UNDECIDED in (first, second):
        return Tri.UNDECIDED
    return Tri.TRUE


# -- cover-based tests --------------------------------------------------------


def _require_cover(space: OrderedSpace):
    if not space.cover_certified:
        raise CoverRequired(f"{space.name} has no certified lattice cover; use is_disjoint_oracle")


def support(space: OrderedSpace, x, tol: float = TAU_ZERO) -> frozenset:
    x = space.vec(x)
    v = space.phi @ x
    thresh = tol * space.phi_norm * float(np.max(np.abs(x)))
    return frozenset(np.flatnonzero(np.abs(v) > thresh).tolist())


def is_disjoint(space: OrderedSpace, x, y, tol: float = TAU_ZERO) -> bool:
    """Componentwise test ``|i(x)| ∧ |i(y)| = 0`` in the cover coordinates."""
    _require_cover(space)
    return not (support(space, x, tol) & support(space, y, tol))


def _row_basis(rows, tol=1e-10):
    if rows.shape[0] == 0:
        return np.zeros((0, rows.shape[1]))
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    r = int(np.sum(s > tol * max(s[0], 1e-300)))
    return vt[:r]


def saturate(space: OrderedSpace, pattern) -> frozenset:
    """All rows lying in the span of the rows in ``pattern``."""
    _require_cover(space)
    Z = frozenset(int(j) for j in pattern)
    cache = space._cache.setdefault("sat", {})
    if Z in cache:
        return cache[Z]
    if not Z:
        out = frozenset()
    else:
        unit = space._cache.get("unit")
        if unit is None:
            unit = space.phi / np.linalg.norm(space.phi, axis=1)[:, None]
            space._cache["unit"] = unit
        Q = _row_basis(unit[sorted(Z)])
        resid = unit - (unit @ Q.T) @ Q
        out = frozenset(np.flatnonzero(np.linalg.norm(resid, axis=1) <= 1e-9).tolist()) | Z
    cache[Z] = out
    return out


def null_basis(rows, n, tol=1e-10) -> np.ndarray:
    """Orthonormal columns spanning ``{x : rows x = 0}``."""
    if rows.shape[0] == 0:
        return np.eye(n)
    Q = _row_basis(rows, tol)
    if Q.shape[0] == n:
        return np.zeros((n, 0))
    _, _, vt = np.linalg.svd(np.vstack([Q, np.zeros((n - Q.shape[0], n))]))
    return vt[Q.shape[0]:].T


@dataclass(frozen=True, eq=False)
class Band:
    space: OrderedSpace
    pattern: frozenset
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, x, tol: float = TAU_ZERO) -> bool:
        x = self.space.vec(x)
        if not self.pattern:
            return True
        v = self.space.phi[sorted(self.pattern)] @ x
        return bool(np.all(np.abs(v) <= tol * self.space.phi_norm * max(float(np.max(np.abs(x))), 1e-300)))

    def sample(self, rng) -> np.ndarray:
        return self.basis @ rng.standard_normal(self.dim)

    def key(self) -> tuple:
        return tuple(sorted(self.pattern))


def band(space: OrderedSpace, pattern) -> Band:
    Z = saturate(space, pattern)
    cache = space._cache.setdefault("band", {})
    if Z not in cache:
        unit = space.phi / np.linalg.norm(space.phi, axis=1)[:, None]
        cache[Z] = Band(space, Z, null_basis(unit[sorted(Z)], space.n))
    return cache[Z]


def complement_pattern(space: OrderedSpace, pattern) -> frozenset:
    """Pattern of ``B_Z^d``: saturation of the rows not vanishing on ``B_Z``."""
    Z = saturate(space, pattern)
    return saturate(space, frozenset(range(space.m)) - Z)


def disjoint_complement(space: OrderedSpace, M) -> Band:
    _require_cover(space)
    Z = frozenset()
    for x in M:
        Z |= support(space, x)
    return band(space, Z)


def band_complement(b: Band) -> Band:
    return band(b.space, complement_pattern(b.space, b.pattern))


def is_band(space: OrderedSpace, pattern) -> bool:
    Z = saturate(space, pattern)
    return complement_pattern(space, complement_pattern(space, Z)) == Z


def is_lattice(space: OrderedSpace) -> bool:
    return space.m == space.n


def _coatom_generators(space: OrderedSpace) -> set:
    """Patterns ``{v}^d`` for ``v`` spanning a one-dimensional zero-pattern subspace."""
    m, n = space.m, space.n
    unit = space.phi / np.linalg.norm(space.phi, axis=1)[:, None]
    flats = set()
    if n == 1:
        flats.add(frozenset())
    else:
        for S in itertools.combinations(range(m), n - 1):
            F = saturate(space, S)
            if F in flats:
                continue
            if len(_row_basis(unit[sorted(F)])) == n - 1:
                flats.add(F)
    full = frozenset(range(m))
    return {saturate(space, full - F) for F in flats}


def enumerate_bands(space: OrderedSpace, m_max: int = M_MAX) -> list[Band]:
    """All bands, as patterns closed under joins of principal complements.

    Ordered by decreasing pattern size ({0} first), then lexicographically.
    """
    _require_cover(space)
    if space.m > m_max:
        raise BandEnumerationRefused(
            f"{space.m} cover rows exceed m_max={m_max}; use sampled checks instead")
    cached = space._cache.get("bands")
    if cached is not None:
        return cached
    if is_lattice(space):
        patterns = {frozenset(c) for r in range(space.m + 1) for c in itertools.combinations(range(space.m), r)}
    else:
        gens = sorted(_coatom_generators(space), key=lambda p: (len(p), sorted(p)))
        patterns = {frozenset()}
        frontier = list(gens)
        patterns.update(gens)
        while frontier:
            nxt = []
            for P in frontier:
                for g in gens:
                    Q = saturate(space, P | g)
                    if Q not in patterns:
                        patterns.add(Q)
                        nxt.append(Q)
            frontier = nxt
    out = [band(space, P) for P in sorted(patterns, key=lambda p: (-len(p), sorted(p)))]
    space._cache["bands"] = out
    return out


def preservation_bands(space: OrderedSpace, m_max: int = M_MAX) -> list[Band]:
    """Bands whose preservation implies preservation of every band.

    Intersections of preserved subspaces are preserved, so on a lattice the
    coordinate hyperplane bands suffice (every band is an intersection of
    them).  Elsewhere the full enumeration is used.
    """
    _require_cover(space)
    if not is_lattice(space):
        return enumerate_bands(space, m_max)
    cached = space._cache.get("hyperplane_bands")
    if cached is None:
        cached = [band(space, {j}) for j in range(space.m)]
        space._cache["hyperplane_bands"] = cached
    return cached


def is_directed_band(b: Band) -> bool:
    """Whether ``B ∩ K`` spans ``B`` (a strictly positive point in the relative interior)."""
    space = b.space
    if b.dim == 0:
        return True
    free = sorted(set(range(space.m)) - b.pattern)
    phi_b = space.phi[free] @ b.basis
    k = b.dim
    G = np.zeros((len(free) + 1, k + 1))
    G[:-1, :k] = phi_b
    G[:-1, k] = -1.0
    G[-1, k] = -1.0
    h = np.zeros(len(free) + 1)
    h[-1] = -1.0
    c = np.zeros(k + 1)
    c[k] = -1.0
    out = solve_lp(LinearProgram(c, G, h))
    return out.status is LPStatus.OPTIMAL and out.witness[k] > 1e-9


def certified(space: OrderedSpace, rows, rows_q=None) -> OrderedSpace:
    """Copy of ``space`` carrying certified canonical rows (used by the cover module)."""
    return replace(space, phi=np.asarray(rows, dtype=float), cover_certified=True, phi_q=rows_q, _cache={})
