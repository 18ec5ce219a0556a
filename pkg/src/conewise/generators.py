"""Test-space and test-operator constructions."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import block_diag

from .cover import LatticeCover, canonicalize
from .operators import sample_disjoint_pair
from .spaces import OrderedSpace, make_space, null_basis, preservation_bands

FOUR_RAY = [[1, 1, 1], [1, -1, 1], [-1, 1, 1], [-1, -1, 1]]
TRIANGLE = [[1, 0, 1], [-1, 1, 1], [0, -1, 1]]


class GeneratorError(RuntimeError):
    pass


def standard(n: int) -> OrderedSpace:
    return make_space(np.eye(n), f"std{n}")


def four_ray() -> OrderedSpace:
    return make_space(FOUR_RAY, "four_ray")


def polygon(k: int) -> OrderedSpace:
    """Cone over a regular ``k``-gon in R^3 (``k = 3, 4`` use integer rows)."""
    if k == 3:
        return make_space(TRIANGLE, "poly3")
    if k == 4:
        return make_space(FOUR_RAY, "poly4")
    a = 2 * math.pi * np.arange(k) / k
    return make_space(np.column_stack([np.cos(a), np.sin(a), np.ones(k)]), f"poly{k}")


def direct_sum(*spaces: OrderedSpace) -> OrderedSpace:
    return make_space(block_diag(*[s.phi for s in spaces]), "+".join(s.name for s in spaces))


def transform(space: OrderedSpace, T) -> OrderedSpace:
    """Image ``T^{-1} K`` of the cone, written as ``{x : Phi T x >= 0}``."""
    return make_space(space.phi @ np.asarray(T, float), f"{space.name}*T")


def with_redundant_rows(space: OrderedSpace, rng, count: int = 2) -> OrderedSpace:
    """Append nonnegative integer combinations of existing rows."""
    rows = [space.phi]
    for _ in range(count):
        i, j = rng.choice(space.m, size=2, replace=False)
        rows.append((rng.integers(1, 3) * space.phi[i] + rng.integers(1, 3) * space.phi[j])[None, :])
    return make_space(np.vstack(rows), f"{space.name}+r")


def _random_transform(n, rng):
    while True:
        T = np.eye(n) + rng.integers(-1, 2, size=(n, n)) * (rng.random((n, n)) < 0.4)
        if abs(np.linalg.det(T)) > 0.5 and np.linalg.cond(T) < 40:
            return T


def random_space(rng, n_max: int = 6, m_max: int = 12, redundant: bool = True) -> tuple[OrderedSpace, LatticeCover]:
    """Direct sum of small lattice and polygon blocks, transformed, with optional redundant rows.

    Returns the raw space and its canonical cover (whose ``space`` is certified).
    """
    for _ in range(100):
        blocks, n, m = [], 0, 0
        for _ in range(rng.integers(1, 4)):
            if rng.random() < 0.6:
                k = int(rng.integers(3, 7))
                b = polygon(k)
            else:
                b = standard(int(rng.integers(1, 4)))
            if n + b.n <= n_max and m + b.m <= m_max:
                blocks.append(b)
                n, m = n + b.n, m + b.m
        if not blocks or n < 2:
            continue
        sp = direct_sum(*blocks)
        sp = transform(sp, _random_transform(n, rng))
        if redundant and sp.m < m_max:
            sp = with_redundant_rows(sp, rng, int(rng.integers(1, m_max - sp.m + 1)))
        return sp, canonicalize(sp)
    raise GeneratorError("could not assemble a random space")


# -- operators ---------------------------------------------------------------------------


def local_operator_basis(space: OrderedSpace) -> np.ndarray:
    """Basis (k × n × n) of all band preserving matrices, via the linear band constraints."""
    n = space.n
    rows = []
    for b in preservation_bands(space):
        if not b.pattern or b.dim == 0:
            continue
        for j in sorted(b.pattern):
            for v in b.basis.T:
                rows.append(np.kron(space.phi[j], v))
    if not rows:
        return np.eye(n * n).reshape(-1, n, n)
    C = np.array(rows)
    _, sv, Vt = np.linalg.svd(C, full_matrices=True)
    rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0])))
    return Vt[rank:].reshape(-1, n, n)


def random_local(space: OrderedSpace, rng, scale: float = 1.0, basis=None) -> np.ndarray:
    basis = local_operator_basis(space) if basis is None else basis
    A = np.tensordot(rng.standard_normal(len(basis)), basis, axes=1)
    nrm = np.max(np.abs(A))
    return A * (scale / nrm) if nrm > 0 else A


def cover_classes(space: OrderedSpace, tol: float = 1e-8) -> list[list[int]]:
    """Partition of cover rows on which a diagonal ``D`` with ``D i[X] ⊆ i[X]`` must be constant."""
    P = space.phi
    m = space.m
    proj = np.eye(m) - P @ np.linalg.pinv(P)
    # d -> proj diag(d) P, columns indexed by d
    L = np.stack([np.outer(proj[:, j], P[j]).ravel() for j in range(m)], axis=1)
    _, sv, Vt = np.linalg.svd(L, full_matrices=True)
    rank = int(np.sum(sv > 1e-9))
    N = Vt[rank:].T
    classes: list[list[int]] = []
    for j in range(m):
        for c in classes:
            if np.allclose(N[j], N[c[0]], atol=tol):
                c.append(j)
                break
        else:
            classes.append([j])
    return classes


def multiplication_operator(space: OrderedSpace, d) -> np.ndarray:
    """Pull back ``diag(d)`` on the cover: ``A`` with ``Phi A = diag(d) Phi``."""
    P = space.phi
    d = np.asarray(d, float)
    A = np.linalg.pinv(P) @ (d[:, None] * P)
    if np.max(np.abs(P @ A - d[:, None] * P)) > 1e-9 * max(1.0, np.max(np.abs(d))):
        raise GeneratorError("diag(d) does not map i[X] into itself")
    return A


def random_cover_diagonal(space: OrderedSpace, rng, low: float = -1.0, high: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    d = np.empty(space.m)
    for c in cover_classes(space):
        d[c] = rng.uniform(low, high)
    return multiplication_operator(space, d), d


def random_positive_local_bijection(space: OrderedSpace, rng) -> np.ndarray:
    return random_cover_diagonal(space, rng, 0.2, 3.0)[0]


def random_operator_mix(space: OrderedSpace, rng, basis=None):
    """Yield ``(matrix, expected_local or None)`` from local, perturbed and free draws."""
    n = space.n
    kind = rng.integers(0, 3)
    if kind == 0:
        return random_local(space, rng, basis=basis), True
    if kind == 1:
        return random_local(space, rng, basis=basis) + 0.3 * rng.standard_normal((n, n)), None
    return rng.standard_normal((n, n)), None


# -- pairs -------------------------------------------------------------------------------


def pattern_pair(space: OrderedSpace, rng):
    """Random ``x, y`` with random zero patterns: sometimes disjoint, usually not."""
    out = []
    for _ in range(2):
        S = np.flatnonzero(rng.random(space.m) < rng.random())
        V = null_basis(space.phi[S], space.n) if len(S) else np.eye(space.n)
        out.append(V @ rng.standard_normal(V.shape[1]) if V.shape[1] else np.zeros(space.n))
    return tuple(out)


def mixed_pairs(space: OrderedSpace, count: int, seed: int = 0):
    """Half constructed disjoint via band complements, half random pattern pairs."""
    rng = np.random.default_rng(seed)
    pairs = []
    for k in range(count):
        if k % 2 == 0:
            p = sample_disjoint_pair(space, rng)
            if p is not None:
                pairs.append(p)
                continue
        pairs.append(pattern_pair(space, rng))
    return pairs
