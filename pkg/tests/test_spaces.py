import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewise.cover import canonicalize
from conewise.generators import four_ray, random_space, standard
from conewise.spaces import (
    BandEnumerationRefused,
    ConeError,
    CoverRequired,
    SpaceFormatError,
    Tri,
    band,
    band_complement,
    disjoint_complement,
    enumerate_bands,
    is_directed_band,
    is_disjoint,
    is_disjoint_oracle,
    load_space,
    make_space,
    preservation_bands,
    saturate,
    space_from_dict,
    space_to_dict,
    support,
    upper_bounds,
)


def test_standard_space_valid():
    s = make_space(np.eye(2))
    assert s.pointed and s.generating


def test_four_ray_interior(fr_raw):
    assert fr_raw.pointed and fr_raw.generating
    assert np.all(fr_raw.phi @ fr_raw.interior > 0)
    np.testing.assert_allclose(fr_raw.interior / fr_raw.interior[2], [0, 0, 1], atol=1e-12)


def test_not_pointed():
    with pytest.raises(ConeError, match="cone not pointed"):
        make_space([[1, 0], [-1, 0]])


def test_not_generating():
    with pytest.raises(ConeError, match="cone not generating"):
        make_space([[1, 0], [-1, 0], [0, 1]])


def test_upper_bounds_examples(fr_raw):
    s = make_space(np.eye(2))
    np.testing.assert_allclose(upper_bounds(s, [[1, 0], [0, 1]]).bounds, [1, 1])
    np.testing.assert_allclose(upper_bounds(fr_raw, [[1, 0, 1], [-1, 0, 1]]).bounds, [2, 2, 2, 2])
    a = np.array([0.3, -0.2, 1.0])
    ub = upper_bounds(fr_raw, [a, a])
    np.testing.assert_allclose(ub.bounds, fr_raw.phi @ a)
    assert np.all(fr_raw.phi @ ub.point >= ub.bounds - 1e-12)


@pytest.mark.parametrize("exact", [False, True])
def test_oracle_examples(fr_raw, exact):
    s = make_space(np.eye(2))
    assert is_disjoint_oracle(s, [1, 0], [0, 1], exact=exact) is Tri.TRUE
    assert is_disjoint_oracle(fr_raw, [1, 0, 1], [-1, 0, 1], exact=exact) is Tri.TRUE
    assert is_disjoint_oracle(fr_raw, [1, 0, 1], [0, 1, 1], exact=exact) is Tri.FALSE
    assert is_disjoint_oracle(fr_raw, [0.4, -2, 3], [0, 0, 0], exact=exact) is Tri.TRUE


def test_oracle_needs_no_cover(fr_raw):
    # raw space is not cover certified; the oracle still answers
    assert not fr_raw.cover_certified
    assert is_disjoint_oracle(fr_raw, [1, 0, 1], [-1, 0, 1]) is Tri.TRUE
    with pytest.raises(CoverRequired):
        is_disjoint(fr_raw, [1, 0, 1], [-1, 0, 1])


def test_fast_disjointness(fr, std3):
    assert support(fr, [1, 0, 1]) == frozenset({0, 1})
    assert support(fr, [-1, 0, 1]) == frozenset({2, 3})
    assert is_disjoint(fr, [1, 0, 1], [-1, 0, 1])
    assert is_disjoint(std3, [1, 0, 0], [0, 1, 0])
    assert not is_disjoint(fr, [1, 2, 5], [1, 2, 5])


def test_disjoint_complement_examples(fr, std3):
    b = disjoint_complement(fr, [[1, 0, 1]])
    assert b.pattern >= {0, 1}
    assert b.dim == 1
    v = b.basis[:, 0]
    np.testing.assert_allclose(v / v[2], [-1, 0, 1], atol=1e-12)
    b = disjoint_complement(std3, [[1, 0, 0]])
    assert b.pattern == frozenset({0}) and b.dim == 2
    assert disjoint_complement(fr, [[0, 0, 0]]).dim == 3
    assert disjoint_complement(fr, []).dim == 3


def test_saturate_examples(fr):
    assert saturate(fr, {0, 1, 2}) == frozenset({0, 1, 2, 3})
    assert saturate(fr, set()) == frozenset()
    assert saturate(fr, range(4)) == frozenset(range(4))


def test_enumerate_bands_standard(std2):
    bands = enumerate_bands(std2)
    assert sorted(b.key() for b in bands) == sorted([(0, 1), (0,), (1,), ()])


def test_enumerate_bands_four_ray(fr):
    bands = enumerate_bands(fr)
    dims = sorted(b.dim for b in bands)
    # {0}, X, and six rank-two patterns: the four edges of the cone plus the two
    # diagonal lines, which are bands but not directed
    assert dims == [0, 1, 1, 1, 1, 1, 1, 3]
    directed = [b for b in bands if is_directed_band(b)]
    assert len(directed) == 6
    rays = sorted(tuple(np.round(b.basis[:, 0] / b.basis[2, 0], 9)) for b in directed if b.dim == 1)
    assert rays == [(-1, 0, 1), (0, -1, 1), (0, 1, 1), (1, 0, 1)]
    for b in bands:
        assert band_complement(band_complement(b)).pattern == b.pattern


def test_one_dimensional_bands():
    s = canonicalize(standard(1)).space
    assert sorted(b.dim for b in enumerate_bands(s)) == [0, 1]


def test_enumeration_cap(fr):
    with pytest.raises(BandEnumerationRefused):
        enumerate_bands(fr, m_max=3)


def test_preservation_bands_lattice(std3):
    keys = sorted(b.key() for b in preservation_bands(std3))
    assert keys == [(0,), (1,), (2,)]


def test_space_json_roundtrip(data_dir, tmp_path):
    s = load_space(data_dir / "four_ray.json")
    assert s.n == 3 and s.m == 4
    p = tmp_path / "s.json"
    p.write_text(json.dumps(space_to_dict(s)))
    np.testing.assert_array_equal(load_space(p).phi, s.phi)


def test_space_json_rationals():
    s = space_from_dict({"dim": 2, "dual_rays": [["1/2", 0], [0, "3"]], "name": "q"})
    np.testing.assert_allclose(s.phi, [[0.5, 0], [0, 3]])


@pytest.mark.parametrize("bad", [
    {"dual_rays": [[1, 0]], "name": "x"},
    {"dim": 2, "dual_rays": [[1, 0, 0]], "name": "x"},
    {"dim": 2, "dual_rays": [[1, 0], [0, 1]], "name": "x", "extra": 1},
])
def test_space_json_errors(bad):
    with pytest.raises(SpaceFormatError):
        space_from_dict(bad)


@st.composite
def space_and_pair(draw):
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    _, cov = random_space(rng, n_max=4, m_max=8)
    sp = cov.space
    bands = enumerate_bands(sp)
    b = bands[draw(st.integers(0, len(bands) - 1))]
    c = band_complement(b)
    x = b.sample(rng) if b.dim else np.zeros(sp.n)
    y = c.sample(rng) if c.dim else np.zeros(sp.n)
    a = draw(st.floats(-5, 5, allow_nan=False))
    bb = draw(st.floats(-5, 5, allow_nan=False))
    return sp, x, y, a, bb


@settings(max_examples=40, deadline=None)
@given(space_and_pair())
def test_disjoint_symmetric_and_scaling(data):
    sp, x, y, a, b = data
    assert is_disjoint(sp, x, y) and is_disjoint(sp, y, x)
    assert is_disjoint_oracle(sp, x, y) is Tri.TRUE
    assert is_disjoint_oracle(sp, y, x) is Tri.TRUE
    assert is_disjoint_oracle(sp, a * x, b * y) is Tri.TRUE


@settings(max_examples=40, deadline=None)
@given(space_and_pair())
def test_complement_is_band(data):
    sp, x, _, _, _ = data
    d = disjoint_complement(sp, [x])
    dd = band_complement(d)
    ddd = band_complement(dd)
    assert ddd.pattern == d.pattern
    assert saturate(sp, d.pattern) == d.pattern
    for v in d.basis.T:
        assert is_disjoint(sp, v, x)
        assert d.contains(v)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_band_membership_by_pattern(seed):
    rng = np.random.default_rng(seed)
    _, cov = random_space(rng, n_max=4, m_max=8)
    sp = cov.space
    for b in enumerate_bands(sp):
        if b.dim:
            x = b.sample(rng)
            assert b.contains(x)
            assert np.max(np.abs(sp.phi[sorted(b.pattern)] @ x), initial=0) < 1e-9 * (1 + np.abs(x).max())
