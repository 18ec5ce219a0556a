import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewise.generators import random_space
from conewise.norms import (
    SUP,
    NormInputError,
    NormSpec,
    band_closed_probe,
    operator_norm,
    order_unit_norm,
    regular_norm,
    rho_extension,
    rho_meet,
    rho_meet_disjoint,
    semimonotone_constant,
)
from conewise.cover import embed
from conewise.spaces import band, enumerate_bands, make_space, band_complement

OU = NormSpec("order_unit", u=(0, 0, 1))


def test_regular_norm_standard():
    r = regular_norm(make_space(np.eye(2)), SUP, [1, -1])
    assert r.value == pytest.approx(1.0)
    np.testing.assert_allclose(r.witness, [1, 1])
    assert regular_norm(make_space(np.eye(2)), SUP, [0, 0]).value == 0


def test_regular_norm_four_ray_rational(fr_raw):
    a = regular_norm(fr_raw, SUP, [1, 0, 0])
    b = regular_norm(fr_raw, SUP, [1, 0, 0], exact=True)
    assert a.value == pytest.approx(1.0, rel=1e-12)
    assert float(b.value) == 1.0


def test_rho_extension_examples(fr_cover):
    a = rho_extension(fr_cover, SUP, [1, 0, 0, 0])
    b = rho_extension(fr_cover, SUP, [1, 0, 0, 0], exact=True)
    assert a.value == pytest.approx(0.5) and float(b.value) == 0.5
    assert rho_extension(fr_cover, SUP, np.zeros(4)).value == 0


def test_rho_meet_examples(fr_cover):
    assert rho_meet_disjoint(fr_cover, SUP, [1, 0, 1], [-1, 0, 1])
    assert rho_meet(fr_cover, SUP, [1, 0, 1], [-1, 0, 1]) == 0
    assert not rho_meet_disjoint(fr_cover, SUP, [1, 0, 1], [1, 0, 1])


def test_rho_meet_band_pairs(fr_cover):
    rng = np.random.default_rng(0)
    for b in enumerate_bands(fr_cover.space):
        c = band_complement(b)
        if b.dim and c.dim:
            assert rho_meet_disjoint(fr_cover, SUP, b.sample(rng), c.sample(rng))


def test_semimonotone_constants(fr_raw):
    assert semimonotone_constant(make_space(np.eye(3)), SUP) == pytest.approx(1)
    assert semimonotone_constant(fr_raw, OU) == pytest.approx(1)
    M = semimonotone_constant(fr_raw, SUP)
    # sampled lower bound: ||x|| / ||y|| over random 0 <= x <= y
    rng = np.random.default_rng(0)
    best = 0.0
    for _ in range(2000):
        y = rng.standard_normal(3) + np.array([0, 0, 2.5])
        x = rng.random() * y + 0.1 * rng.standard_normal(3)
        if np.all(fr_raw.phi @ x >= 0) and np.all(fr_raw.phi @ (y - x) >= 0):
            best = max(best, np.max(np.abs(x)) / np.max(np.abs(y)))
    assert best <= M + 1e-9
    assert M == pytest.approx(1.0)


def test_order_unit_norm_examples():
    s = make_space(np.eye(2))
    assert order_unit_norm(s, [1, 1], [2, -1]) == pytest.approx(2)
    assert order_unit_norm(s, [1, 1], [0, 0]) == 0
    assert order_unit_norm(s, [1, 1], [1, 1]) == pytest.approx(1)
    with pytest.raises(NormInputError):
        order_unit_norm(s, [1, 0], [1, 1])


def test_operator_norm_sup():
    assert operator_norm(make_space(np.eye(2)), SUP, np.diag([0.5, -0.25])) == pytest.approx(0.5)


def test_band_probe_examples(fr):
    b = band(fr, {0, 1})
    v = np.array([-1.0, 0, 1])
    seq = [(1 + 1 / k) * v for k in range(1, 20)]
    rep = band_closed_probe(fr, SUP, b, sequence=seq, limit=v)
    assert rep.limits_in_band == 1 and rep.passed
    s = make_space(np.eye(2))
    from conewise.cover import canonicalize
    s = canonicalize(s).space
    e1 = band(s, {1})
    seq = [np.array([1, 1 / k]) for k in range(1, 20)]
    rep = band_closed_probe(s, SUP, e1, sequence=seq, limit=np.array([1.0, 0]))
    assert rep.rejected_sequences == 1 and rep.passed


def test_band_probe_random(fr):
    for b in enumerate_bands(fr):
        rep = band_closed_probe(fr, SUP, b, trials=200, seed=1)
        assert rep.passed, rep.failures


def test_norm_spec_validation():
    with pytest.raises(NormInputError):
        NormSpec("euclid")
    with pytest.raises(NormInputError):
        NormSpec.from_dict({"kind": "sup", "bogus": 1})


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_extension_identity(seed):
    rng = np.random.default_rng(seed)
    raw, cov = random_space(rng, n_max=4, m_max=8)
    for x in rng.standard_normal((5, raw.n)):
        a = rho_extension(cov, SUP, embed(cov, x)).value
        b = regular_norm(raw, SUP, x).value
        assert a == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_degenerate_meet_falls_back_to_rationals():
    # the meet has entries of size 1e-16; float phase one stalls on this instance
    raw, cov = random_space(np.random.default_rng(6))
    from conewise.generators import mixed_pairs
    x, y = mixed_pairs(cov.space, 500, seed=6)[341]
    r = rho_meet(cov, SUP, x, y)
    assert r == pytest.approx(0.6124660603499026, rel=1e-9)
