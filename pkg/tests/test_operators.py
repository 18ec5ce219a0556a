import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewise.generators import (
    local_operator_basis,
    random_cover_diagonal,
    random_local,
    random_positive_local_bijection,
    random_space,
)
from conewise.operators import (
    LinOp,
    OperatorInputError,
    center_bound_check,
    cross_validated_dp,
    inverse_local_check,
    is_band_preserving,
    is_bipositive,
    is_disjointness_preserving,
    is_local,
    is_positive,
    locality_algebra_check,
    positive_off_diagonal_pair,
    sample_disjoint_pairs,
)
from conewise.spaces import Tri, is_disjoint_oracle

ROT = [[0.0, -1.0], [1.0, 0.0]]
T, F = Tri.TRUE, Tri.FALSE


def op(A, space, domain=None):
    return LinOp(np.asarray(A, float), space, domain)


def test_linop_validation(std2):
    with pytest.raises(OperatorInputError):
        LinOp(np.eye(3), std2)
    with pytest.raises(OperatorInputError):
        LinOp([[np.nan, 0], [0, 1]], std2)
    with pytest.raises(OperatorInputError):
        LinOp(np.eye(2), std2, domain=[[1, 2], [1, 2]])


def test_positive_examples(std2, fr):
    assert is_positive(op(np.eye(2), std2)).value is T
    v = is_positive(op(ROT, std2))
    assert v.value is F
    x = np.array(v.certificate["x"])
    assert np.all(x >= 0) and not np.all(np.asarray(ROT) @ x >= 0)
    # e1 is mapped to e2 >= 0, so it does not witness non-positivity of this rotation
    assert np.all(np.asarray(ROT) @ [1, 0] >= 0)
    assert is_positive(op(np.diag([1, 1, 2]), fr)).value is T
    assert is_positive(op(np.diag([1, 1, 2]), fr), exact=True).value is T


def test_bipositive_examples(std2):
    assert is_bipositive(op(2 * np.eye(2), std2)).value is T
    P = np.array([[1.0, 0], [0, 0]])
    assert is_positive(op(P, std2)).value is T
    v = is_bipositive(op(P, std2))
    assert v.value is F
    x = np.array(v.certificate["x"])
    assert np.all(P @ x >= 0) and not np.all(x >= 0)
    # the witness (1,-1) works too
    assert np.all(P @ [1, -1] >= 0)
    assert is_bipositive(op(ROT, std2)).value is F


def test_local_examples(std2, std3, fr):
    assert is_local(op(np.diag([2, -3, 0.5]), std3)).value is T
    v = is_band_preserving(op([[0, 1], [1, 0]], std2))
    assert v.value is F and v.certificate["band"] == [0]
    x, y = np.array(v.certificate["x"]), np.array(v.certificate["y"])
    assert is_disjoint_oracle(std2, x, y) is T
    assert is_disjoint_oracle(std2, np.array([[0, 1], [1, 0]]) @ x, y) is F
    rng = np.random.default_rng(0)
    A = np.eye(3) + 0.1 * random_local(fr, rng)
    e = is_local(op(A, fr)).value
    s = is_local(op(A, fr), "sampled", pairs=1000).value
    assert e is T and s is T


def test_dp_examples(std2, std3, fr):
    P = np.eye(3)[[2, 0, 1]]
    assert is_disjointness_preserving(op(P, std3)).value is T
    assert cross_validated_dp(op(P, std3)).value is T
    v = is_disjointness_preserving(op([[1, 1], [0, 1]], std2))
    assert v.value is F
    np.testing.assert_allclose(v.certificate["x"], [1, 0])
    np.testing.assert_allclose(v.certificate["y"], [0, 1])
    refl = op(np.diag([1, -1, 1]), fr)
    assert is_disjointness_preserving(refl).value is T
    assert is_disjointness_preserving(refl, "sampled", pairs=300).value is T
    assert cross_validated_dp(refl, pairs=300).value is T
    # the reflection swaps bands, so it is not local
    assert is_local(refl).value is F


def test_algebra_examples(std2, fr):
    rep = locality_algebra_check(op(np.diag([1, 2]), std2), op(np.diag([3, -1]), std2), 2.0, -0.5)
    assert rep["passed"]
    rng = np.random.default_rng(5)
    S, Tm = random_local(fr, rng), random_local(fr, rng)
    assert locality_algebra_check(op(S, fr), op(Tm, fr), 0.7, 1.3)["passed"]
    assert locality_algebra_check(op(S, fr), op(Tm, fr), 0.0, 0.0)["passed"]
    swap = op([[0, 1], [1, 0]], std2)
    assert locality_algebra_check(swap, swap, 1, 1)["status"] == "not applicable"


def test_inverse_examples(std3, fr):
    assert inverse_local_check(op(np.diag([1, 2, 3]), std3))["passed"]
    assert inverse_local_check(op(3 * np.eye(3), fr))["passed"]
    rng = np.random.default_rng(2)
    assert inverse_local_check(op(random_positive_local_bijection(fr, rng), fr))["passed"]
    rep = inverse_local_check(op(np.diag([1, -1, 1]), std3))
    assert rep["status"] == "not applicable"
    with pytest.raises(OperatorInputError):
        inverse_local_check(op(np.diag([1, 0, 1]), std3))


def test_pod_examples(std2, std3, fr):
    assert positive_off_diagonal_pair(op(np.diag([1, 2, 3]), std3)).value is T
    v = positive_off_diagonal_pair(op([[0, 1], [0, 0]], std2))
    assert v.value is F
    x = np.array(v.certificate["x"])
    assert x[0] == pytest.approx(0) and x[1] > 0
    assert positive_off_diagonal_pair(op(np.eye(3), fr)).value is T


def test_center_examples(std2, fr):
    r = center_bound_check(op(np.diag([0.5, -0.25]), std2))
    assert r["passed"] and r["alpha_min"] == pytest.approx(0.5) and r["operator_norm"] == pytest.approx(0.5)
    assert center_bound_check(op(np.eye(2), std2))["alpha_min"] == pytest.approx(1)
    assert center_bound_check(op(np.zeros((2, 2)), std2))["alpha_min"] == 0
    assert center_bound_check(op(np.eye(3), fr))["status"] == "not applicable"


def test_restricted_domain(std3):
    # only span{e1, e2} is the domain; the third column is irrelevant
    A = np.array([[1.0, 0, 5], [0, 2, 7], [0, 0, 1]])
    D = np.eye(3)[:, :2]
    assert is_local(op(A, std3, D)).value is T
    assert is_local(op(A, std3)).value is F
    for x, y in sample_disjoint_pairs(std3, 20, seed=0, domain=D):
        assert np.allclose(x[2], 0)


@st.composite
def local_case(draw):
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    _, cov = random_space(rng, n_max=4, m_max=8)
    return cov.space, rng


@settings(max_examples=20, deadline=None)
@given(local_case())
def test_local_implies_dp(case):
    sp, rng = case
    A = op(random_local(sp, rng), sp)
    assert is_local(A).value is T
    assert is_disjointness_preserving(A, "sampled", pairs=60, seed=1).value is T


@settings(max_examples=15, deadline=None)
@given(local_case())
def test_bipositive_bijection_dp(case):
    sp, rng = case
    A = op(random_positive_local_bijection(sp, rng), sp)
    assert is_bipositive(A).value is T
    assert is_disjointness_preserving(A, "sampled", pairs=60, seed=2).value is T


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_pod_implies_local_on_standard_cone(seed, n):
    from conewise.cover import canonicalize
    from conewise.generators import standard
    sp = canonicalize(standard(n)).space
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3)
    A = op(A, sp)
    if positive_off_diagonal_pair(A).value is T:
        assert is_local(A).value is T


@settings(max_examples=15, deadline=None)
@given(local_case())
def test_generated_basis_is_local(case):
    sp, rng = case
    B = local_operator_basis(sp)
    for k in range(min(3, len(B))):
        assert is_local(op(B[k], sp)).value is T
    A, d = random_cover_diagonal(sp, rng)
    np.testing.assert_allclose(sp.phi @ A, d[:, None] * sp.phi, atol=1e-9)
