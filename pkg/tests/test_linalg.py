import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splinenas import linalg
from splinenas.errors import NonFiniteInput, RankDeficient


def test_identity_factorization():
    f = linalg.qr_decompose(np.eye(3), rank_tol=1e-12)
    assert f.rank == 3
    assert np.allclose(f.r(), np.eye(3))


def test_rank_one_detection():
    # second column is twice the first
    f = linalg.qr_decompose([[1.0, 2.0], [2.0, 4.0]], rank_tol=1e-10)
    assert f.rank == 1


def test_reconstruction_random_10x10():
    rng = np.random.default_rng(7)
    a = rng.uniform(-1.0, 1.0, (10, 10))
    f = linalg.qr_decompose(a)
    # oracle: multiply the returned factors back together
    assert np.max(np.abs(f.reconstruct() - a)) <= 1e-10


def test_nonfinite_input_rejected():
    with pytest.raises(NonFiniteInput):
        linalg.qr_decompose([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(NonFiniteInput):
        linalg.qr_decompose([[np.inf, 0.0]])


def test_bad_rank_tol_rejected():
    with pytest.raises(ValueError):
        linalg.qr_decompose(np.eye(2), rank_tol=0.0)


def test_solve_identity():
    f = linalg.qr_decompose(np.eye(4))
    x = linalg.qr_solve(f, [1.0, 2.0, 3.0, 4.0])
    assert np.allclose(x, [1, 2, 3, 4])


def test_solve_permutation_matrix():
    f = linalg.qr_decompose([[0.0, 1.0], [1.0, 0.0]])
    x = linalg.qr_solve(f, [3.0, 5.0])
    assert np.allclose(x, [5.0, 3.0])


def test_solve_2x2_hand_computed():
    # 2x + y = 5, x + 3y = 10  ->  x = 1, y = 3
    f = linalg.qr_decompose([[2.0, 1.0], [1.0, 3.0]])
    x = linalg.qr_solve(f, [5.0, 10.0])
    assert np.allclose(x, [1.0, 3.0], atol=1e-12)


def test_solve_rejects_rank_deficient():
    f = linalg.qr_decompose([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(RankDeficient):
        linalg.qr_solve(f, [1.0, 1.0])


def test_least_squares_tall_system():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (12, 5))
    b = rng.uniform(-1, 1, 12)
    x = linalg.qr_solve(linalg.qr_decompose(a), b)
    expected, *_ = np.linalg.lstsq(a, b, rcond=None)
    assert np.allclose(x, expected, atol=1e-10)


def test_underdetermined_rejected():
    f = linalg.qr_decompose(np.ones((2, 3)))
    with pytest.raises(RankDeficient):
        linalg.qr_solve(f, [1.0, 2.0])


def test_verify_residual_exact_and_perturbed():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = np.array([1.0, 3.0])
    b = np.array([5.0, 10.0])
    check = linalg.verify_residual(a, x, b, tol=1e-8)
    assert check.passed and check.max_residual <= 1e-12
    bad = linalg.verify_residual(a, x + np.array([1.0, 0.0]), b, tol=1e-8)
    assert not bad.passed
    assert bad.max_residual == pytest.approx(2.0)


@settings(max_examples=40, deadline=None)
@given(
    rows=st.integers(min_value=1, max_value=50),
    cols=st.integers(min_value=1, max_value=50),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_factor_reconstruction_property(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, (rows, cols))
    f = linalg.qr_decompose(a)
    err = np.max(np.abs(f.reconstruct() - a))
    assert err <= 1e-9 * max(np.max(np.abs(a)), 1e-30)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=40),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_pivot_monotonicity_and_solve_verify(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, (n, n)) + n * np.eye(n)  # well conditioned
    f = linalg.qr_decompose(a)
    diag = f.diagonal()
    assert np.all(diag[:-1] >= diag[1:] - 1e-14)
    b = rng.uniform(-1.0, 1.0, n)
    x = linalg.qr_solve(f, b)
    assert linalg.verify_residual(a, x, b, tol=1e-8).passed


@settings(max_examples=30, deadline=None)
@given(
    rows=st.integers(min_value=2, max_value=30),
    cols=st.integers(min_value=1, max_value=20),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_duplicated_column_never_increases_rank(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, (rows, cols))
    base_rank = linalg.qr_decompose(a).rank
    dup = np.hstack([a, a[:, [0]]])
    assert linalg.qr_decompose(dup).rank <= base_rank


def test_constructed_rank_deficiency_detected():
    rng = np.random.default_rng(11)
    for m, n, r in [(8, 6, 3), (20, 20, 7), (15, 10, 10)]:
        a = rng.normal(size=(m, r)) @ rng.normal(size=(r, n))
        f = linalg.qr_decompose(a, rank_tol=1e-10)
        assert f.rank == min(r, n)
