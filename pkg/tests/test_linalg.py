import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aouqc.linalg import (Tolerance, canonical_shuffle, column_swap_permutation, direct_sum,
                          exact_rank, is_hermitian, is_psd, kron, min_eig, permute_factors,
                          psd_projection, random_hermitian, random_unitary)


def test_kron_is_left_to_right(rng):
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    assert np.allclose(kron(a, b, c), np.kron(np.kron(a, b), c))
    assert kron().shape == (1, 1)


def test_direct_sum_blocks_and_errors():
    out = direct_sum(np.eye(2), 3 * np.ones((1, 1)))
    assert np.array_equal(out, np.diag([1.0, 1.0, 3.0]))
    with pytest.raises(ValueError, match="square"):
        direct_sum(np.ones((2, 3)), np.eye(2))


def test_permute_factors_reorders_product_matrices(rng):
    mats = [rng.standard_normal((d, d)) for d in (2, 3, 2)]
    for perm in [(0, 1, 2), (1, 0, 2), (2, 0, 1), (2, 1, 0)]:
        got = permute_factors(kron(*mats), (2, 3, 2), perm)
        assert np.allclose(got, kron(*[mats[p] for p in perm]))


def test_permute_factors_rejects_bad_input():
    with pytest.raises(ValueError):
        permute_factors(np.eye(4), (2, 2), (0, 0))
    with pytest.raises(ValueError):
        permute_factors(np.eye(5), (2, 2), (1, 0))


def test_canonical_shuffle_is_an_involution_up_to_dims(rng):
    a, b = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    x = np.kron(a, b)
    assert np.allclose(canonical_shuffle(x, 2, 3), np.kron(b, a))
    assert np.allclose(canonical_shuffle(canonical_shuffle(x, 2, 3), 3, 2), x)


def test_psd_tests(rng):
    h = random_hermitian(4, rng)
    assert is_hermitian(h)
    p = psd_projection(h)
    assert min_eig(p) >= -1e-12
    assert is_psd(p)
    assert not is_psd(-np.eye(3))
    assert is_psd(-1e-12 * np.eye(3), Tolerance(psd_eps=1e-9))
    with pytest.raises(ValueError, match="hermitian"):
        is_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_random_unitary_is_unitary(rng):
    u = random_unitary(5, rng)
    assert np.allclose(u.conj().T @ u, np.eye(5))


def test_column_swap_permutation():
    w = column_swap_permutation(1)
    # columns 2 and 4 (1-based) are exchanged
    assert np.array_equal(w[:, 1], np.eye(4)[:, 3])
    assert np.array_equal(w[:, 3], np.eye(4)[:, 1])
    assert np.allclose(w @ w, np.eye(4))
    with pytest.raises(ValueError):
        column_swap_permutation(0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=5, max_size=5), min_size=1, max_size=6))
def test_exact_rank_matches_numpy_on_small_integers(rows):
    m = np.array(rows)
    assert exact_rank(m) == np.linalg.matrix_rank(m.astype(float))


def test_exact_rank_detects_near_cancellation():
    # numerically fragile but exactly rank 2
    m = np.array([[10 ** 8, 1], [10 ** 8 + 1, 1]], dtype=object)
    assert exact_rank(m) == 2
    assert exact_rank(np.zeros((3, 3), dtype=int)) == 0
