import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from se2n.errors import DimensionError, UnsupportedError
from se2n.zn_core import (
    CirculantMatrix,
    CyclicIndex,
    RCirculantMatrix,
    b_inverse,
    b_map,
    circ_dense,
    circ_eigenvalues,
    dft_matrix,
    dft_zn,
    idft_zn,
    is_cyclic,
    is_r_cyclic,
    r_shift,
    shift_apply,
    shift_matrix,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def cvec(n):
    return arrays(np.complex128, n, elements=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))


def test_cyclic_index_wraps():
    a = CyclicIndex(3, 5)
    assert int(a + 4) == 2
    assert int(-a) == 2
    assert int(a - 4) == 4
    assert CyclicIndex(7, 5) == CyclicIndex(2, 5)


def test_shift_examples():
    assert np.array_equal(shift_apply(0, [1, 2, 3]), [1, 2, 3])
    assert np.array_equal(shift_apply(1, [1, 0, 0]), [0, 1, 0])
    assert np.array_equal(shift_apply(2, ["a", "b", "c", "d"]), ["c", "d", "a", "b"])
    assert np.array_equal(shift_apply(CyclicIndex(1, 3), [1, 0, 0]), [0, 1, 0])


def test_shift_length_mismatch():
    with pytest.raises(DimensionError):
        shift_apply(CyclicIndex(1, 4), [1, 2, 3])


def test_dft_examples():
    assert np.allclose(dft_zn(np.ones(4)), [2, 0, 0, 0])
    assert np.allclose(dft_zn([1, 0, 0, 0]), [0.5] * 4)


def test_dft_parseval_against_naive_sum(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    h = np.arange(8)
    naive = np.array([np.sum(np.exp(-2j * np.pi * k * h / 8) * v) for k in range(8)]) / np.sqrt(8)
    assert np.allclose(dft_zn(v), naive, atol=1e-12)
    assert abs(np.linalg.norm(dft_zn(v)) - np.linalg.norm(v)) < 1e-12
    assert np.allclose(idft_zn(dft_zn(v)), v)


def test_dft_matrix_unitary():
    F = dft_matrix(6)
    assert np.allclose(F @ F.conj().T, np.eye(6))


def test_circ_eigenvalues_examples():
    assert np.allclose(circ_eigenvalues(CirculantMatrix(np.eye(5)[0])), np.ones(5))
    # eigvals of the dense 4x4 shift are the 4th roots of unity, frozen in fft order
    assert np.allclose(circ_eigenvalues(CirculantMatrix(np.eye(4)[1])), [1, -1j, -1, 1j])
    assert np.allclose(
        np.sort_complex(np.linalg.eigvals(circ_dense(np.eye(4)[1]))), np.sort_complex(np.array([1, -1j, -1, 1j]))
    )


def test_circ_eigenvalues_multiset(rng):
    v = rng.normal(size=6) + 1j * rng.normal(size=6)
    dense = np.sort_complex(np.linalg.eigvals(circ_dense(v)))
    assert np.allclose(np.sort_complex(circ_eigenvalues(CirculantMatrix(v))), dense, atol=1e-10)


def test_circulant_entries(rng):
    v = rng.normal(size=5)
    C = circ_dense(v)
    for i in range(5):
        for j in range(5):
            assert C[i, j] == v[(i - j) % 5]
    assert np.allclose(CirculantMatrix.from_dense(C).generator, v)


def test_shift_is_circulant_of_basis_vector():
    for k in range(6):
        assert np.array_equal(shift_matrix(k, 6), circ_dense(np.eye(6)[k]))


def test_is_cyclic_examples():
    assert is_cyclic([1, 0, 0])
    assert not is_cyclic([1, 1, 1, 1])
    assert is_cyclic([2, 1, 0, 0], 1e-9)
    assert abs(np.linalg.det(circ_dense([2, 1, 0, 0]))) > 1


def _realified_rank(w, N):
    # independent oracle: span of the N/2 columns of Circ_R w over R, in R^N
    cols = [np.asarray(w, dtype=complex)]
    for _ in range(N // 2 - 1):
        c = cols[-1]
        cols.append(np.concatenate([[np.conj(c[-1])], c[:-1]]))
    C = np.stack(cols, axis=1)
    R = np.block([[C.real, -C.imag], [C.imag, C.real]])
    return np.linalg.matrix_rank(R, tol=1e-9)


def test_is_r_cyclic_examples():
    assert is_r_cyclic([1, 0])
    assert _realified_rank([1, 0], 4) == 4
    assert not is_r_cyclic([0, 0])
    assert not is_r_cyclic([0, 0, 0])
    # the oracle gives rank 2 of 4, so the system is not invertible
    assert _realified_rank([1, 1j], 4) == 2
    assert not is_r_cyclic([1, 1j])


def test_is_r_cyclic_odd_n_unsupported():
    with pytest.raises(UnsupportedError):
        is_r_cyclic([1, 0], N=5)
    with pytest.raises(DimensionError):
        is_r_cyclic([1, 0], N=6)


def test_r_circulant_dense_and_b_map(rng):
    w = rng.normal(size=3) + 1j * rng.normal(size=3)
    C = RCirculantMatrix(w).dense()
    assert C.shape == (3, 3)
    assert np.allclose(C[:, 1], r_shift(w))
    assert np.allclose(b_inverse(b_map(w)), w)
    assert is_r_cyclic(w) == (_realified_rank(w, 6) == 6)


@given(cvec(7), st.integers(-20, 20))
def test_shift_unitary(v, k):
    assert abs(np.linalg.norm(shift_apply(k, v)) - np.linalg.norm(v)) <= 1e-14 * max(1.0, np.linalg.norm(v))


@given(cvec(5), cvec(5))
def test_circulants_commute(v, w):
    A, B = circ_dense(v), circ_dense(w)
    scale = max(1.0, np.abs(A).max() * np.abs(B).max())
    assert np.abs(A @ B - B @ A).max() <= 1e-12 * scale


@given(cvec(6))
def test_dft_columns_diagonalise(v):
    # column k of the inverse DFT is an eigenvector with eigenvalue fft(v)[k]
    C = circ_dense(v)
    lam = circ_eigenvalues(CirculantMatrix(v))
    h = np.arange(6)
    scale = max(1.0, np.abs(v).sum())
    for k in range(6):
        e = np.exp(2j * np.pi * k * h / 6)
        assert np.abs(C @ e - lam[k] * e).max() <= 1e-10 * scale


@given(cvec(6), st.integers(0, 5))
def test_circulant_commutes_with_shifts(v, k):
    C, S = circ_dense(v), shift_matrix(k, 6)
    assert np.allclose(C @ S, S @ C)
