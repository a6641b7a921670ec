import numpy as np
import pytest

from steinmat.errors import DimensionError, DomainError
from steinmat.linalg import (ShuffleMatrix, basis_matrix, frobenius, kron,
                             matrix_log_spd, matrix_sqrt_spd, pinv,
                             pinv_with_rank, skew, skew_basis_matrix, sym,
                             unvec, vec)

rng = np.random.default_rng(42)


def test_frobenius_identity():
    assert frobenius(np.eye(2), np.eye(2)) == 2.0


def test_frobenius_zero():
    a = rng.standard_normal((3, 2))
    assert frobenius(a, np.zeros((3, 2))) == 0.0


def test_frobenius_single_entry_basis():
    e12 = basis_matrix(0, 1, 3, 3)
    assert frobenius(e12, e12) == 1.0


def test_frobenius_shape_mismatch():
    with pytest.raises(DimensionError):
        frobenius(np.eye(2), np.eye(3))


def test_vec_column_stacking():
    a = np.array([[1.0, 3.0], [2.0, 4.0]])
    assert np.array_equal(vec(a), [1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(unvec(vec(a), 2, 2), a)


def test_vec_kron_identity():
    b = rng.standard_normal((2, 2))
    x = rng.standard_normal((2, 2))
    a = rng.standard_normal((2, 2))
    assert np.allclose(vec(b @ x @ a.T), kron(a, b) @ vec(x), atol=1e-12)


def test_vec_transpose_shuffle():
    a = rng.standard_normal((3, 2))
    s = ShuffleMatrix(3, 2)
    assert np.allclose(vec(a.T), s.apply(vec(a)), atol=0)
    assert np.allclose(s.dense() @ vec(a), vec(a.T), atol=0)


def test_sym_skew_decomposition():
    a = rng.standard_normal((3, 3))
    assert np.allclose(sym(a) + skew(a), a)
    assert np.allclose(skew(sym(a)), 0.0)
    assert np.allclose(sym(np.eye(3)), np.eye(3))
    assert abs(frobenius(sym(a), skew(a))) <= 1e-14


def test_sym_requires_square():
    with pytest.raises(DimensionError):
        sym(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        skew(np.ones((2, 3)))


def test_kron_identity_blocks():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))


def test_kron_transpose():
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((2, 2))
    assert np.allclose(kron(a, b).T, kron(a.T, b.T), atol=1e-12)


def test_kron_mixed_product():
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((3, 2))
    c = rng.standard_normal((3, 2))
    d = rng.standard_normal((2, 4))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


def test_kron_associativity():
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 3))
    c = rng.standard_normal((3, 2))
    assert np.allclose(kron(a, kron(b, c)), kron(kron(a, b), c), atol=1e-12)


def test_kron_inverse():
    a = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    b = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    assert np.allclose(np.linalg.inv(kron(a, b)), kron(np.linalg.inv(a), np.linalg.inv(b)),
                       atol=1e-10)


def test_kron_shuffle_commutation():
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((2, 2))
    s_left = ShuffleMatrix(2, 2).dense()
    s_right = ShuffleMatrix(3, 2).dense()
    assert np.allclose(s_left.T @ kron(a, b) @ s_right, kron(b, a), atol=1e-12)


def test_shuffle_orthogonality():
    s = ShuffleMatrix(3, 2)
    assert np.array_equal(s.T.dense(), s.dense().T)
    assert np.array_equal(s.dense() @ s.dense().T, np.eye(6))


def test_pinv_identity():
    assert np.allclose(pinv(np.eye(3)), np.eye(3))


def test_pinv_rank_deficient_diag():
    assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_penrose_identities_rank_one():
    a = np.outer(rng.standard_normal(3), rng.standard_normal(3))
    ap = pinv(a)
    assert np.allclose(a @ ap @ a, a, atol=1e-10)
    assert np.allclose(ap @ a @ ap, ap, atol=1e-10)
    assert np.allclose((a @ ap).T, a @ ap, atol=1e-10)
    assert np.allclose((ap @ a).T, ap @ a, atol=1e-10)
    assert pinv_with_rank(a)[1] == 1


def test_pinv_bad_inputs():
    with pytest.raises(DomainError):
        pinv(np.eye(2), rank_tol=0.0)
    with pytest.raises(DimensionError):
        pinv(np.zeros((0, 0)))


def test_matrix_log_identity():
    assert np.allclose(matrix_log_spd(np.eye(3)), 0.0)


def test_matrix_log_diag():
    x = np.diag([np.e, np.e**2])
    assert np.allclose(matrix_log_spd(x), np.diag([1.0, 2.0]), atol=1e-12)


def test_matrix_log_round_trip():
    g = rng.standard_normal((4, 4))
    x = np.eye(4) + g @ g.T
    from steinmat.linalg import matrix_exp_sym

    assert np.allclose(matrix_exp_sym(matrix_log_spd(x)), x, atol=1e-10)
    s = matrix_sqrt_spd(x)
    assert np.allclose(s @ s, x, atol=1e-10)


def test_matrix_log_domain_errors():
    with pytest.raises(DomainError):
        matrix_log_spd(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        matrix_log_spd(np.diag([1.0, -1.0]))


def test_summation_identity_full_basis():
    n = 4
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    total = sum(
        frobenius(basis_matrix(i, j, n, n), a) * frobenius(basis_matrix(i, j, n, n), b)
        for i in range(n) for j in range(n)
    )
    assert abs(total - frobenius(a, b)) <= 1e-12


def test_summation_identity_skew_basis():
    # the form used downstream: sum over i<j equals <skew(A), skew(B)>;
    # the transposed variant flips the sign and is not the one the closed
    # forms rely on.
    n = 4
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    total = sum(
        frobenius(skew_basis_matrix(i, j, n), a) * frobenius(skew_basis_matrix(i, j, n), b)
        for i in range(n) for j in range(i + 1, n)
    )
    assert abs(total - frobenius(skew(a), skew(b))) <= 1e-12


def test_skew_basis_normalization():
    e = skew_basis_matrix(0, 1, 3)
    assert abs(frobenius(e, e) - 1.0) <= 1e-14
