"""Dense matrix-algebra primitives used throughout the package.

Vectorization is column-major (`vec` stacks columns); that order is a
contract relied on by the Kronecker/shuffle identities and by the packing
of exponential-family parameters.
"""

import numpy as np

from .errors import DimensionError, DomainError

PINV_RANK_TOL = 1e-12


def as_matrix(a):
    """Validate a dense real matrix: 2-d, non-empty, all entries finite."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def frobenius(a, b):
    """Frobenius inner product tr(A^T B)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def vec(a):
    """Column-stacking vectorization: vec(A)[i + j*rows] = A[i, j]."""
    return np.asarray(a, float).reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec` for a known shape."""
    v = np.asarray(v, float)
    if v.size != rows * cols:
        raise DimensionError(f"vector of length {v.size} is not {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def sym(a):
    """Symmetric part (A + A^T)/2."""
    a = np.asarray(a, float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"sym needs a square matrix, got {a.shape}")
    return 0.5 * (a + a.T)


def skew(a):
    """Skew-symmetric part (A - A^T)/2."""
    a = np.asarray(a, float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"skew needs a square matrix, got {a.shape}")
    return 0.5 * (a - a.T)


def kron(a, b):
    return np.kron(np.asarray(a, float), np.asarray(b, float))


def basis_matrix(i, j, rows, cols):
    """E_ij: all zeros except a one at (i, j)."""
    e = np.zeros((rows, cols))
    e[i, j] = 1.0
    return e


def skew_basis_matrix(i, j, n):
    """Orthonormal skew generator (sqrt2/2)(E_ij - E_ji), i < j."""
    e = np.zeros((n, n))
    c = np.sqrt(2.0) / 2.0
    e[i, j] = c
    e[j, i] = -c
    return e


class ShuffleMatrix:
    """Perfect shuffle S_{n,r}: maps vec(A) to vec(A^T) for A in R^{n x r}.

    Stored as a permutation; application is O(nr).  ``dense()`` materializes
    the permutation matrix (test assertions only).
    """

    def __init__(self, n, r):
        if n < 1 or r < 1:
            raise DimensionError("shuffle dimensions must be positive")
        self.n = int(n)
        self.r = int(r)
        idx = np.arange(n * r)
        # output position j + i*r reads input position i + j*n
        i, j = idx // r, idx % r
        self._perm = i + j * n

    def apply(self, v):
        v = np.asarray(v, float)
        if v.shape[-1] != self.n * self.r:
            raise DimensionError(
                f"vector of length {v.shape[-1]} incompatible with S_{{{self.n},{self.r}}}"
            )
        return v[..., self._perm]

    @property
    def T(self):
        """Transpose, equal to the inverse and to S_{r,n}."""
        return ShuffleMatrix(self.r, self.n)

    def dense(self):
        s = np.zeros((self.n * self.r, self.n * self.r))
        s[np.arange(self.n * self.r), self._perm] = 1.0
        return s


def pinv(a, rank_tol=PINV_RANK_TOL):
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``rank_tol * sigma_max`` are treated as zero.
    """
    m, rank = pinv_with_rank(a, rank_tol)
    return m


def pinv_with_rank(a, rank_tol=PINV_RANK_TOL):
    """Pseudoinverse plus the numerical rank used to form it."""
    if rank_tol <= 0:
        raise DomainError("rank_tol must be positive")
    a = as_matrix(a)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0])), 0
    keep = s > rank_tol * s[0]
    rank = int(np.count_nonzero(keep))
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T, rank


def _spd_eig(x, sym_tol=1e-10):
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected square matrix, got {x.shape}")
    asymmetry = np.max(np.abs(x - x.T))
    if asymmetry > sym_tol:
        raise DomainError(f"matrix asymmetry {asymmetry:.3e} exceeds {sym_tol:.1e}")
    w, q = np.linalg.eigh(0.5 * (x + x.T))
    return w, q


def matrix_log_spd(x):
    """Matrix logarithm of a symmetric positive definite matrix."""
    w, q = _spd_eig(x)
    if np.min(w) <= 0.0:
        raise DomainError(f"matrix is not positive definite (min eig {np.min(w):.3e})")
    return (q * np.log(w)) @ q.T


def matrix_sqrt_spd(x):
    """Principal square root of a symmetric positive definite matrix."""
    w, q = _spd_eig(x)
    if np.min(w) <= 0.0:
        raise DomainError(f"matrix is not positive definite (min eig {np.min(w):.3e})")
    return (q * np.sqrt(w)) @ q.T


def matrix_exp_sym(x):
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    w, q = _spd_eig(x, sym_tol=1e-8)
    return (q * np.exp(w)) @ q.T
