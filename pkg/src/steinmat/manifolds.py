"""Matrix manifolds: Stiefel V_r(N), Grassmann G_r(N) (projector form), SPD P(N).

Each manifold carries

* point validation,
* the killing-field basis induced by its transitive isometry group
  (O(N) acting by left multiplication / conjugation, GL(N) by congruence),
* group-action curves t -> exp(t*gen).X used by the finite-difference
  oracles and the Metropolis samplers,
* Riemannian exponential / logarithm / distance.

Grassmann points are stored as rank-r orthogonal projectors; Exp/Log are
computed on orthonormal-basis representatives internally.  Stiefel uses the
canonical (quotient) metric g(D1, D2) = tr(D1^T (I - X X^T / 2) D2).
"""

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, CutLocusError, DimensionError, DomainError
from .linalg import (
    basis_matrix,
    frobenius,
    matrix_log_spd,
    matrix_sqrt_spd,
    skew_basis_matrix,
    sym,
)

VALIDATION_TOL = 1e-8


class Manifold:
    """Common interface; subclasses fill in the geometry."""

    kind = None

    def validate(self, x, tol=VALIDATION_TOL):
        raise NotImplementedError

    def is_point(self, x, tol=VALIDATION_TOL):
        try:
            self.validate(x, tol)
            return True
        except (DimensionError, DomainError):
            return False

    # -- killing fields -------------------------------------------------

    @property
    def n_generators(self):
        return len(self.generators)

    def killing_tangent(self, l, x):
        """Tangent of the one-parameter isometry group generated by generator l."""
        raise NotImplementedError

    def group_curve(self, l, t, x):
        """Point exp(t * generator_l) . x on the group-action curve."""
        raise NotImplementedError

    def directional_derivative(self, grad, l, x):
        """<grad, K^l_x>_F for a Euclidean-gradient representative."""
        grad = np.asarray(grad, float)
        if grad.shape != np.asarray(x).shape:
            raise DimensionError(
                f"gradient shape {grad.shape} does not match point shape {np.asarray(x).shape}"
            )
        return frobenius(grad, self.killing_tangent(l, x))

    # -- geometry --------------------------------------------------------

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def dist(self, x, y):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"

    def describe(self):
        return ""


def _skew_pair_indices(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


class Stiefel(Manifold):
    """V_r(N) = {X in R^{N x r} : X^T X = I}, canonical metric."""

    kind = "stiefel"

    def __init__(self, n, r):
        if not (1 <= r <= n):
            raise DimensionError(f"need 1 <= r <= N, got N={n}, r={r}")
        self.N = int(n)
        self.r = int(r)
        self.point_shape = (self.N, self.r)
        self.dim = self.N * self.r - self.r * (self.r + 1) // 2
        self._pairs = _skew_pair_indices(self.N)
        self.generators = [skew_basis_matrix(i, j, self.N) for i, j in self._pairs]

    def describe(self):
        return f"N={self.N}, r={self.r}"

    def validate(self, x, tol=VALIDATION_TOL):
        x = np.asarray(x, float)
        if x.shape != self.point_shape:
            raise DimensionError(f"expected shape {self.point_shape}, got {x.shape}")
        err = np.linalg.norm(x.T @ x - np.eye(self.r))
        if err > tol:
            raise DomainError(f"||X^T X - I|| = {err:.3e} exceeds {tol:.1e}")
        return x

    def project_point(self, x):
        """Nearest orthonormal frame (polar factor); used to correct drift."""
        u, _, vt = np.linalg.svd(np.asarray(x, float), full_matrices=False)
        return u @ vt

    def killing_tangent(self, l, x):
        return self.generators[l] @ np.asarray(x, float)

    def group_curve(self, l, t, x):
        return scipy.linalg.expm(t * self.generators[l]) @ np.asarray(x, float)

    def tangent_project(self, x, v):
        x, v = np.asarray(x, float), np.asarray(v, float)
        return v - x @ sym(x.T @ v)

    def metric(self, x, d1, d2):
        x = np.asarray(x, float)
        g = d1.T @ (d2 - 0.5 * x @ (x.T @ d2))
        return float(np.trace(g))

    def _complement(self, x):
        q, _ = np.linalg.qr(x, mode="complete")
        return q[:, self.r:]

    def exp(self, x, v):
        """Canonical-metric exponential via the horizontal lift to O(N)."""
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        xp = self._complement(x)
        a = x.T @ v
        k = xp.T @ v
        basis = np.concatenate([x, xp], axis=1)
        gen = np.zeros((self.N, self.N))
        gen[: self.r, : self.r] = a
        gen[self.r:, : self.r] = k
        gen[: self.r, self.r:] = -k.T
        s_hat = basis @ gen @ basis.T
        return scipy.linalg.expm(s_hat) @ x

    def log(self, x, y, tol=1e-10, max_iter=100):
        """Canonical-metric logarithm by Gauss-Newton shooting.

        Parameterizes the tangent by its horizontal coordinates (skew A,
        free K) and solves Exp_x(v) = y; raises if the iteration does not
        reach ``tol`` (cut locus or outside the convergence region).
        """
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        xp = self._complement(x)
        n_a = self.r * (self.r - 1) // 2
        n_k = (self.N - self.r) * self.r
        a_pairs = _skew_pair_indices(self.r)

        def unpack(p):
            a = np.zeros((self.r, self.r))
            for idx, (i, j) in enumerate(a_pairs):
                a[i, j] = p[idx]
                a[j, i] = -p[idx]
            k = p[n_a:].reshape(self.N - self.r, self.r)
            return x @ a + xp @ k

        def pack(v):
            a = x.T @ v
            k = xp.T @ v
            return np.concatenate([[a[i, j] for i, j in a_pairs], k.ravel()])

        def residual(p):
            return (self.exp(x, unpack(p)) - y).ravel()

        p = pack(self.tangent_project(x, y - x))
        res = residual(p)
        scale = max(1.0, np.linalg.norm(y))
        fd_step = 1e-6
        for _ in range(max_iter):
            if np.linalg.norm(res) <= tol * scale:
                return unpack(p)
            jac = np.empty((res.size, n_a + n_k))
            for c in range(n_a + n_k):
                dp = np.zeros_like(p)
                dp[c] = fd_step
                jac[:, c] = (residual(p + dp) - residual(p - dp)) / (2 * fd_step)
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
            damp = 1.0
            for _ in range(30):
                cand = p + damp * step
                cand_res = residual(cand)
                if np.linalg.norm(cand_res) < np.linalg.norm(res):
                    p, res = cand, cand_res
                    break
                damp *= 0.5
            else:
                break
        if np.linalg.norm(res) <= tol * scale:
            return unpack(p)
        raise ConvergenceError(
            f"Stiefel log did not converge (residual {np.linalg.norm(res):.3e})",
            last_iterate=unpack(p),
        )

    def dist(self, x, y):
        v = self.log(x, y)
        return float(np.sqrt(max(self.metric(x, v, v), 0.0)))


class Grassmann(Manifold):
    """G_r(N) as rank-r orthogonal projectors, metric g(D1,D2) = tr(D1 D2)/2."""

    kind = "grassmann"

    def __init__(self, n, r):
        if not (1 <= r < n):
            raise DimensionError(f"need 1 <= r < N, got N={n}, r={r}")
        self.N = int(n)
        self.r = int(r)
        self.point_shape = (self.N, self.N)
        self.dim = self.r * (self.N - self.r)
        self._pairs = _skew_pair_indices(self.N)
        self.generators = [skew_basis_matrix(i, j, self.N) for i, j in self._pairs]

    def describe(self):
        return f"N={self.N}, r={self.r}"

    def validate(self, x, tol=VALIDATION_TOL):
        x = np.asarray(x, float)
        if x.shape != self.point_shape:
            raise DimensionError(f"expected shape {self.point_shape}, got {x.shape}")
        if np.linalg.norm(x - x.T) > tol:
            raise DomainError("projector is not symmetric")
        if np.linalg.norm(x @ x - x) > tol:
            raise DomainError("matrix is not idempotent")
        if abs(np.trace(x) - self.r) > tol:
            raise DomainError(f"trace {np.trace(x):.6f} != r = {self.r}")
        return x

    def basis(self, x):
        """Orthonormal basis of the projected subspace (top-r eigenvectors)."""
        w, q = np.linalg.eigh(np.asarray(sym(np.asarray(x, float)), float))
        return q[:, np.argsort(w)[::-1][: self.r]]

    def from_basis(self, u):
        return u @ u.T

    def project_point(self, x):
        return self.from_basis(self.basis(x))

    def killing_tangent(self, l, x):
        e = self.generators[l]
        x = np.asarray(x, float)
        return e @ x - x @ e

    def group_curve(self, l, t, x):
        o = scipy.linalg.expm(t * self.generators[l])
        return o @ np.asarray(x, float) @ o.T

    def tangent_project(self, x, v):
        u = self.basis(x)
        h = (np.eye(self.N) - u @ u.T) @ sym(np.asarray(v, float)) @ u
        return h @ u.T + u @ h.T

    def metric(self, x, d1, d2):
        return 0.5 * float(np.trace(np.asarray(d1, float) @ np.asarray(d2, float)))

    def exp(self, x, v):
        u = self.basis(x)
        h = np.asarray(v, float) @ u
        q, s, rt = np.linalg.svd(h, full_matrices=False)
        u_new = u @ rt.T @ np.diag(np.cos(s)) @ rt + q @ np.diag(np.sin(s)) @ rt
        return self.from_basis(u_new)

    def log(self, x, y, tol=1e-8):
        u = self.basis(x)
        w = self.basis(y)
        m = u.T @ w
        smin = np.linalg.svd(m, compute_uv=False)[-1]
        if smin < tol:
            raise CutLocusError(
                f"subspaces have a principal angle at pi/2 (min sv {smin:.3e})"
            )
        l_mat = (w - u @ m) @ np.linalg.inv(m)
        q, s, rt = np.linalg.svd(l_mat, full_matrices=False)
        h = q @ np.diag(np.arctan(s)) @ rt
        return h @ u.T + u @ h.T

    def principal_angles(self, x, y):
        u, w = self.basis(x), self.basis(y)
        sv = np.clip(np.linalg.svd(u.T @ w, compute_uv=False), -1.0, 1.0)
        return np.arccos(sv)

    def dist(self, x, y):
        return float(np.linalg.norm(self.principal_angles(x, y)))


class Spd(Manifold):
    """P(N) with the affine-invariant metric; GL(N) acts by congruence."""

    kind = "spd"

    def __init__(self, n):
        if n < 1:
            raise DimensionError("N must be positive")
        self.N = int(n)
        self.r = int(n)
        self.point_shape = (self.N, self.N)
        self.dim = self.N * (self.N + 1) // 2
        # column-major (i, j) order so generator l pairs with vec index l
        self._pairs = [(l % self.N, l // self.N) for l in range(self.N * self.N)]
        self.generators = [basis_matrix(i, j, self.N, self.N) for i, j in self._pairs]

    def describe(self):
        return f"N={self.N}"

    def validate(self, x, tol=1e-10):
        x = np.asarray(x, float)
        if x.shape != self.point_shape:
            raise DimensionError(f"expected shape {self.point_shape}, got {x.shape}")
        if np.linalg.norm(x - x.T) > tol:
            raise DomainError("matrix is not symmetric")
        w = np.linalg.eigvalsh(sym(x))
        if w.min() <= 0:
            raise DomainError(f"matrix is not positive definite (min eig {w.min():.3e})")
        return x

    def project_point(self, x):
        return sym(np.asarray(x, float))

    def killing_tangent(self, l, x):
        x = np.asarray(x, float)
        e_ij = self.generators[l]
        return e_ij.T @ x + x @ e_ij

    def group_curve(self, l, t, x):
        g = scipy.linalg.expm(t * self.generators[l])
        return g.T @ np.asarray(x, float) @ g

    def tangent_project(self, x, v):
        return sym(np.asarray(v, float))

    def metric(self, x, d1, d2):
        xi = np.linalg.inv(np.asarray(x, float))
        return float(np.trace(xi @ d1 @ xi @ d2))

    def exp(self, x, v):
        s = matrix_sqrt_spd(x)
        si = np.linalg.inv(s)
        inner = sym(si @ np.asarray(v, float) @ si)
        w, q = np.linalg.eigh(inner)
        return s @ (q * np.exp(w)) @ q.T @ s

    def log(self, x, y):
        self.validate(x)
        self.validate(y)
        s = matrix_sqrt_spd(x)
        si = np.linalg.inv(s)
        return s @ matrix_log_spd(sym(si @ np.asarray(y, float) @ si)) @ s

    def dist(self, x, y):
        self.validate(x)
        self.validate(y)
        s = matrix_sqrt_spd(x)
        si = np.linalg.inv(s)
        w = np.linalg.eigvalsh(sym(si @ np.asarray(y, float) @ si))
        if w.min() <= 0:
            raise DomainError("second argument is not positive definite")
        return float(np.linalg.norm(np.log(w)))


def manifold_for(kind, n, r=None):
    kind = kind.lower()
    if kind == "stiefel":
        return Stiefel(n, r)
    if kind == "grassmann":
        return Grassmann(n, r)
    if kind == "spd":
        return Spd(n)
    raise DomainError(f"unknown manifold kind {kind!r}")


def riemannian_score_rg(manifold, mean, sigma, x):
    """Euclidean-gradient representative of the Riemannian-Gaussian log density.

    log p = -d^2(X, mean) / (2 sigma^2); the representative is:

    * Stiefel:   sigma^-2 (I - X X^T / 2) Log_X(mean)
    * Grassmann: (1 / (2 sigma^2)) Log_X(mean)
    * SPD:       -sigma^-2 Log(mean^-1 X) X^-1

    The SPD product order matters: from d/dt d^2 = 2 tr[Log(mean^-1 X)
    X^-1 dX], the matrix pairing with symmetric dX is Log(mean^-1 X) X^-1
    (itself symmetric), which the killing finite-difference oracle
    confirms; the reversed order is wrong whenever X and mean do not
    commute.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    x = np.asarray(x, float)
    varsigma = 1.0 / sigma**2
    if manifold.kind == "stiefel":
        v = manifold.log(x, mean)
        return varsigma * (v - 0.5 * x @ (x.T @ v))
    if manifold.kind == "grassmann":
        return 0.5 * varsigma * manifold.log(x, mean)
    if manifold.kind == "spd":
        return -varsigma * log_rel_spd(mean, x) @ np.linalg.inv(x)
    raise DomainError(f"unsupported manifold {manifold.kind!r}")


def log_rel_spd(base, x):
    """Log(base^-1 x) via the symmetric similarity base^-1 x = s^-1 (s^-1 x s^-1) s."""
    s = matrix_sqrt_spd(base)
    si = np.linalg.inv(s)
    return si @ matrix_log_spd(sym(si @ np.asarray(x, float) @ si)) @ s
