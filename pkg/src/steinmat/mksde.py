"""Minimum-KSD estimation for exponential families.

For p_theta ~ exp(theta^T zeta + eta), the Stein kernel is a quadratic in
theta:

    kappa_theta(x, y) = theta^T Q(x, y) theta + b(x, y)^T theta
                        + b(y, x)^T theta + c(x, y),

so the empirical statistics are quadratic forms W_n(theta) = theta^T Q theta
+ 2 b^T theta + c, minimized exactly through the pseudoinverse.

Q and b carry the exact quadratic-form normalization (a factor 4 on
Grassmann and SPD coming from the killing-field pairing; absorbing it into
both Q and b leaves the minimizer unchanged but makes the reconstruction
identity above exact).  ``b(x, y)`` pairs the x-side kernel/eta gradient
with the y-side statistic gradient; the Kronecker fast path below returns
the same convention.
"""

import numpy as np

from .errors import DomainError, NonConvexError
from .kernels import GaussianKernel
from .ksdstats import WeightedSample
from .linalg import ShuffleMatrix, pinv_with_rank, skew, sym, vec
from .steinkernel import _pair_scalars


def _zt(spec, x):
    """zstack reshaped to (N, r, s): component (i, j, k) = grad zeta_k [i, j]."""
    n, r = spec.manifold.point_shape
    return spec.zstack(x).reshape(n, r, spec.s, order="F")


def _pair_blocks(spec, kernel, x, y):
    """(Q(x,y), b(x,y), b(y,x)) for one ordered pair."""
    man = spec.manifold
    x, y = np.asarray(x, float), np.asarray(y, float)
    u, kap, dpsi, _ = _pair_scalars(kernel, x, y)
    gx = spec.grad_eta(x) + 2.0 * dpsi * (y - x)
    gy = spec.grad_eta(y) + 2.0 * dpsi * (x - y)
    px = _zt(spec, x)
    py = _zt(spec, y)
    if man.kind == "stiefel":
        left = np.einsum("ijk,aj->iak", px, x)
        right = np.einsum("ijk,aj->iak", py, y)
        lx = skew(gx @ x.T)
        ly = skew(gy @ y.T)
        factor = 1.0
    elif man.kind == "grassmann":
        sp_x = 0.5 * (px + px.transpose(1, 0, 2))
        sp_y = 0.5 * (py + py.transpose(1, 0, 2))
        left = np.einsum("ijk,ja->iak", sp_x, x)
        right = np.einsum("ijk,ja->iak", sp_y, y)
        lx = skew(sym(gx) @ x)
        ly = skew(sym(gy) @ y)
        factor = 4.0
    elif man.kind == "spd":
        sp_x = 0.5 * (px + px.transpose(1, 0, 2))
        sp_y = 0.5 * (py + py.transpose(1, 0, 2))
        left = np.einsum("ij,jak->iak", x, sp_x)
        right = np.einsum("ij,jak->iak", y, sp_y)
        lx = x @ sym(gx)
        ly = y @ sym(gy)
        factor = 4.0
    else:
        raise DomainError(f"unsupported manifold {man.kind}")
    if man.kind != "spd":
        left = 0.5 * (left - left.transpose(1, 0, 2))
        right = 0.5 * (right - right.transpose(1, 0, 2))
    q = factor * kap * np.einsum("iak,ial->kl", left, right)
    b_xy = factor * kap * np.einsum("ia,ial->l", lx, right)
    b_yx = factor * kap * np.einsum("ia,iak->k", ly, left)
    return q, b_xy, b_yx


def pair_qb(spec, kernel, x, y):
    """Elementwise Q(x, y) and b(x, y) via the killing-field pairings."""
    q, b_xy, _ = _pair_blocks(spec, kernel, x, y)
    return q, b_xy


def kernel_pair_operator(x, y):
    """W(X, Y) = (X^T Y kron I_N - (X^T kron Y) S_{N,r}) / 2.

    The bilinear identity <skew(M X^T), skew(P Y^T)> = vec(M)^T W vec(P)
    behind the vectorized Stiefel assembly; W(X, Y)^T = W(Y, X).
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    n, r = x.shape
    s = ShuffleMatrix(n, r).dense()
    return 0.5 * (np.kron(x.T @ y, np.eye(n)) - np.kron(x.T, y) @ s)


def pair_qb_vectorized_stiefel(spec, kernel, x, y):
    """Kronecker/shuffle fast path on Stiefel; same convention as pair_qb.

    A(X, Y) = kappa Z(X)^T W(X, Y) Z(Y) equals Q(X, Y) entry for entry;
    the 1/2 inside W is the skew-projection factor of the identity above,
    not an ordered-pair double-counting correction.
    """
    man = spec.manifold
    if man.kind != "stiefel":
        raise DomainError("vectorized path is Stiefel-only")
    x, y = np.asarray(x, float), np.asarray(y, float)
    u, kap, dpsi, _ = _pair_scalars(kernel, x, y)
    w = kernel_pair_operator(x, y)
    zx = spec.zstack(x)
    zy = spec.zstack(y)
    a = kap * zx.T @ w @ zy
    gx = spec.grad_eta(x) + 2.0 * dpsi * (y - x)
    b = kap * zy.T @ (w.T @ vec(gx))
    return a, b


def mf_gaussian_pair_ab(x, y, tau=1.0):
    """Specialized matrix-Fisher + Gaussian closed form on Stiefel.

    A(X, Y) = (X^T Y kron I_N - (X^T kron Y) S_{N,r}) / 2 * kappa and
    b(X, Y) = tau vec(skew(Y X^T) Y) kappa, in the same pairing convention
    as :func:`pair_qb`; calibrated against the generator-sum oracle
    (see test_specialized_mf_gaussian_closed_form).
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    kern = GaussianKernel(tau)
    kap = kern.eval(x, y)
    a = kap * kernel_pair_operator(x, y)
    b = tau * kap * vec(skew(y @ x.T) @ y)
    return a, b


# ---------------------------------------------------------------------------
# assembly


class MksdeSystem:
    """Assembled quadratic form (Q, b) for one statistic kind."""

    def __init__(self, q, b, kind, spec, n):
        self.q = np.asarray(q, float)
        self.b = np.asarray(b, float)
        self.kind = kind
        self.spec = spec
        self.n = int(n)

    @property
    def s(self):
        return self.b.size

    def objective(self, theta):
        theta = np.asarray(theta, float)
        return float(theta @ self.q @ theta + 2.0 * self.b @ theta)

    def null_space_basis(self, rank_tol=1e-8):
        u, sv, _ = np.linalg.svd(self.q)
        cutoff = (sv[0] if sv.size else 0.0) * rank_tol
        return u[:, sv <= cutoff]


def assemble(spec, kernel, sample, kind="V", vectorized=True):
    """Weighted average of symmetrized pair blocks over the sample."""
    if not isinstance(sample, WeightedSample):
        sample = WeightedSample(sample)
    kind = kind.upper()
    if kind not in ("U", "V"):
        raise DomainError("kind must be 'U' or 'V'")
    n = sample.n
    if kind == "U" and n < 2:
        raise DomainError("U assembly needs n >= 2")
    if spec.manifold.kind == "stiefel" and vectorized:
        q, b = _assemble_stiefel_batched(spec, kernel, sample, kind)
    else:
        q, b = _assemble_loop(spec, kernel, sample, kind)
    return MksdeSystem(0.5 * (q + q.T), b, kind, spec, n)


def _assemble_loop(spec, kernel, sample, kind):
    n = sample.n
    w = sample.weights()
    q = np.zeros((spec.s, spec.s))
    b = np.zeros(spec.s)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                if kind == "U":
                    continue
                qij, bij, _ = _pair_blocks(spec, kernel, sample.points[i], sample.points[j])
                c = w[i] * w[j]
                q += c * sym(qij)
                b += c * bij
            else:
                qij, bij, bji = _pair_blocks(spec, kernel, sample.points[i], sample.points[j])
                c = w[i] * w[j]
                q += 2.0 * c * sym(qij)
                b += c * (bij + bji)
    norm = n * n if kind == "V" else n * (n - 1)
    return q / norm, b / norm


def _assemble_stiefel_batched(spec, kernel, sample, kind):
    """einsum-factorized assembly on Stiefel; equals the pairwise loop."""
    pts = sample.points
    n = pts.shape[0]
    nn, r = spec.manifold.point_shape
    w = sample.weights()
    flat = pts.reshape(n, -1)
    sq = np.sum(flat * flat, axis=1)
    u = np.maximum(sq[:, None] + sq[None, :] - 2.0 * flat @ flat.T, 0.0)
    np.fill_diagonal(u, 0.0)
    kap = np.exp(-kernel.psi(u))
    dpsi = kernel.dpsi(u) + 0.0 * u
    c = np.outer(w, w) * kap
    if kind == "U":
        np.fill_diagonal(c, 0.0)
    zt = np.stack([_zt(spec, p) for p in pts])  # (n, N, r, s)
    uu = np.einsum("iabk,icb->iack", zt, pts)  # P^i_k X_i^T, (n, N, N, s)
    uf = uu.reshape(n, nn * nn, spec.s)
    vf = uu.transpose(0, 2, 1, 3).reshape(n, nn * nn, spec.s)
    q1 = np.einsum("ij,ipk,jpl->kl", c, uf, uf, optimize=True)
    q2 = np.einsum("ij,ipk,jpl->kl", c, vf, uf, optimize=True)
    q = 0.5 * (q1 - q2)

    b = np.zeros(spec.s)
    etas = np.stack([skew(spec.grad_eta(p) @ p.T) for p in pts])
    if np.any(etas):
        hf = etas.reshape(n, -1)
        ua = 0.5 * (uf - vf)  # skew(P^j_k X_j^T), flattened
        b = b + np.einsum("ij,ip,jpk->k", c, hf, ua.reshape(n, -1, spec.s), optimize=True)
    c2 = c * 2.0 * dpsi
    t_right = np.einsum("jabk,jac->jbck", uu, pts, optimize=True)  # U^j_k^T X_j
    b2a = np.einsum("ij,jbck,ibc->k", c2, t_right, pts, optimize=True)
    r_right = np.einsum("jabk,jbc->jack", uu, pts, optimize=True)  # U^j_k X_j
    b2b = np.einsum("ij,jack,iac->k", c2, r_right, pts, optimize=True)
    b = b + 0.5 * (b2a - b2b)
    norm = n * n if kind == "V" else n * (n - 1)
    return q / norm, b / norm


# ---------------------------------------------------------------------------
# solving


class MksdeSolution:
    """Minimum-norm minimizer of an assembled quadratic form."""

    def __init__(self, theta_star, null_space_rank, objective_at_min, min_eigenvalue):
        self.theta_star = theta_star
        self.null_space_rank = int(null_space_rank)
        self.objective_at_min = float(objective_at_min)
        self.min_eigenvalue = float(min_eigenvalue)


def solve(system, rank_tol=1e-12, on_indefinite="raise"):
    """theta* = -Q^+ b, the minimum-norm member of the solution set.

    For U-kind systems the (unbiased but possibly indefinite) Q is checked
    for positive semi-definiteness first; significantly negative curvature
    raises NonConvexError carrying the stationary point.
    """
    q = 0.5 * (system.q + system.q.T)
    eigs = np.linalg.eigvalsh(q)
    min_eig = float(eigs[0])
    qp, rank = pinv_with_rank(q, rank_tol)
    theta = -qp @ system.b
    sol = MksdeSolution(theta, system.s - rank, system.objective(theta), min_eig)
    if system.kind == "U" and min_eig < -1e-6 * max(np.trace(q), 0.0) / system.s:
        if on_indefinite == "raise":
            raise NonConvexError(min_eig, solution=sol)
    return sol


def minimize_quadratic_gd(q, b, steps=200, theta0=None):
    """Steepest descent with exact line search on theta^T Q theta + 2 b^T theta.

    Numerical cross-check that the pseudoinverse solution is the minimum.
    """
    q = np.asarray(q, float)
    b = np.asarray(b, float)
    theta = np.zeros(b.size) if theta0 is None else np.asarray(theta0, float).copy()
    for _ in range(steps):
        g = 2.0 * (q @ theta + b)
        gg = float(g @ g)
        if gg == 0.0:
            break
        curv = 2.0 * float(g @ q @ g)
        if curv <= 0.0:
            break
        theta = theta - (gg / curv) * g
    return theta


# ---------------------------------------------------------------------------
# MLE baselines for the matrix Fisher family


def mf_small_f_mle(points):
    """Small-concentration approximation F = N * mean(X)."""
    pts = np.asarray(points, float)
    return pts.shape[1] * pts.mean(axis=0)


_MLE_POOL_CACHE = {}


def _uniform_pool(manifold, pool_size, seed):
    key = (manifold.N, manifold.r, pool_size, seed)
    pool = _MLE_POOL_CACHE.get(key)
    if pool is None:
        from .sampling import sample_uniform

        pool = sample_uniform(manifold, pool_size, seed=seed)
        _MLE_POOL_CACHE.clear()  # keep at most one pool around
        _MLE_POOL_CACHE[key] = pool
    return pool


def mf_numeric_mle(points, manifold, pool_size=20000, seed=0, max_iter=500,
                   grad_tol=1e-4):
    """Monte Carlo MLE for the matrix Fisher family on Stiefel.

    Maximizes mean tr(F^T X_i) - log c_hat(F), with c_hat a fixed-seed
    uniform Monte Carlo estimate of the normalizing constant; the gradient
    is mean(X) minus the self-normalized importance-weighted pool mean.
    A stalled backtracking line search means the surrogate's maximum is
    reached to float precision and counts as convergence; exhausting
    max_iter while still improving raises with the last iterate.
    """
    from .errors import ConvergenceError

    pts = np.asarray(points, float)
    xbar = pts.mean(axis=0)
    pool = _uniform_pool(manifold, pool_size, seed)
    pool_flat = pool.reshape(pool_size, -1)
    f = mf_small_f_mle(pts)

    def loglik_and_grad(fmat):
        tilt = pool_flat @ fmat.reshape(-1)
        m = tilt.max()
        wts = np.exp(tilt - m)
        z = wts.sum()
        ll = float(np.sum(fmat * xbar)) - (m + np.log(z / pool_size))
        grad = xbar - np.tensordot(wts / z, pool, axes=(0, 0))
        return ll, grad

    ll, grad = loglik_and_grad(f)
    for _ in range(max_iter):
        if np.linalg.norm(grad) <= grad_tol:
            return f
        step = 1.0
        improved = False
        for _ in range(40):
            cand = f + step * grad
            cand_ll, cand_grad = loglik_and_grad(cand)
            if cand_ll > ll:
                f, ll, grad = cand, cand_ll, cand_grad
                improved = True
                break
            step *= 0.5
        if not improved:
            return f
    raise ConvergenceError("matrix Fisher MLE did not converge", last_iterate=f)
