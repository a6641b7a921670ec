"""The Stein kernel kappa_p on matrix manifolds.

Three evaluation routes for the same quantity:

``kp_closed``
    Per-manifold closed forms for radial kernels.  For a pair (X, Y) with
    G_X = score(X) + grad_X log kappa and u = ||X - Y||_F^2:

    Stiefel:    [ <skew(G_X X^T), skew(G_Y Y^T)>
                  + (N-1) psi'(u) <X, Y> + 4 psi''(u) ||skew(X Y^T)||^2 ] kappa
    Grassmann:  [ 4 <skew(sym(G_X) X), skew(sym(G_Y) Y)>
                  + 2 psi'(u) (N <X, Y> - r^2) + 4 psi''(u) ||XY - YX||^2 ] kappa
    SPD:        [ 4 <X sym(G_X), Y sym(G_Y)>
                  + 4 (N+1) psi'(u) <X, Y>
                  + 16 psi''(u) <X(X - Y), Y(X - Y)> ] kappa

``kp_bruteforce``
    Explicit sum over the killing basis: kappa * sum_l [ K^l_x log(p kappa)
    * K^l_y log(p kappa) + K^l_y K^l_x log kappa ], with the mixed second
    derivative of log kappa taken per generator in analytic form.  This is
    the oracle every closed form is validated against.

``kp_fd``
    Same sum with every killing derivative replaced by central finite
    differences along group-action curves exp(t*gen).x — an oracle for the
    oracle.

``gram`` assembles the kernel matrix; in closed-form mode it uses a fully
vectorized path (requires on-manifold points), identical to the pairwise
loop up to floating-point roundoff.
"""

import numpy as np
import scipy.linalg

from .errors import DomainError
from .linalg import frobenius, skew, sym


def _pair_scalars(kernel, x, y):
    u = kernel.sqdist(x, y)
    return u, float(np.exp(-kernel.psi(u))), float(kernel.dpsi(u)), float(kernel.d2psi(u))


class SteinKernelEvaluator:
    """kappa_p evaluator for (manifold, radial kernel, score model)."""

    def __init__(self, manifold, kernel, model, mode="closed"):
        if model.manifold is not manifold and model.manifold.kind != manifold.kind:
            raise DomainError("model manifold does not match evaluator manifold")
        if mode not in ("closed", "brute", "fd"):
            raise DomainError(f"unknown mode {mode!r}")
        self.manifold = manifold
        self.kernel = kernel
        self.model = model
        self.mode = mode
        self._curve_cache = {}

    def pair(self, x, y, h=1e-4):
        if self.mode == "closed":
            return self.kp_closed(x, y)
        if self.mode == "brute":
            return self.kp_bruteforce(x, y)
        return self.kp_fd(x, y, h=h)

    # -- closed forms ------------------------------------------------------

    def kp_closed(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        man = self.manifold
        u, kap, dpsi, d2psi = _pair_scalars(self.kernel, x, y)
        gx = self.model.score(x) + 2.0 * dpsi * (y - x)
        gy = self.model.score(y) + 2.0 * dpsi * (x - y)
        if man.kind == "stiefel":
            t1 = frobenius(skew(gx @ x.T), skew(gy @ y.T))
            t2 = (man.N - 1) * dpsi * frobenius(x, y)
            t3 = 4.0 * d2psi * np.sum(skew(x @ y.T) ** 2)
        elif man.kind == "grassmann":
            t1 = 4.0 * frobenius(skew(sym(gx) @ x), skew(sym(gy) @ y))
            comm = x @ y - y @ x
            t2 = 2.0 * dpsi * (man.N * frobenius(x, y) - man.r**2)
            t3 = 4.0 * d2psi * np.sum(comm**2)
        elif man.kind == "spd":
            t1 = 4.0 * frobenius(x @ sym(gx), y @ sym(gy))
            t2 = 4.0 * (man.N + 1) * dpsi * frobenius(x, y)
            t3 = 16.0 * d2psi * frobenius(x @ (x - y), y @ (x - y))
        else:
            raise DomainError(f"no closed form on {man.kind}")
        return kap * (t1 + t2 + t3)

    # -- generator-sum oracle ------------------------------------------------

    def kp_bruteforce(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        man = self.manifold
        u, kap, dpsi, d2psi = _pair_scalars(self.kernel, x, y)
        gx = self.model.score(x) + 2.0 * dpsi * (y - x)
        gy = self.model.score(y) + 2.0 * dpsi * (x - y)
        total = 0.0
        for l, gen in enumerate(man.generators):
            kx = man.killing_tangent(l, x)
            ky = man.killing_tangent(l, y)
            first = frobenius(gx, kx) * frobenius(gy, ky)
            if man.kind == "stiefel":
                mixed = 2.0 * dpsi * np.trace(x.T @ gen.T @ gen @ y) - 4.0 * d2psi * (
                    np.trace(x.T @ gen.T @ y) * np.trace(x.T @ gen @ y)
                )
            elif man.kind == "grassmann":
                ax = gen @ x - x @ gen
                ay = gen @ y - y @ gen
                mixed = 2.0 * dpsi * np.trace(ax @ ay) - 4.0 * d2psi * (
                    frobenius(y @ x - x @ y, gen) * frobenius(x @ y - y @ x, gen)
                )
            elif man.kind == "spd":
                mixed = 4.0 * dpsi * np.trace(
                    x @ gen @ y @ gen + x @ gen @ gen.T @ y
                ) + 16.0 * d2psi * (
                    np.trace((x - y) @ x @ gen) * np.trace((x - y) @ y @ gen)
                )
            else:
                raise DomainError(f"unsupported manifold {man.kind}")
            total += first + mixed
        return kap * total

    # -- finite-difference oracle ---------------------------------------------

    def _curves(self, h):
        key = round(float(h), 12)
        cached = self._curve_cache.get(key)
        if cached is None:
            man = self.manifold
            cached = [
                (scipy.linalg.expm(h * g), scipy.linalg.expm(-h * g))
                for g in man.generators
            ]
            self._curve_cache[key] = cached
        return cached

    def _act(self, g, x):
        kind = self.manifold.kind
        if kind == "stiefel":
            return g @ x
        if kind == "grassmann":
            return g @ x @ g.T
        return g.T @ x @ g

    def kp_fd(self, x, y, h=1e-4):
        if not 1e-6 <= h <= 1e-3:
            raise DomainError("h must lie in [1e-6, 1e-3]")
        x, y = np.asarray(x, float), np.asarray(y, float)
        kern = self.kernel
        kap = kern.eval(x, y)
        logp = self.model.logpdf
        total = 0.0
        for gp, gm in self._curves(h):
            xp, xm = self._act(gp, x), self._act(gm, x)
            yp, ym = self._act(gp, y), self._act(gm, y)
            fx = (logp(xp) + kern.log_eval(xp, y) - logp(xm) - kern.log_eval(xm, y)) / (
                2.0 * h
            )
            fy = (logp(yp) + kern.log_eval(x, yp) - logp(ym) - kern.log_eval(x, ym)) / (
                2.0 * h
            )
            mixed = (
                kern.log_eval(xp, yp)
                - kern.log_eval(xp, ym)
                - kern.log_eval(xm, yp)
                + kern.log_eval(xm, ym)
            ) / (4.0 * h * h)
            total += fx * fy + mixed
        return kap * total

    # -- Gram ------------------------------------------------------------------

    def gram(self, points, mode=None, vectorized=True):
        """Symmetric kappa_p Gram matrix over a list of points."""
        mode = mode or self.mode
        pts = np.asarray(points, float)
        if pts.ndim == 2:
            pts = pts[None]
        if pts.shape[0] < 1:
            raise DomainError("need at least one point")
        if mode == "closed" and vectorized:
            return self._gram_batched(pts)
        return self._gram_loop(pts, mode)

    def _gram_loop(self, pts, mode):
        n = pts.shape[0]
        g = np.empty((n, n))
        fn = {"closed": self.kp_closed, "brute": self.kp_bruteforce, "fd": self.kp_fd}[
            mode
        ]
        for i in range(n):
            for j in range(i, n):
                v = fn(pts[i], pts[j])
                g[i, j] = v
                g[j, i] = v
        return 0.5 * (g + g.T)

    @staticmethod
    def _tr_prod_sq(pts):
        """T2[i, j] = tr((X_i X_j)^2) without an n^2 x N^2 intermediate."""
        n = pts.shape[0]
        left = np.einsum("iab,icd->iabcd", pts, pts).reshape(n, -1)
        right = np.einsum("jbc,jda->jabcd", pts, pts).reshape(n, -1)
        return left @ right.T

    def _gram_batched(self, pts):
        """Closed-form Gram via factorized pair terms; assumes validated points."""
        man = self.manifold
        kern = self.kernel
        n = pts.shape[0]
        flat = pts.reshape(n, -1)
        scores = np.stack([np.asarray(self.model.score(p), float) for p in pts])
        sq = np.sum(flat * flat, axis=1)
        cross = flat @ flat.T
        u = np.maximum(sq[:, None] + sq[None, :] - 2.0 * cross, 0.0)
        np.fill_diagonal(u, 0.0)
        kap = np.exp(-kern.psi(u))
        dp = kern.dpsi(u) + 0.0 * u
        d2p = kern.d2psi(u) + 0.0 * u

        if man.kind == "stiefel":
            # kp = kappa [ <A_i + 2p' B_ij, A_j - 2p' B_ij>
            #              + (N-1) p' <X_i,X_j> + 4 p'' ||B_ij||^2 ]
            # with A_i = skew(S_i X_i^T), B_ij = skew(X_j X_i^T), B_ji = -B_ij.
            a = np.stack([skew(s @ p.T) for s, p in zip(scores, pts)])
            t_aa = a.reshape(n, -1) @ a.reshape(n, -1).T
            ax = np.matmul(a, pts)  # A_i X_i
            pmat = ax.reshape(n, -1) @ flat.T  # <A_i, B_ij> = <A_i X_i, X_j>
            t2m = self._tr_prod_sq_rect(pts)  # tr((X_i^T X_j)^2)
            bb = 0.5 * (man.r - t2m)  # ||B_ij||^2 on-manifold
            t1 = t_aa - 2.0 * dp * (pmat + pmat.T) - 4.0 * dp * dp * bb
            t2 = (man.N - 1) * dp * cross
            t3 = 4.0 * d2p * bb
        elif man.kind == "grassmann":
            # kp = kappa [ 4 <A_i + 2p' D_ij, A_j - 2p' D_ij>
            #              + 2p'(N <X_i,X_j> - r^2) + 4p'' ||[X_i,X_j]||^2 ]
            # with A_i = skew(sym(S_i) X_i), D_ij = skew(X_j X_i), D_ji = -D_ij.
            a = np.stack([skew(sym(s) @ p) for s, p in zip(scores, pts)])
            t_aa = a.reshape(n, -1) @ a.reshape(n, -1).T
            ax = np.matmul(a, pts)  # A_i X_i
            pmat = ax.reshape(n, -1) @ flat.T  # <A_i, D_ij>
            t2m = self._tr_prod_sq(pts)
            comm2 = 2.0 * cross - 2.0 * t2m  # ||X_i X_j - X_j X_i||^2
            t1 = 4.0 * (t_aa - 2.0 * dp * (pmat + pmat.T) - dp * dp * comm2)
            t2 = 2.0 * dp * (man.N * cross - man.r**2)
            t3 = 4.0 * d2p * comm2
        elif man.kind == "spd":
            # kp = kappa [ 4 <W_i + 2p'(X_iX_j - X_i^2), W_j + 2p'(X_jX_i - X_j^2)>
            #              + 4(N+1) p' <X_i,X_j> + 16 p'' mix2_ij ]
            # with W_i = X_i sym(S_i), mix2 = <X_i(X_i-X_j), X_j(X_i-X_j)>.
            w = np.stack([p @ sym(s) for p, s in zip(pts, scores)])
            wv = w.reshape(n, -1)
            t_ww = wv @ wv.T
            sq2 = np.matmul(pts, pts)
            cube = np.matmul(sq2, pts)
            wx = np.matmul(w, pts).reshape(n, -1)  # W_i X_i
            e1 = wx @ flat.T  # <W_i, X_j X_i>
            e2 = wv @ sq2.reshape(n, -1).T  # <W_i, X_j^2>
            t2m = self._tr_prod_sq(pts)  # <X_i X_j, X_j X_i>
            e6 = flat @ cube.reshape(n, -1).T  # <X_i X_j, X_j^2> = <X_i, X_j^3>
            e8 = sq2.reshape(n, -1) @ sq2.reshape(n, -1).T
            mix2 = e6.T - e8 - t2m + e6  # <X_i(X_i-X_j), X_j(X_i-X_j)>
            t1 = 4.0 * (
                t_ww + 2.0 * dp * (e1 - e2) + 2.0 * dp * (e1.T - e2.T)
                - 4.0 * dp * dp * mix2
            )
            t2 = 4.0 * (man.N + 1) * dp * cross
            t3 = 16.0 * d2p * mix2
        else:
            raise DomainError(f"no batched gram on {man.kind}")
        g = kap * (t1 + t2 + t3)
        return 0.5 * (g + g.T)

    @staticmethod
    def _tr_prod_sq_rect(pts):
        """T2[i, j] = tr((X_i^T X_j)^2) for stacked N x r frames."""
        n = pts.shape[0]
        left = np.einsum("iac,ibd->iabcd", pts, pts).reshape(n, -1)
        right = np.einsum("jbc,jad->jabcd", pts, pts).reshape(n, -1)
        return left @ right.T
