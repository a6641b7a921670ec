"""Score models: unnormalized log densities and Euclidean-gradient scores.

All densities are taken with respect to the invariant volume measure of the
manifold (the measure the divergence theorem behind Stein's identity uses).
For SPD this is the affine-invariant volume, which shifts the Wishart
determinant exponent relative to the Lebesgue convention: the model with
parameter ``r`` below equals the classical (Bartlett-sampled) Wishart with
``dof = r - N + 1`` degrees of freedom.
"""

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import frobenius, sym, unvec, vec
from .manifolds import riemannian_score_rg


class ScoreModel:
    """Family with an unnormalized log density and a score representative."""

    family = None

    def __init__(self, manifold):
        self.manifold = manifold

    def score(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        """Unnormalized log density (additive constants dropped)."""
        raise NotImplementedError

    def params(self):
        return {}


class Uniform(ScoreModel):
    family = "uniform"

    def score(self, x):
        return np.zeros(self.manifold.point_shape)

    def logpdf(self, x):
        return 0.0


class MatrixFisher(ScoreModel):
    """p(X) ~ exp(tr(F^T X)); on Grassmann only the symmetric part of F acts."""

    family = "matrix_fisher"

    def __init__(self, manifold, f):
        super().__init__(manifold)
        if manifold.kind not in ("stiefel", "grassmann"):
            raise DomainError("matrix Fisher is defined on Stiefel and Grassmann")
        f = np.asarray(f, float)
        if f.shape != manifold.point_shape:
            raise DimensionError(f"F must have shape {manifold.point_shape}")
        self.f = f

    def score(self, x):
        if self.manifold.kind == "grassmann":
            return sym(self.f)
        return self.f

    def logpdf(self, x):
        return frobenius(self.f, x)

    def params(self):
        return {"F": self.f}


class MatrixBingham(ScoreModel):
    """p(X) ~ exp(tr(X^T A X)) on Stiefel; only sym(A) is identified.

    The parameter is symmetrized on construction, so the score
    (A + sym(A)) X collapses to the exact gradient 2 sym(A) X for every
    input A (the skew part never enters the density).
    """

    family = "matrix_bingham"

    def __init__(self, manifold, a):
        super().__init__(manifold)
        if manifold.kind != "stiefel":
            raise DomainError("matrix Bingham degenerates off Stiefel; use matrix Fisher")
        a = np.asarray(a, float)
        if a.shape != (manifold.N, manifold.N):
            raise DimensionError(f"A must be {manifold.N} x {manifold.N}")
        self.a = a
        self._sa = sym(a)

    def score(self, x):
        return 2.0 * self._sa @ np.asarray(x, float)

    def logpdf(self, x):
        x = np.asarray(x, float)
        return frobenius(x, self._sa @ x)

    def params(self):
        return {"A": self.a}


class MatrixFisherBingham(ScoreModel):
    """p(X) ~ exp(tr(X^T A X) + tr(F^T X)) on Stiefel."""

    family = "matrix_fisher_bingham"

    def __init__(self, manifold, a, f):
        super().__init__(manifold)
        if manifold.kind != "stiefel":
            raise DomainError("matrix Fisher-Bingham is defined on Stiefel")
        self._mb = MatrixBingham(manifold, a)
        self._mf = MatrixFisher(manifold, f)
        self.a = self._mb.a
        self.f = self._mf.f

    def score(self, x):
        return self._mb.score(x) + self._mf.score(x)

    def logpdf(self, x):
        return self._mb.logpdf(x) + self._mf.logpdf(x)

    def params(self):
        return {"A": self.a, "F": self.f}


class RiemannianGaussian(ScoreModel):
    """p(X) ~ exp(-d^2(X, mean) / (2 sigma^2)) for the manifold's distance."""

    family = "riemannian_gaussian"

    def __init__(self, manifold, mean, sigma):
        super().__init__(manifold)
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        self.mean = manifold.validate(mean)
        self.sigma = float(sigma)

    def score(self, x):
        return riemannian_score_rg(self.manifold, self.mean, self.sigma, x)

    def logpdf(self, x):
        d = self.manifold.dist(x, self.mean)
        return -0.5 * d * d / self.sigma**2

    def params(self):
        return {"mean": self.mean, "sigma": self.sigma}


class Wishart(ScoreModel):
    """log p = ((r - N + 1)/2) log|X| - tr(V^-1 X)/2 w.r.t. the invariant volume.

    Equals the Lebesgue-density Wishart with dof = r - N + 1; see module
    docstring.  ``sampling.bartlett_dof_for`` wires exact sampling.
    """

    family = "wishart"

    def __init__(self, manifold, v, r):
        super().__init__(manifold)
        if manifold.kind != "spd":
            raise DomainError("Wishart lives on SPD matrices")
        self.v = manifold.validate(v)
        if r <= manifold.N - 1:
            raise DomainError(f"need dof parameter r > N - 1 = {manifold.N - 1}")
        self.r = float(r)
        self._vinv = np.linalg.inv(self.v)

    def score(self, x):
        x = self.manifold.validate(x)
        return -0.5 * self._vinv + 0.5 * (self.r - self.manifold.N + 1) * np.linalg.inv(x)

    def logpdf(self, x):
        x = self.manifold.validate(x)
        sign, logdet = np.linalg.slogdet(x)
        if sign <= 0:
            raise DomainError("Wishart density needs a positive definite argument")
        return 0.5 * (self.r - self.manifold.N + 1) * logdet - 0.5 * frobenius(
            self._vinv, x
        )

    def params(self):
        return {"V": self.v, "r": self.r}


# ---------------------------------------------------------------------------
# exponential families


class ExponentialFamilySpec:
    """Family p_theta ~ exp(theta^T zeta(X) + eta(X)) with gradient stack.

    ``zstack(X)`` is the (N*r or N^2) x s matrix whose k-th column is
    vec(grad zeta_k), so vec(grad(theta^T zeta)) = zstack(X) @ theta.
    """

    def __init__(self, manifold, name, s, zeta, zstack, theta_to_model,
                 eta=None, grad_eta=None):
        self.manifold = manifold
        self.name = name
        self.s = int(s)
        self._zeta = zeta
        self._zstack = zstack
        self._theta_to_model = theta_to_model
        self._eta = eta or (lambda x: 0.0)
        self._grad_eta = grad_eta or (lambda x: np.zeros(manifold.point_shape))

    def zeta(self, x):
        return self._zeta(np.asarray(x, float))

    def eta(self, x):
        return self._eta(np.asarray(x, float))

    def grad_eta(self, x):
        return self._grad_eta(np.asarray(x, float))

    def zstack(self, x):
        return self._zstack(np.asarray(x, float))

    def grad_zeta(self, x, k):
        n, r = self.manifold.point_shape
        return unvec(self.zstack(x)[:, k], n, r)

    def theta_to_model(self, theta):
        theta = np.asarray(theta, float)
        if theta.shape != (self.s,):
            raise DimensionError(f"theta must have length {self.s}")
        return self._theta_to_model(theta)

    def logpdf(self, theta, x):
        return float(np.dot(theta, self.zeta(x))) + self.eta(x)


def _mb_zstack(x, n):
    # columns vec((E_ij + E_ji) X) in column-major (i, j) order
    r = x.shape[1]
    eye = np.eye(n)
    z = np.zeros((n * r, n * n))
    for j in range(n):
        for i in range(n):
            g = np.outer(eye[:, i], x[j]) + np.outer(eye[:, j], x[i])
            z[:, i + j * n] = vec(g)
    return z


def expfam_for(family, manifold):
    """Exponential-family spec for (family, manifold); errors if unsupported."""
    kind = manifold.kind
    n, r = manifold.point_shape

    if family == "matrix_fisher" and kind == "stiefel":
        s = n * r
        return ExponentialFamilySpec(
            manifold, "matrix_fisher", s,
            zeta=lambda x: vec(x),
            zstack=lambda x: np.eye(s),
            theta_to_model=lambda t: MatrixFisher(manifold, unvec(t, n, r)),
        )
    if family == "matrix_fisher" and kind == "grassmann":
        s = n * n
        return ExponentialFamilySpec(
            manifold, "matrix_fisher", s,
            zeta=lambda x: vec(x),
            zstack=lambda x: np.eye(s),
            theta_to_model=lambda t: MatrixFisher(manifold, unvec(t, n, n)),
        )
    if family == "matrix_bingham" and kind == "stiefel":
        s = n * n
        return ExponentialFamilySpec(
            manifold, "matrix_bingham", s,
            zeta=lambda x: vec(x @ x.T),
            zstack=lambda x: _mb_zstack(x, n),
            theta_to_model=lambda t: MatrixBingham(manifold, unvec(t, n, n)),
        )
    if family == "matrix_fisher_bingham" and kind == "stiefel":
        s = n * n + n * r
        return ExponentialFamilySpec(
            manifold, "matrix_fisher_bingham", s,
            zeta=lambda x: np.concatenate([vec(x @ x.T), vec(x)]),
            zstack=lambda x: np.concatenate(
                [_mb_zstack(x, n), np.eye(n * r)], axis=1
            ),
            theta_to_model=lambda t: MatrixFisherBingham(
                manifold, unvec(t[: n * n], n, n), unvec(t[n * n:], n, r)
            ),
        )
    raise DomainError(f"no exponential family {family!r} on {kind}")


def model_from_config(manifold, cfg):
    """Build a ScoreModel from a config block."""
    kind = cfg.get("kind")
    if kind == "uniform":
        return Uniform(manifold)
    if kind == "matrix_fisher":
        return MatrixFisher(manifold, np.asarray(cfg["F"], float))
    if kind == "matrix_bingham":
        return MatrixBingham(manifold, np.asarray(cfg["A"], float))
    if kind == "matrix_fisher_bingham":
        return MatrixFisherBingham(
            manifold, np.asarray(cfg["A"], float), np.asarray(cfg["F"], float)
        )
    if kind == "riemannian_gaussian":
        return RiemannianGaussian(
            manifold, np.asarray(cfg["mean"], float), float(cfg["sigma"])
        )
    if kind == "wishart":
        return Wishart(manifold, np.asarray(cfg["V"], float), float(cfg["r"]))
    raise DomainError(f"unknown family kind {kind!r}")
