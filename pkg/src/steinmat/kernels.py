"""Radial kernels restricted from the ambient Euclidean matrix space.

A radial kernel is kappa(X, Y) = exp(-psi(||X - Y||_F^2)).  Two profiles are
implemented:

* Gaussian:          psi(t) = tau*t/2
* inverse quadratic: psi(t) = gamma*log(beta + t), i.e. (beta + t)^(-gamma)
"""

import numpy as np

from .errors import DimensionError, DomainError


class RadialKernel:
    """Base: profile psi with first and second derivatives."""

    def psi(self, t):
        raise NotImplementedError

    def dpsi(self, t):
        raise NotImplementedError

    def d2psi(self, t):
        raise NotImplementedError

    def sqdist(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if x.shape != y.shape:
            raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
        d = x - y
        return float(np.sum(d * d))

    def eval(self, x, y):
        """kappa(X, Y) = exp(-psi(||X-Y||^2))."""
        return float(np.exp(-self.psi(self.sqdist(x, y))))

    def log_eval(self, x, y):
        return -self.psi(self.sqdist(x, y))

    def grad_log_x(self, x, y):
        """Canonical Euclidean-gradient representative of log kappa in X.

        2 psi'(||X-Y||^2) (Y - X); valid on every implemented manifold.
        """
        x, y = np.asarray(x, float), np.asarray(y, float)
        return 2.0 * self.dpsi(self.sqdist(x, y)) * (y - x)

    def grad_log_x_reduced(self, x, y):
        """Simplified representative 2 psi' * Y.

        Differs from the canonical one by a multiple of X, which is
        annihilated by the skew projections on Stiefel and Grassmann; not a
        valid representative on SPD.
        """
        x, y = np.asarray(x, float), np.asarray(y, float)
        return 2.0 * self.dpsi(self.sqdist(x, y)) * y


class GaussianKernel(RadialKernel):
    def __init__(self, tau=1.0):
        if tau <= 0:
            raise DomainError("tau must be positive")
        self.tau = float(tau)

    def psi(self, t):
        return 0.5 * self.tau * t

    def dpsi(self, t):
        return 0.5 * self.tau + 0.0 * t

    def d2psi(self, t):
        return 0.0 * t

    def __repr__(self):
        return f"GaussianKernel(tau={self.tau})"


class InverseQuadraticKernel(RadialKernel):
    def __init__(self, beta=1.0, gamma=0.5):
        if beta <= 0 or gamma <= 0:
            raise DomainError("beta and gamma must be positive")
        self.beta = float(beta)
        self.gamma = float(gamma)

    def psi(self, t):
        return self.gamma * np.log(self.beta + t)

    def dpsi(self, t):
        return self.gamma / (self.beta + t)

    def d2psi(self, t):
        return -self.gamma / (self.beta + t) ** 2

    def __repr__(self):
        return f"InverseQuadraticKernel(beta={self.beta}, gamma={self.gamma})"


def kernel_from_config(cfg):
    """Build a kernel from a config block {family, tau | beta, gamma}."""
    family = cfg.get("family", "gaussian")
    if family == "gaussian":
        return GaussianKernel(tau=cfg.get("tau", 1.0))
    if family == "inverse_quadratic":
        return InverseQuadraticKernel(beta=cfg.get("beta", 1.0), gamma=cfg.get("gamma", 0.5))
    raise DomainError(f"unknown kernel family {family!r}")
