"""Kernel Stein discrepancy on matrix manifolds.

Normalization-free goodness-of-fit and parameter estimation on Stiefel,
Grassmann and SPD manifolds: closed-form Stein kernels validated against a
brute-force killing-field oracle, exact quadratic minimum-KSD estimation
for exponential families, and a composite goodness-of-fit test.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, CutLocusError,
                     DimensionError, DomainError, NonConvexError, SteinmatError)
from .gof import GofResult, gof_test, simulate_null
from .kernels import GaussianKernel, InverseQuadraticKernel, RadialKernel
from .ksdstats import WeightedSample, bootstrap_se, u_stat, v_stat
from .manifolds import Grassmann, Manifold, Spd, Stiefel, manifold_for
from .mksde import (MksdeSolution, MksdeSystem, assemble, mf_numeric_mle,
                    mf_small_f_mle, pair_qb, pair_qb_vectorized_stiefel, solve)
from .models import (ExponentialFamilySpec, MatrixBingham, MatrixFisher,
                     MatrixFisherBingham, RiemannianGaussian, ScoreModel,
                     Uniform, Wishart, expfam_for)
from .sampling import (MhConfig, bartlett_dof_for, rng_for, sample_mh,
                       sample_model, sample_rejection_mf, sample_uniform,
                       sample_wishart)
from .steinkernel import SteinKernelEvaluator

__all__ = [
    "ConfigError", "ConvergenceError", "CutLocusError", "DimensionError",
    "DomainError", "NonConvexError", "SteinmatError",
    "GofResult", "gof_test", "simulate_null",
    "GaussianKernel", "InverseQuadraticKernel", "RadialKernel",
    "WeightedSample", "bootstrap_se", "u_stat", "v_stat",
    "Grassmann", "Manifold", "Spd", "Stiefel", "manifold_for",
    "MksdeSolution", "MksdeSystem", "assemble", "mf_numeric_mle",
    "mf_small_f_mle", "pair_qb", "pair_qb_vectorized_stiefel", "solve",
    "ExponentialFamilySpec", "MatrixBingham", "MatrixFisher",
    "MatrixFisherBingham", "RiemannianGaussian", "ScoreModel", "Uniform",
    "Wishart", "expfam_for",
    "MhConfig", "bartlett_dof_for", "rng_for", "sample_mh", "sample_model",
    "sample_rejection_mf", "sample_uniform", "sample_wishart",
    "SteinKernelEvaluator",
    "__version__",
]
