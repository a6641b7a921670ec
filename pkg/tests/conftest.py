"""Shared fixtures: the (manifold, kernel, family) configuration matrix."""

import numpy as np

from steinmat.kernels import GaussianKernel, InverseQuadraticKernel
from steinmat.manifolds import Grassmann, Spd, Stiefel
from steinmat.models import (MatrixBingham, MatrixFisher, MatrixFisherBingham,
                             RiemannianGaussian, Uniform, Wishart)
from steinmat.sampling import sample_uniform


def rand_spd(rng, n, scale=0.3):
    g = rng.standard_normal((n, n)) * scale
    return np.eye(n) + g @ g.T


def spd_points(rng, n_dim, count, scale=0.3):
    return np.stack([rand_spd(rng, n_dim, scale) for _ in range(count)])


def near_points(man, mean, rng, count, radius=0.35):
    """Points a short geodesic hop from ``mean`` (keeps RG logs well-posed)."""
    out = []
    for _ in range(count):
        v = man.tangent_project(mean, rng.standard_normal(man.point_shape))
        nv = np.linalg.norm(v)
        if nv > 0:
            v = v * (radius * rng.uniform(0.3, 1.0) / nv)
        out.append(man.exp(mean, v))
    return np.stack(out)


def config_matrix(rng, n_points=8):
    """All in-scope (manifold, model, points) triples.

    SPD points use eigenvalues O(1) so that finite-difference truncation
    stays far below the oracle tolerances.
    """
    configs = []
    for n_, r_ in ((3, 2), (3, 1), (4, 2)):
        man = Stiefel(n_, r_)
        pts = sample_uniform(man, n_points, seed=1000 + 10 * n_ + r_)
        f = rng.standard_normal(man.point_shape)
        a = rng.standard_normal((n_, n_))
        configs += [
            (man, Uniform(man), pts),
            (man, MatrixFisher(man, f), pts),
            (man, MatrixBingham(man, a), pts),
            (man, MatrixFisherBingham(man, a, f), pts),
        ]
        mean = pts[0]
        configs.append(
            (man, RiemannianGaussian(man, mean, 0.7),
             near_points(man, mean, rng, max(4, n_points // 2)))
        )
    man = Grassmann(4, 2)
    pts = sample_uniform(man, n_points, seed=2000)
    configs += [
        (man, Uniform(man), pts),
        (man, MatrixFisher(man, rng.standard_normal((4, 4))), pts),
    ]
    mean = pts[0]
    configs.append(
        (man, RiemannianGaussian(man, mean, 0.7),
         near_points(man, mean, rng, max(4, n_points // 2)))
    )
    for n_ in (2, 3):
        man = Spd(n_)
        pts = spd_points(rng, n_, n_points)
        configs += [
            (man, Uniform(man), pts),
            (man, Wishart(man, rand_spd(rng, n_), n_ + 2.5), pts),
            (man, RiemannianGaussian(man, rand_spd(rng, n_), 0.8), pts),
        ]
    return configs


def both_kernels():
    return [GaussianKernel(1.0), InverseQuadraticKernel(1.0, 0.5)]
