import numpy as np
import pytest

from steinmat.errors import ConvergenceError, DomainError
from steinmat.manifolds import Grassmann, Spd, Stiefel
from steinmat.models import (MatrixBingham, MatrixFisher, RiemannianGaussian,
                             Uniform, Wishart)
from steinmat.sampling import (MhConfig, bartlett_dof_for, rng_for, sample_mh,
                               sample_model, sample_rejection_mf,
                               sample_uniform, sample_wishart)

rng = np.random.default_rng(123)


def test_uniform_circle_mean_vanishes():
    man = Stiefel(2, 1)
    pts = sample_uniform(man, 10000, seed=1)
    assert np.linalg.norm(pts.mean(axis=0)) <= 0.05


def test_uniform_points_validate():
    for man in (Stiefel(4, 2), Grassmann(4, 2)):
        for p in sample_uniform(man, 25, seed=2):
            man.validate(p)


def test_uniform_second_moment():
    man = Stiefel(3, 2)
    pts = sample_uniform(man, 10000, seed=3)
    second = np.einsum("nab,ncb->ac", pts, pts) / len(pts)
    assert np.max(np.abs(second - (2.0 / 3.0) * np.eye(3))) <= 0.05


def test_uniform_spd_is_an_error():
    with pytest.raises(DomainError):
        sample_uniform(Spd(2), 5, seed=0)
    with pytest.raises(DomainError):
        sample_uniform(Stiefel(3, 2), 0, seed=0)


def test_rejection_zero_parameter_accepts_everything():
    man = Stiefel(3, 2)
    model = MatrixFisher(man, np.zeros((3, 2)))
    pts = sample_rejection_mf(model, 500, seed=4)
    uni = sample_uniform(man, 500, seed=4)
    # bound = 0, acceptance probability exp(0 - 0) = 1: first 500 proposals
    assert np.allclose(pts, uni[: len(pts)])


def test_rejection_tilts_the_statistic():
    man = Stiefel(3, 2)
    f = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    model = MatrixFisher(man, f)
    tilted = sample_rejection_mf(model, 2000, seed=5)
    uniform = sample_uniform(man, 2000, seed=5)
    assert (np.einsum("nab,ab->n", tilted, f).mean()
            > np.einsum("nab,ab->n", uniform, f).mean() + 0.2)


def test_rejection_grassmann():
    man = Grassmann(4, 2)
    f = np.diag([2.0, 1.0, -1.0, -2.0])
    model = MatrixFisher(man, f)
    pts = sample_rejection_mf(model, 300, seed=6)
    for p in pts[:10]:
        man.validate(p)
    uniform = sample_uniform(man, 300, seed=6)
    assert (np.einsum("nab,ab->n", pts, f).mean()
            > np.einsum("nab,ab->n", uniform, f).mean())


def test_rejection_low_acceptance_suggests_mh():
    man = Stiefel(3, 2)
    model = MatrixFisher(man, 400.0 * np.ones((3, 2)))
    with pytest.raises(ConvergenceError, match="Metropolis"):
        sample_rejection_mf(model, 50, seed=7)


def test_mh_uniform_target_accepts_all_proposals():
    man = Stiefel(3, 2)
    _, rate = sample_mh(Uniform(man), 50, config=MhConfig(step=0.3, burn_in=20, thin=1),
                        seed=8, return_acceptance=True)
    assert rate == 1.0


def test_mh_chains_stay_on_manifold():
    for man, model in [
        (Stiefel(3, 2), MatrixBingham(Stiefel(3, 2), np.diag([1.0, 0.0, -1.0]))),
        (Grassmann(4, 2), MatrixFisher(Grassmann(4, 2), np.diag([1.0, 0.5, 0.0, -1.0]))),
        (Spd(2), Wishart(Spd(2), np.eye(2), 4.0)),
    ]:
        pts = sample_mh(model, 40, config=MhConfig(step=0.3, burn_in=50, thin=2),
                        seed=9)
        for p in pts:
            man.validate(p, tol=1e-8) if man.kind != "spd" else man.validate(p)


def test_mh_wishart_matches_exact_sampler_mean():
    # Bartlett dof 4 corresponds to the score model with r = dof + N - 1 = 5
    sp = Spd(2)
    dof = 4.0
    model = Wishart(sp, np.eye(2), dof + sp.N - 1)
    exact = sample_wishart(np.eye(2), dof, 5000, seed=10)
    chain = sample_mh(model, 5000, config=MhConfig(step=0.5, burn_in=2000, thin=5),
                      seed=10)
    m_exact = exact.mean(axis=0)
    m_chain = chain.mean(axis=0)
    assert np.max(np.abs(m_exact - dof * np.eye(2))) <= 0.05 * dof
    assert np.max(np.abs(m_chain - m_exact)) <= 0.05 * dof


def test_mh_circle_mean_direction():
    man = Stiefel(2, 1)
    f = np.array([[3.0], [0.0]])
    model = MatrixFisher(man, f)
    pts = sample_mh(model, 20000, config=MhConfig(step=0.5, burn_in=500, thin=1),
                    seed=11)
    mean_dir = pts.mean(axis=0).ravel()
    mean_dir = mean_dir / np.linalg.norm(mean_dir)
    angle = np.degrees(np.arccos(np.clip(mean_dir @ np.array([1.0, 0.0]), -1, 1)))
    assert angle <= 5.0


def test_mh_rg_target_on_stiefel():
    man = Stiefel(3, 2)
    mean = sample_uniform(man, 1, seed=12)[0]
    model = RiemannianGaussian(man, mean, 0.4)
    pts = sample_mh(model, 30, config=MhConfig(step=0.2, burn_in=30, thin=2), seed=12)
    dists = [man.dist(p, mean) for p in pts]
    assert np.median(dists) < np.pi / 2


def test_wishart_moments_and_validity():
    sp = Spd(2)
    v = np.array([[1.0, 0.3], [0.3, 0.5]])
    pts = sample_wishart(v, 6.0, 10000, seed=13)
    assert np.max(np.abs(pts.mean(axis=0) - 6.0 * v)) <= 0.05 * 6.0 * np.max(np.abs(v))
    for p in pts[:50]:
        sp.validate(p)


def test_wishart_minimal_dof_full_rank():
    pts = sample_wishart(np.eye(3), 3.0, 200, seed=14)
    assert np.all(np.linalg.det(pts) > 0)


def test_wishart_dof_validation():
    with pytest.raises(DomainError):
        sample_wishart(np.eye(3), 1.5, 10, seed=0)
    assert bartlett_dof_for(5.0, 2) == 4.0


def test_seed_determinism_bytes():
    man = Stiefel(3, 2)
    a = sample_uniform(man, 20, seed=15)
    b = sample_uniform(man, 20, seed=15)
    assert a.tobytes() == b.tobytes()
    model = MatrixBingham(man, np.diag([1.0, -1.0, 0.0]))
    c1 = sample_mh(model, 10, config=MhConfig(step=0.3, burn_in=10, thin=1), seed=16)
    c2 = sample_mh(model, 10, config=MhConfig(step=0.3, burn_in=10, thin=1), seed=16)
    assert c1.tobytes() == c2.tobytes()


def test_streams_are_independent():
    man = Stiefel(3, 2)
    a = sample_uniform(man, 10, seed=17, stream=0)
    b = sample_uniform(man, 10, seed=17, stream=1)
    assert not np.allclose(a, b)
    r1 = rng_for(5, 2).standard_normal(4)
    r2 = rng_for(5, 2).standard_normal(4)
    assert np.array_equal(r1, r2)


def test_mh_default_step_is_manifold_dependent():
    cfg = MhConfig()
    assert cfg.step_for(Stiefel(3, 2)) == 0.3
    assert cfg.step_for(Grassmann(4, 2)) == 0.3
    assert cfg.step_for(Spd(2)) == 0.2
    assert MhConfig(step=0.7).step_for(Spd(2)) == 0.7


def test_sample_model_dispatch():
    man = Stiefel(3, 2)
    assert len(sample_model(Uniform(man), 7, seed=18)) == 7
    f = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    assert len(sample_model(MatrixFisher(man, f), 7, seed=18)) == 7
    sp = Spd(2)
    wis = Wishart(sp, np.eye(2), 5.0)
    pts = sample_model(wis, 7, seed=18)  # exact Bartlett with dof 4
    assert len(pts) == 7
    mb = MatrixBingham(man, np.diag([1.0, 0.0, -1.0]))
    pts = sample_model(mb, 7, seed=18,
                       mh_config=MhConfig(step=0.3, burn_in=20, thin=1))
    assert len(pts) == 7
