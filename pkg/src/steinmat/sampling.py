"""Random generation on the three manifolds.

Reproducibility contract: every sampler is deterministic given (seed,
stream).  Streams are keyed into a counter-based Philox generator as
(seed, stream), so parallel chains with distinct stream ids draw
independent, replayable substreams.
"""

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError
from .linalg import skew, sym

_MASK = (1 << 64) - 1


def rng_for(seed, stream=0):
    """Philox generator keyed by (seed, stream)."""
    key = np.array([int(seed) & _MASK, int(stream) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _as_rng(seed_or_rng, stream=0):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return rng_for(seed_or_rng, stream)


def sample_uniform(manifold, n, seed=0, stream=0):
    """Invariant-measure uniform sample; errors on SPD (no uniform exists)."""
    if n < 1:
        raise DomainError("need n >= 1")
    rng = _as_rng(seed, stream)
    if manifold.kind == "stiefel":
        g = rng.standard_normal((n, manifold.N, manifold.r))
        q, r = np.linalg.qr(g)
        d = np.sign(np.einsum("nii->ni", r))
        d[d == 0] = 1.0
        return q * d[:, None, :]
    if manifold.kind == "grassmann":
        from .manifolds import Stiefel

        frames = sample_uniform(Stiefel(manifold.N, manifold.r), n, seed=rng)
        return np.einsum("nab,ncb->nac", frames, frames)
    raise DomainError("no uniform distribution exists on SPD matrices")


def sample_rejection_mf(model, n, seed=0, stream=0, probe=2000, min_rate=1e-4):
    """Exact matrix-Fisher sampling by rejection from the uniform measure.

    Accept X ~ uniform with probability exp(t(X) - M) where t is the linear
    statistic and M its maximum over the manifold (sum of singular values of
    F on Stiefel, sum of the top-r eigenvalues of sym(F) on Grassmann).
    """
    man = model.manifold
    if model.family != "matrix_fisher":
        raise DomainError("rejection sampler is specific to the matrix Fisher family")
    rng = _as_rng(seed, stream)
    if man.kind == "stiefel":
        bound = float(np.sum(np.linalg.svd(model.f, compute_uv=False)))
        stat = lambda pts: np.einsum("nab,ab->n", pts, model.f)
    elif man.kind == "grassmann":
        w = np.linalg.eigvalsh(sym(model.f))
        bound = float(np.sum(np.sort(w)[::-1][: man.r]))
        stat = lambda pts: np.einsum("nab,ab->n", pts, sym(model.f))
    else:
        raise DomainError("rejection sampler works on Stiefel and Grassmann")

    out = []
    proposed = 0
    accepted = 0
    batch = max(int(probe), 4 * n)
    while len(out) < n:
        pts = sample_uniform(man, batch, seed=rng)
        logacc = stat(pts) - bound
        keep = np.log(rng.uniform(size=batch)) < logacc
        proposed += batch
        accepted += int(np.count_nonzero(keep))
        out.extend(pts[keep])
        if proposed >= probe and accepted / proposed < min_rate:
            raise ConvergenceError(
                f"rejection acceptance rate {accepted / proposed:.2e} below "
                f"{min_rate:.0e}; use the Metropolis-Hastings sampler instead"
            )
    arr = np.stack(out[:n])
    arr.setflags(write=False)
    return arr


class MhConfig:
    """step=None picks the per-manifold default (0.3 compact, 0.2 SPD)."""

    def __init__(self, step=None, burn_in=1000, thin=5):
        if step is not None and step <= 0:
            raise DomainError("step must be positive")
        if burn_in < 0 or thin < 0:
            raise DomainError("burn_in and thin must be nonnegative")
        self.step = None if step is None else float(step)
        self.burn_in = int(burn_in)
        self.thin = max(int(thin), 1)

    def step_for(self, manifold):
        if self.step is not None:
            return self.step
        return 0.2 if manifold.kind == "spd" else 0.3


def _mh_proposal(manifold, x, step, rng):
    n = manifold.N
    if manifold.kind == "stiefel":
        omega = step * skew(rng.standard_normal((n, n)))
        return scipy.linalg.expm(omega) @ x
    if manifold.kind == "grassmann":
        omega = step * skew(rng.standard_normal((n, n)))
        o = scipy.linalg.expm(omega)
        return o @ x @ o.T
    g = scipy.linalg.expm(0.5 * step * rng.standard_normal((n, n)))
    return g.T @ x @ g


def _drift_fix(manifold, x):
    if manifold.kind == "stiefel":
        if np.linalg.norm(x.T @ x - np.eye(manifold.r)) > 1e-10:
            return manifold.project_point(x)
    elif manifold.kind == "grassmann":
        if np.linalg.norm(x @ x - x) > 1e-10:
            return manifold.project_point(x)
    else:
        return sym(x)
    return x


def sample_mh(model, n, config=None, seed=0, stream=0, init=None,
              return_acceptance=False):
    """Metropolis-Hastings with group-action random-walk proposals.

    Proposal generators are drawn sign-symmetrically, which together with
    the invariance of the volume measure under the group action makes the
    proposal symmetric; the acceptance ratio needs only the unnormalized
    density.
    """
    man = model.manifold
    cfg = config or MhConfig()
    rng = _as_rng(seed, stream)
    if init is None:
        if man.kind == "spd":
            x = np.eye(man.N)
        else:
            x = sample_uniform(man, 1, seed=rng)[0]
    else:
        x = man.validate(init)
    lp = model.logpdf(x)
    step = cfg.step_for(man)
    out = []
    total = cfg.burn_in + n * cfg.thin
    accepted = 0
    for it in range(total):
        prop = _mh_proposal(man, x, step, rng)
        prop = _drift_fix(man, prop)
        lp_prop = model.logpdf(prop)
        if np.log(rng.uniform()) < lp_prop - lp:
            x, lp = prop, lp_prop
            accepted += 1
        if it >= cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            out.append(x)
    arr = np.stack(out)
    arr.setflags(write=False)
    if return_acceptance:
        return arr, accepted / total
    return arr


def bartlett_dof_for(model_r, n_dim):
    """Bartlett dof matching the Wishart score model with parameter r.

    The model density is taken w.r.t. the affine-invariant volume, which
    shifts the determinant exponent: model r corresponds to the classical
    Wishart with dof = r - N + 1.
    """
    return model_r - n_dim + 1


def sample_wishart(v, dof, n, seed=0, stream=0):
    """Exact Wishart sampling via the Bartlett decomposition; E[X] = dof * V."""
    v = np.asarray(v, float)
    nd = v.shape[0]
    if dof <= nd - 1:
        raise DomainError(f"need dof > N - 1 = {nd - 1}")
    rng = _as_rng(seed, stream)
    l = np.linalg.cholesky(v)
    out = np.empty((n, nd, nd))
    for k in range(n):
        a = np.zeros((nd, nd))
        for i in range(nd):
            a[i, i] = np.sqrt(rng.chisquare(dof - i))
            for j in range(i):
                a[i, j] = rng.standard_normal()
        la = l @ a
        out[k] = la @ la.T
    out.setflags(write=False)
    return out


def sample_model(model, n, seed=0, stream=0, method=None, mh_config=None):
    """Dispatch: exact sampler when one exists, Metropolis-Hastings otherwise."""
    man = model.manifold
    method = method or _default_method(model)
    if method == "uniform":
        return sample_uniform(man, n, seed=seed, stream=stream)
    if method == "rejection":
        return sample_rejection_mf(model, n, seed=seed, stream=stream)
    if method == "wishart_exact":
        dof = bartlett_dof_for(model.r, man.N)
        if dof <= man.N - 1:
            raise DomainError(
                f"model r={model.r} maps to Bartlett dof {dof} <= N-1; use MH"
            )
        return sample_wishart(model.v, dof, n, seed=seed, stream=stream)
    if method == "mh":
        return sample_mh(model, n, config=mh_config, seed=seed, stream=stream)
    raise DomainError(f"unknown sampling method {method!r}")


def _default_method(model):
    if model.family == "uniform":
        return "uniform"
    if model.family == "matrix_fisher" and model.manifold.kind in ("stiefel", "grassmann"):
        return "rejection"
    if model.family == "wishart":
        return "wishart_exact"
    return "mh"
