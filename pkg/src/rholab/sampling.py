"""Monte Carlo configuration and reproducible chain machinery.

Estimates are always split across independent chains whose generators are
spawned from the master seed in a fixed order; chain results are merged in
that order, so a given (config, grid) is bit-reproducible regardless of how
many threads execute the chains.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

EXPONENTIAL_IMPORTANCE = "exponential_importance"
METROPOLIS = "metropolis"

THREAD_ENV_VAR = "RHO_LAB_THREADS"


@dataclass(frozen=True)
class McConfig:
    sample_count: int
    seed: int
    proposal: str = EXPONENTIAL_IMPORTANCE
    step_size: float = 0.8
    burn_in: int = 500
    n_chains: int = 8

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.proposal not in (EXPONENTIAL_IMPORTANCE, METROPOLIS):
            raise ValueError(f"unknown proposal {self.proposal!r}")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")


def thread_count():
    raw = os.environ.get(THREAD_ENV_VAR, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n > 0 else 1


def chain_rngs(seed, n_chains):
    seqs = np.random.SeedSequence(seed).spawn(n_chains)
    return [np.random.default_rng(s) for s in seqs]


def run_chains(worker, config):
    """Run worker(rng, chain_samples) over independent chains.

    Returns the list of per-chain results in chain order.  Workers must be
    pure given their rng.  Thread count comes from RHO_LAB_THREADS; results
    are collected in submission order either way.
    """
    rngs = chain_rngs(config.seed, config.n_chains)
    per_chain = int(math.ceil(config.sample_count / config.n_chains))
    nthreads = thread_count()
    if nthreads == 1:
        return [worker(rng, per_chain) for rng in rngs]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        futures = [pool.submit(worker, rng, per_chain) for rng in rngs]
        return [f.result() for f in futures]


def combine_chain_means(chain_means):
    """Mean and standard error across independent chain estimates."""
    arr = np.asarray(chain_means, dtype=float)
    mean = arr.mean(axis=0)
    if arr.shape[0] < 2:
        return mean, np.full_like(mean, np.inf, dtype=float)
    stderr = arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0])
    return mean, stderr


# ---------------------------------------------------------------------------
# exponential importance proposal


def model_min_rate(model):
    """Slowest per-electron exponential decay rate of |psi|."""
    from . import wavefunctions as wf

    if isinstance(model, (wf.SeparableExponential, wf.OrthogonalMixedExponential)):
        return min(model.alphas)
    if isinstance(model, wf.Hydrogenic):
        return model.orbital.decay_rate
    if isinstance(model, wf.DeterminantProduct):
        return min(orb.decay_rate for group in model.groups for orb in group)
    raise TypeError(f"unknown model type {type(model).__name__}")


def proposal_rate(model, safety=0.9):
    """Per-electron proposal rate; slightly below the true slowest decay.

    The margin keeps the squared importance weights integrable even after
    an orthogonal mixing spreads a single slow direction across electrons
    (fine for the desk-scale N <= 4 handled here).
    """
    return safety * model_min_rate(model)


def sample_exponential_cloud(rng, count, n_electrons, rate):
    """Draw (count, n_electrons, 3) points from the proposal density.

    Each electron is independent with density q(x) = (rate^3/pi) e^{-2 rate |x|},
    i.e. radius ~ Gamma(3, 1/(2 rate)) and uniform direction.
    """
    r = rng.gamma(3.0, 1.0 / (2.0 * rate), size=(count, n_electrons))
    v = rng.standard_normal((count, n_electrons, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return r[..., None] * v


def exponential_cloud_logpdf(points, rate):
    """log q for the proposal above, summed over electrons."""
    r = np.linalg.norm(points, axis=-1)
    n_electrons = points.shape[-2]
    const = n_electrons * (3.0 * math.log(rate) - math.log(math.pi))
    return const - 2.0 * rate * np.sum(r, axis=-1)


# ---------------------------------------------------------------------------
# Metropolis walker targeting |psi|^2


def metropolis_samples(model, rng, count, step_size, burn_in, stride=1):
    """Random-walk Metropolis chain of electron configurations.

    Returns (count, N, 3) samples distributed (asymptotically) as
    |psi|^2 / ||psi||^2.  One sweep proposes a joint Gaussian move of all
    electrons.
    """
    from .wavefunctions import evaluate

    n = model.n_electrons
    x = sample_exponential_cloud(rng, 1, n, proposal_rate(model))[0]
    logp = 2.0 * np.log(np.abs(evaluate(model, x)) + 1e-300)
    out = np.empty((count, n, 3))
    total = burn_in + count * stride
    for step in range(total):
        prop = x + step_size * rng.standard_normal((n, 3))
        val = np.abs(evaluate(model, prop))
        logp_new = 2.0 * np.log(val + 1e-300)
        if math.log(rng.uniform()) < logp_new - logp:
            x, logp = prop, logp_new
        k = step - burn_in
        if k >= 0 and k % stride == 0:
            out[k // stride] = x
    return out
