"""Monte Carlo for the velocity-jump process behind the BGK equation.

A particle moves ballistically and, at the times of a Poisson clock of rate
``1/eps``, redraws its velocity from ``Normal(0, eps)``. The ensemble is split
into blocks of ``BLOCK_SIZE`` particles; block ``k`` draws from the stream
``SeedSequence(seed, spawn_key=(k,))``, so the output depends only on the
seed and the particle count, never on the number of worker threads.
"""
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .closed_form import mu_values
from .exceptions import InsufficientSamplesWarning, InvalidParameterError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
#: bins holding fewer samples than this are left out of the rate estimate
MIN_BIN_COUNT = 10


@dataclass(frozen=True)
class SimConfig:
    """Parameters of an ensemble.

    ``w0 = None`` draws every initial velocity from the equilibrium
    ``Normal(0, eps)``; a number starts all particles at that velocity.
    """

    epsilon: float
    t_final: float
    n_particles: int
    w0: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        if not self.t_final > 0:
            raise InvalidParameterError("final time must be positive")
        if self.n_particles < 1:
            raise InvalidParameterError("need at least one particle")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")

    @property
    def n_blocks(self):
        return -(-self.n_particles // BLOCK_SIZE)

    def block_size(self, block):
        return min(BLOCK_SIZE, self.n_particles - block * BLOCK_SIZE)

    def generator(self, block):
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(block,)))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Final positions, velocities and jump counts of an ensemble."""

    x: np.ndarray
    v: np.ndarray
    jumps: np.ndarray

    def __post_init__(self):
        if not len(self.x) == len(self.v) == len(self.jumps):
            raise InvalidParameterError("sample arrays must have equal lengths")

    def __len__(self):
        return len(self.x)


def _simulate_block(config, block):
    rng = config.generator(block)
    n = config.block_size(block)
    sd = math.sqrt(config.epsilon)
    if config.w0 is None:
        v = rng.normal(0.0, sd, n)
    else:
        v = np.full(n, float(config.w0))
    x = np.zeros(n)
    jumps = np.zeros(n, dtype=np.int64)
    remaining = np.full(n, float(config.t_final))
    active = np.arange(n)
    while active.size:
        wait = rng.exponential(config.epsilon, active.size)
        left = remaining[active]
        flight = np.minimum(wait, left)
        x[active] += v[active] * flight
        remaining[active] = left - flight
        active = active[wait < left]
        v[active] = rng.normal(0.0, sd, active.size)
        jumps[active] += 1
    return x, v, jumps


def simulate(config, threads=None):
    """Run the whole ensemble.

    Args:
        config (SimConfig): Ensemble parameters.
        threads (int, optional): Worker threads; ``None`` lets the executor
            decide. The result does not depend on it.

    Returns:
        SampleSet: One entry per particle, in index order.
    """
    if threads is not None and threads < 1:
        raise InvalidParameterError("threads must be at least 1")
    blocks = range(config.n_blocks)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda b: _simulate_block(config, b), blocks))
    x, v, jumps = (np.concatenate(p) for p in zip(*parts))
    logger.info(
        "simulated %d particles in %d blocks, %d jumps",
        config.n_particles,
        config.n_blocks,
        int(jumps.sum()),
    )
    return SampleSet(x, v, jumps)


def simulate_path(config, index):
    """Final ``(x, v, jumps)`` of particle ``index``, identical to its entry in :func:`simulate`."""
    if not 0 <= index < config.n_particles:
        raise InvalidParameterError(
            "particle index {} outside [0, {})".format(index, config.n_particles)
        )
    block, offset = divmod(index, BLOCK_SIZE)
    x, v, jumps = _simulate_block(config, block)
    return float(x[offset]), float(v[offset]), int(jumps[offset])


def variance_oracle(epsilon, t):
    """Variance of the final position for equilibrium velocities.

    The stationary velocity has autocovariance ``eps exp(-|s - u|/eps)``;
    integrating it twice over ``[0, t]`` gives
    ``2 eps^2 t - 2 eps^3 (1 - exp(-t/eps))``.

    Example:
        >>> round(variance_oracle(1.0, 1.0), 6)
        0.735759
    """
    return 2.0 * epsilon ** 2 * t + 2.0 * epsilon ** 3 * math.expm1(-t / epsilon)


def _within(observed, expected, se, k=3.0):
    return bool(abs(observed - expected) <= k * se)


def moment_report(samples, config):
    """Mean and variance of the final positions against their exact values.

    The mean should vanish by symmetry; the variance is compared with
    :func:`variance_oracle`, which assumes equilibrium initial velocities.
    Standard errors use the sample fourth moment.
    """
    x = samples.x
    n = len(x)
    mean = float(x.mean())
    var = float(x.var())
    se_mean = math.sqrt(var / n)
    m4 = float(np.mean((x - mean) ** 4))
    se_var = math.sqrt(max(m4 - var * var, 0.0) / n)
    oracle = variance_oracle(config.epsilon, config.t_final)
    return dict(
        n=n,
        mean=mean,
        se_mean=se_mean,
        mean_ok=_within(mean, 0.0, se_mean),
        variance=var,
        se_variance=se_var,
        variance_oracle=oracle,
        variance_ok=_within(var, oracle, se_var),
    )


def ks_report(samples, epsilon, alpha=0.01):
    """Kolmogorov-Smirnov test of the final velocities against ``Normal(0, eps)``."""
    result = stats.kstest(samples.v / math.sqrt(epsilon), "norm")
    return dict(
        statistic=float(result.statistic),
        pvalue=float(result.pvalue),
        alpha=alpha,
        ok=bool(result.pvalue > alpha),
    )


def jump_count_check(samples, config):
    """Compare the jump counts with a Poisson law of mean ``t/eps``.

    Returns:
        dict: Mean and variance of the counts, their expected value, standard
        errors and the two ``ok`` flags (both within three standard errors).
    """
    lam = config.t_final / config.epsilon
    counts = samples.jumps.astype(float)
    n = len(counts)
    mean = float(counts.mean())
    var = float(counts.var())
    se_mean = math.sqrt(lam / n)
    se_var = math.sqrt((lam + 2.0 * lam * lam) / n)
    return dict(
        expected=lam,
        mean=mean,
        se_mean=se_mean,
        mean_ok=_within(mean, lam, se_mean),
        variance=var,
        se_variance=se_var,
        variance_ok=_within(var, lam, se_var),
    )


@dataclass(frozen=True, eq=False)
class RateTable:
    """Empirical ``-eps log density`` per retained histogram bin."""

    centers: np.ndarray
    rates: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    suppressed: int


def empirical_rate(samples, epsilon, bin_width, min_count=MIN_BIN_COUNT):
    """Histogram estimate of the rate function of the final positions.

    Bins are aligned on multiples of ``bin_width`` so that 0 sits in the
    middle of a bin. Bins with fewer than ``min_count`` samples are dropped,
    not zero-filled.

    Args:
        samples (SampleSet): The ensemble.
        epsilon (float): Scale of the logarithm.
        bin_width (float): Histogram bin width, positive.
        min_count (int, optional): Smallest count kept. Defaults to 10.

    Returns:
        RateTable: Centers, rates ``-eps log(count/(n bin_width))`` and counts.

    Warns:
        InsufficientSamplesWarning: When bins holding samples were dropped.
    """
    if not bin_width > 0:
        raise InvalidParameterError("bin width must be positive")
    x = samples.x
    n = len(x)
    lo = math.floor(x.min() / bin_width - 0.5)
    hi = math.ceil(x.max() / bin_width + 0.5)
    edges = (np.arange(lo, hi + 1) + 0.5) * bin_width
    counts, edges = np.histogram(x, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    keep = counts >= min_count
    dropped = int(np.count_nonzero((counts > 0) & ~keep))
    if dropped:
        warnings.warn(
            "pdmp: {} bins with fewer than {} samples suppressed".format(dropped, min_count),
            InsufficientSamplesWarning,
        )
    density = counts[keep] / (n * bin_width)
    return RateTable(
        centers=centers[keep],
        rates=-epsilon * np.log(density),
        counts=counts[keep],
        density=density,
        suppressed=dropped,
    )


def rate_comparison(table, epsilon, t, w=0.0, rtol=0.2, min_density=1e-4):
    """Set the empirical rate beside ``mu(t, x; w)``.

    The empirical rate is shifted so that its smallest value is 0, which
    removes the normalising constant of the density. Only bins with density
    at least ``min_density`` and ``mu`` above ``2 eps`` are scored; closer to
    the centre the ``O(eps)`` prefactor dominates. This is a diagnostic and
    never raises.

    Returns:
        dict: Per-bin rows and the median relative error with its ``ok`` flag.
    """
    shifted = table.rates - table.rates.min()
    exact, _ = mu_values(t, table.centers, w)
    rows = []
    errors = []
    for c, emp, ex, dens in zip(table.centers, shifted, exact, table.density):
        scored = bool(dens >= min_density and ex > 2 * epsilon and np.isfinite(ex))
        rel = float(abs(emp - ex) / ex) if scored else math.nan
        if scored:
            errors.append(rel)
        rows.append(dict(x=float(c), empirical=float(emp), exact=float(ex), rel_error=rel))
    median = float(np.median(errors)) if errors else math.nan
    return dict(rows=rows, median_rel_error=median, rtol=rtol, ok=bool(errors) and median <= rtol)
