"""
Seeded Gaussian test matrices.

Every generator draws from numpy's PCG64 bit generator with standard-normal
samples, so a seed fixes the matrix bit for bit on every platform. Trial
streams derive their seed from ``SeedSequence([seed, trial])``.
"""
import numpy as np

from src.core.dense import as_dense


def trial_rng(seed, trial=None):
    """PCG64 generator for ``seed``, or for trial ``trial`` of an experiment seeded with ``seed``."""
    entropy = [int(seed)] if trial is None else [int(seed), int(trial)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def gaussian(m, n, seed, trial=None):
    """
    ``m`` x ``n`` matrix of independent standard normal entries.

    :param seed: Experiment seed.
    :param trial: Optional trial index; distinct trials get independent streams.
    """
    if m < 1 or n < 1:
        raise ValueError(f"Matrix dimensions must be positive, got {m}x{n}")
    return as_dense(trial_rng(seed, trial).standard_normal((m, n)))


def lowrank_gaussian(m, n, rank, seed, trial=None):
    """Product of ``m x rank`` and ``rank x n`` Gaussian factors: a matrix of exact rank ``rank``."""
    rng = trial_rng(seed, trial)
    left = rng.standard_normal((m, rank))
    right = rng.standard_normal((rank, n))
    return as_dense(left @ right)
