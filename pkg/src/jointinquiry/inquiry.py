"""Entropy, partition coarsening and question relevance.

A *question* is represented by a partition of the state indices. Its
relevance to the central issue (the all-singletons partition) is the
entropy of the coarsened distribution divided by the entropy of the full
distribution.
"""

import numpy as np
from scipy.special import xlogy

from .exceptions import UndefinedRelevanceError, ValidationError

__all__ = [
    "check_distribution",
    "check_partition",
    "shannon_entropy",
    "coarsen",
    "relevance",
    "singleton_partition",
    "partition_count",
    "PARTITION_COUNT_BOUND",
]

PROB_ATOL = 1e-9
PARTITION_COUNT_BOUND = 200


def check_distribution(probs, atol=PROB_ATOL):
    """Validate a probability vector and return it as a float array."""
    d = np.asarray(probs, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValidationError("distribution must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(d)):
        raise ValidationError("distribution contains non-finite entries")
    if np.any(d < 0):
        raise ValidationError("distribution has a negative entry")
    total = d.sum()
    if abs(total - 1.0) > atol:
        raise ValidationError(f"distribution sums to {total!r}, not 1")
    return d


def check_partition(blocks, n):
    """Validate ``blocks`` as a partition of ``range(n)``.

    Returns the blocks as a list of integer arrays.
    """
    out = []
    seen = set()
    for block in blocks:
        idx = [int(i) for i in block]
        if not idx:
            raise ValidationError("partition has an empty block")
        for i in idx:
            if i < 0 or i >= n:
                raise ValidationError(f"partition index {i} outside range(0, {n})")
            if i in seen:
                raise ValidationError(f"partition index {i} appears in two blocks")
            seen.add(i)
        out.append(np.asarray(idx, dtype=np.intp))
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise ValidationError(f"partition does not cover indices {missing}")
    return out


def singleton_partition(n):
    """The finest partition of ``range(n)``, i.e. the central issue."""
    return [[i] for i in range(n)]


def _entropy_bits(d):
    # 0 log 0 == 0 via xlogy
    h = -xlogy(d, d).sum() / np.log(2.0)
    return max(float(h), 0.0)


def shannon_entropy(probs):
    """Shannon entropy of ``probs`` in bits.

    >>> shannon_entropy([0.5, 0.5])
    1.0
    """
    return _entropy_bits(check_distribution(probs))


def coarsen(probs, blocks):
    """Sum the probabilities inside each block of a partition."""
    d = check_distribution(probs)
    parts = check_partition(blocks, d.size)
    return np.array([d[b].sum() for b in parts])


def relevance(probs, blocks):
    """Degree to which the partition question ``blocks`` answers the central issue.

    Parameters
    ----------
    probs : array_like
        Probability of each state.
    blocks : sequence of sequences of int
        Partition of the state indices (0-based).

    Returns
    -------
    float
        ``H(coarsen(probs, blocks)) / H(probs)``, in ``[0, 1]``.

    Raises
    ------
    UndefinedRelevanceError
        If ``probs`` has zero entropy, so the normalisation is undefined.
    """
    d = check_distribution(probs)
    base = _entropy_bits(d)
    if base <= 0.0:
        raise UndefinedRelevanceError(
            "relevance is undefined for a distribution with zero entropy"
        )
    parts = check_partition(blocks, d.size)
    if len(parts) == d.size:
        return 1.0
    coarse = np.array([d[b].sum() for b in parts])
    return min(_entropy_bits(coarse) / base, 1.0)


def partition_count(n, bound=PARTITION_COUNT_BOUND):
    """Number of integer partitions of ``n``.

    Coefficient of ``x**n`` in ``prod_k 1/(1 - x**k)``, evaluated exactly
    with Euler's pentagonal-number recurrence.
    """
    n = int(n)
    if n < 0:
        raise ValidationError("partition_count needs a non-negative integer")
    if n > bound:
        raise ValidationError(f"n={n} exceeds the configured bound {bound}")
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]
