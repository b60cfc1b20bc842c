"""Independent reference computations used as test oracles.

Nothing here imports the package's numerical paths: entropies use mpmath,
joint tables are built by looping over states with plain Python.
"""

import math

import mpmath as mp

mp.mp.dps = 40


def entropy_mp(probs):
    """High-precision Shannon entropy in bits."""
    total = mp.mpf(0)
    for p in probs:
        p = mp.mpf(p)
        if p > 0:
            total -= p * mp.log(p, 2)
    return total


def int_partitions(n, largest=None):
    """Enumerate integer partitions of ``n`` as non-increasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in int_partitions(n - k, k):
            yield (k,) + rest


def set_partitions(items):
    """Enumerate all set partitions of ``items`` (lists of blocks)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def brute_joint(states, masses, m1, m2):
    """2x2 table [bin at m1][bin at m2] for the ideal sensor by direct looping."""
    table = [[0.0, 0.0], [0.0, 0.0]]
    for (x, y, r), w in zip(states, masses):
        a = 1 if (m1[0] - x) ** 2 + (m1[1] - y) ** 2 <= r * r else 0
        b = 1 if (m2[0] - x) ** 2 + (m2[1] - y) ** 2 <= r * r else 0
        table[a][b] += w
    return table


def entropy_float(probs):
    return -sum(p * math.log2(p) for p in probs if p > 0)
