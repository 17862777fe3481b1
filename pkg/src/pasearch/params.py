"""Model-regime parameters shared by the search and analysis layers.

All logarithms are natural.  The slowly growing parameter, thresholds and
regime cutoffs are plain functions of (n, m) so that configurations stay
serializable and trials stay reproducible.
"""
from __future__ import annotations

import math


def default_omega(n: int) -> float:
    """Slowly growing parameter; log log n floored at 1."""
    if n < 3:
        return 1.0
    return max(1.0, math.log(math.log(n)))


def lambda0(n: int, m: int) -> float:
    """Small-block threshold 1/(log n)^(4/m)."""
    if n < 2:
        return 1.0
    return math.log(n) ** (-4.0 / m)


def n0(n: int, m: int, omega: float | None = None) -> float:
    """Upper index cutoff n/(omega (log n)^(2+4/m)) for the concentrated regime."""
    if n < 2:
        return float(n)
    w = default_omega(n) if omega is None else omega
    return n / (w * math.log(n) ** (2.0 + 4.0 / m))


def n1(n: int) -> float:
    """Upper index cutoff n/(log n)^5."""
    if n < 2:
        return float(n)
    return n / math.log(n) ** 5


def _powlog(n: int, exponent: float) -> float:
    lnn = math.log(n) if n > 1 else 0.0
    return lnn**exponent if lnn > 0 else 1.0


def start_degree_threshold(n: int, omega: float | None = None) -> float:
    w = default_omega(n) if omega is None else omega
    return w * _powlog(n, 2.5)


def climb_stop_threshold(n: int) -> float:
    return math.sqrt(n) / _powlog(n, 1.0 / 100.0)


def walk_restrict_threshold(n: int) -> float:
    return math.sqrt(n) / _powlog(n, 1.0 / 20.0)
