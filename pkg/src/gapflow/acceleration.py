"""Sequence acceleration for alternating partial sums."""

from __future__ import annotations

import math
from typing import Sequence


def wynn_epsilon(partial_sums: Sequence[float]) -> tuple[float, float]:
    """Wynn's epsilon algorithm applied to a sequence of partial sums.

    Returns ``(estimate, error)``. The estimate is the last entry of the
    highest even column of the epsilon table; the error is its distance to
    the last entry of the previous even column, which is a usable (if
    conservative) indicator for alternating series with smooth terms.

    >>> import math
    >>> s = [sum((-1) ** (k + 1) / k for k in range(1, n + 1)) for n in range(1, 16)]
    >>> est, err = wynn_epsilon(s)
    >>> abs(est - math.log(2)) < 1e-10
    True
    """
    s = [float(v) for v in partial_sums]
    n = len(s)
    if n == 0:
        raise ValueError("need at least one partial sum")
    if n < 3:
        return s[-1], (abs(s[-1] - s[-2]) if n == 2 else math.inf)

    prev = [0.0] * (n + 1)  # column k-1
    cur = s[:]  # column k
    even_estimates = [s[-1]]
    for k in range(1, n):
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0.0:
                if k % 2 == 1:
                    # exact convergence in the current even column
                    return cur[i + 1], abs(cur[i + 1] - even_estimates[-1]) if len(even_estimates) > 1 else 0.0
                nxt.append(math.inf)
                continue
            nxt.append(prev[i + 1] + 1.0 / diff)
        if not nxt:
            break
        if k % 2 == 0:
            last = nxt[-1]
            if not math.isfinite(last):
                break
            even_estimates.append(last)
        prev, cur = cur, nxt

    best = even_estimates[-1]
    if len(even_estimates) >= 2:
        err = abs(best - even_estimates[-2])
    else:
        err = abs(s[-1] - s[-2])
    return best, err
