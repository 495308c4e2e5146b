"""Terminating Gauss hypergeometric series."""
from __future__ import annotations

import math


def hyp2f1_terminating(a: int, b: int, c: int, x: float) -> float:
    """2F1(a, b; c; x) when a or b is a non-positive integer, summed term by term.

    The lower parameter c must not hit a non-positive integer before the series stops.
    """
    stop = min((-v for v in (a, b) if v <= 0 and float(v).is_integer()), default=None)
    if stop is None:
        raise ValueError("series does not terminate: need a non-positive integer upper parameter")
    terms = []
    t = 1.0
    for k in range(int(stop) + 1):
        terms.append(t)
        if k == stop:
            break
        den = (c + k) * (k + 1)
        if den == 0:
            raise ZeroDivisionError("lower parameter reaches zero before termination")
        t *= (a + k) * (b + k) / den * x
    return math.fsum(terms)
