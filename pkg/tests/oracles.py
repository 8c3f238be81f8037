"""Independent brute-force references used to check engine operations.

Everything here recomputes results from first principles (exact rational
arithmetic, explicit loops) without touching the engine's conversion code.
"""
from fractions import Fraction
from itertools import combinations_with_replacement

GRID_STEP = Fraction(1, 20)  # 0.05


def grid_threshold_tuples():
    """All monotone 4-tuples over the 0.05 grid, as floats (10626 tuples)."""
    levels = [i / 20 for i in range(21)]
    return list(combinations_with_replacement(levels, 4))


def _exact(th):
    return [Fraction(round(c * 20), 20) for c in th]


def _edges(th):
    return [Fraction(0)] + _exact(th) + [Fraction(1)]


def oracle_distribution(s, src, dst):
    """Exact outcome distribution by explicit interval intersection."""
    se = _edges(src)
    de = _edges(dst)
    lo, hi = se[s], se[s + 1]
    if lo == hi:
        point = lo
        if point == Fraction(1):
            return {4: Fraction(1)}
        for t in range(5):
            if de[t] <= point < de[t + 1]:
                return {t: Fraction(1)}
        raise AssertionError("point not located in any target bin")
    weights = {}
    for t in range(5):
        w = min(hi, de[t + 1]) - max(lo, de[t])
        if w > 0:
            weights[t] = w
    total = sum(weights.values())
    return {t: w / total for t, w in weights.items()}


def oracle_deterministic(s, src, dst):
    """Maximal-overlap outcome, ties to the lower score (exact arithmetic)."""
    dist = oracle_distribution(s, src, dst)
    best = max(dist.values())
    return min(t for t, w in dist.items() if w == best)


def counting_thresholds(scores):
    """Calibration thresholds recomputed by direct counting."""
    n = len(scores)
    return tuple(sum(1 for v in scores if v <= k) / n for k in range(4))
