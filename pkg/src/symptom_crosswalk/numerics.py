"""Small numeric helpers shared by the crosswalk and evaluation modules."""
from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)


class LinearFit(NamedTuple):
    coefficients: tuple[float, ...]
    intercept: float
    singular: bool


def fit_linear(X: np.ndarray, y: np.ndarray, context: str = "") -> LinearFit:
    """Least-squares fit of y on X with intercept.

    A zero-variance target or a rank-deficient design degrades to an
    intercept-only fit (zero coefficients, intercept = mean of y), which is
    reported via the log rather than raised.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if np.ptp(y) == 0.0:
        return LinearFit((0.0,) * p, float(y[0]) if n else 0.0, False)
    design = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(design) < p + 1:
        log.warning("singular design matrix%s; using intercept-only fit",
                    f" ({context})" if context else "")
        return LinearFit((0.0,) * p, float(y.mean()), True)
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    return LinearFit(tuple(float(b) for b in beta[1:]), float(beta[0]), False)


def round_half_down_clip(x: float) -> int:
    """Round to the nearest integer, halves toward lower severity, clip to 0..4."""
    return int(min(4, max(0, np.ceil(x - 0.5))))
