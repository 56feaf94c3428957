"""Asymptotic-variance and acceptance-rate estimation from chain traces.

Batch means is the estimator for both reversible and non-reversible chains
(initial-sequence estimators assume reversibility, the lifted chains are
non-reversible). The trace holds post-burn-in functional values only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainTrace",
    "VarianceEstimate",
    "batch_means_variance",
    "acceptance_rate",
    "standardize",
]

MIN_TRACE_LENGTH = 100


@dataclass
class ChainTrace:
    """Post-burn-in scalar functional values f(X_k) from one replicate."""

    values: np.ndarray
    accepted_count: int
    total_steps: int
    burn_in: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if not 0 <= self.accepted_count <= self.total_steps:
            raise ValueError(
                f"accepted_count {self.accepted_count} outside [0, total_steps={self.total_steps}]"
            )


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    standard_error: float


def batch_means_variance(trace: ChainTrace, batch_count: int | None = None) -> VarianceEstimate:
    """Batch-means estimate of T * Var[mean of the trace], with jackknife SE.

    The trace is split into ``batch_count`` batches (default floor(sqrt(T)));
    the estimate is batch_size times the sample variance of the batch means.
    The standard error is the delete-one-batch jackknife.

    Raises:
        ValueError: trace shorter than 100, or too few batches.
    """
    values = trace.values
    t = values.shape[0]
    if t < MIN_TRACE_LENGTH:
        raise ValueError(f"trace too short for batch means: {t} < {MIN_TRACE_LENGTH}")
    a = batch_count if batch_count is not None else math.isqrt(t)
    if a < 3:
        raise ValueError(f"need at least 3 batches, got {a}")
    b = t // a
    if b < 1:
        raise ValueError(f"batch count {a} exceeds trace length {t}")
    means = values[: a * b].reshape(a, b).mean(axis=1)
    # centering first makes the estimator exactly shift-invariant
    centered = means - means.mean()
    estimate = b * float(centered @ centered) / (a - 1)

    # delete-one-batch jackknife from the sufficient sums of the centered means
    s1 = centered.sum()
    s2 = float(centered @ centered)
    s1_del = s1 - centered
    s2_del = s2 - centered**2
    var_del = (s2_del - s1_del**2 / (a - 1)) / (a - 2)
    est_del = b * var_del
    se = math.sqrt(max(0.0, (a - 1) / a * float(((est_del - est_del.mean()) ** 2).sum())))
    return VarianceEstimate(value=estimate, standard_error=se)


def acceptance_rate(trace: ChainTrace) -> float:
    if trace.total_steps <= 0:
        raise ValueError("total_steps must be positive")
    return trace.accepted_count / trace.total_steps


def standardize(values: np.ndarray, mean: float, sd: float) -> np.ndarray:
    """(v - mean) / sd elementwise."""
    if sd <= 0.0:
        raise ValueError(f"standard deviation must be positive, got {sd}")
    return (np.asarray(values, dtype=float) - mean) / sd
