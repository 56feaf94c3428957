"""Balancing functions used in all acceptance probabilities.

A balancing function phi maps (0, inf) -> [0, 1] and satisfies the functional
equation phi(r) = r * phi(1/r). The two built-ins are the Metropolis choice
min(1, r) and Barker's r / (1 + r). The functional equation forces a list of
structural properties (monotonicity, phi(ab) >= phi(a)phi(b), ...) which
``check_balancing_properties`` turns into a numeric report, usable both on the
built-ins and on deliberately broken candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BalancingFunction",
    "METROPOLIS",
    "BARKER",
    "metropolis_phi",
    "barker_phi",
    "PropertyCheck",
    "BalancingPropertyReport",
    "check_balancing_properties",
]

#: relative tolerance for the functional equation phi(r) = r phi(1/r);
#: both built-ins satisfy it to machine precision, this leaves headroom.
FUNCTIONAL_EQ_RTOL = 1e-12


def _validate_ratio(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r <= 0.0:
        raise ValueError(f"balancing functions are defined on positive finite ratios, got {r!r}")
    return r


def metropolis_phi(r: float) -> float:
    """Usual acceptance function min(1, r)."""
    return min(1.0, _validate_ratio(r))


def barker_phi(r: float) -> float:
    """Barker's acceptance function r / (1 + r), evaluated stably for large r."""
    r = _validate_ratio(r)
    if r > 1.0:
        return 1.0 / (1.0 + 1.0 / r)
    return r / (1.0 + r)


@dataclass(frozen=True)
class BalancingFunction:
    """A named balancing function.

    ``kind`` is one of ``"metropolis"`` or ``"barker"`` for the built-ins;
    custom functions may use any label. Calling the object evaluates phi(r).
    ``accept_from_log`` evaluates phi(exp(log_r)) without overflowing for
    extreme log ratios; it accepts a scalar or an ndarray of log ratios and is
    the form used in the samplers (ratios are carried in log space and
    exponentiated once).
    """

    kind: str
    fn: Callable[[float], float]

    def __call__(self, r: float) -> float:
        return self.fn(r)

    def accept_from_log(self, log_r):
        if isinstance(log_r, np.ndarray):
            if self.kind == "metropolis":
                return np.exp(np.minimum(log_r, 0.0))
            if self.kind == "barker":
                from scipy.special import expit

                return expit(log_r)
            r = np.exp(np.clip(log_r, -700.0, 700.0))
            return np.clip(np.vectorize(self.fn)(r), 0.0, 1.0)
        lr = float(log_r)
        if self.kind == "metropolis":
            return 1.0 if lr >= 0.0 else math.exp(lr)
        if self.kind == "barker":
            if lr >= 0.0:
                return 1.0 / (1.0 + math.exp(-lr)) if lr < 40.0 else 1.0
            return math.exp(lr) / (1.0 + math.exp(lr)) if lr > -700.0 else 0.0
        a = self.fn(math.exp(min(max(lr, -700.0), 700.0)))
        return min(1.0, max(0.0, a))


METROPOLIS = BalancingFunction("metropolis", metropolis_phi)
BARKER = BalancingFunction("barker", barker_phi)


@dataclass(frozen=True)
class PropertyCheck:
    passed: bool
    worst_violation: float


@dataclass(frozen=True)
class BalancingPropertyReport:
    """Per-property pass/fail with the worst observed violation magnitude."""

    functional_equation: PropertyCheck
    non_decreasing: PropertyCheck
    supermultiplicative: PropertyCheck
    scaling_lower_bound: PropertyCheck
    vanishes_at_zero: PropertyCheck

    def all_pass(self) -> bool:
        return all(
            check.passed
            for check in (
                self.functional_equation,
                self.non_decreasing,
                self.supermultiplicative,
                self.scaling_lower_bound,
                self.vanishes_at_zero,
            )
        )


def log_grid(lo: float = 1e-6, hi: float = 1e6, count: int = 121) -> np.ndarray:
    """Logarithmically spaced evaluation grid; the functional equation couples r with 1/r."""
    return np.logspace(math.log10(lo), math.log10(hi), count)


def check_balancing_properties(
    phi: Callable[[float], float],
    grid: Sequence[float],
    rtol: float = FUNCTIONAL_EQ_RTOL,
) -> BalancingPropertyReport:
    """Evaluate the structural properties of a candidate balancing function on a grid.

    Checked, over all grid points a and b:

    1. phi(r) = r * phi(1/r), relative to max(1, phi(r));
    2. phi is non-decreasing along the sorted grid;
    3. phi(a*b) >= phi(a) * phi(b);
    4. phi(a*b) >= b * phi(a) whenever b <= 1;
    5. phi(r) <= r at the grid minimum (so phi(r) -> 0 as r -> 0).

    The pairwise checks cost O(len(grid)^2) evaluations.

    Raises:
        ValueError: empty grid, or non-positive/non-finite grid entries.
    """
    pts = np.asarray(list(grid), dtype=float)
    if pts.size == 0:
        raise ValueError("property-check grid must be non-empty")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0.0):
        raise ValueError("property-check grid entries must be positive and finite")
    pts = np.sort(pts)

    vals = np.array([phi(r) for r in pts], dtype=float)

    # (1) functional equation
    recip_vals = np.array([phi(1.0 / r) for r in pts], dtype=float)
    eq_violation = np.abs(vals - pts * recip_vals) / np.maximum(1.0, np.abs(vals))
    functional_equation = PropertyCheck(bool(eq_violation.max() <= rtol), float(eq_violation.max()))

    # (2) monotone non-decreasing on the sorted grid
    drops = vals[:-1] - vals[1:]
    worst_drop = float(drops.max()) if drops.size else 0.0
    non_decreasing = PropertyCheck(worst_drop <= rtol, max(worst_drop, 0.0))

    # (3) and (4) pairwise lower bounds
    prod_vals = np.array([[phi(a * b) for b in pts] for a in pts], dtype=float)
    super_gap = np.outer(vals, vals) - prod_vals
    supermultiplicative = PropertyCheck(bool(super_gap.max() <= rtol), float(max(super_gap.max(), 0.0)))

    small = pts <= 1.0
    scale_gap = np.outer(vals, pts[small]) - prod_vals[:, small]
    scaling_lower_bound = PropertyCheck(bool(scale_gap.max() <= rtol), float(max(scale_gap.max(), 0.0)))

    # (5) phi(r) <= r at the grid minimum
    zero_gap = float(vals[0] - pts[0])
    vanishes_at_zero = PropertyCheck(zero_gap <= rtol * max(1.0, pts[0]), max(zero_gap, 0.0))

    return BalancingPropertyReport(
        functional_equation=functional_equation,
        non_decreasing=non_decreasing,
        supermultiplicative=supermultiplicative,
        scaling_lower_bound=scaling_lower_bound,
        vanishes_at_zero=vanishes_at_zero,
    )
