"""One-dimensional continuous-state machinery.

The gradient-skewed Barker proposal on the real line has density

    Q(x, y) = 2 phi_sigma(y - x) / (1 + exp(-(y - x) grad(x))),

where phi_sigma is the centered normal density of scale sigma and grad is the
gradient of the log target. The half-line direction split N_{-1}(x) = {y < x},
N_{+1}(x) = {y > x} gives directional masses

    c_{+1}(x) = integral_0^inf 2 phi_sigma(z) sigmoid(z grad(x)) dz = C(sigma * grad(x)),

a one-argument function computed by adaptive quadrature (and cached in a
spline table for the samplers; the quadrature path is the reference the table
is tested against). The symmetric random walk with the same split is the
guided walk: masses are exactly 1/2 and the directional acceptance ratio
collapses to the plain one.

Also here: the two-kernel tail-probability probe with unrelated half-line
kernels N(x, sigma^2) / N(x, 1/sigma^2), whose set-probability ratio
P_rev(0, B_k) / P_MH(0, B_k) falls below any positive constant as the tail
set B_k = {|y| > k} recedes, so no Peskun-type ordering can exist for
arbitrary direction kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .kernels import Direction, DirectionalProposal

__all__ = [
    "Target1D",
    "standard_normal_target",
    "QuadratureError",
    "barker_density",
    "log_barker_density",
    "barker_sample",
    "half_gaussian_sigmoid_mass",
    "directional_mass",
    "sample_conditional_halfline",
    "BarkerDirectionalProposal",
    "GuidedWalkProposal",
    "guided_walk_proposal",
    "CounterexampleProbe",
    "counterexample_probe",
    "counterexample_scan",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_QUAD_CUTOFF = 12.0  # integration window in standardized units, tail bound appended
_MASS_TOL = 1e-10

MAX_REJECTION_TRIALS = 10**6


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class Target1D:
    """Unnormalized log density on the real line and its gradient."""

    log_density: Callable[[float], float]
    gradient: Callable[[float], float]


def standard_normal_target() -> Target1D:
    return Target1D(log_density=lambda x: -0.5 * x * x, gradient=lambda x: -x)


def _log1pexp(a: float) -> float:
    if a > 35.0:
        return a
    if a < -35.0:
        return math.exp(a)
    return math.log1p(math.exp(a))


def _sigmoid(a: float) -> float:
    if a >= 0.0:
        return 1.0 / (1.0 + math.exp(-a)) if a < 40.0 else 1.0
    return math.exp(a) / (1.0 + math.exp(a)) if a > -700.0 else 0.0


def _log_normal_pdf(z: float, sigma: float) -> float:
    return -0.5 * (z / sigma) ** 2 - math.log(sigma) - _LOG_SQRT_2PI


def _normal_upper_tail(u: float) -> float:
    return 0.5 * math.erfc(u / math.sqrt(2.0))


def log_barker_density(x: float, y: float, sigma: float, target: Target1D) -> float:
    """log Q(x, y) of the gradient-skewed proposal, evaluated in log space."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = y - x
    return math.log(2.0) + _log_normal_pdf(d, sigma) - _log1pexp(-d * target.gradient(x))


def barker_density(x: float, y: float, sigma: float, target: Target1D) -> float:
    """Q(x, y) = 2 phi_sigma(y - x) sigmoid((y - x) grad(x))."""
    return math.exp(log_barker_density(x, y, sigma, target))


def barker_sample(x: float, sigma: float, target: Target1D, rng: np.random.Generator) -> float:
    """Draw y ~ Q(x, .): z ~ N(0, sigma^2), keep the sign with probability
    sigmoid(z grad(x)), flip it otherwise. The induced density is exactly
    ``barker_density``."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = sigma * rng.standard_normal()
    b = 1.0 if rng.random() < _sigmoid(z * target.gradient(x)) else -1.0
    return x + b * z


def half_gaussian_sigmoid_mass(t: float, tol: float = _MASS_TOL) -> float:
    """C(t) = integral_0^inf 2 phi(u) sigmoid(u t) du for a standard normal phi.

    The up-direction mass of the Barker proposal is C(sigma * grad(x)).
    Adaptive quadrature on (0, 12] with the analytic Gaussian tail bound
    appended; for large |t| the interval is split at the sigmoid transition
    scale so the boundary layer near 0 is not missed.
    """
    if t == 0.0:
        return 0.5

    def integrand(u: float) -> float:
        return 2.0 * math.exp(-0.5 * u * u - _LOG_SQRT_2PI) * _sigmoid(u * t)

    pieces = [(0.0, _QUAD_CUTOFF)]
    at = abs(t)
    if at > 1.0:
        cut = min(_QUAD_CUTOFF / 2.0, 30.0 / at)
        pieces = [(0.0, cut), (cut, _QUAD_CUTOFF)]
    total, err_total = 0.0, 0.0
    for lo, hi in pieces:
        val, err = quad(integrand, lo, hi, epsabs=tol / 4.0, epsrel=0.0, limit=200)
        total += val
        err_total += err
    if err_total > tol:
        raise QuadratureError(f"directional-mass quadrature achieved only {err_total:.2e} > {tol:.2e}")
    # everything beyond the window is bounded by the Gaussian tail
    total += 2.0 * _normal_upper_tail(_QUAD_CUTOFF) * _sigmoid(_QUAD_CUTOFF * t)
    return min(1.0, max(0.0, total))


def directional_mass(x: float, nu: Direction, sigma: float, target: Target1D, tol: float = _MASS_TOL) -> float:
    """c_nu(x) of the Barker proposal with the half-line split.

    c_{+1} is computed by quadrature, c_{-1} as its complement.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    c_up = half_gaussian_sigmoid_mass(sigma * target.gradient(x), tol=tol)
    return c_up if nu == 1 else 1.0 - c_up


def sample_conditional_halfline(
    x: float,
    nu: Direction,
    sigma: float,
    target: Target1D,
    rng: np.random.Generator,
    max_trials: int = MAX_REJECTION_TRIALS,
) -> float:
    """Exact draw from Q_nu(x, .) by rejection with the half-normal envelope.

    A half-normal displacement |z| is kept with probability
    sigmoid(nu z grad(x)) (always <= 1), so the expected acceptance equals
    c_nu(x).
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    g = target.gradient(x)
    for _ in range(max_trials):
        z = sigma * abs(rng.standard_normal())
        if rng.random() < _sigmoid(nu * z * g):
            return x + nu * z
    raise RuntimeError(f"conditional rejection sampler exhausted {max_trials} trials")


class _MassTable:
    """Cubic-spline table of C(t) on |t| <= 64, built lazily from quadrature.

    One table serves every sigma and target since the mass depends on
    sigma * grad(x) only. Inputs beyond the table fall back to quadrature.
    The cubic pieces are evaluated directly from the stored coefficients;
    going through the scipy spline object costs microseconds per call, which
    the samplers cannot afford.
    """

    SPAN = 64.0
    NODES = 2049

    def __init__(self) -> None:
        self._coef = None
        self._inv_h = (self.NODES - 1) / self.SPAN

    def _build(self) -> None:
        from scipy.interpolate import CubicSpline

        ts = np.linspace(0.0, self.SPAN, self.NODES)
        vals = np.array([half_gaussian_sigmoid_mass(float(t), tol=1e-11) for t in ts])
        coef = CubicSpline(ts, vals).c  # (4, NODES - 1)
        self._coef = [tuple(float(v) for v in coef[:, j]) for j in range(self.NODES - 1)]

    def up_mass(self, t: float) -> float:
        if self._coef is None:
            self._build()
        at = abs(t)
        if at > self.SPAN:
            return half_gaussian_sigmoid_mass(t)
        j = int(at * self._inv_h)
        if j >= self.NODES - 1:
            j = self.NODES - 2
        u = at - j / self._inv_h
        c0, c1, c2, c3 = self._coef[j]
        c = ((c0 * u + c1) * u + c2) * u + c3
        c = min(1.0, max(0.0, c))
        return c if t >= 0.0 else 1.0 - c


_MASS_TABLE = _MassTable()


class BarkerDirectionalProposal(DirectionalProposal[float]):
    """Gradient-skewed Barker proposal with the half-line direction split.

    ``mass_mode="spline"`` (default) reads directional masses from the shared
    spline table; ``"quad"`` recomputes them by adaptive quadrature on every
    call.
    """

    def __init__(self, sigma: float, target: Target1D, mass_mode: str = "spline"):
        if sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        if mass_mode not in ("spline", "quad"):
            raise ValueError(f"unknown mass_mode {mass_mode!r}")
        self.sigma = sigma
        self.target = target
        self.mass_mode = mass_mode
        # one-slot per-chain memo: chains query the same state repeatedly
        self._mass_at: Optional[float] = None
        self._mass_up = 0.5

    def initial_state(self, rng: np.random.Generator) -> float:
        return float(rng.standard_normal())

    def direction_of(self, x: float, y: float) -> Optional[Direction]:
        if y > x:
            return 1
        if y < x:
            return -1
        return None

    def mass(self, x: float, nu: Direction) -> float:
        if x != self._mass_at:
            t = self.sigma * self.target.gradient(x)
            if self.mass_mode == "spline":
                self._mass_up = _MASS_TABLE.up_mass(t)
            else:
                self._mass_up = half_gaussian_sigmoid_mass(t)
            self._mass_at = x
        return self._mass_up if nu == 1 else 1.0 - self._mass_up

    def sample_conditional(self, x: float, nu: Direction, rng: np.random.Generator) -> float:
        return sample_conditional_halfline(x, nu, self.sigma, self.target, rng)

    def sample_unconditional(self, x: float, rng: np.random.Generator) -> float:
        return barker_sample(x, self.sigma, self.target, rng)

    def log_ratio(self, x: float, y: float) -> float:
        # the symmetric phi_sigma factors of the two proposal densities cancel
        d = y - x
        t = self.target
        return (
            t.log_density(y)
            - t.log_density(x)
            + _log1pexp(-d * t.gradient(x))
            - _log1pexp(d * t.gradient(y))
        )


class GuidedWalkProposal(DirectionalProposal[float]):
    """Symmetric normal random walk with the half-line split: perfect balance,
    masses identically 1/2, directional ratio equal to the plain MH ratio."""

    def __init__(self, sigma: float, target: Target1D):
        if sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.sigma = sigma
        self.target = target

    def initial_state(self, rng: np.random.Generator) -> float:
        return float(rng.standard_normal())

    def direction_of(self, x: float, y: float) -> Optional[Direction]:
        if y > x:
            return 1
        if y < x:
            return -1
        return None

    def mass(self, x: float, nu: Direction) -> float:
        return 0.5

    def sample_conditional(self, x: float, nu: Direction, rng: np.random.Generator) -> float:
        return x + nu * self.sigma * abs(rng.standard_normal())

    def sample_unconditional(self, x: float, rng: np.random.Generator) -> float:
        return x + self.sigma * rng.standard_normal()

    def log_ratio(self, x: float, y: float) -> float:
        return self.target.log_density(y) - self.target.log_density(x)


def guided_walk_proposal(sigma: float, target: Optional[Target1D] = None) -> GuidedWalkProposal:
    return GuidedWalkProposal(sigma, standard_normal_target() if target is None else target)


# tail-probability probe ------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleProbe:
    """Tail probabilities P_rev(0, B_k) and P_MH(0, B_k) for B_k = {|y| > k}."""

    k: float
    p_rev: float
    p_mh: float

    @property
    def ratio(self) -> float:
        return self.p_rev / self.p_mh


def counterexample_probe(sigma: float, k: float, epsabs: float = 1e-12) -> CounterexampleProbe:
    """Evaluate both tail set probabilities at x = 0 by adaptive quadrature.

    The two directional kernels are N(x, sigma^2) and N(x, 1/sigma^2), not a
    split of one proposal; sigma must satisfy sigma in (0, 1) and
    1/sigma^2 - sigma^2 - 1 > 0 so the up-kernel cross-ratio diverges in the
    tails. The standard-normal target makes the MH acceptance exp(-y^2/2) by
    symmetry of the mixture.
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    gap = 1.0 / sigma**2 - sigma**2 - 1.0
    if gap <= 0.0:
        raise ValueError(f"need 1/sigma^2 - sigma^2 - 1 > 0, got {gap} at sigma={sigma}")
    if k < 0.0:
        raise ValueError(f"k must be nonnegative, got {k}")

    def pdf(y: float, s: float) -> float:
        return math.exp(-0.5 * (y / s) ** 2 - math.log(s) - _LOG_SQRT_2PI)

    def accept_log(log_a: float) -> float:
        return 1.0 if log_a >= 0.0 else math.exp(log_a)

    log_sig2 = 2.0 * math.log(sigma)

    def mh_integrand(y: float) -> float:
        return (0.5 * pdf(y, sigma) + 0.5 * pdf(y, 1.0 / sigma)) * math.exp(-0.5 * y * y)

    def rev_integrand(y: float) -> float:
        up = log_sig2 + 0.5 * y * y * gap
        down = -log_sig2 - 0.5 * y * y * (1.0 / sigma**2 - sigma**2 + 1.0)
        return 0.5 * pdf(y, sigma) * accept_log(up) + 0.5 * pdf(y, 1.0 / sigma) * accept_log(down)

    vals = []
    for integrand in (rev_integrand, mh_integrand):
        val, err = quad(integrand, k, math.inf, epsabs=epsabs, epsrel=0.0, limit=300)
        if err > max(epsabs, 1e-3 * abs(val)):
            raise QuadratureError(f"tail quadrature achieved only {err:.2e}")
        vals.append(2.0 * val)  # both integrands are even in y
    return CounterexampleProbe(k=k, p_rev=vals[0], p_mh=vals[1])


def counterexample_scan(sigma: float, ks, epsabs: float = 1e-12) -> list[CounterexampleProbe]:
    return [counterexample_probe(sigma, float(k), epsabs=epsabs) for k in ks]
