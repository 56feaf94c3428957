"""Exact finite-state construction and verification of the three kernels.

A :class:`FiniteInstance` is a fully explicit target/proposal pair on n
states: a positive probability vector pi, a nonnegative weight matrix q with
symmetric support and zero diagonal, and an antisymmetric direction label on
every edge. From it the three kernels are assembled as dense row-stochastic
matrices, and the structural claims become numeric certificates:

* stationarity of pi (pi tensor Uniform{-1,+1} for the lifted kernel),
* detailed balance of the MH kernel and the reversible variant,
* skewed detailed balance pi(x) T_{+1}(x,y) = pi(y) T_{-1}(y,x) of the
  lifted kernel,
* the Peskun-type bound P_rev(x, y) >= (1/2) P_MH(x, y) entrywise off the
  diagonal (entrywise dominance implies it for every set),
* the variance chain var_lifted <= var_rev <= 2 var_mh + Var[f] via exact
  Poisson-equation solves, which apply to reversible and non-reversible
  kernels alike.

Sizes are capped so everything stays dense; exactness over scale, simulation
covers large systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .balancing import METROPOLIS, BalancingFunction
from .kernels import Direction, DirectionalProposal

__all__ = [
    "FiniteInstance",
    "DenseKernel",
    "NonErgodicError",
    "build_mh_kernel",
    "build_rev_kernel",
    "build_lifted_kernel",
    "stationarity_residual",
    "detailed_balance_residual",
    "skewed_db_residual",
    "peskun_bound_margin",
    "asymptotic_variance_exact",
    "lambda_variance_exact",
    "VarianceOrderingReport",
    "variance_ordering_certificate",
    "random_instance",
    "standardized_test_functions",
    "gaussian_ring_instance",
    "FiniteProposal",
    "instance_to_dict",
    "instance_from_dict",
]

MAX_PLAIN_STATES = 4096
ROW_SUM_TOL = 1e-12

#: admission floor for the random-instance generator: every non-unit
#: eigenvalue of all three kernels must lie at least this far from 1, so the
#: lambda -> 1 bridge at lambda = 0.9999 is numerically meaningful.
SPECTRAL_DISTANCE_FLOOR = 0.02


class NonErgodicError(RuntimeError):
    """The Poisson-equation system is singular beyond the mean-zero constraint."""


@dataclass
class FiniteInstance:
    """Explicit finite target/proposal/direction triple.

    Attributes:
        pi: length-n probability vector, all entries positive.
        q: n x n nonnegative unnormalized proposal weights, zero diagonal,
           q[x, y] > 0 iff y is a neighbour of x (symmetric support).
        dirs: n x n int matrix over {-1, 0, +1}; dirs[x, y] labels the edge
           direction and is 0 exactly where q[x, y] == 0. Antisymmetric on
           the support: dirs[x, y] == -dirs[y, x].
    """

    pi: np.ndarray
    q: np.ndarray
    dirs: np.ndarray

    def __post_init__(self) -> None:
        self.pi = np.asarray(self.pi, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.dirs = np.asarray(self.dirs, dtype=np.int8)
        self.validate()

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    def validate(self) -> None:
        n = self.pi.shape[0]
        if n > MAX_PLAIN_STATES:
            raise ValueError(f"instance has {n} states, dense cap is {MAX_PLAIN_STATES}")
        if self.q.shape != (n, n) or self.dirs.shape != (n, n):
            raise ValueError(f"shape mismatch: pi has {n} states, q {self.q.shape}, dirs {self.dirs.shape}")
        if np.any(self.pi <= 0.0) or abs(self.pi.sum() - 1.0) > 1e-9:
            raise ValueError("pi must be strictly positive and sum to 1")
        if np.any(np.diag(self.q) != 0.0):
            x = int(np.flatnonzero(np.diag(self.q))[0])
            raise ValueError(f"q has a nonzero diagonal entry at state {x}")
        if np.any(self.q < 0.0):
            x, y = map(int, np.argwhere(self.q < 0.0)[0])
            raise ValueError(f"q[{x}][{y}] is negative")
        support = self.q > 0.0
        bad = support != support.T
        if np.any(bad):
            x, y = map(int, np.argwhere(bad)[0])
            raise ValueError(f"asymmetric support: q[{x}][{y}] > 0 but q[{y}][{x}] == 0")
        if np.any((self.dirs != 0) != support):
            x, y = map(int, np.argwhere((self.dirs != 0) != support)[0])
            raise ValueError(f"dirs[{x}][{y}] must be labelled iff q[{x}][{y}] > 0")
        flip_bad = support & (self.dirs != -self.dirs.T)
        if np.any(flip_bad):
            x, y = map(int, np.argwhere(flip_bad)[0])
            raise ValueError(f"direction labels violate the flip condition at edge ({x}, {y})")

    # derived quantities -------------------------------------------------

    def total_weight(self) -> np.ndarray:
        """c(x) as the exact partition c_{-1}(x) + c_{+1}(x)."""
        return self.side_weight(-1) + self.side_weight(+1)

    def side_weight(self, nu: Direction) -> np.ndarray:
        """c_nu(x) = sum of q[x, y] over y in N_nu(x)."""
        return np.where(self.dirs == nu, self.q, 0.0).sum(axis=1)

    def masses(self) -> dict[Direction, np.ndarray]:
        c = self.total_weight()
        return {nu: self.side_weight(nu) / c for nu in (-1, +1)}

    def interior(self) -> np.ndarray:
        """Boolean mask of states with both directional neighbourhoods non-empty."""
        return (self.side_weight(-1) > 0.0) & (self.side_weight(+1) > 0.0)


@dataclass(frozen=True)
class DenseKernel:
    """Row-stochastic transition matrix, plain (n x n) or lifted (2n x 2n).

    Lifted index layout: (x, +1) -> x and (x, -1) -> n + x.
    """

    matrix: np.ndarray
    space: str  # "plain" or "lifted"
    n_base: int

    def __post_init__(self) -> None:
        m = self.matrix
        expected = self.n_base if self.space == "plain" else 2 * self.n_base
        if self.space not in ("plain", "lifted"):
            raise ValueError(f"unknown kernel space {self.space!r}")
        if m.shape != (expected, expected):
            raise ValueError(f"{self.space} kernel on {self.n_base} states must be {expected}x{expected}")
        if np.any(m < -1e-15):
            raise ValueError("kernel has a negative entry")
        rows = m.sum(axis=1)
        if np.abs(rows - 1.0).max() > ROW_SUM_TOL:
            raise ValueError(f"kernel rows must sum to 1 within {ROW_SUM_TOL}")


def _edge_log_ratios(inst: FiniteInstance):
    """Edge list with the plain and direction-corrected log acceptance ratios."""
    xs, ys = np.nonzero(inst.q > 0.0)
    c = inst.total_weight()
    log_pi = np.log(inst.pi)
    log_c = np.log(c)
    log_r = (
        log_pi[ys]
        - log_pi[xs]
        + np.log(inst.q[ys, xs])
        - np.log(inst.q[xs, ys])
        + log_c[xs]
        - log_c[ys]
    )
    nu = inst.dirs[xs, ys].astype(int)
    mass = inst.masses()
    m_from = np.where(nu == 1, mass[+1][xs], mass[-1][xs])
    m_to = np.where(nu == 1, mass[-1][ys], mass[+1][ys])
    log_r_dir = log_r + np.log(m_from) - np.log(m_to)
    return xs, ys, nu, log_r, log_r_dir


def _with_diagonal(off: np.ndarray) -> np.ndarray:
    m = off.copy()
    idx = np.arange(m.shape[0])
    m[idx, idx] = 0.0
    m[idx, idx] = 1.0 - m.sum(axis=1)
    return m


def build_mh_kernel(inst: FiniteInstance, phi: BalancingFunction = METROPOLIS) -> DenseKernel:
    """P_MH: off-diagonal (x, y) carries Q(x, y) phi(r(x, y)), diagonal the rejected mass."""
    xs, ys, _, log_r, _ = _edge_log_ratios(inst)
    c = inst.total_weight()
    off = np.zeros((inst.n, inst.n))
    off[xs, ys] = inst.q[xs, ys] / c[xs] * phi.accept_from_log(log_r)
    return DenseKernel(_with_diagonal(off), "plain", inst.n)


def build_rev_kernel(inst: FiniteInstance, phi: BalancingFunction = METROPOLIS) -> DenseKernel:
    """P_rev: interior states mix the two conditional proposals with weight 1/2
    each; boundary states place mass 1/2 on self and 1/2 on Q(x, .)."""
    xs, ys, nu, _, log_r_dir = _edge_log_ratios(inst)
    c = inst.total_weight()
    c_side = {s: inst.side_weight(s) for s in (-1, +1)}
    interior = inst.interior()
    c_from = np.where(nu == 1, c_side[+1][xs], c_side[-1][xs])
    denom = np.where(interior[xs], c_from, c[xs])
    off = np.zeros((inst.n, inst.n))
    off[xs, ys] = 0.5 * inst.q[xs, ys] / denom * phi.accept_from_log(log_r_dir)
    return DenseKernel(_with_diagonal(off), "plain", inst.n)


def build_lifted_kernel(inst: FiniteInstance, phi: BalancingFunction = METROPOLIS) -> DenseKernel:
    """P_Lifted on the doubled space.

    Block (nu -> nu) carries Q_nu(x, y) phi(r_nu(x, y)); the complementary
    (x, nu) -> (x, -nu) entry absorbs the rejection mass, and equals 1 at
    boundary states whose nu-side neighbourhood is empty.
    """
    n = inst.n
    xs, ys, nu, _, log_r_dir = _edge_log_ratios(inst)
    c_side = {s: inst.side_weight(s) for s in (-1, +1)}
    acc = phi.accept_from_log(log_r_dir)
    m = np.zeros((2 * n, 2 * n))
    up = nu == 1
    m[xs[up], ys[up]] = inst.q[xs[up], ys[up]] / c_side[+1][xs[up]] * acc[up]
    m[n + xs[~up], n + ys[~up]] = inst.q[xs[~up], ys[~up]] / c_side[-1][xs[~up]] * acc[~up]
    idx = np.arange(n)
    m[idx, n + idx] = 1.0 - m[:n, :n].sum(axis=1)
    m[n + idx, idx] = 1.0 - m[n:, n:].sum(axis=1)
    return DenseKernel(m, "lifted", n)


# residuals and margins ---------------------------------------------------


def _extend(kernel: DenseKernel, vec: np.ndarray, halve: bool) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if kernel.space == "plain":
        if vec.shape[0] != kernel.n_base:
            raise ValueError(f"vector length {vec.shape[0]} does not match kernel size {kernel.n_base}")
        return vec
    if vec.shape[0] == 2 * kernel.n_base:
        return vec
    if vec.shape[0] != kernel.n_base:
        raise ValueError(
            f"vector length {vec.shape[0]} matches neither base ({kernel.n_base}) nor lifted size"
        )
    ext = np.concatenate([vec, vec])
    return ext / 2.0 if halve else ext


def stationarity_residual(kernel: DenseKernel, pi: np.ndarray) -> float:
    """max |(pi P)_j - pi_j|; pi is extended uniformly over directions for lifted kernels."""
    p = _extend(kernel, pi, halve=True)
    return float(np.abs(p @ kernel.matrix - p).max())


def detailed_balance_residual(kernel: DenseKernel, pi: np.ndarray) -> float:
    """max |pi(x) P(x, y) - pi(y) P(y, x)| over all pairs (plain kernels)."""
    if kernel.space != "plain":
        raise ValueError("detailed balance applies to the plain kernels")
    flow = pi[:, None] * kernel.matrix
    return float(np.abs(flow - flow.T).max())


def skewed_db_residual(kernel: DenseKernel, pi: np.ndarray) -> float:
    """max over x != y of |pi(x) T_{+1}(x, y) - pi(y) T_{-1}(y, x)|."""
    if kernel.space != "lifted":
        raise ValueError("skewed detailed balance applies to the lifted kernel")
    n = kernel.n_base
    t_up = kernel.matrix[:n, :n]
    t_down = kernel.matrix[n:, n:]
    resid = pi[:, None] * t_up - (pi[:, None] * t_down).T
    off = ~np.eye(n, dtype=bool)
    return float(np.abs(resid[off]).max())


def peskun_bound_margin(rev_kernel: DenseKernel, mh_kernel: DenseKernel) -> float:
    """min over x != y of P_rev(x, y) - (1/2) P_MH(x, y).

    A margin >= -1e-12 certifies the bound entrywise, hence for all sets.
    Stated for the Metropolis balancing function; for other choices the
    margin is reported but carries no guarantee.
    """
    if rev_kernel.space != "plain" or mh_kernel.space != "plain":
        raise ValueError("the Peskun margin compares the two plain kernels")
    if rev_kernel.n_base != mh_kernel.n_base:
        raise ValueError("kernels must live on the same state space")
    diff = rev_kernel.matrix - 0.5 * mh_kernel.matrix
    off = ~np.eye(rev_kernel.n_base, dtype=bool)
    return float(diff[off].min())


# variance solves ----------------------------------------------------------


def _poisson_solve(P: np.ndarray, pi: np.ndarray, f_bar: np.ndarray) -> np.ndarray:
    # deflate the unit eigenvalue with the rank-one update I - P + 1 pi^T;
    # the solution automatically has pi-mean zero when 1 is simple.
    A = np.eye(P.shape[0]) - P + np.outer(np.ones(P.shape[0]), pi)
    try:
        g = np.linalg.solve(A, f_bar)
    except np.linalg.LinAlgError as exc:
        raise NonErgodicError("Poisson system singular: kernel is not ergodic") from exc
    scale = max(1.0, float(np.abs(f_bar).max()))
    resid = np.abs((np.eye(P.shape[0]) - P) @ g - f_bar).max()
    if not np.isfinite(resid) or resid > 1e-8 * scale * max(1.0, float(np.abs(g).max())):
        raise NonErgodicError(
            f"Poisson solve residual {resid:.2e} exceeds tolerance: kernel is not ergodic"
        )
    return g


def asymptotic_variance_exact(kernel: DenseKernel, pi: np.ndarray, f: np.ndarray) -> float:
    """Exact asymptotic variance of the ergodic average of f under kernel P.

    Solves (I - P) g = f - pi f with the pi-mean-zero constraint and returns
    2 <f_bar, g>_pi - <f_bar, f_bar>_pi, which equals Var[f] plus twice the
    (Abel-summed) autocovariance series. Valid for reversible and lifted
    (non-reversible) kernels alike; for plain-length inputs on a lifted
    kernel, pi and f are extended over the direction coordinate.
    """
    p = _extend(kernel, pi, halve=True)
    fv = _extend(kernel, f, halve=False)
    f_bar = fv - p @ fv
    g = _poisson_solve(kernel.matrix, p, f_bar)
    return 2.0 * float(np.sum(p * f_bar * g)) - float(np.sum(p * f_bar * f_bar))


def lambda_variance_exact(kernel: DenseKernel, pi: np.ndarray, f: np.ndarray, lam: float) -> float:
    """Geometrically discounted asymptotic variance
    Var[f] + 2 sum_k lambda^k Cov[f(X_0), f(X_k)], lambda in [0, 1)."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")
    p = _extend(kernel, pi, halve=True)
    fv = _extend(kernel, f, halve=False)
    f_bar = fv - p @ fv
    h = np.linalg.solve(np.eye(kernel.matrix.shape[0]) - lam * kernel.matrix, f_bar)
    return float(np.sum(p * f_bar * f_bar)) + 2.0 * float(np.sum(p * f_bar * (h - f_bar)))


@dataclass(frozen=True)
class VarianceOrderingReport:
    """Exact variances of the three kernels for one functional, with the
    two inequalities var_lifted <= var_rev <= 2 var_mh + Var[f]."""

    var_mh: float
    var_rev: float
    var_lifted: float
    var_f: float
    peskun_margin: float
    slack: float = 1e-8

    @property
    def upper_bound(self) -> float:
        return 2.0 * self.var_mh + self.var_f

    @property
    def lifted_le_rev(self) -> bool:
        return self.var_lifted <= self.var_rev + self.slack

    @property
    def rev_le_bound(self) -> bool:
        return self.var_rev <= self.upper_bound + self.slack

    @property
    def inequalities_hold(self) -> bool:
        return self.lifted_le_rev and self.rev_le_bound

    def to_dict(self) -> dict:
        return {
            "var_mh": self.var_mh,
            "var_rev": self.var_rev,
            "var_lifted": self.var_lifted,
            "var_f": self.var_f,
            "upper_bound": self.upper_bound,
            "peskun_margin": self.peskun_margin,
            "inequalities_hold": self.inequalities_hold,
        }


def variance_ordering_certificate(
    inst: FiniteInstance,
    f: np.ndarray,
    phi: BalancingFunction = METROPOLIS,
    slack: float = 1e-8,
) -> VarianceOrderingReport:
    """Compute the three exact variances for f (extended to the lifted space
    as a function of the position only) and report the variance chain."""
    mh = build_mh_kernel(inst, phi)
    rev = build_rev_kernel(inst, phi)
    lifted = build_lifted_kernel(inst, phi)
    f = np.asarray(f, dtype=float)
    var_f = float(np.sum(inst.pi * (f - inst.pi @ f) ** 2))
    return VarianceOrderingReport(
        var_mh=asymptotic_variance_exact(mh, inst.pi, f),
        var_rev=asymptotic_variance_exact(rev, inst.pi, f),
        var_lifted=asymptotic_variance_exact(lifted, inst.pi, f),
        var_f=var_f,
        peskun_margin=peskun_bound_margin(rev, mh),
        slack=slack,
    )


# instance generation -------------------------------------------------------


def _spectral_distance_from_one(P: np.ndarray) -> float:
    """Distance of the closest non-unit eigenvalue to 1 (0 if 1 is not simple)."""
    dist = np.sort(np.abs(1.0 - np.linalg.eigvals(P)))
    if dist[0] > 1e-9:  # no unit eigenvalue at all: not stochastic-consistent
        return 0.0
    return float(dist[1])


def _candidate_instance(rng: np.random.Generator, n_min: int, n_max: int, extra_edge_prob: float) -> FiniteInstance:
    n = int(rng.integers(n_min, n_max + 1))
    pi = rng.dirichlet(np.ones(n))
    edges: set[tuple[int, int]] = set()
    order = rng.permutation(n)
    for i in range(1, n):  # random spanning tree keeps the support connected
        j = int(order[int(rng.integers(0, i))])
        a, b = int(order[i]), j
        edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.random() < extra_edge_prob:
                edges.add((a, b))
    q = np.zeros((n, n))
    dirs = np.zeros((n, n), dtype=np.int8)
    for a, b in edges:
        q[a, b] = math.exp(rng.uniform(-3.0, 3.0))
        q[b, a] = math.exp(rng.uniform(-3.0, 3.0))
        nu = 1 if rng.random() < 0.5 else -1
        dirs[a, b] = nu
        dirs[b, a] = -nu
    # force at least one boundary state: orient all edges of one node the same way
    s = int(rng.integers(0, n))
    for y in np.flatnonzero(q[s] > 0.0):
        dirs[s, y] = 1
        dirs[y, s] = -1
    return FiniteInstance(pi, q, dirs)


def random_instance(
    rng: np.random.Generator,
    n_min: int = 4,
    n_max: int = 12,
    extra_edge_prob: float = 0.3,
    min_spectral_distance: float = SPECTRAL_DISTANCE_FLOOR,
    max_attempts: int = 500,
) -> FiniteInstance:
    """Random connected instance exercising imbalance and boundary states.

    pi is symmetric-Dirichlet(1), the support is a random spanning tree plus
    extra edges, directed edge weights are log-uniform in [e^-3, e^3], edge
    directions are a random orientation, and one node is forced one-sided so
    the boundary rules are exercised. Candidates whose kernels carry a
    non-unit eigenvalue closer than ``min_spectral_distance`` to 1 are
    resampled: such chains mix too slowly for the discounted-variance bridge
    at lambda = 0.9999 to say anything.
    """
    for _ in range(max_attempts):
        inst = _candidate_instance(rng, n_min, n_max, extra_edge_prob)
        if min_spectral_distance <= 0.0:
            return inst
        ok = True
        for builder in (build_mh_kernel, build_rev_kernel, build_lifted_kernel):
            if _spectral_distance_from_one(builder(inst).matrix) < min_spectral_distance:
                ok = False
                break
        if ok:
            return inst
    raise RuntimeError(f"no admissible instance found in {max_attempts} attempts")


def standardized_test_functions(inst: FiniteInstance, rng: np.random.Generator, count: int = 5) -> list[np.ndarray]:
    """Coordinate indicators plus one pseudo-random vector, standardized under pi."""
    fs: list[np.ndarray] = []
    for k in range(count - 1):
        f = np.zeros(inst.n)
        f[k % inst.n] = 1.0
        fs.append(f)
    fs.append(rng.standard_normal(inst.n))
    out = []
    for f in fs:
        mean = float(inst.pi @ f)
        sd = math.sqrt(float(inst.pi @ (f - mean) ** 2))
        out.append((f - mean) / sd)
    return out


def gaussian_ring_instance(n: int = 64, sigma: float = 2.5, span: float = 4.0) -> FiniteInstance:
    """Periodic discretization of a Gaussian target with symmetric displacement weights.

    States sit on a ring with coordinates z_k spanning [-span, span]; the
    target is exp(-z^2/2) normalized, and q(x, x +- j) depends only on the
    displacement j (a discretized normal of scale sigma), with direction +1
    clockwise. Every state then has c_{+1} = c_{-1} exactly: the ring is the
    boundary-free perfect-balance analogue of a symmetric random walk with a
    half-line direction split.
    """
    if n < 4 or n % 2 != 0:
        raise ValueError("ring size must be an even integer >= 4")
    z = np.linspace(-span, span, n)
    logpi = -0.5 * z**2
    pi = np.exp(logpi - logpi.max())
    pi /= pi.sum()
    h = 2 * span / n
    half = n // 2 - 1  # skip the ambiguous antipode
    q = np.zeros((n, n))
    dirs = np.zeros((n, n), dtype=np.int8)
    for j in range(1, half + 1):
        w = math.exp(-0.5 * (j * h / sigma) ** 2)
        for x in range(n):
            y = (x + j) % n
            q[x, y] = w
            q[y, x] = w
            dirs[x, y] = 1
            dirs[y, x] = -1
    return FiniteInstance(pi, q, dirs)


# simulation adapter ---------------------------------------------------------


class FiniteProposal(DirectionalProposal[int]):
    """DirectionalProposal view of a FiniteInstance with integer states.

    Used to cross-check the single-step samplers against the exact kernels.
    """

    def __init__(self, inst: FiniteInstance):
        self.inst = inst
        self._c = inst.total_weight()
        self._side = {nu: inst.side_weight(nu) for nu in (-1, +1)}
        self._log_pi = np.log(inst.pi)
        self._log_c = np.log(self._c)

    def direction_of(self, x: int, y: int) -> Optional[Direction]:
        nu = int(self.inst.dirs[x, y])
        return nu if nu != 0 else None

    def mass(self, x: int, nu: Direction) -> float:
        return float(self._side[nu][x] / self._c[x])

    def _weighted_choice(self, weights: np.ndarray, rng: np.random.Generator) -> int:
        cum = np.cumsum(weights)
        return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))

    def sample_conditional(self, x: int, nu: Direction, rng: np.random.Generator) -> int:
        weights = np.where(self.inst.dirs[x] == nu, self.inst.q[x], 0.0)
        if weights.sum() <= 0.0:
            raise ValueError(f"state {x} has an empty neighbourhood in direction {nu}")
        return self._weighted_choice(weights, rng)

    def sample_unconditional(self, x: int, rng: np.random.Generator) -> int:
        return self._weighted_choice(self.inst.q[x], rng)

    def log_ratio(self, x: int, y: int) -> float:
        q = self.inst.q
        return float(
            self._log_pi[y]
            - self._log_pi[x]
            + math.log(q[y, x])
            - math.log(q[x, y])
            + self._log_c[x]
            - self._log_c[y]
        )


# serialization --------------------------------------------------------------


def instance_to_dict(inst: FiniteInstance) -> dict:
    return {
        "n": inst.n,
        "pi": inst.pi.tolist(),
        "q": inst.q.tolist(),
        "dir": inst.dirs.astype(int).tolist(),
    }


def instance_from_dict(data: dict) -> FiniteInstance:
    return FiniteInstance(
        np.asarray(data["pi"], dtype=float),
        np.asarray(data["q"], dtype=float),
        np.asarray(data["dir"], dtype=int),
    )
