"""Two-dimensional Ising target with single-flip Barker-weighted proposals.

The target on spin vectors x in {-1, +1}^(eta^2) is

    pi(x) proportional to exp( sum_i alpha_i x_i + coupling * sum_<ij> x_i x_j )

with nearest-neighbour (North-South-East-West) couplings on the open square
lattice. The proposal flips a single site, weighted by the Barker weight
w_i = rho_i / (1 + rho_i) with rho_i = pi(flip_i x) / pi(x), and the
directions come from the inclusion partial order: flipping a -1 site to +1
moves "up" (+1), the reverse moves "down" (-1). The lattice state caches the
flip weights and the two directional weight totals so single-flip updates
stay O(neighbourhood).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, logsumexp

from .kernels import Direction, DirectionalProposal

__all__ = [
    "IsingParams",
    "SpinLattice",
    "log_ratio_flip",
    "barker_weight",
    "apply_flip",
    "sample_flip_direction",
    "generate_external_field",
    "magnetisation",
    "enumerate_target",
    "enumerate_states",
    "ising_finite_instance",
    "SingleFlipBarkerProposal",
]

#: weight-cache drift is bounded by resumming from scratch this often
RESUM_INTERVAL = 10_000

#: exact enumeration is limited to eta <= 3 (at most 2^9 = 512 states)
MAX_ENUM_ETA = 3


@dataclass(frozen=True)
class IsingParams:
    """Lattice side eta, spatial correlation coupling > 0, external field of length eta^2."""

    eta: int
    coupling: float
    field: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "field", np.asarray(self.field, dtype=float))
        if self.eta < 1:
            raise ValueError(f"lattice side must be >= 1, got {self.eta}")
        if self.field.shape != (self.eta**2,):
            raise ValueError(
                f"field must have length eta^2 = {self.eta**2}, got {self.field.shape}"
            )

    @property
    def n(self) -> int:
        return self.eta**2


def lattice_neighbors(eta: int) -> tuple[tuple[int, ...], ...]:
    """North-South-East-West neighbour indices of every site (open boundary)."""
    n = eta * eta
    out = []
    for k in range(n):
        row, col = divmod(k, eta)
        nbrs = []
        if row > 0:
            nbrs.append(k - eta)
        if row + 1 < eta:
            nbrs.append(k + eta)
        if col > 0:
            nbrs.append(k - 1)
        if col + 1 < eta:
            nbrs.append(k + 1)
        out.append(tuple(nbrs))
    return tuple(out)


def _padded_neighbor_table(nbrs: tuple[tuple[int, ...], ...]) -> np.ndarray:
    # pad with n: summing spins through an array extended with a trailing
    # zero makes missing neighbours contribute 0
    n = len(nbrs)
    table = np.full((n, 4), n, dtype=np.intp)
    for k, row in enumerate(nbrs):
        table[k, : len(row)] = row
    return table


def _all_flip_log_ratios(spins: np.ndarray, params: IsingParams, table: np.ndarray) -> np.ndarray:
    ext = np.append(spins, np.int8(0))
    nb_sum = ext[table].sum(axis=1)
    return -2.0 * spins * (params.field + params.coupling * nb_sum)


def _sigmoid(a: float) -> float:
    if a >= 0.0:
        return 1.0 / (1.0 + math.exp(-a)) if a < 40.0 else 1.0
    return math.exp(a) / (1.0 + math.exp(a)) if a > -745.0 else 5e-324


class SpinLattice:
    """Spin configuration with cached flip log-ratios, Barker weights and
    directional totals.

    ``deltas[i]`` is the flip log-ratio of site i and ``weights[i]`` its
    Barker weight sigma(deltas[i]); ``c_up`` sums the weights of sites
    currently at -1 (flips in direction +1), ``c_down`` the weights of sites
    at +1. Single-flip updates touch only the site and its neighbours; drift
    is bounded by a full resummation every RESUM_INTERVAL updates. A lattice
    is owned by exactly one chain.
    """

    __slots__ = ("spins", "deltas", "weights", "c_down", "c_up", "n_down", "_nbrs", "_updates")

    def __init__(self, spins: np.ndarray, params: IsingParams, _nbrs=None):
        spins = np.asarray(spins, dtype=np.int8)
        if spins.shape != (params.n,) or not np.all(np.abs(spins) == 1):
            raise ValueError(f"spins must be a length-{params.n} vector over {{-1, +1}}")
        self.spins = spins
        self._nbrs = lattice_neighbors(params.eta) if _nbrs is None else _nbrs
        self._updates = 0
        self._recompute(params)

    def _recompute(self, params: IsingParams) -> None:
        table = _padded_neighbor_table(self._nbrs)
        self.deltas = _all_flip_log_ratios(self.spins, params, table)
        self.weights = np.exp(-np.logaddexp(0.0, -self.deltas))
        self.c_up = float(self.weights[self.spins == -1].sum())
        self.c_down = float(self.weights[self.spins == 1].sum())
        self.n_down = int((self.spins == -1).sum())
        self._updates = 0

    def total_weight(self) -> float:
        return self.c_up + self.c_down

    def side_weight(self, nu: Direction) -> float:
        return self.c_up if nu == 1 else self.c_down

    def copy(self) -> "SpinLattice":
        dup = object.__new__(SpinLattice)
        dup.spins = self.spins.copy()
        dup.deltas = self.deltas.copy()
        dup.weights = self.weights.copy()
        dup.c_down = self.c_down
        dup.c_up = self.c_up
        dup.n_down = self.n_down
        dup._nbrs = self._nbrs
        dup._updates = self._updates
        return dup

    @classmethod
    def random(cls, params: IsingParams, rng: np.random.Generator) -> "SpinLattice":
        spins = rng.integers(0, 2, params.n).astype(np.int8) * 2 - 1
        return cls(spins, params)


def log_ratio_flip(lattice: SpinLattice, params: IsingParams, site: int) -> float:
    """Delta_i = log pi(flip_i x) - log pi(x) = -2 x_i (alpha_i + coupling * sum of NSEW spins)."""
    if not 0 <= site < params.n:
        raise IndexError(f"site {site} out of range for a {params.eta}x{params.eta} lattice")
    nb_sum = sum(int(lattice.spins[j]) for j in lattice._nbrs[site])
    return -2.0 * float(lattice.spins[site]) * (float(params.field[site]) + params.coupling * nb_sum)


def barker_weight(lattice: SpinLattice, params: IsingParams, site: int) -> float:
    """sigma(Delta_i) = 1 / (1 + exp(-Delta_i)), stable for strongly aligned spins."""
    delta = log_ratio_flip(lattice, params, site)
    return float(np.exp(-np.logaddexp(0.0, -delta)))


def apply_flip(lattice: SpinLattice, params: IsingParams, site: int) -> SpinLattice:
    """Return the lattice with site flipped; cache updated only around the site.

    The flipped site's log-ratio negates; every lattice neighbour j shifts by
    4 * coupling * x_j * x_site since exactly one of its neighbour spins flips.
    """
    if not 0 <= site < params.n:
        raise IndexError(f"site {site} out of range for a {params.eta}x{params.eta} lattice")
    new = lattice.copy()
    spins = new.spins
    deltas = new.deltas
    weights = new.weights
    old_spin = int(spins[site])
    spins[site] = -old_spin
    c_up, c_down = new.c_up, new.c_down

    old_w = float(weights[site])
    if old_spin == -1:
        c_up -= old_w
    else:
        c_down -= old_w
    d = -float(deltas[site])
    deltas[site] = d
    w = _sigmoid(d)
    weights[site] = w
    if old_spin == 1:  # now -1: an upward flip candidate
        c_up += w
    else:
        c_down += w

    shift = 4.0 * params.coupling * old_spin
    for j in new._nbrs[site]:
        sj = int(spins[j])
        old_w = float(weights[j])
        d = float(deltas[j]) + shift * sj
        deltas[j] = d
        w = _sigmoid(d)
        weights[j] = w
        if sj == -1:
            c_up += w - old_w
        else:
            c_down += w - old_w

    new.c_up = c_up
    new.c_down = c_down
    new.n_down = lattice.n_down + (1 if old_spin == 1 else -1)
    new._updates = lattice._updates + 1
    # a side with no eligible sites must weigh exactly zero, and a side with
    # eligible sites must stay positive; cancellation residue forces a resum
    if new.n_down == 0:
        new.c_up = 0.0
    elif new.c_up <= 0.0:
        new._recompute(params)
    if new.n_down == params.n:
        new.c_down = 0.0
    elif new.c_down <= 0.0:
        new._recompute(params)
    if new._updates >= RESUM_INTERVAL:
        new._recompute(params)
    return new


def sample_flip_direction(
    lattice: SpinLattice, params: IsingParams, nu: Direction, rng: np.random.Generator
) -> Optional[int]:
    """Sample a site among {i : x_i = -nu} with probability w_i / c_nu(x).

    Returns None when the direction set is empty (boundary signal, handled by
    the caller per the lifted/reversible boundary rules).
    """
    eligible = lattice.spins == -nu
    if not eligible.any():
        return None
    cum = np.cumsum(np.where(eligible, lattice.weights, 0.0))
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))


def generate_external_field(eta: int, mu: float, rng: np.random.Generator) -> np.ndarray:
    """Field alpha_i = -mu + eps_i on columns up to floor(eta/2), +mu + eps_i after,
    with eps_i iid Uniform(-0.1, 0.1)."""
    n = eta * eta
    cols = (np.arange(n) % eta) + 1
    base = np.where(cols <= eta // 2, -mu, mu)
    return base + rng.uniform(-0.1, 0.1, n)


def magnetisation(lattice: SpinLattice) -> int:
    # n_down is maintained exactly, so the spin sum is available in O(1)
    return lattice.spins.shape[0] - 2 * lattice.n_down


def enumerate_states(n: int) -> np.ndarray:
    """All 2^n spin vectors; site i is bit (n-1-i) of the row index, {0 -> -1, 1 -> +1}."""
    idx = np.arange(2**n, dtype=np.int64)
    shifts = n - 1 - np.arange(n)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8) * 2 - 1


def _lattice_edges(eta: int) -> list[tuple[int, int]]:
    edges = []
    for k in range(eta * eta):
        row, col = divmod(k, eta)
        if col + 1 < eta:
            edges.append((k, k + 1))
        if row + 1 < eta:
            edges.append((k, k + eta))
    return edges


def enumerate_target(params: IsingParams) -> np.ndarray:
    """Exact pi over all 2^n states by brute-force normalization (eta <= 3 only)."""
    if params.eta > MAX_ENUM_ETA:
        raise ValueError(f"exact enumeration is capped at eta <= {MAX_ENUM_ETA}, got {params.eta}")
    states = enumerate_states(params.n).astype(float)
    coup = np.zeros(len(states))
    for i, j in _lattice_edges(params.eta):
        coup += states[:, i] * states[:, j]
    log_pi = states @ params.field + params.coupling * coup
    return np.exp(log_pi - logsumexp(log_pi))


def ising_finite_instance(params: IsingParams):
    """FiniteInstance over the full 2^n state space with Barker flip weights.

    Feeds the exact-kernel verifier; directions follow the partial order
    (flipping -1 to +1 is direction +1).
    """
    from .exact import FiniteInstance

    pi = enumerate_target(params)
    states = enumerate_states(params.n)
    m, n = len(states), params.n
    adj = np.zeros((n, n))
    for i, j in _lattice_edges(params.eta):
        adj[i, j] = adj[j, i] = 1.0
    nb_sum = states.astype(float) @ adj
    deltas = -2.0 * states * (params.field[None, :] + params.coupling * nb_sum)
    weights = expit(deltas)
    q = np.zeros((m, m))
    dirs = np.zeros((m, m), dtype=np.int8)
    idx = np.arange(m)
    for i in range(n):
        flipped = idx ^ (1 << (n - 1 - i))
        q[idx, flipped] = weights[:, i]
        dirs[idx, flipped] = np.where(states[:, i] == -1, 1, -1)
    return FiniteInstance(pi, q, dirs)


class SingleFlipBarkerProposal(DirectionalProposal[SpinLattice]):
    """DirectionalProposal over SpinLattice states for the generic samplers."""

    def __init__(self, params: IsingParams):
        self.params = params

    def initial_state(self, rng: np.random.Generator) -> SpinLattice:
        return SpinLattice.random(self.params, rng)

    def direction_of(self, x: SpinLattice, y: SpinLattice) -> Optional[Direction]:
        diff = np.flatnonzero(x.spins != y.spins)
        if diff.shape[0] != 1:
            return None
        return 1 if x.spins[diff[0]] == -1 else -1

    def mass(self, x: SpinLattice, nu: Direction) -> float:
        return x.side_weight(nu) / x.total_weight()

    def sample_conditional(self, x: SpinLattice, nu: Direction, rng: np.random.Generator) -> SpinLattice:
        site = sample_flip_direction(x, self.params, nu, rng)
        if site is None:
            raise ValueError(f"direction {nu} has no eligible site to flip")
        return apply_flip(x, self.params, site)

    def sample_unconditional(self, x: SpinLattice, rng: np.random.Generator) -> SpinLattice:
        cum = np.cumsum(x.weights)
        site = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        return apply_flip(x, self.params, site)

    def log_ratio(self, x: SpinLattice, y: SpinLattice) -> float:
        diff = np.flatnonzero(x.spins != y.spins)
        if diff.shape[0] != 1:
            raise ValueError("states do not differ by a single flip")
        site = int(diff[0])
        return (
            float(x.deltas[site])
            + math.log(float(y.weights[site]))
            - math.log(float(x.weights[site]))
            + math.log(x.c_up + x.c_down)
            - math.log(y.c_up + y.c_down)
        )
