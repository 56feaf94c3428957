"""Single-step transition logic for the three samplers.

A model plugs in through the :class:`DirectionalProposal` interface, which
bundles the target with a proposal whose support N(x) is split into two
directional neighbourhoods N_{-1}(x), N_{+1}(x) satisfying

    y in N_nu(x)  <=>  x in N_{-nu}(y).

Three step functions share that interface:

* ``mh_step``      — propose from Q(x, .), accept with phi(r(x, y));
* ``rev_step``     — draw a direction uniformly, propose from the conditional
  Q_nu(x, .), accept with phi(r(x, y) * m_nu(x) / m_{-nu}(y)) where
  m_nu(x) = Q(x, N_nu(x)); a direction with empty neighbourhood keeps the
  chain at x (this realizes the (1/2) delta_x + (1/2) Q(x, .) proposal at
  boundary states, and the mass factors collapse to the four boundary cases
  of the directional acceptance ratio);
* ``lifted_step``  — operate on (x, nu), keep proposing in direction nu with
  the same acceptance ratio as ``rev_step``, and flip to (x, -nu) on
  rejection or when N_nu(x) is empty.

All ratios are carried in log space and exponentiated once inside the
balancing function, so targets with ratios spanning e^{+-O(10)} are safe.
A step consumes a deterministic number of rng draws given its branch
(1 uniform for the direction where applicable, the proposal's draws, and
1 uniform for the accept decision).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Generic, NamedTuple, Optional, TypeVar

import numpy as np

from .balancing import BalancingFunction

__all__ = [
    "Direction",
    "opposite",
    "LiftedState",
    "StepOutcome",
    "DirectionalProposal",
    "ProposalContractError",
    "mh_step",
    "rev_step",
    "lifted_step",
]

S = TypeVar("S")

#: a direction is one of the two ints -1, +1
Direction = int


def opposite(nu: Direction) -> Direction:
    return -nu


class ProposalContractError(RuntimeError):
    """A DirectionalProposal implementation violated its interface contract."""


class LiftedState(NamedTuple):
    """A point of the extended space: model state plus current direction."""

    position: Any
    direction: Direction


class DirectionalProposal(ABC, Generic[S]):
    """Target plus directional proposal over states of type S.

    Implementations must guarantee the direction-flip condition
    ``direction_of(x, y) == nu  implies  direction_of(y, x) == -nu`` and
    ``mass(x, -1) + mass(x, +1) == 1`` for every reachable state.
    """

    @abstractmethod
    def direction_of(self, x: S, y: S) -> Optional[Direction]:
        """Which of N_{-1}(x), N_{+1}(x) contains y; None if neither."""

    @abstractmethod
    def mass(self, x: S, nu: Direction) -> float:
        """Q(x, N_nu(x)), the proposal mass of the nu-side neighbourhood."""

    @abstractmethod
    def sample_conditional(self, x: S, nu: Direction, rng: np.random.Generator) -> S:
        """Draw y from Q_nu(x, .). Requires mass(x, nu) > 0."""

    @abstractmethod
    def sample_unconditional(self, x: S, rng: np.random.Generator) -> S:
        """Draw y from Q(x, .)."""

    @abstractmethod
    def log_ratio(self, x: S, y: S) -> float:
        """log of pi(y) Q(y, x) / (pi(x) Q(x, y)) for y in N(x)."""


@dataclass(frozen=True)
class StepOutcome(Generic[S]):
    """Result of one transition step.

    ``next_state`` is a plain state for mh/rev steps and a LiftedState for
    lifted steps. ``proposed`` is None when no proposal was drawn (boundary
    branches). The rejection mass of the kernels is realized implicitly by
    returning the current state (or the direction flip), there is no explicit
    bookkeeping of it here.
    """

    next_state: Any
    accepted: bool
    proposed: Optional[Any]
    acceptance_probability: float


def _clamped_acceptance(phi: BalancingFunction, log_r: float) -> float:
    # phi is in [0, 1] mathematically; rounding may exceed by ulps.
    return min(1.0, max(0.0, phi.accept_from_log(log_r)))


def mh_step(
    x: S,
    proposal: DirectionalProposal[S],
    phi: BalancingFunction,
    rng: np.random.Generator,
) -> StepOutcome[S]:
    """One Metropolis-Hastings step from x."""
    y = proposal.sample_unconditional(x, rng)
    if proposal.direction_of(x, y) is None:
        raise ProposalContractError(
            "sample_unconditional returned a state outside the neighbourhood of x"
        )
    a = _clamped_acceptance(phi, proposal.log_ratio(x, y))
    if rng.random() < a:
        return StepOutcome(y, True, y, a)
    return StepOutcome(x, False, y, a)


def rev_step(
    x: S,
    proposal: DirectionalProposal[S],
    phi: BalancingFunction,
    rng: np.random.Generator,
) -> StepOutcome[S]:
    """One step of the reversible directional variant from x.

    Draws nu uniformly; when N_nu(x) has zero proposal mass the next state is
    x itself (boundary rule). Otherwise proposes from Q_nu(x, .) and accepts
    with phi of the direction-corrected ratio.
    """
    nu: Direction = 1 if rng.random() < 0.5 else -1
    mass_x = proposal.mass(x, nu)
    if mass_x <= 0.0:
        return StepOutcome(x, False, None, 0.0)
    y = proposal.sample_conditional(x, nu, rng)
    mass_y = proposal.mass(y, -nu)
    if mass_y <= 0.0:
        raise ProposalContractError(
            f"proposed state has zero mass in direction {-nu}; "
            "forbidden by the directional-neighbourhood property"
        )
    # single log keeps perfect balance (mass_x == mass_y) exact
    log_r = proposal.log_ratio(x, y) + math.log(mass_x / mass_y)
    a = _clamped_acceptance(phi, log_r)
    if rng.random() < a:
        return StepOutcome(y, True, y, a)
    return StepOutcome(x, False, y, a)


def lifted_step(
    s: LiftedState,
    proposal: DirectionalProposal[S],
    phi: BalancingFunction,
    rng: np.random.Generator,
) -> StepOutcome[LiftedState]:
    """One step of the lifted sampler from (x, nu).

    Boundary rule: N_nu(x) empty sends the chain to (x, -nu) deterministically.
    On acceptance the direction is kept, on rejection it is flipped.
    """
    x, nu = s.position, s.direction
    mass_x = proposal.mass(x, nu)
    if mass_x <= 0.0:
        return StepOutcome(LiftedState(x, -nu), False, None, 0.0)
    y = proposal.sample_conditional(x, nu, rng)
    mass_y = proposal.mass(y, -nu)
    if mass_y <= 0.0:
        raise ProposalContractError(
            f"proposed state has zero mass in direction {-nu}; "
            "forbidden by the directional-neighbourhood property"
        )
    # single log keeps perfect balance (mass_x == mass_y) exact
    log_r = proposal.log_ratio(x, y) + math.log(mass_x / mass_y)
    a = _clamped_acceptance(phi, log_r)
    if rng.random() < a:
        return StepOutcome(LiftedState(y, nu), True, y, a)
    return StepOutcome(LiftedState(x, -nu), False, y, a)
