"""Strategies, payoff parameters, and the best-response rule.

Four strategies play a one-shot neighborhood game. A focal agent facing a
neighborhood census (n_c, n_d, n_l, n_p) earns, per strategy:

    cooperator:  n_c*b - (n_c + n_d + n_p)*c    (loners cost nothing)
    defector:    n_c*b - n_p*beta
    loner:       degree*sigma
    punisher:    n_c*b - n_d*gamma

The agent adopts a strategy of maximum payoff; exact ties are resolved
uniformly at random among the tied set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "Strategy",
    "PayoffParams",
    "NeighborCounts",
    "PRESETS",
    "DEFAULT_PARAMS",
    "SOFT_PUNISHMENT_PARAMS",
    "pairwise_payoff",
    "aggregate_payoffs",
    "best_response",
]


class Strategy(IntEnum):
    """The four agent strategies, with a stable 0..3 encoding."""

    COOPERATOR = 0
    DEFECTOR = 1
    LONER = 2
    PUNISHER = 3


@dataclass(frozen=True)
class PayoffParams:
    """Game constants: benefit b, cost c, penalty beta, punisher's cost
    gamma, and the loner's per-neighbor payoff sigma.

    Orderings 0 < sigma < b and 0 < c < gamma < beta are required; outside
    them the game degenerates (altruism never pays, or punishment is free).
    """

    b: float
    c: float
    beta: float
    gamma: float
    sigma: float

    def __post_init__(self) -> None:
        if not (0 < self.sigma < self.b):
            raise ValueError(f"need 0 < sigma < b, got sigma={self.sigma}, b={self.b}")
        if not (0 < self.c < self.gamma < self.beta):
            raise ValueError(
                f"need 0 < c < gamma < beta, got c={self.c}, "
                f"gamma={self.gamma}, beta={self.beta}"
            )


# Primary preset: harsh punishment (beta > b). The alternate halves the
# stakes of punishing: defectors lose less, punishers pay less.
DEFAULT_PARAMS = PayoffParams(b=100.0, c=5.0, beta=150.0, gamma=50.0, sigma=12.5)
SOFT_PUNISHMENT_PARAMS = PayoffParams(b=100.0, c=5.0, beta=50.0, gamma=15.0, sigma=12.5)

PRESETS: dict[str, PayoffParams] = {
    "default": DEFAULT_PARAMS,
    "soft_punishment": SOFT_PUNISHMENT_PARAMS,
}


@dataclass(frozen=True)
class NeighborCounts:
    """Census of a focal node's neighborhood, one count per strategy."""

    n_c: int
    n_d: int
    n_l: int
    n_p: int

    def __post_init__(self) -> None:
        if min(self.n_c, self.n_d, self.n_l, self.n_p) < 0:
            raise ValueError(f"negative neighbor count in {self}")

    @property
    def degree(self) -> int:
        return self.n_c + self.n_d + self.n_l + self.n_p


def _row_payoff(s1: Strategy, s2: Strategy, params: PayoffParams) -> float:
    """Payoff earned by s1 in a single pairwise encounter against s2."""
    b, c, beta, gamma, sigma = params.b, params.c, params.beta, params.gamma, params.sigma
    if s1 == Strategy.COOPERATOR:
        return b - c if s2 == Strategy.COOPERATOR else -c
    if s1 == Strategy.DEFECTOR:
        if s2 == Strategy.COOPERATOR:
            return b
        return -beta if s2 == Strategy.PUNISHER else 0.0
    if s1 == Strategy.LONER:
        return sigma
    # punisher
    if s2 == Strategy.COOPERATOR:
        return b
    return -gamma if s2 == Strategy.DEFECTOR else 0.0


def pairwise_payoff(
    s1: Strategy, s2: Strategy, params: PayoffParams
) -> tuple[float, float]:
    """Both players' payoffs for one pairwise encounter.

    The game is symmetric: swapping the players swaps the outputs.
    """
    return _row_payoff(s1, s2, params), _row_payoff(s2, s1, params)


def aggregate_payoffs(
    counts: NeighborCounts, params: PayoffParams
) -> tuple[float, float, float, float]:
    """Prospective payoff of each strategy against a fixed neighborhood.

    Returned in Strategy order (cooperator, defector, loner, punisher).
    Note the cooperator pays no cost toward loner neighbors, so for n_l > 0
    this is not the sum of pairwise payoffs (which charge -c per loner).
    """
    n_c, n_d, n_l, n_p = counts.n_c, counts.n_d, counts.n_l, counts.n_p
    coop = n_c * params.b - (n_c + n_d + n_p) * params.c
    defe = n_c * params.b - n_p * params.beta
    lone = (n_c + n_d + n_l + n_p) * params.sigma
    puni = n_c * params.b - n_d * params.gamma
    return coop, defe, lone, puni


def best_response(
    counts: NeighborCounts, params: PayoffParams, tie_stream: np.random.Generator
) -> Strategy:
    """Strategy of maximum aggregate payoff; exact ties uniform at random.

    Consumes exactly four uniforms from tie_stream per call, whether or not
    a tie occurs, so strict-maximum outcomes do not depend on the stream.
    """
    payoffs = aggregate_payoffs(counts, params)
    u = tie_stream.random(4)
    best = max(payoffs)
    pick = max(range(4), key=lambda i: (payoffs[i] == best, u[i]))
    return Strategy(pick)
