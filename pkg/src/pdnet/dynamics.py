"""Tick-by-tick population dynamics: participation, best response, mutation.

Each tick has three phases. First every node is independently marked as a
participant with probability p. Then participants adopt their best response;
in SEQUENTIAL_RANDOM_ORDER mode they are visited in a fresh random order and
each sees all earlier updates of the same tick, while in SYNCHRONOUS mode
all best responses are computed from the tick-start state and applied at
once. Finally every node, participant or not, mutates with probability mu
to a strategy drawn uniformly from the other three.

All randomness flows from four labeled Philox substreams (initialization,
participation, tie-breaking, mutation) derived from one master seed, so a
run is reproducible bit for bit and toggling one mechanism never perturbs
the draws of another.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numba import njit

from .graphs import Graph
from .payoffs import NeighborCounts, PayoffParams

__all__ = [
    "UpdateMode",
    "SimConfig",
    "SimState",
    "SimStreams",
    "init_uniform",
    "census_neighbors",
    "step",
    "run",
]

_MASK64 = (1 << 64) - 1


class UpdateMode(Enum):
    SEQUENTIAL_RANDOM_ORDER = "sequential"
    SYNCHRONOUS = "synchronous"


@dataclass(frozen=True)
class SimConfig:
    """One run's stochastic parameters."""

    params: PayoffParams
    participation_rate: float
    mutation_rate: float
    ticks: int
    master_seed: int
    update_mode: UpdateMode = UpdateMode.SEQUENTIAL_RANDOM_ORDER

    def __post_init__(self) -> None:
        if not 0.0 <= self.participation_rate <= 1.0:
            raise ValueError(f"participation_rate must be in [0, 1], got {self.participation_rate}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation_rate must be in [0, 1], got {self.mutation_rate}")
        if self.ticks < 1:
            raise ValueError(f"ticks must be >= 1, got {self.ticks}")


@dataclass(frozen=True)
class SimState:
    """Per-node strategy vector (int8 codes per Strategy) at a given tick."""

    strategies: np.ndarray
    tick: int

    def __post_init__(self) -> None:
        strat = np.asarray(self.strategies, dtype=np.int8)
        strat.setflags(write=False)
        object.__setattr__(self, "strategies", strat)
        if strat.ndim != 1 or strat.size == 0:
            raise ValueError("strategies must be a nonempty vector")
        if strat.min() < 0 or strat.max() > 3:
            raise ValueError("strategy codes must be in 0..3")


class SimStreams:
    """The four labeled substreams of one run, in fixed derivation order."""

    __slots__ = ("init", "participation", "tie", "mutation")

    def __init__(self, init, participation, tie, mutation):
        self.init = init
        self.participation = participation
        self.tie = tie
        self.mutation = mutation

    @classmethod
    def from_seed(cls, master_seed: int) -> "SimStreams":
        root = np.random.SeedSequence(master_seed & _MASK64)
        children = root.spawn(4)
        return cls(*(np.random.Generator(np.random.Philox(c)) for c in children))


def init_uniform(graph: Graph, stream: np.random.Generator) -> SimState:
    """Independent uniform strategy per node, tick 0."""
    strategies = stream.integers(0, 4, size=graph.node_count, dtype=np.int8)
    return SimState(strategies=strategies, tick=0)


def census_neighbors(graph: Graph, state: SimState, node: int) -> NeighborCounts:
    """Count each strategy among `node`'s neighbors."""
    neigh = graph.neighbors(node)
    counts = np.bincount(state.strategies[neigh], minlength=4)
    return NeighborCounts(int(counts[0]), int(counts[1]), int(counts[2]), int(counts[3]))


def _neighbor_counts_matrix(graph: Graph, strategies: np.ndarray) -> np.ndarray:
    """(n, 4) census of every node's neighborhood in one sparse product."""
    onehot = np.eye(4, dtype=np.int32)[strategies]
    return graph.adjacency_matrix() @ onehot


def _payoff_matrix(counts: np.ndarray, params: PayoffParams) -> np.ndarray:
    n_c = counts[:, 0].astype(np.float64)
    n_d = counts[:, 1].astype(np.float64)
    n_l = counts[:, 2].astype(np.float64)
    n_p = counts[:, 3].astype(np.float64)
    pay = np.empty((counts.shape[0], 4))
    pay[:, 0] = n_c * params.b - (n_c + n_d + n_p) * params.c
    pay[:, 1] = n_c * params.b - n_p * params.beta
    pay[:, 2] = (n_c + n_d + n_l + n_p) * params.sigma
    pay[:, 3] = n_c * params.b - n_d * params.gamma
    return pay


def _best_responses_sync(
    counts: np.ndarray, params: PayoffParams, tie_u: np.ndarray
) -> np.ndarray:
    """Row-wise argmax with exact ties resolved by the larger tie uniform."""
    pay = _payoff_matrix(counts, params)
    best = pay.max(axis=1, keepdims=True)
    return np.where(pay == best, tie_u, -1.0).argmax(axis=1).astype(np.int8)


@njit(cache=True)
def _sequential_phase(indptr, indices, counts, strategies, order, participant,
                      tie_u, b, c, beta, gamma, sigma):
    """Visit participants in `order`; each best response lands immediately.

    `counts` is every node's live neighborhood census and is kept consistent
    as strategies flip, so later participants see earlier flips. Both arrays
    are updated in place.
    """
    for idx in range(order.shape[0]):
        v = order[idx]
        if not participant[v]:
            continue
        n_c = counts[v, 0]
        n_d = counts[v, 1]
        n_l = counts[v, 2]
        n_p = counts[v, 3]
        p0 = n_c * b - (n_c + n_d + n_p) * c
        p1 = n_c * b - n_p * beta
        p2 = (n_c + n_d + n_l + n_p) * sigma
        p3 = n_c * b - n_d * gamma
        best = p0
        if p1 > best:
            best = p1
        if p2 > best:
            best = p2
        if p3 > best:
            best = p3
        pick = -1
        u_best = -1.0
        if p0 == best and tie_u[v, 0] > u_best:
            pick = 0
            u_best = tie_u[v, 0]
        if p1 == best and tie_u[v, 1] > u_best:
            pick = 1
            u_best = tie_u[v, 1]
        if p2 == best and tie_u[v, 2] > u_best:
            pick = 2
            u_best = tie_u[v, 2]
        if p3 == best and tie_u[v, 3] > u_best:
            pick = 3
            u_best = tie_u[v, 3]
        old = strategies[v]
        if pick != old:
            strategies[v] = pick
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                counts[w, old] -= 1
                counts[w, pick] += 1


def step(graph: Graph, state: SimState, config: SimConfig, streams: SimStreams) -> SimState:
    """Advance one tick; returns the new state, leaving `state` untouched.

    Stream consumption per tick is fixed (participation mask, order
    permutation in sequential mode, an (n, 4) block of tie uniforms, and
    the mutation mask plus offsets) regardless of outcomes, so trajectories
    with no exact payoff ties do not depend on the tie stream's seed.
    """
    if state.strategies.shape[0] != graph.node_count:
        raise ValueError(
            f"state has {state.strategies.shape[0]} nodes, graph has {graph.node_count}"
        )
    n = graph.node_count
    participant = streams.participation.random(n) < config.participation_rate
    if config.update_mode == UpdateMode.SEQUENTIAL_RANDOM_ORDER:
        order = streams.participation.permutation(n)
    tie_u = streams.tie.random((n, 4))

    if config.update_mode == UpdateMode.SYNCHRONOUS:
        counts = _neighbor_counts_matrix(graph, state.strategies)
        choices = _best_responses_sync(counts, config.params, tie_u)
        strategies = np.where(participant, choices, state.strategies).astype(np.int8)
    else:
        strategies = state.strategies.copy()
        counts = _neighbor_counts_matrix(graph, strategies)
        _sequential_phase(
            graph.indptr, graph.indices, counts, strategies, order, participant,
            tie_u, config.params.b, config.params.c, config.params.beta,
            config.params.gamma, config.params.sigma,
        )

    mutant = streams.mutation.random(n) < config.mutation_rate
    offsets = streams.mutation.integers(1, 4, size=n, dtype=np.int8)
    strategies = np.where(mutant, (strategies + offsets) % 4, strategies).astype(np.int8)
    return SimState(strategies=strategies, tick=state.tick + 1)


Recorder = Callable[[int, SimState], None]


def run(graph: Graph, config: SimConfig, recorder: Optional[Recorder] = None) -> SimState:
    """Run `config.ticks` steps from a fresh uniform initialization.

    The recorder, if given, is invoked with (tick, state) after
    initialization and after every step. Identical (graph, config) pairs
    reproduce the identical trajectory.
    """
    streams = SimStreams.from_seed(config.master_seed)
    state = init_uniform(graph, streams.init)
    if recorder is not None:
        recorder(0, state)
    for _ in range(config.ticks):
        state = step(graph, state, config, streams)
        if recorder is not None:
            recorder(state.tick, state)
    return state
