"""Population census, the coexistence value, and grid snapshot rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graphs import Graph
from .dynamics import SimState
from .payoffs import Strategy

__all__ = [
    "CountsSnapshot",
    "STRATEGY_COLORS",
    "census",
    "coexistence_value",
    "render_grid_ppm",
    "trace_csv_header",
    "trace_csv_row",
    "snapshots_to_csv",
]

# Figure colors: cooperator red, defector blue, loner green, punisher black.
STRATEGY_COLORS: dict[Strategy, tuple[int, int, int]] = {
    Strategy.COOPERATOR: (255, 0, 0),
    Strategy.DEFECTOR: (0, 0, 255),
    Strategy.LONER: (0, 255, 0),
    Strategy.PUNISHER: (0, 0, 0),
}


@dataclass(frozen=True)
class CountsSnapshot:
    """Strategy counts over connected (degree >= 1) nodes at one tick."""

    tick: int
    n_c: int
    n_d: int
    n_l: int
    n_p: int
    phi: float


def coexistence_value(n_c: float, n_d: float, n_l: float, n_p: float) -> float:
    """Geometric mean of the four counts: zero when any strategy is extinct,
    maximal (equal to the arithmetic mean) when all four are equal."""
    if min(n_c, n_d, n_l, n_p) < 0:
        raise ValueError("counts must be non-negative")
    return float((n_c * n_d * n_l * n_p) ** 0.25)


def census(graph: Graph, state: SimState) -> CountsSnapshot:
    """Tally strategies over nodes with at least one neighbor.

    Isolated nodes hold strategies and mutate like everyone else but never
    play, so they are excluded from all reported statistics.
    """
    if state.strategies.shape[0] != graph.node_count:
        raise ValueError(
            f"state has {state.strategies.shape[0]} nodes, graph has {graph.node_count}"
        )
    active = state.strategies[graph.degrees > 0]
    counts = np.bincount(active, minlength=4)
    phi = coexistence_value(*(int(x) for x in counts))
    return CountsSnapshot(state.tick, int(counts[0]), int(counts[1]),
                          int(counts[2]), int(counts[3]), phi)


def render_grid_ppm(state: SimState, width: int, height: int) -> bytes:
    """Render a grid-resident state as a plain (P3) PPM, one pixel per agent.

    Node (x, y) = y*width + x maps to pixel column x, row y. Upscaling is
    left to external tools.
    """
    n = state.strategies.shape[0]
    if width <= 0 or height <= 0 or width * height != n:
        raise ValueError(f"{width}x{height} grid cannot hold {n} agents")
    palette = np.array([STRATEGY_COLORS[s] for s in Strategy], dtype=np.int64)
    pixels = palette[state.strategies]
    lines = [f"P3\n{width} {height}\n255"]
    lines.extend(f"{r} {g} {b}" for r, g, b in pixels)
    return ("\n".join(lines) + "\n").encode("ascii")


def trace_csv_header() -> str:
    return "tick,n_c,n_d,n_l,n_p,phi"


def trace_csv_row(snap: CountsSnapshot) -> str:
    return f"{snap.tick},{snap.n_c},{snap.n_d},{snap.n_l},{snap.n_p},{snap.phi:.6g}"


def snapshots_to_csv(snapshots: Iterable[CountsSnapshot]) -> str:
    lines = [trace_csv_header()]
    lines.extend(trace_csv_row(s) for s in snapshots)
    return "\n".join(lines) + "\n"
