"""Batch sweeps over participation and mutation rates with seeded replications.

Each (p, mu) condition is replicated with independent master seeds derived
from the plan's base seed and a stable hash of (p, mu, replication index),
so adding or removing conditions never shifts any other condition's draws.
Per-condition results are compared against a baseline condition with
Welch's t-test: rows at the baseline mutation rate compare against the
plan's null condition, all other rows compare against the same p at the
baseline mutation rate.
"""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import SimConfig, SimState, UpdateMode, run
from .graphs import Graph
from .metrics import census, coexistence_value
from .payoffs import DEFAULT_PARAMS, PayoffParams
from .stats import significance_flag, summarize, welch_t

__all__ = [
    "ExperimentPlan",
    "ConditionSummary",
    "replication_seed",
    "run_condition",
    "run_plan",
    "summarize_plan",
    "write_summary_csv",
    "write_raw_csv",
    "SUMMARY_CSV_HEADER",
]

_MASK64 = (1 << 64) - 1

SUMMARY_CSV_HEADER = (
    "p,mu,coop_mean,coop_t,coop_flag,def_mean,def_t,def_flag,"
    "lon_mean,lon_t,lon_flag,pun_mean,pun_t,pun_flag,phi"
)


@dataclass(frozen=True)
class ExperimentPlan:
    """The p x mu sweep grid and how to measure each replication.

    `measurement` is "final" (census at the last tick) or "tail" (mean
    census over the last `tail_window` ticks). The null condition must be a
    cell of the grid.
    """

    p_values: tuple[float, ...] = (0.001, 0.01, 0.1, 1.0)
    mu_values: tuple[float, ...] = (0.0, 0.0001, 0.001, 0.01, 0.1)
    replications: int = 30
    ticks: int = 10000
    base_seed: int = 0
    params: PayoffParams = DEFAULT_PARAMS
    null_condition: tuple[float, float] = (1.0, 0.0)
    measurement: str = "final"
    tail_window: int = 1000
    update_mode: UpdateMode = UpdateMode.SEQUENTIAL_RANDOM_ORDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        object.__setattr__(self, "mu_values", tuple(float(m) for m in self.mu_values))
        object.__setattr__(self, "null_condition",
                           (float(self.null_condition[0]), float(self.null_condition[1])))
        for name, values in (("p_values", self.p_values), ("mu_values", self.mu_values)):
            if not values:
                raise ValueError(f"{name} must be nonempty")
            if any(not 0.0 <= v <= 1.0 for v in values):
                raise ValueError(f"{name} must lie in [0, 1], got {values}")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates: {values}")
        if self.replications < 2:
            raise ValueError("replications must be >= 2 (t-tests need two observations)")
        if self.ticks < 1:
            raise ValueError(f"ticks must be >= 1, got {self.ticks}")
        if self.measurement not in ("final", "tail"):
            raise ValueError(f"measurement must be 'final' or 'tail', got {self.measurement!r}")
        if self.tail_window < 1:
            raise ValueError(f"tail_window must be >= 1, got {self.tail_window}")
        null_p, null_mu = self.null_condition
        if null_p not in self.p_values or null_mu not in self.mu_values:
            raise ValueError(
                f"null condition {self.null_condition} is not a cell of the sweep grid"
            )

    def conditions(self) -> list[tuple[float, float]]:
        return [(p, mu) for p in self.p_values for mu in self.mu_values]

    def baseline_of(self, p: float, mu: float) -> tuple[float, float]:
        null_p, null_mu = self.null_condition
        if mu == null_mu:
            return (null_p, null_mu)
        return (p, null_mu)


@dataclass(frozen=True)
class ConditionSummary:
    """One summary row: replication means, t vs baseline, flags, phi."""

    p: float
    mu: float
    means: tuple[float, float, float, float]
    sds: tuple[float, float, float, float]
    t_values: tuple[float, float, float, float]
    flags: tuple[str, str, str, str]
    phi: float
    replications: int


def replication_seed(base_seed: int, p: float, mu: float, rep: int) -> int:
    """Stable per-replication master seed: base_seed XOR sha256(p, mu, rep)."""
    digest = hashlib.sha256(struct.pack("<ddq", float(p), float(mu), rep)).digest()
    return (base_seed ^ int.from_bytes(digest[:8], "little")) & _MASK64


def _measure_replication(
    graph: Graph, plan: ExperimentPlan, p: float, mu: float, rep: int
) -> np.ndarray:
    config = SimConfig(
        params=plan.params,
        participation_rate=p,
        mutation_rate=mu,
        ticks=plan.ticks,
        master_seed=replication_seed(plan.base_seed, p, mu, rep),
        update_mode=plan.update_mode,
    )
    if plan.measurement == "final":
        state = run(graph, config)
        snap = census(graph, state)
        return np.array([snap.n_c, snap.n_d, snap.n_l, snap.n_p], dtype=np.float64)

    window = min(plan.tail_window, plan.ticks)
    first_tick = plan.ticks - window + 1
    acc = np.zeros(4, dtype=np.float64)

    def recorder(tick: int, state: SimState) -> None:
        if tick >= first_tick:
            snap = census(graph, state)
            acc[0] += snap.n_c
            acc[1] += snap.n_d
            acc[2] += snap.n_l
            acc[3] += snap.n_p

    run(graph, config, recorder)
    return acc / window


_worker_graph: Graph | None = None
_worker_plan: ExperimentPlan | None = None


def _init_worker(graph: Graph, plan: ExperimentPlan) -> None:
    global _worker_graph, _worker_plan
    _worker_graph = graph
    _worker_plan = plan


def _run_task(task: tuple[float, float, int]) -> np.ndarray:
    p, mu, rep = task
    return _measure_replication(_worker_graph, _worker_plan, p, mu, rep)


def _run_tasks(
    graph: Graph, plan: ExperimentPlan, tasks: list[tuple[float, float, int]], jobs: int
) -> list[np.ndarray]:
    """Execute replication tasks, optionally on worker processes.

    Results come back in task order, so any job count yields identical
    output.
    """
    if jobs <= 1:
        return [_measure_replication(graph, plan, p, mu, rep) for p, mu, rep in tasks]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(graph, plan)
    ) as pool:
        return list(pool.map(_run_task, tasks, chunksize=4))


def run_condition(
    graph: Graph, plan: ExperimentPlan, p: float, mu: float, jobs: int = 1
) -> np.ndarray:
    """All replications of one condition; shape (replications, 4)."""
    tasks = [(p, mu, rep) for rep in range(plan.replications)]
    return np.vstack(_run_tasks(graph, plan, tasks, jobs))


def run_plan(
    graph: Graph, plan: ExperimentPlan, jobs: int = 1
) -> dict[tuple[float, float], np.ndarray]:
    """Run every grid cell; returns {(p, mu): (replications, 4) array}."""
    conditions = plan.conditions()
    tasks = [(p, mu, rep) for (p, mu) in conditions for rep in range(plan.replications)]
    rows = _run_tasks(graph, plan, tasks, jobs)
    results: dict[tuple[float, float], np.ndarray] = {}
    for i, (p, mu) in enumerate(conditions):
        block = rows[i * plan.replications : (i + 1) * plan.replications]
        results[(p, mu)] = np.vstack(block)
    return results


def _condition_order_key(p: float, mu: float) -> tuple[bool, float, float]:
    # mu = 0 rows last, then p ascending, then mu ascending
    return (mu == 0.0, p, mu)


def summarize_plan(
    results: dict[tuple[float, float], np.ndarray], plan: ExperimentPlan
) -> list[ConditionSummary]:
    """Aggregate per-condition replications into summary rows.

    Raises if any condition's baseline is missing from `results`. The row
    whose condition equals its own baseline compares against itself and so
    carries exact zero t-values and empty flags.
    """
    for p, mu in plan.conditions():
        if (p, mu) not in results:
            raise ValueError(f"results missing condition (p={p}, mu={mu})")
        if plan.baseline_of(p, mu) not in results:
            raise ValueError(
                f"results missing baseline {plan.baseline_of(p, mu)} for (p={p}, mu={mu})"
            )
    summaries = []
    for p, mu in sorted(plan.conditions(), key=lambda c: _condition_order_key(*c)):
        samples = results[(p, mu)]
        base = results[plan.baseline_of(p, mu)]
        cols = [summarize(samples[:, s]) for s in range(4)]
        tests = [welch_t(samples[:, s], base[:, s]) for s in range(4)]
        summaries.append(
            ConditionSummary(
                p=p,
                mu=mu,
                means=tuple(c.mean for c in cols),
                sds=tuple(c.sd for c in cols),
                t_values=tuple(t.t for t in tests),
                flags=tuple(significance_flag(t.p_two_tailed) for t in tests),
                phi=coexistence_value(*(c.mean for c in cols)),
                replications=samples.shape[0],
            )
        )
    return summaries


def _fmt(x: float) -> str:
    return format(x, ".6g")


def write_summary_csv(summaries: list[ConditionSummary]) -> str:
    """Render summary rows as CSV in the canonical row order."""
    lines = [SUMMARY_CSV_HEADER]
    for s in sorted(summaries, key=lambda s: _condition_order_key(s.p, s.mu)):
        cells = [repr(s.p), repr(s.mu)]
        for i in range(4):
            cells.extend([_fmt(s.means[i]), _fmt(s.t_values[i]), s.flags[i]])
        cells.append(_fmt(s.phi))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_raw_csv(results: dict[tuple[float, float], np.ndarray]) -> str:
    """Per-replication counts, one row per (condition, replication)."""
    lines = ["p,mu,rep,n_c,n_d,n_l,n_p"]
    for p, mu in sorted(results, key=lambda c: _condition_order_key(*c)):
        block = results[(p, mu)]
        for rep in range(block.shape[0]):
            row = block[rep]
            lines.append(
                f"{p!r},{mu!r},{rep},{_fmt(row[0])},{_fmt(row[1])},"
                f"{_fmt(row[2])},{_fmt(row[3])}"
            )
    return "\n".join(lines) + "\n"
