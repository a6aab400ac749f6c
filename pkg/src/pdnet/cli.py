"""Command-line entry point: generate networks, run single simulations,
run batch sweeps, and pretty-print summary tables.

Exit codes: 0 success, 1 runtime or infeasibility failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import experiment, metrics
from .dynamics import SimState, UpdateMode, run
from .graphs import (
    Graph,
    InfeasibleNetworkError,
    NetworkSpec,
    NetworkVariant,
    generate_network,
    load_edge_list,
    save_edge_list,
)
from .manifest import Manifest, ManifestError, load_manifest

__all__ = ["main"]

OUT_DIR_ENV = "PDNET_OUT_DIR"

_UPDATE_MODES = {
    "sequential": UpdateMode.SEQUENTIAL_RANDOM_ORDER,
    "synchronous": UpdateMode.SYNCHRONOUS,
}


class UsageError(Exception):
    """Configuration or flag problem; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdnet",
        description="Four-strategy prisoner's dilemma on networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a network and write an edge list")
    kind = gen.add_mutually_exclusive_group(required=True)
    kind.add_argument("--grid", metavar="WxH", help="torus grid, e.g. 50x50")
    kind.add_argument("--ring", action="store_true", help="ring lattice (needs --n, --k)")
    kind.add_argument("--er", action="store_true", help="uniform random graph (needs --n, --edges)")
    kind.add_argument("--cellular", action="store_true", help="dense cells (needs --n, --edges, --cells)")
    kind.add_argument("--core-periphery", action="store_true", help="dense core (needs --n, --edges)")
    kind.add_argument("--scale-free", action="store_true", help="preferential attachment (needs --n)")
    kind.add_argument("--small-world", action="store_true", help="rewired ring (needs --n)")
    hood = gen.add_mutually_exclusive_group()
    hood.add_argument("--moore", action="store_true", help="8-neighbor grid (default)")
    hood.add_argument("--vonneumann", action="store_true", help="4-neighbor grid")
    gen.add_argument("--n", type=int, help="node count")
    gen.add_argument("--edges", type=int, help="target edge count")
    gen.add_argument("--k", type=int, help="ring/small-world neighbor count (even)")
    gen.add_argument("--cells", type=int, help="cellular: number of cells")
    gen.add_argument("--inner-density", type=float, default=0.40)
    gen.add_argument("--core-fraction", type=float, default=0.13)
    gen.add_argument("--core-density", type=float)
    gen.add_argument("--rewire-prob", type=float, default=0.05)
    gen.add_argument("--add-prob", type=float, default=0.055)
    gen.add_argument("--seed-core", type=int, default=40, help="scale-free: seed core size")
    gen.add_argument("--attach", type=int, default=8, help="scale-free: edges per arrival")
    gen.add_argument("--isolated", type=int, default=0, help="scale-free: degree-0 nodes to append")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list output path")

    runp = sub.add_parser("run", help="run one simulation from a manifest")
    runp.add_argument("--manifest", required=True)
    runp.add_argument("--out", help="output directory")
    runp.add_argument("--snapshot-every", type=int, metavar="T",
                      help="write a PPM frame every T ticks (grid networks only)")
    runp.add_argument("--p", type=float, help="override run.p")
    runp.add_argument("--mu", type=float, help="override run.mu")
    runp.add_argument("--ticks", type=int, help="override run.ticks")
    runp.add_argument("--seed", type=int, help="override run.seed")
    runp.add_argument("--update", choices=sorted(_UPDATE_MODES), help="override run.update")

    batch = sub.add_parser("batch", help="run a p x mu sweep from a manifest")
    batch.add_argument("--manifest", required=True)
    batch.add_argument("--out", help="output directory")
    batch.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available parallelism)")
    batch.add_argument("--replications", type=int, help="override plan.replications")
    batch.add_argument("--ticks", type=int, help="override plan.ticks")
    batch.add_argument("--base-seed", type=int, help="override plan.base_seed")

    report = sub.add_parser("report", help="render a summary CSV as an aligned table")
    report.add_argument("csv", help="summary CSV path")
    return parser


def _parse_grid(value: str) -> tuple[int, int]:
    parts = value.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"--grid expects WxH, got {value!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--grid expects integers WxH, got {value!r}") from None


def _require(args: argparse.Namespace, flag: str, variant: str) -> int:
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise UsageError(f"{variant} requires {flag}")
    return value


def _gen_spec(args: argparse.Namespace) -> NetworkSpec:
    if args.grid:
        width, height = _parse_grid(args.grid)
        variant = (
            NetworkVariant.GRID_VON_NEUMANN if args.vonneumann else NetworkVariant.GRID_MOORE
        )
        return NetworkSpec(variant=variant, n=width * height, width=width, height=height)
    if args.ring:
        return NetworkSpec(
            variant=NetworkVariant.RING_LATTICE,
            n=_require(args, "--n", "--ring"),
            k=_require(args, "--k", "--ring"),
            target_edges=args.edges or 0,
        )
    if args.er:
        return NetworkSpec(
            variant=NetworkVariant.ERDOS_RENYI,
            n=_require(args, "--n", "--er"),
            target_edges=_require(args, "--edges", "--er"),
        )
    if args.cellular:
        return NetworkSpec(
            variant=NetworkVariant.CELLULAR,
            n=_require(args, "--n", "--cellular"),
            target_edges=_require(args, "--edges", "--cellular"),
            cells=_require(args, "--cells", "--cellular"),
            inner_density=args.inner_density,
        )
    if args.core_periphery:
        return NetworkSpec(
            variant=NetworkVariant.CORE_PERIPHERY,
            n=_require(args, "--n", "--core-periphery"),
            target_edges=_require(args, "--edges", "--core-periphery"),
            core_fraction=args.core_fraction,
            core_density=args.core_density if args.core_density is not None else 0.50,
        )
    if args.scale_free:
        return NetworkSpec(
            variant=NetworkVariant.SCALE_FREE,
            n=_require(args, "--n", "--scale-free"),
            target_edges=args.edges or 0,
            seed_core_size=args.seed_core,
            attach_count=args.attach,
            core_density=args.core_density if args.core_density is not None else 0.01,
            isolated_extra=args.isolated,
        )
    # small world
    return NetworkSpec(
        variant=NetworkVariant.SMALL_WORLD,
        n=_require(args, "--n", "--small-world"),
        target_edges=args.edges or 0,
        k=args.k if args.k is not None else 16,
        rewire_prob=args.rewire_prob,
        add_prob=args.add_prob,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = _gen_spec(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    graph = generate_network(spec, args.seed)
    Path(args.out).write_text(save_edge_list(graph))
    deg = graph.degrees
    print(
        f"wrote {args.out}: {graph.node_count} nodes, {graph.edge_count} edges, "
        f"degree min/mean/max = {deg.min()}/{deg.mean():.2f}/{deg.max()}"
    )
    return 0


def _resolve_out_dir(flag_value: str | None, manifest: Manifest | None) -> Path:
    if flag_value:
        out = flag_value
    elif os.environ.get(OUT_DIR_ENV):
        out = os.environ[OUT_DIR_ENV]
    elif manifest is not None and manifest.output_dir:
        out = manifest.output_dir
    else:
        out = "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_graph(manifest: Manifest) -> Graph:
    if manifest.graph_path is not None:
        return load_edge_list(manifest.graph_path.read_text())
    if manifest.network_spec is None:
        raise UsageError("manifest has no network section")
    return generate_network(manifest.network_spec, manifest.network_seed)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        config = manifest.sim_config(
            p=args.p, mu=args.mu, ticks=args.ticks, seed=args.seed,
            update=_UPDATE_MODES[args.update] if args.update else None,
        )
        grid_shape = manifest.grid_shape
        if args.snapshot_every is not None:
            if args.snapshot_every < 1:
                raise UsageError("--snapshot-every must be >= 1")
            if grid_shape is None:
                raise UsageError(
                    "--snapshot-every needs a torus grid network; "
                    "snapshots of non-grid layouts are not supported"
                )
    except (ManifestError, ValueError) as exc:
        raise UsageError(str(exc)) from None

    graph = _load_graph(manifest)
    out_dir = _resolve_out_dir(args.out, manifest)
    trace_rows = [metrics.trace_csv_header()]

    def recorder(tick: int, state: SimState) -> None:
        trace_rows.append(metrics.trace_csv_row(metrics.census(graph, state)))
        if args.snapshot_every and tick > 0 and tick % args.snapshot_every == 0:
            frame = metrics.render_grid_ppm(state, grid_shape[0], grid_shape[1])
            (out_dir / f"frame_{tick}.ppm").write_bytes(frame)

    final = run(graph, config, recorder)
    (out_dir / "trace.csv").write_text("\n".join(trace_rows) + "\n")
    snap = metrics.census(graph, final)
    print(
        f"tick {snap.tick}: coop={snap.n_c} def={snap.n_d} loner={snap.n_l} "
        f"pun={snap.n_p} phi={snap.phi:.1f}"
    )
    return 0


def cmd_batch(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        plan = manifest.experiment_plan(
            replications=args.replications, ticks=args.ticks, base_seed=args.base_seed
        )
    except (ManifestError, ValueError) as exc:
        raise UsageError(str(exc)) from None

    graph = _load_graph(manifest)
    out_dir = _resolve_out_dir(args.out, manifest)
    summary_path = out_dir / "summary.csv"
    raw_path = out_dir / "raw.csv"
    try:
        results = experiment.run_plan(graph, plan, jobs=max(1, args.jobs))
        summaries = experiment.summarize_plan(results, plan)
        summary_path.write_text(experiment.write_summary_csv(summaries))
        raw_path.write_text(experiment.write_raw_csv(results))
    except Exception as exc:
        for path in (summary_path, raw_path):
            path.unlink(missing_ok=True)
        print(f"batch failed: {exc}", file=sys.stderr)
        return 1

    null = next(s for s in summaries if (s.p, s.mu) == plan.null_condition)
    for line in _format_table([_summary_row(null)]):
        print(line)
    print(f"wrote {summary_path} and {raw_path}")
    return 0


_TABLE_COLUMNS = ("p", "mu", "coop_mean", "coop_t", "def_mean", "def_t",
                  "lon_mean", "lon_t", "pun_mean", "pun_t", "phi")
_TABLE_WIDTHS = (8, 8, 10, 9, 10, 9, 10, 9, 10, 9, 8)


def _summary_row(s: experiment.ConditionSummary) -> list[str]:
    cells = [f"{s.p:g}", f"{s.mu:g}"]
    for i in range(4):
        cells.append(f"{s.means[i]:.1f}")
        cells.append(f"{s.t_values[i]:.1f}{s.flags[i]}")
    cells.append(f"{s.phi:.1f}")
    return cells


def _format_table(rows: list[list[str]]) -> list[str]:
    width = sum(_TABLE_WIDTHS) + len(_TABLE_WIDTHS) - 1
    lines = ["-" * width,
             " ".join(h.rjust(w) for h, w in zip(_TABLE_COLUMNS, _TABLE_WIDTHS))]
    for row in rows:
        lines.append(" ".join(c.rjust(w) for c, w in zip(row, _TABLE_WIDTHS)))
    return lines


def cmd_report(args: argparse.Namespace) -> int:
    try:
        text = Path(args.csv).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.csv}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != experiment.SUMMARY_CSV_HEADER:
        raise UsageError(f"{args.csv} is not a summary CSV (bad header)")
    if len(lines) == 1:
        print("no conditions")
        return 0
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 15:
            raise UsageError(f"{args.csv}: expected 15 fields, got {len(cells)}")
        try:
            p, mu = float(cells[0]), float(cells[1])
            means = [float(cells[2 + 3 * i]) for i in range(4)]
            ts = [float(cells[3 + 3 * i]) for i in range(4)]
            flags = [cells[4 + 3 * i] for i in range(4)]
            phi = float(cells[14])
        except ValueError:
            raise UsageError(f"{args.csv}: non-numeric field in row {ln!r}") from None
        row = [f"{p:g}", f"{mu:g}"]
        for i in range(4):
            row.append(f"{means[i]:.1f}")
            row.append(f"{ts[i]:.1f}{flags[i]}")
        row.append(f"{phi:.1f}")
        rows.append(row)
    for line in _format_table(rows):
        print(line)
    return 0


_COMMANDS = {"gen": cmd_gen, "run": cmd_run, "batch": cmd_batch, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleNetworkError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
