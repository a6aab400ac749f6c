"""Plain-text run manifests: flat `key = value` lines with dotted keys.

A manifest describes the network (generator parameters or an edge-list
file), the payoff parameters, and either a single run (`run.*`) or a batch
sweep (`plan.*`). Unknown keys are rejected, and referenced files must
exist when the manifest is parsed. Lines starting with `#` and blank lines
are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .dynamics import SimConfig, UpdateMode
from .experiment import ExperimentPlan
from .graphs import NetworkSpec, NetworkVariant
from .payoffs import PRESETS, PayoffParams

__all__ = ["Manifest", "ManifestError", "parse_manifest", "load_manifest"]


class ManifestError(ValueError):
    pass


_UPDATE_MODES = {
    "sequential": UpdateMode.SEQUENTIAL_RANDOM_ORDER,
    "synchronous": UpdateMode.SYNCHRONOUS,
}

# per-kind network keys: required and optional-with-default
_NETWORK_KINDS: dict[str, tuple[set[str], dict[str, object]]] = {
    "grid_moore": ({"width", "height"}, {}),
    "grid_von_neumann": ({"width", "height"}, {}),
    "ring": ({"n", "k"}, {"edges": 0}),
    "erdos_renyi": ({"n", "edges"}, {}),
    "cellular": ({"n", "edges", "cells"}, {"inner_density": 0.40}),
    "core_periphery": ({"n", "edges"}, {"core_fraction": 0.13, "core_density": 0.50}),
    "scale_free": (
        {"n"},
        {"edges": 0, "seed_core_size": 40, "attach_count": 8,
         "core_density": 0.01, "isolated_extra": 0},
    ),
    "small_world": (
        {"n"},
        {"edges": 0, "k": 16, "rewire_prob": 0.05, "add_prob": 0.055},
    ),
    "file": ({"path"}, {}),
}

_KIND_TO_VARIANT = {
    "grid_moore": NetworkVariant.GRID_MOORE,
    "grid_von_neumann": NetworkVariant.GRID_VON_NEUMANN,
    "ring": NetworkVariant.RING_LATTICE,
    "erdos_renyi": NetworkVariant.ERDOS_RENYI,
    "cellular": NetworkVariant.CELLULAR,
    "core_periphery": NetworkVariant.CORE_PERIPHERY,
    "scale_free": NetworkVariant.SCALE_FREE,
    "small_world": NetworkVariant.SMALL_WORLD,
}

_INT_KEYS = {"width", "height", "n", "edges", "k", "cells", "seed_core_size",
             "attach_count", "isolated_extra", "seed"}
_FLOAT_KEYS = {"inner_density", "core_fraction", "core_density",
               "rewire_prob", "add_prob"}

_RUN_KEYS = {"p", "mu", "ticks", "seed", "update"}
_PLAN_KEYS = {"p_values", "mu_values", "replications", "ticks", "base_seed",
              "null_p", "null_mu", "measurement", "tail_window", "update"}
_PARAM_KEYS = {"preset", "b", "c", "beta", "gamma", "sigma"}


@dataclass(frozen=True)
class Manifest:
    """Parsed manifest; sections not present in the file are None."""

    network_spec: NetworkSpec | None
    graph_path: Path | None
    network_seed: int
    params: PayoffParams
    run_settings: dict | None
    plan_settings: dict | None
    output_dir: str | None

    def sim_config(self, **overrides) -> SimConfig:
        """Build the single-run config; `overrides` replace manifest values."""
        if self.run_settings is None:
            raise ManifestError("manifest has no run.* section")
        merged = dict(self.run_settings)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig(
            params=self.params,
            participation_rate=merged["p"],
            mutation_rate=merged["mu"],
            ticks=merged["ticks"],
            master_seed=merged["seed"],
            update_mode=merged["update"],
        )

    def experiment_plan(self, **overrides) -> ExperimentPlan:
        """Build the batch plan; `overrides` replace manifest values.

        A manifest without plan.* keys yields the default sweep (every plan
        field has a default).
        """
        merged = _default_plan_settings()
        if self.plan_settings is not None:
            merged.update(self.plan_settings)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentPlan(
            p_values=merged["p_values"],
            mu_values=merged["mu_values"],
            replications=merged["replications"],
            ticks=merged["ticks"],
            base_seed=merged["base_seed"],
            params=self.params,
            null_condition=(merged["null_p"], merged["null_mu"]),
            measurement=merged["measurement"],
            tail_window=merged["tail_window"],
            update_mode=merged["update"],
        )

    @property
    def grid_shape(self) -> tuple[int, int] | None:
        """(width, height) when the network is a torus grid, else None."""
        spec = self.network_spec
        if spec is not None and spec.variant in (
            NetworkVariant.GRID_MOORE, NetworkVariant.GRID_VON_NEUMANN
        ):
            return (spec.width, spec.height)
        return None


def _parse_lines(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ManifestError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ManifestError(f"line {line_no}: empty key or value in {line!r}")
        if key in pairs:
            raise ManifestError(f"line {line_no}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ManifestError(f"{key}: expected integer, got {value!r}") from None


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ManifestError(f"{key}: expected number, got {value!r}") from None


def _to_float_list(key: str, value: str) -> tuple[float, ...]:
    return tuple(_to_float(key, tok) for tok in value.split(",") if tok.strip() != "")


def _build_network(
    fields: dict[str, str], base_dir: Path
) -> tuple[NetworkSpec | None, Path | None, int]:
    if not fields:
        return None, None, 0
    vocabulary = _INT_KEYS | _FLOAT_KEYS | {"kind", "path"}
    bogus = set(fields) - vocabulary
    if bogus:
        raise ManifestError(f"unknown key 'network.{sorted(bogus)[0]}'")
    kind = fields.pop("kind", None)
    if kind is None:
        raise ManifestError("network section needs network.kind")
    if kind not in _NETWORK_KINDS:
        raise ManifestError(
            f"network.kind must be one of {sorted(_NETWORK_KINDS)}, got {kind!r}"
        )
    required, defaults = _NETWORK_KINDS[kind]
    seed = _to_int("network.seed", fields.pop("seed", "0"))
    allowed = required | set(defaults)
    unknown = set(fields) - allowed
    if unknown:
        raise ManifestError(
            f"network.{sorted(unknown)[0]} does not apply to kind={kind}"
        )
    missing = required - set(fields)
    if missing:
        raise ManifestError(f"network.{sorted(missing)[0]} is required for kind={kind}")

    if kind == "file":
        path = base_dir / fields["path"]
        if not path.is_file():
            raise ManifestError(f"network.path: no such file: {path}")
        return None, path, seed

    values: dict[str, object] = dict(defaults)
    for key, raw in fields.items():
        if key in _INT_KEYS:
            values[key] = _to_int(f"network.{key}", raw)
        elif key in _FLOAT_KEYS:
            values[key] = _to_float(f"network.{key}", raw)
        else:  # pragma: no cover - key sets above are exhaustive
            raise ManifestError(f"network.{key} is not recognized")
    values.setdefault("edges", 0)
    try:
        spec = NetworkSpec(
            variant=_KIND_TO_VARIANT[kind],
            n=int(values.get("n", 0)),
            target_edges=int(values.get("edges", 0)),
            width=int(values.get("width", 0)),
            height=int(values.get("height", 0)),
            k=int(values.get("k", 0)),
            cells=int(values.get("cells", 0)),
            inner_density=float(values.get("inner_density", 0.0)),
            core_fraction=float(values.get("core_fraction", 0.0)),
            core_density=float(values.get("core_density", 0.0)),
            rewire_prob=float(values.get("rewire_prob", 0.0)),
            add_prob=float(values.get("add_prob", 0.0)),
            seed_core_size=int(values.get("seed_core_size", 0)),
            attach_count=int(values.get("attach_count", 0)),
            isolated_extra=int(values.get("isolated_extra", 0)),
        )
    except ValueError as exc:
        raise ManifestError(f"network: {exc}") from None
    return spec, None, seed


def _build_params(fields: dict[str, str]) -> PayoffParams:
    preset_name = fields.pop("preset", None)
    explicit = {k for k in ("b", "c", "beta", "gamma", "sigma") if k in fields}
    if preset_name is not None and explicit:
        raise ManifestError("params.preset cannot be combined with explicit values")
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ManifestError(
                f"params.preset must be one of {sorted(PRESETS)}, got {preset_name!r}"
            )
        return PRESETS[preset_name]
    if not explicit:
        return PRESETS["default"]
    if explicit != {"b", "c", "beta", "gamma", "sigma"}:
        missing = {"b", "c", "beta", "gamma", "sigma"} - explicit
        raise ManifestError(f"params.{sorted(missing)[0]} missing (give all five or none)")
    try:
        return PayoffParams(
            b=_to_float("params.b", fields["b"]),
            c=_to_float("params.c", fields["c"]),
            beta=_to_float("params.beta", fields["beta"]),
            gamma=_to_float("params.gamma", fields["gamma"]),
            sigma=_to_float("params.sigma", fields["sigma"]),
        )
    except ValueError as exc:
        raise ManifestError(f"params: {exc}") from None


def _build_run(fields: dict[str, str]) -> dict | None:
    if not fields:
        return None
    unknown = set(fields) - _RUN_KEYS
    if unknown:
        raise ManifestError(f"run.{sorted(unknown)[0]} is not recognized")
    for req in ("p", "mu"):
        if req not in fields:
            raise ManifestError(f"run.{req} is required")
    update = fields.get("update", "sequential")
    if update not in _UPDATE_MODES:
        raise ManifestError(f"run.update must be sequential or synchronous, got {update!r}")
    return {
        "p": _to_float("run.p", fields["p"]),
        "mu": _to_float("run.mu", fields["mu"]),
        "ticks": _to_int("run.ticks", fields.get("ticks", "10000")),
        "seed": _to_int("run.seed", fields.get("seed", "0")),
        "update": _UPDATE_MODES[update],
    }


def _default_plan_settings() -> dict:
    return {
        "p_values": (0.001, 0.01, 0.1, 1.0),
        "mu_values": (0.0, 0.0001, 0.001, 0.01, 0.1),
        "replications": 30,
        "ticks": 10000,
        "base_seed": 0,
        "null_p": 1.0,
        "null_mu": 0.0,
        "measurement": "final",
        "tail_window": 1000,
        "update": UpdateMode.SEQUENTIAL_RANDOM_ORDER,
    }


def _build_plan(fields: dict[str, str]) -> dict | None:
    if not fields:
        return None
    unknown = set(fields) - _PLAN_KEYS
    if unknown:
        raise ManifestError(f"plan.{sorted(unknown)[0]} is not recognized")
    settings = _default_plan_settings()
    if "update" in fields:
        if fields["update"] not in _UPDATE_MODES:
            raise ManifestError(
                f"plan.update must be sequential or synchronous, got {fields['update']!r}"
            )
        settings["update"] = _UPDATE_MODES[fields["update"]]
    if "measurement" in fields:
        if fields["measurement"] not in ("final", "tail"):
            raise ManifestError(
                f"plan.measurement must be final or tail, got {fields['measurement']!r}"
            )
        settings["measurement"] = fields["measurement"]
    for key, caster in (
        ("p_values", _to_float_list), ("mu_values", _to_float_list),
        ("replications", _to_int), ("ticks", _to_int), ("base_seed", _to_int),
        ("null_p", _to_float), ("null_mu", _to_float), ("tail_window", _to_int),
    ):
        if key in fields:
            settings[key] = caster(f"plan.{key}", fields[key])
    return settings


def parse_manifest(text: str, base_dir: str | Path = ".") -> Manifest:
    pairs = _parse_lines(text)
    sections: dict[str, dict[str, str]] = {"network": {}, "params": {}, "run": {},
                                           "plan": {}, "output": {}}
    for key, value in pairs.items():
        section, _, rest = key.partition(".")
        if section not in sections or not rest or "." in rest:
            raise ManifestError(f"unknown key {key!r}")
        sections[section][rest] = value

    output = sections["output"]
    unknown = set(output) - {"dir"}
    if unknown:
        raise ManifestError(f"output.{sorted(unknown)[0]} is not recognized")

    spec, path, seed = _build_network(sections["network"], Path(base_dir))
    return Manifest(
        network_spec=spec,
        graph_path=path,
        network_seed=seed,
        params=_build_params(sections["params"]),
        run_settings=_build_run(sections["run"]),
        plan_settings=_build_plan(sections["plan"]),
        output_dir=output.get("dir"),
    )


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    return parse_manifest(text, base_dir=path.parent)
