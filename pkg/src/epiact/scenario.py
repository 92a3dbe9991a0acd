"""Scenario files: a sectioned ``key = value`` text format.

Example::

    [model]
    beta = 0.3
    ...
    [initial]
    s = 0.9999
    ...
    [numerics]
    t_end = 200
    k = 1
    [actuarial]
    discount = 0.0001   # force of interest per DAY

Unknown sections, unknown keys and duplicates are rejected; every error
carries the line number it refers to (overrides from ``--set`` have none).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .actuarial import ActuarialParams
from .errors import ConfigError, DomainError, ParameterError
from .integrator import DenominatorSpec, GridSpec
from .model import CompartmentState, ModelParams, VitalParams, validate_params

PLOTS = ("compartments", "classes", "empirical_forces", "forces_survival",
         "force_comparison", "reserve")

# scenario-level tolerance on the initial sum; anything inside is decimal
# rounding of the input and is rescaled onto the 1e-12 state constraint
INITIAL_SUM_TOL = 1e-9

_REQUIRED = object()

SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "model": {name: ("float", _REQUIRED) for name in
              ("beta", "kappa", "alpha", "p", "gamma_i", "gamma_a", "delta_i", "delta_a")},
    "vital": {"lambda_recruit": ("float", 0.0), "mu": ("float", 0.0)},
    "initial": {"s": ("float", _REQUIRED), "e": ("float", _REQUIRED),
                "i": ("float", _REQUIRED), "a": ("float", _REQUIRED),
                "r": ("float", 0.0), "d": ("float", 0.0),
                "renormalize": ("bool", False)},
    "numerics": {"t0": ("float", 0.0), "t_end": ("float", _REQUIRED),
                 "k": ("float", _REQUIRED), "mu_hat": ("float", 0.0)},
    "actuarial": {"discount": ("float", _REQUIRED), "horizon": ("float", None),
                  "premium": ("float", None), "b_i": ("float", 1.0),
                  "b_a": ("float", 1.0), "l_d": ("float", 0.0)},
    "outputs": {"plots": ("list", list(PLOTS)), "reserve_sweep": ("floats", [0.9, 1.0, 1.1])},
}
REQUIRED_SECTIONS = ("model", "initial", "numerics", "actuarial")


@dataclass(frozen=True)
class Outputs:
    plots: tuple[str, ...] = PLOTS
    reserve_sweep: tuple[float, ...] = (0.9, 1.0, 1.1)


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelParams
    vital: VitalParams
    initial: CompartmentState
    grid: GridSpec
    denominator: DenominatorSpec
    actuarial: ActuarialParams
    outputs: Outputs = field(default_factory=Outputs)
    canonical: str = ""

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical.encode("utf-8")).hexdigest()


@dataclass
class _Entry:
    value: str
    line: int | None


def _strip_comment(line: str) -> str:
    for marker in ("#", ";"):
        pos = line.find(marker)
        if pos >= 0:
            line = line[:pos]
    return line.strip()


def _tokenize(text: str) -> tuple[dict[str, dict[str, _Entry]], dict[str, int]]:
    sections: dict[str, dict[str, _Entry]] = {}
    headers: dict[str, int] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            current = line[1:-1].strip().lower()
            if current not in SCHEMA:
                raise ConfigError(
                    f"unknown section [{current}]; expected one of {', '.join(SCHEMA)}", lineno
                )
            if current in headers:
                raise ConfigError(f"section [{current}] appears twice", lineno)
            headers[current] = lineno
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if current is None:
            raise ConfigError("key outside of any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in SCHEMA[current]:
            raise ConfigError(
                f"unknown key {key!r} in [{current}]; allowed: {', '.join(SCHEMA[current])}", lineno
            )
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = _Entry(value, lineno)
    return sections, headers


def _apply_overrides(sections, overrides: Iterable[str]) -> None:
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().lower().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"override {item!r} names an unknown setting {section}.{key}")
        sections.setdefault(section, {})[key] = _Entry(value.strip(), None)


def _convert(kind: str, entry: _Entry, where: str):
    text = entry.value
    try:
        if kind == "float":
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "bool":
            lowered = text.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError
        items = [part.strip() for part in text.split(",") if part.strip()]
        if kind == "floats":
            return [float(part) for part in items]
        return items
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text!r} as {kind}", entry.line) from None


def _resolve(sections, headers):
    missing = [name for name in REQUIRED_SECTIONS if name not in sections]
    if missing:
        raise ConfigError("missing required section(s): " + ", ".join(f"[{m}]" for m in missing))
    values: dict[str, dict[str, object]] = {}
    lines: dict[tuple[str, str], int | None] = {}
    for section, keys in SCHEMA.items():
        given = sections.get(section, {})
        values[section] = {}
        for key, (kind, default) in keys.items():
            if key in given:
                values[section][key] = _convert(kind, given[key], f"{section}.{key}")
                lines[section, key] = given[key].line
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r} in [{section}]",
                                  headers.get(section))
            else:
                values[section][key] = default
    return values, lines


def _build(name: str, values, lines, headers) -> Scenario:
    def fail(section, key, message):
        raise ConfigError(message, lines.get((section, key), headers.get(section)))

    model_values = values["model"]
    try:
        model = validate_params(ModelParams(**model_values))
    except ParameterError as exc:
        key = next((k for k in model_values if str(exc).startswith(k + " ")), None)
        fail("model", key, str(exc))

    try:
        vital = VitalParams(**values["vital"])
    except ParameterError as exc:
        fail("vital", "mu" if "mu " in str(exc) else "lambda_recruit", str(exc))

    init = {k: values["initial"][k] for k in ("s", "e", "i", "a", "r", "d")}
    for key, value in init.items():
        if value < 0:
            fail("initial", key, f"initial fraction {key} must be >= 0, got {value!r}")
    total = math.fsum(init.values())
    if values["initial"]["renormalize"]:
        if not total > 0:
            fail("initial", "s", "initial fractions sum to zero; cannot renormalize")
        initial = CompartmentState.renormalized(**init)
    elif abs(total - 1.0) > INITIAL_SUM_TOL:
        raise ConfigError(
            f"initial fractions sum to {total!r}, not 1; hint: set renormalize=true to rescale",
            headers.get("initial"),
        )
    else:
        initial = CompartmentState.renormalized(**init)
    if not 1.0 - initial.d > 1e-12:
        fail("initial", "d", "initial state has no living population")

    num = values["numerics"]
    try:
        grid = GridSpec(num["t0"], num["t_end"], num["k"])
    except ParameterError as exc:
        fail("numerics", "k", str(exc))
    try:
        denominator = DenominatorSpec(num["mu_hat"])
    except ParameterError as exc:
        fail("numerics", "mu_hat", str(exc))

    act = dict(values["actuarial"])
    if act["horizon"] is None:
        act["horizon"] = grid.t_end - grid.t0
    try:
        actuarial = ActuarialParams(**act)
    except ParameterError as exc:
        key = next((k for k in act if str(exc).startswith(k + " ")), None)
        fail("actuarial", key, str(exc))
    end = grid.t0 + actuarial.horizon
    if end > grid.t_end + 1e-9:
        fail("actuarial", "horizon",
             f"policy horizon {actuarial.horizon!r} runs past the simulation end {grid.t_end!r}")
    if abs(grid.t0 + round(actuarial.horizon / grid.k) * grid.k - end) > 1e-9:
        fail("actuarial", "horizon", f"horizon {actuarial.horizon!r} is not a multiple of k={grid.k!r}")

    out = values["outputs"]
    plots = out["plots"]
    if [p.lower() for p in plots] == ["all"]:
        plots = list(PLOTS)
    elif [p.lower() for p in plots] == ["none"]:
        plots = []
    for plot in plots:
        if plot not in PLOTS:
            fail("outputs", "plots", f"unknown plot {plot!r}; choose from {', '.join(PLOTS)}")
    sweep = out["reserve_sweep"]
    if any(not f > 0 for f in sweep):
        fail("outputs", "reserve_sweep", "reserve_sweep factors must be > 0")
    outputs = Outputs(tuple(plots), tuple(sweep))

    canonical = "\n".join(
        f"{section}.{key}={values[section][key]!r}"
        for section in SCHEMA for key in SCHEMA[section]
    )
    return Scenario(name, model, vital, initial, grid, denominator, actuarial, outputs, canonical)


def parse_scenario_text(text: str, name: str = "scenario", overrides: Iterable[str] = ()) -> Scenario:
    sections, headers = _tokenize(text)
    _apply_overrides(sections, overrides)
    values, lines = _resolve(sections, headers)
    return _build(name, values, lines, headers)


def bundled_scenarios() -> list[str]:
    root = resources.files("epiact") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def parse_scenario(path, overrides: Iterable[str] = ()) -> Scenario:
    """Read a scenario file, or a bundled scenario by name (e.g. ``mexico2020``)."""
    path_str = str(path)
    candidate = Path(path_str)
    if not candidate.exists() and path_str in bundled_scenarios():
        text = (resources.files("epiact") / "scenarios" / f"{path_str}.ini").read_text("utf-8")
        return parse_scenario_text(text, path_str, overrides)
    text = candidate.read_text(encoding="utf-8")
    return parse_scenario_text(text, candidate.stem, overrides)


__all__ = ["Scenario", "Outputs", "PLOTS", "parse_scenario", "parse_scenario_text",
           "bundled_scenarios", "ConfigError", "DomainError"]
