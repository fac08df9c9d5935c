"""Experiment configuration files: loading, overrides and schema validation.

A config is a YAML mapping.  Top-level sections are fixed (see ``TOP_KEYS``);
the ``scan`` section is experiment specific and its allowed keys and
defaults live in ``SCAN_DEFAULTS``.  Validation never raises on a bad file:
it returns a list of :class:`Diagnostic` with the offending key path and,
where the YAML parser knows it, the line number.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigurationError

__all__ = [
    "EXPERIMENTS",
    "Diagnostic",
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "apply_overrides",
    "validate_mapping",
    "validate_config",
]

EXPERIMENTS = (
    "gauge-equivalence",
    "unboundedness-scan",
    "slater-scan",
    "depolarization",
    "maxwell-eom",
    "box-instability",
    "model-zoo",
    "stark",
    "field-energy-demo",
    "translation-check",
)

TOP_KEYS = {
    "experiment", "seed", "output", "jobs", "constants", "modes", "quantization_volume",
    "grid", "fock", "potential", "flags", "scan",
}
CONSTANT_KEYS = {"hbar", "m", "e", "c", "eps0"}
MODE_KEYS = {"omega", "lam", "epsilon_sign"}
GRID_KEYS = {"x_min", "x_max", "n_points", "boundary", "stencil_order"}
FOCK_KEYS = {"n_max"}
FLAG_KEYS = {"include_dip"}
POTENTIAL_KEYS = {
    "zero": set(),
    "harmonic": {"Omega", "center"},
    "gaussian_well": {"depth", "width", "center"},
    "soft_coulomb": {"charge", "softening", "center"},
    "tabulated": {"values"},
}

SCAN_DEFAULTS: dict[str, dict[str, Any]] = {
    "gauge-equivalence": {"n_max": [2, 4, 8, 16], "k": 5, "tol": 1e-6, "floor": 1e-8},
    "unboundedness-scan": {
        "a": [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0],
        "n_electrons": 1, "spacing": 3.0, "kappa": None, "photon_weights": [1.0, 1.0],
        "tail_start": 5.0, "slope_tol": 1e-8,
    },
    "slater-scan": {
        "a": [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0],
        "n_electrons": 3, "spacing": 3.0, "kappa": None, "photon_weights": [1.0, 1.0],
        "tail_start": 5.0, "slope_tol": 1e-8, "coulomb_tol": 1e-6,
    },
    "depolarization": {"n_electrons": [1, 2, 4], "ed": True, "k": 30, "ed_tol": 1e-3, "nm_tol": 1e-12},
    "maxwell-eom": {"n_electrons": 1, "tol": 1e-12},
    "box-instability": {
        "lengths": [10.0, 20.0, 40.0, 80.0], "spacing": 0.1, "field": 0.5, "displacement": 0.05,
        "edge_margin": 2.0, "cauchy_tol": 1e-8,
    },
    "model-zoo": {"n_atoms": [1, 2, 3], "tol": 1e-12},
    "stark": {
        "fields": [-0.02, -0.01, 0.01, 0.02], "mixing": 1.0, "tol": 1e-10, "max_iter": 500,
        "sos_tol": 0.01, "closed_form_tol": 1e-6,
    },
    "field-energy-demo": {"volume": 1.0},
    "translation-check": {"n_max": [5, 10, 20], "shift_sites": 5, "k": 4, "bulk_tol": 1e-10},
}

# sections each experiment actually reads; others are rejected to catch typos early
USES = {
    "gauge-equivalence": {"grid", "modes", "potential", "fock"},
    "unboundedness-scan": {"modes", "potential", "flags"},
    "slater-scan": {"modes", "potential", "flags"},
    "depolarization": {"modes", "grid", "fock"},
    "maxwell-eom": {"modes"},
    "box-instability": {"modes", "potential", "fock", "grid"},
    "model-zoo": {"modes", "grid", "potential", "fock"},
    "stark": {"modes", "grid", "potential"},
    "field-energy-demo": {"modes", "fock"},
    "translation-check": {"modes", "grid"},
}
ALWAYS = {"experiment", "seed", "output", "jobs", "constants", "quantization_volume", "scan"}


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.path}: {self.message}"


@dataclass
class ExperimentConfig:
    data: dict
    source: str = "<memory>"

    @property
    def experiment(self) -> str:
        return self.data["experiment"]

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def scan(self) -> dict:
        merged = copy.deepcopy(SCAN_DEFAULTS[self.experiment])
        merged.update(self.data.get("scan") or {})
        return merged

    def get(self, key, default=None):
        return self.data.get(key, default)


def _line_map(text: str) -> dict[str, int]:
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    out: dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{path}.{k.value}" if path else str(k.value)
                out[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = f"{path}.{i}"
                out[p] = v.start_mark.line + 1
                walk(v, p)

    if root is not None:
        walk(root, "")
    return out


def parse_config_text(text: str) -> tuple[dict | None, list[Diagnostic], dict[str, int]]:
    lines = _line_map(text)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        return None, [Diagnostic("<file>", f"YAML syntax error: {exc}", mark.line + 1 if mark else None)], lines
    if data is None:
        data = {}
    if not isinstance(data, dict):
        return None, [Diagnostic("<file>", "top level must be a mapping")], lines
    return data, [], lines


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as YAML scalars/lists."""
    out = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigurationError(f"override {item!r} has an empty key")
        value = yaml.safe_load(raw)
        node = out
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            else:
                node = node.setdefault(p, {})
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return out


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _positive(v) -> bool:
    return _is_number(v) and v > 0


def validate_mapping(data: dict, lines: dict[str, int] | None = None) -> list[Diagnostic]:
    lines = lines or {}
    diags: list[Diagnostic] = []

    def bad(path, msg):
        diags.append(Diagnostic(path, msg, lines.get(path)))

    def unknown(section: dict, allowed: set, prefix: str):
        for k in section:
            if k not in allowed:
                bad(f"{prefix}{k}", f"unknown key; allowed: {', '.join(sorted(allowed))}")

    unknown(data, TOP_KEYS, "")
    exp = data.get("experiment")
    if exp is None:
        bad("experiment", f"missing; valid names: {', '.join(EXPERIMENTS)}")
        return diags
    if exp not in EXPERIMENTS:
        bad("experiment", f"unknown experiment {exp!r}; valid names: {', '.join(EXPERIMENTS)}")
        return diags
    for k in data:
        if k in TOP_KEYS and k not in ALWAYS and k not in USES[exp]:
            bad(k, f"section not used by experiment {exp!r}")

    if "seed" in data and (not isinstance(data["seed"], int) or isinstance(data["seed"], bool) or data["seed"] < 0):
        bad("seed", "must be a non-negative integer")
    if "jobs" in data and (not isinstance(data["jobs"], int) or data["jobs"] < 1):
        bad("jobs", "must be a positive integer")
    if "output" in data and not isinstance(data["output"], str):
        bad("output", "must be a file path")

    consts = data.get("constants") or {}
    if not isinstance(consts, dict):
        bad("constants", "must be a mapping")
    else:
        unknown(consts, CONSTANT_KEYS, "constants.")
        for k, v in consts.items():
            if k in CONSTANT_KEYS and not _positive(v):
                bad(f"constants.{k}", "must be a positive number")

    if "quantization_volume" in data and data["quantization_volume"] is not None and not _positive(data["quantization_volume"]):
        bad("quantization_volume", "must be a positive number")

    if "modes" in USES[exp]:
        modes = data.get("modes")
        if not isinstance(modes, list) or not modes:
            bad("modes", "must be a non-empty list of modes")
        else:
            for i, m in enumerate(modes):
                p = f"modes.{i}"
                if not isinstance(m, dict):
                    bad(p, "mode must be a mapping")
                    continue
                unknown(m, MODE_KEYS, p + ".")
                if not _positive(m.get("omega")):
                    bad(f"{p}.omega", f"mode {i}: omega must be a positive number (got {m.get('omega')!r})")
                if "lam" in m and not _is_number(m["lam"]):
                    bad(f"{p}.lam", f"mode {i}: lam must be a finite number")
                if "epsilon_sign" in m and m["epsilon_sign"] not in (1, -1):
                    bad(f"{p}.epsilon_sign", f"mode {i}: epsilon_sign must be +1 or -1")
            if exp in ("depolarization", "field-energy-demo", "model-zoo") and len(modes) != 1:
                bad("modes", f"experiment {exp!r} uses exactly one mode")

    if "grid" in USES[exp] and exp != "box-instability":
        g = data.get("grid")
        if not isinstance(g, dict):
            bad("grid", "missing grid section")
        else:
            unknown(g, GRID_KEYS, "grid.")
            for k in ("x_min", "x_max"):
                if not _is_number(g.get(k)):
                    bad(f"grid.{k}", "must be a number")
            if _is_number(g.get("x_min")) and _is_number(g.get("x_max")) and not g["x_max"] > g["x_min"]:
                bad("grid.x_max", "must exceed x_min")
            n = g.get("n_points")
            if not isinstance(n, int) or isinstance(n, bool) or n < 3:
                bad("grid.n_points", "must be an integer >= 3")
            if g.get("boundary", "dirichlet") not in ("dirichlet", "periodic"):
                bad("grid.boundary", "must be 'dirichlet' or 'periodic'")
            if g.get("stencil_order", 2) not in (2, 4):
                bad("grid.stencil_order", "must be 2 or 4")
            if exp in ("depolarization", "translation-check") and g.get("boundary") != "periodic":
                bad("grid.boundary", f"experiment {exp!r} needs a periodic grid")
    elif exp == "box-instability" and "grid" in data:
        g = data["grid"]
        if not isinstance(g, dict):
            bad("grid", "must be a mapping")
        else:
            unknown(g, {"stencil_order"}, "grid.")
            if g.get("stencil_order", 2) not in (2, 4):
                bad("grid.stencil_order", "must be 2 or 4")

    if "fock" in USES[exp]:
        f = data.get("fock")
        if exp != "gauge-equivalence":
            if not isinstance(f, dict):
                bad("fock", "missing fock section")
            else:
                unknown(f, FOCK_KEYS, "fock.")
                n = f.get("n_max")
                if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                    bad("fock.n_max", "must be an integer >= 1")
        elif f is not None:
            bad("fock", "gauge-equivalence takes its cutoffs from scan.n_max")

    if "potential" in USES[exp]:
        pot = data.get("potential")
        if not isinstance(pot, dict):
            bad("potential", "missing potential section")
        else:
            kind = pot.get("kind")
            if kind not in POTENTIAL_KEYS:
                bad("potential.kind", f"unknown kind {kind!r}; valid kinds: {', '.join(POTENTIAL_KEYS)}")
            else:
                unknown(pot, POTENTIAL_KEYS[kind] | {"kind"}, "potential.")
                if kind == "harmonic" and not _positive(pot.get("Omega")):
                    bad("potential.Omega", "must be a positive number")
                if kind == "gaussian_well":
                    if not (_is_number(pot.get("depth")) and pot["depth"] >= 0):
                        bad("potential.depth", "must be a non-negative number")
                    if not _positive(pot.get("width")):
                        bad("potential.width", "must be a positive number")
                if kind == "soft_coulomb":
                    if not _is_number(pot.get("charge")):
                        bad("potential.charge", "must be a number")
                    if not _positive(pot.get("softening")):
                        bad("potential.softening", "must be a positive number")
                if kind == "tabulated" and not isinstance(pot.get("values"), list):
                    bad("potential.values", "must be a list of numbers")

    if "flags" in data:
        fl = data["flags"]
        if not isinstance(fl, dict):
            bad("flags", "must be a mapping")
        else:
            unknown(fl, FLAG_KEYS, "flags.")
            if "include_dip" in fl and not isinstance(fl["include_dip"], bool):
                bad("flags.include_dip", "must be true or false")

    scan = data.get("scan") or {}
    if not isinstance(scan, dict):
        bad("scan", "must be a mapping")
    else:
        unknown(scan, set(SCAN_DEFAULTS[exp]), "scan.")
    return diags


def load_config(path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
    """Read, override and validate; raises ConfigurationError listing every problem."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}") from exc
    data, diags, lines = parse_config_text(text)
    if data is not None:
        if overrides:
            data = apply_overrides(data, overrides)
        diags = validate_mapping(data, lines)
    if diags:
        raise ConfigurationError("invalid configuration:\n" + "\n".join(f"  {d}" for d in diags))
    return ExperimentConfig(data, str(p))


def validate_config(path: str | Path) -> list[Diagnostic]:
    """Diagnostics for a config file; empty when it is well formed.  Unreadable files raise."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}") from exc
    data, diags, lines = parse_config_text(text)
    if data is None:
        return diags
    return validate_mapping(data, lines)
