"""Scenario runner and command-line interface.

A scenario is a JSON document naming a lattice, an initial state, a background
potential, one experiment from the registry, and output settings.  Running a
scenario produces one CSV and/or JSON artifact per experiment plus a combined
``report.json`` / ``report.txt`` pair; every check in the report carries the
measured value and the tolerance it was held to.

Determinism: parsing fills defaults so that a parsed configuration serializes
to a unique canonical form, numeric artifacts are written with 17 significant
digits, and ``report.json`` contains no timestamps — two runs of the same
configuration are byte-identical (only ``report.txt`` carries wall-clock
information in its header).

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
validation error, 3 resource ceiling exceeded.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import sparse

from . import background as bg
from . import dynamics as dyn
from . import fockspace as fk
from . import schwinger as sw
from .lattice import ConfigurationError, Lattice, ResourceError, integrate, spectral_derivative

__all__ = [
    "CheckResult",
    "ConfigValidationError",
    "EXPERIMENTS",
    "ExperimentResult",
    "RunReport",
    "ScenarioConfig",
    "load_config",
    "main",
    "parse_scenario",
    "run_scenario",
    "run_suite",
    "scenario_to_dict",
    "serialize_config",
]


# ---------------------------------------------------------------------------
# configuration schema


class ConfigValidationError(ConfigurationError):
    """One or more schema violations; ``errors`` lists them all."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully-resolved scenario: every field explicit, defaults filled."""

    name: str
    lattice: Lattice
    state: dict
    potential: dict
    gauge: dict | None
    experiment: str
    params: dict
    horizon: float
    time_step: float
    output: dict


@dataclass(frozen=True)
class CheckResult:
    """One named deviation held to a tolerance; passes iff value <= tolerance."""

    name: str
    value: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance


@dataclass(frozen=True)
class ExperimentResult:
    """Tabular data plus checks produced by one experiment runner."""

    columns: tuple[str, ...]
    rows: list[tuple]
    checks: list[CheckResult]
    values: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RunReport:
    """Outcome of one scenario run."""

    name: str
    experiment: str
    result: ExperimentResult
    wall_seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.result.checks)


_DEFAULT_LATTICE = {"domain_length": 2.0 * math.pi, "cutoff": 3, "charge": 1.0}
_DEFAULT_OUTPUT = {"directory": "out", "formats": ["csv", "json"]}
_NAME_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")

_TOP_KEYS = {
    "name",
    "lattice",
    "state",
    "potential",
    "gauge",
    "experiment",
    "params",
    "horizon",
    "time_step",
    "output",
}

_STATE_KEYS = {
    "vacuum": set(),
    "regularized": {"r_cut"},
    "two-electron": {"p", "q_m"},
    "occupation": {"bits"},
}

_GAUGE_PARAMS = {
    "uniform": {"rate": "number"},
    "harmonic": {"amplitude": "number", "harmonic": "int", "frequency": "number"},
}

_POTENTIAL_PARAMS = {
    "zero": {},
    "uniform-a0": {"amplitude": "number", "frequency": "number"},
    "uniform-a1": {"amplitude": "number", "frequency": "number"},
    "gaussian-pulse-a0": {
        "amplitude": "number",
        "harmonic": "int",
        "center": "number",
        "width": "number",
    },
    "traveling-wave": {"amplitude": "number", "harmonic": "int"},
    "pure-gauge": {"gauge": "str", "band": "int"},
}


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _typed(value, kind: str) -> bool:
    if kind == "number":
        return _is_number(value)
    if kind == "int":
        return _is_int(value)
    if kind == "list":
        return isinstance(value, list)
    return isinstance(value, str)


def _check_param_block(params, schema: dict, path: str, errors: list[str]) -> None:
    for key in sorted(set(params) - set(schema)):
        errors.append(f"{path}.{key}: unknown parameter (allowed: {sorted(schema) or 'none'})")
    for key, kind in schema.items():
        if key in params and not _typed(params[key], kind):
            errors.append(f"{path}.{key}: expected {kind}, got {params[key]!r}")


def parse_scenario(raw, *, where: str = "scenario") -> ScenarioConfig:
    """Validate one raw scenario mapping, filling defaults.

    Collects *all* violations before raising, each prefixed with the dotted
    path of the offending field, so a bad file is fixable in one pass.
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigValidationError([f"{where}: expected a JSON object, got {type(raw).__name__}"])

    for key in sorted(set(raw) - _TOP_KEYS):
        errors.append(f"{key}: unknown field (allowed: {sorted(_TOP_KEYS)})")

    # experiment first: several sections are validated against it
    experiment = raw.get("experiment")
    spec = None
    if not isinstance(experiment, str):
        errors.append("experiment: required string naming one of " f"{sorted(EXPERIMENTS)}")
        experiment = ""
    elif experiment not in EXPERIMENTS:
        errors.append(f"experiment: unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
    else:
        spec = EXPERIMENTS[experiment]

    name = raw.get("name", experiment or "scenario")
    if not isinstance(name, str) or not _NAME_PATTERN.fullmatch(name):
        errors.append(
            "name: must be a filesystem-safe string of letters, digits, '.', '_' or '-'"
        )
        name = "scenario"

    # lattice
    lat_raw = raw.get("lattice", {})
    lattice = None
    cutoff = _DEFAULT_LATTICE["cutoff"]
    if not isinstance(lat_raw, dict):
        errors.append("lattice: expected an object")
    else:
        for key in sorted(set(lat_raw) - set(_DEFAULT_LATTICE)):
            errors.append(f"lattice.{key}: unknown field (allowed: {sorted(_DEFAULT_LATTICE)})")
        merged = {**_DEFAULT_LATTICE, **{k: v for k, v in lat_raw.items() if k in _DEFAULT_LATTICE}}
        if not _is_number(merged["domain_length"]) or merged["domain_length"] <= 0:
            errors.append("lattice.domain_length: must be a positive number")
        if not _is_int(merged["cutoff"]) or merged["cutoff"] < 1:
            errors.append("lattice.cutoff: must be an integer >= 1")
        else:
            cutoff = merged["cutoff"]
        if not _is_number(merged["charge"]) or merged["charge"] == 0:
            errors.append("lattice.charge: must be a nonzero number")
        if not errors or all(not e.startswith("lattice.") for e in errors):
            lattice = Lattice(
                length=float(merged["domain_length"]),
                cutoff=int(merged["cutoff"]),
                charge=float(merged["charge"]),
            )

    # state
    state_raw = raw.get("state", {"kind": "vacuum"})
    state = {"kind": "vacuum"}
    if not isinstance(state_raw, dict):
        errors.append("state: expected an object")
    else:
        kind = state_raw.get("kind")
        if kind not in _STATE_KEYS:
            errors.append(f"state.kind: unknown kind {kind!r}; choose from {sorted(_STATE_KEYS)}")
        else:
            allowed = _STATE_KEYS[kind] | {"kind"}
            for key in sorted(set(state_raw) - allowed):
                errors.append(f"state.{key}: unknown field for kind {kind!r} (allowed: {sorted(allowed)})")
            state = {"kind": kind}
            if kind == "regularized":
                r_cut = state_raw.get("r_cut")
                if not _is_int(r_cut) or not 1 <= r_cut <= cutoff:
                    errors.append(f"state.r_cut: must be an integer in [1, cutoff={cutoff}]")
                else:
                    state["r_cut"] = r_cut
            elif kind == "two-electron":
                labels = {}
                for key in ("p", "q_m"):
                    value = state_raw.get(key)
                    if not _is_int(value) or not 1 <= value <= cutoff:
                        errors.append(f"state.{key}: must be an integer momentum label in [1, cutoff={cutoff}]")
                    else:
                        labels[key] = value
                if len(labels) == 2 and labels["p"] == labels["q_m"]:
                    errors.append("state.q_m: must differ from state.p (distinct mode pair)")
                state.update(labels)
            elif kind == "occupation":
                bits = state_raw.get("bits")
                if not isinstance(bits, list) or not all(_is_int(b) for b in bits):
                    errors.append("state.bits: must be a list of integers")
                elif any(not 0 <= b < 4 * cutoff for b in bits):
                    errors.append(f"state.bits: every bit must lie in [0, {4 * cutoff - 1}]")
                elif len(set(bits)) != len(bits):
                    errors.append("state.bits: duplicate bit indices")
                else:
                    state["bits"] = list(bits)

    # potential
    pot_raw = raw.get("potential", {"preset": "zero"})
    potential = {"preset": "zero", "params": {}}
    if not isinstance(pot_raw, dict):
        errors.append("potential: expected an object")
    else:
        for key in sorted(set(pot_raw) - {"preset", "params"}):
            errors.append(f"potential.{key}: unknown field (allowed: ['params', 'preset'])")
        preset = pot_raw.get("preset", "zero")
        pot_params = pot_raw.get("params", {})
        if preset not in _POTENTIAL_PARAMS:
            errors.append(
                f"potential.preset: unknown preset {preset!r}; choose from {sorted(_POTENTIAL_PARAMS)}"
            )
        elif not isinstance(pot_params, dict):
            errors.append("potential.params: expected an object")
        else:
            schema = dict(_POTENTIAL_PARAMS[preset])
            if preset == "pure-gauge":
                gauge_name = pot_params.get("gauge", "harmonic")
                if not isinstance(gauge_name, str) or gauge_name not in _GAUGE_PARAMS:
                    errors.append(
                        f"potential.params.gauge: unknown gauge preset; choose from {sorted(_GAUGE_PARAMS)}"
                    )
                else:
                    schema.update(_GAUGE_PARAMS[gauge_name])
            _check_param_block(pot_params, schema, "potential.params", errors)
            if "harmonic" in pot_params and _is_int(pot_params["harmonic"]):
                if not 1 <= pot_params["harmonic"] <= 2 * cutoff:
                    errors.append(
                        f"potential.params.harmonic: must lie in [1, {2 * cutoff}] to be grid-resolvable"
                    )
            if "band" in pot_params and _is_int(pot_params["band"]):
                if not 0 <= pot_params["band"] <= 2 * cutoff:
                    errors.append(f"potential.params.band: must lie in [0, {2 * cutoff}]")
            if "width" in pot_params and _is_number(pot_params["width"]) and pot_params["width"] <= 0:
                errors.append("potential.params.width: must be positive")
            potential = {"preset": preset, "params": dict(pot_params)}
        if spec is not None and spec.potential_presets is not None:
            if potential["preset"] not in spec.potential_presets:
                errors.append(
                    f"potential.preset: experiment {experiment!r} supports only "
                    f"{sorted(spec.potential_presets)}"
                )

    # gauge (only meaningful for the gauge-check experiment)
    gauge_raw = raw.get("gauge")
    gauge = None
    if gauge_raw is not None:
        if spec is not None and not spec.uses_gauge:
            errors.append("gauge: only the 'gauge-check' experiment uses a gauge section")
        if not isinstance(gauge_raw, dict):
            errors.append("gauge: expected an object")
        else:
            for key in sorted(set(gauge_raw) - {"preset", "params"}):
                errors.append(f"gauge.{key}: unknown field (allowed: ['params', 'preset'])")
            gpreset = gauge_raw.get("preset", "harmonic")
            gparams = gauge_raw.get("params", {})
            if gpreset not in _GAUGE_PARAMS:
                errors.append(f"gauge.preset: unknown preset {gpreset!r}; choose from {sorted(_GAUGE_PARAMS)}")
            elif not isinstance(gparams, dict):
                errors.append("gauge.params: expected an object")
            else:
                _check_param_block(gparams, _GAUGE_PARAMS[gpreset], "gauge.params", errors)
                if "harmonic" in gparams and _is_int(gparams["harmonic"]):
                    if not 1 <= gparams["harmonic"] <= 2 * cutoff:
                        errors.append(
                            f"gauge.params.harmonic: must lie in [1, {2 * cutoff}] to be grid-resolvable"
                        )
                gauge = {"preset": gpreset, "params": dict(gparams)}
    elif spec is not None and spec.uses_gauge:
        errors.append("gauge: the 'gauge-check' experiment requires a gauge section")

    # experiment parameters and state requirements
    params_raw = raw.get("params", {})
    params: dict = {}
    if not isinstance(params_raw, dict):
        errors.append("params: expected an object")
    elif spec is not None:
        _check_param_block(params_raw, spec.params, "params", errors)
        params = dict(params_raw)
    if spec is not None and spec.state_kinds is not None and state["kind"] not in spec.state_kinds:
        errors.append(
            f"state.kind: experiment {experiment!r} requires one of {sorted(spec.state_kinds)}"
        )
    if spec is not None:
        spec.validate(state=state, params=params, cutoff=cutoff, errors=errors)

    # timing
    horizon = raw.get("horizon", 1.0)
    time_step = raw.get("time_step", 0.01)
    if not _is_number(horizon) or horizon <= 0:
        errors.append("horizon: must be a positive number")
    if not _is_number(time_step) or time_step <= 0:
        errors.append("time_step: must be a positive number")
    elif _is_number(horizon) and time_step > horizon:
        errors.append("time_step: must not exceed the horizon")
    if lattice is not None and _is_number(time_step) and time_step > lattice.spacing + 1e-12:
        errors.append(
            f"time_step: must not exceed the grid spacing {lattice.spacing:.6g} "
            "(characteristic integration leaves the resolved band)"
        )

    # output
    out_raw = raw.get("output", {})
    output = dict(_DEFAULT_OUTPUT)
    if not isinstance(out_raw, dict):
        errors.append("output: expected an object")
    else:
        for key in sorted(set(out_raw) - set(_DEFAULT_OUTPUT)):
            errors.append(f"output.{key}: unknown field (allowed: {sorted(_DEFAULT_OUTPUT)})")
        directory = out_raw.get("directory", _DEFAULT_OUTPUT["directory"])
        formats = out_raw.get("formats", _DEFAULT_OUTPUT["formats"])
        if not isinstance(directory, str) or not directory:
            errors.append("output.directory: must be a nonempty string")
            directory = _DEFAULT_OUTPUT["directory"]
        if (
            not isinstance(formats, list)
            or not formats
            or not all(isinstance(f, str) for f in formats)
        ):
            errors.append("output.formats: must be a nonempty list of format names")
            formats = list(_DEFAULT_OUTPUT["formats"])
        else:
            for fmt in sorted(set(formats) - {"csv", "json"}):
                errors.append(f"output.formats: unknown format {fmt!r} (allowed: ['csv', 'json'])")
            if len(set(formats)) != len(formats):
                errors.append("output.formats: duplicate entries")
        output = {"directory": directory, "formats": sorted(set(formats) & {"csv", "json"}) or ["csv"]}

    if errors:
        raise ConfigValidationError([f"{where}.{e}" if where else e for e in errors])
    assert lattice is not None
    return ScenarioConfig(
        name=name,
        lattice=lattice,
        state=state,
        potential=potential,
        gauge=gauge,
        experiment=experiment,
        params=params,
        horizon=float(horizon),
        time_step=float(time_step),
        output=output,
    )


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Fully-explicit mapping; parsing it again reproduces ``cfg``."""
    data = {
        "name": cfg.name,
        "lattice": {
            "domain_length": cfg.lattice.length,
            "cutoff": cfg.lattice.cutoff,
            "charge": cfg.lattice.charge,
        },
        "state": dict(cfg.state),
        "potential": {"preset": cfg.potential["preset"], "params": dict(cfg.potential["params"])},
        "experiment": cfg.experiment,
        "params": dict(cfg.params),
        "horizon": cfg.horizon,
        "time_step": cfg.time_step,
        "output": {"directory": cfg.output["directory"], "formats": list(cfg.output["formats"])},
    }
    if cfg.gauge is not None:
        data["gauge"] = {"preset": cfg.gauge["preset"], "params": dict(cfg.gauge["params"])}
    return data


def serialize_config(scenarios: list[ScenarioConfig]) -> str:
    """Canonical JSON form; ``load_config`` of the result round-trips."""
    if len(scenarios) == 1:
        payload: dict = scenario_to_dict(scenarios[0])
    else:
        payload = {"scenarios": [scenario_to_dict(s) for s in scenarios]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_config(path) -> list[ScenarioConfig]:
    """Parse a scenario file (single object or {"scenarios": [...]})."""
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"{path}: not valid JSON ({exc})"]) from exc
    if isinstance(payload, dict) and "scenarios" in payload:
        extra = sorted(set(payload) - {"scenarios"})
        errors = [f"{k}: unknown field next to 'scenarios'" for k in extra]
        entries = payload["scenarios"]
        if not isinstance(entries, list) or not entries:
            raise ConfigValidationError(errors + ["scenarios: must be a nonempty list"])
        scenarios = []
        for i, entry in enumerate(entries):
            try:
                scenarios.append(parse_scenario(entry, where=f"scenarios[{i}]"))
            except ConfigValidationError as exc:
                errors.extend(exc.errors)
        if errors:
            raise ConfigValidationError(errors)
        names = [s.name for s in scenarios]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ConfigValidationError([f"scenarios: duplicate scenario names {dupes}"])
        directories = {s.output["directory"] for s in scenarios}
        if len(directories) > 1:
            raise ConfigValidationError(
                [f"scenarios: all scenarios in one file must share output.directory, got {sorted(directories)}"]
            )
        return scenarios
    return [parse_scenario(payload, where="")] if isinstance(payload, dict) else _reject(payload)


def _reject(payload):
    raise ConfigValidationError(
        [f"configuration root: expected an object, got {type(payload).__name__}"]
    )


# ---------------------------------------------------------------------------
# experiment registry


@dataclass(frozen=True)
class ExperimentSpec:
    """Registry entry: metadata, constraints, and the runner."""

    name: str
    description: str
    runner: Callable[[ScenarioConfig], ExperimentResult]
    needs_fock: bool = True
    params: dict = field(default_factory=dict)
    state_kinds: frozenset | None = None
    potential_presets: frozenset | None = None
    uses_gauge: bool = False
    extra_validate: Callable[..., None] | None = None

    def validate(self, *, state, params, cutoff, errors) -> None:
        if self.extra_validate is not None:
            self.extra_validate(state=state, params=params, cutoff=cutoff, errors=errors)


def _build_state(cfg: ScenarioConfig) -> np.ndarray:
    lat, state = cfg.lattice, cfg.state
    if state["kind"] == "vacuum":
        return fk.vacuum_standard(lat)
    if state["kind"] == "regularized":
        return fk.vacuum_regularized(lat, state["r_cut"])
    if state["kind"] == "two-electron":
        return fk.two_electron_state(lat, state["p"], state["q_m"])
    return fk.occupation_state(lat, state["bits"])


def _build_potential(cfg: ScenarioConfig) -> bg.Background:
    return bg.background_preset(
        cfg.lattice,
        cfg.potential["preset"],
        dict(cfg.potential["params"]),
        time_step=cfg.time_step,
        horizon=cfg.horizon,
    )


def _build_gauge(cfg: ScenarioConfig) -> bg.GaugeFunction:
    assert cfg.gauge is not None
    return bg.gauge_preset(cfg.lattice, cfg.gauge["preset"], dict(cfg.gauge["params"]))


def _store_every(cfg: ScenarioConfig, target: int = 16) -> int:
    steps = max(1, math.ceil(cfg.horizon / cfg.time_step - 1e-12))
    return max(1, steps // target)


def _sparse_max(m) -> float:
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def _anti(a, b):
    return a @ b + b @ a


def _run_car_identities(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    fk._check_cutoff(lat)
    nmodes = 4 * lat.cutoff
    ladders = fk.ladder_matrices(nmodes)
    iden = sparse.identity(fk.sector_dim(lat) ** 2, format="csr")
    worst_mixed = worst_same = 0.0
    for a in range(nmodes):
        for b in range(nmodes):
            gap = _anti(ladders[a], ladders[b].conj().T)
            if a == b:
                gap = gap - iden
            worst_mixed = max(worst_mixed, _sparse_max(gap))
            if b >= a:
                worst_same = max(worst_same, _sparse_max(_anti(ladders[a], ladders[b])))
    up, down = fk.field_operator_samples(lat)
    n = lat.npoints
    worst_delta = worst_cross = 0.0
    for k in range(n):
        for j in range(n):
            expected = ((n if k == j else 0) - 1) / lat.length
            for comp in (up, down):
                gap = _anti(comp[k], comp[j].conj().T) - expected * iden
                worst_delta = max(worst_delta, _sparse_max(gap))
            worst_cross = max(worst_cross, _sparse_max(_anti(up[k], down[j].conj().T)))
            worst_cross = max(worst_cross, _sparse_max(_anti(up[k], up[j])))
    rows = [
        ("mode-mixed-pair", worst_mixed),
        ("mode-same-kind", worst_same),
        ("field-point-pair", worst_delta),
        ("field-disjoint", worst_cross),
    ]
    checks = [
        CheckResult("mode-anticommutators", max(worst_mixed, worst_same), 1e-14),
        CheckResult("field-sample-delta", worst_delta, 1e-12),
        CheckResult("field-disjoint-zero", worst_cross, 1e-14),
    ]
    return ExperimentResult(("identity", "worst_deviation"), rows, checks)


def _run_vacuum_energies(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    kappa = lat.kappa

    def sea_energy(r: int) -> float:
        return -2.0 * kappa * (r * (r + 1) // 2)

    rows: list[tuple] = []
    closed_dev = 0.0
    standard = fk.free_energy_expectation(lat, fk.vacuum_standard(lat))
    rows.append(("standard-sea", lat.cutoff, standard, sea_energy(lat.cutoff)))
    closed_dev = abs(standard - sea_energy(lat.cutoff))
    for r in range(1, lat.cutoff + 1):
        measured = fk.free_energy_expectation(lat, fk.vacuum_regularized(lat, r))
        rows.append(("reduced-sea", r, measured, sea_energy(r)))
        closed_dev = max(closed_dev, abs(measured - sea_energy(r)))

    r_cut = cfg.state.get("r_cut", lat.cutoff)
    base = fk.vacuum_regularized(lat, r_cut)
    base_energy = fk.free_energy_expectation(lat, base)
    lowering_dev = 0.0
    for mode in fk.mode_table(lat):
        if mode.species != "positron" or abs(mode.label) <= r_cut:
            continue
        lowered = fk.apply_creator(lat, base, mode.index)
        measured = fk.free_energy_expectation(lat, lowered)
        expected = base_energy - abs(mode.label) * kappa
        rows.append(("lowered", mode.label, measured, expected))
        lowering_dev = max(lowering_dev, abs(measured - expected))

    samples = cfg.params.get("samples", 100)
    rng = np.random.default_rng(2026)
    dim = fk.sector_dim(lat) ** 2
    minimum = math.inf
    for _ in range(samples):
        vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        minimum = min(minimum, fk.free_energy_expectation(lat, vec))
    rows.append(("random-minimum", samples, minimum, standard))

    checks = [
        CheckResult("closed-form-energies", closed_dev, 1e-12),
        CheckResult("sea-hole-lowering", lowering_dev, 1e-12),
        CheckResult("standard-sea-lower-bound", max(0.0, standard - minimum), 1e-12),
    ]
    values = {"standard-energy": standard, "sampled-minimum": minimum}
    return ExperimentResult(("family", "label", "energy", "expected"), rows, checks, values)


def _run_current_profile(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    p, q_m = cfg.state["p"], cfg.state["q_m"]
    state = _build_state(cfg)
    samples = cfg.params.get("samples", 21)
    times = np.linspace(0.0, cfg.horizon, samples)
    series = dyn.heisenberg_expectation(lat, state, times=times)
    z = lat.grid()
    closed = (lat.charge / lat.length) * (
        1.0 + np.cos((p - q_m) * lat.kappa * (z[None, :] - times[:, None]))
    )
    shape_dev = float(np.abs(series.current - closed).max())
    r1, r2 = dyn.continuity_residuals(lat, series)
    totals = np.array([integrate(row, lat) for row in series.charge])
    conservation = float(np.abs(totals - totals[0]).max())
    rows = [
        (float(t), float(zz), float(series.current[i, k]), float(series.charge[i, k]))
        for i, t in enumerate(times)
        for k, zz in enumerate(z)
    ]
    checks = [
        CheckResult("traveling-profile-shape", shape_dev, 1e-12),
        CheckResult("transport-continuity", max(r1, r2), 1e-6),
        CheckResult("charge-conservation", conservation, 1e-12),
    ]
    values = {"charge-integral": float(totals[0])}
    return ExperimentResult(("time", "z", "current", "charge"), rows, checks, values)


def _run_picture_equivalence(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    gaps = dyn.picture_equivalence_check(
        lat, _build_state(cfg), _build_potential(cfg), store_every=_store_every(cfg)
    )
    rows = [(name, gaps[name]) for name in ("current", "charge", "energy")]
    checks = [CheckResult(f"{name}-picture-gap", gaps[name], 1e-8) for name, _ in rows]
    return ExperimentResult(("observable", "max_gap"), rows, checks)


def _run_gauge_check(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    assert cfg.gauge is not None
    tolerance = 1e-9 if cfg.gauge["preset"] == "uniform" else 1e-4
    gaps = dyn.gauge_invariance_check(
        lat,
        _build_state(cfg),
        _build_potential(cfg),
        _build_gauge(cfg),
        store_every=_store_every(cfg),
    )
    rows = [(name, gaps[name]) for name in ("current", "charge", "energy")]
    checks = [CheckResult(f"{name}-gauge-shift", gaps[name], tolerance) for name, _ in rows]
    return ExperimentResult(("observable", "max_deviation"), rows, checks)


def _run_energy_theorem(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    tolerance = 1e-3 if cfg.potential["preset"] == "gaussian-pulse-a0" else 1e-6
    res = dyn.energy_theorem_check(lat, _build_state(cfg), _build_potential(cfg))
    rows = [
        ("energy-change", res.lhs),
        ("field-work", res.rhs),
        ("relative-error", res.relative_error),
    ]
    checks = [CheckResult("work-energy-balance", res.relative_error, tolerance)]
    values = {"energy-change": res.lhs, "field-work": res.rhs}
    return ExperimentResult(("quantity", "value"), rows, checks, values)


def _run_energy_unboundedness(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    p, q_m = cfg.state["p"], cfg.state["q_m"]
    t_f = cfg.params.get("final_time", 2.0)
    count = cfg.params.get("drives", 9)
    first = dyn.unboundedness_scenario(lat, p, q_m, 0.0, t_f)
    drives = np.linspace(0.0, 2.0 * first.f_star, count)
    energies = np.array(
        [dyn.unboundedness_scenario(lat, p, q_m, f, t_f).energy_above_vacuum for f in drives]
    )
    slope, intercept = np.polyfit(drives, energies, 1)
    affine_dev = float(np.abs(energies - (slope * drives + intercept)).max())
    at_star = dyn.unboundedness_scenario(lat, p, q_m, first.f_star, t_f)
    rows = [(float(f), float(e)) for f, e in zip(drives, energies)]
    checks = [
        CheckResult("affine-descent", affine_dev, 1e-10),
        CheckResult("threshold-crossing", abs(at_star.energy_above_vacuum), 1e-10),
        CheckResult("unbounded-below", abs(energies[-1] + first.gap), 1e-10),
    ]
    values = {
        "threshold-drive": first.f_star,
        "pair-gap": first.gap,
        "descent-slope": first.slope,
    }
    return ExperimentResult(("drive", "energy_above_vacuum"), rows, checks, values)


def _run_vacuum_stability(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    res = dyn.vacuum_stability_check(
        lat, cfg.state["r_cut"], _build_potential(cfg), store_every=_store_every(cfg, 24)
    )
    rows = [
        ("static-current-max", res.current_max),
        ("energy-drift", res.energy_drift),
        ("worst-excursion", res.worst_excursion),
    ]
    checks = [
        CheckResult("static-current-zero", res.current_max, 0.0),
        CheckResult("free-energy-persistent", res.energy_drift, 1e-9),
    ]
    values = {"worst-excursion": res.worst_excursion}
    return ExperimentResult(("quantity", "value"), rows, checks, values)


_ORACLE_CUTOFF = 3  # brute-force commutator comparison only at desk scale


def _fine_slope(lat: Lattice, value_fn) -> float:
    """Coincidence slope from a grid fine enough to resolve every harmonic.

    The profile carries harmonics up to 2*cutoff, beyond what the native grid
    can represent without aliasing, so the independent measurement samples the
    closed-form values on a denser circle before taking the exact derivative.
    """
    fine = Lattice(length=lat.length, cutoff=2 * lat.cutoff + 2, charge=lat.charge)
    samples = np.array([value_fn(d) for d in fine.grid()]).imag
    return float(spectral_derivative(samples, fine)[0])


def _quadrature_pair(harmonic: int, weight: complex = 0.5) -> sw.TestFunctionPair:
    """Real single-harmonic test function with its -i-twisted partner.

    The kernel is odd in the separation, so pairing a function with itself
    vanishes identically; the quarter-period twist (cos -> sin) picks out the
    odd part.
    """
    f = {harmonic: weight, -harmonic: np.conj(weight)}
    g = {harmonic: -1j * weight, -harmonic: np.conj(-1j * weight)}
    return sw.TestFunctionPair(f, g, (harmonic, harmonic))


def _profile_result(
    cfg: ScenarioConfig, profile: sw.SchwingerProfile, state, slope_reference: float, value_fn
) -> ExperimentResult:
    lat = cfg.lattice
    values_im = profile.values.imag
    n = lat.npoints
    folded = float(np.abs(values_im + values_im[(-np.arange(n)) % n]).max())
    measured_slope = _fine_slope(lat, value_fn)
    rows = [(float(d), float(v)) for d, v in zip(profile.separations, values_im)]
    checks = [
        CheckResult("coincidence-zero", abs(values_im[0]), 0.0),
        CheckResult("odd-in-separation", folded, 1e-12),
        CheckResult(
            "coincidence-slope-closed-form",
            abs(measured_slope - slope_reference) / abs(slope_reference),
            1e-12,
        ),
    ]
    values = {"coincidence-derivative": slope_reference}
    if lat.cutoff <= _ORACLE_CUTOFF:
        oracle = sw.oracle_profile(lat, state)
        checks.append(
            CheckResult(
                "brute-force-commutator", float(np.abs(profile.values - oracle).max()), 1e-12
            )
        )
    return ExperimentResult(("separation", "commutator_im"), rows, checks, values)


def _run_schwinger_standard(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    profile = sw.schwinger_standard(lat)
    return _profile_result(
        cfg,
        profile,
        fk.vacuum_standard(lat),
        sw.coincidence_derivative(lat, "standard"),
        lambda d: sw.standard_value(lat, d),
    )


def _run_schwinger_regularized(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    r_cut = cfg.state["r_cut"]
    profile = sw.schwinger_regularized(lat, r_cut)
    result = _profile_result(
        cfg,
        profile,
        fk.vacuum_regularized(lat, r_cut),
        sw.coincidence_derivative(lat, "regularized", r_cut),
        # the reduced-sea mode sum collapses to the remnant only at the native
        # grid separations; off-grid sampling must use the remnant form itself
        lambda d: sw.remnant_value(lat, r_cut, d),
    )
    remnant = np.array([sw.remnant_value(lat, r_cut, d) for d in lat.grid()])
    result.checks.append(
        CheckResult(
            "cutoff-independent-remnant", float(np.abs(profile.values - remnant).max()), 1e-12
        )
    )
    harmonic = cfg.params.get("harmonic", r_cut + 1)
    pair = _quadrature_pair(harmonic)
    smeared_reg = abs(sw.smeared_schwinger(lat, profile, pair))
    smeared_std = abs(sw.smeared_schwinger(lat, sw.schwinger_standard(lat), pair))
    result.checks.append(CheckResult("smeared-window-vanishes", smeared_reg, 1e-10))
    result.checks.append(
        CheckResult("smeared-standard-nonzero", max(0.0, 1e-3 - smeared_std), 0.0)
    )
    result.values["smeared-regularized"] = smeared_reg
    result.values["smeared-standard"] = smeared_std
    return result


def _validate_regularized_window(*, state, params, cutoff, errors) -> None:
    r_cut = state.get("r_cut")
    if r_cut is None:
        return
    harmonic = params.get("harmonic", r_cut + 1)
    if not isinstance(harmonic, int):
        return
    if not r_cut + 1 <= harmonic <= cutoff - r_cut:
        errors.append(
            f"params.harmonic: smearing window [{r_cut + 1}, {cutoff - r_cut}] is empty or "
            "does not contain this harmonic; raise cutoff or lower r_cut"
        )


def _run_schwinger_scaling(cfg: ScenarioConfig) -> ExperimentResult:
    lat = cfg.lattice
    cutoffs = cfg.params.get("cutoffs", [2, 3, 4, 5, 6, 7, 8])
    r_cut = cfg.params.get("r_cut", 1)
    standard = sw.growth_table(cutoffs, length=lat.length, charge=lat.charge)
    regularized = np.array(
        [
            sw.coincidence_derivative(
                Lattice(length=lat.length, cutoff=c, charge=lat.charge), "regularized", r_cut
            )
            for c in cutoffs
        ]
    )
    fit = sw.fit_growth_exponent(cutoffs, standard)
    flat_dev = float(np.abs(regularized - regularized[0]).max())
    rows = [
        (int(c), float(s), float(r)) for c, s, r in zip(cutoffs, standard, regularized)
    ]
    checks = [
        CheckResult("standard-cubic-growth", abs(fit["exponent"] - 3.0), 0.1),
        CheckResult("regularized-cutoff-flat", flat_dev, 1e-12),
    ]
    values = {
        "growth-exponent": fit["exponent"],
        "raw-log-slope": fit["raw_slope"],
        "regularized-slope": float(regularized[0]),
    }
    return ExperimentResult(("cutoff", "standard_slope", "regularized_slope"), rows, checks, values)


def _validate_scaling(*, state, params, cutoff, errors) -> None:
    cutoffs = params.get("cutoffs", [2, 3, 4, 5, 6, 7, 8])
    r_cut = params.get("r_cut", 1)
    if not isinstance(cutoffs, list) or not all(_is_int(c) for c in cutoffs):
        errors.append("params.cutoffs: must be a list of integers")
        return
    if len(cutoffs) < 3 or sorted(set(cutoffs)) != cutoffs:
        errors.append("params.cutoffs: need at least 3 strictly increasing cutoffs")
    if _is_int(r_cut):
        if r_cut < 1:
            errors.append("params.r_cut: must be an integer >= 1")
        elif cutoffs and all(_is_int(c) for c in cutoffs) and min(cutoffs) < r_cut:
            errors.append(f"params.cutoffs: every cutoff must be >= r_cut={r_cut}")


def _validate_unboundedness(*, state, params, cutoff, errors) -> None:
    t_f = params.get("final_time", 2.0)
    if not _is_number(t_f) or t_f <= 0:
        errors.append("params.final_time: must be a positive number")
    drives = params.get("drives", 9)
    if not _is_int(drives) or drives < 3:
        errors.append("params.drives: must be an integer >= 3")


def _validate_samples(*, state, params, cutoff, errors) -> None:
    samples = params.get("samples")
    if samples is not None and (not _is_int(samples) or samples < 1):
        errors.append("params.samples: must be a positive integer")


def _validate_profile_samples(*, state, params, cutoff, errors) -> None:
    samples = params.get("samples")
    if samples is not None and (not _is_int(samples) or samples < 7):
        errors.append("params.samples: continuity stencil needs an integer >= 7")


EXPERIMENTS: dict[str, ExperimentSpec] = {
    spec.name: spec
    for spec in [
        ExperimentSpec(
            "car-identities",
            "anticommutation relations of the mode ladders and sampled field operators",
            _run_car_identities,
            params={},
        ),
        ExperimentSpec(
            "vacuum-energies",
            "closed-form sea energies, hole lowering below a reduced sea, and the standard-sea lower bound",
            _run_vacuum_energies,
            params={"samples": "int"},
            state_kinds=frozenset({"vacuum", "regularized"}),
            extra_validate=_validate_samples,
        ),
        ExperimentSpec(
            "current-profile",
            "traveling current profile of a two-electron state with transport continuity",
            _run_current_profile,
            params={"samples": "int"},
            state_kinds=frozenset({"two-electron"}),
            extra_validate=_validate_profile_samples,
        ),
        ExperimentSpec(
            "picture-equivalence",
            "fixed-state observables against the factored evolving-state route",
            _run_picture_equivalence,
            params={},
            potential_presets=frozenset({"zero", "uniform-a0", "uniform-a1"}),
        ),
        ExperimentSpec(
            "gauge-check",
            "observable shifts under a gauge transformation of the background",
            _run_gauge_check,
            params={},
            uses_gauge=True,
        ),
        ExperimentSpec(
            "energy-theorem",
            "free-energy change against the work integral of the electric field",
            _run_energy_theorem,
            params={},
            potential_presets=frozenset({"zero", "uniform-a0", "gaussian-pulse-a0"}),
        ),
        ExperimentSpec(
            "energy-unboundedness",
            "linear free-energy descent of a driven pair state past the threshold drive",
            _run_energy_unboundedness,
            needs_fock=False,
            params={"final_time": "number", "drives": "int"},
            state_kinds=frozenset({"two-electron"}),
            extra_validate=_validate_unboundedness,
        ),
        ExperimentSpec(
            "vacuum-stability",
            "reduced-sea current and free-energy persistence under an adiabatic pulse",
            _run_vacuum_stability,
            params={},
            state_kinds=frozenset({"regularized"}),
        ),
        ExperimentSpec(
            "schwinger-standard",
            "density-current commutator profile over the filled sea with brute-force comparison",
            _run_schwinger_standard,
            params={},
            state_kinds=frozenset({"vacuum"}),
        ),
        ExperimentSpec(
            "schwinger-regularized",
            "commutator profile over a reduced sea: cutoff-independent remnant and smeared dichotomy",
            _run_schwinger_regularized,
            params={"harmonic": "int"},
            state_kinds=frozenset({"regularized"}),
            extra_validate=_validate_regularized_window,
        ),
        ExperimentSpec(
            "schwinger-scaling",
            "coincidence-slope growth across cutoffs: cubic for the filled sea, flat when reduced",
            _run_schwinger_scaling,
            needs_fock=False,
            params={"cutoffs": "list", "r_cut": "int"},
            extra_validate=_validate_scaling,
        ),
    ]
}


def check_resources(scenarios: list[ScenarioConfig]) -> None:
    """Reject many-body scenarios beyond the desk-scale ceiling before allocation."""
    for cfg in scenarios:
        if EXPERIMENTS[cfg.experiment].needs_fock and cfg.lattice.cutoff > fk.FOCK_CUTOFF_CEILING:
            raise ResourceError(
                f"scenario {cfg.name!r}: experiment {cfg.experiment!r} builds the many-body "
                f"space (dimension 2**{4 * cfg.lattice.cutoff}); cutoff "
                f"{cfg.lattice.cutoff} exceeds the ceiling {fk.FOCK_CUTOFF_CEILING}"
            )


# ---------------------------------------------------------------------------
# running and emission


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    """Execute one scenario's experiment and time it."""
    check_resources([cfg])
    start = time.perf_counter()
    result = EXPERIMENTS[cfg.experiment].runner(cfg)
    return RunReport(cfg.name, cfg.experiment, result, time.perf_counter() - start)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def render_csv(result: ExperimentResult) -> str:
    lines = [",".join(result.columns)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in result.rows)
    return "\n".join(lines) + "\n"


def _json_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    return float(value)


def render_json(result: ExperimentResult) -> str:
    payload = {
        "columns": list(result.columns),
        "rows": [[_json_cell(cell) for cell in row] for row in result.rows],
        "checks": [
            {"name": c.name, "value": c.value, "tolerance": c.tolerance, "passed": c.passed}
            for c in result.checks
        ],
        "values": {k: _json_cell(v) for k, v in sorted(result.values.items())},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _report_payload(reports: list[RunReport]) -> dict:
    scenarios = []
    for rep in reports:
        scenarios.append(
            {
                "name": rep.name,
                "experiment": rep.experiment,
                "passed": rep.passed,
                "checks": [
                    {
                        "name": c.name,
                        "value": c.value,
                        "tolerance": c.tolerance,
                        "passed": c.passed,
                    }
                    for c in rep.result.checks
                ],
                "values": {k: _json_cell(v) for k, v in sorted(rep.result.values.items())},
            }
        )
    total = sum(len(r.result.checks) for r in reports)
    passed = sum(sum(c.passed for c in r.result.checks) for r in reports)
    return {
        "checks_passed": passed,
        "checks_total": total,
        "passed": passed == total,
        "scenarios": scenarios,
    }


def _render_check_line(check: dict) -> str:
    verdict = "PASS" if check["passed"] else "FAIL"
    relation = "<=" if check["passed"] else ">"
    return (
        f"  {check['name']}: {verdict} "
        f"({check['value']:.6g} {relation} {check['tolerance']:.6g})"
    )


def render_report_text(payload: dict, *, header: str | None = None) -> str:
    lines = [] if header is None else [header]
    for scenario in payload["scenarios"]:
        verdict = "PASS" if scenario["passed"] else "FAIL"
        lines.append(f"{scenario['name']} [{scenario['experiment']}]: {verdict}")
        lines.extend(_render_check_line(c) for c in scenario["checks"])
    lines.append(f"{payload['checks_passed']}/{payload['checks_total']} checks passed")
    return "\n".join(lines) + "\n"


def emit_report(reports: list[RunReport], directory) -> dict:
    """Write per-scenario artifacts plus report.json / report.txt under ``directory``."""
    if not reports:
        raise ConfigValidationError(["report: no scenarios were run"])
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    payload = _report_payload(reports)
    (root / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    wall = sum(r.wall_seconds for r in reports)
    header = f"completed {stamp}, wall time {wall:.2f} s"
    (root / "report.txt").write_text(render_report_text(payload, header=header))
    return payload


def run_suite(scenarios: list[ScenarioConfig], output_dir=None) -> dict:
    """Run every scenario, write all artifacts, and return the report payload."""
    check_resources(scenarios)
    root = Path(output_dir) if output_dir is not None else Path(scenarios[0].output["directory"])
    reports = []
    for cfg in scenarios:
        report = run_scenario(cfg)
        target = root / cfg.name
        target.mkdir(parents=True, exist_ok=True)
        if "csv" in cfg.output["formats"]:
            (target / f"{cfg.experiment}.csv").write_text(render_csv(report.result))
        if "json" in cfg.output["formats"]:
            (target / f"{cfg.experiment}.json").write_text(render_json(report.result))
        reports.append(report)
    return emit_report(reports, root)


# ---------------------------------------------------------------------------
# entry point


def _cmd_run(args) -> int:
    scenarios = load_config(args.config)
    payload = run_suite(scenarios, output_dir=args.output)
    sys.stdout.write(render_report_text(payload))
    return 0 if payload["passed"] else 1


def _cmd_validate(args) -> int:
    scenarios = load_config(args.config)
    check_resources(scenarios)
    sys.stdout.write(f"OK: {len(scenarios)} scenario(s)\n")
    return 0


def _cmd_list(args) -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        sys.stdout.write(f"{name:<{width}}  {EXPERIMENTS[name].description}\n")
    return 0


def _cmd_report(args) -> int:
    path = Path(args.directory) / "report.json"
    if not path.is_file():
        raise ConfigValidationError([f"{path}: no report found (run a scenario first)"])
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"{path}: corrupt report ({exc})"]) from exc
    sys.stdout.write(render_report_text(payload))
    return 0 if payload.get("passed") else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qed1d",
        description="exact-solution experiments for a 1+1D fermion field in a classical background",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run every scenario in a configuration file")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--output", help="override the output directory", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a configuration file without running it")
    p_val.add_argument("config", help="path to a scenario JSON file")
    p_val.set_defaults(func=_cmd_validate)

    p_list = sub.add_parser("list-experiments", help="list available experiments")
    p_list.set_defaults(func=_cmd_list)

    p_rep = sub.add_parser("report", help="re-render the report of a finished run")
    p_rep.add_argument("directory", help="output directory of a previous run")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigValidationError as exc:
        for line in exc.errors:
            sys.stderr.write(f"error: {line}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ResourceError as exc:
        sys.stderr.write(f"resource error: {exc}\n")
        return 3
    except ConfigurationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
