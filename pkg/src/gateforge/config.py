"""Experiment configuration: YAML loading, validation, preset registry.

A config file is a nested key/value document (YAML). Operators are given
as Pauli-string sums, e.g. ``{XX: 0.5, ZZ: 1/60}``; coefficients may be
numbers or fraction strings. The full grammar is documented in the README
and every shipped preset under ``gateforge/presets/`` is a valid example.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .grape import OptimizationConfig
from .model import (
    ID2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    CollapseTerm,
    ControlTerm,
    HamiltonianModel,
    LindbladModel,
    ModelError,
    TargetGate,
    UncertaintyChannel,
    UncertaintyModel,
    standard_gate,
)
from .pulse import ConstantInit, InitSpec, RandomInit, SinInit

__all__ = ["ExperimentConfig", "SweepSpec", "ConfigError", "load_config",
           "parse_config", "list_presets", "load_preset", "preset_path"]

_PAULI = {"I": ID2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}
_SWEEP_PARAMS = ("pulse-count", "bound", "terminal-time")
_RATE_SCALES = {"per_ns": 1.0, "per_second": 1e-9}


class ConfigError(ValueError):
    """Invalid configuration; the message lists every detected violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass
class SweepSpec:
    param: str
    values: list

    def __post_init__(self):
        if self.param not in _SWEEP_PARAMS:
            raise ConfigError([f"sweep.param must be one of {_SWEEP_PARAMS}, got {self.param!r}"])


@dataclass
class ExperimentConfig:
    """A fully validated experiment: built model objects plus run settings."""

    name: str
    description: str
    model: HamiltonianModel | LindbladModel
    target: TargetGate
    total_time: float
    n_intervals: int
    init_specs: list[InitSpec]
    optimizer: OptimizationConfig
    uncertainty: UncertaintyModel | None = None
    test_count: int = 2000
    warm_start: bool = False
    warm_iterations: int = 500
    warm_step_size: float | None = None
    sweep: SweepSpec | None = None
    output_dir: str | None = None
    raw: dict = field(default_factory=dict)

    @property
    def hamiltonian(self) -> HamiltonianModel:
        m = self.model
        return m.hamiltonian if isinstance(m, LindbladModel) else m

    @property
    def is_open(self) -> bool:
        return isinstance(self.model, LindbladModel)


def _coeff(value, errors, where) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            errors.append(f"{where}: cannot parse coefficient {value!r}")
            return 0.0
    errors.append(f"{where}: coefficient must be a number or fraction string")
    return 0.0


def _pauli_operator(spec, qubits, errors, where) -> np.ndarray:
    dim = 2**qubits
    op = np.zeros((dim, dim), dtype=complex)
    if not isinstance(spec, dict) or not spec:
        errors.append(f"{where}: operator must be a non-empty Pauli-string mapping")
        return op
    for string, coeff in spec.items():
        s = str(string).upper()
        if len(s) != qubits or any(ch not in _PAULI for ch in s):
            errors.append(
                f"{where}: bad Pauli string {string!r} for {qubits} qubit(s)"
            )
            continue
        term = _PAULI[s[0]]
        for ch in s[1:]:
            term = np.kron(term, _PAULI[ch])
        op = op + _coeff(coeff, errors, where) * term
    return op


def _collapse_operator(spec, qubits, errors, where) -> np.ndarray:
    if spec == "sigma_minus":
        base = SIGMA_MINUS
    elif spec == "sigma_plus":
        base = SIGMA_PLUS
    else:
        return _pauli_operator({spec: 1.0} if isinstance(spec, str) else spec,
                               qubits, errors, where)
    if qubits != 1:
        errors.append(f"{where}: {spec} is a single-qubit operator")
    return base.copy()


def _init_spec(spec, errors, where) -> InitSpec:
    if spec is None:
        return ConstantInit(0.0)
    if not isinstance(spec, dict) or "type" not in spec:
        errors.append(f"{where}: init must be a mapping with a 'type' key")
        return ConstantInit(0.0)
    kind = spec["type"]
    if kind == "sin":
        return SinInit(amplitude=float(spec.get("amplitude", 1.0)))
    if kind == "constant":
        return ConstantInit(value=float(spec.get("value", 0.0)))
    if kind == "random":
        return RandomInit(
            seed=int(spec.get("seed", 0)),
            low=float(spec.get("low", -1.0)),
            high=float(spec.get("high", 1.0)),
        )
    errors.append(f"{where}: unknown init type {kind!r}")
    return ConstantInit(0.0)


def _target(doc, errors) -> TargetGate | None:
    t = doc.get("target")
    if not isinstance(t, dict) or "gate" not in t:
        errors.append("target: missing 'gate'")
        return None
    name = t["gate"]
    if name == "custom":
        rows = t.get("matrix")
        qubits = t.get("qubits")
        if rows is None or qubits is None:
            errors.append("target: custom gate needs 'matrix' and 'qubits'")
            return None
        try:
            matrix = np.array([[complex(x) for x in row] for row in rows])
            return TargetGate(name="custom", matrix=matrix, qubits=int(qubits))
        except (TypeError, ValueError, ModelError) as exc:
            errors.append(f"target: bad custom matrix ({exc})")
            return None
    try:
        return standard_gate(name)
    except ModelError as exc:
        errors.append(f"target: {exc}")
        return None


def parse_config(doc: dict, name_hint: str = "") -> ExperimentConfig:
    """Validate a parsed YAML document, collecting all violations."""
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["document root must be a mapping"])

    name = doc.get("name", name_hint or "experiment")
    description = doc.get("description", "")

    system = doc.get("system")
    if not isinstance(system, dict):
        errors.append("system: block missing")
        system = {}
    qubits = int(system.get("qubits", 1))
    unit_system = system.get("unit_system", "atomic-units")
    if unit_system not in ("atomic-units", "GHz-ns"):
        errors.append(f"system.unit_system: unknown label {unit_system!r}")

    drift_block = system.get("drift") or {}
    drift_op = _pauli_operator(drift_block.get("operator", {"I" * qubits: 0.0}),
                               qubits, errors, "system.drift")
    drift_coeff = float(drift_block.get("coefficient", 1.0))
    drift_channel = drift_block.get("uncertainty")

    controls = []
    init_specs = []
    ctrl_blocks = system.get("controls") or []
    if not ctrl_blocks:
        errors.append("system.controls: at least one control is required")
    for i, blk in enumerate(ctrl_blocks):
        where = f"system.controls[{i}]"
        op = _pauli_operator(blk.get("operator", {}), qubits, errors, where)
        bounds = blk.get("bounds", [-np.inf, np.inf])
        if not (isinstance(bounds, (list, tuple)) and len(bounds) == 2
                and bounds[0] < bounds[1]):
            errors.append(f"{where}: bounds must be [lo, hi] with lo < hi")
            bounds = [-np.inf, np.inf]
        try:
            controls.append(
                ControlTerm(
                    operator=op,
                    bounds=(float(bounds[0]), float(bounds[1])),
                    channel=blk.get("uncertainty"),
                    name=blk.get("name", f"u_{i}"),
                )
            )
        except ModelError as exc:
            errors.append(f"{where}: {exc}")
        init_specs.append(_init_spec(blk.get("init"), errors, f"{where}.init"))

    try:
        ham = HamiltonianModel(
            drift=drift_op,
            drift_coefficient=drift_coeff,
            drift_channel=drift_channel,
            controls=tuple(controls),
            unit_system=unit_system,
        )
    except ModelError as exc:
        errors.append(f"system: {exc}")
        ham = None

    collapse = []
    for i, blk in enumerate(system.get("collapse") or []):
        where = f"system.collapse[{i}]"
        op = _collapse_operator(blk.get("operator"), qubits, errors, where)
        units = blk.get("rate_units", "per_ns")
        if units not in _RATE_SCALES:
            errors.append(f"{where}: rate_units must be one of {sorted(_RATE_SCALES)}")
            units = "per_ns"
        rate = float(blk.get("rate", 0.0)) * _RATE_SCALES[units]
        try:
            collapse.append(
                CollapseTerm(operator=op, rate=rate,
                             channel=blk.get("uncertainty"),
                             name=blk.get("name", f"c_{i}"))
            )
        except ModelError as exc:
            errors.append(f"{where}: {exc}")

    model = None
    if ham is not None:
        if collapse:
            try:
                model = LindbladModel(hamiltonian=ham, collapse_terms=tuple(collapse))
            except ModelError as exc:
                errors.append(f"system.collapse: {exc}")
        else:
            model = ham

    target = _target(doc, errors)
    if target is not None and ham is not None and target.dim != ham.dim:
        errors.append(
            f"target: gate dimension {target.dim} != system dimension {ham.dim}"
        )

    time_block = doc.get("time") or {}
    total_time = float(time_block.get("duration", 0.0))
    n_intervals = int(time_block.get("intervals", 0))
    if total_time <= 0:
        errors.append("time.duration: must be positive")
    if n_intervals < 1:
        errors.append("time.intervals: must be >= 1")

    unc_block = doc.get("uncertainty")
    uncertainty = None
    test_count = 2000
    if unc_block is not None:
        channels = []
        for i, blk in enumerate(unc_block.get("channels") or []):
            where = f"uncertainty.channels[{i}]"
            try:
                channels.append(
                    UncertaintyChannel(
                        id=str(blk["id"]),
                        bound=float(blk.get("bound", 0.0)),
                        grid_count=int(blk.get("grid", 5)),
                        distribution=blk.get("distribution", "uniform"),
                    )
                )
            except (KeyError, ModelError) as exc:
                errors.append(f"{where}: {exc}")
        try:
            uncertainty = UncertaintyModel(channels=tuple(channels))
        except ModelError as exc:
            errors.append(f"uncertainty: {exc}")
        test_count = int(unc_block.get("test_count", 2000))
        if test_count < 1:
            errors.append("uncertainty.test_count: must be >= 1")

    # every channel referenced by the model must be declared
    if model is not None:
        declared = {ch.id for ch in uncertainty.channels} if uncertainty else set()
        for cid in model.channel_ids():
            if cid not in declared:
                errors.append(
                    f"uncertainty: channel {cid!r} is referenced by the system "
                    "but not declared"
                )

    opt_block = doc.get("optimizer") or {}
    optimizer = None
    try:
        optimizer = OptimizationConfig(
            step_size=float(opt_block.get("step_size", 0.5)),
            max_iterations=int(opt_block.get("max_iterations", 1000)),
            target_infidelity=float(opt_block.get("target_infidelity", 0.0)),
            seed=int(opt_block.get("seed", 0)),
            objective=opt_block.get("objective", "phi-mean"),
            momentum=float(opt_block.get("momentum", 0.0)),
        )
    except ValueError as exc:
        errors.append(f"optimizer: {exc}")

    sweep = None
    if "sweep" in doc and doc["sweep"] is not None:
        blk = doc["sweep"]
        try:
            sweep = SweepSpec(param=blk.get("param", ""), values=list(blk.get("values", [])))
            if not sweep.values:
                errors.append("sweep.values: must be non-empty")
        except ConfigError as exc:
            errors.extend(exc.problems)

    if errors:
        raise ConfigError(errors)

    return ExperimentConfig(
        name=name,
        description=description,
        model=model,
        target=target,
        total_time=total_time,
        n_intervals=n_intervals,
        init_specs=init_specs,
        optimizer=optimizer,
        uncertainty=uncertainty,
        test_count=test_count,
        warm_start=bool(opt_block.get("warm_start", False)),
        warm_iterations=int(opt_block.get("warm_iterations", 500)),
        warm_step_size=(
            float(opt_block["warm_step_size"])
            if opt_block.get("warm_step_size") is not None
            else None
        ),
        sweep=sweep,
        output_dir=(doc.get("output") or {}).get("directory"),
        raw=doc,
    )


def load_config(path) -> ExperimentConfig:
    """Load and validate a config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: YAML parse error: {exc}"]) from exc
    return parse_config(doc, name_hint=path.stem)


def _preset_dir():
    return importlib.resources.files("gateforge") / "presets"


def list_presets() -> list[tuple[str, str]]:
    """(name, one-line description) for every shipped preset."""
    out = []
    for entry in sorted(_preset_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".yaml"):
            doc = yaml.safe_load(entry.read_text())
            out.append((doc.get("name", entry.name[:-5]),
                        doc.get("description", "").strip()))
    return out


def preset_path(name: str) -> Path:
    p = _preset_dir() / f"{name}.yaml"
    if not p.is_file():
        known = ", ".join(n for n, _ in list_presets())
        raise ConfigError([f"unknown preset {name!r} (known: {known})"])
    return Path(str(p))


def load_preset(name: str) -> ExperimentConfig:
    return load_config(preset_path(name))
