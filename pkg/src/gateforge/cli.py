"""Command-line experiment driver.

Verbs:
  run <config.yaml>     run one experiment (or its sweep block, if present)
  preset <name>         run a shipped preset
  sweep <config>        run a parameter sweep over a base config
  list-presets          show shipped presets

Each run writes ``convergence.csv``, ``pulses.csv`` and ``report.json``
into the output directory; sweeps write ``sweep.csv`` plus a summary
report. Artifacts contain no timestamps: identical config and seed give
byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import grape, lindblad, slc
from .config import (
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    load_config,
    load_preset,
    list_presets,
)
from .model import LindbladModel, UncertaintyChannel, UncertaintyModel, UncertaintySample
from .pulse import ControlSchedule, init_schedule, write_csv


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _build_initial_schedule(cfg: ExperimentConfig) -> ControlSchedule:
    return init_schedule(cfg.init_specs, cfg.hamiltonian, cfg.total_time, cfg.n_intervals)


def _warm_start(cfg: ExperimentConfig, schedule0: ControlSchedule):
    """Closed-system nominal pre-optimization used as the training start."""
    warm_cfg = grape.OptimizationConfig(
        step_size=cfg.warm_step_size if cfg.warm_step_size is not None else cfg.optimizer.step_size,
        max_iterations=cfg.warm_iterations,
        target_infidelity=1e-12,
        seed=cfg.optimizer.seed,
    )
    report = grape.optimize(
        cfg.hamiltonian, UncertaintySample.nominal(), schedule0, cfg.target, warm_cfg
    )
    info = {
        "iterations": report.iterations,
        "final_fidelity": report.final_fidelity,
        "step_size": warm_cfg.step_size,
    }
    return report.final_schedule, info


def _run_single(cfg: ExperimentConfig):
    """One experiment: optional warm start, train/optimize, optional test."""
    schedule = _build_initial_schedule(cfg)
    warm_info = None
    if cfg.warm_start:
        schedule, warm_info = _warm_start(cfg, schedule)

    if cfg.uncertainty is not None and cfg.uncertainty.channels:
        report = slc.train(cfg.model, cfg.uncertainty, schedule, cfg.target, cfg.optimizer)
        test_report = slc.test(
            cfg.model,
            cfg.uncertainty,
            report.final_schedule,
            cfg.target,
            count=cfg.test_count,
            seed=cfg.optimizer.seed,
        )
    elif cfg.is_open:
        report = lindblad.open_optimize(
            cfg.model,
            UncertaintySample.nominal(),
            schedule,
            lindblad.open_target(cfg.target),
            cfg.optimizer,
        )
        test_report = None
    else:
        report = grape.optimize(
            cfg.model, UncertaintySample.nominal(), schedule, cfg.target, cfg.optimizer
        )
        test_report = None
    return report, test_report, warm_info


def _log10_infidelity(infid: float) -> float:
    return math.log10(infid) if infid > 0 else float("-inf")


def _write_convergence(path: Path, trace: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,fidelity,infidelity,log10_infidelity\n")
        for it, f in enumerate(trace):
            infid = max(0.0, 1.0 - float(f))
            fh.write(f"{it},{_fmt(float(f))},{_fmt(infid)},{_fmt(_log10_infidelity(infid))}\n")


def _report_dict(cfg: ExperimentConfig, report, test_report, warm_info, extra=None):
    doc = {
        "name": cfg.name,
        "description": cfg.description,
        "gate": cfg.target.name,
        "qubits": cfg.target.qubits,
        "dynamics": "lindblad" if cfg.is_open else "unitary",
        "unit_system": cfg.hamiltonian.unit_system,
        "total_time": cfg.total_time,
        "intervals": cfg.n_intervals,
        "optimizer": {
            "step_size": cfg.optimizer.step_size,
            "max_iterations": cfg.optimizer.max_iterations,
            "target_infidelity": cfg.optimizer.target_infidelity,
            "objective": cfg.optimizer.objective,
            "seed": cfg.optimizer.seed,
        },
        "warm_start": warm_info,
        "result": {
            "final_fidelity": report.final_fidelity,
            "final_infidelity": max(0.0, 1.0 - report.final_fidelity),
            "iterations": report.iterations,
            "termination": report.termination,
            **report.extra,
        },
        "test": test_report.to_dict() if test_report is not None else None,
    }
    if extra:
        doc.update(extra)
    return doc


def _write_report(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _apply_sweep_value(cfg: ExperimentConfig, param: str, value):
    if param == "pulse-count":
        return dataclasses.replace(cfg, n_intervals=int(value), sweep=None)
    if param == "terminal-time":
        return dataclasses.replace(cfg, total_time=float(value), sweep=None)
    if param == "bound":
        if cfg.uncertainty is None or not cfg.uncertainty.channels:
            raise ConfigError(["sweep over 'bound' needs an uncertainty block"])
        channels = tuple(
            UncertaintyChannel(
                id=ch.id, bound=float(value), grid_count=ch.grid_count,
                distribution=ch.distribution,
            )
            for ch in cfg.uncertainty.channels
        )
        return dataclasses.replace(cfg, uncertainty=UncertaintyModel(channels), sweep=None)
    raise ConfigError([f"unknown sweep parameter {param!r}"])


def _run_sweep(cfg: ExperimentConfig, out: Path) -> None:
    param, values = cfg.sweep.param, cfg.sweep.values
    rows = []
    for value in values:
        sub = _apply_sweep_value(cfg, param, value)
        report, test_report, _ = _run_single(sub)
        fid = test_report.mean if test_report is not None else report.final_fidelity
        infid = max(0.0, 1.0 - fid)
        rows.append(
            {
                "value": value,
                "fidelity": fid,
                "infidelity": infid,
                "log10_infidelity": _log10_infidelity(infid),
                "train_fidelity": report.final_fidelity,
                "iterations": report.iterations,
            }
        )
        print(f"  {param}={value}: fidelity={fid:.6f} ({report.iterations} iterations)")
    with open(out / "sweep.csv", "w") as fh:
        fh.write("param,value,fidelity,infidelity,log10_infidelity\n")
        for r in rows:
            fh.write(
                f"{param},{_fmt(float(r['value']))},{_fmt(r['fidelity'])},"
                f"{_fmt(r['infidelity'])},{_fmt(r['log10_infidelity'])}\n"
            )
    doc = {
        "name": cfg.name,
        "description": cfg.description,
        "sweep_param": param,
        "rows": rows,
        "seed": cfg.optimizer.seed,
    }
    _write_report(out / "report.json", doc)
    print(f"wrote {out / 'sweep.csv'}")


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Path:
    """Execute a config (single run or sweep) and write its artifacts."""
    out = Path(out_dir or cfg.output_dir or f"out/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    if cfg.sweep is not None:
        _run_sweep(cfg, out)
        return out
    report, test_report, warm_info = _run_single(cfg)
    _write_convergence(out / "convergence.csv", report.fidelity_trace)
    write_csv(report.final_schedule, out / "pulses.csv")
    _write_report(out / "report.json", _report_dict(cfg, report, test_report, warm_info))
    infid = max(0.0, 1.0 - report.final_fidelity)
    print(
        f"{cfg.name}: fidelity={report.final_fidelity:.12f} (infidelity {infid:.3e}) "
        f"after {report.iterations} iterations [{report.termination}] "
        f"in {report.wall_time_s:.2f} s"
    )
    if test_report is not None:
        print(
            f"{cfg.name}: test mean fidelity {test_report.mean:.6f} "
            f"(min {test_report.min:.6f}) over {test_report.count} samples"
        )
    print(f"wrote {out / 'convergence.csv'}, {out / 'pulses.csv'}, {out / 'report.json'}")
    return out


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    opt = cfg.optimizer
    if getattr(args, "seed", None) is not None:
        opt = dataclasses.replace(opt, seed=args.seed)
    if getattr(args, "iterations", None) is not None:
        opt = dataclasses.replace(opt, max_iterations=args.iterations)
    return dataclasses.replace(cfg, optimizer=opt)


def _load_path_or_preset(spec: str) -> ExperimentConfig:
    if Path(spec).is_file():
        return load_config(spec)
    return load_preset(spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gateforge",
        description="Learn piecewise-constant control pulses for quantum gates.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment config file")
    p_run.add_argument("config")
    p_preset = sub.add_parser("preset", help="run a shipped preset by name")
    p_preset.add_argument("name")
    p_sweep = sub.add_parser("sweep", help="sweep a parameter over a base config")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True,
                         choices=["pulse-count", "bound", "terminal-time"])
    p_sweep.add_argument("--values", required=True, nargs="+", type=float)
    for p in (p_run, p_preset, p_sweep):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--iterations", type=int, default=None)
    sub.add_parser("list-presets", help="list shipped presets")

    args = parser.parse_args(argv)
    try:
        if args.verb == "list-presets":
            for name, desc in list_presets():
                print(f"{name:28s} {desc}")
            return 0
        if args.verb == "run":
            cfg = load_config(args.config)
        elif args.verb == "preset":
            cfg = load_preset(args.name)
        else:  # sweep
            cfg = _load_path_or_preset(args.config)
            values = [int(v) if args.param == "pulse-count" else v for v in args.values]
            cfg = dataclasses.replace(cfg, sweep=SweepSpec(param=args.param, values=values))
        cfg = _apply_overrides(cfg, args)
        run_experiment(cfg, args.out)
        return 0
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
