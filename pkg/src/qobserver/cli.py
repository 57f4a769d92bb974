"""Command-line front end: analyze, synthesize, simulate, demo.

Exit codes: 0 all checks passed, 1 a structural or convergence check
failed, 2 input error (unreadable/malformed configuration, bad arguments).
All numeric output is written with 17 significant digits so that
re-ingesting a file reproduces the exact floating-point values.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import DecomposedPlant, transformed_condition_check
from .config import ConfigError, PlantConfig, build_plant, load_config
from .demo import sixmode_config
from .model import CONDITION_TOL, ConditionReport, check_plant_conditions
from .simulation import propagate, time_average_error, time_grid
from .synthesis import (
    ObserverDesign,
    PlantConditionError,
    assemble_augmented,
    synthesize_observer,
)

__all__ = ["RunReport", "main", "cmd_analyze", "cmd_synthesize", "cmd_simulate",
           "cmd_demo", "write_matrices_csv", "read_matrices_csv",
           "write_trajectory_csv", "read_trajectory_csv"]

FLOAT_FMT = "%.17g"


@dataclass
class RunReport:
    """Aggregated, JSON-serializable outcome of a pipeline run."""

    conditions: dict
    decomposition: dict | None = None
    observer: dict | None = None
    convergence: dict | None = None
    csv_files: list = dataclasses.field(default_factory=list)
    passed: bool = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        return cls(**doc)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def write_trajectory_csv(path, times: np.ndarray, coeffs: np.ndarray, stream: str):
    """Write coefficient trajectories: columns t, z{stream}_{i}_x{j} (1-based)."""
    n_t = len(times)
    m, n = coeffs.shape[1], coeffs.shape[2]
    header = ["t"] + [f"z{stream}_{i + 1}_x{j + 1}"
                      for i in range(m) for j in range(n)]
    data = np.hstack([np.asarray(times).reshape(n_t, 1), coeffs.reshape(n_t, m * n)])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")


def read_trajectory_csv(path):
    """Inverse of ``write_trajectory_csv``; returns (times, flat_coeffs, header)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:], header


def write_matrices_csv(path, matrices: dict):
    """Write named matrices in long form: matrix,row,col,value (0-based)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["matrix", "row", "col", "value"])
        for name, mat in matrices.items():
            mat = np.atleast_2d(np.asarray(mat))
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    writer.writerow([name, i, j, FLOAT_FMT % mat[i, j]])


def read_matrices_csv(path) -> dict:
    """Inverse of ``write_matrices_csv``."""
    entries: dict[str, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["matrix", "row", "col", "value"]:
            raise ValueError(f"unexpected matrix CSV header: {header}")
        for name, i, j, value in reader:
            entries.setdefault(name, {})[(int(i), int(j))] = float(value)
    out = {}
    for name, cells in entries.items():
        rows = 1 + max(i for i, _ in cells)
        cols = 1 + max(j for _, j in cells)
        mat = np.zeros((rows, cols))
        for (i, j), v in cells.items():
            mat[i, j] = v
        out[name] = mat
    return out


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

def _listify(a: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(a)]


def _conditions_dict(report: ConditionReport) -> dict:
    doc = dataclasses.asdict(report)
    doc["all_ok"] = report.all_ok
    return doc


def _decomposition_dict(dec: DecomposedPlant) -> dict:
    return {
        "n_p1": dec.n_p1,
        "n_p2": dec.n_p2,
        "controllable": dec.controllable,
        "r_p11_eigenvalues": sorted(float(v) for v in np.linalg.eigvalsh(dec.r_p11)),
        "theta11_eigenvalues_imag": sorted(
            float(v) for v in np.linalg.eigvals(dec.theta11).imag),
        "theta22_eigenvalues_imag": sorted(
            float(v) for v in np.linalg.eigvals(dec.theta22).imag),
        "transformed_condition_residual": transformed_condition_check(dec),
        "residuals": {k: float(v) for k, v in dec.residuals.items()},
    }


def _observer_dict(obs: ObserverDesign) -> dict:
    consistency = float(np.abs(
        -obs.c_o @ np.linalg.solve(obs.r_o, obs.beta) - np.eye(obs.m)).max())
    return {
        "n_o": obs.n_o,
        "consistency_residual": consistency,
        "r_o": _listify(obs.r_o),
        "c_o": _listify(obs.c_o),
        "beta": _listify(obs.beta),
        "r_c_tilde": _listify(obs.r_c_tilde),
        "r_c": _listify(obs.r_c),
        "theta_o": _listify(obs.theta_o),
    }


def _write_report(report: RunReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def _print_conditions(report_doc: dict, file=sys.stdout):
    flags = {k: report_doc[k] for k in ("tf_cond_ok", "cjc_ok", "rank_ok", "bound_ok")}
    for name, ok in flags.items():
        print(f"  {name:<12} {'pass' if ok else 'FAIL'}", file=file)
    print(f"  rank of dynamics span: {report_doc['rank_cr']}, "
          f"constant coordinates: {report_doc['n_p2']}", file=file)
    if not report_doc["all_ok"]:
        print(f"  residuals: {report_doc['residuals']}", file=file)


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def _synthesize(cfg: PlantConfig, dec):
    tol = cfg.tol if cfg.tol is not None else CONDITION_TOL
    obs = synthesize_observer(dec, omega=cfg.omega, r_o=cfg.r_o,
                              c_o=cfg.c_o, beta=cfg.beta, condition_tol=tol)
    if cfg.zero_coupling:
        obs = dataclasses.replace(obs, r_c=np.zeros_like(obs.r_c),
                                  r_c_tilde=np.zeros_like(obs.r_c_tilde))
    return obs


def cmd_analyze(config_path, report_path=None,
                overrides: dict | None = None) -> RunReport:
    cfg = _apply_overrides(load_config(config_path), overrides)
    plant, dec = build_plant(cfg)
    tol = cfg.tol if cfg.tol is not None else CONDITION_TOL
    conditions = check_plant_conditions(plant, tol=tol)
    report = RunReport(
        conditions=_conditions_dict(conditions),
        decomposition=_decomposition_dict(dec),
        passed=conditions.all_ok,
    )
    print(f"analyze {config_path}: {'PASS' if report.passed else 'FAIL'}")
    _print_conditions(report.conditions)
    if report_path:
        _write_report(report, report_path)
    return report


def cmd_synthesize(config_path, out_path, report_path=None,
                   overrides: dict | None = None) -> RunReport:
    cfg = _apply_overrides(load_config(config_path), overrides)
    plant, dec = build_plant(cfg)
    tol = cfg.tol if cfg.tol is not None else CONDITION_TOL
    conditions = check_plant_conditions(plant, tol=tol)
    obs = _synthesize(cfg, dec)
    write_matrices_csv(out_path, {
        "r_o": obs.r_o, "r_c": obs.r_c, "r_c_tilde": obs.r_c_tilde,
        "c_o": obs.c_o, "beta": obs.beta, "theta_o": obs.theta_o,
    })
    report = RunReport(
        conditions=_conditions_dict(conditions),
        decomposition=_decomposition_dict(dec),
        observer=_observer_dict(obs),
        csv_files=[str(out_path)],
        passed=conditions.all_ok,
    )
    print(f"synthesize {config_path}: observer order {obs.n_o}, "
          f"matrices written to {out_path}")
    if report_path:
        _write_report(report, report_path)
    return report


def cmd_simulate(config_path, out_dir, overrides: dict | None = None) -> RunReport:
    return _simulate(_apply_overrides(load_config(config_path), overrides),
                     out_dir, label=str(config_path))


def _simulate(cfg: PlantConfig, out_dir, label: str) -> RunReport:
    if cfg.t_end < 10:
        raise ConfigError(
            f"t_end = {cfg.t_end} too short: convergence evaluation needs t_end >= 10")
    plant, dec = build_plant(cfg)
    tol = cfg.tol if cfg.tol is not None else CONDITION_TOL
    conditions = check_plant_conditions(plant, tol=tol)
    obs = _synthesize(cfg, dec)
    aug = assemble_augmented(plant, obs)
    record = propagate(aug, time_grid(cfg.t_end, cfg.dt))
    convergence = time_average_error(record, aug)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, coeffs, stream in (("zp.csv", record.zp_coeffs, "p"),
                                 ("zo.csv", record.zo_coeffs, "o"),
                                 ("zo_avg.csv", record.zo_avg, "o_avg")):
        path = out_dir / name
        times = record.times if len(coeffs) == len(record.times) else record.times[:0]
        write_trajectory_csv(path, times, coeffs, stream)
        files.append(str(path))

    report = RunReport(
        conditions=_conditions_dict(conditions),
        decomposition=_decomposition_dict(dec),
        observer=_observer_dict(obs),
        convergence=dataclasses.asdict(convergence),
        csv_files=files,
        passed=conditions.all_ok and convergence.passed,
    )
    _write_report(report, out_dir / "report.json")
    report.csv_files.append(str(out_dir / "report.json"))
    print(f"simulate {label}: t_end = {cfg.t_end}, dt = {cfg.dt}")
    print(f"  zp drift        {convergence.zp_drift:.3e}")
    print(f"  final avg error {convergence.final_error:.3e}")
    slope = convergence.decay_slope
    print(f"  decay slope     {'n/a' if slope is None else f'{slope:.3f}'}")
    print(f"  convergence     {'PASS' if convergence.passed else 'FAIL'}")
    return report


def cmd_demo(out_dir="qobserver-demo") -> RunReport:
    """Run the bundled six-mode example end to end and check reference values."""
    report = _simulate(sixmode_config(), out_dir, label="six-mode demo")

    dec_doc = report.decomposition
    obs_doc = report.observer
    conv = report.convergence
    expected_rct = [[-1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [-1.0, 1.0]]
    checks = [
        ("dynamics span rank = 2", report.conditions["rank_cr"] == 2),
        ("block sizes (2, 4)", (dec_doc["n_p1"], dec_doc["n_p2"]) == (2, 4)),
        ("dynamical Hamiltonian block eigenvalues {0, 6}",
         np.allclose(dec_doc["r_p11_eigenvalues"], [0.0, 6.0], atol=1e-9)),
        ("coupling block matches reference exactly",
         obs_doc["r_c_tilde"] == expected_rct),
        ("consistency residual = 0", obs_doc["consistency_residual"] == 0.0),
        ("plant outputs constant (drift <= 1e-6)", conv["zp_drift"] <= 1e-6),
        ("time-average decay slope in [-1.3, -0.7]",
         conv["decay_slope"] is not None and -1.3 <= conv["decay_slope"] <= -0.7),
    ]
    print("\nsix-mode demo reference checks")
    for label, ok in checks:
        print(f"  {label:<50} {'PASS' if ok else 'FAIL'}")
    report.passed = report.passed and all(ok for _, ok in checks)
    return report


def _apply_overrides(cfg: PlantConfig, overrides: dict | None) -> PlantConfig:
    if not overrides:
        return cfg
    return dataclasses.replace(cfg, **overrides)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qobserver",
        description="Analyze quantum plants, synthesize direct-coupling "
                    "observers, simulate the coupled system.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="check plant conditions and decompose")
    p.add_argument("config")
    p.add_argument("--report", help="write the JSON report to this path")
    p.add_argument("--tol", type=float, help="condition-check tolerance")

    p = sub.add_parser("synthesize", help="construct the observer matrices")
    p.add_argument("config")
    p.add_argument("out", help="output CSV file for the observer matrices")
    p.add_argument("--report", help="write the JSON report to this path")
    p.add_argument("--omega", type=float, help="observer stiffness (default 1)")
    p.add_argument("--tol", type=float, help="condition-check tolerance")

    p = sub.add_parser("simulate", help="run the full pipeline and emit trajectories")
    p.add_argument("config")
    p.add_argument("out_dir", help="directory for zp.csv, zo.csv, zo_avg.csv, report.json")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--dt", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--zero-coupling", action="store_true", default=None,
                   help="force zero coupling (diagnostic; convergence will fail)")

    p = sub.add_parser("demo", help="run the bundled six-mode example")
    p.add_argument("--out-dir", default="qobserver-demo")
    return parser


def _overrides_from_args(args, keys) -> dict:
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            report = cmd_analyze(args.config, args.report,
                                 _overrides_from_args(args, ("tol",)))
        elif args.command == "synthesize":
            report = cmd_synthesize(args.config, args.out, args.report,
                                    _overrides_from_args(args, ("omega", "tol")))
        elif args.command == "simulate":
            report = cmd_simulate(args.config, args.out_dir, _overrides_from_args(
                args, ("t_end", "dt", "omega", "tol", "zero_coupling")))
        else:
            report = cmd_demo(args.out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PlantConditionError as exc:
        print(f"synthesis refused: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
