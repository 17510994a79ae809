"""Configuration-driven experiment runner.

Subcommands: cell, fine, homogenize, corrector, study, snapshots, oracle.
Configuration comes from an optional JSON file plus flag overrides; every
command writes a manifest.json with the full configuration, the effective
tensor where applicable, solver reports, and the toolkit version, so a run
can be reproduced exactly.  Outputs carry no timestamps and use fixed float
formatting: re-running a command with the same configuration produces
byte-identical files.

Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, cell, corrector, fields, timefrac
from ._svg import svg_heatmap, svg_loglog
from .grid import _is_power_of_two
from .sparse_linalg import SolverFailure

DESK_GRID_N = 256
PAPER_GRID_N = 512


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    alpha: float = 0.9
    eps: tuple = (0.125,)
    T: float = 1.0
    dt: float = 0.01
    grid_n: int = DESK_GRID_N
    cell_n: int = cell.DEFAULT_CELL_N
    field: str = "smooth-low"
    initial: str = "smooth-poly"
    theta: float | None = None
    out: str = "out"
    snapshots: tuple = ()
    times: tuple = (0.1, 0.5, 1.0)
    jobs: int = 1
    solver_tol: float = 1e-10

    def validate(self) -> "ExperimentConfig":
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0,1), got {self.alpha}")
        for name in ("T", "dt", "solver_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("grid_n", "cell_n"):
            v = getattr(self, name)
            if v < 2 or not _is_power_of_two(int(v)):
                raise ConfigError(f"{name} must be a power of two >= 2, got {v}")
        if not self.eps:
            raise ConfigError("eps list must not be empty")
        for e in self.eps:
            if e <= 0 or e > 1:
                raise ConfigError(f"eps must lie in (0, 1], got {e}")
            inv = 1.0 / e
            if abs(inv - round(inv)) > 1e-12 or not _is_power_of_two(round(inv)):
                raise ConfigError(f"eps must be a reciprocal power of two, got {e}")
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > 1e-12:
            raise ConfigError(f"dt={self.dt} does not divide T={self.T}")
        for t in self.times:
            k = round(t / self.dt)
            if not 0 <= k <= n or abs(k * self.dt - t) > 1e-9:
                raise ConfigError(f"report time {t} is not on the lattice dt={self.dt}")
        if self.theta is not None and not 0.0 < self.theta <= self.T:
            raise ConfigError(f"theta must lie in (0, T], got {self.theta}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for k in self.snapshots:
            if int(k) < 1:
                raise ConfigError(f"snapshot indices are 1-based, got {k}")
        try:
            fields.parse_field(self.field)
            fields.parse_initial(self.initial)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["eps"] = list(self.eps)
        d["snapshots"] = [int(k) for k in self.snapshots]
        d["times"] = list(self.times)
        return d


def _parse_float_list(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad numeric list {text!r}") from None


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from None
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig(**data)

    overrides = {
        "alpha": args.alpha, "T": args.T, "dt": args.dt,
        "cell_n": args.cell_n, "field": args.field, "initial": args.initial,
        "theta": args.theta, "out": args.out, "jobs": args.jobs,
        "solver_tol": args.tol,
    }
    if args.eps is not None:
        overrides["eps"] = _parse_float_list(args.eps)
    if args.snapshots is not None:
        overrides["snapshots"] = _parse_int_list(args.snapshots)
    if args.times is not None:
        overrides["times"] = _parse_float_list(args.times)
    if args.grid_n is not None:
        overrides["grid_n"] = args.grid_n
    if getattr(args, "paper_scale", False):
        overrides["grid_n"] = PAPER_GRID_N
    for key, val in overrides.items():
        if val is not None:
            cfg = dataclasses.replace(cfg, **{key: val})
    # descending eps keeps study output ordering deterministic
    cfg = dataclasses.replace(cfg, eps=tuple(sorted(set(cfg.eps), reverse=True)))
    return cfg.validate()


# ---------------------------------------------------------------------------
# output writers (fixed formatting; no timestamps)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_manifest(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload.setdefault("toolkit_version", __version__)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_errors_csv(path: Path, rows, with_eps: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if with_eps:
        lines.append("eps,t,abs_l2,rel_l2,abs_h1,rel_h1")
        for eps, row in rows:
            lines.append(f"{_fmt(eps)},{row.t:g},{_fmt(row.abs_l2)},{_fmt(row.rel_l2)},"
                         f"{_fmt(row.abs_h1)},{_fmt(row.rel_h1)}")
    else:
        lines.append("t,abs_l2,rel_l2,abs_h1,rel_h1")
        for row in rows:
            lines.append(f"{row.t:g},{_fmt(row.abs_l2)},{_fmt(row.rel_l2)},"
                         f"{_fmt(row.abs_h1)},{_fmt(row.rel_h1)}")
    path.write_text("\n".join(lines) + "\n")


def write_rates_csv(path: Path, rates: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["t,metric,rate,prefactor"]
    for (t, metric), est in sorted(rates.items()):
        lines.append(f"{t:g},{metric},{_fmt(est.rate)},{_fmt(est.prefactor)}")
    path.write_text("\n".join(lines) + "\n")


def write_nodal_csv(path: Path, grid, values: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["x,y,value"]
    for x, y, v in zip(grid.node_x, grid.node_y, values):
        lines.append(f"{x:.10g},{y:.10g},{_fmt(v)}")
    path.write_text("\n".join(lines) + "\n")


def _eps_dirname(eps: float) -> str:
    return f"eps_1_over_{round(1.0 / eps)}"


def _kappa_star_list(kstar: np.ndarray) -> list:
    return [[float(kstar[0, 0]), float(kstar[0, 1])],
            [float(kstar[1, 0]), float(kstar[1, 1])]]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_cell(cfg: ExperimentConfig) -> int:
    field = fields.parse_field(cfg.field)
    sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
    payload = {
        "kappa_star": _kappa_star_list(sol.kappa_star),
        "field": field.id,
        "cell_n": cfg.cell_n,
        "asymmetry": sol.asymmetry,
        "h1_seminorms": sol.h1_seminorms.tolist(),
        "chi_means": sol.means.tolist(),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    out = Path(cfg.out)
    for j in (0, 1):
        write_nodal_csv(out / f"chi_{j + 1}.csv", sol.cell_grid, sol.chi[j])
    write_manifest(out / "manifest.json", {"command": "cell", "config": cfg.as_dict(), **payload})
    return 0


def _single_eps(cfg: ExperimentConfig) -> float:
    if len(cfg.eps) != 1:
        raise ConfigError(f"this command needs exactly one eps, got {list(cfg.eps)}")
    return cfg.eps[0]


def _export_snapshots(out: Path, run, steps, prefix: str) -> list:
    written = []
    for k1 in steps:
        k = int(k1) - 1  # figures use 1-based indices: k=11 is t=0.1
        if not 0 <= k <= run.n_steps:
            raise ConfigError(f"snapshot step {k1} outside 1..{run.n_steps + 1}")
        u = run.nodal(k)
        csv_path = out / "snapshots" / f"{prefix}_k{int(k1):04d}.csv"
        write_nodal_csv(csv_path, run.grid, u)
        svg_path = out / "plots" / f"{prefix}_k{int(k1):04d}.svg"
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        svg_path.write_text(svg_heatmap(u, f"{prefix} at step k={int(k1)} (t={k * run.dt:g})"))
        written.append(str(csv_path))
    return written


def cmd_fine(cfg: ExperimentConfig) -> int:
    eps = _single_eps(cfg)
    field = fields.parse_field(cfg.field)
    a = fields.parse_initial(cfg.initial)
    run = timefrac.run_fine(field, eps, cfg.alpha, cfg.grid_n, cfg.dt, cfg.T, a,
                            tol=cfg.solver_tol)
    out = Path(cfg.out)
    files = _export_snapshots(out, run, cfg.snapshots, "fine")
    write_manifest(out / "manifest.json", {
        "command": "fine", "config": cfg.as_dict(),
        "solver": run.solver_summary(), "snapshots_written": files,
    })
    print(json.dumps({"command": "fine", "eps": eps, "solver": run.solver_summary()},
                     sort_keys=True))
    return 0


def cmd_homogenize(cfg: ExperimentConfig) -> int:
    field = fields.parse_field(cfg.field)
    a = fields.parse_initial(cfg.initial)
    sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
    run = timefrac.run_homogenized(sol.kappa_star, cfg.alpha, cfg.grid_n, cfg.dt,
                                   cfg.T, a, tol=cfg.solver_tol)
    out = Path(cfg.out)
    files = _export_snapshots(out, run, cfg.snapshots, "homogenized")
    payload = {
        "command": "homogenize", "config": cfg.as_dict(),
        "kappa_star": _kappa_star_list(sol.kappa_star),
        "solver": run.solver_summary(), "snapshots_written": files,
    }
    write_manifest(out / "manifest.json", payload)
    print(json.dumps({"command": "homogenize",
                      "kappa_star": payload["kappa_star"],
                      "solver": run.solver_summary()}, sort_keys=True))
    return 0


def cmd_corrector(cfg: ExperimentConfig) -> int:
    eps = _single_eps(cfg)
    field = fields.parse_field(cfg.field)
    a = fields.parse_initial(cfg.initial)
    sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
    run = timefrac.run_homogenized(sol.kappa_star, cfg.alpha, cfg.grid_n, cfg.dt,
                                   cfg.T, a, tol=cfg.solver_tol)
    out = Path(cfg.out)
    steps = cfg.snapshots or tuple(run.step_of_time(t) + 1 for t in cfg.times)
    written = []
    variant = "modified_u1" if cfg.theta is not None else "U1"
    for k1 in steps:
        k = int(k1) - 1
        if not 0 <= k <= run.n_steps:
            raise ConfigError(f"snapshot step {k1} outside 1..{run.n_steps + 1}")
        if cfg.theta is not None:
            cf = corrector.build_modified_u1(run, sol, eps, cfg.theta, k)
        else:
            cf = corrector.build_U1(run, sol, eps, k)
        path = out / "snapshots" / f"{variant}_k{int(k1):04d}.csv"
        write_nodal_csv(path, run.grid, cf.u1)
        svg_path = out / "plots" / f"{variant}_k{int(k1):04d}.svg"
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        svg_path.write_text(svg_heatmap(cf.u1, f"{variant} at step k={int(k1)} (t={k * run.dt:g})"))
        written.append(str(path))
    write_manifest(out / "manifest.json", {
        "command": "corrector", "config": cfg.as_dict(), "variant": variant,
        "kappa_star": _kappa_star_list(sol.kappa_star), "snapshots_written": written,
    })
    print(json.dumps({"command": "corrector", "variant": variant,
                      "files": len(written)}, sort_keys=True))
    return 0


def cmd_study(cfg: ExperimentConfig) -> int:
    field = fields.parse_field(cfg.field)
    a = fields.parse_initial(cfg.initial)
    out = Path(cfg.out)
    manifest = {"command": "study", "config": cfg.as_dict(), "partial": True}
    try:
        sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
        manifest["kappa_star"] = _kappa_star_list(sol.kappa_star)
        homog = timefrac.run_homogenized(sol.kappa_star, cfg.alpha, cfg.grid_n,
                                         cfg.dt, cfg.T, a, tol=cfg.solver_tol)
        manifest["homogenized_solver"] = homog.solver_summary()

        def one_eps(eps: float):
            fine = timefrac.run_fine(field, eps, cfg.alpha, cfg.grid_n, cfg.dt,
                                     cfg.T, a, tol=cfg.solver_tol)
            u1s = [corrector.build_U1(homog, sol, eps, fine.step_of_time(t))
                   for t in cfg.times]
            report = analysis.compare_runs(fine, u1s, config={
                "eps": eps, "alpha": cfg.alpha, "field": field.id,
                "initial": a.id, "grid_n": cfg.grid_n, "cell_n": cfg.cell_n,
                "dt": cfg.dt,
            })
            summary = fine.solver_summary()
            return report, summary

        if cfg.jobs > 1 and len(cfg.eps) > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(one_eps, cfg.eps))
        else:
            results = [one_eps(e) for e in cfg.eps]

        all_rows = []
        manifest["fine_solvers"] = {}
        for eps, (report, summary) in zip(cfg.eps, results):
            write_errors_csv(out / _eps_dirname(eps) / "errors.csv", report.rows)
            write_manifest(out / _eps_dirname(eps) / "manifest.json", {
                "command": "study/eps", "eps": eps, "config": report.config,
                "solver": summary,
            })
            manifest["fine_solvers"][_eps_dirname(eps)] = summary
            all_rows.extend((eps, row) for row in report.rows)
        write_errors_csv(out / "errors.csv", all_rows, with_eps=True)

        rates = {}
        if len(cfg.eps) >= 2:
            for ti, t in enumerate(cfg.times):
                for metric in ("abs_l2", "rel_l2", "abs_h1", "rel_h1"):
                    pts = [(eps, getattr(report.rows[ti], metric))
                           for eps, (report, _) in zip(cfg.eps, results)]
                    rates[(t, metric)] = analysis.estimate_rate(pts)
            write_rates_csv(out / "rates.csv", rates)
            manifest["rates"] = {f"t={t:g}/{metric}": est.rate
                                 for (t, metric), est in sorted(rates.items())}
            series = {}
            for metric in ("rel_l2", "rel_h1"):
                for t in cfg.times:
                    pts = rates[(t, metric)]
                    series[f"{metric} t={t:g}"] = list(zip(pts.eps_values, pts.errors))
            plot = out / "plots" / "convergence.svg"
            plot.parent.mkdir(parents=True, exist_ok=True)
            plot.write_text(svg_loglog(series, f"first-order approximation error, "
                                               f"field={field.id}, a={a.id}"))
        manifest["partial"] = False
        write_manifest(out / "manifest.json", manifest)
    except Exception:
        write_manifest(out / "manifest.json", manifest)  # partial: true
        raise
    print(json.dumps({"command": "study",
                      "rates": manifest.get("rates", {}),
                      "out": str(out)}, sort_keys=True))
    return 0


def cmd_snapshots(cfg: ExperimentConfig, which: str) -> int:
    field = fields.parse_field(cfg.field)
    a = fields.parse_initial(cfg.initial)
    out = Path(cfg.out)
    if which == "initial":
        from . import fem
        from .grid import make_grid
        grid = make_grid(cfg.grid_n)
        u = fem.interpolate(grid, a)
        write_nodal_csv(out / "snapshots" / "initial.csv", grid, u)
        (out / "plots").mkdir(parents=True, exist_ok=True)
        (out / "plots" / "initial.svg").write_text(svg_heatmap(u, f"initial data {a.id}"))
        write_manifest(out / "manifest.json", {"command": "snapshots",
                                               "run": which, "config": cfg.as_dict()})
        print(json.dumps({"command": "snapshots", "run": which, "files": 1}, sort_keys=True))
        return 0

    if which == "fine":
        eps = _single_eps(cfg)
        run = timefrac.run_fine(field, eps, cfg.alpha, cfg.grid_n, cfg.dt, cfg.T, a,
                                tol=cfg.solver_tol)
    elif which == "homogenized":
        sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
        run = timefrac.run_homogenized(sol.kappa_star, cfg.alpha, cfg.grid_n, cfg.dt,
                                       cfg.T, a, tol=cfg.solver_tol)
    else:
        raise ConfigError(f"unknown snapshot run {which!r}")
    files = _export_snapshots(out, run, cfg.snapshots, which)
    write_manifest(out / "manifest.json", {"command": "snapshots", "run": which,
                                           "config": cfg.as_dict(),
                                           "snapshots_written": files})
    print(json.dumps({"command": "snapshots", "run": which, "files": len(files)},
                     sort_keys=True))
    return 0


def cmd_oracle(cfg: ExperimentConfig, kind: str, z_values: tuple) -> int:
    if kind == "ml":
        if not z_values:
            raise ConfigError("oracle ml needs at least one --z value")
        entries = [{"z": z, "value": analysis.mittag_leffler(cfg.alpha, z)}
                   for z in z_values]
        print(json.dumps({"oracle": "mittag-leffler", "alpha": cfg.alpha,
                          "entries": entries}, sort_keys=True))
        return 0
    if kind == "layered":
        if not cfg.field.startswith("layered:"):
            raise ConfigError("oracle layered needs --field layered:<name>")
        field = fields.parse_field(cfg.field)
        k_along, k_across = analysis.layered_cell_oracle(lambda y: field(y, np.zeros_like(y)))
        sol = cell.solve_cell(field, cfg.cell_n, tol=min(cfg.solver_tol, 1e-12))
        print(json.dumps({
            "oracle": "layered", "field": field.id,
            "oracle_1d": {"along": k_along, "across": k_across},
            "cell_2d": _kappa_star_list(sol.kappa_star),
        }, sort_keys=True))
        return 0
    raise ConfigError(f"unknown oracle kind {kind!r}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfhomog",
                description="time-fractional diffusion homogenization toolkit")
    p.add_argument("--version", action="version", version=f"tfhomog {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--eps", help="comma-separated eps list, e.g. 0.125,0.0625")
        sp.add_argument("--grid-n", dest="grid_n", type=int)
        sp.add_argument("--cell-n", dest="cell_n", type=int)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--T", type=float)
        sp.add_argument("--field")
        sp.add_argument("--initial")
        sp.add_argument("--theta", type=float)
        sp.add_argument("--out")
        sp.add_argument("--snapshots", help="comma-separated 1-based step indices")
        sp.add_argument("--times", help="comma-separated report times")
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--tol", type=float, help="linear solver relative tolerance")
        sp.add_argument("--paper-scale", action="store_true",
                        help=f"use the full grid_n={PAPER_GRID_N} resolution")

    for name in ("cell", "fine", "homogenize", "corrector", "study"):
        add_common(sub.add_parser(name))
    sp = sub.add_parser("snapshots")
    add_common(sp)
    sp.add_argument("--run", choices=("fine", "homogenized", "initial"), default="fine")
    sp = sub.add_parser("oracle")
    add_common(sp)
    sp.add_argument("--kind", choices=("ml", "layered"), default="ml")
    sp.add_argument("--z", help="comma-separated arguments for the ml oracle")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args)
        if args.command == "cell":
            return cmd_cell(cfg)
        if args.command == "fine":
            return cmd_fine(cfg)
        if args.command == "homogenize":
            return cmd_homogenize(cfg)
        if args.command == "corrector":
            return cmd_corrector(cfg)
        if args.command == "study":
            return cmd_study(cfg)
        if args.command == "snapshots":
            return cmd_snapshots(cfg, args.run)
        if args.command == "oracle":
            z = _parse_float_list(args.z) if args.z else ()
            return cmd_oracle(cfg, args.kind, z)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SolverFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
