"""Experiment runner: run / classify / sweep over TOML scenario files.

Exit codes: 0 on a finished or horizon-limited run, 2 on configuration
errors, 3 when the classifier pre-flight rejects the parameters, 10 when the
run ends in detected blow-up (a result, not a failure, but scripts need to
tell it apart).  The environment variable EXPANSE_SIM_THREADS caps how many
sweep simulations run in parallel.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import itertools
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .background import ScaleFactor
from .classifier import (ProblemSpec, classify, eval_A, p_parabolic_floor,
                         theorem1_verdict)
from .grid import GridSpec
from .initial import make_initial
from .runio import scenario_hash, write_manifest, write_records, write_snapshot
from .solver import Safeguards, SolverConfig, Status, evolve, initial_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REJECTED = 3
EXIT_BLOWUP = 10

SWEEP_AXES = ("p", "sigma", "a1", "omega", "lambda")


class ConfigError(Exception):
    pass


def _parse_angle(value) -> float:
    """Angles are floats or strings like 'pi/4', '-3*pi/8'."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.replace(" ", "")
        sign = 1.0
        if text.startswith("-"):
            sign, text = -1.0, text[1:]
        num, _, den = text.partition("/")
        try:
            factor = 1.0
            if num.endswith("*pi"):
                factor = float(num[:-3]) * math.pi
            elif num == "pi":
                factor = math.pi
            else:
                factor = float(num)
            if den:
                factor /= float(den)
            return sign * factor
        except ValueError:
            pass
    raise ConfigError(f"cannot parse angle {value!r} (use a number or 'pi/4')")


def _parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"cannot parse complex coupling {value!r} "
                      "(use a number or [re, im])")


class _Section:
    """Dict wrapper producing config errors that name the dotted field."""

    def __init__(self, data: dict, name: str):
        self.data = data
        self.name = name

    def require(self, key: str):
        if key not in self.data:
            raise ConfigError(f"missing field '{self.name}.{key}'")
        return self.data[key]

    def get(self, key: str, default=None):
        return self.data.get(key, default)


@dataclass
class Scenario:
    name: str
    problem: ProblemSpec
    grid: GridSpec | None
    initial_kind: str
    initial_params: dict
    seed: int | None
    s_end: float | None  # None means run to the horizon
    step: float
    m_mass: float
    hbar: float
    nonlinearity: str
    write_records: bool
    snapshots_every: int
    plots: bool
    energy_sign: int | None
    weighted_l2: bool | None


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc


def scenario_from_config(config: dict, require_grid: bool = True) -> Scenario:
    if "scenario" not in config:
        raise ConfigError("missing section 'scenario'")
    if "spec" not in config:
        raise ConfigError("missing section 'spec'")
    scen = _Section(config["scenario"], "scenario")
    spec = _Section(config["spec"], "spec")
    gsec = _Section(config.get("grid", {}), "grid")
    init = _Section(config.get("initial", {}), "initial")
    outs = _Section(config.get("outputs", {}), "outputs")

    try:
        problem = ProblemSpec(
            n=int(spec.require("n")),
            sigma=float(spec.require("sigma")),
            a0=float(spec.require("a0")),
            a1=float(spec.require("a1")),
            lam=_parse_complex(spec.require("lambda")),
            omega=_parse_angle(spec.require("omega")),
            sign=int(spec.get("sign", 1)),
            p=float(spec.require("p")),
            mu0=float(spec.get("mu0", 0.0)),
        )
        if require_grid or config.get("grid"):
            grid = GridSpec(
                dim=int(gsec.require("dim")),
                points=int(gsec.require("points")),
                length=float(gsec.require("length")),
                center=float(gsec.get("center", 0.0)),
            )
        else:
            grid = None
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    s_end_raw = scen.require("s_end")
    if isinstance(s_end_raw, str):
        if s_end_raw != "horizon":
            raise ConfigError("scenario.s_end must be a number or 'horizon'")
        s_end = None
    else:
        s_end = float(s_end_raw)
        s0 = ScaleFactor(problem.scale_params).s_horizon
        if s_end > s0:
            raise ConfigError(
                f"scenario.s_end = {s_end} exceeds the s-horizon {s0:.6g}")

    params = {k: v for k, v in init.data.items() if k not in ("kind", "seed")}
    energy_sign = spec.get("energy_sign")
    return Scenario(
        name=str(scen.require("name")),
        problem=problem,
        grid=grid,
        initial_kind=str(init.get("kind", "gaussian")),
        initial_params=params,
        seed=init.get("seed"),
        s_end=s_end,
        step=float(scen.require("step")),
        m_mass=float(spec.get("m", 1.0)),
        hbar=float(spec.get("hbar", 1.0)),
        nonlinearity=str(spec.get("nonlinearity", "gauge-invariant")),
        write_records=bool(outs.get("records", True)),
        snapshots_every=int(outs.get("snapshots_every", 0)),
        plots=bool(outs.get("plots", False)),
        energy_sign=None if energy_sign is None else int(energy_sign),
        weighted_l2=spec.get("weighted_l2"),
    )


def build_solver_config(scn: Scenario) -> SolverConfig:
    background = ScaleFactor(scn.problem.scale_params)
    return SolverConfig(
        sign=scn.problem.sign, omega=scn.problem.omega, lam=scn.problem.lam,
        p=scn.problem.p, step=scn.step, background=background,
        m_mass=scn.m_mass, hbar=scn.hbar, nonlinearity=scn.nonlinearity,
        safeguards=Safeguards(),
    )


def _preflight(problem: ProblemSpec) -> None:
    try:
        theorem1_verdict(problem)
    except ValueError as exc:
        raise _Rejection(str(exc)) from exc


class _Rejection(Exception):
    pass


def _report_text(problem: ProblemSpec, energy_sign=None, weighted_l2=None) -> str:
    report = classify(problem, energy_sign, weighted_l2)
    sd = report.small_data
    lines = [
        f"critical power p(mu0)        : {report.p_crit:.12g}",
        f"intermediate power p1(mu0)   : "
        + ("undefined (sigma = -1)" if report.p1_crit is None
           else f"{report.p1_crit:.12g}"),
        f"phase floor p0               : {report.p0_crit:.12g}",
        f"Lebesgue exponent q(mu0)     : {report.q_mu0:.12g}",
        f"t-horizon                    : {report.t_horizon:.12g}",
        f"s-horizon                    : {report.s_horizon:.12g}",
        f"A over the full window       : {report.A_full_window:.12g}",
        f"local well-posedness         : "
        + ("yes, " + sd.local_reason if sd.local_wellposed else "no: " + sd.local_reason),
        "small-data global            : "
        + (f"yes, condition ({sd.fired_condition}) fired" if sd.small_data_global
           else "no condition fired (local only)"),
    ]
    for check in report.corollaries.values():
        lines.append(f"{check.name:29s}: {check.applicable}")
        for h in check.violated:
            lines.append(f"    violated     - {h}")
        for h in check.unverifiable:
            lines.append(f"    unverifiable - {h}")
    return "\n".join(lines)


def _report_kv(problem: ProblemSpec, energy_sign=None, weighted_l2=None) -> str:
    report = classify(problem, energy_sign, weighted_l2)
    sd = report.small_data
    kv = {
        "p_crit": f"{report.p_crit:.17g}",
        "p1_crit": "nan" if report.p1_crit is None else f"{report.p1_crit:.17g}",
        "p0_crit": f"{report.p0_crit:.17g}",
        "q_mu0": f"{report.q_mu0:.17g}",
        "t_horizon": f"{report.t_horizon:.17g}",
        "s_horizon": f"{report.s_horizon:.17g}",
        "A_full_window": f"{report.A_full_window:.17g}",
        "local_wellposed": str(sd.local_wellposed).lower(),
        "fired_condition": sd.fired_condition or "none",
        "small_data_global": str(sd.small_data_global).lower(),
    }
    for check in report.corollaries.values():
        kv[check.name.replace("-", "_")] = check.applicable
    return "\n".join(f"{k}={v}" for k, v in kv.items())


def cmd_classify(args) -> int:
    try:
        config = load_config(args.config)
        scn = scenario_from_config(config, require_grid=False)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _preflight(scn.problem)
    except _Rejection as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    print(_report_text(scn.problem, scn.energy_sign, scn.weighted_l2))
    if not args.quiet:
        print("---")
        print(_report_kv(scn.problem, scn.energy_sign, scn.weighted_l2))
    return EXIT_OK


def cmd_run(args) -> int:
    started = time.time()
    try:
        config = load_config(args.config)
        scn = scenario_from_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _preflight(scn.problem)
    except _Rejection as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED

    seed = args.seed_override if args.seed_override is not None else scn.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        u0 = make_initial(scn.grid, scn.initial_kind, scn.initial_params, seed)
        cfg = build_solver_config(scn)
        state = initial_state(scn.grid, u0)
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    snapshot_paths: list[str] = []
    step_counter = itertools.count()

    def observer(record, st):
        step_no = next(step_counter)
        if step_no % scn.snapshots_every == 0:
            path = out_dir / f"{scn.name}-{step_no:06d}.field"
            write_snapshot(path, scn.grid, record.s, st.u)
            snapshot_paths.append(str(path))

    traj = evolve(cfg, state, s_end=scn.s_end,
                  observer=observer if scn.snapshots_every > 0 else None,
                  max_steps=args.max_steps)

    files: dict[str, object] = {}
    if scn.write_records:
        rec_path = out_dir / f"{scn.name}-records.csv"
        write_records(rec_path, traj.records)
        files["records"] = str(rec_path)
    if snapshot_paths:
        files["snapshots"] = snapshot_paths
    if scn.plots:
        plot_path = _write_plot(out_dir, scn.name, traj)
        if plot_path is not None:
            files["plot"] = str(plot_path)

    manifest = {
        "scenario": scn.name,
        "scenario_hash": scenario_hash(config, seed),
        "tool_version": __version__,
        "started_at": datetime.datetime.fromtimestamp(
            started, datetime.timezone.utc).isoformat(),
        "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "terminal_status": traj.status.value,
        "s_final": traj.final.s_now,
        "accepted_steps": traj.accepted_steps,
        "seed": seed,
        "files": files,
    }
    if traj.s_detect is not None:
        manifest["s_detect"] = traj.s_detect
        manifest["blowup_bracket"] = list(traj.final.blowup_bracket)
    manifest_path = out_dir / f"{scn.name}-manifest.json"
    write_manifest(manifest_path, manifest)

    if not args.quiet:
        print(f"{scn.name}: {traj.status.value} at s = {traj.final.s_now:.6g} "
              f"after {traj.accepted_steps} steps")
        if traj.s_detect is not None:
            print(f"blow-up detected inside s-bracket "
                  f"[{traj.final.blowup_bracket[0]:.6g}, {traj.s_detect:.6g}]")
        print(f"manifest: {manifest_path}")
    return EXIT_BLOWUP if traj.status is Status.BLOWN_UP else EXIT_OK


def _write_plot(out_dir: Path, name: str, traj) -> Path | None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("plots requested but matplotlib is unavailable", file=sys.stderr)
        return None
    s = traj.series("s")
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    axes[0, 0].plot(s, traj.series("charge"))
    axes[0, 0].set_ylabel("charge")
    axes[0, 1].plot(s, traj.series("energy"))
    axes[0, 1].set_ylabel("energy")
    axes[1, 0].semilogy(s, traj.series("max_amp"))
    axes[1, 0].set_ylabel("max |u|")
    axes[1, 0].set_xlabel("s")
    axes[1, 1].plot(s, traj.series("virial2"))
    axes[1, 1].set_ylabel("spatial variance")
    axes[1, 1].set_xlabel("s")
    fig.tight_layout()
    path = out_dir / f"{name}-overview.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _sweep_rows(scn: Scenario, sweep: dict):
    axes = sweep.get("axes")
    if not axes or not isinstance(axes, list) or len(axes) > 2:
        raise ConfigError("sweep.axes must list one or two of "
                          + ", ".join(SWEEP_AXES))
    for axis in axes:
        if axis not in SWEEP_AXES:
            raise ConfigError(f"unsupported sweep axis '{axis}'")
        if axis not in sweep:
            raise ConfigError(f"missing field 'sweep.{axis}' with the grid values")
    values = []
    for axis in axes:
        vals = sweep[axis]
        if axis == "omega":
            vals = [_parse_angle(v) for v in vals]
        values.append([float(v) for v in vals])
    cap = int(sweep.get("max_points", 10_000))
    total = 1
    for vals in values:
        total *= len(vals)
    if total > cap:
        raise ConfigError(f"sweep grid has {total} points, above the cap {cap}")

    base = scn.problem
    for combo in itertools.product(*values):
        override = dict(zip(axes, combo))
        kwargs = dict(n=base.n, sigma=base.sigma, a0=base.a0, a1=base.a1,
                      lam=base.lam, omega=base.omega, sign=base.sign,
                      p=base.p, mu0=base.mu0)
        for axis, val in override.items():
            kwargs["lam" if axis == "lambda" else axis] = val
        yield override, ProblemSpec(**kwargs)


_SWEEP_COLUMNS = ("fired_condition", "local_wellposed", "A_full_window",
                  "A_finite", "p0_crit")


def _sweep_row_result(scn, override, problem, simulate) -> dict:
    row = {k: f"{v:.17g}" for k, v in override.items()}
    try:
        verdict = theorem1_verdict(problem)
        a_inf = eval_A(problem, math.inf, "s")
        row["fired_condition"] = verdict.fired_condition or "none"
        row["local_wellposed"] = str(verdict.local_wellposed).lower()
        row["A_full_window"] = f"{a_inf:.17g}"
        row["A_finite"] = str(math.isfinite(a_inf)).lower()
        row["p0_crit"] = f"{p_parabolic_floor(problem.omega):.17g}"
    except ValueError as exc:
        row["fired_condition"] = "rejected"
        row["local_wellposed"] = "false"
        row["A_full_window"] = "nan"
        row["A_finite"] = "false"
        row["p0_crit"] = "nan"
        row["error"] = str(exc).replace(",", ";")
    if simulate:
        try:
            sub = dataclasses.replace(scn, problem=problem, write_records=False,
                                      snapshots_every=0, plots=False)
            u0 = make_initial(sub.grid, sub.initial_kind, sub.initial_params, sub.seed)
            cfg = build_solver_config(sub)
            traj = evolve(cfg, initial_state(sub.grid, u0), s_end=sub.s_end,
                          max_steps=2000)
            row["status"] = traj.status.value
        except ValueError as exc:
            row["status"] = "invalid:" + str(exc).replace(",", ";")
    return row


def cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
        sweep = config.get("sweep", {})
        simulate = bool(sweep.get("simulate", False))
        scn = scenario_from_config(config, require_grid=simulate)
        axes = sweep.get("axes") or []
        rows = list(_sweep_rows(scn, sweep))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    threads = int(os.environ.get("EXPANSE_SIM_THREADS", "1") or "1")
    results: list[dict]
    if simulate and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda rc: _sweep_row_result(scn, rc[0], rc[1], simulate), rows))
    else:
        results = [_sweep_row_result(scn, ov, pr, simulate) for ov, pr in rows]

    columns = list(axes) + list(_SWEEP_COLUMNS)
    if simulate:
        columns.append("status")
    if any("error" in row for row in results):
        columns.append("error")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / f"{scn.name}-sweep.csv"
    lines = [",".join(columns)]
    for row in results:
        lines.append(",".join(row.get(c, "") for c in columns))
    table.write_text("\n".join(lines) + "\n")
    if not args.quiet:
        print(f"{len(results)} rows -> {table}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expanse-sim",
        description="run, classify and sweep expanding-background field scenarios")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("classify", cmd_classify),
                     ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("config", help="path to a TOML scenario file")
        sp.add_argument("--out-dir", default=".", help="output directory")
        sp.add_argument("--quiet", action="store_true")
        if name == "run":
            sp.add_argument("--seed-override", type=int, default=None)
            sp.add_argument("--max-steps", type=int, default=None)
        sp.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
