"""End-to-end pipeline driver.

Reads a TOML run configuration, builds the model and path, plans the
minimum-time parametrization with and without the wrench bounds,
optionally verifies the plan under simulated admittance control, and
writes CSV artifacts plus a plain-text report.

Exit codes: 0 success, 2 configuration error, 3 infeasible plan,
4 force-bound violation in plan-simulate mode. All floating output is
printed with 9 significant digits; runs are deterministic, so repeated
runs byte-reproduce every artifact.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import demo as demo_mod
from .admittance import (
    AdmittanceParams,
    EnvironmentModel,
    ee_reference,
    simulate,
    verify_force_bounds,
)
from .errors import (
    ConfigError,
    InfeasibleLimitError,
    InfeasiblePlanError,
    SimulationDivergedError,
)
from .limits import velocity_limit_profile
from .path import PathSpec, TaskPath, build_path, planar_ik, read_path_csv
from .planner import PhaseGrid, plan, to_joint_trajectory
from .projection import project_dynamics
from .robot_model import Planar2R, load_model
from .wrench import (
    ContactSpec,
    WrenchProfile,
    contact_wrench_bounds,
    modified_torque_limits,
    read_profile_csv,
    tangent_from_task,
)

MODES = ("plan", "plan-compare", "plan-simulate")
ENVELOPE_TOL = 1e-6
FMT = "%.9g"


@dataclass
class SimSettings:
    params: AdmittanceParams
    env: EnvironmentModel
    dt: float
    transient: float
    force_lower: float
    force_upper: float
    guard: float


@dataclass
class RunConfig:
    model: object
    path: PathSpec
    task: TaskPath
    tau_lower: np.ndarray
    tau_upper: np.ndarray
    qd_lower: np.ndarray
    qd_upper: np.ndarray
    profile: WrenchProfile
    gamma_mode: str
    grid: PhaseGrid
    sim: SimSettings
    out_dir: str
    sample_dt: float


def _get(table, section, key, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required field")
        return default
    return table[key]


def _vector(table, section, key, n):
    raw = _get(table, section, key, required=True)
    vec = np.asarray(raw, dtype=float)
    if vec.shape != (n,):
        raise ConfigError(f"{section}.{key}", f"expected {n} entries")
    return vec


def load_config(config_path, grid_override=None, no_wrench=False, out_override=None) -> RunConfig:
    """Parse and validate a TOML run configuration into built objects."""
    if not os.path.exists(config_path):
        raise ConfigError("config", f"file not found: {config_path}")
    with open(config_path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"TOML parse error: {exc}") from exc
    base_dir = os.path.dirname(os.path.abspath(config_path))

    model = load_model(_get(raw, "config", "model", required=True), base_dir)

    path_tab = _get(raw, "config", "path", required=True)
    path_file = _get(path_tab, "path", "file", required=True)
    if not os.path.isabs(path_file):
        path_file = os.path.join(base_dir, path_file)
    if not os.path.exists(path_file):
        raise ConfigError("path.file", f"file not found: {path_file}")
    scheme = _get(path_tab, "path", "scheme", "cubic-spline")
    loaded = read_path_csv(path_file)
    task = None
    if isinstance(loaded, TaskPath):
        task = loaded
        if not isinstance(model, Planar2R):
            raise ConfigError("path.file", "task-space paths need the planar-2r model")
        branch = _get(path_tab, "path", "branch", "elbow-up")
        try:
            q = planar_ik(task, model, branch=branch)
        except ValueError as exc:
            raise ConfigError("path.file", str(exc)) from exc
        path = build_path(task.lambda_grid, q, scheme=scheme)
    else:
        grid_vals, q = loaded
        path = build_path(grid_vals, q, scheme=scheme)
    n = path.n
    if isinstance(model, Planar2R) and model.n != n:
        raise ConfigError("path.file", f"path has {n} joints, model has {model.n}")

    lim = _get(raw, "config", "limits", required=True)
    tau_upper = _vector(lim, "limits", "tau_upper", n)
    tau_lower = _vector(lim, "limits", "tau_lower", n)
    qd_upper = _vector(lim, "limits", "qd_upper", n)
    qd_lower = _vector(lim, "limits", "qd_lower", n)
    if not (tau_lower < tau_upper).all():
        raise ConfigError("limits.tau_lower", "need tau_lower < tau_upper per joint")
    if not ((qd_lower < 0.0).all() and (qd_upper > 0.0).all()):
        raise ConfigError("limits.qd_lower", "need qd_lower < 0 < qd_upper per joint")

    gamma_mode = "segment"
    profile = WrenchProfile.zero(path.lambda_grid)
    wtab = raw.get("wrench")
    if wtab is not None and not no_wrench:
        gamma_mode = _get(wtab, "wrench", "gamma_mode", "segment")
        if gamma_mode not in ("segment", "box"):
            raise ConfigError("wrench.gamma_mode", f"unknown mode {gamma_mode!r}")
        kind = _get(wtab, "wrench", "kind", required=True)
        if kind == "contact":
            try:
                spec = ContactSpec(
                    normal_axis=int(_get(wtab, "wrench", "normal_axis", 0)),
                    f_lower=_get(wtab, "wrench", "f_lower", required=True),
                    f_upper=_get(wtab, "wrench", "f_upper", required=True),
                    mu=float(_get(wtab, "wrench", "mu", 0.0)),
                    tangent=wtab.get("tangent"),
                )
                tangent = spec.tangent
                if tangent is None and spec.mu > 0.0:
                    if task is None:
                        raise ConfigError(
                            "wrench.tangent",
                            "needed: no task path to derive the friction direction from",
                        )
                    tangent = tangent_from_task(
                        task.xy, task.lambda_grid, spec.normal_axis
                    )
                profile = contact_wrench_bounds(spec, path, tangent)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError("wrench", str(exc)) from exc
        elif kind == "profile":
            table = _get(wtab, "wrench", "table", required=True)
            if not os.path.isabs(table):
                table = os.path.join(base_dir, table)
            if not os.path.exists(table):
                raise ConfigError("wrench.table", f"file not found: {table}")
            try:
                profile = read_profile_csv(table)
            except ValueError as exc:
                raise ConfigError("wrench.table", str(exc)) from exc
        else:
            raise ConfigError("wrench.kind", f"unknown wrench kind {kind!r}")

    gtab = raw.get("grid", {})
    if grid_override is not None:
        n_lam, n_ld = grid_override
        gtab = dict(gtab, n_lambda=n_lam, n_lambda_dot=n_ld)
    try:
        grid = PhaseGrid(
            n_lambda=int(_get(gtab, "grid", "n_lambda", 500)),
            n_lambda_dot=int(_get(gtab, "grid", "n_lambda_dot", 5000)),
            lambda_dot_max=float(_get(gtab, "grid", "lambda_dot_max", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from exc

    sim = None
    stab = raw.get("sim")
    if stab is not None:
        try:
            params = AdmittanceParams(
                mass=_vector(stab, "sim", "mass", 3),
                damping=_vector(stab, "sim", "damping", 3),
                stiffness=_vector(stab, "sim", "stiffness", 3),
                h_d=_hd_vector(stab),
            )
            env = EnvironmentModel(
                rest_position=float(_get(stab, "sim", "rest_position", required=True)),
                stiffness=float(_get(stab, "sim", "contact_stiffness", 1e4)),
                mu=float(_get(stab, "sim", "mu", 0.0)),
                axis=int(_get(stab, "sim", "axis", 0)),
            )
        except ValueError as exc:
            raise ConfigError("sim", str(exc)) from exc
        sim = SimSettings(
            params=params,
            env=env,
            dt=float(_get(stab, "sim", "dt", 0.002)),
            transient=float(_get(stab, "sim", "transient", 0.5)),
            force_lower=float(_get(stab, "sim", "force_lower", required=True)),
            force_upper=float(_get(stab, "sim", "force_upper", required=True)),
            guard=float(_get(stab, "sim", "guard", 1.0)),
        )
        if sim.dt <= 0.0:
            raise ConfigError("sim.dt", "control period must be positive")

    otab = raw.get("output", {})
    out_dir = out_override or _get(otab, "output", "directory", "out")
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base_dir, out_dir)
    sample_dt = float(_get(otab, "output", "sample_dt", 0.002))
    if sample_dt <= 0.0:
        raise ConfigError("output.sample_dt", "must be positive")

    return RunConfig(
        model=model,
        path=path,
        task=task,
        tau_lower=tau_lower,
        tau_upper=tau_upper,
        qd_lower=qd_lower,
        qd_upper=qd_upper,
        profile=profile,
        gamma_mode=gamma_mode,
        grid=grid,
        sim=sim,
        out_dir=out_dir,
        sample_dt=sample_dt,
    )


def _hd_vector(stab):
    if "h_d" in stab:
        return np.asarray(stab["h_d"], dtype=float)
    f_d = float(_get(stab, "sim", "f_d", required=True))
    axis = int(_get(stab, "sim", "axis", 0))
    h_d = np.zeros(3)
    h_d[axis] = f_d
    return h_d


def _save(out_dir, name, header, array):
    np.savetxt(
        os.path.join(out_dir, name),
        array,
        delimiter=",",
        header=header,
        comments="",
        fmt=FMT,
    )


def _joint_cols(prefix, n):
    return [f"{prefix}_{j + 1}" for j in range(n)]


def _write_ppt(out_dir, name, ppt):
    _save(
        out_dir,
        name,
        "lambda,lambda_dot,lambda_ddot,t",
        np.column_stack([ppt.lam, ppt.lam_dot, ppt.lam_ddot, ppt.t]),
    )


def _write_traj(out_dir, name, traj):
    n = traj.n
    header = ",".join(
        ["t"]
        + _joint_cols("q", n)
        + _joint_cols("qd", n)
        + _joint_cols("qdd", n)
        + _joint_cols("tau", n)
    )
    _save(
        out_dir,
        name,
        header,
        np.column_stack([traj.t, traj.q, traj.qd, traj.qdd, traj.tau]),
    )


def _write_envelopes(out_dir, mod_limits):
    n = mod_limits.n
    header = ",".join(
        ["lambda"] + _joint_cols("tau_lo", n) + _joint_cols("tau_hi", n)
    )
    _save(
        out_dir,
        "envelopes.csv",
        header,
        np.column_stack([mod_limits.lambda_grid, mod_limits.lower, mod_limits.upper]),
    )


def _write_sim_trace(out_dir, trace):
    header = (
        "t,xd_x,xd_y,xd_z,xc_x,xc_y,xc_z,"
        "f_normal,f_tan1,f_tan2,herr_normal,herr_tan1,herr_tan2"
    )
    axes = [trace.contact_axis] + [ax for ax in (0, 1, 2) if ax != trace.contact_axis]
    _save(
        out_dir,
        "sim_trace.csv",
        header,
        np.column_stack(
            [trace.t, trace.x_d, trace.x_c, trace.h_e[:, axes], trace.h_err[:, axes]]
        ),
    )


def _count_violations(traj):
    """Samples whose motion torque leaves the attached envelopes."""
    over = traj.tau_motion - traj.limit_upper
    under = traj.limit_lower - traj.tau_motion
    worst = max(float(over.max()), float(under.max()))
    bad = (over > ENVELOPE_TOL) | (under > ENVELOPE_TOL)
    return int(bad.any(axis=1).sum()), worst


def run(config: RunConfig, mode: str) -> int:
    """Execute the pipeline; returns the process exit code."""
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}; pick one of {MODES}")
    if mode == "plan-simulate" and config.sim is None:
        raise ConfigError("sim", "plan-simulate needs a [sim] section")
    os.makedirs(config.out_dir, exist_ok=True)

    projected = project_dynamics(config.model, config.path)
    vel_profile = velocity_limit_profile(config.path, config.qd_lower, config.qd_upper)
    mod_aware = modified_torque_limits(
        config.tau_lower, config.tau_upper, config.profile, projected,
        mode=config.gamma_mode,
    )
    ppt = plan(projected, mod_aware, vel_profile, config.grid)
    traj = to_joint_trajectory(
        ppt, config.path, projected, mod_aware,
        profile=config.profile, sample_dt=config.sample_dt,
    )
    _write_ppt(config.out_dir, "ppt.csv", ppt)
    _write_traj(config.out_dir, "joint_traj.csv", traj)
    _write_envelopes(config.out_dir, mod_aware)
    aware_bad, aware_worst = _count_violations(traj)

    lines = [
        f"mode: {mode}",
        f"grid: {config.grid.n_lambda} x {config.grid.n_lambda_dot}, "
        f"lambda_dot_max {config.grid.lambda_dot_max:.9g}",
        f"path: Lambda {config.path.total_length:.9g}, "
        f"{config.path.lambda_grid.size} samples, {config.path.n} joints",
        f"wrench profile: {'zero' if config.profile.is_zero() else 'active'} "
        f"(gamma mode {config.gamma_mode})",
        f"t_f (wrench-aware): {ppt.t_f:.9g} s",
        f"wrench-aware modified-limit violations: {aware_bad} samples "
        f"(worst excess {aware_worst:.9g} N*m, tol {ENVELOPE_TOL:.9g})",
    ]

    exit_code = 0
    if mode in ("plan-compare", "plan-simulate"):
        zero_profile = WrenchProfile.zero(config.path.lambda_grid)
        mod_blind = modified_torque_limits(
            config.tau_lower, config.tau_upper, zero_profile, projected,
            mode=config.gamma_mode,
        )
        ppt_blind = plan(projected, mod_blind, vel_profile, config.grid)
        # Blind trajectory checked against the wrench-aware envelopes:
        # exactly the comparison behind the "planned torque can break the
        # modified limit" observation.
        traj_blind = to_joint_trajectory(
            ppt_blind, config.path, projected, mod_aware,
            profile=zero_profile, sample_dt=config.sample_dt,
        )
        _write_ppt(config.out_dir, "ppt_blind.csv", ppt_blind)
        _write_traj(config.out_dir, "joint_traj_blind.csv", traj_blind)
        blind_bad, blind_worst = _count_violations(traj_blind)
        diff = ppt.lam_dot - ppt_blind.lam_dot
        lines += [
            f"t_f (wrench-blind): {ppt_blind.t_f:.9g} s",
            f"t_f difference (aware - blind): {ppt.t_f - ppt_blind.t_f:.9g} s",
            f"ppt lambda_dot diff per column (aware - blind): "
            f"min {diff.min():.9g}, max {diff.max():.9g}, mean {diff.mean():.9g}",
            f"columns with aware below blind: {int((diff < 0).sum())} / {diff.size}",
            f"wrench-blind modified-limit violations: {blind_bad} samples "
            f"(worst excess {blind_worst:.9g} N*m)",
        ]

    if mode == "plan-simulate":
        sim = config.sim
        if config.task is not None:
            steps = int(np.floor(traj.t[-1] / sim.dt)) + 1
            times = np.arange(steps) * sim.dt
            lam_t = np.interp(times, traj.t, traj.lam)
            x_d = np.zeros((steps, 3))
            x_d[:, 0] = np.interp(lam_t, config.task.lambda_grid, config.task.xy[:, 0])
            x_d[:, 1] = np.interp(lam_t, config.task.lambda_grid, config.task.xy[:, 1])
        elif isinstance(config.model, Planar2R):
            x_d = ee_reference(traj, config.model, sim.dt)
        else:
            raise ConfigError(
                "sim", "plan-simulate needs a task path or an analytic model"
            )
        trace = simulate(x_d, sim.params, sim.env, dt=sim.dt, guard=sim.guard)
        _write_sim_trace(config.out_dir, trace)
        check = verify_force_bounds(
            trace, sim.force_lower, sim.force_upper, transient=sim.transient
        )
        verdict = "PASS" if check.ok else "FAIL"
        lines += [
            f"simulated normal force after {check.transient:.9g} s transient: "
            f"min {check.f_min:.9g} N, max {check.f_max:.9g} N",
            f"force within [{sim.force_lower:.9g}, {sim.force_upper:.9g}] N: {verdict} "
            f"({check.n_violations} violations)",
        ]
        if not check.ok:
            exit_code = 4

    with open(os.path.join(config.out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return exit_code


def write_demo(directory) -> None:
    """Write the 2R writing-demo config and task path CSV."""
    os.makedirs(directory, exist_ok=True)
    task = demo_mod.demo_task()
    from .path import write_task_path_csv

    write_task_path_csv(os.path.join(directory, "path.csv"), task)
    with open(os.path.join(directory, "demo.toml"), "w", encoding="utf-8") as fh:
        fh.write(demo_mod.DEMO_TOML)


def _parse_grid(text):
    try:
        n_lam, n_ld = text.lower().split("x")
        return int(n_lam), int(n_ld)
    except ValueError as exc:
        raise ConfigError("--grid", f"expected NxM, got {text!r}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="totplan",
        description="Minimum-time path parametrization under bounded "
        "end-effector wrenches, with admittance-control verification.",
    )
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--mode", default="plan", choices=MODES)
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--grid", help="override grid size as NxM")
    parser.add_argument(
        "--no-wrench", action="store_true",
        help="ignore the configured wrench bounds (plan with raw limits)",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="seed for randomized test tooling (the pipeline itself is deterministic)",
    )
    parser.add_argument(
        "--make-demo", metavar="DIR",
        help="write the built-in 2R writing demo (config + path) and exit",
    )
    args = parser.parse_args(argv)

    if args.make_demo:
        write_demo(args.make_demo)
        print(f"demo written to {args.make_demo}")
        return 0
    if not args.config:
        parser.error("--config is required (or use --make-demo)")

    try:
        grid_override = _parse_grid(args.grid) if args.grid else None
        config = load_config(
            args.config,
            grid_override=grid_override,
            no_wrench=args.no_wrench,
            out_override=args.out,
        )
        return run(config, args.mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleLimitError, InfeasiblePlanError) as exc:
        print(f"infeasible plan: {exc}", file=sys.stderr)
        return 3
    except SimulationDivergedError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
