"""Admittance-control execution of a planned trajectory against a spring wall.

The controller imposes mass-spring-damper dynamics on the deviation
z = x_d - x_c between the desired and the commanded (compliant)
position:

    M zdd + K_D zd + K_P z = -(h_d - h_e)

per translational axis (diagonal gains; orientation compliance is out
of scope). The inner position loop is idealized: the robot tracks the
compliant command exactly, x_m = x_c.

The environment is a unilateral linear spring along one base axis with
rest position x_e: contact exists while x_m < x_e, the virtual
penetration is x_e - x_m, and the exerted normal force is
k_e * max(0, x_e - x_m). Forces on the contact axis are kept
"pressing-positive" (the same convention the wrench profiles use);
since pressing moves the end effector toward smaller coordinates, the
simulator flips the sign of that one slot when feeding forces into the
admittance law so the loop closes with negative feedback.

Integration is fixed-step velocity-first with the viscous term handled
implicitly; a plain explicit step is unstable at the reference tuning
(K_D dt / M = 120 on the contact axis). The discrete fixed point
coincides with the continuous equilibrium, which satisfies

    K_P z = h_d - h_e,    h_e = k_e (x_e - x_d + z)

on the contact axis.

Stepping is strictly sequential per simulation; independent simulations
share nothing and may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SimulationDivergedError
from .robot_model import Planar2R, Wrench

__all__ = [
    "AdmittanceParams",
    "EnvironmentModel",
    "SimTrace",
    "ForceCheck",
    "contact_force",
    "simulate",
    "ee_reference",
    "verify_force_bounds",
]


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AdmittanceParams:
    """Diagonal admittance gains per base translational axis, plus h_d.

    ``h_d`` is the desired force in task components: the contact-axis
    slot is the desired pressing magnitude.
    """

    mass: np.ndarray
    damping: np.ndarray
    stiffness: np.ndarray
    h_d: np.ndarray

    def __post_init__(self):
        for name in ("mass", "damping", "stiffness", "h_d"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
            if getattr(self, name).shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
        for name in ("mass", "damping", "stiffness"):
            if not (getattr(self, name) > 0.0).all():
                raise ValueError(f"{name} entries must be positive")


@dataclass(frozen=True)
class EnvironmentModel:
    """Unilateral linear spring along one base axis."""

    rest_position: float
    stiffness: float
    mu: float = 0.0
    axis: int = 0

    def __post_init__(self):
        if not self.stiffness > 0.0:
            raise ValueError("contact stiffness must be positive")
        if self.mu < 0.0:
            raise ValueError("friction coefficient must be non-negative")
        if self.axis not in (0, 1, 2):
            raise ValueError("contact axis must index a translational axis (0-2)")

    @property
    def tangential_axes(self):
        return tuple(ax for ax in (0, 1, 2) if ax != self.axis)


def contact_force(env: EnvironmentModel, x_m, xd_m, t_dir=None) -> Wrench:
    """Wrench exerted on the environment at pose x_m, task components.

    Normal slot: k_e * max(0, x_e - x_m) (zero out of contact).
    Tangential slots: mu * normal opposing the tangential velocity;
    ``t_dir`` supplies the motion direction when the velocity is
    numerically zero, otherwise the friction force vanishes at rest.
    """
    x_m = np.asarray(x_m, dtype=float)
    xd_m = np.asarray(xd_m, dtype=float)
    force = np.zeros(3)
    penetration = env.rest_position - x_m[env.axis]
    if penetration <= 0.0:
        return Wrench(force, np.zeros(3))
    f_n = env.stiffness * penetration
    force[env.axis] = f_n
    if env.mu > 0.0:
        axes = env.tangential_axes
        v_t = xd_m[list(axes)]
        speed = float(np.linalg.norm(v_t))
        if speed > 1e-9:
            direction = -v_t / speed
        elif t_dir is not None:
            t_dir = np.asarray(t_dir, dtype=float)
            norm = float(np.linalg.norm(t_dir))
            direction = -t_dir / norm if norm > 0.0 else np.zeros(2)
        else:
            direction = np.zeros(2)
        force[list(axes)] = env.mu * f_n * direction
    return Wrench(force, np.zeros(3))


@dataclass(frozen=True)
class SimTrace:
    """Fixed-rate simulation record. ``h_e`` keeps task components."""

    t: np.ndarray
    x_d: np.ndarray
    x_c: np.ndarray
    z: np.ndarray
    h_e: np.ndarray
    h_err: np.ndarray
    contact_axis: int

    def __post_init__(self):
        for name in ("t", "x_d", "x_c", "z", "h_e", "h_err"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def x_m(self) -> np.ndarray:
        """Measured pose; identical to x_c under the ideal inner loop."""
        return self.x_c

    @property
    def normal_force(self) -> np.ndarray:
        return self.h_e[:, self.contact_axis]


def simulate(
    x_d,
    params: AdmittanceParams,
    env: EnvironmentModel,
    dt: float = 0.002,
    guard: float = 1.0,
) -> SimTrace:
    """Run the admittance loop along a task-space reference.

    ``x_d`` is a (T, 3) base-frame position reference sampled at the
    control period ``dt``. Raises ``SimulationDivergedError`` when the
    correction norm exceeds ``guard``.
    """
    x_d = np.asarray(x_d, dtype=float)
    if x_d.ndim != 2 or x_d.shape[1] != 3:
        raise ValueError("reference must be a (T, 3) array")
    if dt <= 0.0:
        raise ValueError("control period must be positive")
    steps = x_d.shape[0]
    sgn = np.ones(3)
    sgn[env.axis] = -1.0
    hd_base = sgn * params.h_d
    inv_m = 1.0 / params.mass
    damp_div = 1.0 + dt * params.damping * inv_m

    z = np.zeros(3)
    zd = np.zeros(3)
    x_c = np.empty_like(x_d)
    h_e = np.empty((steps, 3))
    h_err = np.empty((steps, 3))
    zs = np.empty((steps, 3))
    xc_prev = x_d[0]
    for k in range(steps):
        x_c[k] = x_d[k] - z
        zs[k] = z
        v_m = (x_c[k] - xc_prev) / dt if k > 0 else np.zeros(3)
        wrench = contact_force(env, x_c[k], v_m)
        h_e[k] = wrench.force
        h_err[k] = params.h_d - h_e[k]
        herr_base = hd_base - sgn * h_e[k]
        zd = (zd + dt * (-herr_base - params.stiffness * z) * inv_m) / damp_div
        z = z + dt * zd
        norm = float(np.linalg.norm(z))
        if norm > guard:
            raise SimulationDivergedError(k * dt, norm, guard)
        xc_prev = x_c[k]
    return SimTrace(
        t=np.arange(steps) * dt,
        x_d=x_d,
        x_c=x_c,
        z=zs,
        h_e=h_e,
        h_err=h_err,
        contact_axis=env.axis,
    )


def ee_reference(traj, model: Planar2R, dt: float) -> np.ndarray:
    """Resample a joint trajectory's end-effector path at the control rate."""
    steps = int(np.floor(traj.t[-1] / dt)) + 1
    times = np.arange(steps) * dt
    q = np.column_stack(
        [np.interp(times, traj.t, traj.q[:, j]) for j in range(traj.q.shape[1])]
    )
    out = np.zeros((steps, 3))
    for k in range(steps):
        out[k, :2] = model.fk(q[k])
    return out


@dataclass(frozen=True)
class ForceCheck:
    """Verdict of the normal-force bound check behind the execution plots."""

    ok: bool
    n_violations: int
    f_min: float
    f_max: float
    transient: float
    first_violation_t: float = None


def verify_force_bounds(
    trace: SimTrace, f_lower: float, f_upper: float, transient: float = 0.5
) -> ForceCheck:
    """Flag samples whose measured normal force leaves [f_lower, f_upper].

    The first ``transient`` seconds are excluded (contact build-up).
    """
    mask = trace.t >= transient
    force = trace.normal_force[mask]
    times = trace.t[mask]
    bad = (force < f_lower) | (force > f_upper)
    n_bad = int(bad.sum())
    return ForceCheck(
        ok=n_bad == 0,
        n_violations=n_bad,
        f_min=float(force.min()) if force.size else float("nan"),
        f_max=float(force.max()) if force.size else float("nan"),
        transient=transient,
        first_violation_t=float(times[bad][0]) if n_bad else None,
    )
