"""Phase-plane acceleration bounds and the parametric velocity limit.

Solving the per-joint torque budget for the pseudo-acceleration gives,
at a state (lam, ld),

    L_j = (lo_j * d_j + up_j * (1 - d_j) - b_j ld^2 - c_j ld - g_j) / a_j
    U_j = (up_j * d_j + lo_j * (1 - d_j) - b_j ld^2 - c_j ld - g_j) / a_j

with d_j = 1 for a_j > 0 and 0 for a_j < 0, and the state-wide bounds
L = max_j L_j, U = min_j U_j. A joint with a_j = 0 (zero-inertia point)
constrains no acceleration; instead its velocity terms must already fit
the torque budget, otherwise the state is infeasible (encoded L > U).

Joint velocity limits cap the pseudo-velocity sign-correctly:
qd_hi_j / q'_j for q'_j > 0 and qd_lo_j / q'_j for q'_j < 0; a joint
with q'_j = 0 imposes no bound.

Everything here is a pure function over immutable tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .projection import ProjectedDynamics, interp_columns
from .wrench import ModifiedTorqueLimits

__all__ = [
    "ZERO_INERTIA_TOL",
    "AccelBounds",
    "VelocityLimit",
    "VelocityLimitProfile",
    "accel_bounds",
    "accel_bounds_from_tables",
    "accel_bound_arrays",
    "velocity_limit",
    "velocity_limit_profile",
    "dump_diagnostics",
]

ZERO_INERTIA_TOL = 1e-12

# Stand-in for an unbounded pseudo-velocity cap inside tables: linear
# interpolation of actual infinities would produce NaNs (inf - inf).
UNBOUNDED = 1e30


@dataclass(frozen=True)
class AccelBounds:
    """Pseudo-acceleration interval [lower, upper] and the binding joints."""

    lower: float
    upper: float
    limiting_lower: int
    limiting_upper: int

    @property
    def feasible(self) -> bool:
        return self.lower <= self.upper


@dataclass(frozen=True)
class VelocityLimit:
    """Pseudo-velocity cap; ``limiting_joint`` is None when unbounded."""

    value: float
    limiting_joint: int = None


def accel_bound_arrays(a, b, c, g, lo, up, lam_dot):
    """Vectorized L/U kernel shared by the scalar API and the planner.

    ``a``..``up`` are (n,) coefficient/budget vectors; ``lam_dot`` is a
    scalar or (R,) array. Returns per-joint L_j, U_j with shape
    broadcast(lam_dot) x n; infeasible zero-inertia joints carry
    (+inf, -inf).
    """
    lam_dot = np.asarray(lam_dot, dtype=float)
    scalar = lam_dot.ndim == 0
    v = lam_dot.reshape(-1, 1)
    rhs = b * (v * v) + c * v + g
    pos = a > ZERO_INERTIA_TOL
    neg = a < -ZERO_INERTIA_TOL
    zero = ~(pos | neg)
    lower = np.empty_like(rhs)
    upper = np.empty_like(rhs)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower[:, pos] = (lo[pos] - rhs[:, pos]) / a[pos]
        upper[:, pos] = (up[pos] - rhs[:, pos]) / a[pos]
        lower[:, neg] = (up[neg] - rhs[:, neg]) / a[neg]
        upper[:, neg] = (lo[neg] - rhs[:, neg]) / a[neg]
    if zero.any():
        ok = (rhs[:, zero] >= lo[zero]) & (rhs[:, zero] <= up[zero])
        lower[:, zero] = np.where(ok, -np.inf, np.inf)
        upper[:, zero] = np.where(ok, np.inf, -np.inf)
    if scalar:
        return lower[0], upper[0]
    return lower, upper


def accel_bounds_from_tables(a, b, c, g, lo, up, lam_dot) -> AccelBounds:
    """AccelBounds from coefficient/budget vectors at one lambda."""
    lower_j, upper_j = accel_bound_arrays(
        np.asarray(a, float),
        np.asarray(b, float),
        np.asarray(c, float),
        np.asarray(g, float),
        np.asarray(lo, float),
        np.asarray(up, float),
        float(lam_dot),
    )
    i_lo = int(np.argmax(lower_j))
    i_up = int(np.argmin(upper_j))
    return AccelBounds(float(lower_j[i_lo]), float(upper_j[i_up]), i_lo, i_up)


def accel_bounds(
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    lam: float,
    lam_dot: float,
) -> AccelBounds:
    """Pseudo-acceleration bounds at (lam, lam_dot), tables interpolated."""
    a, b, c, g, _ = projected.at(lam)
    lo, up = mod_limits.at(lam)
    return accel_bounds_from_tables(a, b, c, g, lo, up, lam_dot)


def velocity_limit(q_prime, qd_lower, qd_upper) -> VelocityLimit:
    """Sign-correct cap on the pseudo-velocity from joint velocity bounds."""
    q_prime = np.asarray(q_prime, dtype=float)
    qd_lower = np.asarray(qd_lower, dtype=float)
    qd_upper = np.asarray(qd_upper, dtype=float)
    if not ((qd_lower < 0.0).all() and (qd_upper > 0.0).all()):
        raise ValueError("need qd_lower < 0 < qd_upper per joint")
    best = math.inf
    joint = None
    for j, qp in enumerate(q_prime):
        if qp > 0.0:
            cap = qd_upper[j] / qp
        elif qp < 0.0:
            cap = qd_lower[j] / qp
        else:
            continue
        if cap < best:
            best = cap
            joint = j
    return VelocityLimit(best, joint)


@dataclass(frozen=True)
class VelocityLimitProfile:
    """Per-node pseudo-velocity caps on the path grid.

    Unbounded nodes are stored as the finite sentinel ``UNBOUNDED`` so
    the table stays linearly interpolable.
    """

    lambda_grid: np.ndarray
    values: np.ndarray
    limiting: np.ndarray

    def __post_init__(self):
        grid = np.array(self.lambda_grid, dtype=float)
        grid.setflags(write=False)
        object.__setattr__(self, "lambda_grid", grid)
        vals = np.minimum(np.array(self.values, dtype=float), UNBOUNDED)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        lim = np.array(self.limiting, dtype=int)
        lim.setflags(write=False)
        object.__setattr__(self, "limiting", lim)

    def at(self, lam):
        return interp_columns(lam, self.lambda_grid, self.values)

    @classmethod
    def unbounded(cls, lambda_grid) -> "VelocityLimitProfile":
        grid = np.asarray(lambda_grid, dtype=float)
        return cls(grid, np.full(grid.size, UNBOUNDED), np.full(grid.size, -1))


def velocity_limit_profile(path, qd_lower, qd_upper) -> VelocityLimitProfile:
    """Tabulate the velocity limit at every path node."""
    values = np.empty(path.lambda_grid.size)
    limiting = np.empty(path.lambda_grid.size, dtype=int)
    for k in range(path.lambda_grid.size):
        lim = velocity_limit(path.q_prime[k], qd_lower, qd_upper)
        values[k] = lim.value
        limiting[k] = -1 if lim.limiting_joint is None else lim.limiting_joint
    return VelocityLimitProfile(path.lambda_grid, values, limiting)


def dump_diagnostics(
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    vel_profile: VelocityLimitProfile,
    path,
) -> None:
    """CSV dump of (lambda, lam_dot_max, L, U at ld=0) for plotting."""
    grid = projected.lambda_grid
    vmax = interp_columns(grid, vel_profile.lambda_grid, vel_profile.values)
    rows = np.empty((grid.size, 4))
    for k, lam in enumerate(grid):
        bounds = accel_bounds_from_tables(
            projected.a[k], projected.b[k], projected.c[k], projected.g[k],
            mod_limits.lower[k], mod_limits.upper[k], 0.0,
        )
        rows[k] = (lam, vmax[k], bounds.lower, bounds.upper)
    np.savetxt(
        path,
        rows,
        delimiter=",",
        header="lambda,lam_dot_max,L_at_rest,U_at_rest",
        comments="",
        fmt="%.9g",
    )
