"""Minimum-time phase-plane planning by dynamic programming.

The state is s = (lam, ld) on a rectangular grid: ``n_lambda`` columns
over [0, Lambda] and ``n_lambda_dot`` rows over [0, lambda_dot_max].
The control is the pseudo-acceleration, piecewise constant between
adjacent columns, so a transition from row r to row r' implies

    ldd = (ld_r'^2 - ld_r^2) / (2 dlam)

and is valid when that ldd lies inside [L, U] evaluated at the source
cell and the destination velocity respects the parametric velocity
limit at its column. Crossing a column costs the trapezoidal
pseudo-velocity approximation dt = 2 dlam / (ld_r + ld_r'), which is
the exact traversal time of a constant-ldd segment. The trajectory
starts and ends at rest; interior rest rows are not traversable
(mid-path stops are out of scope), so ld > 0 strictly between the
endpoints.

Cost-to-come is relaxed column by column. Ties between equal-cost
predecessors resolve toward the higher-ld predecessor; the sweep is
sequential and the result deterministic. Projected coefficients,
torque budgets and velocity caps are linearly interpolated from their
path-grid tables onto the planner columns once, up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePlanError
from .limits import (
    AccelBounds,
    ModifiedTorqueLimits,
    VelocityLimitProfile,
    accel_bound_arrays,
    accel_bounds_from_tables,
)
from .path import PathSpec
from .projection import ProjectedDynamics, interp_columns
from .wrench import WrenchProfile

__all__ = [
    "PhaseGrid",
    "PhasePlaneTrajectory",
    "JointTrajectory",
    "transition_cost",
    "reachable",
    "plan",
    "brute_force_plan",
    "max_reachable_velocity",
    "verify_trajectory",
    "to_joint_trajectory",
]


@dataclass(frozen=True)
class PhaseGrid:
    """Phase-plane discretization. Defaults follow the reference setup."""

    n_lambda: int = 500
    n_lambda_dot: int = 5000
    lambda_dot_max: float = 1.0

    def __post_init__(self):
        if self.n_lambda < 1 or self.n_lambda_dot < 2:
            raise ValueError("grid needs n_lambda >= 1 and n_lambda_dot >= 2")
        if not self.lambda_dot_max > 0.0:
            raise ValueError("lambda_dot_max must be positive")


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhasePlaneTrajectory:
    """Planned cells (lam_k, ld_k, ldd_k, t_k); ldd is the outgoing control."""

    lam: np.ndarray
    lam_dot: np.ndarray
    lam_ddot: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        for name in ("lam", "lam_dot", "lam_ddot", "t"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        k = self.lam.size
        if any(getattr(self, name).size != k for name in ("lam_dot", "lam_ddot", "t")):
            raise ValueError("trajectory arrays must share one length")
        if k > 1 and not (np.diff(self.lam) > 0.0).all():
            raise ValueError("lambda must be strictly increasing")
        if (self.lam_dot < 0.0).any():
            raise ValueError("pseudo-velocity must be non-negative")
        if self.lam_dot[0] != 0.0 or self.lam_dot[-1] != 0.0:
            raise ValueError("trajectory must start and stop at rest")

    @property
    def t_f(self) -> float:
        return float(self.t[-1])


def transition_cost(lam_dot_i: float, lam_dot_next: float, dlam: float) -> float:
    """Trapezoidal traversal time of one column step.

    Exact for a constant-acceleration segment. A rest-to-rest step has
    no finite traversal time and is rejected.
    """
    if dlam <= 0.0:
        raise ValueError("column spacing must be positive")
    if lam_dot_i < 0.0 or lam_dot_next < 0.0:
        raise ValueError("pseudo-velocities must be non-negative")
    vsum = lam_dot_i + lam_dot_next
    if vsum == 0.0:
        raise ValueError("rest-to-rest transition over one cell is not traversable")
    return 2.0 * dlam / vsum


def reachable(
    lam_dot_i: float,
    lam_dot_next: float,
    dlam: float,
    bounds: AccelBounds,
    lam_dot_max_next: float = math.inf,
) -> bool:
    """Whether one column step is dynamically admissible (closed interval)."""
    acc = (lam_dot_next * lam_dot_next - lam_dot_i * lam_dot_i) / (2.0 * dlam)
    return bounds.lower <= acc <= bounds.upper and lam_dot_next <= lam_dot_max_next


@dataclass(frozen=True)
class _PhaseTables:
    """Coefficient tables interpolated onto the planner grid."""

    cols: np.ndarray
    v: np.ndarray
    v2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    g: np.ndarray
    lo: np.ndarray
    up: np.ndarray
    vmax: np.ndarray


def _phase_tables(projected, mod_limits, vel_profile, grid) -> _PhaseTables:
    cols = np.linspace(0.0, projected.total_length, grid.n_lambda)
    v = np.linspace(0.0, grid.lambda_dot_max, grid.n_lambda_dot)
    pgrid = projected.lambda_grid
    return _PhaseTables(
        cols=cols,
        v=v,
        v2=v * v,
        a=interp_columns(cols, pgrid, projected.a),
        b=interp_columns(cols, pgrid, projected.b),
        c=interp_columns(cols, pgrid, projected.c),
        g=interp_columns(cols, pgrid, projected.g),
        lo=interp_columns(cols, mod_limits.lambda_grid, mod_limits.lower),
        up=interp_columns(cols, mod_limits.lambda_grid, mod_limits.upper),
        vmax=interp_columns(cols, vel_profile.lambda_grid, vel_profile.values),
    )


def _column_row_bounds(tables, i):
    """Per-row (L, U) at column i, collapsed over joints."""
    lower, upper = accel_bound_arrays(
        tables.a[i], tables.b[i], tables.c[i], tables.g[i],
        tables.lo[i], tables.up[i], tables.v,
    )
    return lower.max(axis=1), upper.min(axis=1)


def _band(tables, i, r, l_r, u_r, dlam, max_dest, min_dest):
    """Destination row range [lo, hi] reachable from (column i, row r).

    Candidate edges come from the algebraic form ld'^2 in
    [ld^2 + 2 dlam L, ld^2 + 2 dlam U]; the ends are then settled with
    the exact ``reachable`` arithmetic so a post-hoc recheck agrees
    bit for bit.
    """
    v2 = tables.v2
    base = v2[r]
    hi2 = base + 2.0 * dlam * u_r
    if hi2 < 0.0:
        return 1, 0
    lo2 = base + 2.0 * dlam * l_r
    lo_idx = int(np.searchsorted(v2, lo2, side="left"))
    hi_idx = int(np.searchsorted(v2, hi2, side="right")) - 1
    hi_idx = min(hi_idx, max_dest)
    floor_idx = min_dest if r > 0 else max(min_dest, 1)
    lo_idx = max(lo_idx, floor_idx)

    def acc(j):
        return (v2[j] - base) / (2.0 * dlam)

    while lo_idx <= hi_idx and not (l_r <= acc(lo_idx) <= u_r):
        lo_idx += 1
    while lo_idx - 1 >= floor_idx and l_r <= acc(lo_idx - 1) <= u_r:
        lo_idx -= 1
    while hi_idx >= lo_idx and not (l_r <= acc(hi_idx) <= u_r):
        hi_idx -= 1
    while hi_idx + 1 <= max_dest and hi_idx + 1 >= lo_idx and l_r <= acc(hi_idx + 1) <= u_r:
        hi_idx += 1
    return lo_idx, hi_idx


def _max_dest_row(tables, i):
    return int(np.searchsorted(tables.v, tables.vmax[i], side="right")) - 1


def _degenerate():
    return PhasePlaneTrajectory(
        np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1)
    )


def plan(
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    vel_profile: VelocityLimitProfile,
    grid: PhaseGrid,
) -> PhasePlaneTrajectory:
    """Minimum-total-time grid path from (0, 0) to (Lambda, 0).

    Raises ``InfeasiblePlanError`` naming the first column no state of
    which can be reached, or the final column when rest there cannot.
    """
    if grid.n_lambda == 1 or projected.total_length == 0.0:
        return _degenerate()
    tables = _phase_tables(projected, mod_limits, vel_profile, grid)
    cols, v = tables.cols, tables.v
    n_cols, n_rows = cols.size, v.size
    dist = np.full(n_rows, np.inf)
    dist[0] = 0.0
    parents = np.full((n_cols, n_rows), -1, dtype=np.int32)
    last = n_cols - 1
    for i in range(last):
        dlam = cols[i + 1] - cols[i]
        l_rows, u_rows = _column_row_bounds(tables, i)
        vmax_i = tables.vmax[i]
        max_dest = _max_dest_row(tables, i + 1)
        min_dest = 0 if i + 1 == last else 1
        dist_next = np.full(n_rows, np.inf)
        parent_col = parents[i + 1]
        for r in range(n_rows - 1, -1, -1):
            dr = dist[r]
            if not np.isfinite(dr) or v[r] > vmax_i or l_rows[r] > u_rows[r]:
                continue
            lo_idx, hi_idx = _band(
                tables, i, r, l_rows[r], u_rows[r], dlam, max_dest, min_dest
            )
            if lo_idx > hi_idx:
                continue
            seg = slice(lo_idx, hi_idx + 1)
            cand = dr + (2.0 * dlam) / (v[r] + v[seg])
            view = dist_next[seg]
            better = cand < view
            if better.any():
                view[better] = cand[better]
                parent_col[seg][better] = r
        if not np.isfinite(dist_next).any():
            raise InfeasiblePlanError(i + 1, float(cols[i + 1]))
        dist = dist_next
    if not np.isfinite(dist[0]):
        raise InfeasiblePlanError(
            last,
            float(cols[last]),
            f"cannot brake to rest at the final column {last} "
            f"(lambda={cols[last]:.9g})",
        )
    rows = np.empty(n_cols, dtype=np.int64)
    rows[last] = 0
    for i in range(last, 0, -1):
        rows[i - 1] = parents[i][rows[i]]
    return _assemble(tables, rows)


def _assemble(tables, rows) -> PhasePlaneTrajectory:
    cols, v, v2 = tables.cols, tables.v, tables.v2
    k = cols.size
    lam_dot = v[rows]
    lam_ddot = np.zeros(k)
    t = np.zeros(k)
    for i in range(k - 1):
        dlam = cols[i + 1] - cols[i]
        lam_ddot[i] = (v2[rows[i + 1]] - v2[rows[i]]) / (2.0 * dlam)
        t[i + 1] = t[i] + (2.0 * dlam) / (lam_dot[i] + lam_dot[i + 1])
    return PhasePlaneTrajectory(cols.copy(), lam_dot, lam_ddot, t)


def brute_force_plan(
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    vel_profile: VelocityLimitProfile,
    grid: PhaseGrid,
) -> PhasePlaneTrajectory:
    """Exhaustive enumeration over all column-to-column row assignments.

    Test oracle: globally optimal by construction, same transition set
    and cost arithmetic as ``plan``. Guarded to tiny grids.
    """
    if grid.n_lambda > 12 or grid.n_lambda_dot > 12:
        raise ValueError("grid too large to enumerate (need n_lambda, n_lambda_dot <= 12)")
    if grid.n_lambda == 1 or projected.total_length == 0.0:
        return _degenerate()
    tables = _phase_tables(projected, mod_limits, vel_profile, grid)
    cols, v = tables.cols, tables.v
    n_cols, n_rows = cols.size, v.size
    last = n_cols - 1
    col_bounds = [_column_row_bounds(tables, i) for i in range(last)]
    best_cost = math.inf
    best_rows = None
    rows = np.zeros(n_cols, dtype=np.int64)

    def search(i, r, cost):
        nonlocal best_cost, best_rows
        if cost >= best_cost:
            return
        if i == last:
            if r == 0:
                best_cost = cost
                best_rows = rows.copy()
            return
        l_rows, u_rows = col_bounds[i]
        if v[r] > tables.vmax[i] or l_rows[r] > u_rows[r]:
            return
        dlam = cols[i + 1] - cols[i]
        max_dest = _max_dest_row(tables, i + 1)
        min_dest = 0 if i + 1 == last else 1
        lo_idx, hi_idx = _band(
            tables, i, r, l_rows[r], u_rows[r], dlam, max_dest, min_dest
        )
        for r_next in range(hi_idx, lo_idx - 1, -1):
            rows[i + 1] = r_next
            search(i + 1, r_next, cost + (2.0 * dlam) / (v[r] + v[r_next]))

    search(0, 0, 0.0)
    if best_rows is None:
        column, lam = _blocking_column(tables)
        raise InfeasiblePlanError(column, lam)
    return _assemble(tables, best_rows)


def _blocking_column(tables):
    """First column with no forward-reachable state (for error reports)."""
    cols, v = tables.cols, tables.v
    last = cols.size - 1
    reach = np.zeros(v.size, dtype=bool)
    reach[0] = True
    for i in range(last):
        dlam = cols[i + 1] - cols[i]
        l_rows, u_rows = _column_row_bounds(tables, i)
        max_dest = _max_dest_row(tables, i + 1)
        min_dest = 0 if i + 1 == last else 1
        nxt = np.zeros(v.size, dtype=bool)
        vmax_i = tables.vmax[i]
        for r in np.nonzero(reach)[0]:
            if v[r] > vmax_i or l_rows[r] > u_rows[r]:
                continue
            lo_idx, hi_idx = _band(
                tables, i, r, l_rows[r], u_rows[r], dlam, max_dest, min_dest
            )
            if lo_idx <= hi_idx:
                nxt[lo_idx : hi_idx + 1] = True
        if not nxt.any():
            return i + 1, float(cols[i + 1])
        reach = nxt
    return last, float(cols[last])


def max_reachable_velocity(
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    vel_profile: VelocityLimitProfile,
    grid: PhaseGrid,
) -> np.ndarray:
    """Highest forward-reachable pseudo-velocity per column (NaN if none)."""
    tables = _phase_tables(projected, mod_limits, vel_profile, grid)
    cols, v = tables.cols, tables.v
    last = cols.size - 1
    out = np.full(cols.size, np.nan)
    reach = np.zeros(v.size, dtype=bool)
    reach[0] = True
    out[0] = 0.0
    for i in range(last):
        dlam = cols[i + 1] - cols[i]
        l_rows, u_rows = _column_row_bounds(tables, i)
        max_dest = _max_dest_row(tables, i + 1)
        min_dest = 0 if i + 1 == last else 1
        nxt = np.zeros(v.size, dtype=bool)
        vmax_i = tables.vmax[i]
        for r in np.nonzero(reach)[0]:
            if v[r] > vmax_i or l_rows[r] > u_rows[r]:
                continue
            lo_idx, hi_idx = _band(
                tables, i, r, l_rows[r], u_rows[r], dlam, max_dest, min_dest
            )
            if lo_idx <= hi_idx:
                nxt[lo_idx : hi_idx + 1] = True
        if not nxt.any():
            break
        reach = nxt
        out[i + 1] = v[np.nonzero(reach)[0][-1]]
    return out


def verify_trajectory(
    ppt: PhasePlaneTrajectory,
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    vel_profile: VelocityLimitProfile,
) -> bool:
    """Post-hoc recheck: every transition must pass ``reachable``."""
    for k in range(ppt.lam.size - 1):
        a, b, c, g, _ = projected.at(float(ppt.lam[k]))
        lo, up = mod_limits.at(float(ppt.lam[k]))
        bounds = accel_bounds_from_tables(a, b, c, g, lo, up, float(ppt.lam_dot[k]))
        dlam = float(ppt.lam[k + 1] - ppt.lam[k])
        vmax_next = float(vel_profile.at(float(ppt.lam[k + 1])))
        if not reachable(
            float(ppt.lam_dot[k]), float(ppt.lam_dot[k + 1]), dlam, bounds, vmax_next
        ):
            return False
    return True


@dataclass(frozen=True)
class JointTrajectory:
    """Time-sampled joint trajectory reconstructed from a phase-plane plan.

    ``tau_motion`` is the planner-facing torque a ldd + b ld^2 + c ld + g
    (the quantity the modified limits bound); ``tau`` adds the torque of
    the nominal wrench. Both torques and the attached limit envelopes
    are linear interpolations of their planner-cell values, so samples
    respect the envelopes exactly whenever the cells do. q, qd and qdd
    come from the continuous path evaluator instead and may differ from
    the interpolated torque by the grid discretization error.
    """

    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    tau: np.ndarray
    tau_motion: np.ndarray
    limit_lower: np.ndarray
    limit_upper: np.ndarray
    lam: np.ndarray = field(default=None)
    lam_dot: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("t", "q", "qd", "qdd", "tau", "tau_motion",
                     "limit_lower", "limit_upper", "lam", "lam_dot"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _freeze(val))

    @property
    def n(self) -> int:
        return self.q.shape[1]


def _eval_path_many(path: PathSpec, lams):
    if path.scheme == "cubic-spline":
        spline = path._spline
        return spline(lams), spline(lams, 1), spline(lams, 2)
    grid = path.lambda_grid
    q = interp_columns(lams, grid, path.q)
    qp = interp_columns(lams, grid, path.q_prime)
    qs = interp_columns(lams, grid, path.q_second)
    return q, qp, qs


def to_joint_trajectory(
    ppt: PhasePlaneTrajectory,
    path: PathSpec,
    projected: ProjectedDynamics,
    mod_limits: ModifiedTorqueLimits,
    profile: WrenchProfile = None,
    sample_dt: float = 0.002,
    nominal_wrench=None,
) -> JointTrajectory:
    """Resample a phase-plane plan uniformly in time.

    lam(t) integrates the recorded piecewise-constant pseudo-
    acceleration (exactly consistent with the cell values). The torque
    is reconstructed with a nominal wrench inside the profile bounds --
    ``nominal_wrench`` as a 6-vector, else the profile midpoint, else
    zero -- and the modified-limit envelopes ride along for plotting.
    """
    if sample_dt <= 0.0:
        raise ValueError("sample_dt must be positive")
    t_f = ppt.t_f
    if sample_dt > t_f:
        raise ValueError(f"sample_dt {sample_dt} exceeds the total time {t_f:.9g}")
    times = np.arange(math.floor(t_f / sample_dt) + 1) * sample_dt
    if times[-1] < t_f:
        times = np.append(times, t_f)
    seg = np.clip(np.searchsorted(ppt.t, times, side="right") - 1, 0, ppt.t.size - 2)
    dt_in = times - ppt.t[seg]
    lam = ppt.lam[seg] + ppt.lam_dot[seg] * dt_in + 0.5 * ppt.lam_ddot[seg] * dt_in**2
    lam = np.clip(lam, ppt.lam[0], ppt.lam[-1])
    lam_dot = ppt.lam_dot[seg] + ppt.lam_ddot[seg] * dt_in
    lam_ddot = ppt.lam_ddot[seg]

    q, qp, qs = _eval_path_many(path, lam)
    qd = qp * lam_dot[:, None]
    qdd = qp * lam_ddot[:, None] + qs * (lam_dot * lam_dot)[:, None]

    # Planner-cell quantities, then chord interpolation in lambda.
    pgrid = projected.lambda_grid
    cells = ppt.lam
    a_c = interp_columns(cells, pgrid, projected.a)
    b_c = interp_columns(cells, pgrid, projected.b)
    c_c = interp_columns(cells, pgrid, projected.c)
    g_c = interp_columns(cells, pgrid, projected.g)
    motion_c = (
        a_c * ppt.lam_ddot[:, None]
        + b_c * (ppt.lam_dot * ppt.lam_dot)[:, None]
        + c_c * ppt.lam_dot[:, None]
        + g_c
    )
    if nominal_wrench is not None:
        h_nom = np.tile(np.asarray(nominal_wrench, dtype=float), (cells.size, 1))
    elif profile is not None:
        h_nom = interp_columns(cells, profile.lambda_grid, profile.midpoint())
    else:
        h_nom = np.zeros((cells.size, 6))
    jac_c = interp_columns(cells, pgrid, projected.jac)
    gamma_c = np.einsum("nkj,nk->nj", jac_c, h_nom)
    lo_c, up_c = mod_limits.at(cells)

    tau_motion = interp_columns(lam, cells, motion_c)
    tau = tau_motion + interp_columns(lam, cells, gamma_c)
    limit_lower = interp_columns(lam, cells, lo_c)
    limit_upper = interp_columns(lam, cells, up_c)
    return JointTrajectory(
        t=times,
        q=q,
        qd=qd,
        qdd=qdd,
        tau=tau,
        tau_motion=tau_motion,
        limit_lower=limit_lower,
        limit_upper=limit_upper,
        lam=lam,
        lam_dot=lam_dot,
    )
