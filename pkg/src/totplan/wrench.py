"""Wrench bounds along the path and the torque limits they induce.

The task specification gives lower/upper bounds on the wrench the end
effector exerts on the environment. For a single-direction contact the
bounds come from a normal-force range and a Coulomb friction
coefficient; the tangential components are mu * f_N * t_i with t the
unit tangent of the end-effector motion in the tangential plane.

The torque needed at joint j to exert a wrench h is gamma_j = J_j^T h.
With h boxed between the profile bounds, gamma_j ranges between
gamma_lo_j = J_j^T h_lo and gamma_hi_j = J_j^T h_hi (these keep
definition order and may come out reversed when Jacobian entries are
negative). The strictest torque budget left for motion is then

    tau_lo_j - min(gamma_lo_j, gamma_hi_j)
        <= a_j ldd + b_j ld^2 + c_j ld + g_j
        <= tau_hi_j - max(gamma_lo_j, gamma_hi_j)

which this module tabulates per (lambda, joint). Nodes where the
interval comes out empty are reported, never clamped.

Note the lower/upper tangential pairing is kept literal
(f_lo_Ti = mu * f_lo_N * t_i): with t_i < 0 the "lower" exceeds the
"upper" and the min/max resolution above absorbs the ordering, so a
contact-derived profile may carry reversed component pairs by design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleLimitError
from .projection import ProjectedDynamics, interp_columns

__all__ = [
    "WrenchProfile",
    "ContactSpec",
    "ModifiedTorqueLimits",
    "contact_wrench_bounds",
    "tangent_from_task",
    "gamma_bounds",
    "modified_torque_limits",
    "read_profile_csv",
]

GAMMA_MODES = ("segment", "box")


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WrenchProfile:
    """Per-lambda lower/upper bounds on the exerted wrench (N, 6 each)."""

    lambda_grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        for name in ("lambda_grid", "lower", "upper"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        if not (np.diff(self.lambda_grid) > 0.0).all():
            raise ValueError("lambda grid must be strictly increasing")
        shape = (self.lambda_grid.size, 6)
        if self.lower.shape != shape or self.upper.shape != shape:
            raise ValueError(f"wrench bounds must have shape {shape}")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ValueError("wrench bounds must be finite")

    @classmethod
    def zero(cls, lambda_grid) -> "WrenchProfile":
        grid = np.asarray(lambda_grid, dtype=float)
        z = np.zeros((grid.size, 6))
        return cls(grid, z, z.copy())

    @classmethod
    def constant(cls, lambda_grid, lower6, upper6) -> "WrenchProfile":
        grid = np.asarray(lambda_grid, dtype=float)
        lower = np.tile(np.asarray(lower6, dtype=float), (grid.size, 1))
        upper = np.tile(np.asarray(upper6, dtype=float), (grid.size, 1))
        return cls(grid, lower, upper)

    def at(self, lam):
        """(h_lo, h_hi) linearly interpolated at lam."""
        return (
            interp_columns(lam, self.lambda_grid, self.lower),
            interp_columns(lam, self.lambda_grid, self.upper),
        )

    def is_zero(self) -> bool:
        return not (self.lower.any() or self.upper.any())

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class ContactSpec:
    """Single-direction contact: normal-force range plus Coulomb friction.

    ``normal_axis`` indexes the base-frame translational axis of the
    contact; the tangential plane is spanned by the two remaining axes
    in increasing index order, and ``tangent`` (per-lambda unit (t1, t2),
    optional) orients the friction force in that plane.
    """

    normal_axis: int
    f_lower: np.ndarray
    f_upper: np.ndarray
    mu: float
    tangent: np.ndarray = None

    def __post_init__(self):
        if self.normal_axis not in (0, 1, 2):
            raise ValueError("normal axis must index a translational axis (0-2)")
        if self.mu < 0.0:
            raise ValueError("friction coefficient must be non-negative")
        f_lo = np.atleast_1d(np.asarray(self.f_lower, dtype=float))
        f_hi = np.atleast_1d(np.asarray(self.f_upper, dtype=float))
        if (f_lo < 0.0).any() or (f_hi < f_lo).any():
            raise ValueError("need 0 <= f_lower <= f_upper along the path")
        object.__setattr__(self, "f_lower", _freeze(f_lo))
        object.__setattr__(self, "f_upper", _freeze(f_hi))
        if self.tangent is not None:
            t = np.atleast_2d(np.asarray(self.tangent, dtype=float))
            norms = np.linalg.norm(t, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-9):
                raise ValueError("tangent directions must be unit vectors")
            object.__setattr__(self, "tangent", _freeze(t))

    @property
    def tangential_axes(self):
        return tuple(ax for ax in (0, 1, 2) if ax != self.normal_axis)


def tangent_from_task(task_xy, lambda_grid, normal_axis: int) -> np.ndarray:
    """Unit tangent of the EE motion in the tangential plane, per node.

    ``task_xy`` holds base-frame (x, y) samples of a planar task path;
    the out-of-plane axis moves by zero. Nodes where the tangential
    velocity vanishes get a zero tangent (flagged later if friction
    needs a direction there).
    """
    xyz = np.zeros((len(task_xy), 3))
    xyz[:, :2] = task_xy
    vel = np.gradient(xyz, lambda_grid, axis=0, edge_order=2)
    axes = tuple(ax for ax in (0, 1, 2) if ax != normal_axis)
    t = vel[:, axes]
    norms = np.linalg.norm(t, axis=1)
    out = np.zeros_like(t)
    nz = norms > 1e-12
    out[nz] = t[nz] / norms[nz, None]
    return out


def _per_node(values, rows):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.size == 1:
        return np.full(rows, values[0])
    if values.size != rows:
        raise ValueError(f"per-lambda table must have {rows} rows, got {values.size}")
    return values


def contact_wrench_bounds(spec: ContactSpec, path, tangent=None) -> WrenchProfile:
    """Expand a contact spec into a full wrench profile on the path grid.

    ``tangent`` overrides the spec's stored tangent; one of the two must
    be present whenever mu * f_N is nonzero somewhere (the friction
    force needs a direction). Momenta bounds are zero.
    """
    grid = path.lambda_grid
    rows = grid.size
    f_lo = _per_node(spec.f_lower, rows)
    f_hi = _per_node(spec.f_upper, rows)
    lower = np.zeros((rows, 6))
    upper = np.zeros((rows, 6))
    lower[:, spec.normal_axis] = f_lo
    upper[:, spec.normal_axis] = f_hi
    if spec.mu > 0.0:
        if tangent is None:
            tangent = spec.tangent
        if tangent is None:
            raise ValueError("friction contact needs a tangent direction")
        t = np.atleast_2d(np.asarray(tangent, dtype=float))
        if t.shape[0] == 1:
            t = np.repeat(t, rows, axis=0)
        if t.shape != (rows, 2):
            raise ValueError(f"tangent table must have shape ({rows}, 2)")
        degenerate = (np.linalg.norm(t, axis=1) < 1e-12) & (spec.mu * f_hi > 0.0)
        if degenerate.any():
            k = int(np.argmax(degenerate))
            raise ValueError(
                f"zero-length tangent at lambda={grid[k]:.9g} with nonzero friction force"
            )
        ax1, ax2 = spec.tangential_axes
        lower[:, ax1] = spec.mu * f_lo * t[:, 0]
        lower[:, ax2] = spec.mu * f_lo * t[:, 1]
        upper[:, ax1] = spec.mu * f_hi * t[:, 0]
        upper[:, ax2] = spec.mu * f_hi * t[:, 1]
    return WrenchProfile(grid, lower, upper)


def gamma_bounds(j_col, h_lower, h_upper):
    """(gamma_lo, gamma_hi) = (J_j^T h_lo, J_j^T h_hi), in definition order.

    No re-sorting happens here: with sign-flipping Jacobian entries the
    pair may come out reversed, and the min/max resolution in
    ``modified_torque_limits`` owns the ordering.
    """
    j_col = np.asarray(j_col, dtype=float)
    return float(j_col @ np.asarray(h_lower, dtype=float)), float(
        j_col @ np.asarray(h_upper, dtype=float)
    )


def _gamma_tables(profile: WrenchProfile, projected: ProjectedDynamics, mode: str):
    """Per-(lambda, joint) gamma extremes on the projected grid."""
    h_lo = interp_columns(projected.lambda_grid, profile.lambda_grid, profile.lower)
    h_hi = interp_columns(projected.lambda_grid, profile.lambda_grid, profile.upper)
    if mode == "segment":
        gamma_lo = np.einsum("nkj,nk->nj", projected.jac, h_lo)
        gamma_hi = np.einsum("nkj,nk->nj", projected.jac, h_hi)
        return gamma_lo, gamma_hi
    if mode == "box":
        # Exact extremes over the full box h_lo <= h <= h_hi: per wrench
        # component keep whichever corner value helps.
        term_lo = projected.jac * h_lo[:, :, None]
        term_hi = projected.jac * h_hi[:, :, None]
        gamma_lo = np.minimum(term_lo, term_hi).sum(axis=1)
        gamma_hi = np.maximum(term_lo, term_hi).sum(axis=1)
        return gamma_lo, gamma_hi
    raise ValueError(f"unknown gamma mode {mode!r}")


def _freeze_limits(obj):
    for name in ("lambda_grid", "lower", "upper", "gamma_lower", "gamma_upper",
                 "tau_lower", "tau_upper"):
        object.__setattr__(obj, name, _freeze(getattr(obj, name)))


@dataclass(frozen=True)
class ModifiedTorqueLimits:
    """Effective per-(lambda, joint) torque budget left for motion.

    ``lower``/``upper`` are tau_lo - min(gamma) and tau_hi - max(gamma);
    ``gamma_lower``/``gamma_upper`` keep the raw definition-order gamma
    pair for inspection. ``tau_lower``/``tau_upper`` are the raw
    actuator limits the budget was derived from.
    """

    lambda_grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    gamma_lower: np.ndarray
    gamma_upper: np.ndarray
    tau_lower: np.ndarray
    tau_upper: np.ndarray

    def __post_init__(self):
        _freeze_limits(self)

    @property
    def n(self) -> int:
        return self.lower.shape[1]

    def at(self, lam):
        """(lower, upper) effective limits linearly interpolated at lam."""
        return (
            interp_columns(lam, self.lambda_grid, self.lower),
            interp_columns(lam, self.lambda_grid, self.upper),
        )


def modified_torque_limits(
    tau_lower,
    tau_upper,
    profile: WrenchProfile,
    projected: ProjectedDynamics,
    mode: str = "segment",
) -> ModifiedTorqueLimits:
    """Shift raw actuator limits by the extreme wrench torques.

    ``mode`` selects how the gamma extremes are taken: ``segment``
    evaluates the profile bound vectors themselves (the literal
    formulation), ``box`` takes exact extremes over the whole bound box
    (strictly conservative, gamma interval always at least as wide).

    Raises ``InfeasibleLimitError`` when some node is left with an empty
    torque interval; nothing is ever clamped silently.
    """
    tau_lower = np.asarray(tau_lower, dtype=float)
    tau_upper = np.asarray(tau_upper, dtype=float)
    n = projected.n
    if tau_lower.shape != (n,) or tau_upper.shape != (n,):
        raise ValueError(f"torque limits must be {n}-vectors")
    if not (tau_lower < tau_upper).all():
        raise ValueError("need tau_lower < tau_upper per joint")
    gamma_lo, gamma_hi = _gamma_tables(profile, projected, mode)
    tau_h_lo = np.minimum(gamma_lo, gamma_hi)
    tau_h_hi = np.maximum(gamma_lo, gamma_hi)
    lower = tau_lower[None, :] - tau_h_lo
    upper = tau_upper[None, :] - tau_h_hi
    bad = lower > upper
    if bad.any():
        nodes = [
            (float(projected.lambda_grid[k]), int(j), float(lower[k, j]), float(upper[k, j]))
            for k, j in zip(*np.nonzero(bad))
        ]
        raise InfeasibleLimitError(nodes)
    return ModifiedTorqueLimits(
        projected.lambda_grid, lower, upper, gamma_lo, gamma_hi, tau_lower, tau_upper
    )


def read_profile_csv(path) -> WrenchProfile:
    """Read a raw per-lambda profile CSV (lambda, h_lo_1..6, h_hi_1..6)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    expected = (
        ["lambda"]
        + [f"h_lo_{k + 1}" for k in range(6)]
        + [f"h_hi_{k + 1}" for k in range(6)]
    )
    if header != expected:
        raise ValueError("profile CSV header must be lambda,h_lo_1..6,h_hi_1..6")
    lower = data[:, 1:7]
    upper = data[:, 7:13]
    if (lower > upper).any():
        raise ValueError("raw profile needs h_lo <= h_hi componentwise")
    return WrenchProfile(data[:, 0], lower, upper)
