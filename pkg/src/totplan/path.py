"""Geometric paths q(lambda) and their lambda-derivatives.

A path is a joint-space curve sampled on a strictly increasing grid of
the scalar progress coordinate lambda in [0, Lambda]. The first and
second lambda-derivatives q' and q'' are what the chain rule needs to
turn a time law lambda(t) into joint velocities and accelerations:

    qd  = q' * ld
    qdd = q' * ldd + q'' * ld^2

Task-space planar paths can be converted to joint paths with the
built-in 2R inverse kinematics. ``PathSpec`` is immutable and
``eval_path`` is pure, so paths can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import math
import numpy as np
from scipy.interpolate import CubicSpline

from .robot_model import Planar2R

__all__ = [
    "PathSpec",
    "TaskPath",
    "build_path",
    "eval_path",
    "planar_ik",
    "read_path_csv",
    "write_joint_path_csv",
    "write_task_path_csv",
]

SCHEMES = ("cubic-spline", "central-difference")


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PathSpec:
    """Joint path samples with consistent lambda-derivatives."""

    lambda_grid: np.ndarray
    q: np.ndarray
    q_prime: np.ndarray
    q_second: np.ndarray
    scheme: str = "cubic-spline"

    def __post_init__(self):
        for name in ("lambda_grid", "q", "q_prime", "q_second"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        grid = self.lambda_grid
        if not (np.diff(grid) > 0.0).all():
            raise ValueError("lambda grid must be strictly increasing")
        if grid[0] != 0.0:
            raise ValueError("lambda grid must start at 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown differentiation scheme {self.scheme!r}")
        shape = self.q.shape
        if self.q_prime.shape != shape or self.q_second.shape != shape:
            raise ValueError("q, q_prime and q_second must share one shape")
        if shape[0] != grid.size:
            raise ValueError("sample count must match the lambda grid")
        if self.scheme == "cubic-spline":
            spline = CubicSpline(grid, self.q, axis=0, bc_type="natural")
            object.__setattr__(self, "_spline", spline)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    @property
    def total_length(self) -> float:
        return float(self.lambda_grid[-1])


@dataclass(frozen=True)
class TaskPath:
    """Planar task-space path: end-effector (x, y) per lambda sample."""

    lambda_grid: np.ndarray
    xy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", _freeze(self.lambda_grid))
        object.__setattr__(self, "xy", _freeze(self.xy))
        if not (np.diff(self.lambda_grid) > 0.0).all():
            raise ValueError("lambda grid must be strictly increasing")
        if self.xy.shape != (self.lambda_grid.size, 2):
            raise ValueError("task path needs (N, 2) pose samples")

    @property
    def total_length(self) -> float:
        return float(self.lambda_grid[-1])


def build_path(lambda_grid, samples, scheme="cubic-spline") -> PathSpec:
    """Differentiate joint samples on a lambda grid into a PathSpec.

    The cubic-spline scheme (natural end conditions) is the default:
    q'' feeds the projected dynamics, and finite differences amplify
    sampling noise there. The central-difference scheme uses
    second-order differences, one-sided at the endpoints.
    """
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if lambda_grid.size < 4:
        raise ValueError("need at least 4 samples to differentiate a path")
    if np.unique(lambda_grid).size != lambda_grid.size:
        raise ValueError("duplicate lambda values in the grid")
    if scheme == "cubic-spline":
        spline = CubicSpline(lambda_grid, samples, axis=0, bc_type="natural")
        q_prime = spline(lambda_grid, 1)
        q_second = spline(lambda_grid, 2)
    elif scheme == "central-difference":
        q_prime = np.gradient(samples, lambda_grid, axis=0, edge_order=2)
        q_second = np.gradient(q_prime, lambda_grid, axis=0, edge_order=2)
    else:
        raise ValueError(f"unknown differentiation scheme {scheme!r}")
    return PathSpec(lambda_grid, samples, q_prime, q_second, scheme=scheme)


def eval_path(path: PathSpec, lam: float):
    """Interpolate (q, q', q'') at a lambda inside [0, Lambda]."""
    grid = path.lambda_grid
    if lam < grid[0] or lam > grid[-1]:
        raise ValueError(f"lambda {lam} outside [{grid[0]}, {grid[-1]}]")
    if path.scheme == "cubic-spline":
        spline = path._spline
        return spline(lam), spline(lam, 1), spline(lam, 2)
    q = np.array([np.interp(lam, grid, path.q[:, j]) for j in range(path.n)])
    qp = np.array([np.interp(lam, grid, path.q_prime[:, j]) for j in range(path.n)])
    qs = np.array([np.interp(lam, grid, path.q_second[:, j]) for j in range(path.n)])
    return q, qp, qs


def planar_ik(task: TaskPath, model: Planar2R, branch="elbow-up") -> np.ndarray:
    """Joint samples reproducing a planar task path with one fixed branch.

    ``elbow-up`` keeps q2 >= 0 along the whole path, ``elbow-down``
    q2 <= 0; no branch switching ever happens mid-path. Poses at the
    workspace boundary (full extension / full fold) are accepted,
    anything beyond is rejected.
    """
    if not isinstance(model, Planar2R):
        raise TypeError("planar IK needs the planar 2R model")
    if branch not in ("elbow-up", "elbow-down"):
        raise ValueError(f"unknown IK branch {branch!r}")
    l1, l2 = model.l1, model.l2
    sign = 1.0 if branch == "elbow-up" else -1.0
    out = np.empty((task.lambda_grid.size, 2))
    for k, (x, y) in enumerate(task.xy):
        r2 = x * x + y * y
        c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
        if abs(c2) > 1.0:
            if abs(c2) - 1.0 > 1e-9:
                raise ValueError(
                    f"pose ({x:.9g}, {y:.9g}) unreachable at sample {k}"
                )
            c2 = math.copysign(1.0, c2)
        q2 = sign * math.acos(c2)
        q1 = math.atan2(y, x) - math.atan2(l2 * math.sin(q2), l1 + l2 * c2)
        out[k] = (q1, q2)
    return out


def read_path_csv(path):
    """Read a path CSV; returns a TaskPath or (lambda_grid, q) joint samples.

    The header decides the flavour: ``lambda,x,y`` is a planar task path
    (writing-plane convention: contact along one base axis, motion in
    the orthogonal plane); ``lambda,q_1..q_n`` is a joint path.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if header[0] != "lambda":
        raise ValueError("path CSV must start with a 'lambda' column")
    if header[1:] == ["x", "y"]:
        return TaskPath(data[:, 0], data[:, 1:])
    expected = [f"q_{j + 1}" for j in range(len(header) - 1)]
    if header[1:] != expected:
        raise ValueError("path CSV columns must be x,y or q_1..q_n")
    return data[:, 0], data[:, 1:]


def write_task_path_csv(path, task: TaskPath) -> None:
    np.savetxt(
        path,
        np.column_stack([task.lambda_grid, task.xy]),
        delimiter=",",
        header="lambda,x,y",
        comments="",
        fmt="%.17g",
    )


def write_joint_path_csv(path, lambda_grid, q) -> None:
    cols = ",".join(["lambda"] + [f"q_{j + 1}" for j in range(q.shape[1])])
    np.savetxt(
        path,
        np.column_stack([lambda_grid, q]),
        delimiter=",",
        header=cols,
        comments="",
        fmt="%.17g",
    )
