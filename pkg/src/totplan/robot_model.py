"""Manipulator dynamic models.

Two kinds of model are supported:

* ``Planar2R`` -- an analytic planar two-link arm with closed-form
  inertia, Coriolis, viscous friction and gravity terms. All desk-scale
  validation runs on this model because every term has an independent
  symbolic oracle.
* ``SampledModel`` -- per-lambda tables of the path-projected dynamic
  coefficients, the ingestion route for arbitrary robots whose joint
  paths and models live outside this package.

The joint-space model evaluated here is

    tau = B(q) qdd + qd^T C(q) qd + F qd + g(q) + J(q)^T h_e

with ``B`` the inertia matrix, ``C`` the rank-3 tensor of Christoffel
symbols of the first kind (which makes dB/dt - 2 C(q, qd) skew
symmetric), ``F`` a diagonal viscous friction matrix, ``g`` the gravity
vector and ``h_e`` the wrench the end effector exerts on the
environment, stacked as (force, moment) in base coordinates.

Models are immutable after construction and every evaluation function
here is pure, so concurrent use needs no synchronization.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "Wrench",
    "Planar2R",
    "SampledModel",
    "RobotModel",
    "eval_dynamics",
    "eval_jacobian",
    "load_model",
    "read_sampled_tables",
    "write_sampled_tables",
]


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Wrench:
    """End-effector wrench: 3 forces [N] and 3 moments [N·m], base frame."""

    force: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", _freeze(self.force))
        object.__setattr__(self, "moment", _freeze(self.moment))
        if self.force.shape != (3,) or self.moment.shape != (3,):
            raise ValueError("wrench needs a 3-vector force and a 3-vector moment")
        if not (np.isfinite(self.force).all() and np.isfinite(self.moment).all()):
            raise ValueError("wrench entries must be finite")

    @classmethod
    def zero(cls) -> "Wrench":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, vec) -> "Wrench":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (6,):
            raise ValueError("wrench vector must have 6 entries")
        return cls(vec[:3], vec[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])


@dataclass(frozen=True)
class Planar2R:
    """Analytic planar 2R arm.

    Joints rotate about the base z axis; the arm moves in the base x-y
    plane and link angles are measured from the +x axis. With
    ``gravity_in_plane`` set, gravity pulls along -y (the arm works in a
    vertical plane); otherwise gravity is along -z and g(q) vanishes.

    ``r1``/``r2`` are centre-of-mass offsets along each link, ``I1``/``I2``
    link inertias about the respective centre of mass, and ``friction``
    the per-joint viscous coefficients.
    """

    l1: float
    l2: float
    m1: float
    m2: float
    r1: float
    r2: float
    I1: float
    I2: float
    friction: np.ndarray = field(default_factory=lambda: np.zeros(2))
    g0: float = 9.81
    gravity_in_plane: bool = True

    kind = "planar-2r"

    def __post_init__(self):
        object.__setattr__(self, "friction", _freeze(self.friction))
        for name in ("l1", "l2", "m1", "m2", "I1", "I2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.r1 < 0.0 or self.r2 < 0.0:
            raise ValueError("COM offsets must be non-negative")
        if self.friction.shape != (2,) or (self.friction < 0.0).any():
            raise ValueError("friction needs two non-negative coefficients")
        if self.g0 < 0.0:
            raise ValueError("gravity magnitude must be non-negative")

    @property
    def n(self) -> int:
        return 2

    def inertia(self, q) -> np.ndarray:
        c2 = math.cos(q[1])
        b11 = (
            self.I1
            + self.I2
            + self.m1 * self.r1**2
            + self.m2 * (self.l1**2 + self.r2**2 + 2.0 * self.l1 * self.r2 * c2)
        )
        b12 = self.I2 + self.m2 * (self.r2**2 + self.l1 * self.r2 * c2)
        b22 = self.I2 + self.m2 * self.r2**2
        return np.array([[b11, b12], [b12, b22]])

    def coriolis(self, q) -> np.ndarray:
        """Christoffel tensor c[i, j, k] = (d_k B_ij + d_j B_ik - d_i B_jk) / 2."""
        h = self.m2 * self.l1 * self.r2 * math.sin(q[1])
        c = np.zeros((2, 2, 2))
        c[0, 0, 1] = -h
        c[0, 1, 0] = -h
        c[0, 1, 1] = -h
        c[1, 0, 0] = h
        return c

    def gravity(self, q) -> np.ndarray:
        if not self.gravity_in_plane:
            return np.zeros(2)
        g12 = self.m2 * self.r2 * self.g0 * math.cos(q[0] + q[1])
        g1 = (self.m1 * self.r1 + self.m2 * self.l1) * self.g0 * math.cos(q[0]) + g12
        return np.array([g1, g12])

    def jacobian(self, q) -> np.ndarray:
        """Geometric Jacobian, 6x2, rows (vx, vy, vz, wx, wy, wz)."""
        s1, c1 = math.sin(q[0]), math.cos(q[0])
        s12, c12 = math.sin(q[0] + q[1]), math.cos(q[0] + q[1])
        jac = np.zeros((6, 2))
        jac[0] = (-(self.l1 * s1 + self.l2 * s12), -self.l2 * s12)
        jac[1] = (self.l1 * c1 + self.l2 * c12, self.l2 * c12)
        jac[5] = (1.0, 1.0)
        return jac

    def fk(self, q) -> np.ndarray:
        """End-effector position (x, y) in the arm plane."""
        return np.array(
            [
                self.l1 * math.cos(q[0]) + self.l2 * math.cos(q[0] + q[1]),
                self.l1 * math.sin(q[0]) + self.l2 * math.sin(q[0] + q[1]),
            ]
        )


@dataclass(frozen=True)
class SampledModel:
    """Path-projected dynamic coefficients tabulated on a lambda grid.

    Holds a(lambda), b(lambda), c(lambda), g(lambda) as (N, n) tables and
    the Jacobian J(lambda) as an (N, 6, n) table. Cannot be evaluated at
    arbitrary joint configurations.
    """

    lambda_grid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    g: np.ndarray
    jac: np.ndarray

    kind = "sampled"

    def __post_init__(self):
        for name in ("lambda_grid", "a", "b", "c", "g", "jac"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        grid = self.lambda_grid
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("lambda grid needs at least two samples")
        if not (np.diff(grid) > 0.0).all():
            raise ValueError("lambda grid must be strictly increasing")
        rows = grid.size
        n = self.a.shape[1] if self.a.ndim == 2 else 0
        for name in ("a", "b", "c", "g"):
            if getattr(self, name).shape != (rows, n):
                raise ValueError(f"table {name} must have shape ({rows}, n)")
        if self.jac.shape != (rows, 6, n):
            raise ValueError(f"Jacobian table must have shape ({rows}, 6, {n})")
        for name in ("a", "b", "c", "g", "jac"):
            if not np.isfinite(getattr(self, name)).all():
                raise ValueError(f"table {name} contains non-finite entries")

    @property
    def n(self) -> int:
        return self.a.shape[1]


RobotModel = Union[Planar2R, SampledModel]


def _check_vec(name, vec, n):
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {vec.shape}")
    return vec


def eval_dynamics(model, q, qd, qdd, wrench=None) -> np.ndarray:
    """Joint torques for a state (q, qd, qdd) and exerted wrench.

    Only analytic models support this; a ``SampledModel`` carries
    path-projected tables and cannot be queried at arbitrary q.
    """
    if not isinstance(model, Planar2R):
        raise TypeError("dynamics evaluation needs an analytic model kind")
    q = _check_vec("q", q, model.n)
    qd = _check_vec("qd", qd, model.n)
    qdd = _check_vec("qdd", qdd, model.n)
    cor = model.coriolis(q)
    tau = (
        model.inertia(q) @ qdd
        + np.einsum("ijk,j,k->i", cor, qd, qd)
        + model.friction * qd
        + model.gravity(q)
    )
    if wrench is not None:
        tau = tau + model.jacobian(q).T @ wrench.as_vector()
    return tau


def eval_jacobian(model, q) -> np.ndarray:
    """Geometric Jacobian at q (analytic models only)."""
    if not isinstance(model, Planar2R):
        raise TypeError("Jacobian evaluation needs an analytic model kind")
    q = _check_vec("q", q, model.n)
    return model.jacobian(q)


_TABLE_PREFIXES = ("a", "b", "c", "g")


def _table_header(n: int) -> list[str]:
    cols = ["lambda"]
    for prefix in _TABLE_PREFIXES:
        cols += [f"{prefix}_{j + 1}" for j in range(n)]
    cols += [f"J_{r + 1}{c + 1}" for r in range(6) for c in range(n)]
    return cols


def read_sampled_tables(path) -> SampledModel:
    """Load a sampled-model CSV (columns lambda, a_*, b_*, c_*, g_*, J_*)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    ncols = len(header)
    if (ncols - 1) % 10 != 0:
        raise ConfigError("model.table", f"unexpected column count {ncols}")
    n = (ncols - 1) // 10
    if header != _table_header(n):
        raise ConfigError("model.table", "header does not match the sampled-table layout")
    if data.shape[1] != ncols:
        raise ConfigError("model.table", "row width does not match the header")
    grid = data[:, 0]
    blocks = [data[:, 1 + k * n : 1 + (k + 1) * n] for k in range(4)]
    jac = data[:, 1 + 4 * n :].reshape(-1, 6, n)
    try:
        return SampledModel(grid, *blocks, jac)
    except ValueError as exc:
        raise ConfigError("model.table", str(exc)) from exc


def write_sampled_tables(path, lambda_grid, a, b, c, g, jac) -> None:
    """Write projected tables in the sampled-model CSV layout."""
    n = a.shape[1]
    flat = np.column_stack(
        [lambda_grid, a, b, c, g, jac.reshape(len(lambda_grid), 6 * n)]
    )
    header = ",".join(_table_header(n))
    np.savetxt(path, flat, delimiter=",", header=header, comments="", fmt="%.17g")


def load_model(spec: dict, base_dir=None) -> RobotModel:
    """Build a model from a config mapping (the ``[model]`` section).

    A ``planar-2r`` spec carries the link parameters directly; a
    ``sampled`` spec names a table CSV, resolved against ``base_dir``.
    """
    kind = spec.get("kind")
    if kind == "planar-2r":
        required = ("l1", "l2", "m1", "m2", "r1", "r2", "I1", "I2")
        missing = [key for key in required if key not in spec]
        if missing:
            raise ConfigError(f"model.{missing[0]}", "missing required field")
        try:
            return Planar2R(
                l1=float(spec["l1"]),
                l2=float(spec["l2"]),
                m1=float(spec["m1"]),
                m2=float(spec["m2"]),
                r1=float(spec["r1"]),
                r2=float(spec["r2"]),
                I1=float(spec["I1"]),
                I2=float(spec["I2"]),
                friction=np.asarray(spec.get("friction", (0.0, 0.0)), dtype=float),
                g0=float(spec.get("g0", 9.81)),
                gravity_in_plane=bool(spec.get("gravity_in_plane", True)),
            )
        except ValueError as exc:
            raise ConfigError("model", str(exc)) from exc
    if kind == "sampled":
        if "table" not in spec:
            raise ConfigError("model.table", "missing required field")
        table = spec["table"]
        if base_dir is not None and not os.path.isabs(table):
            table = os.path.join(base_dir, table)
        if not os.path.exists(table):
            raise ConfigError("model.table", f"file not found: {table}")
        return read_sampled_tables(table)
    raise ConfigError("model.kind", f"unknown model kind {kind!r}")
