"""Projection of the dynamic model onto the path coordinate.

Substituting qd = q' ld and qdd = q' ldd + q'' ld^2 into the joint-space
model collapses it to one scalar degree of freedom:

    a(lam) ldd + b(lam) ld^2 + c(lam) ld + g(lam) = tau - J(lam)^T h_e

with, per lambda node,

    a = B q',   b = B q'' + q'^T C q',   c = F q',   g = g(q),   J = J(q).

Coefficients are tabulated at the path nodes; downstream consumers
interpolate linearly between nodes so the planner inner loop stays
allocation-free. Results are deterministic and immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .path import PathSpec
from .robot_model import Planar2R, SampledModel, write_sampled_tables

__all__ = ["ProjectedDynamics", "project_dynamics", "interp_columns", "export_tables"]


def interp_columns(lam, grid, table):
    """Linearly interpolate each column of an (N, ...) table at lam.

    ``lam`` may be a scalar or a 1-D array; the trailing table shape is
    preserved. One shared routine keeps interpolation bit-identical
    across the planner, the limit machinery and re-checks in tests.
    """
    table = np.asarray(table)
    flat = table.reshape(table.shape[0], -1)
    cols = [np.interp(lam, grid, flat[:, j]) for j in range(flat.shape[1])]
    out = np.stack(cols, axis=-1)
    return out.reshape(np.shape(lam) + table.shape[1:])


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProjectedDynamics:
    """Per-lambda tables of the projected coefficients a, b, c, g and J."""

    lambda_grid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    g: np.ndarray
    jac: np.ndarray

    def __post_init__(self):
        for name in ("lambda_grid", "a", "b", "c", "g", "jac"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        if not (np.diff(self.lambda_grid) > 0.0).all():
            raise ValueError("lambda grid must be strictly increasing")
        rows, n = self.a.shape
        for name in ("b", "c", "g"):
            if getattr(self, name).shape != (rows, n):
                raise ValueError(f"table {name} must have shape ({rows}, {n})")
        if self.jac.shape != (rows, 6, n):
            raise ValueError(f"Jacobian table must have shape ({rows}, 6, {n})")

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def total_length(self) -> float:
        return float(self.lambda_grid[-1])

    def at(self, lam):
        """(a, b, c, g, J) linearly interpolated at a scalar lambda."""
        grid = self.lambda_grid
        return (
            interp_columns(lam, grid, self.a),
            interp_columns(lam, grid, self.b),
            interp_columns(lam, grid, self.c),
            interp_columns(lam, grid, self.g),
            interp_columns(lam, grid, self.jac),
        )


def project_dynamics(model, path: PathSpec = None) -> ProjectedDynamics:
    """Evaluate the projected coefficient tables for a model.

    For the analytic 2R kind the tables are evaluated at every node of
    ``path``. A sampled model already carries projected tables; they are
    adopted verbatim and ``path`` is ignored.
    """
    if isinstance(model, SampledModel):
        return ProjectedDynamics(
            model.lambda_grid, model.a, model.b, model.c, model.g, model.jac
        )
    if not isinstance(model, Planar2R):
        raise TypeError(f"cannot project model of type {type(model).__name__}")
    if path is None:
        raise ValueError("projecting an analytic model requires a path")
    if path.n != model.n:
        raise ValueError(
            f"model has {model.n} joints but the path carries {path.n}"
        )
    rows = path.lambda_grid.size
    a = np.empty((rows, model.n))
    b = np.empty((rows, model.n))
    c = np.empty((rows, model.n))
    g = np.empty((rows, model.n))
    jac = np.empty((rows, 6, model.n))
    for k in range(rows):
        q = path.q[k]
        qp = path.q_prime[k]
        qs = path.q_second[k]
        inertia = model.inertia(q)
        cor = model.coriolis(q)
        a[k] = inertia @ qp
        b[k] = inertia @ qs + np.einsum("ijk,j,k->i", cor, qp, qp)
        c[k] = model.friction * qp
        g[k] = model.gravity(q)
        jac[k] = model.jacobian(q)
    return ProjectedDynamics(path.lambda_grid, a, b, c, g, jac)


def export_tables(projected: ProjectedDynamics, path) -> None:
    """Write the tables in the sampled-model CSV layout (round-trip path)."""
    write_sampled_tables(
        path,
        projected.lambda_grid,
        projected.a,
        projected.b,
        projected.c,
        projected.g,
        projected.jac,
    )
