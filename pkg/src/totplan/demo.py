"""Built-in desk-scale demo: a planar 2R arm writing on a compliant board.

The arm works in a vertical plane (in-plane gravity). The board lies on
the base x axis at 0.55 m; the stroke runs straight up the writing
direction (base y) at constant contact-axis coordinate. Chalk-style
wrench bounds apply: the stroke needs at least 1 N of normal force and
the chalk tolerates 80 N, with Coulomb friction along the motion
direction. The wrench torques mostly oppose the accelerating joint
torques on this geometry, so the wrench-aware plan comes out slower
than the wrench-blind one and the blind plan breaks the modified
limits.
"""

from __future__ import annotations

import numpy as np

from .path import TaskPath, build_path, planar_ik
from .planner import PhaseGrid
from .robot_model import Planar2R
from .wrench import ContactSpec

__all__ = [
    "demo_model",
    "demo_task",
    "demo_contact",
    "demo_joint_path",
    "DEMO_TAU_LOWER",
    "DEMO_TAU_UPPER",
    "DEMO_QD_LOWER",
    "DEMO_QD_UPPER",
    "DEMO_GRID",
    "BOARD_X",
    "DEMO_TOML",
]

BOARD_X = 0.55
STROKE_Y = (-0.35, 0.35)
N_SAMPLES = 121

DEMO_TAU_UPPER = np.array([70.0, 40.0])
DEMO_TAU_LOWER = -DEMO_TAU_UPPER
DEMO_QD_UPPER = np.array([0.8, 1.0])
DEMO_QD_LOWER = -DEMO_QD_UPPER
DEMO_GRID = PhaseGrid(n_lambda=121, n_lambda_dot=241, lambda_dot_max=1.1)


def demo_model() -> Planar2R:
    return Planar2R(
        l1=0.5,
        l2=0.5,
        m1=3.0,
        m2=2.0,
        r1=0.25,
        r2=0.25,
        I1=3.0 * 0.5**2 / 12.0,
        I2=2.0 * 0.5**2 / 12.0,
        friction=np.array([0.4, 0.2]),
        g0=9.81,
        gravity_in_plane=True,
    )


def demo_task(n: int = N_SAMPLES) -> TaskPath:
    lam = np.linspace(0.0, 1.0, n)
    xy = np.column_stack(
        [np.full(n, BOARD_X), STROKE_Y[0] + (STROKE_Y[1] - STROKE_Y[0]) * lam]
    )
    return TaskPath(lam, xy)


def demo_joint_path(n: int = N_SAMPLES):
    task = demo_task(n)
    q = planar_ik(task, demo_model(), branch="elbow-up")
    return build_path(task.lambda_grid, q, scheme="cubic-spline"), task


def demo_contact() -> ContactSpec:
    return ContactSpec(normal_axis=0, f_lower=1.0, f_upper=80.0, mu=0.519)


DEMO_TOML = """\
# Planar 2R writing demo: a vertical stroke on a compliant board placed
# on the base x axis (the contact direction); the writing plane is the
# orthogonal y-z plane, the arm moving along y.

[model]
kind = "planar-2r"
l1 = 0.5
l2 = 0.5
m1 = 3.0
m2 = 2.0
r1 = 0.25
r2 = 0.25
I1 = 0.0625
I2 = 0.041666666666666664
friction = [0.4, 0.2]
g0 = 9.81
gravity_in_plane = true

[path]
file = "path.csv"
scheme = "cubic-spline"
branch = "elbow-up"

[limits]
tau_upper = [70.0, 40.0]
tau_lower = [-70.0, -40.0]
qd_upper = [0.8, 1.0]
qd_lower = [-0.8, -1.0]

[wrench]
kind = "contact"
normal_axis = 0
f_lower = 1.0
f_upper = 80.0
mu = 0.519
gamma_mode = "segment"

[grid]
n_lambda = 121
n_lambda_dot = 241
lambda_dot_max = 1.1

[sim]
# contact axis x: compliant, heavily damped; writing plane: stiff.
mass = [0.02, 0.1, 0.1]
damping = [1200.0, 300.0, 300.0]
stiffness = [625.0, 5500.0, 5500.0]
f_d = 20.0
rest_position = 0.55
contact_stiffness = 1e4
dt = 0.002
transient = 0.5
force_lower = 1.0
force_upper = 80.0
guard = 1.0

[output]
directory = "out"
sample_dt = 0.002
"""
