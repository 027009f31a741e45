"""Minimum-time path parametrization under bounded end-effector wrenches.

The pipeline: a geometric joint path q(lambda) and a dynamic model are
projected onto the path coordinate; task-level wrench bounds become
per-path modified torque limits; a phase-plane dynamic-programming
search finds the fastest time law that respects them; the resulting
trajectory can be replayed under simulated admittance control to check
the contact-force bounds.
"""

from .admittance import (
    AdmittanceParams,
    EnvironmentModel,
    SimTrace,
    contact_force,
    simulate,
    verify_force_bounds,
)
from .errors import (
    ConfigError,
    InfeasibleLimitError,
    InfeasiblePlanError,
    SimulationDivergedError,
)
from .limits import (
    AccelBounds,
    VelocityLimit,
    VelocityLimitProfile,
    accel_bounds,
    velocity_limit,
    velocity_limit_profile,
)
from .path import PathSpec, TaskPath, build_path, eval_path, planar_ik
from .planner import (
    JointTrajectory,
    PhaseGrid,
    PhasePlaneTrajectory,
    brute_force_plan,
    max_reachable_velocity,
    plan,
    reachable,
    to_joint_trajectory,
    transition_cost,
    verify_trajectory,
)
from .projection import ProjectedDynamics, project_dynamics
from .robot_model import (
    Planar2R,
    RobotModel,
    SampledModel,
    Wrench,
    eval_dynamics,
    eval_jacobian,
    load_model,
)
from .wrench import (
    ContactSpec,
    ModifiedTorqueLimits,
    WrenchProfile,
    contact_wrench_bounds,
    gamma_bounds,
    modified_torque_limits,
)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceParams",
    "AccelBounds",
    "ConfigError",
    "ContactSpec",
    "EnvironmentModel",
    "InfeasibleLimitError",
    "InfeasiblePlanError",
    "JointTrajectory",
    "ModifiedTorqueLimits",
    "PathSpec",
    "PhaseGrid",
    "PhasePlaneTrajectory",
    "Planar2R",
    "ProjectedDynamics",
    "RobotModel",
    "SampledModel",
    "SimTrace",
    "SimulationDivergedError",
    "TaskPath",
    "VelocityLimit",
    "VelocityLimitProfile",
    "Wrench",
    "WrenchProfile",
    "accel_bounds",
    "brute_force_plan",
    "build_path",
    "contact_force",
    "contact_wrench_bounds",
    "eval_dynamics",
    "eval_jacobian",
    "eval_path",
    "gamma_bounds",
    "load_model",
    "max_reachable_velocity",
    "modified_torque_limits",
    "plan",
    "planar_ik",
    "project_dynamics",
    "reachable",
    "simulate",
    "to_joint_trajectory",
    "transition_cost",
    "velocity_limit",
    "velocity_limit_profile",
    "verify_force_bounds",
    "verify_trajectory",
]
