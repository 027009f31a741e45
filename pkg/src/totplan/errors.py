"""Structured errors shared across the planning pipeline."""


class ConfigError(ValueError):
    """Invalid run configuration. ``field`` names the offending config key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class InfeasibleLimitError(ValueError):
    """Wrench bounds leave no admissible torque at one or more path nodes.

    ``nodes`` is a list of (lambda, joint_index, effective_lower,
    effective_upper) tuples, one per infeasible node.
    """

    def __init__(self, nodes):
        self.nodes = list(nodes)
        lam, joint, lo, hi = self.nodes[0]
        super().__init__(
            f"effective torque limits empty at {len(self.nodes)} node(s); "
            f"first at lambda={lam:.9g}, joint {joint} "
            f"(lower {lo:.9g} > upper {hi:.9g})"
        )


class InfeasiblePlanError(RuntimeError):
    """No feasible phase-plane path; ``column`` is the first blocked column."""

    def __init__(self, column, lam, message=None):
        self.column = column
        self.lam = lam
        super().__init__(
            message
            or f"no reachable phase-plane state at column {column} (lambda={lam:.9g})"
        )


class SimulationDivergedError(RuntimeError):
    """Admittance state exceeded the divergence guard."""

    def __init__(self, t, norm, guard):
        self.t = t
        self.norm = norm
        self.guard = guard
        super().__init__(
            f"admittance correction diverged at t={t:.6g} s "
            f"(|z|={norm:.6g} m > guard {guard:.6g} m)"
        )
