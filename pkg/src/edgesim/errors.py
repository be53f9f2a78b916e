"""Exception types shared across the package."""


class EdgeSimError(Exception):
    """Base class for all edgesim errors."""


class ConfigError(EdgeSimError):
    """A config failed validation; carries the complete list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid config:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )


class UnstableQueue(EdgeSimError):
    """Local workload meets or exceeds the active servers' service capacity."""


class InfeasibleAction(EdgeSimError):
    """Action violates the conservative battery constraint for the state."""


class NonConvergence(EdgeSimError):
    """Value iteration hit its sweep cap before meeting tolerance."""


class StaleRecord(EdgeSimError):
    """A transition record was presented to a learner out of slot order."""


class DegenerateSpec(EdgeSimError):
    """A zero-variance green-energy class has its mean off the support grid."""


class UnknownScheme(EdgeSimError):
    """Scheme name not recognized by the harness."""
