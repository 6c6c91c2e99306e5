"""Exception types and the process exit codes they map to."""

EXIT_OK = 0
EXIT_MONITOR_FAILURE = 2
EXIT_SINGULARITY = 3
EXIT_CONFIG = 4


class IMCFError(Exception):
    exit_code = 1


class ConfigError(IMCFError, ValueError):
    """Invalid configuration, grid request or initial data."""

    exit_code = EXIT_CONFIG

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SingularityGuard(IMCFError):
    """Base for analytic-breakdown guards tripped during a flow."""

    exit_code = EXIT_SINGULARITY

    def __init__(self, message, worst=None, index=None):
        super().__init__(message)
        self.worst = worst
        self.index = index
        # filled in by the integrator when it has the context
        self.t = None
        self.records = None


class SpacelikeViolation(SingularityGuard):
    """The graph ceased to be spacelike: 1 - |D phi|^2 fell below the guard."""


class MeanConvexityLoss(SingularityGuard):
    """The mean curvature fell below the guard value."""


class MonitorFailure(IMCFError):
    exit_code = EXIT_MONITOR_FAILURE
