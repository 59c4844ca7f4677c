"""Exception hierarchy for fracpme."""


class FracPMEError(ValueError):
    """Base class for every error raised by this package."""


class GridError(FracPMEError):
    pass


class OrderOutOfRangeError(FracPMEError):
    """Fractional order outside the admitted interval."""


class CFLViolation(FracPMEError):
    def __init__(self, dt, dt_max, vmax):
        super().__init__(
            f"time step {dt!r} exceeds transport limit {dt_max!r} (max face speed {vmax!r})"
        )
        self.dt = dt
        self.dt_max = dt_max
        self.vmax = vmax


class InitialDataError(FracPMEError):
    pass


class SnapshotGridMismatch(InitialDataError):
    pass


class SnapshotError(FracPMEError):
    pass


class MalformedHeader(SnapshotError):
    pass


class TruncatedPayload(SnapshotError):
    pass


class ConfigError(FracPMEError):
    pass


class UnknownKey(ConfigError):
    pass


class ConfigParseError(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass


class TrajectoryError(FracPMEError):
    pass
