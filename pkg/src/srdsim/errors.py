"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (bad key, bad value, CFL violation)."""


class TrajectoryOverflowError(RuntimeError):
    """A time step produced non-finite field values.

    Carries the step index, the simulated time and the scheme name so that
    ensemble drivers can report exactly where a sample blew up.
    """

    def __init__(self, step_index: int, time: float, scheme: str):
        self.step_index = step_index
        self.time = time
        self.scheme = scheme
        super().__init__(
            f"non-finite state after step {step_index} (t={time:.6g}, scheme={scheme})"
        )
