"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad shapes, missing keys, mismatched presets."""


class InputError(ValueError):
    """Caller passed data that violates an operation's contract."""


class InternalError(RuntimeError):
    """Internal consistency violation (e.g. rule/weight shape drift)."""


class EvaluationError(RuntimeError):
    """A fitness evaluation produced an unusable (non-finite) value."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SimulationFault(RuntimeError):
    """Walker state became non-finite at a given step."""

    def __init__(self, step_index):
        super().__init__(f"non-finite walker state at step {step_index}")
        self.step_index = step_index
