"""Exception types raised across inlab modules."""


class InlabError(Exception):
    """Base class for every inlab error."""


class ConfigurationError(InlabError, ValueError):
    """Inconsistent configuration: layout, joint count, variant or JSON document."""


class ParameterError(InlabError, ValueError):
    """Invalid trajectory parameter (non-positive period, empty composite)."""


class RangeError(InlabError, ValueError):
    """Reference angle outside the joint range of motion."""


class SimulationBlowupError(InlabError, RuntimeError):
    """Simulator state became non-finite."""


class CheckpointFormatError(InlabError):
    """Checkpoint file has a bad magic, version or is truncated."""


class RolloutError(InlabError, ValueError):
    """Rollout buffer is empty or was filled inconsistently."""
