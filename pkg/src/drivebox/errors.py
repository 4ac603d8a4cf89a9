"""Exception types shared across the simulator."""


class DriveboxError(Exception):
    """Base class for all simulator errors."""


class MalformedMap(DriveboxError):
    """Map file violates the JSON map schema."""


class EmptyMesh(MalformedMap):
    """Map contains no nondegenerate drivable triangle."""


class DimensionMismatch(DriveboxError):
    """Action vector length does not match the kinematic model."""


class NonFiniteInput(DriveboxError):
    """State or action contains NaN or infinity."""


class MissingActions(DriveboxError):
    """Step was asked to advance a present agent without an action."""

    def __init__(self, agent_type: str, index: int):
        super().__init__(f"no action for present agent {agent_type}[{index}]")
        self.agent_type = agent_type
        self.index = index


class AbsentAgent(DriveboxError):
    """Operation requires a present agent."""


class ConfigError(DriveboxError):
    """Invalid wrapper or renderer configuration."""


class LiftError(DriveboxError):
    """A lifted per-type function failed for one agent type."""

    def __init__(self, agent_type: str, original: Exception):
        super().__init__(f"{agent_type}: {original}")
        self.agent_type = agent_type
        self.original = original


class BackendUnavailable(ConfigError):
    """Requested rendering backend does not exist."""


class PlacementExhausted(DriveboxError):
    """Rejection sampling failed to place a requested agent."""

    def __init__(self, placed: int):
        super().__init__(f"placement exhausted after placing {placed} agents")
        self.placed = placed


class LengthMismatch(DriveboxError):
    """Driven-state list is not aligned with the NPC rows."""


class HorizonExceeded(DriveboxError):
    """Replay was queried past the end of its log."""


class SteppedAfterDone(DriveboxError):
    """Environment was stepped after termination without a reset."""


class IncompleteEpisode(DriveboxError):
    """Episode metrics requested before the episode ended."""


class MalformedScenario(DriveboxError):
    """Scenario file violates the scenario schema."""


class BindFailure(DriveboxError):
    """Server could not bind its listen address."""
