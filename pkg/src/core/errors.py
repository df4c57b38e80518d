"""
Exception hierarchy for the P2 signature simulator
"""

from typing import Optional


class SimulatorError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigurationError(SimulatorError):
    """Invalid configuration value (key length, policy, settings file)"""


class LengthMismatchError(SimulatorError):
    """Bit operation on operands of different length"""

    def __init__(self, left: int, right: int, what: str = "operands"):
        super().__init__(f"length mismatch between {what}: {left} != {right}")
        self.left = left
        self.right = right


class PositionOutOfRangeError(SimulatorError):
    """Partial key position outside [0, L)"""

    def __init__(self, position: int, length: int):
        super().__init__(f"position {position} out of range for length {length}")
        self.position = position
        self.length = length


class PhaseError(SimulatorError):
    """Principal transition invoked in the wrong phase"""


class InapplicableActionError(SimulatorError):
    """Attacker action does not apply to the message kind or intercept point"""


class MissingKnowledgeError(SimulatorError):
    """Attacker action needs a value Eve has not observed"""


class ScenarioDeadlockError(SimulatorError):
    """A principal awaits a message that nobody will send"""


class StrategyParseError(SimulatorError):
    """Malformed strategy file"""

    def __init__(self, reason: str, line: int, source: Optional[str] = None):
        location = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"{location}: {reason}")
        self.reason = reason
        self.line = line
        self.source = source
