"""
Exception types raised across the simulator.
Unreachability is data for the mission loop; everything else aborts a run.
"""


class SimulationError(Exception):
    """Root of all simulator errors."""


class UnsupportedElementsError(SimulationError, ValueError):
    """Element set cannot be handled by the requested propagator."""


class DegenerateFrameError(SimulationError, ValueError):
    """A local frame or direction is undefined at the given point."""


class GeometryError(SimulationError, ValueError):
    """Coincident points or zero-length vectors where a direction is needed."""


class ConstellationError(SimulationError, ValueError):
    """Invalid layer definition, ID assignment or satellite lookup."""


class TleFormatError(SimulationError, ValueError):
    """
    A two-line element record could not be read.

    :param message: str -- What went wrong
    :param line_number: int -- 1-based line of the offending record
    :param records: list -- Elements parsed successfully before the error
    """

    def __init__(self, message: str, line_number: int, records: list | None = None):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
        self.records = list(records or [])
        self.partial = True


class ScenarioError(SimulationError, ValueError):
    """Scenario file is malformed or semantically invalid."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None, column: int | None = None):
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        elif field:
            location = f" at '{field}'"
        super().__init__(f"{message}{location}")
        self.field = field
        self.line = line
        self.column = column


class UnreachableError(SimulationError, RuntimeError):
    """No telecommand path exists for the destination at the sample time."""


class DescentBlockedError(UnreachableError):
    """No cross-layer candidate is visible below the current node."""

    def __init__(self, sat: int, layer: int):
        super().__init__(f"descent blocked below satellite {sat}: no layer-{layer} candidate above min elevation")
        self.sat = sat
        self.layer = layer


class MissionError(SimulationError, RuntimeError):
    """A work item of the mission loop failed for a reason other than unreachability."""
