"""Exception hierarchy. Each family carries the CLI exit code it maps to."""

from __future__ import annotations


class CarbonFLError(Exception):
    exit_code = 1


class ConfigError(CarbonFLError):
    """Malformed experiment config or command-line combination."""

    exit_code = 2


# -- ingestion / data (exit 4) -------------------------------------------------

class DataError(CarbonFLError):
    exit_code = 4


class SchemaError(DataError):
    pass


class GapError(DataError):
    pass


class UnknownRegion(DataError):
    pass


class HorizonTooLong(DataError):
    pass


# -- analysis (exit 4) ---------------------------------------------------------

class WindowTooShort(DataError):
    pass


class ZeroBaseline(DataError):
    pass


class BadN(DataError):
    pass


class OffsetOutOfRange(DataError):
    pass


# -- scheduling (exit 5) -------------------------------------------------------

class ScheduleError(CarbonFLError):
    exit_code = 5


class DimensionMismatch(ScheduleError):
    pass


class BadAlpha(ScheduleError):
    pass


class BadConfig(ScheduleError):
    pass


class InstanceTooLarge(ScheduleError):
    pass


class NoFeasiblePlacement(ScheduleError):
    exit_code = 6


# -- statistics (exit 7) -------------------------------------------------------

class MetricsError(CarbonFLError):
    exit_code = 7


class ZeroFrequency(MetricsError):
    """Some client has zero selection frequency; ``stats`` holds the partial result."""

    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats


# -- simulation (exit 8) -------------------------------------------------------

class SimulationError(CarbonFLError):
    exit_code = 8


class BadShape(SimulationError):
    pass


class PartitionFailure(SimulationError):
    pass


class NonFiniteLoss(SimulationError):
    pass


class EmptyActiveSet(SimulationError):
    pass


class ZeroFrequencyActive(SimulationError):
    pass


class ScheduleCostMismatch(SimulationError):
    pass


class EmptyTestSet(SimulationError):
    pass


EXIT_FILE_NOT_FOUND = 3
