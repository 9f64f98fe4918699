"""Exception hierarchy shared by every module of the package."""


class HiberschedError(Exception):
    """Base class for all package errors."""


class ParseError(HiberschedError):
    """An input file could not be parsed."""


class ValidationError(HiberschedError):
    """Parsed input violates a domain invariant."""


class NoFeasibleVm(HiberschedError):
    """No VM type in the catalog can host a task."""


class Infeasible(HiberschedError):
    """A schedule cannot be built within the deadline."""


class InfeasibleBackup(Infeasible):
    """A recovery group cannot be backed up before the deadline."""


class ScenarioError(HiberschedError):
    """A hibernation scenario references an invalid instance or policy."""


class StatsError(HiberschedError):
    """Job statistics are contradictory."""
