"""Exception hierarchy shared across the package."""


class H2PlanError(Exception):
    """Base class for all package errors."""


# --- scenario data -----------------------------------------------------------

class ScenarioError(H2PlanError, ValueError):
    """Invalid scenario input. ``row`` is the 0-based data row, when known."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class MissingColumn(ScenarioError):
    pass


class NonHourlyStep(ScenarioError):
    pass


class OutOfRangeCapacityFactor(ScenarioError):
    pass


class NegativeIntensity(ScenarioError):
    pass


class OutOfBounds(H2PlanError, IndexError):
    pass


class InsufficientHistory(H2PlanError):
    def __init__(self, message, available_hours=0):
        super().__init__(message)
        self.available_hours = available_hours


# --- linear programming ------------------------------------------------------

class LpError(H2PlanError):
    pass


class InvalidBounds(LpError, ValueError):
    pass


class UnknownVariable(LpError, IndexError):
    pass


class SolverFailure(LpError, RuntimeError):
    """The backend stopped without a definite status (iteration limit, numerics)."""


# --- dispatch ----------------------------------------------------------------

class InvalidMassSpec(H2PlanError, ValueError):
    pass


class NotOptimal(H2PlanError):
    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class InternalConsistency(H2PlanError):
    pass


# --- planning and simulation ---------------------------------------------------

class WindowInfeasible(H2PlanError):
    """The remaining period target cannot be produced within the planning window."""


class PlanningError(H2PlanError):
    """The daily planner failed on an input that passed the feasibility filter."""


class PlanInfeasible(H2PlanError):
    pass


class ContractBreach(H2PlanError):
    def __init__(self, message, day=None):
        if day is not None:
            message = f"day {day}: {message}"
        super().__init__(message)
        self.day = day


class BenchmarkInfeasible(H2PlanError):
    pass


class ContractConfigError(H2PlanError, ValueError):
    pass


# --- metrics -----------------------------------------------------------------

class ZeroProduction(H2PlanError, ZeroDivisionError):
    pass


class MismatchedAlphas(H2PlanError, ValueError):
    pass
