"""Exception hierarchy shared across the package."""


class BarrierCompError(Exception):
    """Base class for all package errors."""


class SpecError(BarrierCompError, ValueError):
    """A structural problem with a safety specification."""


class EmptyChildren(SpecError):
    pass


class DimensionMismatch(SpecError):
    pass


class ZeroNormal(SpecError):
    pass


class NonpositiveRadius(SpecError):
    pass


class NumericalError(BarrierCompError, ArithmeticError):
    """Base for failures caused by floating point trouble."""


class NonFiniteValue(NumericalError):
    pass


class NonFiniteState(NumericalError):
    """Integration produced a non-finite state.

    The partially integrated trajectory is kept on ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class MaxIterations(NumericalError):
    pass


class Infeasible(BarrierCompError):
    """The multi-constraint QP has no feasible input.

    ``certificate`` holds nonnegative multipliers ``lam`` with
    ``lam @ A == 0`` and ``lam @ b > 0`` when one is available.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ParseError(BarrierCompError, ValueError):
    """Scenario document could not be parsed.

    ``key`` is a dotted path into the document, ``line`` the source line
    when the JSON itself is malformed.
    """

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line
