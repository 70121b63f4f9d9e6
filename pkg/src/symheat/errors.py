"""Exception hierarchy.

Numerical failures (rejected steps, Newton divergence, mesh crossing) derive
from :class:`NumericalFailure`; the CLI maps them to exit code 1. Everything
else is a usage or input problem and maps to exit code 2.
"""


class SymheatError(Exception):
    pass


class NumericalFailure(SymheatError):
    pass


class InputError(SymheatError, ValueError):
    pass


class LayerMismatch(InputError):
    pass


class NonMonotoneMesh(NumericalFailure):
    pass


class NonUniformMesh(InputError):
    pass


class GeometryViolation(InputError):
    pass


class NonPositiveValue(InputError):
    pass


class NegativePower(InputError):
    pass


class DivisionByZero(InputError, ZeroDivisionError):
    pass


class DegenerateExponent(InputError):
    pass


class DomainError(InputError):
    pass


class MissingFlow(InputError):
    pass


class StepRejected(NumericalFailure):
    pass


class NewtonDivergence(NumericalFailure):
    pass


class NonPositiveIterate(NumericalFailure):
    pass


class OracleMismatch(InputError):
    pass


class UnknownSet(InputError):
    pass


class ParseError(InputError):
    pass
