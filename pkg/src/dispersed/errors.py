"""Exception hierarchy.

Every error raised on purpose by the package derives from ``DispersedError``
and from the builtin exception that best describes it, so callers can catch
either.
"""


class DispersedError(Exception):
    """Base class for package errors."""


# piecewise functions
class UnsortedBreakpoints(DispersedError, ValueError):
    pass


class PieceCountMismatch(DispersedError, ValueError):
    pass


class EmptyDomain(DispersedError, ValueError):
    pass


class DomainMismatch(DispersedError, ValueError):
    pass


class OutOfDomain(DispersedError, ValueError):
    pass


class IntervalOutOfDomain(DispersedError, ValueError):
    pass


class NonFiniteMass(DispersedError, ArithmeticError):
    pass


# learners and mechanisms
class BadGeometry(DispersedError, ValueError):
    pass


class BadPrivacyParams(DispersedError, ValueError):
    pass


class RangeViolation(DispersedError, ValueError):
    pass


class NetTooLarge(DispersedError, ValueError):
    pass


class PayoffOutOfRange(DispersedError, ValueError):
    pass


class LengthMismatch(DispersedError, ValueError):
    pass


class EmptyNet(DispersedError, ValueError):
    pass


class NotNeighbors(DispersedError, ValueError):
    pass


# instance families
class TooLarge(DispersedError, ValueError):
    pass


class BadKappa(DispersedError, ValueError):
    pass


class NonSymmetric(DispersedError, ValueError):
    pass


class NonPositiveS(DispersedError, ValueError):
    pass


class DegenerateZ(DispersedError, ValueError):
    pass


class PriceCountMismatch(DispersedError, ValueError):
    pass


class NonAdditive(DispersedError, ValueError):
    pass


class UnsupportedCombination(DispersedError, ValueError):
    pass


class BadParams(DispersedError, ValueError):
    pass


# harness
class UnknownFamily(DispersedError, ValueError):
    pass


class TooShort(DispersedError, ValueError):
    pass


class ConfigError(DispersedError, ValueError):
    """Invalid experiment configuration.

    ``problems`` maps a slash-separated field path to a list of complaints.
    """

    def __init__(self, problems):
        self.problems = {k: list(v) if isinstance(v, (list, tuple)) else [str(v)]
                         for k, v in dict(problems).items()}
        lines = [f"{field}: {'; '.join(msgs)}" for field, msgs in sorted(self.problems.items())]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))
