"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class RcertError(Exception):
    """Base class for all toolkit errors."""


class FieldEvaluationError(RcertError):
    """A coefficient field returned a non-finite value.

    Non-finite samples are never clipped or ignored; doing so silently
    would corrupt any certificate built on top of them.
    """

    def __init__(self, name: str, t: float, w: float, value: float):
        self.name = name or "<field>"
        self.t = t
        self.w = w
        self.value = value
        super().__init__(f"{self.name} returned non-finite value {value!r} at (t={t!r}, w={w!r})")


class DomainError(RcertError):
    """An operation was asked to work outside its admissible parameter or state domain."""


class NonPositiveWeightError(RcertError):
    """A weight function that must stay positive was sampled at a non-positive value."""


class NegativeIntegrandError(RcertError):
    """A divergence probe met a negative sample of a supposedly nonnegative integrand."""


class QuadratureBudgetError(RcertError):
    """Adaptive quadrature could not reach the requested tolerance within its budget."""


class RangeOverflowError(RcertError):
    """An exponent or intermediate value left the representable floating-point range.

    Callers that build certificates convert this into an Inconclusive
    outcome instead of letting infinities propagate.
    """


class ConfigError(RcertError):
    """A run configuration failed schema validation.

    The message carries a dotted path to the offending entry.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
