"""Shared exception types."""


class PivotLabError(Exception):
    """Base class for errors raised by this package."""


class TooLarge(PivotLabError):
    """An input exceeds the scale guard of an exact-arithmetic operation."""


class NoBlockingRow(PivotLabError):
    """The requested edge is an improving ray: no constraint blocks it."""

    def __init__(self, ray):
        super().__init__("improving edge is unbounded")
        self.ray = ray


class NotImproving(PivotLabError):
    """The requested entering index has nonpositive reduced cost."""


class CycleDetected(PivotLabError):
    """A basis repeated while the anti-cycling safeguard was disabled."""


class CertificateUnavailable(PivotLabError):
    """The solve result no longer carries the final tableau."""


class NoVertex(PivotLabError):
    """The feasible region is nonempty but has no vertex (rank(A) < d)."""


class GenerationFailed(PivotLabError):
    """Rejection sampling exhausted its retry budget."""


class BudgetExceeded(PivotLabError):
    """An exhaustive search exceeded its configured budget."""


class RecursionBudgetExceeded(BudgetExceeded):
    """A random-facet recursion exceeded its configured budget."""


class NotAnAOF(PivotLabError):
    """An orientation claimed to be an abstract objective function is not."""


class NotSimple(PivotLabError):
    """A vertex-facet incidence does not describe a simple polytope."""


class SingularSystem(PivotLabError):
    """An exact linear solve met a singular matrix."""
