"""Exception types raised by waylab."""


class WaylabError(ValueError):
    """Base class for all waylab input and precondition errors."""


class DimensionMismatchError(WaylabError):
    pass


class NotHermitianError(WaylabError):
    pass


class NotIsometryError(WaylabError):
    pass


class InvalidMeasurementError(WaylabError):
    pass


class InvalidStateError(WaylabError):
    pass


class DegenerateObservableError(WaylabError):
    """A construction that needs one-dimensional eigenspaces got a degenerate observable."""


class HypothesisViolation(WaylabError):
    """The hypotheses of a theorem check do not hold for the given instance.

    This is distinct from a failed conclusion: the instance is outside the
    theorem's scope, so nothing is asserted about it.

    Attributes:
        condition: short name of the violated hypothesis.
        defect: norm measuring how badly it is violated.
        threshold: the tolerance it was compared against.
    """

    def __init__(self, condition: str, defect: float, threshold: float, message: str = ""):
        self.condition = condition
        self.defect = float(defect)
        self.threshold = float(threshold)
        text = f"hypothesis '{condition}' violated: defect {self.defect:.6g} > {self.threshold:.6g}"
        if message:
            text = f"{text} ({message})"
        super().__init__(text)
