"""Exception and warning types raised by edgesym."""


class SymmetryError(ValueError):
    """Base class for all edgesym errors."""


class DegenerateSample(SymmetryError):
    pass


class UnsupportedScoreDerivative(SymmetryError):
    pass


class MomentDoesNotExist(SymmetryError):
    pass


class XiTooLarge(SymmetryError):
    pass


class NonPositiveVariance(SymmetryError):
    pass


class ZeroDenominator(SymmetryError):
    pass


class DivergentIntegral(SymmetryError):
    pass


class ZeroShift(SymmetryError):
    pass


class GrammarError(SymmetryError):
    """A model or family descriptor string could not be parsed."""

    def __init__(self, text, token=None):
        self.text = text
        self.token = token if token is not None else text
        super().__init__(f"cannot parse {text!r}: bad token {self.token!r}")


class TiesAtCenter(UserWarning):
    """Some observations coincide with the symmetry center."""
