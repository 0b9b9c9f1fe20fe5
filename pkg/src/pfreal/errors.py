class StructuralError(RuntimeError):
    """A structural property that must hold for a correct solve was violated."""


class VerificationError(StructuralError):
    pass


class NonGenericCoordinateError(ValueError):
    """The chosen coordinate does not separate the solutions."""


class PrecisionError(ArithmeticError):
    """A sign decision could not be made at the working precision."""


class LoopRejected(RuntimeError):
    """A monodromy loop could not be tracked to a clean permutation."""


class AmbiguousRealityWarning(UserWarning):
    pass
