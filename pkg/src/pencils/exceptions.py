class PencilError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(PencilError, ValueError):
    pass


class GraphTooLargeError(PencilError, ValueError):
    pass


class NotAcyclicError(PencilError, ValueError):
    pass


class DecompositionError(PencilError, RuntimeError):
    """Residual flow left over after path stripping. Indicates a bug."""


class RetainedMassError(PencilError, ValueError):
    """The length filter kept less than half of the curve mass.

    ``min_c0`` is the smallest length multiplier (in units of d(s, t)) whose
    filter keeps at least half of the mass.
    """

    def __init__(self, message, retained, min_c0):
        super().__init__(message)
        self.retained = retained
        self.min_c0 = min_c0
