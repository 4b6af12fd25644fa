"""Exception hierarchy shared by every module."""


class PencilError(Exception):
    """Base class for all errors raised by the package."""


class InputError(PencilError, ValueError):
    """Malformed input: wrong shapes, asymmetric matrices, bad exponents."""


class DimensionMismatch(InputError):
    pass


class AsymmetricMatrix(InputError):
    pass


class ModeError(InputError):
    """A float value was handed to an exact-mode constructor, or vice versa."""


class PreconditionError(PencilError, ValueError):
    """The operation was called on data outside its domain."""


class ZeroForm(PreconditionError):
    pass


class InvalidMultiplicities(InputError):
    pass


class AmbiguityError(PencilError):
    """A float-mode decision fell inside a tolerance band; retry in exact mode."""


class ClusterAmbiguous(AmbiguityError):
    pass


class NumericallyAmbiguous(AmbiguityError):
    pass


class InconsistentImages(PencilError):
    pass


class NonDecaying(PencilError):
    pass


class DegenerateLadder(PencilError, ValueError):
    pass


class ZeroPairing(PencilError):
    pass


class FamilyMismatch(PreconditionError):
    pass
