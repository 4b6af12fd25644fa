"""Curvature classification and experiments for symmetric matrix pencils.

A pencil (A, B) of real symmetric d x d matrices defines the determinant form
det(sA + tB).  The root multiplicities of that form, or, when it vanishes,
the kernel geometry of the pencil, decide which L^p -> L^q bounds the
associated averaging operator can satisfy.
"""

from .classify import (
    COMMON_KERNEL,
    FLAT_NONVANISHING,
    KERNEL_SPLIT,
    WELL_CURVED,
    DegenerateCommonKernel,
    DegenerateKernelSplit,
    FlatNonvanishing,
    WellCurved,
    classify,
    signature,
)
from .errors import (
    AmbiguityError,
    InputError,
    PencilError,
    PreconditionError,
)
from .factorize import grouped_pair_factorization, pair_factorization
from .pencil import BinaryForm, SymmetricPencil, det_pencil, eval_form
from .ranges import Truth, exponent_range, predicted_true_region
from .roots import roots_with_multiplicities
from .witness import destabilizing_curve, verify_decay

__version__ = "0.1.0"

__all__ = [
    "COMMON_KERNEL",
    "FLAT_NONVANISHING",
    "KERNEL_SPLIT",
    "WELL_CURVED",
    "AmbiguityError",
    "BinaryForm",
    "DegenerateCommonKernel",
    "DegenerateKernelSplit",
    "FlatNonvanishing",
    "InputError",
    "PencilError",
    "PreconditionError",
    "SymmetricPencil",
    "Truth",
    "WellCurved",
    "classify",
    "destabilizing_curve",
    "det_pencil",
    "eval_form",
    "exponent_range",
    "grouped_pair_factorization",
    "pair_factorization",
    "predicted_true_region",
    "roots_with_multiplicities",
    "signature",
    "verify_decay",
]
