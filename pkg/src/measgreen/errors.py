"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`MeasGreenError`, so callers can tell mathematical obstructions apart
from programming errors.  The CLI maps :class:`Obstruction` subclasses to
exit status 1 and :class:`InputError` subclasses to exit status 2.
"""

from __future__ import annotations


class MeasGreenError(Exception):
    """Base class for all library errors."""


class InputError(MeasGreenError):
    """The problem data is malformed or violates a hypothesis."""


class Obstruction(MeasGreenError):
    """A well-posed computation has no (reliable) answer."""


class SpecInvalid(InputError):
    """Raised when a :class:`~measgreen.model.SystemSpec` fails validation."""

    def __init__(self, report):
        super().__init__("invalid system: " + "; ".join(report.violations))
        self.report = report


class OutOfDomain(InputError):
    """Evaluation point outside ``[a, b]``."""


class EmptyPartition(InputError):
    """Block-system assembly requested for a system without atoms."""


class NotPurelyAtomic(InputError):
    """A relation-level operation needs ``w`` without gap densities."""


class DependentConditions(InputError):
    """Boundary functionals are linearly dependent on ``T_max``."""


class NotInKernel(InputError):
    """A vector that should lie in a kernel does not."""


class GenericityNotFound(Obstruction):
    """No admissible spectral parameter was found by rejection sampling."""


class RankUnstable(Obstruction):
    """An integer-valued answer changes under a tolerance sweep."""

    def __init__(self, msg, ranks=None):
        super().__init__(msg)
        self.ranks = ranks


class Unsolvable(Obstruction):
    """The non-homogeneous equation has no solution.

    ``witness`` holds, column-wise, vectors ``v`` of the relevant adjoint
    kernel with ``v* F0 != 0``; ``obstruction`` their inner products.
    """

    def __init__(self, msg, witness, obstruction):
        super().__init__(msg)
        self.witness = witness
        self.obstruction = obstruction


class NotInResolventSet(Obstruction):
    """``T - lambda`` is not bijective on the finite model."""


class ProjectionFailed(Obstruction):
    """Canonicalization could not realize a projection inside L0."""


class InternalDisagreement(Obstruction):
    """Two independent routes to the same answer disagree."""
