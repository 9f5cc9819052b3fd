"""Exception hierarchy.

Every error carries an ``exit_code`` used by the CLI: 2 for bad input or a
violated precondition, 3 for a numerical failure on otherwise valid input.
"""


class ReflectaError(Exception):
    exit_code = 2


class ContractViolation(ReflectaError, ValueError):
    """Input does not satisfy an operation's precondition."""


class SpecError(ReflectaError, ValueError):
    """Malformed ellipsoid, body or path description."""


class BinormalDirection(ReflectaError):
    """The line is an axis of the ellipsoid; its ground hyperplane is not unique."""


class SphericalEllipsoid(ReflectaError):
    """The ellipsoid is a sphere (k = 1), so it has no diagonal lines."""


class DegeneratePointSet(ReflectaError):
    """Points do not affinely span the ambient space."""


class AmbiguousGrouping(ReflectaError):
    exit_code = 3


class DegenerateSection(ReflectaError):
    """A hyperplane section has a repeated axis length among non-axes of the body.

    ``fiber`` holds the partial result with its degeneracy flag set.
    """

    exit_code = 3

    def __init__(self, message, fiber=None):
        super().__init__(message)
        self.fiber = fiber


class SheetCollision(ReflectaError):
    exit_code = 3


class StepTooLarge(ReflectaError):
    exit_code = 3


class TooFewChords(ReflectaError):
    exit_code = 3
