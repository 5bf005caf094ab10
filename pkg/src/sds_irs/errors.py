"""Exception hierarchy.

Every precondition failure derives from :class:`ValidationError`; the CLI maps
those to exit code 2 and everything else to exit code 1.
"""


class SdsIrsError(Exception):
    pass


class ValidationError(SdsIrsError, ValueError):
    pass


class IdentityType(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class DegreeTooLarge(ValidationError):
    pass


class DegreeTooSmall(ValidationError):
    pass


class NoClosedForm(ValidationError):
    pass


class LevelOutOfRange(ValidationError):
    pass


class LevelTooSmall(ValidationError):
    pass


class InvalidLabel(ValidationError):
    pass


class NonpositiveInput(ValidationError):
    pass


class ExponentConditionFailed(ValidationError):
    pass


class UnsupportedFormat(ValidationError):
    pass
