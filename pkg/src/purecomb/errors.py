"""Package exception types."""


class VerificationError(ValueError):
    """A structural precondition failed numerically: the input does not
    belong to the class the requested construction assumes, or a finite
    vector family turned out to be insufficient."""
