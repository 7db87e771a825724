"""Exception hierarchy.

The CLI maps :class:`InputError` subclasses to exit code 2 and every other
:class:`AcceptRankError` (plus ``ValueError``) to exit code 1.
"""


class AcceptRankError(Exception):
    """Base class for all package errors."""


class InputError(AcceptRankError):
    """Unreadable or malformed input data."""


class ParseError(InputError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DuplicateKeyError(ParseError):
    pass


class FormatVersionError(InputError):
    pass


class ValidationError(AcceptRankError, ValueError):
    """Well-formed input that violates a data invariant."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ReferentialIntegrityError(ValidationError):
    def __init__(self, paper_id):
        self.paper_id = paper_id
        super().__init__(f"authorship references unknown paper_id {paper_id!r}")


class EmptyMatrixError(ValidationError):
    pass


class DegenerateInputError(ValidationError):
    pass


class EmptyPairSetError(ValidationError):
    pass


class UndefinedMetricError(ValidationError):
    pass


class ConfigError(AcceptRankError):
    pass


class NotTrainedError(AcceptRankError):
    pass
