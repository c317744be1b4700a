"""Exception taxonomy.

Every error carries an ``exit_code`` so the command line can map failures
onto the documented process exit statuses:

    0  success
    2  usage / configuration error
    3  provider error
    4  data / invariant error
"""

from __future__ import annotations


class ScoVistError(Exception):
    exit_code = 4


# -- configuration ---------------------------------------------------------


class ConfigError(ScoVistError, ValueError):
    exit_code = 2


# -- providers -------------------------------------------------------------


class ProviderError(ScoVistError):
    exit_code = 3


class NotFoundError(ProviderError, KeyError):
    def __str__(self) -> str:  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class TransportError(ProviderError):
    def __init__(self, message: str, attempts: int = 1, status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.status = status


class EmptyResponseError(ProviderError):
    pass


class UnknownRelationError(ProviderError, ValueError):
    pass


# -- data / invariants -----------------------------------------------------


class DataError(ScoVistError):
    exit_code = 4


class InvariantViolationError(DataError, ValueError):
    pass


class DuplicateNodeError(DataError):
    pass


class MissingEndpointError(DataError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DuplicateEdgeError(DataError):
    pass


class CycleError(InvariantViolationError):
    def __init__(self, cycle: list[str]):
        super().__init__("cycle detected: " + " -> ".join(cycle + cycle[:1]))
        self.cycle = cycle


class ParseError(DataError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class IndexGapError(InvariantViolationError):
    pass


class InvalidNodeError(InvariantViolationError):
    pass


class EmptyTextError(DataError, ValueError):
    """A caption, concept list, phrase or storyline that must not be empty was."""


class UnweightedGraphError(DataError):
    pass


class AlreadyAttachedError(DataError):
    pass


class UnreachableError(DataError):
    pass


class MissingStartError(DataError):
    pass


class DimensionError(DataError, ValueError):
    """Vector dimensions disagree (mismatch between two vectors, or a ragged table)."""


class ZeroVectorError(DataError, ValueError):
    pass


class EmptyIndexError(DataError):
    pass


class MissingEmbeddingError(DataError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class SeparatorInEventError(DataError, ValueError):
    pass


class StageError(ScoVistError):
    """Wraps a failure with the pipeline stage and sequence it happened in."""

    def __init__(self, stage: str, sequence_id: str, cause: BaseException):
        super().__init__(f"[{sequence_id}] stage '{stage}' failed: {cause}")
        self.stage = stage
        self.sequence_id = sequence_id
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 4)
