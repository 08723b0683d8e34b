"""Exception hierarchy shared by all uespace modules."""


class UespaceError(Exception):
    """Base class for every error raised by this package."""


# ---- linear algebra ----

class ShapeMismatchError(UespaceError):
    """Operands are not conformable."""


class NotSquareError(UespaceError):
    pass


class NotSymmetricError(UespaceError):
    pass


class RankDeficientError(UespaceError):
    """Cholesky pivot fell below tolerance and jitter was forbidden or exhausted."""


class NoConvergenceError(UespaceError):
    """Jacobi sweep cap reached before the off-diagonal norm dropped below tolerance."""


class RankOutOfRangeError(UespaceError):
    pass


class NegativeEigenvalueError(UespaceError):
    """A requested root includes an eigenvalue that is negative beyond noise level."""


# ---- embeddings and projectors ----

class DimMismatchError(UespaceError):
    pass


class ZeroVectorError(UespaceError):
    """Cosine similarity is undefined for (near-)zero vectors."""


class ClassSetMismatchError(UespaceError):
    """The two heads were not trained on the same classes in the same order."""


class BothWeightsZeroError(UespaceError):
    pass


# ---- routing and scoring ----

class NonPositiveDurationError(UespaceError):
    pass


class MissingEmbeddingError(UespaceError):
    """The utterance has no embedding for the encoder the router selected."""


class EncoderNotInFusionError(UespaceError):
    pass


class UnknownUtteranceIdError(UespaceError):
    pass


class InconsistentDurationError(UespaceError):
    """The same utterance id reports different durations in different archives."""


# ---- metrics ----

class EmptyInputError(UespaceError):
    pass


class SingleClassOnlyError(UespaceError):
    """Need at least one target and one nontarget trial."""


class InvalidParamsError(UespaceError):
    pass


# ---- synthesis ----

class InvalidConfigError(UespaceError):
    pass


# ---- storage ----

class StorageError(UespaceError):
    """Base class for file format errors."""


class BadMagicError(StorageError):
    pass


class UnsupportedVersionError(StorageError):
    pass


class TruncatedFileError(StorageError):
    pass


class MalformedLineError(StorageError):
    """Bad text line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MalformedRecordError(StorageError):
    """Binary record violates a field constraint (reported with its offset)."""


class DuplicateUtteranceIdError(StorageError):
    pass


class InconsistentDimError(StorageError):
    pass
