"""Exception hierarchy shared by all autoer modules."""


class AutoERError(Exception):
    """Base class for all autoer errors."""


class ParseError(AutoERError):
    """A dataset or ground-truth file could not be parsed."""


class DuplicateIdError(AutoERError):
    """An entity id appears more than once within one collection."""


class MissingIdColumnError(AutoERError):
    """The configured id column is absent from a record."""


class UnresolvedIdError(AutoERError):
    """A ground-truth id does not resolve to any entity."""


class UnknownEmbedderError(AutoERError):
    """A requested embedder name is not registered."""


class MissingVectorError(AutoERError):
    """An external embedding file lacks a vector for a requested id."""


class DimensionMismatchError(AutoERError):
    """Vector dimensionalities disagree."""


class EmptyCollectionError(AutoERError):
    """An operation requires a non-empty entity collection."""


class EmptyGroundTruthError(AutoERError):
    """Evaluation requires a non-empty ground truth."""


class DegenerateDataError(AutoERError):
    """Training data cannot support the requested operation."""
