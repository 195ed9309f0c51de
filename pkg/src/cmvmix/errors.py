"""Exception hierarchy shared by all cmvmix modules."""


class CmvmixError(Exception):
    """Base class for all cmvmix errors."""


class DimensionMismatch(CmvmixError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(CmvmixError):
    """A scale matrix failed the positive-definiteness check."""


class DegenerateCluster(CmvmixError):
    """A mixture component collapsed below the minimum effective mass."""


class AllStartsFailed(CmvmixError):
    """Every multi-start chain aborted before convergence."""


class LengthMismatch(CmvmixError):
    """Two label vectors differ in length."""


class KindMismatch(CmvmixError):
    """An operation requires a different model kind (MVN vs CMVN)."""


class ParseError(CmvmixError):
    """A file could not be parsed; message carries line/field context."""


class ShapeError(CmvmixError):
    """A three-way file is structurally invalid (missing/duplicate cells)."""


class SchemaError(CmvmixError):
    """A persisted document has an unsupported schema version."""
