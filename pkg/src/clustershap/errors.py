"""Domain error types shared across the package.

Every error raised by the pipeline derives from ClusterShapError so callers
(CLI, HTTP service) can map them to exit codes / status codes by name.
"""


class ClusterShapError(Exception):
    """Base class for all domain errors."""


# --- dataset ingestion ---

class MissingFile(ClusterShapError):
    pass


class ParseError(ClusterShapError):
    """A cell or row could not be parsed; carries 1-based file line and column."""

    def __init__(self, row: int, col: int, message: str = ""):
        self.row = row
        self.col = col
        super().__init__(message or f"parse error at line {row}, column {col}")


class NonNumericCell(ParseError):
    """A feature cell is not a finite real number."""


class DuplicateFeatureName(ClusterShapError):
    pass


class EmptyDataset(ClusterShapError):
    pass


# --- embedding ---

class RowCountMismatch(ClusterShapError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} rows, got {got}")


class DegenerateData(UserWarning):
    """Warning: input has rank < 2; second embedding axis is all zeros."""


# --- annotation ---

class MissingLabels(ClusterShapError):
    pass


class MissingPolygons(ClusterShapError):
    pass


class BadK(ClusterShapError):
    pass


class NonContiguousClusterIds(ClusterShapError):
    pass


class DegeneratePolygon(ClusterShapError):
    pass


# --- cluster model ---

class TooFewClusters(ClusterShapError):
    pass


class DimensionMismatch(ClusterShapError):
    pass


# --- shapley engine ---

class ClusterTooSmall(ClusterShapError):
    pass


class BoundaryCoalition(ClusterShapError):
    pass


class BadBudget(ClusterShapError):
    pass


class TooManyFeatures(ClusterShapError):
    pass


class SingularSystem(ClusterShapError):
    """Reduced normal matrix is numerically singular; retry with a larger budget."""


# --- summaries ---

class BadCluster(ClusterShapError):
    pass


class EmptyCluster(ClusterShapError):
    pass


class MalformedDendrogram(ClusterShapError):
    pass


# --- persistence ---

class SchemaVersionMismatch(ClusterShapError):
    pass


class InvariantViolation(ClusterShapError):
    def __init__(self, name: str, message: str = ""):
        self.name = name
        super().__init__(message or f"invariant violated: {name}")


class IoError(ClusterShapError):
    pass
