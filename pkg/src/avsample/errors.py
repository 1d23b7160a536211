"""Exception hierarchy shared across the package."""


class AvsampleError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(AvsampleError):
    """An operation received zero points."""


class NonFiniteCoordinate(AvsampleError):
    def __init__(self, row: int):
        super().__init__(f"non-finite coordinate at point row {row}")
        self.row = row


class RaggedFeatures(AvsampleError):
    def __init__(self, row: int):
        super().__init__(f"feature row {row} has a different width than row 0")
        self.row = row


class KeySpaceOverflow(AvsampleError):
    """batch_count * axis voxel counts does not fit in 64-bit keys."""


class PointOutOfBounds(AvsampleError):
    def __init__(self, row: int):
        super().__init__(f"point row {row} lies outside the grid bounds")
        self.row = row


class SegmentIdOutOfRange(AvsampleError):
    def __init__(self, row: int):
        super().__init__(f"segment id at row {row} outside [0, segment_count)")
        self.row = row


class EvenNeighborSize(AvsampleError):
    """Neighborhood edge length must be an odd positive integer."""


class NonUniqueSampledVoxel(AvsampleError):
    """Two sampled points share the same voxel key."""


class TransformRowCountMismatch(AvsampleError):
    """A feature transform changed the number of rows."""


class MOutOfRange(AvsampleError):
    """Requested sample count outside [1, point count]."""


class KOutOfRange(AvsampleError):
    """Requested neighbor count outside [1, reference count]."""


class EmptyDataset(AvsampleError):
    """A dataset iterator yielded no frames."""


class EmptyLayer(AvsampleError):
    """A cascade layer produced zero points."""


class ParseError(AvsampleError):
    def __init__(self, line: int, message: str = "malformed line"):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyFile(AvsampleError):
    """A point cloud file contained no points."""


class UnsupportedFormat(AvsampleError):
    """File is not in the supported format subset."""


class InvalidSpec(AvsampleError):
    """Malformed synthetic dataset or manifest specification."""


class ScheduleMismatch(AvsampleError):
    """A schedule file does not match the manifest it is applied to."""
