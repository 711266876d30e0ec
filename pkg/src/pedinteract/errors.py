"""Exception hierarchy shared by all pipeline stages."""


class PipelineError(Exception):
    """Base class for every error raised by pedinteract."""


class InvalidInputError(PipelineError, ValueError):
    pass


class PreconditionError(PipelineError, ValueError):
    pass


class DegenerateTrajectoryError(PipelineError, ValueError):
    """Trajectory has no usable extent (identical positions, zero duration)."""


class OutOfRangeError(PipelineError, ValueError):
    """Query time lies outside a trajectory's span; no extrapolation is done."""


class NoOverlapError(PipelineError, ValueError):
    pass


class NoJunctionError(PipelineError, LookupError):
    pass


class GraphParseError(PipelineError, ValueError):
    pass


class DanglingReferenceError(GraphParseError):
    pass


class MissionParseError(PipelineError, ValueError):
    pass


class MissingOdometryError(PipelineError, LookupError):
    pass


class InsufficientDataError(PipelineError, ValueError):
    pass


class InvalidKError(PipelineError, ValueError):
    pass


class InsufficientClustersError(PipelineError, ValueError):
    pass
