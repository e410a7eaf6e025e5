class GrailError(Exception):
    """Base class for every error raised by the library."""


class GraphFormatError(GrailError):
    pass


class InvalidIdError(GrailError):
    pass


class SubgraphError(GrailError):
    pass


class ShapeError(GrailError):
    pass


class GradCheckError(GrailError):
    pass


class ConfigError(GrailError):
    pass


class TrainingError(GrailError):
    pass


class CheckpointError(GrailError):
    pass


class SamplingError(GrailError):
    pass


class EvaluationError(GrailError):
    pass


class FusionError(GrailError):
    pass


class RuleError(GrailError):
    pass
