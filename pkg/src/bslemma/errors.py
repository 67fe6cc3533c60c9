"""Exception hierarchy shared by every module."""


class BSLemmaError(Exception):
    """Base class; ``kind`` is the machine-readable tag the CLI prints."""

    kind = "error"


class ValidationError(BSLemmaError, ValueError):
    kind = "validation"


class InvalidPointError(ValidationError):
    kind = "invalid-point"


class MetricAxiomError(ValidationError):
    kind = "metric-axiom-violation"


class DuplicatePointError(ValidationError):
    kind = "duplicate-points"


class UndefinedRadiusError(ValidationError):
    kind = "undefined-radius"


class ModeMismatchError(ValidationError):
    kind = "mode-mismatch"


class InvalidMapError(ValidationError):
    kind = "invalid-map"


class ConfigError(ValidationError):
    kind = "config-parse"


class GenerationError(BSLemmaError):
    kind = "generation"


class DegenerateWitnessError(BSLemmaError):
    kind = "degenerate-witness"
