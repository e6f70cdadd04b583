"""Exception types shared across the package."""


class PllabError(Exception):
    """Base class for package-specific failures."""


class EvaluationError(PllabError):
    """An objective or gradient evaluation produced a non-finite result."""


class EstimationError(PllabError):
    """A sampling-based estimator had no usable samples."""


class ConfigurationError(PllabError):
    """A solver or experiment was configured inconsistently."""


class DomainError(PllabError):
    """A quantity was requested at a point outside its domain."""


class SpecError(PllabError):
    """An experiment spec failed to parse or referenced unknown tags."""
