"""Semantic exception hierarchy shared by all dpsampler modules."""


class DPSamplerError(Exception):
    """Base error for the dpsampler package."""


class ValidationError(DPSamplerError, ValueError):
    """Inputs violate a documented contract."""


# --- distribution / dataset validation ---------------------------------------

class NegativeMass(ValidationError):
    """A probability vector contains a negative entry."""


class NotNormalized(ValidationError):
    """A probability vector does not sum to 1 within tolerance."""


class DomainTooSmall(ValidationError):
    """Finite domain size k must be at least 2."""


class DomainMismatch(ValidationError):
    """Two finite distributions live on different domains."""


class DimensionMismatch(ValidationError):
    """Vectors or datasets have inconsistent dimensions."""


class EmptyDataset(ValidationError):
    """A dataset must contain at least one record."""


class OutOfDomain(ValidationError):
    """A domain element is outside [1..k]."""


# --- parameter validation -----------------------------------------------------

class InvalidOrder(ValidationError):
    """Divergence order outside its valid range."""


class InvalidAlpha(ValidationError):
    """Error tolerance alpha outside (0, 1)."""


class NonIntegerShape(ValidationError):
    """The union-bound Gamma tail bound requires an integer shape."""


class NormViolation(ValidationError):
    """An input vector exceeds the promised norm bound."""


class BadSplit(ValidationError):
    """Dataset row count does not match the declared n1 + 2*n2 split."""


# --- sampler preconditions ----------------------------------------------------

class InsufficientSamples(DPSamplerError):
    """Too few input samples for the mechanism's parameters to be defined."""


class InsufficientData(DPSamplerError):
    """Dataset too small for the requested number of sampler invocations."""


class TooManyOutputs(DPSamplerError):
    """Requested m outputs exceeds the n available randomized inputs."""


class TooFewSamples(DPSamplerError):
    """Sampler requires more input rows for its noise calibration."""


class PrecisionLimit(DPSamplerError):
    """Per-output tolerance alpha/m fell below the supported floor."""


# --- audit / orchestration ----------------------------------------------------

class EnumerationTooLarge(DPSamplerError):
    """Exhaustive audit would exceed the enumeration budget."""


class ConfigInvalid(DPSamplerError):
    """Experiment configuration is malformed or incomplete."""
