"""Exception types shared across the package."""


class FlowpinnError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FlowpinnError):
    """Invalid configuration: bad widths, regimes, schedules, or option values."""


class NonFiniteLossError(FlowpinnError):
    """A loss value was NaN or infinite; gradients would be meaningless."""


class NonFiniteGradientError(FlowpinnError):
    """A gradient contained NaN or infinite entries; the optimizer step is aborted."""


class DegenerateGradientError(FlowpinnError):
    """Gradient statistics are degenerate (zero mean magnitude); weight left unchanged."""


class UndefinedMetricError(FlowpinnError):
    """A metric is undefined for the given inputs (e.g. zero-norm ground truth)."""


class DataFormatError(FlowpinnError):
    """Malformed dataset file: bad header, unparseable or non-finite values."""
