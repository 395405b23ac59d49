"""Exception hierarchy shared by every module in the package."""


class GlottalEmotionError(Exception):
    """Base class; ``code`` is a short machine-readable tag."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DegenerateInputError(GlottalEmotionError, ValueError):
    code = "degenerate_input"


class EmptyResultError(GlottalEmotionError, ValueError):
    code = "empty_result"


class StabilityError(GlottalEmotionError, ValueError):
    code = "unstable_filter"


class ParameterError(GlottalEmotionError, ValueError):
    code = "invalid_parameter"


class ConfigError(GlottalEmotionError, ValueError):
    code = "config"
