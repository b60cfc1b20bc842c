"""Exception hierarchy shared by every module."""


class JointInquiryError(Exception):
    """Base class for all package errors."""


class ValidationError(JointInquiryError, ValueError):
    """An input violates a documented invariant."""


class UndefinedRelevanceError(JointInquiryError, ValueError):
    """Relevance requested against a distribution with zero entropy."""


class ContradictionError(JointInquiryError, RuntimeError):
    """An observation has zero likelihood under every hypothesis.

    ``round_index`` is filled in by the episode runner when the failure
    happens inside an episode.
    """

    def __init__(self, message, round_index=None):
        super().__init__(message)
        self.round_index = round_index

    def __str__(self):
        msg = super().__str__()
        if self.round_index is not None:
            return f"round {self.round_index}: {msg}"
        return msg


class ConfigError(JointInquiryError, ValueError):
    """Configuration document could not be parsed or validated."""
