"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class DaycourseError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(DaycourseError):
    """A configuration value or referenced input file is unusable."""


class FetchError(DaycourseError):
    """Snapshot retrieval failed after the configured number of attempts."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (attempts: {attempts})")
        self.attempts = attempts


class NotAnnotatable(DaycourseError):
    """The post carries no day marker usable for annotation."""


class LexiconFormatError(DaycourseError):
    """A lexicon line could not be parsed."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.line_no = line_no


class EmptyCorpusError(DaycourseError):
    """No documents survived annotation and token filtering."""


class EmptyGraphError(DaycourseError):
    """The document-word graph has no edges, so nothing can be inferred."""


class InconsistentStateError(DaycourseError):
    """A block state does not describe the graph it is paired with."""


class PipelineStageError(DaycourseError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
