"""Exception types shared across the toolkit."""


class SparseQAError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(SparseQAError):
    """Malformed or inconsistent input data (bad record, duplicate id, ...)."""


class ConfigError(SparseQAError):
    """Invalid configuration or command usage."""


class StageError(SparseQAError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
