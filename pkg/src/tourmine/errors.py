"""Exception types shared across the pipeline."""


class TourmineError(Exception):
    """Base class for all package errors."""


class DataError(TourmineError):
    """Input data is unusable (unreadable, corrupt, or violates a contract)."""


class CorruptDatasetError(DataError):
    """Too large a fraction of input records failed to parse."""


class StageError(TourmineError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
