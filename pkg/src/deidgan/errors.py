"""Error types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called outside its documented preconditions."""


class ImageFormatError(ValueError):
    """Malformed netpbm data; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class CheckpointError(RuntimeError):
    """A checkpoint is missing, truncated, or inconsistent with its manifest."""


class NoResultError(RuntimeError):
    """A search finished without a single successful trial."""
