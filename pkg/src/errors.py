"""
Error types for the directional diffusion toolkit.

Every failure the library raises on purpose derives from DDMError so the CLI
can map it to an exit code. Subclasses also inherit from the closest builtin
(ValueError, OSError, ArithmeticError) so plain callers can catch those.
"""

from typing import Optional


class DDMError(Exception):
    """Base class for all toolkit errors"""


class DimensionError(DDMError, ValueError):
    """Matrix shapes do not line up"""


class ContractError(DDMError, ValueError):
    """A documented precondition was violated"""


class UsageError(DDMError, ValueError):
    """Bad command-line or configuration input"""


class CheckpointError(DDMError):
    """A binary archive is corrupt, truncated or does not match expectations"""


class DatasetIOError(DDMError, OSError):
    """A dataset file is missing or unreadable"""


class SchemaError(DDMError, ValueError):
    """Dataset file content violates the directory schema"""

    def __init__(self, message: str, file_name: Optional[str] = None, line: Optional[int] = None):
        self.file_name = file_name
        self.line = line
        location = ""
        if file_name is not None:
            location = f"{file_name}:{line}: " if line is not None else f"{file_name}: "
        super().__init__(f"{location}{message}")


class NumericError(DDMError, ArithmeticError):
    """A computation produced NaN or Inf"""
