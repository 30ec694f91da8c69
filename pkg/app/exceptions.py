"""
Exception hierarchy for the encounter analysis pipeline
"""
from pathlib import Path
from typing import Optional, Union


class EncounterAnalysisError(Exception):
    """Base class for all pipeline errors"""

    exit_code = 1


class DataError(EncounterAnalysisError):
    """Input data is malformed or violates a precondition"""

    exit_code = 1

    def __init__(
        self,
        message: str,
        path: Optional[Union[str, Path]] = None,
        line: Optional[int] = None,
    ):
        self.message = message
        self.path = str(path) if path is not None else None
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path and self.line is not None:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


class DomainError(DataError, ValueError):
    """Argument outside the domain of a model (e.g. non-negative RSSI)"""


class ConfigError(EncounterAnalysisError):
    """Configuration is invalid or references missing files"""

    exit_code = 2
