"""
Exception hierarchy for classrbm.

Shape and range violations subclass ``ValueError`` so callers that only know
about the builtin still catch them.
"""

from typing import List, Optional


class ClassRBMError(Exception):
    """Base class for every error raised by classrbm."""


class DimensionMismatchError(ClassRBMError, ValueError):
    """Arrays handed to an operation disagree with the model dimensions."""


class InvalidLabelError(ClassRBMError, ValueError):
    """A class label falls outside 1..K."""


class InvalidInputError(ClassRBMError, ValueError):
    """An input vector is not binary or an input number is out of range."""


class EnumerationTooLargeError(ClassRBMError):
    """The brute-force oracle was asked to enumerate beyond its guard."""


class ConfigError(ClassRBMError, ValueError):
    """A configuration file or value is malformed."""


class DataError(ClassRBMError):
    """Input data could not be read or does not match the schema."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        return f"{base}: " + "; ".join(self.diagnostics)


class SchemaError(DataError):
    """A categorical schema file is malformed."""


class NumericalFailureError(ClassRBMError, FloatingPointError):
    """Parameters became non-finite."""
