"""Exception taxonomy shared across the package.

Each class maps to a distinct process exit code in the CLI; see cli.py
for the mapping.
"""


class ClinFusionError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ClinFusionError, ValueError):
    """Invalid configuration value or inconsistent config file."""


class VocabularyError(ClinFusionError, ValueError):
    """Category name or vocabulary structure not matching the schema."""


class DimensionError(ClinFusionError, ValueError):
    """Array shapes that do not conform to an operation's contract."""


class DataFormatError(ClinFusionError, ValueError):
    """Malformed dataset or config file content (carries a line number
    where applicable)."""


class NumericError(ClinFusionError, ArithmeticError):
    """Non-finite value encountered where a finite one is required."""


class DegenerateInputError(ClinFusionError, ValueError):
    """Metric input that admits no meaningful answer (e.g. single-class
    labels for a ROC curve)."""


class PersistenceError(ClinFusionError, RuntimeError):
    """Model file that cannot be read back: wrong magic, unsupported
    version, truncation, or corruption."""


class VariantMismatchError(PersistenceError):
    """Model file holds a different fusion variant than expected."""
