"""Exception types shared across the package."""


class ArtifreeError(Exception):
    """Base class for all library errors."""


class FormatError(ArtifreeError):
    """Malformed or truncated file contents."""


class UnsupportedFormatError(ArtifreeError):
    """Well-formed file using an encoding we do not handle."""


class SizeError(ArtifreeError):
    """Input too short or empty for the requested operation."""


class DegenerateSignalError(ArtifreeError):
    """Signal with zero power where power is required."""


class IncompatibleError(ArtifreeError):
    """Operands with mismatched rates, shapes, or dimensions."""


class EnsembleSizeError(ArtifreeError):
    """Fewer ensemble members than the operation needs."""


class CalibrationError(ArtifreeError):
    """Threshold calibration impossible (for example single-class input)."""


class SelectionError(ArtifreeError):
    """No candidate with a defined selection score."""


class ManifestError(ArtifreeError):
    """Structurally invalid manifest."""
