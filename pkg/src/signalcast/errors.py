"""Exception hierarchy.

Two broad families matter to callers: ValidationError for bad inputs,
files, or configuration (CLI exit code 1) and NumericError for failures
inside an estimation or test (CLI exit code 2). Everything raised by this
package derives from SignalcastError.
"""


class SignalcastError(Exception):
    """Base class for all errors raised by signalcast."""


class ValidationError(SignalcastError):
    """Input, file, or configuration problem; the computation never started."""


class MissingColumnError(ValidationError):
    """A required CSV column is absent from the header."""


class EmptyCorpusError(ValidationError):
    """No usable documents remain."""


class EmptyDocError(ValidationError):
    """The document has no tokens at all."""


class OutOfVocabularyError(ValidationError):
    """The document has tokens, but none survive the model vocabulary."""


class MissingLabelError(ValidationError):
    """A sentiment provider has no label for the requested record."""


class NumericError(SignalcastError):
    """A numeric procedure failed on otherwise well-formed input."""


class SingularMatrixError(NumericError):
    """Regressor matrix is (numerically) singular; carries context in the message."""


class ZeroVarianceError(NumericError):
    """A series is constant where variation is required."""


class NonStationaryError(NumericError):
    """Differencing up to the cap never produced a stationary series."""

    def __init__(self, message, adf_result=None):
        super().__init__(message)
        self.adf_result = adf_result


class EstimationError(NumericError):
    """Model estimation failed (no candidate converged, all grid cells failed, ...)."""
