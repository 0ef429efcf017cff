"""Exception and warning types shared across the pipeline.

The CLI maps these onto process exit codes: usage errors (including
``InvalidParamsError``) exit 1, ``DataError`` subclasses exit 2, and
``NumericalError`` exits 3.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParamsError(PipelineError, ValueError):
    """A caller-supplied parameter violates an operation's contract."""


class DataError(PipelineError):
    """Input data cannot be processed (malformed, missing, inconsistent)."""


class NumericalError(PipelineError):
    """A numerical routine failed (e.g. SVD non-convergence)."""


# --- pose ingestion ---------------------------------------------------------

class MalformedDocumentError(DataError):
    """Keypoint document is not parseable or has the wrong array length."""


class NoPersonDetectedError(DataError):
    """Keypoint document contains an empty ``people`` array."""


class EmptyClipError(DataError):
    """Clip directory holds no usable keypoint frames."""


class GapTooLargeError(DataError):
    """More consecutive person-missing frames than the configured limit."""


# --- series preparation -----------------------------------------------------

class TooShortError(DataError):
    """Series segment is too short for the requested operation."""


class NoRepetitionsFoundError(DataError):
    """Peak detection found no repetition cycles in the anchor signal."""


class DegenerateDatasetError(DataError):
    """Dataset lacks the class diversity the operation requires."""


# --- classification and evaluation ------------------------------------------

class ShapeMismatchError(DataError):
    """Array shape is incompatible with the fitted transform or model."""


class EmptyDatasetError(DataError):
    """Operation requires at least one sample."""


class TooFewSamplesError(DataError):
    """Operation requires more samples than were provided."""


class DegenerateLabelsError(DataError):
    """Labels contain fewer than two classes."""


class TooFewParticipantsError(DataError):
    """Grouped splitting requires at least two participants."""


class LengthMismatchError(DataError):
    """Paired sequences have different lengths."""


class FileFormatError(DataError):
    """Dataset or model file has bad magic bytes, version, or payload."""


# --- warnings ----------------------------------------------------------------

class MultiplePeopleWarning(UserWarning):
    """More than one person detected in a frame; the first one was used."""


class RepCountMismatchWarning(UserWarning):
    """Segmentation found a different repetition count than expected."""
