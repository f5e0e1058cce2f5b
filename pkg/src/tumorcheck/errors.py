"""Exception types raised across the toolkit."""


class TumorcheckError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(TumorcheckError, ValueError):
    pass


# image decoding

class ImageFormatError(TumorcheckError, ValueError):
    pass


class MalformedHeader(ImageFormatError):
    pass


class TruncatedData(ImageFormatError):
    pass


class UnsupportedMaxval(ImageFormatError):
    pass


# segmentation

class DegenerateInput(TumorcheckError, ValueError):
    pass


class IndexOutOfRange(TumorcheckError, IndexError):
    pass


# formulas

class ParseError(TumorcheckError, ValueError):
    """Syntax error with a 1-based line/column position.

    ``offset`` is the 0-based character offset into the source and is always
    in ``[0, len(source)]``.
    """

    def __init__(self, message, line=1, column=1, offset=0, expected=None, found=None):
        self.line = line
        self.column = column
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"{line}:{column}: {message}")


class UnknownIdentifier(ParseError):
    pass


class OutOfRangeLiteral(ParseError):
    pass


class EvalError(TumorcheckError):
    pass


class UnboundAtom(EvalError):
    pass


class MalformedFormula(EvalError, ValueError):
    pass


# features / classifier

class EmptyRegion(TumorcheckError, ValueError):
    pass


class EmptyTrainingSet(TumorcheckError, ValueError):
    pass


class LengthMismatch(TumorcheckError, ValueError):
    pass


class TrainingFormatError(TumorcheckError, ValueError):
    pass


class BadHeader(TrainingFormatError):
    pass


class BadLabel(TrainingFormatError):
    pass


class RaggedRow(TrainingFormatError):
    pass


# metrics

class UndefinedMetric(TumorcheckError, ArithmeticError):
    pass


class EmptyInput(TumorcheckError, ValueError):
    pass


# dataset / pipeline

class MissingSubdirectory(TumorcheckError, FileNotFoundError):
    pass


class EmptyDataset(TumorcheckError, ValueError):
    pass


class StageError(TumorcheckError):
    """Wraps any failure inside a pipeline stage, keeping the stage name."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
