"""Exception hierarchy for the popa engine.

Parse errors carry the 1-based line number of the offending physical line.
"""


class PopaError(Exception):
    """Base class for all popa errors."""


# --- ingest ---------------------------------------------------------------

class ParseError(PopaError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MalformedRow(ParseError):
    """Wrong column count, non-integer cell, or malformed header line."""


class OutOfRange(ParseError):
    """A sensor reading outside 0..1023 or a negative timestamp."""


class NonMonotonicTimestamp(ParseError):
    """Timestamp not strictly greater than its predecessor."""


# --- synth ----------------------------------------------------------------

class InfeasibleRanges(PopaError):
    """Population spread parameters cannot produce in-range readings."""


# --- classify -------------------------------------------------------------

class EmptyCounts(PopaError):
    """Gini impurity of an empty count map is undefined."""


class KTooLarge(PopaError):
    """KNN k exceeds the number of training instances."""


class SingleClass(PopaError):
    """One-vs-one SVM needs at least two labels."""


class DimensionMismatch(PopaError):
    """Query vector length differs from the model's feature dimension."""


# --- eval -----------------------------------------------------------------

class ClassTooSmall(PopaError):
    def __init__(self, label: str, have: int, need: int):
        self.label = label
        super().__init__(f"class {label!r} has {have} instances, fold count {need} requires at least {need}")


class SubjectMismatch(PopaError):
    """Train and test maps do not cover the same subject set."""


# --- session --------------------------------------------------------------

class EmptyBackground(PopaError):
    """A session needs a nonempty background corpus to train against."""


class SessionTerminated(PopaError):
    """Frame fed to a de-authenticated session."""


class WindowVacant(PopaError):
    """Occupancy failed for more than half of the window's frames."""


# --- store ----------------------------------------------------------------

class StoreError(PopaError):
    pass


class IoFailure(StoreError):
    pass


class InvalidSubjectId(StoreError):
    pass


class VersionMismatch(StoreError):
    pass


class CorruptProfile(StoreError):
    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}: line {line_no}: {message}")


class DuplicateSubject(StoreError):
    pass


# --- cli ------------------------------------------------------------------

class TooShort(PopaError):
    """Recording too short for the requested enrollment length."""


class RefusingOverwrite(StoreError):
    """Profile already exists; pass --force to replace it."""
