"""Exception hierarchy shared across the package."""


class WorldtalkError(Exception):
    """Base class for all errors raised by this package."""


class ChurchParseError(WorldtalkError):
    """Malformed source text. Carries the 1-based line/column of the offense."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ChurchEvalError(WorldtalkError):
    """Runtime failure while evaluating a program.

    ``span`` is the (start, end) source span of the offending expression when
    known, so callers can point back at the original text.
    """

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class UnboundSymbolError(ChurchEvalError):
    def __init__(self, name, span=None):
        super().__init__(f"unbound symbol: {name}", span)
        self.name = name


class ArityError(ChurchEvalError):
    pass


class NotApplicableError(ChurchEvalError):
    """Attempted to call a value that is not a function."""


class RecursionBudgetError(ChurchEvalError):
    """The per-world application depth cap was exceeded."""


class ZeroAcceptanceError(WorldtalkError):
    """No sampled world satisfied every condition within the attempt budget.

    Distinguishes contradictory (or far-too-improbable) evidence from a
    posterior probability that merely happens to be near zero.
    """

    def __init__(self, attempts, first_failure_counts, suspect_continuous_equality=False):
        detail = ", ".join(
            f"condition {i}: {count}" for i, count in enumerate(first_failure_counts)
        )
        message = f"no accepted worlds in {attempts} attempts (first failures by condition: {detail or 'none'})"
        if suspect_continuous_equality:
            message += "; a condition tests numeric equality on a stochastic value, which has acceptance probability zero"
        super().__init__(message)
        self.attempts = attempts
        self.first_failure_counts = list(first_failure_counts)
        self.suspect_continuous_equality = suspect_continuous_equality


class NoValidCandidateError(WorldtalkError):
    """Every translation candidate failed validation."""

    def __init__(self, utterance_text, reasons):
        lines = "; ".join(f"[{i}] {r}" for i, r in enumerate(reasons))
        super().__init__(f"no valid translation for {utterance_text!r}: {lines}")
        self.reasons = list(reasons)


class BackendError(WorldtalkError):
    """Transport or authentication failure talking to a completion backend."""


class TranscriptError(WorldtalkError):
    """A persisted transcript could not be read back."""
