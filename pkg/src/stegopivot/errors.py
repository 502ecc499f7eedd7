"""Exception hierarchy shared across the package."""


class StegoPivotError(Exception):
    """Base class for all package errors."""


# --- tokenizer ---

class EmptyCorpus(StegoPivotError):
    pass


class UnrepresentableInput(StegoPivotError):
    pass


class UnknownTokenId(StegoPivotError):
    pass


# --- synonyms ---

class ParseError(StegoPivotError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyFile(StegoPivotError):
    pass


# --- bins ---

class BinUnderfilled(StegoPivotError):
    pass


class MissingEos(StegoPivotError):
    pass


class InvariantViolation(StegoPivotError):
    def __init__(self, which):
        super().__init__(which)
        self.which = which


# --- lm ---

class ProviderUnavailable(StegoPivotError):
    pass


class ContextTooLong(StegoPivotError):
    pass


class EmptyBin(StegoPivotError):
    pass


# --- codec ---

class PayloadTooLarge(StegoPivotError):
    pass


class RoundTripUnsafe(StegoPivotError):
    pass


class ParamMismatch(StegoPivotError):
    pass


class TruncatedPayload(StegoPivotError):
    pass


class MissingLength(StegoPivotError):
    pass


class BadHeader(StegoPivotError):
    pass


# --- metrics ---

class EmptyCover(StegoPivotError):
    pass


class EmptyInput(StegoPivotError):
    pass


class ZeroProbabilityToken(StegoPivotError):
    pass
