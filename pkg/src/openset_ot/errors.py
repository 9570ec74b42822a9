"""Exception hierarchy. Every error carries a short machine-readable category."""


class OpenSetOTError(Exception):
    category = "error"


class InvalidInputError(OpenSetOTError, ValueError):
    category = "invalid-input"


class InvalidParameterError(OpenSetOTError, ValueError):
    category = "invalid-parameter"


class ParseError(InvalidInputError):
    category = "parse-error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalFailureError(OpenSetOTError, FloatingPointError):
    category = "numerical-failure"

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class EmptySurvivorSetError(OpenSetOTError):
    category = "empty-survivor-set"


class IOFailureError(OpenSetOTError, OSError):
    category = "io-error"
