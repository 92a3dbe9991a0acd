class ParameterError(ValueError):
    """A model, vital or actuarial parameter is outside its admissible set."""


class DomainError(ValueError):
    """A numerical operation left (or was asked to start outside) its valid region."""


class ConfigError(ValueError):
    """A scenario file is malformed; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)

    def __reduce__(self):
        return (ConfigError, (self.message, self.line))


class StageError(RuntimeError):
    """Wraps an error raised inside one stage of a scenario run."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")

    def __reduce__(self):
        return (StageError, (self.stage, self.cause))
