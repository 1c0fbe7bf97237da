"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class BillfateError(Exception):
    exit_code = 1


class ConfigError(BillfateError, ValueError):
    exit_code = 2


class CorpusParseError(BillfateError, ValueError):
    """Raised when a corpus or embedding file is malformed.

    ``problems`` holds one ``(line_number, message)`` pair per offending line.
    """

    exit_code = 3

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        lines = "\n".join(f"  {msg}, line {no}" for no, msg in self.problems)
        super().__init__(f"{self.path}: {len(self.problems)} bad line(s)\n{lines}")


class DataError(BillfateError, ValueError):
    """Input data violates an operation's precondition."""

    exit_code = 3


class NumericError(BillfateError, ArithmeticError):
    exit_code = 4


class IntegrityError(BillfateError):
    exit_code = 5


class StageError(BillfateError):
    """A pipeline stage failed; wraps the underlying error."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"stage '{stage}' failed: {cause}")
