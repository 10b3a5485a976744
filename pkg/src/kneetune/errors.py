"""Exception hierarchy shared by the simulator, evaluator, optimizer and CLI."""


class KneetuneError(Exception):
    """Base class for all package errors."""


class ConfigError(KneetuneError, ValueError):
    """Invalid or malformed configuration. ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        self.reason = message
        super().__init__(f"{path}: {message}" if path else message)


class NonFiniteState(KneetuneError, FloatingPointError):
    """The integrated state became NaN or infinite."""

    def __init__(self, t_last_good, message="simulation diverged"):
        self.t_last_good = t_last_good
        super().__init__(f"{message} (last finite state at t={t_last_good:.6g} s)")


class EmptyLog(KneetuneError, ValueError):
    pass


class WindowError(KneetuneError, ValueError):
    """A trajectory does not cover the time window a constraint needs."""


# kept as an alias: the evaluation API speaks of short logs, the CLI of windows
LogTooShort = WindowError


class ParseError(KneetuneError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EvaluatorFailure(KneetuneError, RuntimeError):
    """Raised by the optimizer when the objective raises for some particle."""

    def __init__(self, particle, generation, cause):
        self.particle = particle
        self.generation = generation
        super().__init__(
            f"evaluator failed for particle {particle} at generation {generation}: {cause!r}"
        )
