class CatCMCException(Exception):
    """Base class of every error raised by catcmc.

    The class attribute `exit_code` is what the command line returns when the
    error escapes a command.
    """

    exit_code: int = 1

    def to_record(self) -> dict:
        return {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ConfigError(CatCMCException):
    exit_code = 2


class DomainError(CatCMCException):
    pass


class NoConvergenceError(CatCMCException):
    exit_code = 3


class DegenerateImmersionError(CatCMCException):
    exit_code = 4


class NearSingularError(CatCMCException):
    exit_code = 5


class SingularSystemError(CatCMCException):
    pass


class ModeContentError(CatCMCException):
    pass


class InterpolationRangeError(CatCMCException):
    pass


class RootFindError(CatCMCException):
    pass
