class MdamlError(Exception):
    exit_code = 1


class ConfigError(MdamlError):
    exit_code = 2


class DataError(MdamlError):
    exit_code = 3


class ParseError(DataError):
    pass


class NumericError(MdamlError):
    exit_code = 4


class IllConditionedError(NumericError):
    pass


class InitializationError(NumericError):
    pass


class InvariantViolationError(NumericError):
    pass


class LineSearchError(NumericError):
    pass


class DimensionError(MdamlError, ValueError):
    exit_code = 3


class ManifoldError(MdamlError, ValueError):
    exit_code = 4


class PreconditionError(MdamlError, ValueError):
    exit_code = 4


class AcceptanceError(MdamlError):
    exit_code = 5

    def __init__(self, message: str, seed: int | None = None) -> None:
        super().__init__(message)
        self.seed = seed
