# core/exceptions.py
from typing import Optional


class CodedElasticError(Exception):
    """Base class for every error raised by the coded elastic computing core."""


class InvalidParameterError(CodedElasticError, ValueError):
    pass


class ConfigError(CodedElasticError):
    pass


class NoDataError(CodedElasticError):
    pass


class UnrecoverableTrialError(CodedElasticError):
    """
    The active workers can never complete enough subtasks.
    set_index is the 1-based deficient set (CEC/MLCEC), None for the
    global BICEC threshold.
    """

    def __init__(self, message: str, *, scheme: str = "", set_index: Optional[int] = None):
        super().__init__(message)
        self.scheme = scheme
        self.set_index = set_index


class IllConditionedWarning(RuntimeWarning):
    pass
