# -*- coding: utf-8 -*-
"""
Error types raised by densecov.

Errors deriving from `ValueError` describe bad inputs (configs, files, contracts) and map to CLI exit code 2.
Errors deriving from `ArithmeticError` describe numerical failures at runtime and map to exit code 3.
"""
from typing import Optional


class ConfigError(ValueError):
    def __init__(self, message: str, pointer: str = ''):
        self.pointer = pointer
        super().__init__(f'{pointer or "/"}: {message}')


class GridParseError(ValueError):
    def __init__(self, message: str, row: int, column: Optional[int] = None):
        self.row = row
        self.column = column
        location = f'line {row}' if column is None else f'line {row}, column {column}'
        super().__init__(f'{location}: {message}')


class DomainError(ValueError):
    pass


class ContractViolation(ValueError):
    pass


class TransportSizeError(ValueError):
    pass


class NoDataError(ValueError):
    pass


class DegenerateDensityError(ArithmeticError):
    pass


class InsufficientMassError(ArithmeticError):
    pass


class BookkeepingError(ArithmeticError):
    pass


class ConditioningError(ArithmeticError):
    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f'{message} (condition number estimate {condition:.3e})')
