"""Иерархия ошибок sl2forms.

Все ошибки наследуются от ValueError: CLI ловит их единым обработчиком и
возвращает код 2. Провал проверки ошибкой не является, он оформляется отчетом.
"""

from __future__ import annotations


class Sl2FormsError(ValueError):
    """Базовая ошибка пакета."""


# field
class ZeroInverse(Sl2FormsError):
    pass


class BadModulus(Sl2FormsError):
    pass


class BudgetExceeded(Sl2FormsError):
    pass


# symbolic
class VarMismatch(Sl2FormsError):
    pass


class UnboundVariable(Sl2FormsError):
    pass


class CharMismatch(Sl2FormsError):
    pass


class DegreeTooLarge(Sl2FormsError):
    pass


class ParseError(Sl2FormsError):
    pass


# linalg
class NotSquare(Sl2FormsError):
    pass


class RingMismatch(Sl2FormsError):
    pass


class NotUnimodular(Sl2FormsError):
    pass


class SingularMatrix(Sl2FormsError):
    pass


# catalog
class BadParams(Sl2FormsError):
    pass


class BadCharacteristic(Sl2FormsError):
    pass


class UnknownForm(Sl2FormsError):
    pass


class UnknownLemma(Sl2FormsError):
    pass


# extend
class AmbiguousSolution(Sl2FormsError):
    pass


class DegreeBoundTooSmall(Sl2FormsError):
    pass


class InterpolationFailed(Sl2FormsError):
    pass


# analyze
class FieldTooSmall(Sl2FormsError):
    pass


class NoMatch(Sl2FormsError):
    pass


class AmbiguousMatch(Sl2FormsError):
    pass


class SearchBudgetExceeded(Sl2FormsError):
    pass


class UnidentifiedSummand(Sl2FormsError):
    pass


# cli
class ConfigError(Sl2FormsError):
    pass
