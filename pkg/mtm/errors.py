"""
Иерархия доменных ошибок лаборатории
"""


class MTMError(Exception):
    """Базовая ошибка всех численных модулей"""


class ParameterError(MTMError, ValueError):
    """Недопустимые параметры (γ вне (0, π), λ = 0, δ ≤ 0, неверная сетка)"""


class GridMismatchError(MTMError, ValueError):
    """Операнды заданы на разных сетках"""


class DegenerateVectorError(MTMError, ValueError):
    """Вектор Лакса обращается в ноль в узле сетки"""


class DegenerateExponentError(MTMError, ValueError):
    """λ² вещественно: у свободной системы нет рецессивных направлений"""


class JostIntegrationError(MTMError, RuntimeError):
    """Интегрирование решений Йоста переполнилось или не сошлось"""


class NoEigenvalueFound(MTMError, RuntimeError):
    """Поиск корня функции Эванса не сошелся"""


class OrthogonalityError(MTMError, ValueError):
    """Нарушено условие разрешимости ⟨η, f⟩ = 0"""


class StepError(MTMError, RuntimeError):
    """Неподвижная точка неявной средней точки не сошлась"""


class ConsistencyError(MTMError, RuntimeError):
    """Две независимые оценки одной величины разошлись"""
