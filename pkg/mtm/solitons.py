"""
Семейство солитонов в явном виде, свободные векторы Лакса,
собственные векторы солитона и преобразование Лоренца
"""
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from mtm.errors import ParameterError
from mtm.fields import Grid, LaxVector, SpinorField

# Вычислитель (x, t) -> (u, v) для решений в явном виде
Evaluator = Callable[[NDArray, Union[float, NDArray]], Tuple[NDArray, NDArray]]


@dataclass(frozen=True)
class SpectralParameter:
    """Спектральный параметр λ = δ e^{iγ/2} и производные величины"""

    lam: complex

    def __post_init__(self):
        lam = complex(self.lam)
        if lam == 0 or not np.isfinite(lam):
            raise ParameterError(f"λ должно быть конечным и ненулевым, получено {self.lam}")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_polar(cls, delta: float, gamma: float) -> "SpectralParameter":
        if delta <= 0:
            raise ParameterError(f"δ должно быть положительным, получено {delta}")
        return cls(delta * np.exp(0.5j * gamma))

    @classmethod
    def on_unit_circle(cls, gamma: float) -> "SpectralParameter":
        return cls.from_polar(1.0, gamma)

    @property
    def delta(self) -> float:
        return abs(self.lam)

    @property
    def gamma(self) -> float:
        return 2.0 * float(np.angle(self.lam))

    @property
    def _cosh_rapidity(self) -> float:
        d2 = self.delta ** 2
        return 0.5 * (d2 + 1.0 / d2)

    @property
    def nu(self) -> float:
        d2 = self.delta ** 2
        return (d2 - 1.0 / d2) / (d2 + 1.0 / d2)

    @property
    def alpha(self) -> float:
        return self._cosh_rapidity * np.sin(self.gamma)

    @property
    def beta(self) -> float:
        return self._cosh_rapidity * np.cos(self.gamma)

    @property
    def k1(self) -> complex:
        """(i/4)(λ² − λ⁻²)"""
        return 0.25j * (self.lam ** 2 - self.lam ** -2)

    @property
    def k2(self) -> complex:
        """(1/4)(λ² + λ⁻²)"""
        return 0.25 * (self.lam ** 2 + self.lam ** -2)

    def require_soliton_range(self):
        """Проверяет γ ∈ (0, π)"""
        require_gamma(self.gamma)


@dataclass(frozen=True)
class SolitonParams:
    """Точка орбиты солитона: (λ, a, θ), θ по модулю 2π"""

    spectral: SpectralParameter
    a: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2.0 * np.pi)))


def require_gamma(gamma: float):
    """γ вне (0, π) дает полюс sech или нулевую ширину"""
    if not (0.0 < gamma < np.pi):
        raise ParameterError(f"γ должно лежать в (0, π), получено {gamma}")


def _reduced(z: NDArray) -> NDArray:
    """Представитель ±z с Re ≥ 0 (sech четна)"""
    return np.where(np.real(z) >= 0, z, -z)


def sech(z: NDArray) -> NDArray:
    """Комплексный sech без переполнения при |Re z| > 700"""
    w = _reduced(np.asarray(z, dtype=np.complex128))
    e = np.exp(-w)
    return 2.0 * e / (1.0 + e * e)


def scaled_abs_sech(z: NDArray, exponent: NDArray) -> NDArray:
    """e^{exponent}·|sech z| без промежуточного переполнения"""
    w = _reduced(np.asarray(z, dtype=np.complex128))
    return 2.0 * np.exp(exponent - np.real(w)) / np.abs(1.0 + np.exp(-2.0 * w))


def soliton_values(p: SpectralParameter, x: NDArray, t: Union[float, NDArray]) -> Tuple[NDArray, NDArray]:
    """
    Солитон u_λ, v_λ в произвольных точках (x, t)

    Args:
        p: спектральный параметр с γ ∈ (0, π)
        x: координаты
        t: время (скаляр или массив той же формы)

    Returns:
        Tuple: (u, v)
    """
    p.require_soliton_range()
    gamma = p.gamma
    s = np.sin(gamma)
    x = np.asarray(x, dtype=float)
    X = x + p.nu * t
    T = t + p.nu * x
    carrier = np.exp(-1j * p.beta * T)
    u = 1j * s / p.delta * sech(p.alpha * X - 0.5j * gamma) * carrier
    v = -1j * p.delta * s * sech(p.alpha * X + 0.5j * gamma) * carrier
    return u, v


def soliton_evaluator(p: SpectralParameter) -> Evaluator:
    """Вычислитель солитона для преобразования Лоренца"""
    p.require_soliton_range()
    return lambda x, t: soliton_values(p, x, t)


def soliton_field(p: SpectralParameter, t: float, grid: Grid) -> SpinorField:
    """Солитон на сетке в момент t"""
    u, v = soliton_values(p, grid.x, t)
    return SpinorField(grid, u, v)


def stationary_evaluator(gamma: float, a: float = 0.0, theta: float = 0.0) -> Evaluator:
    """e^{iθ − it cosγ}(u_γ, v_γ)(x + a)"""
    p = SpectralParameter.on_unit_circle(gamma)
    p.require_soliton_range()
    s, c = np.sin(gamma), np.cos(gamma)

    def evaluate(x, t):
        z = (np.asarray(x, dtype=float) + a) * s
        phase = np.exp(1j * theta - 1j * np.asarray(t) * c)
        return (
            1j * s * sech(z - 0.5j * gamma) * phase,
            -1j * s * sech(z + 0.5j * gamma) * phase,
        )

    return evaluate


def stationary_soliton(gamma: float, a: float, theta: float, t: float, grid: Grid) -> SpinorField:
    """Стационарный солитон, сдвинутый на a и повернутый на θ"""
    u, v = stationary_evaluator(gamma, a, theta)(grid.x, t)
    return SpinorField(grid, u, v)


def _boost_coefficients(delta: float) -> Tuple[float, float]:
    if delta <= 0:
        raise ParameterError(f"δ должно быть положительным, получено {delta}")
    d2 = delta ** 2
    return 0.5 * (d2 + 1.0 / d2), 0.5 * (d2 - 1.0 / d2)


def boost_evaluator(evaluator: Evaluator, delta: float) -> Evaluator:
    """(δ⁻¹u, δv)(k₁x + k₂t, k₁t + k₂x)"""
    k1, k2 = _boost_coefficients(delta)

    def evaluate(x, t):
        x = np.asarray(x, dtype=float)
        u, v = evaluator(k1 * x + k2 * t, k1 * t + k2 * x)
        return u / delta, v * delta

    return evaluate


def lorentz_boost(evaluator: Evaluator, delta: float, t: float, grid: Grid) -> SpinorField:
    """
    Преобразование Лоренца решения, заданного в явном виде

    Args:
        evaluator: вычислитель (x, t) -> (u, v)
        delta: параметр δ > 0
        t: момент времени
        grid: сетка

    Returns:
        Новое решение на сетке
    """
    u, v = boost_evaluator(evaluator, delta)(grid.x, t)
    return SpinorField(grid, u, v)


def free_lax_vector(p: SpectralParameter, t: float, grid: Grid) -> LaxVector:
    """Решение уравнений Лакса при (u, v) = (0, 0)"""
    exponent = p.k1 * grid.x + 1j * p.k2 * t
    return LaxVector(grid, np.exp(exponent), np.exp(-exponent))


def soliton_eigenvector(gamma: float, t: float, grid: Grid, delta: float = 1.0) -> LaxVector:
    """
    Убывающий собственный вектор солитона при λ = δ e^{iγ/2}

    При δ ≠ 1 это образ свободного вектора Лакса при переносе собственного
    вектора, записанный в явном виде; при δ = 1 совпадает с классической формулой.
    """
    require_gamma(gamma)
    p = SpectralParameter.from_polar(delta, gamma)
    x = grid.x
    X = x + p.nu * t
    T = t + p.nu * x
    z = p.alpha * X - 0.5j * gamma
    half = 0.5 * p.alpha * X
    carrier = np.exp(0.5j * p.beta * T)
    return LaxVector(
        grid,
        scaled_abs_sech(z, half) * carrier,
        scaled_abs_sech(z, -half) / carrier,
    )
