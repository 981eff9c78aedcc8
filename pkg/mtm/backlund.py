"""
Преобразование Бэклунда в обе стороны, перенос собственного вектора
и проверка инвариантности уравнений Риккати
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import NDArray

from mtm.errors import DegenerateVectorError, ParameterError
from mtm.fields import Grid, LaxVector, SpinorField, derivative, l2_norm_sq, require_same_grid
from mtm.lax import (
    EigenResult,
    JostNormalization,
    JostPair,
    assemble_A,
    assemble_L,
    gauge_transform,
)
from mtm.solitons import SpectralParameter, require_gamma

logger = logging.getLogger(__name__)

# Порог вырождения |φ₁|² + |φ₂|²
_DEGENERATE_NORM_SQ = 1e-280
# Порог валидности Γ = φ₁/φ₂
_INVALID_DENOMINATOR = 1e-300
# Ширина шаблона производной
_STENCIL = 2


def _denominator(phi: LaxVector, gamma: float) -> NDArray:
    """D = e^{iγ/2}|φ₁|² + e^{-iγ/2}|φ₂|²"""
    weight = phi.pointwise_norm_sq()
    if np.any(weight < _DEGENERATE_NORM_SQ):
        bad = int(np.argmin(weight))
        raise DegenerateVectorError(f"Вектор Лакса обращается в ноль в узле {bad} (x = {phi.grid.x[bad]:.6g})")
    half = np.exp(0.5j * gamma)
    return half * np.abs(phi.phi1) ** 2 + np.conj(half) * np.abs(phi.phi2) ** 2


def _spectral(lam: complex) -> SpectralParameter:
    p = SpectralParameter(lam)
    p.require_soliton_range()
    return p


def backlund_transform(f: SpinorField, phi: LaxVector, lam: complex) -> SpinorField:
    """
    Новое решение MTM из старого и решения φ⃗ уравнений Лакса

    Args:
        f: исходное поле (u, v)
        phi: решение уравнений Лакса для f при том же λ
        lam: спектральный параметр λ = δ e^{iγ/2}, γ ∈ (0, π)

    Returns:
        Поле (𝐮, 𝐯)

    Raises:
        DegenerateVectorError: φ⃗ обращается в ноль в узле
        ParameterError: γ вне (0, π)
    """
    require_same_grid(f, phi)
    p = _spectral(lam)
    gamma, delta = p.gamma, p.delta
    s = np.sin(gamma)
    D = _denominator(phi, gamma)
    Dv = np.conj(D)
    cross = np.conj(phi.phi1) * phi.phi2
    u_new = -f.u * Dv / D + 2j * s / delta * cross / D
    v_new = -f.v * D / Dv - 2j * delta * s * cross / Dv
    return SpinorField(f.grid, u_new, v_new)


def prefactor_moduli(phi: LaxVector, lam: complex) -> Tuple[NDArray, NDArray]:
    """Модули множителей при u и v в преобразовании; тождественно равны 1"""
    p = _spectral(lam)
    D = _denominator(phi, p.gamma)
    return np.abs(np.conj(D) / D), np.abs(D / np.conj(D))


def pushforward_eigenvector(phi: LaxVector, gamma: float) -> LaxVector:
    """ψ₁ = φ̄₂/|D|, ψ₂ = φ̄₁/|D|: решение уравнений Лакса для нового поля"""
    require_gamma(gamma)
    modulus = np.abs(_denominator(phi, gamma))
    return LaxVector(phi.grid, np.conj(phi.phi2) / modulus, np.conj(phi.phi1) / modulus)


@dataclass(frozen=True)
class RiccatiField:
    """Γ = φ₁/φ₂ с маской валидных узлов"""

    grid: Grid
    gamma_var: NDArray
    valid: NDArray

    def inverted_conjugate(self) -> "RiccatiField":
        """Переменная Риккати после преобразования: Γ′ = 1/Γ̄"""
        valid = self.valid & (np.abs(self.gamma_var) >= _INVALID_DENOMINATOR)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(valid, 1.0 / np.conj(self.gamma_var), np.nan)
        return RiccatiField(self.grid, out, valid)


@dataclass(frozen=True)
class ResidualReport:
    norm: float
    excluded: int

    def __float__(self) -> float:
        return self.norm


def riccati_field(phi: LaxVector) -> RiccatiField:
    valid = np.abs(phi.phi2) >= _INVALID_DENOMINATOR
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma_var = np.where(valid, phi.phi1 / phi.phi2, np.nan)
    return RiccatiField(phi.grid, gamma_var, valid & np.isfinite(gamma_var))


def _usable(valid: NDArray, grid: Grid) -> NDArray:
    """Узлы, шаблон производной в которых не задевает невалидные и краевые точки"""
    bad = (~valid).astype(float)
    width = 2 * _STENCIL + 1
    if grid.periodic:
        spread = sum(np.roll(bad, k) for k in range(-_STENCIL, _STENCIL + 1))
    else:
        spread = np.convolve(bad, np.ones(width), mode="same")
    usable = spread == 0
    usable[:_STENCIL] = False
    usable[-_STENCIL:] = False
    return usable


def _weighted_norm(residual: NDArray, gamma_var: NDArray, usable: NDArray, grid: Grid) -> ResidualReport:
    # нормировка на 1 + |Γ|² делает невязку инвариантной к Γ → 1/Γ̄
    weighted = residual / (1.0 + np.abs(gamma_var) ** 2)
    usable = usable & np.isfinite(weighted)
    value = float(np.sqrt(grid.dx * np.sum(np.abs(weighted[usable]) ** 2)))
    return ResidualReport(value, int(grid.n - np.count_nonzero(usable)))


def riccati_residual(g: RiccatiField, f: SpinorField, lam: complex) -> ResidualReport:
    """
    Невязка пространственного уравнения Риккати Γₓ = 2L₁₁Γ + L₁₂ − L₂₁Γ²

    Невязка делится на 1 + |Γ|²; невалидные узлы, их окрестность
    шаблона и два крайних узла исключаются, число исключенных возвращается.
    """
    require_same_grid(g, f)
    L = assemble_L(f, lam)
    filled = np.where(g.valid, g.gamma_var, 0.0)
    residual = derivative(filled, g.grid) - 2.0 * L.a11 * filled - L.a12 + L.a21 * filled ** 2
    return _weighted_norm(residual, filled, _usable(g.valid, g.grid), g.grid)


def riccati_time_residual(g_before: RiccatiField, g_after: RiccatiField,
                          f_before: SpinorField, f_after: SpinorField,
                          lam: complex, dt: float) -> ResidualReport:
    """Временное уравнение Риккати Γₜ = 2A₁₁Γ + A₁₂ − A₂₁Γ², центрированное между снимками"""
    require_same_grid(g_before, g_after)
    require_same_grid(f_before, f_after)
    valid = g_before.valid & g_after.valid
    before = np.where(valid, g_before.gamma_var, 0.0)
    after = np.where(valid, g_after.gamma_var, 0.0)
    mid_field = SpinorField(f_before.grid, 0.5 * (f_before.u + f_after.u), 0.5 * (f_before.v + f_after.v))
    A = assemble_A(mid_field, lam)
    mid = 0.5 * (before + after)
    rhs = 2.0 * A.a11 * mid + A.a12 - A.a21 * 0.5 * (before ** 2 + after ** 2)
    residual = (after - before) / dt - rhs
    usable = valid.copy()
    usable[:_STENCIL] = False
    usable[-_STENCIL:] = False
    return _weighted_norm(residual, mid, usable, g_before.grid)


def down_map(f0: SpinorField, res: EigenResult) -> SpinorField:
    """
    Отображение окрестности солитона в окрестность нуля

    Args:
        f0: начальные данные вблизи солитона
        res: собственное значение и вектор для f0

    Returns:
        Малое решение (p₀, q₀)
    """
    small = backlund_transform(f0, res.eigenvector, res.lam)
    logger.info("Отображение вниз: ‖(p₀, q₀)‖ = %.3e", np.sqrt(l2_norm_sq(small)))
    return small


def superposed_vector(f_t: SpinorField, jost: JostPair, lam: complex, a: float, theta: float) -> LaxVector:
    """
    φ⃗ = c₁ e^{k₁x} M₁φ + c₂ e^{-k₁x} M₂χ, c₁ = e^{(a+iθ)/2}, c₂ = 1/c₁

    Обе экспоненты умножены на e^{-|Re k₁ x|}: преобразование Бэклунда
    не меняется при умножении φ⃗ на положительную функцию.
    """
    require_same_grid(f_t, jost.left)
    if jost.normalization is not JostNormalization.BOUNDED_PROFILE:
        raise ParameterError("Для восстановления нужны ограниченные профили из solve_time_bvp")
    k1 = SpectralParameter(lam).k1
    x = f_t.grid.x
    damp = np.abs(np.real(k1) * x)
    e_plus = np.exp(k1 * x - damp)
    e_minus = np.exp(-k1 * x - damp)
    gauge = gauge_transform(f_t)
    c1 = np.exp(0.5 * (a + 1j * theta))
    c2 = 1.0 / c1
    phi, chi = jost.left, jost.right
    return LaxVector(
        f_t.grid,
        c1 * e_plus * gauge.m1 * phi.phi1 + c2 * e_minus * np.conj(gauge.m2) * chi.phi1,
        c1 * e_plus * np.conj(gauge.m1) * phi.phi2 + c2 * e_minus * gauge.m2 * chi.phi2,
    )


def up_map(f_t: SpinorField, jost: JostPair, lam: complex, a: float, theta: float) -> SpinorField:
    """Решение вблизи орбиты солитона из малого решения в момент t"""
    return backlund_transform(f_t, superposed_vector(f_t, jost, lam, a, theta), lam)
