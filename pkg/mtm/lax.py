"""
Линейная часть: операторы Лакса, калибровка, решения Йоста, функция Эванса,
поиск собственного значения, резольвента и краевые задачи по времени
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, quad
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.signal import lfilter

import config
from mtm.errors import (
    ConsistencyError,
    DegenerateExponentError,
    JostIntegrationError,
    MTMError,
    NoEigenvalueFound,
    OrthogonalityError,
    ParameterError,
)
from mtm.fields import (
    Grid,
    LaxVector,
    SpinorField,
    derivative,
    inner_product,
    l2_norm_sq,
    norm,
    require_same_grid,
)
from mtm.solitons import (
    Evaluator,
    SpectralParameter,
    require_gamma,
    scaled_abs_sech,
    stationary_soliton,
)

logger = logging.getLogger(__name__)

# Граница детектирования вырожденного показателя
_DEGENERATE_EXPONENT = 1e-12
# Окно, в котором огибающая остатков не теряет точность
_REMAINDER_WINDOW = 12.0


@dataclass(frozen=True)
class LaxOperatorSample:
    """Матрица 2×2 в каждом узле сетки"""

    grid: Grid
    a11: NDArray
    a12: NDArray
    a21: NDArray
    a22: NDArray

    def trace(self) -> NDArray:
        return self.a11 + self.a22

    def apply(self, vec: LaxVector) -> LaxVector:
        """Поточечное действие на вектор"""
        require_same_grid(self, vec)
        return LaxVector(
            self.grid,
            self.a11 * vec.phi1 + self.a12 * vec.phi2,
            self.a21 * vec.phi1 + self.a22 * vec.phi2,
        )

    def stacked(self) -> NDArray:
        """Массив формы (n, 2, 2)"""
        return np.stack(
            [np.stack([self.a11, self.a12], axis=-1), np.stack([self.a21, self.a22], axis=-1)],
            axis=-2,
        )


class JostNormalization(Enum):
    """Асимптотические соглашения пары решений"""

    # left ~ (0, e^{-k₁x}) при x → -∞, right ~ (e^{k₁x}, 0) при x → +∞
    RECESSIVE = "recessive"
    # left = ограниченный профиль φ с φ₁(-∞) = e^{itk₂}, right = χ с χ₂(+∞) = e^{-itk₂}
    BOUNDED_PROFILE = "bounded-profile"


@dataclass(frozen=True)
class JostPair:
    """Пара решений, нормированных на разных бесконечностях"""

    lam: complex
    left: LaxVector
    right: LaxVector
    normalization: JostNormalization


@dataclass(frozen=True)
class EigenResult:
    """
    Найденное собственное значение и нормированный собственный вектор

    Обычно evans_residual < EVANS_TOL. Если шаг секущей упал до уровня
    округления (|Δλ| < 1e-13|λ|), итерация останавливается и при
    evans_residual < 1e-8: точнее функцию Эванса на данной сетке не вычислить.
    Такой выход пишется в лог предупреждением.
    """

    lam: complex
    eigenvector: LaxVector
    evans_residual: float
    iterations: int


@dataclass(frozen=True)
class GaugePhase:
    """Унимодулярные фазы m₁ (от x_min) и m₂ (от x_max)"""

    grid: Grid
    m1: NDArray
    m2: NDArray

    @property
    def total(self) -> complex:
        """e^{(i/4)∫(|u|²−|v|²)} по всей сетке"""
        return complex(self.m1[-1])


def _coupling(u: NDArray, v: NDArray, lam: complex) -> Tuple[NDArray, NDArray]:
    """Внедиагональные элементы L: (i/(2λ))ū − (iλ/2)v̄ и (i/(2λ))u − (iλ/2)v"""
    return (
        0.5j / lam * np.conj(u) - 0.5j * lam * np.conj(v),
        0.5j / lam * u - 0.5j * lam * v,
    )


def _nonzero(lam: complex) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise ParameterError("λ = 0 недопустимо")
    return lam


def assemble_L(f: SpinorField, lam: complex) -> LaxOperatorSample:
    """Пространственный оператор Лакса L(u, v, λ)"""
    lam = _nonzero(lam)
    diag = 0.25j * (np.abs(f.u) ** 2 - np.abs(f.v) ** 2) + 0.25j * (lam ** 2 - lam ** -2)
    a12, a21 = _coupling(f.u, f.v, lam)
    return LaxOperatorSample(f.grid, diag, a12, a21, -diag)


def assemble_A(f: SpinorField, lam: complex) -> LaxOperatorSample:
    """Временной оператор Лакса A(u, v, λ)"""
    lam = _nonzero(lam)
    diag = -0.25j * (np.abs(f.u) ** 2 + np.abs(f.v) ** 2) + 0.25j * (lam ** 2 + lam ** -2)
    a12 = -0.5j * lam * np.conj(f.v) - 0.5j / lam * np.conj(f.u)
    a21 = -0.5j * lam * f.v - 0.5j / lam * f.u
    return LaxOperatorSample(f.grid, diag, a12, a21, -diag)


def gauge_transform(f: SpinorField) -> GaugePhase:
    """Фазы m₁ = e^{(i/4)∫_{x_min}^x}, m₂ = e^{(i/4)∫_x^{x_max}} от (|u|² − |v|²)"""
    density = 0.25 * (np.abs(f.u) ** 2 - np.abs(f.v) ** 2)
    running = cumulative_trapezoid(density, dx=f.grid.dx, initial=0.0)
    total = running[-1]
    return GaugePhase(f.grid, np.exp(1j * running), np.exp(1j * (total - running)))


def gauge_relative(gauge: GaugePhase, index: int) -> NDArray:
    """Калибровка f с f(x_index) = 1"""
    return gauge.m1 / gauge.m1[index]


def assemble_M(f: SpinorField, lam: complex, gauge: Optional[NDArray] = None) -> LaxOperatorSample:
    """
    Оператор системы после унитарной замены ψ = diag(f, f̄)φ

    Args:
        f: поле
        lam: спектральный параметр
        gauge: фаза f; по умолчанию m₁, нормированная в узле x = 0
    """
    lam = _nonzero(lam)
    if gauge is None:
        gauge = gauge_relative(gauge_transform(f), f.grid.nearest_index(0.0))
    k1 = 0.25j * (lam ** 2 - lam ** -2)
    b12, b21 = _coupling(f.u, f.v, lam)
    diag = np.full(f.grid.n, k1, dtype=np.complex128)
    return LaxOperatorSample(f.grid, diag, b12 * np.conj(gauge) ** 2, b21 * gauge ** 2, -diag)


def apply_operator(op: LaxOperatorSample, vec: LaxVector) -> LaxVector:
    return op.apply(vec)


def _residual_norm(r1: NDArray, r2: NDArray, grid: Grid, interior: int) -> float:
    sl = slice(interior, grid.n - interior) if interior else slice(None)
    dens = np.abs(r1[sl]) ** 2 + np.abs(r2[sl]) ** 2
    return float(np.sqrt(grid.dx * np.sum(dens)))


def lax_residual(f: SpinorField, phi: LaxVector, lam: complex, interior: int = 2) -> float:
    """‖∂ₓφ − L φ‖ без interior крайних узлов с каждой стороны"""
    L = assemble_L(f, lam)
    Lphi = L.apply(phi)
    r1 = derivative(phi.phi1, phi.grid) - Lphi.phi1
    r2 = derivative(phi.phi2, phi.grid) - Lphi.phi2
    return _residual_norm(r1, r2, phi.grid, interior)


def zero_curvature_residual(evaluator: Evaluator, lam: complex, t: float, grid: Grid, dt: float) -> float:
    """‖∂ₓA − ∂ₜL + [A, L]‖ для решения в явном виде, ∂ₜ центральной разностью"""

    def field_at(time):
        u, v = evaluator(grid.x, time)
        return SpinorField(grid, u, v)

    L = assemble_L(field_at(t), lam).stacked()
    L_plus = assemble_L(field_at(t + dt), lam).stacked()
    L_minus = assemble_L(field_at(t - dt), lam).stacked()
    A = assemble_A(field_at(t), lam).stacked()
    Ax = np.empty_like(A)
    for i in range(2):
        for j in range(2):
            Ax[:, i, j] = derivative(A[:, i, j], grid)
    Lt = (L_plus - L_minus) / (2.0 * dt)
    R = Ax - Lt + A @ L - L @ A
    dens = np.sum(np.abs(R) ** 2, axis=(1, 2))
    return float(np.sqrt(grid.dx * np.sum(dens[2:-2])))


def _recessive_exponent(lam: complex) -> complex:
    """k₁(λ) с Re k₁ < 0; иначе рецессивные направления не определены"""
    k1 = SpectralParameter(lam).k1
    if abs(np.real(k1)) <= _DEGENERATE_EXPONENT * max(1.0, abs(k1)):
        raise DegenerateExponentError(f"λ² вещественно (λ = {lam}), решения Йоста не определены")
    if np.real(k1) > 0:
        raise ParameterError(f"Требуется Im λ² > 0, получено λ = {lam}")
    return k1


class _GaugedCoupling:
    """
    Коэффициенты калиброванной системы в узлах и серединах ячеек

    Середины получаются кубическим сплайном, что согласует точность
    интерполяции с четвертым порядком схемы Рунге–Кутты.
    """

    def __init__(self, f: SpinorField):
        self.grid = f.grid
        self.gauge = gauge_transform(f)
        f2 = self.gauge.m1 ** 2
        columns = [np.conj(f.u) * np.conj(f2), np.conj(f.v) * np.conj(f2), f.u * f2, f.v * f2]
        self.nodes = columns
        x = f.grid.x
        stacked = np.column_stack([part for c in columns for part in (c.real, c.imag)])
        spline = CubicSpline(x, stacked, axis=0)
        mid = spline(x[:-1] + 0.5 * f.grid.dx)
        self.mids = [mid[:, 2 * i] + 1j * mid[:, 2 * i + 1] for i in range(4)]

    def coefficients(self, lam: complex) -> Tuple[List[complex], List[complex], List[complex], List[complex]]:
        """(b12, b12 в серединах, b21, b21 в серединах) как списки Python"""
        p, q = 0.5j / lam, -0.5j * lam
        ub, vb, u, v = self.nodes
        ubh, vbh, uh, vh = self.mids
        return (
            (p * ub + q * vb).tolist(),
            (p * ubh + q * vbh).tolist(),
            (p * u + q * v).tolist(),
            (p * uh + q * vh).tolist(),
        )


def _rk4_sweep(coeffs, d1: complex, d2: complex, h: float, y0: Tuple[complex, complex],
               start: int, stop: int) -> Tuple[NDArray, NDArray]:
    """
    РК4 для y' = [[d1, b12], [b21, d2]] y от узла start до узла stop

    Возвращает значения в узлах start..stop (в порядке индексов сетки).
    """
    b12, b12h, b21, b21h = coeffs
    y1, y2 = y0
    count = abs(stop - start) + 1
    out1 = [0j] * count
    out2 = [0j] * count
    step = 1 if stop >= start else -1
    hs = h * step
    half = 0.5 * hs
    pos = 0 if step > 0 else count - 1
    out1[pos], out2[pos] = y1, y2
    for j in range(start, stop, step):
        jn = j + step
        jm = j if step > 0 else j - 1
        a12, a21 = b12[j], b21[j]
        m12, m21 = b12h[jm], b21h[jm]
        e12, e21 = b12[jn], b21[jn]
        k11 = d1 * y1 + a12 * y2
        k12 = a21 * y1 + d2 * y2
        t1, t2 = y1 + half * k11, y2 + half * k12
        k21 = d1 * t1 + m12 * t2
        k22 = m21 * t1 + d2 * t2
        t1, t2 = y1 + half * k21, y2 + half * k22
        k31 = d1 * t1 + m12 * t2
        k32 = m21 * t1 + d2 * t2
        t1, t2 = y1 + hs * k31, y2 + hs * k32
        k41 = d1 * t1 + e12 * t2
        k42 = e21 * t1 + d2 * t2
        y1 = y1 + hs / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        y2 = y2 + hs / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        pos += step
        out1[pos], out2[pos] = y1, y2
    r1, r2 = np.array(out1), np.array(out2)
    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
        raise JostIntegrationError("Переполнение при интегрировании решения Йоста")
    return r1, r2


def _scaled_jost(coupling: _GaugedCoupling, lam: complex, left_stop: int, right_stop: int):
    """
    Масштабированные решения w = e^{k₁x}φ (левое) и w = e^{-k₁x}φ (правое)
    в калиброванной системе
    """
    k1 = _recessive_exponent(lam)
    coeffs = coupling.coefficients(lam)
    n = coupling.grid.n
    dx = coupling.grid.dx
    left = _rk4_sweep(coeffs, 2.0 * k1, 0.0, dx, (0j, 1.0 + 0j), 0, left_stop)
    right_start = (complex(np.conj(coupling.gauge.m1[-1])), 0j)
    right = _rk4_sweep(coeffs, 0.0, -2.0 * k1, dx, right_start, n - 1, right_stop)
    return k1, left, right


def _matching_index(grid: Grid) -> int:
    return min(max(grid.nearest_index(0.0), 1), grid.n - 2)


def _evans_from_coupling(coupling: _GaugedCoupling, lam: complex) -> complex:
    j0 = _matching_index(coupling.grid)
    _, (l1, l2), (r1, r2) = _scaled_jost(coupling, lam, j0, j0)
    a1, a2 = l1[-1], l2[-1]
    b1, b2 = r1[0], r2[0]
    na = np.hypot(abs(a1), abs(a2))
    nb = np.hypot(abs(b1), abs(b2))
    if na == 0 or nb == 0:
        raise JostIntegrationError("Решение Йоста обратилось в ноль в точке сшивки")
    return complex((a1 * b2 - a2 * b1) / (na * nb))


def _ungauge(coupling: _GaugedCoupling, phi1: NDArray, phi2: NDArray) -> LaxVector:
    m1 = coupling.gauge.m1
    return LaxVector(coupling.grid, m1 * phi1, np.conj(m1) * phi2)


def solve_jost(f: SpinorField, lam: complex) -> JostPair:
    """
    Решения Йоста, рецессивные на -∞ (left) и на +∞ (right)

    Интегрирование идет в калиброванной системе схемой РК4 с шагом dx
    от каждой границы; результат возвращается в исходных переменных.

    Raises:
        DegenerateExponentError: λ² вещественно
        JostIntegrationError: переполнение
    """
    coupling = _GaugedCoupling(f)
    n = f.grid.n
    k1, (l1, l2), (r1, r2) = _scaled_jost(coupling, lam, n - 1, 0)
    x = f.grid.x
    down, up = np.exp(-k1 * x), np.exp(k1 * x)
    left = _ungauge(coupling, down * l1, down * l2)
    right = _ungauge(coupling, up * r1, up * r2)
    for vec in (left, right):
        if not (np.all(np.isfinite(vec.phi1)) and np.all(np.isfinite(vec.phi2))):
            raise JostIntegrationError("Экспоненциальный множитель переполнился на данной сетке")
    return JostPair(complex(lam), left, right, JostNormalization.RECESSIVE)


def evans_function(f: SpinorField, lam: complex) -> complex:
    """det[left(0), right(0)] с нормированными столбцами; ноль ⇔ λ собственное значение"""
    return _evans_from_coupling(_GaugedCoupling(f), lam)


def _normalized(vec: LaxVector) -> LaxVector:
    """‖·‖ = 1, наибольшая по модулю компонента вещественна и положительна"""
    scale = np.sqrt(l2_norm_sq(vec))
    stacked = np.concatenate([vec.phi1, vec.phi2])
    peak = stacked[np.argmax(np.abs(stacked))]
    return vec.scaled(np.conj(peak) / abs(peak) / scale)


def _eigenvector(coupling: _GaugedCoupling, lam: complex) -> LaxVector:
    """Склейка левого и правого решений в точке x ≈ 0"""
    grid = coupling.grid
    j0 = _matching_index(grid)
    k1, (l1, l2), (r1, r2) = _scaled_jost(coupling, lam, j0, j0)
    x = grid.x
    left1, left2 = np.exp(-k1 * x[: j0 + 1]) * l1, np.exp(-k1 * x[: j0 + 1]) * l2
    right1, right2 = np.exp(k1 * x[j0:]) * r1, np.exp(k1 * x[j0:]) * r2
    c = (np.conj(right1[0]) * left1[-1] + np.conj(right2[0]) * left2[-1]) / (
        abs(right1[0]) ** 2 + abs(right2[0]) ** 2
    )
    phi1 = np.concatenate([left1, c * right1[1:]])
    phi2 = np.concatenate([left2, c * right2[1:]])
    return _normalized(_ungauge(coupling, phi1, phi2))


def find_eigenvalue(f: SpinorField, lambda_guess: complex,
                    tol: float = config.EVANS_TOL, maxiter: int = config.EVANS_MAXITER) -> EigenResult:
    """
    Секущая в ℂ по функции Эванса от lambda_guess и lambda_guess·(1 + 1e-3)

    Raises:
        NoEigenvalueFound: нет сходимости за maxiter итераций
    """
    coupling = _GaugedCoupling(f)

    def evans(lam):
        try:
            return _evans_from_coupling(coupling, lam)
        except MTMError as e:
            raise NoEigenvalueFound(f"Итерация вышла из допустимой области: {e}") from e

    p0 = complex(lambda_guess)
    p1 = p0 * (1.0 + 1e-3)
    q0, q1 = evans(p0), evans(p1)
    if abs(q0) < tol:
        p1, q1 = p0, q0
    iteration = 0
    while abs(q1) >= tol:
        if iteration >= maxiter:
            raise NoEigenvalueFound(f"Нет сходимости за {maxiter} итераций, |E| = {abs(q1):.3e}")
        if q1 == q0:
            raise NoEigenvalueFound(f"Функция Эванса не меняется около λ = {p1}: дискретного спектра рядом нет")
        iteration += 1
        p2 = p1 - q1 * (p1 - p0) / (q1 - q0)
        p0, q0 = p1, q1
        p1, q1 = p2, evans(p2)
        logger.debug("секущая %d: λ = %s, |E| = %.3e", iteration, p1, abs(q1))
        # шаг на уровне округления: точнее функцию Эванса не вычислить
        if tol <= abs(q1) < 1e-8 and abs(p1 - p0) < 1e-13 * abs(p1):
            logger.warning("Секущая остановлена на уровне округления: |E| = %.2e > %.0e", abs(q1), tol)
            break
    eigenvector = _eigenvector(coupling, p1)
    logger.info("Собственное значение λ = %s (|E| = %.2e, итераций %d)", p1, abs(q1), iteration)
    return EigenResult(p1, eigenvector, float(abs(q1)), iteration)


def null_vectors(gamma: float, grid: Grid) -> Tuple[LaxVector, LaxVector, LaxVector]:
    """
    Ядро (∂ₓ − M_γ): φ_γ, сопряженное ядро η_γ и растущее решение ξ_γ

    Returns:
        Tuple: (phi, eta, xi)
    """
    require_gamma(gamma)
    s = np.sin(gamma)
    x = grid.x
    z = x * s - 0.5j * gamma

    def env(m):
        return scaled_abs_sech(z, m * x * s)

    phi = LaxVector(grid, env(0.5), env(-0.5))
    eta = LaxVector(grid, env(-0.5), -env(0.5))
    s2 = np.sin(2.0 * gamma)
    xi = LaxVector(
        grid,
        env(-1.5) - x * s2 * env(0.5),
        -(env(1.5) + (2.0 * np.cos(gamma) + x * s2) * env(-0.5)),
    )
    return phi, eta, xi


def soliton_operator(gamma: float, grid: Grid) -> LaxOperatorSample:
    """M_γ = M(u_γ, v_γ, e^{iγ/2}); калибровка тривиальна, так как |u_γ| = |v_γ|"""
    f = stationary_soliton(gamma, 0.0, 0.0, 0.0, grid)
    return assemble_M(f, np.exp(0.5j * gamma), gauge=np.ones(grid.n))


def project_P(gamma: float, v: LaxVector) -> LaxVector:
    """P_γ v = v − ⟨σ₃η, v⟩/⟨σ₃η, φ⟩ φ"""
    phi, eta, _ = null_vectors(gamma, v.grid)
    s3eta = eta.sigma3()
    return v - phi.scaled(inner_product(s3eta, v) / inner_product(s3eta, phi))


def project_P_hat(gamma: float, v: LaxVector) -> LaxVector:
    """σ₃P_γσ₃: обнуляет проекцию на η"""
    phi, eta, _ = null_vectors(gamma, v.grid)
    s3phi = phi.sigma3()
    return v - s3phi.scaled(inner_product(eta, v) / inner_product(eta, s3phi))


def resolvent_solve(gamma: float, f: LaxVector, solvability_tol: float = 1e-6) -> LaxVector:
    """
    Решение (∂ₓ − M_γ)w = f методом вариации постоянных с ⟨σ₃η, w⟩ = 0

    Raises:
        OrthogonalityError: |⟨η, f⟩| ≥ solvability_tol
    """
    grid = f.grid
    phi, eta, xi = null_vectors(gamma, grid)
    violation = inner_product(eta, f)
    if abs(violation) >= solvability_tol:
        raise OrthogonalityError(f"⟨η, f⟩ = {violation:.3e}: правая часть не ортогональна η")
    f = project_P_hat(gamma, f)
    dx = grid.dx
    x = grid.x

    def forward(values):
        return cumulative_simpson(values, dx=dx, initial=0.0)

    def backward(values):
        return cumulative_simpson(values[::-1], dx=dx, initial=0.0)[::-1]

    w_minus = forward(-xi.phi2 * f.phi1)
    w_plus = backward(-xi.phi1 * f.phi2)
    pairing = eta.phi1 * f.phi1 + eta.phi2 * f.phi2
    # хвост берется с той стороны, где ξ мало
    eta_integral = np.where(x <= 0.0, forward(pairing), -backward(pairing))
    coeff = w_minus + w_plus
    w0 = LaxVector(
        grid,
        0.25 * (phi.phi1 * coeff + xi.phi1 * eta_integral),
        0.25 * (phi.phi2 * coeff + xi.phi2 * eta_integral),
    )
    s3eta = eta.sigma3()
    k = -inner_product(s3eta, w0) / inner_product(s3eta, phi)
    return w0 + phi.scaled(k)


def resolvent_residual(gamma: float, w: LaxVector, f: LaxVector, interior: int = 2) -> float:
    """‖(∂ₓ − M_γ)w − f‖"""
    Mw = soliton_operator(gamma, w.grid).apply(w)
    r1 = derivative(w.phi1, w.grid) - Mw.phi1 - f.phi1
    r2 = derivative(w.phi2, w.grid) - Mw.phi2 - f.phi2
    return _residual_norm(r1, r2, w.grid, interior)


def s_constant(gamma: float, rtol: float = 1e-8) -> complex:
    """
    s = 4i e^{-iγ/2} ∫(1 + cosγ cosh(2x sinγ))/(cosh(2x sinγ) + cosγ)² dx

    Квадратура сверяется с замкнутой формой 4i e^{-iγ/2}/sinγ.

    Raises:
        ConsistencyError: расхождение больше rtol
    """
    require_gamma(gamma)
    s, c = np.sin(gamma), np.cos(gamma)

    # после замены y = 2x sinγ, в терминах sech y
    def integrand(y):
        h = 1.0 / np.cosh(min(abs(y), 700.0))
        return (h * h + c * h) / (1.0 + c * h) ** 2

    value, _ = quad(integrand, 0.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    integral = 2.0 * value / (2.0 * s)
    result = 4j * np.exp(-0.5j * gamma) * integral
    closed = 4j * np.exp(-0.5j * gamma) / s
    if abs(result - closed) > rtol * abs(closed):
        raise ConsistencyError(f"s: квадратура {result} расходится с замкнутой формой {closed}")
    return complex(result)


def s_constant_pairing(gamma: float, grid: Grid) -> complex:
    """s = (i/2)⟨η_γ, B φ_γ⟩, B = ∂_λ M при λ₀ = e^{iγ/2}"""
    require_gamma(gamma)
    lam = np.exp(0.5j * gamma)
    f = stationary_soliton(gamma, 0.0, 0.0, 0.0, grid)
    phi, eta, _ = null_vectors(gamma, grid)
    diag = lam + lam ** -3
    b12 = -(np.conj(f.u) * lam ** -2 + np.conj(f.v))
    b21 = -(f.u * lam ** -2 + f.v)
    B = LaxOperatorSample(grid, np.full(grid.n, diag), b12, b21, np.full(grid.n, -diag))
    return 0.5j * inner_product(eta, B.apply(phi))


@dataclass(frozen=True)
class RemainderDiagnostics:
    """Остатки r_ij представления собственного вектора и их нормы"""

    gamma: float
    r11: NDArray
    r12: NDArray
    r21: NDArray
    r22: NDArray
    window: NDArray
    gauge: NDArray
    scale: complex
    sup_norms: Dict[str, float]
    l2_norms: Dict[str, float]

    @property
    def total(self) -> float:
        """‖r11‖∞ + ‖r12‖_{L²∩L∞} + ‖r21‖_{L²∩L∞} + ‖r22‖∞"""
        return (
            self.sup_norms["r11"] + self.sup_norms["r22"]
            + max(self.sup_norms["r12"], self.l2_norms["r12"])
            + max(self.sup_norms["r21"], self.l2_norms["r21"])
        )


def _envelopes(gamma: float, grid: Grid) -> Tuple[NDArray, NDArray]:
    phi, _, _ = null_vectors(gamma, grid)
    return phi.phi1.real, phi.phi2.real


def eigenvector_remainder(f: SpinorField, res: EigenResult) -> RemainderDiagnostics:
    """
    Делит собственный вектор на явную огибающую и возвращает остатки

    Вектор переводится в калиброванную систему (f(0) = 1) и нормируется так,
    чтобы ⟨σ₃η_γ, φ⟩ = ⟨σ₃η_γ, φ_γ⟩. При x ≥ 0 первая компонента относится
    к члену e^{x sinγ/2}, при x < 0 к члену e^{-x sinγ/2}; вторая зеркально.
    Отчет ограничен окном |x sinγ| ≤ 12.
    """
    p = SpectralParameter(res.lam)
    gamma = p.gamma
    require_gamma(gamma)
    grid = f.grid
    x = grid.x
    s = np.sin(gamma)
    g = gauge_relative(gauge_transform(f), grid.nearest_index(0.0))
    psi = res.eigenvector
    gauged = LaxVector(grid, np.conj(g) * psi.phi1, g * psi.phi2)
    phi_g, eta, _ = null_vectors(gamma, grid)
    s3eta = eta.sigma3()
    scale = inner_product(s3eta, phi_g) / inner_product(s3eta, gauged)
    gauged = gauged.scaled(scale)
    e_plus, e_minus = _envelopes(gamma, grid)
    window = np.abs(x * s) <= _REMAINDER_WINDOW
    right, left = (x >= 0.0) & window, (x < 0.0) & window
    zero = np.zeros(grid.n, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        r11 = np.where(right, gauged.phi1 / e_plus - 1.0, zero)
        r12 = np.where(left, (gauged.phi1 - e_plus) / e_minus, zero)
        r22 = np.where(window & (x <= 0.0), gauged.phi2 / e_minus - 1.0, zero)
        r21 = np.where(window & (x > 0.0), (gauged.phi2 - e_minus) / e_plus, zero)
    parts = {"r11": r11, "r12": r12, "r21": r21, "r22": r22}
    sup_norms = {k: float(np.max(np.abs(v))) for k, v in parts.items()}
    l2_norms = {k: norm(v, grid) for k, v in parts.items()}
    logger.debug("остатки: sup %s, L2 %s", sup_norms, l2_norms)
    return RemainderDiagnostics(gamma, r11, r12, r21, r22, window, g, scale, sup_norms, l2_norms)


def eigenvector_representation(diag: RemainderDiagnostics, grid: Grid) -> LaxVector:
    """Обратная сборка собственного вектора из остатков (вне окна нули)"""
    e_plus, e_minus = _envelopes(diag.gamma, grid)
    phi1 = e_plus * (1.0 + diag.r11) + e_minus * diag.r12
    phi2 = e_plus * diag.r21 + e_minus * (1.0 + diag.r22)
    g = diag.gauge
    phi1 = np.where(diag.window, g * phi1 / diag.scale, 0.0)
    phi2 = np.where(diag.window, np.conj(g) * phi2 / diag.scale, 0.0)
    return LaxVector(grid, phi1, phi2)


def _tail_convolution(g: NDArray, kernel: complex, dx: float) -> NDArray:
    """I_j = ∫_{x_j}^{x_max} e^{2k(y − x_j)} g(y) dy по трапециям, рекурсией справа налево"""
    rev = g[::-1]
    z = np.zeros_like(rev)
    z[1:] = 0.5 * dx * (rev[1:] + kernel * rev[:-1])
    return lfilter([1.0], [1.0, -kernel], z)[::-1]


def _head_convolution(h: NDArray, kernel: complex, dx: float) -> NDArray:
    """K_j = ∫_{x_min}^{x_j} e^{2k(x_j − y)} h(y) dy"""
    z = np.zeros_like(h)
    z[1:] = 0.5 * dx * (h[1:] + kernel * h[:-1])
    return lfilter([1.0], [1.0, -kernel], z)


def _bounded_profiles(f: SpinorField, lam: complex, tol: float = 1e-13, maxiter: int = 200):
    """
    Профили φ (φ₁(x_min) = 1, e^{2k₁x}φ₂ → 0 на +∞) и χ (χ₂(x_max) = 1,
    e^{-2k₁x}χ₁ → 0 на -∞) из интегральных уравнений, итерацией Пикара
    """
    k1 = _recessive_exponent(lam)
    grid = f.grid
    dx = grid.dx
    gauge = gauge_transform(f)
    m1, m2 = gauge.m1, gauge.m2
    b12, b21 = _coupling(f.u, f.v, lam)
    kernel = np.exp(2.0 * k1 * dx)

    phi1 = np.ones(grid.n, dtype=np.complex128)
    phi2 = np.zeros(grid.n, dtype=np.complex128)
    c12, c21 = b12 * np.conj(m1) ** 2, b21 * m1 ** 2
    for iteration in range(maxiter):
        new2 = -_tail_convolution(c21 * phi1, kernel, dx)
        new1 = 1.0 + cumulative_trapezoid(c12 * new2, dx=dx, initial=0.0)
        change = max(np.max(np.abs(new1 - phi1)), np.max(np.abs(new2 - phi2)))
        phi1, phi2 = new1, new2
        if not np.isfinite(change):
            break
        if change < tol:
            break
    else:
        raise JostIntegrationError("Итерация для профиля φ не сошлась: фон слишком велик")

    chi1 = np.zeros(grid.n, dtype=np.complex128)
    chi2 = np.ones(grid.n, dtype=np.complex128)
    d12, d21 = b12 * m2 ** 2, b21 * np.conj(m2) ** 2
    for _ in range(maxiter):
        new1 = _head_convolution(d12 * chi2, kernel, dx)
        tail = cumulative_trapezoid((d21 * new1)[::-1], dx=dx, initial=0.0)[::-1]
        new2 = 1.0 - tail
        change = max(np.max(np.abs(new1 - chi1)), np.max(np.abs(new2 - chi2)))
        chi1, chi2 = new1, new2
        if not np.isfinite(change):
            break
        if change < tol:
            break
    else:
        raise JostIntegrationError("Итерация для профиля χ не сошлась: фон слишком велик")

    for arr in (phi1, phi2, chi1, chi2):
        if not np.all(np.isfinite(arr)):
            raise JostIntegrationError("Итерация Пикара разошлась")
    logger.debug("профили φ, χ получены за %d итераций", iteration + 1)
    return (phi1, phi2), (chi1, chi2)


def solve_time_bvp(f_t: SpinorField, lam: complex, t: float) -> JostPair:
    """
    Ограниченные профили φ и χ в момент t с фазами e^{±itk₂(λ)}

    left = φ (φ₁ → e^{itk₂} на -∞), right = χ (χ₂ → e^{-itk₂} на +∞).
    """
    k2 = SpectralParameter(lam).k2
    (p1, p2), (c1, c2) = _bounded_profiles(f_t, lam)
    phase = np.exp(1j * k2 * t)
    left = LaxVector(f_t.grid, phase * p1, phase * p2)
    right = LaxVector(f_t.grid, c1 / phase, c2 / phase)
    return JostPair(complex(lam), left, right, JostNormalization.BOUNDED_PROFILE)


def jost_vectors(f_t: SpinorField, jost: JostPair) -> Tuple[LaxVector, LaxVector]:
    """Решения e^{k₁x}M₁φ и e^{-k₁x}M₂χ уравнения Лакса"""
    if jost.normalization is not JostNormalization.BOUNDED_PROFILE:
        raise ParameterError("Требуются ограниченные профили из solve_time_bvp")
    k1 = SpectralParameter(jost.lam).k1
    gauge = gauge_transform(f_t)
    x = f_t.grid.x
    up, down = np.exp(k1 * x), np.exp(-k1 * x)
    first = LaxVector(f_t.grid, up * gauge.m1 * jost.left.phi1, up * np.conj(gauge.m1) * jost.left.phi2)
    second = LaxVector(f_t.grid, down * np.conj(gauge.m2) * jost.right.phi1, down * gauge.m2 * jost.right.phi2)
    return first, second


def evolve_lax_vector(phi: LaxVector, f_before: SpinorField, f_after: SpinorField,
                      lam: complex, dt: float) -> LaxVector:
    """Шаг экспоненциальной средней точки для φₜ = A φ"""
    require_same_grid(phi, f_before)
    require_same_grid(f_before, f_after)
    mid = SpinorField(f_before.grid, 0.5 * (f_before.u + f_after.u), 0.5 * (f_before.v + f_after.v))
    propagator = expm(dt * assemble_A(mid, lam).stacked())
    y = np.stack([phi.phi1, phi.phi2], axis=-1)[..., None]
    out = (propagator @ y)[..., 0]
    return LaxVector(phi.grid, out[:, 0], out[:, 1])
