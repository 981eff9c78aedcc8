"""
Интегрирование системы MTM по времени: расщепление Стрэнга
с точным переносом по характеристикам и неявной средней точкой
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

import config
from mtm.errors import ParameterError, StepError
from mtm.fields import SpinorField, derivative, l2_norm_sq, require_same_grid

logger = logging.getLogger(__name__)

Observer = Callable[[float, SpinorField], None]


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Параметры схемы

    Attributes:
        dt: шаг по времени; |dt| должен совпадать с шагом сетки
        t_end: длительность интервала интегрирования
        output_stride: наблюдатель вызывается каждые output_stride шагов
        nonlinear_substeps: число подшагов средней точки в каждом полушаге
        fixed_point_tol: допуск неподвижной точки
        max_fixed_point_iterations: предел итераций неподвижной точки
        t0: начальный момент
    """

    dt: float
    t_end: float
    output_stride: int = 1
    nonlinear_substeps: int = 1
    fixed_point_tol: float = config.FIXED_POINT_TOL
    max_fixed_point_iterations: int = config.FIXED_POINT_MAXITER
    t0: float = 0.0

    def __post_init__(self):
        if self.dt == 0 or not np.isfinite(self.dt):
            raise ParameterError(f"Шаг dt должен быть ненулевым, получено {self.dt}")
        if self.t_end <= 0:
            raise ParameterError(f"t_end должно быть положительным, получено {self.t_end}")
        if self.output_stride < 1 or self.nonlinear_substeps < 1:
            raise ParameterError("output_stride и nonlinear_substeps должны быть не меньше 1")
        if self.fixed_point_tol <= 0 or self.max_fixed_point_iterations < 1:
            raise ParameterError("Некорректные параметры неподвижной точки")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / abs(self.dt)))


def _require_characteristic_grid(f: SpinorField, cfg: EvolutionConfig):
    grid = f.grid
    if not grid.periodic:
        raise ParameterError("Перенос по характеристикам требует периодической сетки")
    if abs(abs(cfg.dt) - grid.dx) > 1e-12 * grid.dx:
        raise ParameterError(f"Требуется |dt| = dx = {grid.dx:.17g}, получено dt = {cfg.dt:.17g}")


def _local_rhs(u: NDArray, v: NDArray) -> Tuple[NDArray, NDArray]:
    """u̇ = i(v + u|v|²), v̇ = i(u + v|u|²)"""
    return 1j * (v + u * np.abs(v) ** 2), 1j * (u + v * np.abs(u) ** 2)


def _midpoint(u: NDArray, v: NDArray, h: float, cfg: EvolutionConfig) -> Tuple[NDArray, NDArray]:
    """Один шаг неявной средней точки; предиктор: явный Эйлер"""
    du, dv = _local_rhs(u, v)
    u1, v1 = u + h * du, v + h * dv
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
    for iteration in range(cfg.max_fixed_point_iterations):
        du, dv = _local_rhs(0.5 * (u + u1), 0.5 * (v + v1))
        un, vn = u + h * du, v + h * dv
        change = max(float(np.max(np.abs(un - u1))), float(np.max(np.abs(vn - v1))))
        u1, v1 = un, vn
        if change <= cfg.fixed_point_tol * scale:
            return u1, v1
    raise StepError(
        f"Средняя точка не сошлась за {cfg.max_fixed_point_iterations} итераций "
        f"(изменение {change:.3e}): шаг слишком велик для амплитуды поля"
    )


def _nonlinear(u: NDArray, v: NDArray, h: float, cfg: EvolutionConfig) -> Tuple[NDArray, NDArray]:
    sub = h / cfg.nonlinear_substeps
    for _ in range(cfg.nonlinear_substeps):
        u, v = _midpoint(u, v, sub, cfg)
    return u, v


def step(f: SpinorField, cfg: EvolutionConfig) -> SpinorField:
    """
    Один шаг Стрэнга: нелинейный полушаг, перенос на одну ячейку, нелинейный полушаг

    u переносится вправо, v влево (при dt < 0 наоборот).

    Raises:
        ParameterError: |dt| ≠ dx или сетка не периодическая
        StepError: неподвижная точка не сошлась
    """
    _require_characteristic_grid(f, cfg)
    half = 0.5 * cfg.dt
    u, v = _nonlinear(f.u, f.v, half, cfg)
    shift = 1 if cfg.dt > 0 else -1
    u, v = np.roll(u, shift), np.roll(v, -shift)
    u, v = _nonlinear(u, v, half, cfg)
    return SpinorField(f.grid, u, v)


def evolve(f0: SpinorField, cfg: EvolutionConfig, observer: Optional[Observer] = None) -> SpinorField:
    """
    Интегрирует от cfg.t0 на round(t_end/|dt|) шагов

    Наблюдатель получает (t, поле) в начальный момент, каждые output_stride
    шагов и в конечный момент.
    """
    _require_characteristic_grid(f0, cfg)
    n_steps = cfg.n_steps
    f = f0
    if observer is not None:
        observer(cfg.t0, f)
    logger.debug("Эволюция: %d шагов, dt = %.6g", n_steps, cfg.dt)
    for k in range(1, n_steps + 1):
        f = step(f, cfg)
        if observer is not None and (k % cfg.output_stride == 0 or k == n_steps):
            observer(cfg.t0 + k * cfg.dt, f)
    return f


def charge(f: SpinorField) -> float:
    """Сохраняющийся заряд ‖u‖² + ‖v‖²"""
    return l2_norm_sq(f)


class ChargeMonitor:
    """Отслеживает относительный дрейф заряда от начального значения"""

    def __init__(self, f0: SpinorField):
        self.initial = charge(f0)
        self.max_drift = 0.0

    def drift(self, f: SpinorField) -> float:
        value = charge(f)
        if self.initial == 0:
            drift = abs(value)
        else:
            drift = abs(value - self.initial) / self.initial
        self.max_drift = max(self.max_drift, drift)
        return drift

    def __call__(self, t: float, f: SpinorField):
        drift = self.drift(f)
        logger.debug("t = %.4f: дрейф заряда %.3e", t, drift)


def mtm_residual(f_before: SpinorField, f_after: SpinorField, dt: float, interior: int = 2) -> float:
    """L²-невязка системы MTM между снимками в t и t + dt, центрированная по времени"""
    require_same_grid(f_before, f_after)
    grid = f_before.grid
    u = 0.5 * (f_before.u + f_after.u)
    v = 0.5 * (f_before.v + f_after.v)
    ru = 1j * ((f_after.u - f_before.u) / dt + derivative(u, grid)) + v + u * np.abs(v) ** 2
    rv = 1j * ((f_after.v - f_before.v) / dt - derivative(v, grid)) + u + v * np.abs(u) ** 2
    sl = slice(interior, grid.n - interior) if interior else slice(None)
    dens = np.abs(ru[sl]) ** 2 + np.abs(rv[sl]) ** 2
    return float(np.sqrt(grid.dx * np.sum(dens)))
