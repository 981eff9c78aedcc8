"""
Численный эксперимент об орбитальной устойчивости солитона:
прямая эволюция, конвейер Бэклунда и серии по ε
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq, minimize, minimize_scalar

import config
from mtm.backlund import down_map, up_map
from mtm.errors import MTMError, ParameterError
from mtm.evolution import EvolutionConfig, charge, evolve
from mtm.fields import Grid, SpinorField, distance, norm, require_same_grid
from mtm.lax import EigenResult, JostPair, find_eigenvalue, solve_time_bvp
from mtm.solitons import SpectralParameter, require_gamma, soliton_values, stationary_soliton

logger = logging.getLogger(__name__)


class PipelineMode(Enum):
    DIRECT = "direct"
    BACKLUND = "backlund"
    BOTH = "both"


class PerturbationShape(Enum):
    GAUSSIAN_BUMP = "gaussian_bump"
    RANDOM_FOURIER = "random_fourier"


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Параметры одного прогона

    Attributes:
        gamma0: параметр невозмущенного солитона, γ₀ ∈ (0, π)
        epsilon: L²-размер возмущения (‖δu‖ + ‖δv‖)
        perturbation_seed: зерно генератора
        perturbation_shape: форма возмущения
        grid_l, grid_n: периодическая сетка на [-L, L]
        t_end: длительность эволюции
        sample_every: желаемый интервал между записями; фактический
            интервал sample_interval кратен dx (ближайшее кратное, не меньше dx)
        pipeline: какие конвейеры запускать
        nonlinear_substeps: подшаги нелинейной части
        lambda_guess: начальное приближение λ (по умолчанию e^{iγ₀/2})
    """

    gamma0: float
    epsilon: float = 0.0
    perturbation_seed: int = 0
    perturbation_shape: PerturbationShape = PerturbationShape.GAUSSIAN_BUMP
    grid_l: float = config.GRID_L
    grid_n: int = config.GRID_N
    t_end: float = 20.0
    sample_every: float = 1.0
    pipeline: PipelineMode = PipelineMode.DIRECT
    nonlinear_substeps: int = 1
    lambda_guess: Optional[complex] = None

    def __post_init__(self):
        require_gamma(self.gamma0)
        if self.epsilon < 0 or not np.isfinite(self.epsilon):
            raise ParameterError(f"ε должно быть неотрицательным, получено {self.epsilon}")
        if self.sample_every <= 0:
            raise ParameterError("sample_every должно быть положительным")
        object.__setattr__(self, "perturbation_shape", PerturbationShape(self.perturbation_shape))
        object.__setattr__(self, "pipeline", PipelineMode(self.pipeline))

    @property
    def grid(self) -> Grid:
        return Grid.symmetric(self.grid_l, self.grid_n)

    @property
    def lambda0(self) -> complex:
        return complex(np.exp(0.5j * self.gamma0))

    @property
    def sample_stride(self) -> int:
        return max(1, int(round(self.sample_every / self.grid.dx)))

    @property
    def sample_interval(self) -> float:
        """Фактический интервал между записями: sample_stride·dx"""
        return self.sample_stride * self.grid.dx

    def evolution_config(self) -> EvolutionConfig:
        dx = self.grid.dx
        stride = self.sample_stride
        return EvolutionConfig(dt=dx, t_end=self.t_end, output_stride=stride,
                               nonlinear_substeps=self.nonlinear_substeps)


@dataclass(frozen=True)
class ExperimentRecord:
    """Одна временная выборка эксперимента"""

    t: float
    charge: float
    dist: float
    a_star: float
    theta_star: float
    lam: complex
    small_norm: float = float("nan")
    pipeline_gap: float = float("nan")


@dataclass(frozen=True)
class OrbitFit:
    """Подобранные параметры (a, θ) восстановления и его L²-отклонение от цели"""

    a: float
    theta: float
    gap: float
    reconstruction: SpinorField = field(repr=False)


def _unit_random(rng: np.random.Generator) -> complex:
    return complex(rng.normal(), rng.normal())


def _perturbation(cfg: ExperimentConfig, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Гладкое возмущение с ‖δu‖ + ‖δv‖ = ε"""
    rng = np.random.default_rng(cfg.perturbation_seed)
    x = grid.x
    parts = []
    for _ in range(2):
        if cfg.perturbation_shape is PerturbationShape.GAUSSIAN_BUMP:
            xc = rng.uniform(-2.0, 2.0)
            width = rng.uniform(0.8, 1.5)
            amplitude = _unit_random(rng)
            kappa = rng.uniform(-1.0, 1.0)
            parts.append(amplitude * np.exp(-((x - xc) ** 2) / (2.0 * width ** 2) + 1j * kappa * x))
        else:
            window = np.exp(-x ** 2 / 18.0)
            modes = sum(_unit_random(rng) * np.exp(1j * rng.uniform(-2.0, 2.0) * x) for _ in range(4))
            parts.append(window * modes)
    du, dv = parts
    size = norm(du, grid) + norm(dv, grid)
    return cfg.epsilon * du / size, cfg.epsilon * dv / size


def make_perturbed_initial(cfg: ExperimentConfig) -> SpinorField:
    """Стационарный солитон γ₀ плюс возмущение размера ε (детерминировано зерном)"""
    grid = cfg.grid
    base = stationary_soliton(cfg.gamma0, 0.0, 0.0, 0.0, grid)
    if cfg.epsilon == 0:
        return base
    du, dv = _perturbation(cfg, grid)
    return SpinorField(grid, base.u + du, base.v + dv)


def _correlation_slope(correlation, a: float, h: float = 1e-5) -> float:
    """d|C(a)|²/da центральной разностью"""
    return (abs(correlation(a + h)) ** 2 - abs(correlation(a - h)) ** 2) / (2.0 * h)


def modulated_distance(f: SpinorField, p: SpectralParameter, t: float) -> Tuple[float, float, float]:
    """
    inf по (a, θ) от ‖u − e^{-iθ}u_λ(· − a, t)‖ + ‖v − e^{-iθ}v_λ(· − a, t)‖

    Для каждого a оптимальное θ = −arg(⟨u_λ, u⟩ + ⟨v_λ, v⟩); по a грубый
    перебор с шагом 8dx и ограниченный одномерный поиск. Результат не больше
    немодулированного расстояния.

    Returns:
        Tuple: (dist, a_star, theta_star)
    """
    p.require_soliton_range()
    grid = f.grid
    x = grid.x
    dx = grid.dx

    def correlation(a: float) -> complex:
        su, sv = soliton_values(p, x - a, t)
        return dx * (np.vdot(su, f.u) + np.vdot(sv, f.v))

    def objective(a: float) -> float:
        return -abs(correlation(a))

    def evaluate(a: float, theta: float) -> float:
        su, sv = soliton_values(p, x - a, t)
        phase = np.exp(-1j * theta)
        return norm(f.u - phase * su, grid) + norm(f.v - phase * sv, grid)

    half = 0.25 * grid.length
    scan = np.arange(-half, half + 0.5 * dx, 8.0 * dx)
    values = [objective(a) for a in scan]
    a0 = float(scan[int(np.argmin(values))])
    refined = minimize_scalar(objective, bounds=(a0 - 8.0 * dx, a0 + 8.0 * dx), method="bounded",
                              options={"xatol": 1e-10})
    a_star = float(refined.x)
    # уточнение по нулю производной |C|²
    lo, hi = a_star - dx, a_star + dx
    if _correlation_slope(correlation, lo) * _correlation_slope(correlation, hi) < 0:
        a_star = float(brentq(lambda a: _correlation_slope(correlation, a), lo, hi, xtol=1e-14))
    theta_star = float(-np.angle(correlation(a_star)))
    dist = evaluate(a_star, theta_star)
    plain = evaluate(0.0, 0.0)
    if plain < dist:
        return plain, 0.0, 0.0
    return dist, a_star, theta_star


def fit_orbit_parameters(target: SpinorField, small_field: SpinorField, jost: JostPair, lam: complex,
                         t: float, guess: Optional[Tuple[float, float]] = None) -> OrbitFit:
    """
    Подбирает (a, θ) в up_map так, чтобы восстановление совпало с target

    Начальное приближение берется из модулированных расстояний цели и восстановления
    при (0, 0); уточнение методом Нелдера–Мида по квадрату L²-отклонения.
    """
    require_same_grid(target, small_field)
    p = SpectralParameter(lam)
    if guess is None:
        _, a_d, theta_d = modulated_distance(target, p, t)
        _, a_r, theta_r = modulated_distance(up_map(small_field, jost, lam, 0.0, 0.0), p, t)
        guess = (p.alpha * (a_d - a_r), theta_d - theta_r)

    def objective(params):
        a, theta = params
        recon = up_map(small_field, jost, lam, a, theta)
        return distance(recon, target) ** 2

    result = minimize(objective, np.asarray(guess, dtype=float), method="Nelder-Mead",
                      options={"xatol": 1e-10, "fatol": 1e-24, "maxiter": 800})
    a, theta = (float(v) for v in result.x)
    recon = up_map(small_field, jost, lam, a, theta)
    return OrbitFit(a, theta, distance(recon, target), recon)


def _sampled_evolution(f0: SpinorField, cfg: EvolutionConfig) -> List[Tuple[float, SpinorField]]:
    samples: List[Tuple[float, SpinorField]] = []
    evolve(f0, cfg, lambda t, f: samples.append((t, f)))
    return samples


def _initial_eigenvalue(cfg: ExperimentConfig, f0: SpinorField) -> EigenResult:
    if abs(cfg.sample_interval - cfg.sample_every) > 1e-12 * cfg.sample_every:
        logger.info("Интервал записей %.6g вместо %.6g (кратен dx = %.6g)",
                    cfg.sample_interval, cfg.sample_every, cfg.grid.dx)
    guess = cfg.lambda_guess if cfg.lambda_guess is not None else cfg.lambda0
    res = find_eigenvalue(f0, guess)
    logger.info("ε = %.3g: λ = %s, |λ − λ₀| = %.3e", cfg.epsilon, res.lam, abs(res.lam - cfg.lambda0))
    return res


def _direct_record(t: float, f: SpinorField, lam: complex) -> ExperimentRecord:
    dist, a_star, theta_star = modulated_distance(f, SpectralParameter(lam), t)
    return ExperimentRecord(t, charge(f), dist, a_star, theta_star, lam)


def run_direct(cfg: ExperimentConfig) -> List[ExperimentRecord]:
    """
    Эволюция возмущенного солитона и модулированное расстояние до орбиты λ-солитона

    Первая запись несет ‖(p₀, q₀)‖ отображения вниз при t = 0, остальные small_norm = NaN.
    """
    f0 = make_perturbed_initial(cfg)
    res = _initial_eigenvalue(cfg, f0)
    records = [_direct_record(t, f, res.lam) for t, f in _sampled_evolution(f0, cfg.evolution_config())]
    records[0] = replace(records[0], small_norm=np.sqrt(charge(down_map(f0, res))))
    logger.info("Прямая эволюция: max dist = %.3e", max(r.dist for r in records))
    return records


def run_backlund_pipeline(cfg: ExperimentConfig) -> List[ExperimentRecord]:
    """
    Отображение вниз при t = 0, эволюция малого решения, восстановление в каждый момент

    В режиме BOTH параллельно идет прямая эволюция: параметры (a, θ) подбираются
    по прямому решению, а L²-расхождение записывается в pipeline_gap.
    """
    f0 = make_perturbed_initial(cfg)
    res = _initial_eigenvalue(cfg, f0)
    lam = res.lam
    p = SpectralParameter(lam)
    evo = cfg.evolution_config()
    small_samples = _sampled_evolution(down_map(f0, res), evo)
    direct_samples = _sampled_evolution(f0, evo) if cfg.pipeline is PipelineMode.BOTH else None

    records = []
    guess = None
    for i, (t, small) in enumerate(small_samples):
        jost = solve_time_bvp(small, lam, t)
        small_norm = np.sqrt(charge(small))
        if direct_samples is not None:
            _, direct = direct_samples[i]
            fit = fit_orbit_parameters(direct, small, jost, lam, t, guess)
            guess = (fit.a, fit.theta)
            base = _direct_record(t, direct, lam)
            records.append(replace(base, small_norm=small_norm, pipeline_gap=fit.gap))
            logger.info("t = %.2f: dist = %.3e, ‖(p, q)‖ = %.3e, расхождение = %.3e",
                        t, base.dist, small_norm, fit.gap)
        else:
            recon = up_map(small, jost, lam, 0.0, 0.0)
            dist, a_star, theta_star = modulated_distance(recon, p, t)
            records.append(ExperimentRecord(t, charge(recon), dist, a_star, theta_star, lam, small_norm))
            logger.info("t = %.2f: dist = %.3e, ‖(p, q)‖ = %.3e", t, dist, small_norm)
    return records


def run_experiment(cfg: ExperimentConfig) -> List[ExperimentRecord]:
    if cfg.pipeline is PipelineMode.DIRECT:
        return run_direct(cfg)
    return run_backlund_pipeline(cfg)


RECORD_COLUMNS = ["t", "charge", "dist", "a_star", "theta_star", "lambda_re", "lambda_im",
                  "small_norm", "pipeline_gap"]


def records_frame(records: Sequence[ExperimentRecord]) -> pd.DataFrame:
    rows = []
    for r in records:
        row = asdict(r)
        lam = row.pop("lam")
        row["lambda_re"], row["lambda_im"] = lam.real, lam.imag
        rows.append(row)
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


@dataclass
class SweepResult:
    """Итог серии: строки по ε, наклоны в логарифмических осях и записи прогонов"""

    summary: pd.DataFrame
    slopes: Dict[str, float]
    records: Dict[float, List[ExperimentRecord]]


def _sweep_row(cfg: ExperimentConfig, records: List[ExperimentRecord]) -> dict:
    lam = records[0].lam
    max_dist = max(r.dist for r in records)
    return {
        "epsilon": cfg.epsilon,
        "lambda_re": lam.real,
        "lambda_im": lam.imag,
        "lambda_error": abs(lam - cfg.lambda0),
        "small_norm0": records[0].small_norm,
        "max_dist": max_dist,
        "constant": max_dist / cfg.epsilon if cfg.epsilon > 0 else float("nan"),
        "max_pipeline_gap": float(np.max([r.pipeline_gap for r in records])),
        "error": "",
    }


def _run_one(cfg: ExperimentConfig):
    try:
        return cfg, run_experiment(cfg), None
    except MTMError as e:
        logger.warning("Прогон ε = %.3g не удался: %s", cfg.epsilon, e)
        return cfg, None, f"{type(e).__name__}: {e}"


def _loglog_slope(eps: np.ndarray, values: np.ndarray) -> float:
    mask = np.isfinite(values) & (values > 0) & (eps > 0)
    if np.count_nonzero(mask) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(eps[mask]), np.log(values[mask]), 1)
    return float(slope)


def summary_frame(rows: List[dict]) -> pd.DataFrame:
    columns = ["epsilon", "lambda_re", "lambda_im", "lambda_error", "small_norm0", "max_dist",
               "constant", "max_pipeline_gap", "error"]
    return pd.DataFrame(rows, columns=columns).sort_values("epsilon", ignore_index=True)


def sweep(template: ExperimentConfig, epsilons: Sequence[float], workers: int = 1) -> SweepResult:
    """
    Серия прогонов по ε с общим зерном

    Значения ε должны быть различными: записи прогонов хранятся по ε.
    Ошибка прогона попадает в столбец error, серия продолжается.
    Наклоны считаются для |λ − λ₀|, ‖(p₀, q₀)‖ и max dist.
    """
    values = [float(eps) for eps in epsilons]
    if len(set(values)) != len(values):
        raise ParameterError(f"Повторяющиеся значения ε: {values}")
    configs = [replace(template, epsilon=eps) for eps in values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, configs))
    else:
        outcomes = [_run_one(c) for c in configs]

    rows = []
    runs: Dict[float, List[ExperimentRecord]] = {}
    for cfg, records, error in outcomes:
        if records is None:
            nan = float("nan")
            rows.append({"epsilon": cfg.epsilon, "lambda_re": nan, "lambda_im": nan, "lambda_error": nan,
                         "small_norm0": nan, "max_dist": nan, "constant": nan,
                         "max_pipeline_gap": nan, "error": error})
            continue
        runs[cfg.epsilon] = records
        rows.append(_sweep_row(cfg, records))

    summary = summary_frame(rows)
    eps = summary["epsilon"].to_numpy(dtype=float)
    slopes = {
        column: _loglog_slope(eps, summary[column].to_numpy(dtype=float))
        for column in ("lambda_error", "small_norm0", "max_dist")
    }
    logger.info("Наклоны: %s", slopes)
    return SweepResult(summary, slopes, runs)
