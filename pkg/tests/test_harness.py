"""
Эксперимент об орбитальной устойчивости: начальные данные, модулированное
расстояние, конвейеры и серии по ε
"""
import numpy as np
import pandas as pd
import pytest

from mtm.errors import ParameterError
from mtm.fields import SpinorField, distance
from mtm.harness import (
    RECORD_COLUMNS,
    ExperimentConfig,
    PerturbationShape,
    PipelineMode,
    make_perturbed_initial,
    modulated_distance,
    records_frame,
    run_backlund_pipeline,
    run_direct,
    run_experiment,
    sweep,
)
from mtm.solitons import SpectralParameter, stationary_soliton

from tests.conftest import HALF_PI


def test_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(gamma0=0.0)
    with pytest.raises(ParameterError):
        ExperimentConfig(gamma0=HALF_PI, epsilon=-0.1)
    with pytest.raises(ValueError):
        ExperimentConfig(gamma0=HALF_PI, pipeline="sideways")
    cfg = ExperimentConfig(gamma0=HALF_PI, pipeline="both", perturbation_shape="random_fourier")
    assert cfg.pipeline is PipelineMode.BOTH
    assert cfg.perturbation_shape is PerturbationShape.RANDOM_FOURIER
    assert cfg.evolution_config().dt == cfg.grid.dx
    assert cfg.lambda0 == pytest.approx(np.exp(0.25j * np.pi))


def test_sample_interval_is_multiple_of_dx():
    cfg = ExperimentConfig(gamma0=HALF_PI, grid_l=20.0, grid_n=1000, sample_every=0.51)
    dx = cfg.grid.dx
    assert cfg.evolution_config().output_stride == cfg.sample_stride == 13
    assert cfg.sample_interval == pytest.approx(13 * dx)
    assert abs(cfg.sample_interval - cfg.sample_every) <= 0.5 * dx
    tiny = ExperimentConfig(gamma0=HALF_PI, grid_l=20.0, grid_n=1000, sample_every=1e-3)
    assert tiny.sample_stride == 1


def test_unperturbed_initial_is_soliton(grid):
    cfg = ExperimentConfig(gamma0=HALF_PI, grid_l=30.0, grid_n=4096)
    f0 = make_perturbed_initial(cfg)
    assert distance(f0, stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, grid)) == 0.0


@pytest.mark.parametrize("shape", list(PerturbationShape))
def test_perturbation_has_requested_size(shape):
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, perturbation_shape=shape, perturbation_seed=7)
    f0 = make_perturbed_initial(cfg)
    base = stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, cfg.grid)
    assert distance(f0, base) == pytest.approx(0.01, abs=1e-12)


def test_perturbation_is_deterministic_and_localized():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, perturbation_seed=11)
    a, b = make_perturbed_initial(cfg), make_perturbed_initial(cfg)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
    other = make_perturbed_initial(ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, perturbation_seed=12))
    assert not np.array_equal(a.u, other.u)
    base = stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, cfg.grid)
    far = np.abs(cfg.grid.x) > 15.0
    assert np.max(np.abs((a.u - base.u)[far])) < 1e-10
    assert np.max(np.abs((a.v - base.v)[far])) < 1e-10


# Модулированное расстояние


def test_distance_to_exact_soliton(grid):
    p = SpectralParameter.on_unit_circle(HALF_PI)
    dist, a_star, theta_star = modulated_distance(stationary_soliton(HALF_PI, 0.0, 0.0, 1.5, grid), p, 1.5)
    assert dist < 1e-8
    assert abs(a_star) < 1e-6
    assert abs(theta_star) < 1e-6


def test_distance_recovers_shift_and_phase(grid):
    gamma = np.pi / 3
    p = SpectralParameter.on_unit_circle(gamma)
    f = stationary_soliton(gamma, -0.7, -1.1, 0.3, grid)
    dist, a_star, theta_star = modulated_distance(f, p, 0.3)
    assert dist < 1e-8
    assert a_star == pytest.approx(0.7, abs=1e-4)
    assert theta_star == pytest.approx(1.1, abs=1e-4)


def test_distance_never_exceeds_unmodulated():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, perturbation_seed=4)
    dist, _, _ = modulated_distance(make_perturbed_initial(cfg), SpectralParameter(cfg.lambda0), 0.0)
    assert 0.0 < dist <= 0.01 + 1e-12


def test_distance_respects_orbit_symmetry():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, perturbation_seed=4)
    grid = cfg.grid
    f = make_perturbed_initial(cfg)
    p = SpectralParameter(cfg.lambda0)
    cells, theta0 = 48, 0.6
    once = f.rolled(cells).phased(-theta0)
    twice = f.rolled(2 * cells).phased(-2 * theta0)
    d1, a1, t1 = modulated_distance(once, p, 0.0)
    d2, a2, t2 = modulated_distance(twice, p, 0.0)
    assert d2 == pytest.approx(d1, abs=1e-8)
    assert a2 - a1 == pytest.approx(cells * grid.dx, abs=1e-6)
    assert abs(np.angle(np.exp(1j * (t2 - t1 - theta0)))) < 1e-6


# Конвейеры


def test_direct_run_on_exact_soliton_converges():
    dists = []
    for n in (1024, 2048):
        cfg = ExperimentConfig(gamma0=HALF_PI, grid_l=30.0, grid_n=n, t_end=2.0)
        records = run_direct(cfg)
        assert records[0].t == 0.0
        assert records[-1].t == pytest.approx(2.0)
        dists.append(max(r.dist for r in records))
    assert dists[1] < 1e-3
    assert dists[1] < max(dists[0] / 2.0, 1e-6)


def test_direct_run_stays_near_orbit():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, grid_n=2048, t_end=5.0)
    records = run_direct(cfg)
    charges = np.array([r.charge for r in records])
    assert max(r.dist for r in records) <= 10 * cfg.epsilon
    assert np.max(np.abs(charges - charges[0])) / charges[0] < 1e-6
    assert 0.0 < records[0].small_norm < 20 * cfg.epsilon
    assert all(np.isnan(r.small_norm) for r in records[1:])


def test_backlund_pipeline_on_exact_soliton():
    cfg = ExperimentConfig(gamma0=HALF_PI, grid_n=4096, t_end=2.0, pipeline=PipelineMode.BACKLUND)
    records = run_backlund_pipeline(cfg)
    assert records[0].small_norm < 1e-6
    assert max(r.dist for r in records) < 1e-4


@pytest.mark.slow
def test_backlund_pipeline_conserves_small_norm():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, grid_n=2048, t_end=20.0,
                           pipeline=PipelineMode.BACKLUND)
    records = run_experiment(cfg)
    norms = np.array([r.small_norm for r in records])
    assert len(records) == 21
    assert np.max(np.abs(norms - norms[0])) / norms[0] < 1e-6


@pytest.mark.slow
def test_both_pipelines_agree():
    cfg = ExperimentConfig(gamma0=HALF_PI, epsilon=0.01, grid_n=2048, t_end=2.0, pipeline=PipelineMode.BOTH)
    records = run_experiment(cfg)
    gaps = np.array([r.pipeline_gap for r in records])
    assert np.all(np.isfinite(gaps))
    assert np.max(gaps) <= 5 * cfg.epsilon
    assert all(r.small_norm > 0 for r in records)


def test_records_frame_columns():
    cfg = ExperimentConfig(gamma0=HALF_PI, grid_n=1024, t_end=0.5)
    frame = records_frame(run_direct(cfg))
    assert list(frame.columns) == RECORD_COLUMNS
    assert frame["lambda_im"].iloc[0] == pytest.approx(np.sin(np.pi / 4), abs=1e-4)


# Серии


@pytest.mark.slow
def test_sweep_scaling():
    template = ExperimentConfig(gamma0=HALF_PI, grid_n=4096, t_end=2.0, pipeline=PipelineMode.BOTH)
    result = sweep(template, [1e-3, 1e-2, 1e-1])
    summary = result.summary
    assert list(summary["epsilon"]) == [1e-3, 1e-2, 1e-1]
    assert (summary["error"] == "").all()
    for column in ("lambda_error", "small_norm0", "max_dist"):
        assert 0.8 <= result.slopes[column] <= 1.2, column
    constants = summary["constant"].to_numpy()
    assert constants.max() / constants.min() < 3.0
    assert set(result.records) == {1e-3, 1e-2, 1e-1}


def test_direct_sweep_reports_all_slopes():
    template = ExperimentConfig(gamma0=HALF_PI, grid_l=20.0, grid_n=1024, t_end=0.5, sample_every=0.5)
    result = sweep(template, [1e-3, 1e-2, 1e-1])
    assert result.summary["small_norm0"].notna().all()
    for column in ("lambda_error", "small_norm0", "max_dist"):
        assert np.isfinite(result.slopes[column]), column
    assert 0.8 <= result.slopes["small_norm0"] <= 1.2


def test_sweep_rejects_repeated_epsilon():
    template = ExperimentConfig(gamma0=HALF_PI, grid_n=1024, t_end=0.1)
    with pytest.raises(ParameterError):
        sweep(template, [0.01, 0.02, 0.01])


def test_sweep_records_failures():
    template = ExperimentConfig(gamma0=HALF_PI, grid_n=1024, t_end=0.1, lambda_guess=1.0)
    result = sweep(template, [0.01, 0.02])
    assert len(result.summary) == 2
    assert result.summary["error"].str.contains("NoEigenvalueFound").all()
    assert np.isnan(result.slopes["lambda_error"])
    assert result.records == {}


def test_sweep_is_independent_of_worker_count():
    template = ExperimentConfig(gamma0=HALF_PI, grid_n=1024, t_end=0.1)
    serial = sweep(template, [0.01, 0.02])
    threaded = sweep(template, [0.01, 0.02], workers=2)
    pd.testing.assert_frame_equal(serial.summary, threaded.summary)


def test_zero_field_is_not_near_orbit(grid):
    p = SpectralParameter.on_unit_circle(HALF_PI)
    dist, _, _ = modulated_distance(SpinorField.zeros(grid), p, 0.0)
    assert dist == pytest.approx(2.0 * np.sqrt(np.pi), rel=1e-6)
