"""
Проверки семейства солитонов, свободных векторов и преобразования Лоренца
"""
import numpy as np
import pytest

from mtm.errors import ParameterError
from mtm.evolution import charge
from mtm.fields import Grid, SpinorField, distance
from mtm.lax import lax_residual
from mtm.solitons import (
    SolitonParams,
    SpectralParameter,
    boost_evaluator,
    free_lax_vector,
    lorentz_boost,
    sech,
    soliton_eigenvector,
    soliton_evaluator,
    soliton_field,
    stationary_evaluator,
    stationary_soliton,
)

from tests.conftest import HALF_PI


def test_stationary_soliton_at_origin(grid):
    f = soliton_field(SpectralParameter(np.exp(0.25j * np.pi)), 0.0, grid)
    j = grid.nearest_index(0.0)
    assert f.u[j] == pytest.approx(1j * np.sqrt(2.0), abs=1e-14)
    assert f.v[j] == pytest.approx(-1j * np.sqrt(2.0), abs=1e-14)


def test_unit_circle_parameters():
    p = SpectralParameter.on_unit_circle(HALF_PI)
    assert p.nu == pytest.approx(0.0, abs=1e-15)
    assert p.alpha == pytest.approx(1.0, abs=1e-15)
    assert p.beta == pytest.approx(0.0, abs=1e-15)
    assert p.k1 == pytest.approx(-0.5, abs=1e-15)


def test_moving_soliton_velocity():
    p = SpectralParameter.from_polar(2.0, HALF_PI)
    assert p.nu == pytest.approx(15.0 / 17.0, rel=1e-14)


@pytest.mark.parametrize("delta", [0.5, 1.0, 1.7, 3.0])
@pytest.mark.parametrize("gamma", [0.3, HALF_PI, 2.5])
def test_rapidity_identities(delta, gamma):
    p = SpectralParameter.from_polar(delta, gamma)
    cosh_rapidity = 0.5 * (delta ** 2 + delta ** -2)
    assert p.alpha ** 2 + p.beta ** 2 == pytest.approx(cosh_rapidity ** 2, rel=1e-13)
    assert abs(p.nu) < 1.0
    assert p.gamma == pytest.approx(gamma, rel=1e-14)
    assert p.delta == pytest.approx(delta, rel=1e-14)


@pytest.mark.parametrize("gamma", [0.0, np.pi, -0.5, 4.0])
def test_gamma_outside_range_rejected(grid, gamma):
    with pytest.raises(ParameterError):
        stationary_soliton(gamma, 0.0, 0.0, 0.0, grid)


def test_zero_lambda_rejected():
    with pytest.raises(ParameterError):
        SpectralParameter(0.0)


def test_orbit_parameters_reduce_theta():
    params = SolitonParams(SpectralParameter.on_unit_circle(HALF_PI), a=1.0, theta=7.0)
    assert params.theta == pytest.approx(7.0 - 2.0 * np.pi, abs=1e-15)


def test_sech_has_no_overflow_far_out():
    z = np.array([800.0 - 0.3j, -800.0 + 0.3j, 0.0])
    values = sech(z)
    assert np.all(np.isfinite(values))
    assert abs(values[0]) < 1e-300
    assert values[2] == pytest.approx(1.0)


def test_stationary_matches_general_formula(grid):
    p = SpectralParameter.on_unit_circle(1.1)
    for t in (0.0, 0.8):
        general = soliton_field(p, t, grid)
        closed = stationary_soliton(1.1, 0.0, 0.0, t, grid)
        assert np.max(np.abs(general.u - closed.u)) < 1e-13
        assert np.max(np.abs(general.v - closed.v)) < 1e-13


def test_phase_pi_negates(grid):
    f = stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, grid)
    g = stationary_soliton(HALF_PI, 0.0, np.pi, 0.0, grid)
    assert np.allclose(g.u, -f.u, atol=1e-14)
    assert np.allclose(g.v, -f.v, atol=1e-14)


def test_shift_moves_profile(grid):
    cells = 64
    a = cells * grid.dx
    base = stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, grid)
    shifted = stationary_soliton(HALF_PI, -a, 0.0, 0.0, grid)
    assert distance(shifted, base.rolled(cells)) < 1e-12


@pytest.mark.parametrize("gamma", [np.pi / 8, np.pi / 4, HALF_PI, 3 * np.pi / 4])
def test_charge_equals_four_gamma(grid, gamma):
    assert charge(stationary_soliton(gamma, 0.0, 0.0, 0.0, grid)) == pytest.approx(4 * gamma, abs=1e-8)


def test_boost_identity(grid):
    evaluator = stationary_evaluator(HALF_PI)
    boosted = lorentz_boost(evaluator, 1.0, 0.4, grid)
    assert distance(boosted, stationary_soliton(HALF_PI, 0.0, 0.0, 0.4, grid)) < 1e-14


@pytest.mark.parametrize("t", [0.0, 0.3])
def test_boost_of_stationary_is_moving_soliton(grid, t):
    boosted = lorentz_boost(stationary_evaluator(HALF_PI), 2.0, t, grid)
    moving = soliton_field(SpectralParameter.from_polar(2.0, HALF_PI), t, grid)
    assert np.max(np.abs(boosted.u - moving.u)) < 1e-10
    assert np.max(np.abs(boosted.v - moving.v)) < 1e-10


def test_boost_preserves_charge(grid):
    boosted = lorentz_boost(stationary_evaluator(HALF_PI), 2.0, 0.0, grid)
    assert charge(boosted) == pytest.approx(4 * HALF_PI, abs=1e-6)


@pytest.mark.parametrize("d1, d2", [(1.5, 1.2), (2.0, 0.5), (0.8, 0.9)])
@pytest.mark.parametrize("t", [0.0, 0.7])
def test_boosts_compose(grid, d1, d2, t):
    evaluator = stationary_evaluator(np.pi / 3, 0.4, 0.2)
    twice = lorentz_boost(boost_evaluator(evaluator, d1), d2, t, grid)
    once = lorentz_boost(evaluator, d1 * d2, t, grid)
    assert np.max(np.abs(twice.u - once.u)) < 1e-10
    assert np.max(np.abs(twice.v - once.v)) < 1e-10


def test_evaluator_matches_field(small_grid):
    p = SpectralParameter.from_polar(1.3, 0.9)
    u, v = soliton_evaluator(p)(small_grid.x, 0.25)
    f = soliton_field(p, 0.25, small_grid)
    assert np.array_equal(u, f.u)
    assert np.array_equal(v, f.v)


def test_free_vector_values(grid):
    phi = free_lax_vector(SpectralParameter.on_unit_circle(HALF_PI), 0.0, grid)
    j = grid.nearest_index(0.0)
    assert phi.phi1[j] == pytest.approx(1.0)
    assert phi.phi2[j] == pytest.approx(1.0)
    assert np.allclose(phi.phi1, np.exp(-0.5 * grid.x), rtol=1e-14)
    assert np.allclose(phi.phi1 * phi.phi2, 1.0, rtol=1e-12)


def test_free_vector_solves_lax_system(grid):
    p = SpectralParameter.from_polar(1.4, 1.0)
    phi = free_lax_vector(p, 0.5, grid)
    scale = np.sqrt(np.max(phi.pointwise_norm_sq()))
    assert lax_residual(SpinorField.zeros(grid), phi, p.lam) / scale < 1e-6


def test_soliton_eigenvector_at_origin(grid):
    psi = soliton_eigenvector(HALF_PI, 0.0, grid)
    j = grid.nearest_index(0.0)
    assert psi.phi1[j] == pytest.approx(np.sqrt(2.0), abs=1e-14)
    assert psi.phi2[j] == pytest.approx(np.sqrt(2.0), abs=1e-14)


def test_soliton_eigenvector_solves_lax_system(grid, soliton):
    psi = soliton_eigenvector(HALF_PI, 0.0, grid)
    assert lax_residual(soliton, psi, np.exp(0.25j * np.pi)) < 1e-6


def test_moving_eigenvector_solves_lax_system(grid):
    p = SpectralParameter.from_polar(2.0, HALF_PI)
    t = 0.6
    psi = soliton_eigenvector(HALF_PI, t, grid, delta=2.0)
    assert lax_residual(soliton_field(p, t, grid), psi, p.lam) < 1e-5


def test_eigenvector_decays_at_both_ends(grid):
    psi = soliton_eigenvector(1.2, 0.0, grid)
    tails = psi.pointwise_norm_sq()[[0, -1]]
    assert np.all(tails < 1e-10)
    assert np.all(np.isfinite(psi.phi1)) and np.all(np.isfinite(psi.phi2))


def test_wide_grid_has_no_overflow():
    wide = Grid.symmetric(400.0, 8192)
    f = stationary_soliton(0.2, 0.0, 0.0, 0.0, wide)
    psi = soliton_eigenvector(0.2, 0.0, wide)
    assert np.all(np.isfinite(f.u)) and np.all(np.isfinite(psi.phi1))
