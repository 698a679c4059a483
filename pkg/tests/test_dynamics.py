"""Evolution engine: both pictures, their agreement, and the energy checks."""

import numpy as np
import pytest

from qed1d import background as bg
from qed1d import dynamics as dy
from qed1d import fockspace as fk
from qed1d.lattice import (
    ConfigurationError,
    InvalidModeError,
    Lattice,
    ResourceError,
    integrate,
)

LAT = Lattice(cutoff=3)
GRID = LAT.grid()


def uniform_a0(**kw):
    return bg.uniform_potential("a0", 0.4, frequency=2.0, time_step=0.01, horizon=1.0, **kw)


def pulse(amplitude, time_step=0.004, horizon=1.0):
    return bg.harmonic_pulse(
        amplitude=amplitude, harmonic=1, center=0.5, width=0.2,
        time_step=time_step, horizon=horizon,
    )


# ---------------------------------------------------------------------------
# result types


def test_expectation_series_validation():
    times = np.linspace(0.0, 1.0, 5)
    ok = np.zeros((5, GRID.size))
    dy.ExpectationSeries(times, GRID, ok, ok, np.zeros(5))
    with pytest.raises(ConfigurationError):
        dy.ExpectationSeries(times, GRID, ok[:, :-1], ok, np.zeros(5))
    with pytest.raises(ConfigurationError):
        dy.ExpectationSeries(times, GRID, ok, ok, np.zeros(4))
    bad = ok.astype(complex) + 1e-6j
    with pytest.raises(ConfigurationError):
        dy.ExpectationSeries(times, GRID, bad, ok, np.zeros(5))


def test_evolution_result_validation():
    vac = fk.vacuum_standard(LAT)
    times = np.array([0.0, 0.5])
    states = np.stack([vac, vac]).astype(complex)
    dy.EvolutionResult(times, states, "numeric-stepper")
    dy.EvolutionResult(times, None, "heisenberg")
    with pytest.raises(ConfigurationError):
        dy.EvolutionResult(times, states, "midpoint")
    with pytest.raises(ConfigurationError):
        dy.EvolutionResult(times, None, "numeric-stepper")
    with pytest.raises(ConfigurationError):
        dy.EvolutionResult(times, states, "heisenberg")
    with pytest.raises(ConfigurationError):
        dy.EvolutionResult(times, 0.9 * states, "analytic-factored")
    with pytest.raises(ConfigurationError):
        dy.EvolutionResult(times[:1], states, "numeric-stepper")


# ---------------------------------------------------------------------------
# Heisenberg route


def test_heisenberg_two_electron_profile():
    lat = Lattice(cutoff=3, charge=0.7)
    state = fk.two_electron_state(lat, 2, 1)
    times = np.linspace(0.0, 1.0, 11)
    series = dy.heisenberg_expectation(lat, state, times)
    z = lat.grid()
    expected = (lat.charge / lat.length) * (
        1.0 + np.cos((2 - 1) * lat.kappa * (z[None, :] - times[:, None]))
    )
    assert np.abs(series.current - expected).max() < 1e-13
    # total charge above the sea rides along unchanged
    per_time = series.charge.sum(axis=1) * lat.spacing
    assert np.abs(per_time - per_time[0]).max() < 1e-12
    # free energy constant, equal to sea value plus the pair gap
    sea = -2.0 * lat.kappa * (1 + 2 + 3)
    gap = (2 + 1) * lat.kappa / 2
    assert np.abs(series.energy - (sea + gap)).max() < 1e-12


def test_heisenberg_vacuum_is_static():
    vac = fk.vacuum_standard(LAT)
    series = dy.heisenberg_expectation(LAT, vac, np.linspace(0.0, 2.0, 9))
    assert np.abs(series.current).max() == 0.0
    # raw charge density of the filled sea: one positron per mode and spin
    assert np.allclose(series.charge, LAT.charge * 2 * LAT.cutoff / LAT.length, atol=1e-13)


def test_heisenberg_requires_times_or_phases():
    with pytest.raises(ConfigurationError):
        dy.heisenberg_expectation(LAT, fk.vacuum_standard(LAT))


def test_continuity_residuals_small():
    state = fk.two_electron_state(LAT, 2, 1)
    times = np.arange(0.0, 0.201, 0.01)
    series = dy.heisenberg_expectation(LAT, state, times)
    r1, r2 = dy.continuity_residuals(LAT, series)
    assert r1 < 1e-12
    assert r2 < 1e-12


def test_continuity_needs_enough_uniform_samples():
    state = fk.two_electron_state(LAT, 2, 1)
    short = dy.heisenberg_expectation(LAT, state, np.linspace(0.0, 0.1, 5))
    with pytest.raises(bg.InsufficientDataError):
        dy.continuity_residuals(LAT, short)
    uneven = dy.heisenberg_expectation(LAT, state, np.array([0.0, 0.01, 0.03, 0.07, 0.1, 0.12, 0.2]))
    with pytest.raises(ConfigurationError):
        dy.continuity_residuals(LAT, uneven)


# ---------------------------------------------------------------------------
# Schrödinger route


def test_numeric_zero_potential_matches_free_phases():
    state = fk.two_electron_state(LAT, 2, 1)
    pot = bg.zero_potential(time_step=0.01, horizon=0.5)
    result = dy.schrodinger_evolve_numeric(LAT, state, pot, store_every=10)
    e_up = fk.free_energies_sector(LAT, +1)
    e_down = fk.free_energies_sector(LAT, -1)
    energies = (e_down[:, None] + e_up[None, :]).reshape(-1)
    for t, got in zip(result.times, result.states):
        exact = state * np.exp(-1j * energies * t)
        assert dy.fidelity(got, exact) >= 1.0 - 1e-9
    assert np.abs(np.linalg.norm(result.states, axis=1) - 1.0).max() < 1e-12


def test_numeric_rejects_oversized_cutoff():
    lat = Lattice(cutoff=5)
    state = np.zeros(2, dtype=complex)
    with pytest.raises(ResourceError):
        dy.schrodinger_evolve_numeric(lat, state, bg.zero_potential())


def test_store_every_keeps_final_state():
    vac = fk.vacuum_standard(LAT)
    pot = uniform_a0()
    result = dy.schrodinger_evolve_numeric(LAT, vac, pot, store_every=7)
    assert result.times[0] == 0.0
    assert result.times[-1] == pytest.approx(1.0)
    assert result.states.shape[0] == result.times.size


def test_analytic_equals_numeric_for_uniform_potential():
    state = fk.two_electron_state(LAT, 2, 1)
    pot = uniform_a0()
    numeric = dy.schrodinger_evolve_numeric(LAT, state, pot, store_every=20)
    phases = bg.solve_phases(LAT, pot)
    analytic = dy.schrodinger_evolve_analytic(LAT, state, pot, phases, store_every=20)
    assert analytic.method == "analytic-factored"
    for a, b in zip(numeric.states, analytic.states):
        assert dy.fidelity(a, b) >= 1.0 - 1e-12


def test_analytic_band_limited_fidelity():
    lat = Lattice(cutoff=2)
    state = fk.two_electron_state(lat, 2, 1)
    pot = pulse(0.6)
    numeric = dy.schrodinger_evolve_numeric(lat, state, pot, store_every=10**9)
    phases = bg.solve_phases(lat, pot)
    analytic = dy.schrodinger_evolve_analytic(lat, state, pot, phases, store_every=10**9)
    assert dy.fidelity(numeric.states[-1], analytic.states[-1]) >= 1.0 - 1e-3


def test_doubling_defect_converged():
    state = fk.two_electron_state(LAT, 2, 1)
    pot = pulse(0.6)
    phases = bg.solve_phases(LAT, pot)
    reference = dy.schrodinger_evolve_analytic(
        LAT, state, pot, phases, store_every=10**9
    ).states[-1]
    assert dy.stepper_doubling_defect(LAT, state, pot, reference) < 1e-10
    assert dy.stepper_doubling_defect(LAT, state, uniform_a0()) < 1e-12


# ---------------------------------------------------------------------------
# cross-route agreement and gauge shifts


def test_picture_equivalence_uniform_scenarios():
    state = fk.two_electron_state(LAT, 2, 1)
    for pot in (
        uniform_a0(),
        bg.uniform_potential("a1", 0.5, frequency=3.0, time_step=0.01, horizon=1.0),
    ):
        gaps = dy.picture_equivalence_check(LAT, state, pot, store_every=10)
        assert gaps["current"] < 1e-12
        assert gaps["charge"] < 1e-12
        assert gaps["energy"] < 1e-12


def test_gauge_shift_uniform_chi():
    state = fk.two_electron_state(LAT, 2, 1)
    gaps = dy.gauge_invariance_check(
        LAT, state, pulse(0.3), bg.uniform_gauge(0.7), store_every=10
    )
    assert max(gaps.values()) < 1e-12


def test_gauge_shift_band_limited_chi_on_reduced_sea():
    state = fk.vacuum_regularized(LAT, 1)
    pot = bg.zero_potential(time_step=0.004, horizon=1.0)
    gauge = bg.harmonic_gauge(amplitude=0.025, harmonic=2, frequency=np.pi)
    gaps = dy.gauge_invariance_check(LAT, state, pot, gauge, store_every=25)
    assert max(gaps.values()) < 1e-4


# ---------------------------------------------------------------------------
# free-field-energy theorem


def test_energy_theorem_exact_for_vacuum():
    result = dy.energy_theorem_check(LAT, fk.vacuum_standard(LAT), uniform_a0())
    assert result.lhs == 0.0
    assert result.rhs == 0.0
    assert result.relative_error == 0.0


def test_energy_theorem_uniform_scenario():
    result = dy.energy_theorem_check(LAT, fk.two_electron_state(LAT, 2, 1), uniform_a0())
    assert result.relative_error < 1e-12


def test_energy_theorem_band_limited_scenario():
    state = fk.two_electron_state(LAT, 2, 1)
    result = dy.energy_theorem_check(LAT, state, pulse(0.1))
    assert result.relative_error < 1e-3
    assert abs(result.rhs) > 1e-3  # the work integral is genuinely nonzero here


def test_energy_theorem_rejects_magnetic_component():
    pot = bg.uniform_potential("a1", 0.3)
    with pytest.raises(ConfigurationError):
        dy.energy_theorem_check(LAT, fk.vacuum_standard(LAT), pot)


def test_heisenberg_energy_matches_work_integral():
    state = fk.two_electron_state(LAT, 2, 1)
    pot = pulse(0.1)
    phases = bg.solve_phases(LAT, pot)
    series = dy.heisenberg_expectation(LAT, state, phases.times, phases=phases)
    theorem = dy.energy_theorem_check(LAT, state, pot)
    assert abs((series.energy[-1] - series.energy[0]) - theorem.rhs) < 1e-6


def test_heisenberg_energy_correction_vanishes_for_uniform_potential():
    state = fk.two_electron_state(LAT, 2, 1)
    phases = bg.solve_phases(LAT, uniform_a0())
    series = dy.heisenberg_expectation(LAT, state, phases.times[::10], phases=phases)
    base = fk.free_energy_expectation(LAT, state)
    assert np.abs(series.energy - base).max() < 1e-12


# ---------------------------------------------------------------------------
# unboundedness and reduced-sea stability


def test_unboundedness_affine_and_crossing():
    t_f = 2.0
    drives = np.linspace(0.0, 2.0, 9)
    values = [dy.unboundedness_scenario(LAT, 2, 1, f, t_f) for f in drives]
    energies = np.array([v.energy_above_vacuum for v in values])
    # affine in the drive strength: vanishing second differences
    assert np.abs(np.diff(energies, 2)).max() < 1e-14
    gap = (2 + 1) * LAT.kappa / 2
    assert values[0].energy_above_vacuum == pytest.approx(gap, abs=1e-15)
    f_star = values[0].f_star
    assert f_star == pytest.approx(2 * np.pi * (2 + 1) / (3 * t_f), rel=1e-14)
    at_star = dy.unboundedness_scenario(LAT, 2, 1, f_star, t_f)
    assert abs(at_star.energy_above_vacuum) < 1e-14
    beyond = dy.unboundedness_scenario(LAT, 2, 1, 2 * f_star, t_f)
    assert beyond.energy_above_vacuum == pytest.approx(-gap, abs=1e-13)


def test_unboundedness_work_rate_matches_profile_quadrature():
    lat = Lattice(cutoff=3, charge=0.7)
    state = fk.two_electron_state(lat, 2, 1)
    series = dy.heisenberg_expectation(lat, state, np.array([0.3]))
    quad = integrate(series.current[0] ** 2, lat)
    assert quad == pytest.approx(1.5 * lat.charge**2 / lat.length, rel=1e-12)
    scenario = dy.unboundedness_scenario(lat, 2, 1, 1.0, 2.0)
    assert scenario.slope == pytest.approx(-2.0 * quad, rel=1e-12)


def test_unboundedness_validation():
    with pytest.raises(ConfigurationError):
        dy.unboundedness_scenario(LAT, 2, 2, 0.1, 1.0)
    with pytest.raises(InvalidModeError):
        dy.unboundedness_scenario(LAT, 4, 1, 0.1, 1.0)
    with pytest.raises(InvalidModeError):
        dy.unboundedness_scenario(LAT, 2, 0, 0.1, 1.0)
    with pytest.raises(ConfigurationError):
        dy.unboundedness_scenario(LAT, 2, 1, -0.1, 1.0)
    with pytest.raises(ConfigurationError):
        dy.unboundedness_scenario(LAT, 2, 1, 0.1, 0.0)


def test_reduced_sea_current_vanishes_and_energy_persists():
    pot = bg.harmonic_pulse(
        amplitude=0.05, harmonic=1, center=12.0, width=3.0, time_step=0.01, horizon=24.0
    )
    result = dy.vacuum_stability_check(LAT, 1, pot, store_every=10**9)
    assert result.current_max == 0.0
    assert result.energy_drift < 1e-4
