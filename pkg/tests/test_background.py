"""Potentials, gauge transforms, phase solver, and the conjugation identity."""

import math

import numpy as np
import pytest

from qed1d import background as bg
from qed1d.lattice import ConfigurationError, Lattice

LAT = Lattice(length=2 * math.pi, cutoff=16)


def test_background_validation():
    zero = lambda z, t: np.zeros_like(z)
    with pytest.raises(ConfigurationError):
        bg.Background(zero, zero, time_step=0.0)
    with pytest.raises(ConfigurationError):
        bg.Background(zero, zero, horizon=-1.0)
    with pytest.raises(ConfigurationError):
        bg.Background(zero, zero, fd_step=0.0)
    with pytest.raises(ConfigurationError):
        bg.Background(zero, zero, band=-2)
    with pytest.raises(ConfigurationError):
        bg.uniform_potential("a2")


def test_time_samples_cover_horizon():
    pot = bg.zero_potential(time_step=0.01, horizon=1.0)
    times = bg.time_samples(pot)
    assert times[0] == 0.0
    assert times[-1] == 1.0
    assert times.size == 101
    # non-dividing step: rounded up, never coarser than requested
    pot = bg.zero_potential(time_step=0.03, horizon=0.1)
    times = bg.time_samples(pot)
    assert times[-1] == 0.1 and times.size == 5


def test_electric_field_analytic():
    # a0 = 0.3 cos(z) with a flat envelope: E = -da0/dz = 0.3 sin(z)
    pot = bg.harmonic_pulse(amplitude=0.3, harmonic=1, center=0.0, width=1e9)
    z = LAT.grid()
    field = bg.electric_field(LAT, pot, 0.0)
    assert np.abs(field - 0.3 * np.sin(z)).max() < 1e-13
    const = bg.uniform_potential("a0", amplitude=0.7)
    assert np.abs(bg.electric_field(LAT, const, 0.3)).max() < 1e-11


def test_electric_field_series_needs_three_samples():
    pot = bg.zero_potential()
    with pytest.raises(bg.InsufficientDataError):
        bg.electric_field_series(LAT, pot, [0.0, 0.1])
    series = bg.electric_field_series(LAT, pot, [0.0, 0.1, 0.2])
    assert series.shape == (3, LAT.npoints)
    assert np.abs(series).max() == 0.0


def test_pure_gauge_field_vanishes():
    gauge = bg.harmonic_gauge(amplitude=0.3, harmonic=3, frequency=2.0)
    pot = bg.pure_gauge_potential(LAT, gauge)
    times = np.linspace(0.0, 1.0, 11)
    assert np.abs(bg.electric_field_series(LAT, pot, times)).max() < 1e-8


def test_gauge_transform_identity_and_uniform():
    pot = bg.zero_potential()
    unchanged = bg.gauge_transform(LAT, pot, bg.GaugeFunction(lambda z, t: np.zeros_like(z)))
    z = LAT.grid()
    assert np.array_equal(unchanged.a0(z, 0.4), pot.a0(z, 0.4))
    assert np.abs(unchanged.a1(z, 0.4)).max() < 1e-12
    # chi = t: shifts a0 to 1, leaves a1 and E at zero
    shifted = bg.gauge_transform(LAT, pot, bg.uniform_gauge(1.0))
    assert np.abs(shifted.a0(z, 0.7) - 1.0).max() < 1e-9
    assert np.abs(shifted.a1(z, 0.7)).max() < 1e-14
    assert np.abs(bg.electric_field(LAT, shifted, 0.7)).max() < 1e-9


def test_gauge_transform_preserves_field():
    pot = bg.harmonic_pulse(amplitude=0.05, harmonic=1, center=0.5, width=0.2)
    gauge = bg.harmonic_gauge(amplitude=0.3, harmonic=3, frequency=2.0)
    twisted = bg.gauge_transform(LAT, pot, gauge)
    times = np.linspace(0.0, 1.0, 11)
    before = bg.electric_field_series(LAT, pot, times)
    after = bg.electric_field_series(LAT, twisted, times)
    assert np.abs(before - after).max() < 1e-8


def test_gauge_transform_grid_mismatch():
    pot = bg.zero_potential()
    twisted = bg.gauge_transform(LAT, pot, bg.harmonic_gauge())
    with pytest.raises(ConfigurationError):
        twisted.a1(np.zeros(4), 0.0)


def test_phases_constant_a0():
    pot = bg.uniform_potential("a0", amplitude=0.3, horizon=0.5)
    phases = bg.solve_phases(LAT, pot)
    t = phases.times[-1]
    assert np.abs(phases.c1[-1] - 0.3 * t).max() < 1e-12
    assert np.abs(phases.c2[-1] - 0.3 * t).max() < 1e-12


def test_phases_constant_a1():
    pot = bg.uniform_potential("a1", amplitude=0.25, horizon=0.5)
    phases = bg.solve_phases(LAT, pot)
    t = phases.times[-1]
    assert np.abs(phases.c1[-1] + 0.25 * t).max() < 1e-12
    assert np.abs(phases.c2[-1] - 0.25 * t).max() < 1e-12


def test_phases_traveling_wave():
    pot = bg.traveling_wave(amplitude=0.2, harmonic=2, horizon=0.5)
    phases = bg.solve_phases(LAT, pot)
    z = LAT.grid()
    for n in (10, 25, 50):
        t = phases.times[n]
        assert np.abs(phases.c1[n] - 0.2 * t * np.cos(2 * (z - t))).max() < 1e-12
    assert np.abs(phases.c2).max() == 0.0


def test_phases_charge_factor():
    lat = Lattice(length=2 * math.pi, cutoff=16, charge=1.7)
    pot = bg.uniform_potential("a0", amplitude=0.3, horizon=0.5)
    phases = bg.solve_phases(lat, pot)
    t = phases.times[-1]
    assert np.abs(phases.c1[-1] - 1.7 * 0.3 * t).max() < 1e-12


def test_solve_phases_cfl_guard():
    pot = bg.zero_potential(time_step=0.2)  # spacing at cutoff 16 is ~0.19
    with pytest.raises(ConfigurationError):
        bg.solve_phases(LAT, pot)


def test_phase_field_validation():
    with pytest.raises(ConfigurationError):
        bg.PhaseField(np.array([0.0, 0.1]), np.ones((2, 5)), np.zeros((2, 5)))
    with pytest.raises(ConfigurationError):
        bg.PhaseField(np.array([0.0, 0.1]), np.zeros((3, 5)), np.zeros((3, 5)))
    field = bg.PhaseField(np.array([0.0, 0.1]), np.zeros((2, 5)), np.zeros((2, 5)))
    with pytest.raises(ConfigurationError):
        field.slice_index(0.05)


def test_residual_tiers():
    # closed-form cases: residual at rounding level
    for pot in (
        bg.uniform_potential("a0", amplitude=0.3, horizon=0.5),
        bg.uniform_potential("a1", amplitude=0.25, horizon=0.5),
        bg.traveling_wave(amplitude=0.2, harmonic=2, horizon=0.5),
    ):
        phases = bg.solve_phases(LAT, pot)
        r1, r2 = bg.phase_residuals(LAT, pot, phases)
        assert max(r1, r2) < 1e-12
    # generic band-limited pulse: bounded by the solver's step error
    pot = bg.harmonic_pulse(
        amplitude=0.05, harmonic=1, center=0.5, width=0.2, time_step=0.002
    )
    phases = bg.solve_phases(LAT, pot)
    r1, r2 = bg.phase_residuals(LAT, pot, phases)
    assert max(r1, r2) < 1e-6


def test_residuals_need_seven_slices():
    pot = bg.zero_potential(time_step=0.05, horizon=0.2)
    phases = bg.solve_phases(LAT, pot)
    with pytest.raises(bg.InsufficientDataError):
        bg.phase_residuals(LAT, pot, phases)


def test_phase_linearity():
    first = bg.harmonic_pulse(amplitude=0.05, harmonic=1, center=0.5, width=0.2, horizon=0.5)
    second = bg.traveling_wave(amplitude=0.1, harmonic=2, horizon=0.5)
    both = bg.combine(first, second)
    pa = bg.solve_phases(LAT, first)
    pb = bg.solve_phases(LAT, second)
    pc = bg.solve_phases(LAT, both)
    assert np.abs(pc.c1 - pa.c1 - pb.c1).max() < 1e-12
    assert np.abs(pc.c2 - pa.c2 - pb.c2).max() < 1e-12


def test_build_w_and_f():
    n = LAT.npoints
    times = np.array([0.0, 1.0])
    c1 = np.stack([np.zeros(n), math.pi * np.ones(n)])
    c2 = np.zeros((2, n))
    phases = bg.PhaseField(times, c1, c2)
    w0 = bg.build_W(phases, 0.0)
    assert np.array_equal(w0, np.ones((2, n), dtype=complex))
    assert np.abs(bg.build_F(phases, 0.0)).max() == 0.0
    w1 = bg.build_W(phases, 1.0)
    assert np.abs(w1[0] + 1.0).max() < 1e-15  # e^{-i pi} = -1
    assert np.abs(w1[1] - 1.0).max() < 1e-15
    # unitarity and sigma3 conjugation at every grid point
    for w in (w0, w1):
        assert np.abs(np.abs(w) - 1.0).max() < 1e-14
        sigma3_conj = np.conj(w) * np.array([[1.0], [-1.0]]) * w
        assert np.abs(sigma3_conj - np.array([[1.0], [-1.0]])).max() < 1e-14
    # exp(-iF) reproduces W
    f1 = bg.build_F(phases, 1.0)
    assert np.abs(np.exp(-1j * f1) - w1).max() < 1e-14


def test_f_uniform_potential_is_z_independent():
    pot = bg.uniform_potential("a0", amplitude=0.4, frequency=2.0, horizon=0.5)
    phases = bg.solve_phases(LAT, pot)
    f = bg.build_F(phases, 0.5)
    assert np.ptp(f[0]) < 1e-13
    assert np.ptp(f[1]) < 1e-13


def test_conjugation_residual_tiers():
    pot0 = bg.zero_potential(horizon=0.2)
    ph0 = bg.solve_phases(LAT, pot0)
    assert bg.conjugated_hamiltonian_check(LAT, pot0, ph0, 0.2) == 0.0

    potu = bg.uniform_potential("a0", amplitude=0.4, frequency=2.0, horizon=0.5)
    phu = bg.solve_phases(LAT, potu)
    assert bg.conjugated_hamiltonian_check(LAT, potu, phu, 0.5) < 1e-12

    potg = bg.harmonic_pulse(amplitude=0.05, harmonic=1, center=0.5, width=0.2)
    phg = bg.solve_phases(LAT, potg)
    assert bg.conjugated_hamiltonian_check(LAT, potg, phg, 1.0) < 1e-6


def test_preset_registry():
    lat = Lattice(length=5.0, cutoff=3)
    for name in ("zero", "uniform-a0", "uniform-a1", "gaussian-pulse-a0", "traveling-wave"):
        pot = bg.background_preset(lat, name, horizon=0.5)
        assert pot.horizon == 0.5
    pot = bg.background_preset(lat, "pure-gauge", {"gauge": "harmonic", "amplitude": 0.2})
    times = np.linspace(0.0, 1.0, 9)
    assert np.abs(bg.electric_field_series(lat, pot, times)).max() < 1e-8
    with pytest.raises(ConfigurationError):
        bg.background_preset(lat, "nope")
    with pytest.raises(ConfigurationError):
        bg.gauge_preset(lat, "nope")
