"""Time evolution in both pictures and the checks that compare them.

Schrödinger route: the state marches under the instantaneous quadratic
Hamiltonian, either step by step (midpoint exponential, one dense matrix
exponential per spin sector per step) or in the factored closed form
exp(−iĜ₀(t))·exp(−iĤ₀t) built from the solved phase pair.  Heisenberg route:
current and charge densities of the initial state ride the free
characteristics unchanged — the spin-up profile translates right, spin-down
left — independent of the potential; the free-field energy picks up a phase
correction −(1/2q)∫[J·∂z(c₁+c₂) + ρ·∂z(c₁−c₂)]dz on top of its initial
value.  Agreement of the two routes, invariance under gauge shifts, the
work-energy identity for the free energy, and the linear descent of the
driven two-electron energy are the checks this module exposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from qed1d import background as bg
from qed1d import fockspace as fk
from qed1d.lattice import (
    ConfigurationError,
    InvalidModeError,
    Lattice,
    fourier_coefficients,
    harmonics,
    spectral_derivative,
)

__all__ = [
    "ExpectationSeries",
    "EvolutionResult",
    "EnergyTheoremResult",
    "UnboundednessResult",
    "VacuumStabilityResult",
    "heisenberg_expectation",
    "schrodinger_evolve_numeric",
    "schrodinger_evolve_analytic",
    "expectation_series",
    "free_field_energy",
    "fidelity",
    "stepper_doubling_defect",
    "picture_equivalence_check",
    "continuity_residuals",
    "gauge_invariance_check",
    "energy_theorem_check",
    "unboundedness_scenario",
    "vacuum_stability_check",
]


@dataclass(frozen=True)
class ExpectationSeries:
    """Observable expectations on the space-time grid (one row per time)."""

    times: np.ndarray
    grid: np.ndarray
    current: np.ndarray
    charge: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        grid = np.asarray(self.grid, dtype=float)
        shape = (times.size, grid.size)
        for name in ("current", "charge"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != shape:
                raise ConfigurationError(f"{name} must have shape {shape}, got {arr.shape}")
            if np.iscomplexobj(arr) and np.abs(arr.imag).max(initial=0.0) > 1e-10:
                raise ConfigurationError(f"{name} expectation has a non-real part")
            object.__setattr__(self, name, np.asarray(arr.real, dtype=float))
        energy = np.asarray(self.energy)
        if energy.shape != (times.size,):
            raise ConfigurationError("energy must hold one value per time sample")
        if np.iscomplexobj(energy) and np.abs(energy.imag).max(initial=0.0) > 1e-10:
            raise ConfigurationError("energy expectation has a non-real part")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "energy", np.asarray(energy.real, dtype=float))


EVOLUTION_METHODS = ("numeric-stepper", "analytic-factored", "heisenberg")


@dataclass(frozen=True)
class EvolutionResult:
    """Stored state snapshots of one evolution run.

    ``states`` is None exactly when the run rode the free characteristics
    (method "heisenberg"), where observables never need the state itself.
    """

    times: np.ndarray
    states: np.ndarray | None
    method: str

    def __post_init__(self):
        if self.method not in EVOLUTION_METHODS:
            raise ConfigurationError(
                f"method must be one of {EVOLUTION_METHODS}, got {self.method!r}"
            )
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if (self.states is None) != (self.method == "heisenberg"):
            raise ConfigurationError(
                "state snapshots are stored exactly for the state-marching methods"
            )
        if self.states is None:
            return
        states = np.asarray(self.states)
        if states.shape[0] != times.size:
            raise ConfigurationError("one state snapshot per stored time is required")
        norms = np.linalg.norm(states, axis=1)
        if np.abs(norms - 1.0).max(initial=0.0) > 1e-9:
            raise ConfigurationError("evolution lost normalization beyond 1e-9")
        object.__setattr__(self, "states", states)


# ---------------------------------------------------------------------------
# Heisenberg route


def _harmonic_profile(lat: Lattice, coeffs: np.ndarray, z: np.ndarray, shift: float) -> np.ndarray:
    """Complex samples of Σ_j coeffs_j e^{ijκ(z−shift)} for j = −2Λ..2Λ."""
    order = np.arange(-2 * lat.cutoff, 2 * lat.cutoff + 1)
    phases = np.exp(1j * lat.kappa * np.multiply.outer(z - shift, order))
    return phases @ coeffs


def _real_checked(values: np.ndarray, what: str, tol: float = 1e-10) -> np.ndarray:
    if np.abs(values.imag).max(initial=0.0) > tol:
        raise ConfigurationError(f"{what} came out non-real; observable assembly is broken")
    return values.real


def heisenberg_expectation(
    lat: Lattice,
    state0: np.ndarray,
    times=None,
    phases: bg.PhaseField | None = None,
) -> ExpectationSeries:
    """Observables carried by the freely advected densities of the initial state.

    Current and charge never see the potential: the spin-up density profile of
    ``state0`` translates right at unit speed and the spin-down profile left.
    The energy row is the constant free value unless ``phases`` is given, in
    which case the phase correction that represents the interaction picks up
    the time dependence.
    """
    if times is None:
        if phases is None:
            raise ConfigurationError("either explicit times or a PhaseField is required")
        times = phases.times
    times = np.asarray(times, dtype=float)
    density = fk.one_body_density(lat, state0)
    up = fk.profile_harmonics(lat, density, +1)
    down = fk.profile_harmonics(lat, density, -1)
    z = lat.grid()
    scale = lat.charge / lat.length
    current = np.empty((times.size, z.size))
    charge = np.empty_like(current)
    for n, t in enumerate(times):
        right = _harmonic_profile(lat, up, z, t)
        left = _harmonic_profile(lat, down, z, -t)
        current[n] = _real_checked(scale * (right - left), "current")
        charge[n] = _real_checked(scale * (right + left), "charge")
    base = fk.free_energy_expectation(lat, state0)
    if phases is None:
        energy = np.full(times.size, base)
    else:
        energy = np.array(
            [base + _phase_energy_correction(lat, up, down, phases, t) for t in times]
        )
    return ExpectationSeries(times, z, current, charge, energy)


def _phase_energy_correction(
    lat: Lattice,
    up: np.ndarray,
    down: np.ndarray,
    phases: bg.PhaseField,
    t: float,
) -> float:
    """−(1/2q)∫[J·∂z(c₁+c₂) + ρ·∂z(c₁−c₂)]dz via exact coefficient contraction."""
    idx = phases.slice_index(t)
    order = harmonics(lat)
    sum_hat = fourier_coefficients(phases.c1[idx] + phases.c2[idx], lat)
    diff_hat = fourier_coefficients(phases.c1[idx] - phases.c2[idx], lat)
    scale = lat.charge / lat.length
    mid = 2 * lat.cutoff  # center of the density-harmonic arrays
    total = 0.0 + 0.0j
    for j in order:
        j_cur = scale * (
            up[mid + j] * np.exp(-1j * j * lat.kappa * t)
            - down[mid + j] * np.exp(1j * j * lat.kappa * t)
        )
        j_chg = scale * (
            up[mid + j] * np.exp(-1j * j * lat.kappa * t)
            + down[mid + j] * np.exp(1j * j * lat.kappa * t)
        )
        neg = np.where(order == -j)[0][0]
        d_sum = 1j * (-j) * lat.kappa * sum_hat[neg]
        d_diff = 1j * (-j) * lat.kappa * diff_hat[neg]
        total += j_cur * d_sum + j_chg * d_diff
    value = -lat.length * total / (2 * lat.charge)
    return float(_real_checked(np.asarray(value), "free-energy correction"))


# ---------------------------------------------------------------------------
# Schrödinger route


def _stored_indices(count: int, store_every: int) -> list[int]:
    picks = list(range(0, count, max(1, store_every)))
    if picks[-1] != count - 1:
        picks.append(count - 1)
    return picks


def _sector_hamiltonians(lat: Lattice, pot: bg.Background, t: float):
    z = lat.grid()
    h = fk.dirac_one_body(lat, pot.a0(z, t), pot.a1(z, t), band=pot.band)
    up, down = fk.sector_one_body_blocks(lat, h)
    return fk.sector_quadratic(up), fk.sector_quadratic(down)


def schrodinger_evolve_numeric(
    lat: Lattice, state0: np.ndarray, pot: bg.Background, store_every: int = 1
) -> EvolutionResult:
    """March i∂|Ω⟩/∂t = Ĥ(t)|Ω⟩ with the midpoint exponential, step by step.

    Each step applies exp(−i·dt·Ĥ(t_mid)) factored over the two spin sectors
    (the Hamiltonian never couples them), so unitarity holds to rounding and
    the stepping error is second order in the time step.
    """
    fk._check_cutoff(lat)
    times = bg.time_samples(pot)
    dt = times[1] - times[0]
    keep = _stored_indices(times.size, store_every)
    vec = np.asarray(state0, dtype=complex)
    stored = [vec.copy()] if 0 in keep else []
    for n in range(times.size - 1):
        h_up, h_down = _sector_hamiltonians(lat, pot, times[n] + dt / 2)
        u_up = scipy.linalg.expm(-1j * dt * h_up)
        u_down = scipy.linalg.expm(-1j * dt * h_down)
        vec = fk.apply_sector_operators(lat, vec, u_up, u_down)
        if n + 1 in keep:
            stored.append(vec.copy())
    return EvolutionResult(times[keep], np.array(stored), "numeric-stepper")


def schrodinger_evolve_analytic(
    lat: Lattice,
    state0: np.ndarray,
    pot: bg.Background,
    phases: bg.PhaseField,
    store_every: int = 1,
) -> EvolutionResult:
    """Factored solution exp(−iĜ₀(t))·exp(−iĤ₀t)|Ω(0)⟩ at the solved times.

    Ĝ₀(t) lifts the diagonal multiplication kernel diag(c₁(·,t), c₂(·,t));
    for z-independent potentials the factored form is exact under truncation.
    """
    fk._check_cutoff(lat)
    times = phases.times
    keep = _stored_indices(times.size, store_every)
    e_up = fk.free_energies_sector(lat, +1)
    e_down = fk.free_energies_sector(lat, -1)
    energy_grid = (e_down[:, None] + e_up[None, :]).reshape(-1)
    vec0 = np.asarray(state0, dtype=complex)
    stored = []
    for idx in keep:
        t = times[idx]
        free = vec0 * np.exp(-1j * energy_grid * t)
        kernel = fk.diagonal_kernel_one_body(lat, phases.c1[idx], phases.c2[idx])
        up, down = fk.sector_one_body_blocks(lat, kernel)
        g_up = scipy.linalg.expm(-1j * fk.sector_quadratic(up))
        g_down = scipy.linalg.expm(-1j * fk.sector_quadratic(down))
        stored.append(fk.apply_sector_operators(lat, free, g_up, g_down))
    return EvolutionResult(times[keep], np.array(stored), "analytic-factored")


def expectation_series(lat: Lattice, result: EvolutionResult) -> ExpectationSeries:
    """Current, charge, and free energy read off the stored state snapshots."""
    z = lat.grid()
    scale = lat.charge / lat.length
    current = np.empty((result.times.size, z.size))
    charge = np.empty_like(current)
    energy = np.empty(result.times.size)
    for n, state in enumerate(result.states):
        density = fk.one_body_density(lat, state)
        up_prof = _harmonic_profile(lat, fk.profile_harmonics(lat, density, +1), z, 0.0)
        down_prof = _harmonic_profile(lat, fk.profile_harmonics(lat, density, -1), z, 0.0)
        current[n] = _real_checked(scale * (up_prof - down_prof), "current")
        charge[n] = _real_checked(scale * (up_prof + down_prof), "charge")
        energy[n] = fk.free_energy_expectation(lat, state)
    return ExpectationSeries(result.times, z, current, charge, energy)


def free_field_energy(lat: Lattice, result: EvolutionResult) -> np.ndarray:
    """⟨Ĥ₀⟩ per stored snapshot."""
    return np.array([fk.free_energy_expectation(lat, s) for s in result.states])


def fidelity(first: np.ndarray, second: np.ndarray) -> float:
    """Overlap magnitude |⟨a|b⟩| of two unit state vectors."""
    return float(abs(np.vdot(first, second)))


def stepper_doubling_defect(
    lat: Lattice, state0: np.ndarray, pot: bg.Background, reference: np.ndarray | None = None
) -> float:
    """Sensitivity of the final state to halving the configured time step.

    With a ``reference`` final state the return value is the change in
    end-point fidelity |fid(dt) − fid(dt/2)|; without one it is
    1 − |overlap| between the two numeric finals.  Either way, a small value
    certifies the configured step count has converged.
    """
    coarse = schrodinger_evolve_numeric(lat, state0, pot, store_every=10**9)
    fine_pot = bg.Background(
        pot.a0, pot.a1, pot.time_step / 2, pot.horizon, pot.band, pot.fd_step
    )
    fine = schrodinger_evolve_numeric(lat, state0, fine_pot, store_every=10**9)
    if reference is None:
        return 1.0 - fidelity(coarse.states[-1], fine.states[-1])
    return abs(
        fidelity(coarse.states[-1], reference) - fidelity(fine.states[-1], reference)
    )


# ---------------------------------------------------------------------------
# cross-route checks


def picture_equivalence_check(
    lat: Lattice, state0: np.ndarray, pot: bg.Background, store_every: int = 1
) -> dict[str, float]:
    """Max pointwise gaps between the Schrödinger and Heisenberg observables."""
    numeric = schrodinger_evolve_numeric(lat, state0, pot, store_every)
    series_s = expectation_series(lat, numeric)
    phases = bg.solve_phases(lat, pot)
    series_h = heisenberg_expectation(lat, state0, numeric.times, phases=phases)
    return {
        "current": float(np.abs(series_s.current - series_h.current).max()),
        "charge": float(np.abs(series_s.charge - series_h.charge).max()),
        "energy": float(np.abs(series_s.energy - series_h.energy).max()),
    }


def continuity_residuals(lat: Lattice, series: ExpectationSeries) -> tuple[float, float]:
    """Max residuals of ∂J/∂t + ∂ρ/∂z and ∂ρ/∂t + ∂J/∂z (interior times)."""
    times = series.times
    if times.size < 7:
        raise bg.InsufficientDataError("continuity check needs at least 7 time samples")
    dt = times[1] - times[0]
    if np.abs(np.diff(times) - dt).max() > 1e-9:
        raise ConfigurationError("continuity check requires uniformly spaced times")

    def ddt(arr, n):
        return (
            arr[n + 3] - 9 * arr[n + 2] + 45 * arr[n + 1]
            - 45 * arr[n - 1] + 9 * arr[n - 2] - arr[n - 3]
        ) / (60 * dt)

    worst1 = worst2 = 0.0
    for n in range(3, times.size - 3):
        r1 = ddt(series.current, n) + spectral_derivative(series.charge[n], lat)
        r2 = ddt(series.charge, n) + spectral_derivative(series.current[n], lat)
        worst1 = max(worst1, float(np.abs(r1).max()))
        worst2 = max(worst2, float(np.abs(r2).max()))
    return worst1, worst2


def gauge_invariance_check(
    lat: Lattice,
    state0: np.ndarray,
    pot: bg.Background,
    gauge: bg.GaugeFunction,
    store_every: int = 1,
) -> dict[str, float]:
    """Max observable gaps between a run and its gauge-shifted counterpart."""
    plain = expectation_series(
        lat, schrodinger_evolve_numeric(lat, state0, pot, store_every)
    )
    shifted_pot = bg.gauge_transform(lat, pot, gauge)
    shifted = expectation_series(
        lat, schrodinger_evolve_numeric(lat, state0, shifted_pot, store_every)
    )
    return {
        "current": float(np.abs(plain.current - shifted.current).max()),
        "charge": float(np.abs(plain.charge - shifted.charge).max()),
        "energy": float(np.abs(plain.energy - shifted.energy).max()),
    }


# ---------------------------------------------------------------------------
# free-field-energy theorem and unboundedness


@dataclass(frozen=True)
class EnergyTheoremResult:
    lhs: float
    rhs: float
    relative_error: float


def energy_theorem_check(
    lat: Lattice, state0: np.ndarray, pot: bg.Background
) -> EnergyTheoremResult:
    """Free-energy change vs. the work integral ∫dt∫dz J·E.

    The identity is derived with no magnetic component, so any potential with
    A₁ ≢ 0 is rejected.  The left side comes from the numeric evolution, the
    right side from the freely advected current against the electric field,
    the z-integral contracted exactly in Fourier coefficients and the time
    integral by Simpson quadrature on the solver grid.  The relative error is
    floored at the mode spacing κ so near-zero scenarios stay meaningful.
    """
    times = bg.time_samples(pot)
    z = lat.grid()
    worst_a1 = max(float(np.abs(pot.a1(z, t)).max()) for t in times)
    if worst_a1 > 1e-12:
        raise ConfigurationError(
            "the free-energy identity requires a vanishing spatial component A1"
        )
    numeric = schrodinger_evolve_numeric(lat, state0, pot, store_every=10**9)
    energies = free_field_energy(lat, numeric)
    lhs = float(energies[-1] - energies[0])

    density = fk.one_body_density(lat, state0)
    up = fk.profile_harmonics(lat, density, +1)
    down = fk.profile_harmonics(lat, density, -1)
    order = harmonics(lat)
    mid = 2 * lat.cutoff
    scale = lat.charge / lat.length
    power = np.empty(times.size)
    for n, t in enumerate(times):
        e_hat = fourier_coefficients(bg.electric_field(lat, pot, t), lat)
        total = 0.0 + 0.0j
        for j in order:
            j_cur = scale * (
                up[mid + j] * np.exp(-1j * j * lat.kappa * t)
                - down[mid + j] * np.exp(1j * j * lat.kappa * t)
            )
            neg = np.where(order == -j)[0][0]
            total += j_cur * e_hat[neg]
        power[n] = float(_real_checked(np.asarray(lat.length * total), "power integrand"))
    rhs = float(scipy.integrate.simpson(power, x=times))
    gap = abs(lhs - rhs)
    rel = gap / max(abs(lhs), abs(rhs), lat.kappa)
    return EnergyTheoremResult(lhs, rhs, rel)


@dataclass(frozen=True)
class UnboundednessResult:
    energy_above_vacuum: float
    f_star: float
    slope: float
    gap: float


def unboundedness_scenario(
    lat: Lattice, p: int, q_m: int, f: float, t_f: float
) -> UnboundednessResult:
    """Energy balance of the two-electron state driven by E = −f·J.

    The current of the state is (q/L)(1 + cos((p−q_m)κ(z−t))), so the work
    integral is exactly −f·t_f·(3/2)q²/L and the free energy above vacuum
    descends linearly from the gap (|p|+|q_m|)κ/2, crossing zero at
    f* = gap / (t_f·(3/2)q²/L); any f beyond that leaves the state below the
    free-field ground value — the advertised contradiction.
    """
    for label in (p, q_m):
        if not isinstance(label, int) or not 1 <= label <= lat.cutoff:
            raise InvalidModeError(
                f"electron labels must be integers in [1, {lat.cutoff}], got {label!r}"
            )
    if p == q_m:
        raise ConfigurationError("the two electron labels must differ")
    if f < 0:
        raise ConfigurationError("the drive strength f must be non-negative")
    if t_f <= 0:
        raise ConfigurationError("the horizon t_f must be positive")
    gap = (abs(p) + abs(q_m)) * lat.kappa / 2
    quad_rate = 1.5 * lat.charge**2 / lat.length
    slope = -t_f * quad_rate
    energy = gap + slope * f
    f_star = gap / (t_f * quad_rate)
    return UnboundednessResult(energy, f_star, slope, gap)


@dataclass(frozen=True)
class VacuumStabilityResult:
    current_max: float
    energy_drift: float
    worst_excursion: float


def vacuum_stability_check(
    lat: Lattice, r_cut: int, pot: bg.Background, store_every: int = 1
) -> VacuumStabilityResult:
    """Current of the reduced-sea state and its free-energy drift under a pulse.

    ``current_max`` is the static expectation max_z |⟨Ĵ(z)⟩| (exactly zero by
    spin-sector cancellation); ``energy_drift`` compares ⟨Ĥ₀⟩ after the pulse
    has switched off against its initial value; ``worst_excursion`` reports
    the largest transient deviation along the way (order amplitude², not
    required to be small).
    """
    state = fk.vacuum_regularized(lat, r_cut)
    density = fk.one_body_density(lat, state)
    up = fk.profile_harmonics(lat, density, +1)
    down = fk.profile_harmonics(lat, density, -1)
    profile = _harmonic_profile(lat, up - down, lat.grid(), 0.0)
    current_max = float(np.abs(lat.charge / lat.length * profile).max())
    numeric = schrodinger_evolve_numeric(lat, state, pot, store_every)
    energies = free_field_energy(lat, numeric)
    return VacuumStabilityResult(
        current_max,
        float(abs(energies[-1] - energies[0])),
        float(np.abs(energies - energies[0]).max()),
    )
