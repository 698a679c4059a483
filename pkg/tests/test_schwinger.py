"""Commutator profiles: closed forms vs. brute-force oracle, and the dichotomy."""

import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from qed1d import fockspace, schwinger
from qed1d.lattice import ConfigurationError, Lattice, spectral_derivative


# ---------------------------------------------------------------------------
# oracle equivalence

@pytest.mark.parametrize("cutoff", [1, 2, 3])
def test_standard_profile_matches_oracle(cutoff):
    lat = Lattice(length=2 * math.pi, cutoff=cutoff)
    profile = schwinger.schwinger_standard(lat)
    oracle = schwinger.oracle_profile(lat, fockspace.vacuum_standard(lat))
    assert np.abs(profile.values - oracle).max() < 1e-12


def test_standard_profile_charge_scaling():
    for q in (0.7, 1.3):
        lat = Lattice(length=2 * math.pi, cutoff=2, charge=q)
        profile = schwinger.schwinger_standard(lat)
        oracle = schwinger.oracle_profile(lat, fockspace.vacuum_standard(lat))
        assert np.abs(profile.values - oracle).max() < 1e-12
        unit = schwinger.schwinger_standard(Lattice(length=2 * math.pi, cutoff=2))
        assert np.abs(profile.values - q**2 * unit.values).max() < 1e-12


@pytest.mark.parametrize("r_cut", [1, 2])
def test_regularized_profile_matches_oracle(r_cut):
    lat = Lattice(length=2 * math.pi, cutoff=3)
    profile = schwinger.schwinger_regularized(lat, r_cut)
    oracle = schwinger.oracle_profile(lat, fockspace.vacuum_regularized(lat, r_cut))
    assert np.abs(profile.values - oracle).max() < 1e-12


@pytest.mark.parametrize("cutoff", [2, 3])
def test_sector_decomposition(cutoff):
    # each spin sector contributes exactly half of the profile, and the
    # cross-sector commutator vanishes as a matrix identity
    lat = Lattice(length=2 * math.pi, cutoff=cutoff)
    for state in (fockspace.vacuum_standard(lat), fockspace.vacuum_regularized(lat, 1)):
        full = schwinger.oracle_profile(lat, state)
        up = schwinger.oracle_profile_sector(lat, state, +1)
        down = schwinger.oracle_profile_sector(lat, state, -1)
        assert np.abs(up + down - full).max() < 1e-12
        assert np.abs(up - full / 2).max() < 1e-12
        assert np.abs(down - full / 2).max() < 1e-12
    rho_up = schwinger.sector_charge_operator(lat, 1, +1)
    cur_down = schwinger.sector_current_operator(lat, 0, -1)
    cross = rho_up @ cur_down - cur_down @ rho_up
    assert spla.norm(cross.tocsr()) == 0.0


def test_oracle_translation_invariance():
    lat = Lattice(length=2 * math.pi, cutoff=2)
    vac = fockspace.vacuum_standard(lat)
    n = lat.npoints
    base = schwinger.oracle_profile(lat, vac)
    for shift in range(1, n):
        current = fockspace.current_operator(lat, shift)
        shifted = np.array(
            [
                schwinger._commutator_expectation(
                    vac, fockspace.charge_operator(lat, (shift + k) % n), current
                )
                for k in range(n)
            ]
        )
        assert np.abs(shifted - base).max() < 1e-12


# ---------------------------------------------------------------------------
# profile structure

def test_profile_invariants_enforced():
    lat = Lattice(cutoff=2)
    profile = schwinger.schwinger_standard(lat)
    assert profile.values[0] == 0
    assert np.abs(profile.values.real).max() == 0.0
    grid = lat.grid()
    with pytest.raises(ConfigurationError):
        schwinger.SchwingerProfile(grid, np.ones(5, dtype=complex), "standard", 2)
    with pytest.raises(ConfigurationError):
        schwinger.SchwingerProfile(grid, profile.values, "bogus", 2)
    with pytest.raises(ConfigurationError):
        schwinger.SchwingerProfile(grid, profile.values, "regularized", 2)  # missing r_cut
    tampered = profile.values.copy()
    tampered[1] = -tampered[1]  # break antisymmetry
    with pytest.raises(ConfigurationError):
        schwinger.SchwingerProfile(grid, tampered, "standard", 2)


@settings(max_examples=20, deadline=None)
@given(
    cutoff=st.integers(min_value=1, max_value=6),
    delta=st.floats(min_value=-10, max_value=10, allow_nan=False),
    charge=st.floats(min_value=0.1, max_value=2.0),
)
def test_closed_form_oddness_property(cutoff, delta, charge):
    lat = Lattice(length=2 * math.pi, cutoff=cutoff, charge=charge)
    val = schwinger.standard_value(lat, delta)
    assert val.real == 0.0
    assert schwinger.standard_value(lat, -delta) == -val
    reg = schwinger.regularized_value(lat, max(1, cutoff // 2), delta)
    assert reg.real == 0.0
    assert schwinger.regularized_value(lat, max(1, cutoff // 2), -delta) == -reg


def test_r_equal_cutoff_degenerates_to_standard():
    lat = Lattice(length=2 * math.pi, cutoff=3, charge=1.1)
    reg = schwinger.schwinger_regularized(lat, 3)
    std = schwinger.schwinger_standard(lat)
    assert np.array_equal(reg.values, std.values)


def test_regularized_r_validation():
    lat = Lattice(cutoff=3)
    for bad in (0, -1, 4, 1.5):
        with pytest.raises(ConfigurationError):
            schwinger.schwinger_regularized(lat, bad)


def test_grid_samples_equal_remnant_any_cutoff():
    # all cutoff dependence cancels on the grid: every profile lies on the
    # single remnant curve fixed by r_cut alone
    for r_cut in (1, 2):
        for cutoff in (r_cut + 1, r_cut + 2, r_cut + 4):
            lat = Lattice(length=2 * math.pi, cutoff=cutoff, charge=0.9)
            profile = schwinger.schwinger_regularized(lat, r_cut)
            remnant = np.array(
                [schwinger.remnant_value(lat, r_cut, d) for d in lat.grid()]
            )
            assert np.abs(profile.values - remnant).max() < 1e-12


def test_standard_grid_alias_identity():
    # on the grid the double sum folds to a single sum with negative weight
    lat = Lattice(length=2 * math.pi, cutoff=3, charge=1.2)
    profile = schwinger.schwinger_standard(lat)
    folded = np.array(
        [
            -4j * lat.charge**2 / lat.length**2
            * math.fsum(math.sin(m * lat.kappa * d) for m in range(1, lat.cutoff + 1))
            for d in lat.grid()
        ]
    )
    assert np.abs(profile.values - folded).max() < 1e-12


# ---------------------------------------------------------------------------
# coincidence derivative and growth

def test_coincidence_derivative_standard_value():
    lat = Lattice(length=2 * math.pi, cutoff=2)
    assert schwinger.coincidence_derivative(lat) == pytest.approx(12 / math.pi**2, rel=1e-12)
    # closed form at general parameters
    lat2 = Lattice(length=5.0, cutoff=4, charge=0.8)
    expected = 4 * 0.8**2 / 25.0 * lat2.kappa * 16 * 5
    assert schwinger.coincidence_derivative(lat2) == pytest.approx(expected, rel=1e-12)


def test_coincidence_derivative_regularized_constant_in_cutoff():
    for r_cut, closed in ((1, -1.0), (2, -3.0)):
        values = []
        for cutoff in range(r_cut + 1, r_cut + 7):
            lat = Lattice(length=2 * math.pi, cutoff=cutoff)
            values.append(
                schwinger.coincidence_derivative(lat, "regularized", r_cut=r_cut)
            )
        values = np.array(values)
        assert np.abs(values - values[0]).max() < 1e-10
        # derivative of the remnant: (4 q^2 / L^2) kappa * oriented moment
        expected = 4 / (2 * math.pi) ** 2 * closed
        assert np.abs(values - expected).max() < 1e-10


def test_coincidence_derivative_validation():
    lat = Lattice(cutoff=3)
    with pytest.raises(ConfigurationError):
        schwinger.coincidence_derivative(lat, "regularized")
    with pytest.raises(ConfigurationError):
        schwinger.coincidence_derivative(lat, "bogus")


def test_growth_exponent_fit():
    cutoffs = list(range(2, 9))
    values = schwinger.growth_table(cutoffs)
    assert np.all(np.diff(values) > 0)  # strictly increasing, unbounded trend
    # exact closed form (4q^2/L^2) kappa L^2(L+1)
    for c, v in zip(cutoffs, values):
        assert v == pytest.approx(4 / (2 * math.pi) ** 2 * c**2 * (c + 1), rel=1e-14)
    fit = schwinger.fit_growth_exponent(cutoffs, values)
    assert abs(fit["exponent"] - 3.0) <= 0.1
    # frozen regression values for the two fits
    assert fit["exponent"] == pytest.approx(2.9571, abs=5e-4)
    assert fit["raw_slope"] == pytest.approx(2.7954, abs=5e-4)


# ---------------------------------------------------------------------------
# smeared pairings

def _pair_on(modes, support):
    # f carries the given coefficients; g is the quadrature partner (a -i
    # twist per positive harmonic, i.e. cos -> sin).  Pairing a function with
    # itself always yields zero against the antisymmetric kernel.
    f, g = {}, {}
    for m, c in modes.items():
        f[m], f[-m] = c, np.conj(c)
        g[m], g[-m] = -1j * c, np.conj(-1j * c)
    return schwinger.TestFunctionPair(f, g, support)


def test_smeared_dichotomy_window():
    lat = Lattice(length=2 * math.pi, cutoff=8)
    pair = _pair_on({4: 0.3 - 0.2j, 5: 0.1 + 0.4j}, (4, 5))
    reg = schwinger.smeared_schwinger(lat, schwinger.schwinger_regularized(lat, 2), pair)
    std = schwinger.smeared_schwinger(lat, schwinger.schwinger_standard(lat), pair)
    assert abs(reg) < 1e-10
    assert abs(std) > 1e-3
    assert abs(std.real) < 1e-12  # purely imaginary against real test functions


def test_smeared_oracle_spot_check():
    lat = Lattice(length=2 * math.pi, cutoff=3)
    pair = _pair_on({2: 0.5 + 0.25j}, (2, 2))
    reg_state = fockspace.vacuum_regularized(lat, 1)
    oracle = schwinger.SchwingerProfile(
        lat.grid(), schwinger.oracle_profile(lat, reg_state), "regularized", 3, r_cut=1
    )
    assert abs(schwinger.smeared_schwinger(lat, oracle, pair)) < 1e-10
    closed = schwinger.schwinger_regularized(lat, 1)
    assert abs(schwinger.smeared_schwinger(lat, closed, pair)) < 1e-10
    std = schwinger.smeared_schwinger(lat, schwinger.schwinger_standard(lat), pair)
    assert abs(std) > 1e-3


def test_smeared_zero_function():
    lat = Lattice(cutoff=3)
    profile = schwinger.schwinger_standard(lat)
    pair = schwinger.TestFunctionPair({}, {2: 0.5, -2: 0.5}, (2, 2))
    assert schwinger.smeared_schwinger(lat, profile, pair) == 0.0


def test_pair_validation():
    lat = Lattice(cutoff=3)
    profile = schwinger.schwinger_standard(lat)
    with pytest.raises(ConfigurationError):
        schwinger.smeared_schwinger(
            lat, profile, _pair_on({4: 1.0}, (4, 4))  # beyond the cutoff
        )
    with pytest.raises(ConfigurationError):
        schwinger.smeared_schwinger(
            lat, profile, schwinger.TestFunctionPair({3: 1.0, -3: 1.0}, {}, (1, 2))
        )  # weight outside the declared window
    with pytest.raises(ConfigurationError):
        schwinger.smeared_schwinger(
            lat, profile, schwinger.TestFunctionPair({2: 1j}, {}, (2, 2))
        )  # not conjugate-symmetric


def test_smeared_equals_harmonic_contraction():
    # grid quadrature against the analytic contraction L^2 sum f_a g_-a S_-a
    # (with S harmonics folded onto the grid band)
    lat = Lattice(length=2 * math.pi, cutoff=4)
    pair = _pair_on({2: 0.3 + 0.1j, 3: -0.2j}, (2, 3))
    profile = schwinger.schwinger_regularized(lat, 1)
    from qed1d.lattice import fourier_coefficients, harmonics

    s_hat = dict(zip(harmonics(lat), fourier_coefficients(profile.values, lat)))
    f = {m: c for m, c in pair.f_modes.items()}
    total = sum(
        f[a] * complex(pair.g_modes.get(-a, 0.0)) * s_hat[-a]
        for a in f
        if -a in s_hat
    )
    expected = lat.length**2 * total
    got = schwinger.smeared_schwinger(lat, profile, pair)
    assert abs(got - expected) < 1e-12
