"""Exact second-quantized representation of the truncated massless Dirac field.

Mode convention.  With cutoff Lambda there are 4*Lambda field modes, one per
Jordan-Wigner bit ``a`` of the 2**(4*Lambda)-dimensional Fock basis index:

    a in [0, Lambda):            spin-up electrons,   label r = a + 1
    a in [Lambda, 2*Lambda):     spin-up positrons,   label r = a - Lambda + 1
    a in [2*Lambda, 3*Lambda):   spin-down electrons, label r = -(a - 2*Lambda + 1)
    a in [3*Lambda, 4*Lambda):   spin-down positrons, label r = -(a - 3*Lambda + 1)

An electron labelled r occupies the plane wave exp(i*r*kappa*z) in its spin
component and has free energy |r|*kappa; a positron labelled r pairs with that
electron, sits at wave number -r, and fills a sea level of free energy
-|r|*kappa.  The ladder matrix attached to bit ``a`` annihilates the *field*
mode: it is the electron destruction operator b_r for electron bits and the
positron creation operator d{dagger}_r for positron bits.  The free field is
then the uniform sum

    psi0(z) = sum_a phi_a(z) C_a,        phi_a(z) = exp(i*w_a*kappa*z)/sqrt(L)

over all 4*Lambda bits, every quadratic observable is sum_ab h_ab C_a^dag C_b,
and the standard vacuum (all b and d destruction operators annihilate it) is
the single basis state with every positron bit set.  Positron occupation
numbers are 1 - bit.

Spin sectors never mix: every operator used here (free Hamiltonian, scalar and
vector potentials, currents, phase generators) is diagonal in the spinor
index, and a quadratic operator whose two ladder indices lie in one spin
sector carries no Jordan-Wigner string into the other sector.  The full basis
index therefore factorizes as  n = n_down * 2**(2*Lambda) + n_up  (spin-up
bits are the low bits), and expensive operations run on the two
2**(2*Lambda)-dimensional sector factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache

import numpy as np
from scipy import sparse

from qed1d.lattice import (
    ConfigurationError,
    InvalidModeError,
    Lattice,
    ResourceError,
    fourier_coefficients,
    harmonics,
)

__all__ = [
    "FOCK_CUTOFF_CEILING",
    "Mode",
    "apply_annihilator",
    "apply_creator",
    "apply_sector_operators",
    "charge_operator",
    "current_operator",
    "diagonal_kernel_one_body",
    "dirac_one_body",
    "field_operator_samples",
    "free_energies_sector",
    "free_energy_expectation",
    "ladder_matrices",
    "mode_index",
    "mode_table",
    "occupation_state",
    "one_body_density",
    "profile_harmonics",
    "quadratic_operator",
    "sector_dim",
    "sector_one_body_blocks",
    "sector_quadratic",
    "two_electron_state",
    "vacuum_regularized",
    "vacuum_standard",
]

# Desk-scale ceiling: cutoff 4 means 16 modes and Fock dimension 65536.
FOCK_CUTOFF_CEILING = 4


@dataclass(frozen=True)
class Mode:
    """One field mode / Jordan-Wigner bit."""

    index: int  # bit position in the Fock basis index
    species: str  # "electron" or "positron"
    spin: int  # +1 = upper spinor component, -1 = lower
    label: int  # signed momentum label r (electron momentum r*kappa)
    wavenumber: int  # integer harmonic of the mode wavefunction
    energy: float  # free-energy coefficient of this bit's occupation in H0


def _check_cutoff(lat: Lattice) -> None:
    if lat.cutoff > FOCK_CUTOFF_CEILING:
        raise ResourceError(
            f"Fock dimension 2**{4 * lat.cutoff} exceeds the desk-scale ceiling "
            f"(cutoff {lat.cutoff} > {FOCK_CUTOFF_CEILING})"
        )


@cache
def _mode_table(cutoff: int, kappa: float) -> tuple[Mode, ...]:
    modes = []
    for sign in (+1, -1):
        for species in ("electron", "positron"):
            for k in range(1, cutoff + 1):
                label = sign * k
                wavenumber = label if species == "electron" else -label
                energy = k * kappa if species == "electron" else -k * kappa
                modes.append(Mode(len(modes), species, sign, label, wavenumber, energy))
    return tuple(modes)


def mode_table(lat: Lattice) -> tuple[Mode, ...]:
    """All 4*cutoff field modes in frozen Jordan-Wigner order."""
    return _mode_table(lat.cutoff, lat.kappa)


def mode_index(lat: Lattice, species: str, label: int) -> int:
    """Bit position of the (species, label) mode."""
    if species not in ("electron", "positron"):
        raise InvalidModeError(f"unknown species {species!r}")
    lat.mode_momentum(label)  # validates label
    block = {(+1, "electron"): 0, (+1, "positron"): 1, (-1, "electron"): 2, (-1, "positron"): 3}[
        (1 if label > 0 else -1, species)
    ]
    return block * lat.cutoff + abs(label) - 1


def sector_dim(lat: Lattice) -> int:
    """Dimension 2**(2*cutoff) of one spin sector's Fock factor."""
    return 1 << (2 * lat.cutoff)


@cache
def ladder_matrices(nmodes: int) -> tuple[sparse.csr_matrix, ...]:
    """Jordan-Wigner annihilation matrices for ``nmodes`` fermion modes.

    Bit ``a`` of the basis index is the occupation of mode ``a``; the string of
    sigma3 factors sits on the bits below ``a``.  All entries are +-1.0, so the
    canonical anticommutation relations hold exactly in floating point.
    """
    iden = sparse.identity(2, format="csr")
    zstr = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
    down = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # <0|c|1> = 1
    ops = []
    for a in range(nmodes):
        m = sparse.identity(1, format="csr")
        for b in reversed(range(nmodes)):  # first kron factor = highest bit
            m = sparse.kron(m, down if b == a else (iden if b > a else zstr), format="csr")
        m.eliminate_zeros()
        ops.append(m)
    return tuple(ops)


@cache
def _ladder_pair_products(nmodes: int) -> tuple[tuple[sparse.csr_matrix, ...], ...]:
    """Cached products C_a^dag C_b used when assembling quadratic operators."""
    ladders = ladder_matrices(nmodes)
    return tuple(
        tuple((ladders[a].T @ ladders[b]).tocsr() for b in range(nmodes))
        for a in range(nmodes)
    )


def _occupations(nmodes: int) -> np.ndarray:
    """(nmodes, 2**nmodes) array of basis-state bit occupations."""
    dim = 1 << nmodes
    return (np.arange(dim)[None, :] >> np.arange(nmodes)[:, None]) & 1


@cache
def _parity(nmodes: int) -> np.ndarray:
    """(-1)**(number of set bits) per basis state of an nmodes-bit register."""
    return 1.0 - 2.0 * (_occupations(nmodes).sum(axis=0) % 2)


# ---------------------------------------------------------------------------
# sector helpers: n = n_down * sector_dim + n_up

def _as_matrix(lat: Lattice, vec: np.ndarray) -> np.ndarray:
    d = sector_dim(lat)
    return np.asarray(vec).reshape(d, d)


def apply_sector_operators(lat: Lattice, vec: np.ndarray, op_up=None, op_down=None) -> np.ndarray:
    """Apply per-sector operators (acting on each spin sector's Fock factor) to a state."""
    m = _as_matrix(lat, vec)
    if op_up is not None:
        m = m @ op_up.T
    if op_down is not None:
        m = op_down @ m
    return m.reshape(-1)


def apply_annihilator(lat: Lattice, vec: np.ndarray, a: int) -> np.ndarray:
    """Apply the full-space ladder annihilator C_a to a state vector.

    Spin-up bits are sector-local; a spin-down ladder operator additionally
    carries the Jordan-Wigner string over all 2*cutoff spin-up bits, which acts
    as the sector parity.
    """
    nsec = 2 * lat.cutoff
    local = ladder_matrices(nsec)
    m = _as_matrix(lat, vec)
    if a < nsec:
        out = m @ local[a].T.toarray()
    else:
        out = (local[a - nsec].toarray() @ m) * _parity(nsec)[None, :]
    return out.reshape(-1)


def apply_creator(lat: Lattice, vec: np.ndarray, a: int) -> np.ndarray:
    """Apply C_a^dag (same string convention as :func:`apply_annihilator`)."""
    nsec = 2 * lat.cutoff
    local = ladder_matrices(nsec)
    m = _as_matrix(lat, vec)
    if a < nsec:
        out = m @ local[a].toarray()
    else:
        out = (local[a - nsec].T.toarray() @ m) * _parity(nsec)[None, :]
    return out.reshape(-1)


def free_energies_sector(lat: Lattice, spin: int) -> np.ndarray:
    """Diagonal of H0 restricted to one spin sector's Fock factor."""
    modes = [m for m in mode_table(lat) if m.spin == spin]
    energies = np.array([m.energy for m in modes])
    return energies @ _occupations(len(modes))


def free_energy_expectation(lat: Lattice, vec: np.ndarray) -> float:
    """<vec| H0 |vec> / <vec|vec> via the diagonal occupation energies.

    The Rayleigh-quotient normalization keeps the value exact for basis
    states even after long phase-only evolutions whose float norm has
    drifted by a few ulp.
    """
    m = _as_matrix(lat, vec)
    prob = (m.real**2 + m.imag**2) if np.iscomplexobj(m) else m**2
    e_up = free_energies_sector(lat, +1)
    e_down = free_energies_sector(lat, -1)
    raw = prob.sum(axis=0) @ e_up + prob.sum(axis=1) @ e_down
    return float(raw / prob.sum())


# ---------------------------------------------------------------------------
# one-body matrices and quadratic operators

def sector_one_body_blocks(lat: Lattice, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a (4*cutoff, 4*cutoff) spinor-diagonal one-body matrix into spin blocks."""
    n = 2 * lat.cutoff
    h = np.asarray(h)
    if h.shape != (2 * n, 2 * n):
        raise ConfigurationError(f"one-body matrix must be {(2 * n, 2 * n)}, got {h.shape}")
    if np.abs(h[:n, n:]).max(initial=0.0) > 0 or np.abs(h[n:, :n]).max(initial=0.0) > 0:
        raise ConfigurationError("one-body matrix couples spin sectors")
    return h[:n, :n], h[n:, n:]


def sector_quadratic(h_block: np.ndarray, dense: bool = True):
    """Many-body operator sum_ab h_ab C_a^dag C_b on one spin sector's Fock factor."""
    h_block = np.asarray(h_block)
    n = h_block.shape[0]
    pairs = _ladder_pair_products(n)
    out = sparse.csr_matrix((1 << n, 1 << n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if h_block[a, b] != 0:
                out = out + h_block[a, b] * pairs[a][b]
    return out.toarray() if dense else out


def quadratic_operator(lat: Lattice, h: np.ndarray, hermitian: bool | None = None) -> sparse.csr_matrix:
    """Full-space operator sum_ab h_ab C_a^dag C_b from a mode-space one-body matrix.

    This is the brute-force oracle assembly on the full 2**(4*cutoff)
    dimension; production paths use :func:`sector_quadratic` on the factors.
    """
    _check_cutoff(lat)
    nmodes = 4 * lat.cutoff
    h = np.asarray(h, dtype=complex)
    if h.shape != (nmodes, nmodes):
        raise ConfigurationError(f"one-body matrix must be {(nmodes, nmodes)}, got {h.shape}")
    if hermitian and np.abs(h - h.conj().T).max() > 1e-12:
        raise ConfigurationError("hermitian operator requested but kernel is not hermitian")
    pairs = _ladder_pair_products(nmodes)
    out = sparse.csr_matrix((1 << nmodes, 1 << nmodes), dtype=complex)
    for a in range(nmodes):
        for b in range(nmodes):
            if h[a, b] != 0:
                out = out + h[a, b] * pairs[a][b]
    return out.tocsr()


def sea_trace(lat: Lattice, h: np.ndarray) -> complex:
    """Standard-vacuum expectation of ``quadratic_operator(lat, h)``.

    Equal to the trace of ``h`` over the filled negative-wavenumber modes.
    Subtracting ``sea_trace(lat, h)`` from the lifted operator gives its
    normal-ordered form.  For two one-body kernels the sea trace of their
    matrix commutator is the central term of the lifted commutator algebra:
    ``[Qn(h1), Qn(h2)] = Qn([h1, h2]) + sea_trace(lat, [h1, h2])`` with
    ``Qn(h) = Q(h) - sea_trace(lat, h)``.
    """
    h = np.asarray(h)
    sea = [m.index for m in mode_table(lat) if m.species == "positron"]
    return complex(sum(h[i, i] for i in sea))


def diagonal_kernel_one_body(
    lat: Lattice,
    upper: np.ndarray | dict[int, complex],
    lower: np.ndarray | dict[int, complex],
    band: int | None = None,
) -> np.ndarray:
    """One-body matrix of the multiplication kernel diag(upper(z), lower(z)).

    Matrix elements between modes a, b of equal spin are the Fourier
    coefficients K_(w_a - w_b) of the kernel component.  Components may be
    given as N grid samples (interpreted as their band-limited interpolant,
    optionally declared band-limited to |j| <= band <= cutoff) or directly as
    {harmonic: coefficient} dictionaries with |harmonic| <= 2*cutoff.  Using
    exact coefficients instead of the coarse-grid Riemann sum avoids aliasing
    kernel harmonics against mode-number differences, so the assembly is exact
    for declared band-limited kernels.
    """
    nmodes = 4 * lat.cutoff
    h = np.zeros((nmodes, nmodes), dtype=complex)
    coeffs = {}
    for spin, comp in ((+1, upper), (-1, lower)):
        table = {}
        if isinstance(comp, dict):
            for j, c in comp.items():
                if abs(j) > 2 * lat.cutoff:
                    raise ConfigurationError(
                        f"kernel harmonic {j} outside |j| <= {2 * lat.cutoff}"
                    )
                if c != 0:
                    table[int(j)] = complex(c)
        else:
            cvec = fourier_coefficients(np.asarray(comp), lat)
            keep = lat.cutoff if band is None else band
            if keep > lat.cutoff:
                raise ConfigurationError(
                    f"declared band {keep} not representable on {lat.npoints} samples"
                )
            for pos, j in enumerate(harmonics(lat)):
                if abs(j) <= keep and cvec[pos] != 0:
                    table[int(j)] = complex(cvec[pos])
        coeffs[spin] = table
    for ma in mode_table(lat):
        row = coeffs[ma.spin]
        for mb in mode_table(lat):
            if mb.spin != ma.spin:
                continue
            c = row.get(ma.wavenumber - mb.wavenumber)
            if c is not None:
                h[ma.index, mb.index] = c
    return h


def dirac_one_body(
    lat: Lattice, a0_samples: np.ndarray, a1_samples: np.ndarray, band: int | None = None
) -> np.ndarray:
    """One-body matrix of H_D = H0 - q*sigma3*A1 + q*A0 at one instant.

    The free part is diagonal in the mode basis (mode energies); the potential
    enters through the spin-component kernels q*(A0 -+ A1).
    """
    q = lat.charge
    a0 = np.asarray(a0_samples, dtype=float)
    a1 = np.asarray(a1_samples, dtype=float)
    h = diagonal_kernel_one_body(lat, q * (a0 - a1), q * (a0 + a1), band=band)
    for m in mode_table(lat):
        h[m.index, m.index] += m.energy
    return h


# ---------------------------------------------------------------------------
# field operators and observables (full-space oracle route)

def field_operator_samples(lat: Lattice) -> tuple[list[sparse.csr_matrix], list[sparse.csr_matrix]]:
    """Spinor components of psi0(z_k) as full-space sparse matrices, per grid point.

    Returns (upper, lower) lists over the N grid points.  The equal-point
    anticommutator {psi0_c(z_k), psi0_c^dag(z_j)} is the truncated Dirichlet
    kernel (N*delta_kj - 1)/L: the N-term plane-wave sum minus the excluded
    zero harmonic.
    """
    _check_cutoff(lat)
    ladders = ladder_matrices(4 * lat.cutoff)
    z = lat.grid()
    out_up, out_down = [], []
    norm = 1.0 / math.sqrt(lat.length)
    for zk in z:
        comps = {+1: None, -1: None}
        for m in mode_table(lat):
            term = (norm * np.exp(1j * m.wavenumber * lat.kappa * zk)) * ladders[m.index]
            comps[m.spin] = term if comps[m.spin] is None else comps[m.spin] + term
        out_up.append(comps[+1].tocsr())
        out_down.append(comps[-1].tocsr())
    return out_up, out_down


def _profile_kernel(lat: Lattice, k: int, sign_lower: float) -> np.ndarray:
    zk = lat.grid()[k]
    nmodes = 4 * lat.cutoff
    h = np.zeros((nmodes, nmodes), dtype=complex)
    q_over_l = lat.charge / lat.length
    for ma in mode_table(lat):
        for mb in mode_table(lat):
            if ma.spin != mb.spin:
                continue
            s = 1.0 if ma.spin == +1 else sign_lower
            h[ma.index, mb.index] = (
                s * q_over_l * np.exp(1j * (mb.wavenumber - ma.wavenumber) * lat.kappa * zk)
            )
    return h


def current_operator(lat: Lattice, k: int) -> sparse.csr_matrix:
    """J(z_k) = q (psi_up^dag psi_up - psi_down^dag psi_down) as a full-space matrix."""
    return quadratic_operator(lat, _profile_kernel(lat, k, -1.0))


def charge_operator(lat: Lattice, k: int) -> sparse.csr_matrix:
    """rho(z_k) = q (psi_up^dag psi_up + psi_down^dag psi_down) as a full-space matrix."""
    return quadratic_operator(lat, _profile_kernel(lat, k, +1.0))


# ---------------------------------------------------------------------------
# states

def occupation_state(lat: Lattice, occupied_bits) -> np.ndarray:
    """Basis state with the given Jordan-Wigner bits set."""
    _check_cutoff(lat)
    idx = 0
    for a in occupied_bits:
        if not 0 <= a < 4 * lat.cutoff:
            raise InvalidModeError(f"bit {a} outside 0..{4 * lat.cutoff - 1}")
        idx |= 1 << a
    vec = np.zeros(sector_dim(lat) ** 2, dtype=complex)
    vec[idx] = 1.0
    return vec


def vacuum_standard(lat: Lattice) -> np.ndarray:
    """The state annihilated by every electron and positron destruction operator.

    In the bit representation this is the single basis state with all positron
    bits set (filled sea) and all electron bits clear; its free energy is
    -2*kappa*sum_{r=1..cutoff} r.
    """
    _check_cutoff(lat)
    return occupation_state(
        lat, [m.index for m in mode_table(lat) if m.species == "positron"]
    )


def vacuum_regularized(lat: Lattice, r_cut: int) -> np.ndarray:
    """The modified vacuum annihilated by d_r for |r| <= r_cut and by d_r^dag above.

    Equivalently: the standard vacuum with every positron of momentum label
    above r_cut added on top of the sea.  r_cut = cutoff reproduces the
    standard vacuum.  Free energy: -2*kappa*sum_{r=1..r_cut} r.
    """
    _check_cutoff(lat)
    if not 1 <= r_cut <= lat.cutoff:
        raise ConfigurationError(
            f"regularization boundary must satisfy 1 <= R <= cutoff={lat.cutoff}, got {r_cut}"
        )
    return occupation_state(
        lat,
        [
            m.index
            for m in mode_table(lat)
            if m.species == "positron" and abs(m.label) <= r_cut
        ],
    )


def two_electron_state(lat: Lattice, p: int, q_m: int) -> np.ndarray:
    """(b_p^dag + b_q_m^dag)|0> / sqrt(2) for distinct spin-up electron labels p, q_m."""
    if p == q_m:
        raise ConfigurationError(
            f"degenerate mode pair p = q_m = {p}: nilpotency leaves the state unnormalized"
        )
    for label in (p, q_m):
        if not 1 <= label <= lat.cutoff:
            raise InvalidModeError(
                f"label {label} is not a spin-up electron momentum (need 1 <= r <= {lat.cutoff})"
            )
    vac = vacuum_standard(lat)
    out = apply_creator(lat, vac, mode_index(lat, "electron", p)) + apply_creator(
        lat, vac, mode_index(lat, "electron", q_m)
    )
    return out / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# one-body density matrix and observable profiles

def one_body_density(lat: Lattice, vec: np.ndarray) -> np.ndarray:
    """M_ab = <vec| C_a^dag C_b |vec> for all 4*cutoff modes."""
    applied = [apply_annihilator(lat, vec, a) for a in range(4 * lat.cutoff)]
    nmodes = len(applied)
    m = np.empty((nmodes, nmodes), dtype=complex)
    for a in range(nmodes):
        for b in range(nmodes):
            m[a, b] = np.vdot(applied[a], applied[b])
    return m


def profile_harmonics(lat: Lattice, density: np.ndarray, spin: int) -> np.ndarray:
    """Harmonic coefficients of one spin sector's density profile.

    Returns D_j for j = -2*cutoff..2*cutoff (index j + 2*cutoff) such that
    sum_{a,b in sector} M_ab exp(i*(w_b - w_a)*kappa*z) = sum_j D_j exp(i*j*kappa*z).
    The q/L normalization of physical profiles is left to the caller.
    """
    width = 2 * lat.cutoff
    out = np.zeros(2 * width + 1, dtype=complex)
    modes = [m for m in mode_table(lat) if m.spin == spin]
    for ma in modes:
        for mb in modes:
            out[mb.wavenumber - ma.wavenumber + width] += density[ma.index, mb.index]
    return out


def evaluate_profile(lat: Lattice, coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate sum_j D_j exp(i*j*kappa*z) (j centered on 0) at points z, as reals."""
    width = (len(coeffs) - 1) // 2
    js = np.arange(-width, width + 1)
    vals = np.exp(1j * lat.kappa * np.multiply.outer(np.asarray(z, dtype=float), js)) @ coeffs
    return vals.real
