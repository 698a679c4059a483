"""Periodic spatial lattice, discrete momentum modes, and spectral helpers.

Natural units hbar = c = 1 throughout.  The spatial domain is a circle of
circumference L sampled at N = 2*cutoff + 1 equidistant points z_k = k*L/N, so
the N integer harmonics -cutoff..cutoff are in exact discrete Fourier duality
with the samples.  Field modes carry a nonzero integer label r with momentum
p_r = 2*pi*r/L = r*kappa; the zero harmonic is excluded from the field
expansion (it never appears as a field mode, only as a possible harmonic of
classical background functions).

All sample arrays put the spatial axis last, so the helpers work unchanged on
spinor-valued arrays of shape (2, N) and on stacked time series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigurationError",
    "InvalidModeError",
    "Lattice",
    "ResourceError",
    "apply_free_hamiltonian",
    "basis_function",
    "fourier_coefficients",
    "harmonics",
    "integrate",
    "resample",
    "spectral_derivative",
    "spectral_shift",
]


class ConfigurationError(ValueError):
    """A parameter combination that the solvers refuse to run with."""


class InvalidModeError(ConfigurationError):
    """A momentum label outside the truncated nonzero mode set."""


class ResourceError(RuntimeError):
    """A request whose Fock dimension exceeds the desk-scale ceiling."""


@dataclass(frozen=True)
class Lattice:
    """Periodic domain of circumference ``length`` with momentum cutoff ``cutoff``.

    ``charge`` is the coupling constant q of the fermion field to the
    classical background.  The grid size is tied to the cutoff,
    N = 2*cutoff + 1, which makes truncated plane-wave sums exact discrete
    delta functions on grid separations.
    """

    length: float = 2.0 * math.pi
    cutoff: int = 3
    charge: float = 1.0

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ConfigurationError(f"domain length must be positive, got {self.length}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ConfigurationError(f"cutoff must be an integer >= 1, got {self.cutoff}")

    @property
    def npoints(self) -> int:
        """Number of spatial samples, N = 2*cutoff + 1."""
        return 2 * self.cutoff + 1

    @property
    def spacing(self) -> float:
        """Grid spacing L/N."""
        return self.length / self.npoints

    @property
    def kappa(self) -> float:
        """Momentum quantum 2*pi/L; the mode labelled r carries momentum r*kappa."""
        return 2.0 * math.pi / self.length

    def grid(self) -> np.ndarray:
        """Sample points z_k = k*L/N for k = 0..N-1."""
        return self.spacing * np.arange(self.npoints)

    def mode_momentum(self, r: int) -> float:
        """Momentum 2*pi*r/L of the nonzero mode label r, |r| <= cutoff."""
        if r == 0 or abs(r) > self.cutoff:
            raise InvalidModeError(
                f"mode label must satisfy 1 <= |r| <= {self.cutoff}, got {r}"
            )
        return self.kappa * r


def harmonics(lat: Lattice) -> np.ndarray:
    """Integer harmonic numbers in FFT storage order: 0, 1, .., cutoff, -cutoff, .., -1."""
    return np.rint(np.fft.fftfreq(lat.npoints, d=1.0 / lat.npoints)).astype(int)


def fourier_coefficients(samples: np.ndarray, lat: Lattice) -> np.ndarray:
    """Coefficients c_j (FFT order, see :func:`harmonics`) of the band-limited interpolant.

    The interpolant is f(z) = sum_j c_j exp(i*j*kappa*z); for samples of a
    function band-limited to |j| <= cutoff the coefficients are exact.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] != lat.npoints:
        raise ConfigurationError(
            f"expected {lat.npoints} samples on the last axis, got {samples.shape[-1]}"
        )
    return np.fft.fft(samples, axis=-1) / lat.npoints


def resample(samples: np.ndarray, lat: Lattice, z: np.ndarray) -> np.ndarray:
    """Evaluate the band-limited interpolant of grid samples at arbitrary points z."""
    coeff = fourier_coefficients(samples, lat)
    phases = np.exp(1j * lat.kappa * np.multiply.outer(np.asarray(z, dtype=float), harmonics(lat)))
    out = np.einsum("...j,zj->...z", coeff, phases)
    if np.isrealobj(samples):
        return out.real
    return out


def _check_sample_count(samples: np.ndarray, lat: Lattice) -> np.ndarray:
    samples = np.asarray(samples)
    if samples.shape[-1] != lat.npoints:
        raise ConfigurationError(
            f"expected {lat.npoints} samples on the last axis, got {samples.shape[-1]}"
        )
    return samples


def spectral_shift(samples: np.ndarray, lat: Lattice, shift: float) -> np.ndarray:
    """Samples of f(z - shift) for the band-limited interpolant f (exact translation)."""
    samples = _check_sample_count(samples, lat)
    coeff = np.fft.fft(samples, axis=-1)
    coeff = coeff * np.exp(-1j * lat.kappa * shift * harmonics(lat))
    out = np.fft.ifft(coeff, axis=-1)
    if np.isrealobj(samples):
        return out.real
    return out


def spectral_derivative(samples: np.ndarray, lat: Lattice) -> np.ndarray:
    """d/dz of the band-limited interpolant, sampled on the grid."""
    samples = _check_sample_count(samples, lat)
    coeff = np.fft.fft(samples, axis=-1)
    coeff = coeff * (1j * lat.kappa * harmonics(lat))
    out = np.fft.ifft(coeff, axis=-1)
    if np.isrealobj(samples):
        return out.real
    return out


def integrate(samples: np.ndarray, lat: Lattice) -> float | complex:
    """Integral over the circle of the band-limited interpolant.

    The Riemann sum (L/N) * sum_k f(z_k) equals the exact integral for any
    function band-limited to |j| <= N-1, in particular for every product of
    two field-mode plane waves.
    """
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        return lat.spacing * complex(
            math.fsum(samples.real.ravel()), math.fsum(samples.imag.ravel())
        )
    return lat.spacing * math.fsum(np.asarray(samples, dtype=float).ravel())


def basis_function(lat: Lattice, p: float, s: int) -> np.ndarray:
    """Spinor plane wave phi_{p,s}(z) = exp(i*p*z)/sqrt(L) in the sigma3 = s component.

    These are the normal-mode solutions of the free Dirac equation,
    H0 phi_{p,s} = s*p*phi_{p,s} with H0 = -i*sigma3*d/dz.  Returned as a
    (2, N) array of grid samples (row 0 = upper component, s = +1).
    """
    if s not in (+1, -1):
        raise ConfigurationError(f"spin component must be +1 or -1, got {s}")
    r = p / lat.kappa
    if abs(r - round(r)) > 1e-9 * max(1.0, abs(r)):
        raise InvalidModeError(f"momentum {p} is not an integer multiple of kappa={lat.kappa}")
    lat.mode_momentum(round(r))  # range/zero-mode check
    out = np.zeros((2, lat.npoints), dtype=complex)
    out[0 if s == +1 else 1] = np.exp(1j * p * lat.grid()) / math.sqrt(lat.length)
    return out


def apply_free_hamiltonian(spinor: np.ndarray, lat: Lattice) -> np.ndarray:
    """Apply H0 = -i*sigma3*d/dz to (2, N) spinor samples with the spectral derivative."""
    d = spectral_derivative(np.asarray(spinor, dtype=complex), lat)
    return np.stack([-1j * d[0], 1j * d[1]])
