"""Exact-solution simulator for a massless quantized fermion field in a classical
electromagnetic background on a 1+1D periodic lattice, together with a
brute-force Fock-space verification suite (Schwinger term, gauge invariance,
free-field-energy bounds) at desk scale.
"""

from qed1d.lattice import Lattice

__all__ = ["Lattice"]
__version__ = "0.1.0"
