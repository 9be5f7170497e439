"""zetalab: a numerical laboratory for discrete moments of zeta' at the zeros.

The package cross-verifies three computational routes at desk scale:

* exact Haar-average formulas for powers of the characteristic polynomial
  derivative (``rmt``),
* the smoothed prime/zero hybrid model, its Fourier coefficients and the
  Toeplitz-determinant route (``hybrid``, ``toeplitz``, ``arithmetic``),
* direct sums over computed zeros of the Riemann zeta function
  (``zeros``, ``experiments``).
"""

__version__ = "0.1.0"

from . import arithmetic, experiments, hybrid, rmt, specfun, toeplitz, zeros  # noqa: F401,E402
