"""Radial inverse spectral toolkit.

Dirichlet spectra of ``-u'' + (l(l+1)/r² + q) u`` on (0, 1), the transformation
operators that reduce Bessel kernels to trigonometric ones, Kneser–Sommerfeld
identities, the linearized two-order spectral map and its inversion near zero,
the uniqueness ODE analyses, and fixed-energy Jost data.

Submodules
----------
special     half-integer Bessel functions, zeros, kernel polynomials
funcspace   panel grids, grid functions, quadrature and differentiation
xform       index-reduction operators and their identities
spectral    regular solutions, eigenvalues, eigenfunctions
ksgreen     Kneser–Sommerfeld series and integrated forms
uniq        uniqueness equations, obstruction value, even-solution pipeline
linmap      spectral map, its differential, kernel probes, reconstruction
scatter     Jost functions, Regge interpolation, product representation
cli         command-line front end (``ispec``)
"""
from .funcspace import Grid, GridFn, default_grid, make_grid
from .special import Order
from .spectral import Potential, dirichlet_spectrum

__version__ = "0.1.0"

__all__ = ["Grid", "GridFn", "Order", "Potential", "default_grid", "dirichlet_spectrum", "make_grid"]
