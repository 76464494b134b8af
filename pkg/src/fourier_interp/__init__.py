"""Fourier interpolation from values at square-root radii.

Modules: modular (theta functions and the modular lambda), kernels and
generating (contour integrals of the generating kernel), radial_basis (basis
tables), function_spaces (radial Fourier transform, weighted norms),
interp_radial (exact and perturbed radial reconstruction), nonradial
(spherical-harmonic extension), hup (hyperbola cross uniqueness), cli.
"""

__version__ = "0.1.0"
