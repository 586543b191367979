"""Matrix-variate Hermite, Laguerre and zonal polynomials with chaos and geometry tools."""

__version__ = "0.1.0"
