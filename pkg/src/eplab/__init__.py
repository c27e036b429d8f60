"""Radial Euler-Poisson numerical lab: solvers, spectral operators and Klein-Gordon decay tools."""

__version__ = "0.1.0"
