"""Numerical laboratory for Gaussian-smoothed empirical measures in 1D.

Exact quantile-coupling W2, information divergences, concentration statistics,
hard-example constructions, and Monte Carlo rate experiments around the
K < sigma vs K > sigma phase transition.
"""

__version__ = "0.1.0"
