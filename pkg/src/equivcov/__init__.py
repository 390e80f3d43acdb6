"""Orthogonally equivariant covariance estimators and a risk laboratory."""

__version__ = "0.1.0"
