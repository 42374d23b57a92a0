"""Asynchronous multi-fidelity batch Bayesian optimization."""

__version__ = "0.1.0"
