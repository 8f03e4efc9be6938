"""Truncated nonlinear interferometry simulator for quantum-enhanced AFM readout."""

__version__ = "0.1.0"
