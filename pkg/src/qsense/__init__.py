"""Few-qubit interferometer simulation and phase-sensitivity analysis."""

__version__ = "0.1.0"
