"""Pulse-level randomized-benchmarking simulator for microwave-driven
clock qubits in a 2D tweezer array, with destructive and non-destructive
readout models and the RB fitting pipeline."""

__version__ = "0.1.0"
