"""ecmkit: equivalent-circuit-model impedance toolkit.

Simulates circuit impedance spectra, regenerates a labeled synthetic dataset,
filters and interpolates spectra, extracts time-series features, trains
from-scratch tree-ensemble classifiers for the latent circuit class, and fits
circuit parameters by damped nonlinear least squares.
"""

from .circuit import (
    CircuitModel,
    CircuitNode,
    ElementKind,
    Spectrum,
    circuit_impedance,
    element_impedance,
    parse_circuit,
)

__version__ = "0.1.0"

__all__ = [
    "CircuitModel",
    "CircuitNode",
    "ElementKind",
    "Spectrum",
    "circuit_impedance",
    "element_impedance",
    "parse_circuit",
    "__version__",
]
