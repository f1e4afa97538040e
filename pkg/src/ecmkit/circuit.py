"""Circuit grammar and complex impedance evaluation.

A circuit is written as a hyphen-separated chain of series elements, where a
token naming two elements (``RC``, ``RCPE``) is a two-branch parallel unit.
Impedances are evaluated at angular frequency ``omega = 2*pi*f`` with
principal branches for complex powers and square roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class CircuitError(ValueError):
    pass


class EmptyLabel(CircuitError):
    pass


class UnknownToken(CircuitError):
    def __init__(self, token: str):
        super().__init__(f"unknown circuit token: {token!r}")
        self.token = token


class DomainError(CircuitError):
    pass


class LengthMismatch(ValueError):
    pass


class ElementKind(Enum):
    L = "L"
    R = "R"
    C = "C"
    CPE = "CPE"
    G = "G"
    WS = "Ws"


# number of real parameters per element kind
PARAM_COUNT = {
    ElementKind.L: 1,
    ElementKind.R: 1,
    ElementKind.C: 1,
    ElementKind.CPE: 2,
    ElementKind.G: 2,
    ElementKind.WS: 3,
}

# shorthand names -> canonical hyphenated form
ALIASES = {
    "L-R-2RCPE": "L-R-RCPE-RCPE",
    "L-R-3RCPE": "L-R-RCPE-RCPE-RCPE",
    "2RCPE": "RCPE-RCPE",
    "3RCPE": "RCPE-RCPE-RCPE",
    "4RCPE": "RCPE-RCPE-RCPE-RCPE",
    "Rs_Ws": "R-Ws",
    "Rs-Ws": "R-Ws",
}

_PARALLEL_TOKENS = {
    "RC": (ElementKind.R, ElementKind.C),
    "RCPE": (ElementKind.R, ElementKind.CPE),
}
_SERIES_TOKENS = {k.value: k for k in ElementKind}


@dataclass(frozen=True)
class CircuitNode:
    """One series slot: a single element or a two-branch parallel pair."""

    kinds: tuple[ElementKind, ...]

    def __post_init__(self):
        if len(self.kinds) not in (1, 2):
            raise CircuitError("a node holds one element or a two-element parallel")

    @property
    def is_parallel(self) -> bool:
        return len(self.kinds) == 2

    @property
    def param_count(self) -> int:
        return sum(PARAM_COUNT[k] for k in self.kinds)


@dataclass(frozen=True)
class CircuitModel:
    """Parsed series chain with a deterministic parameter layout."""

    canonical_name: str
    nodes: tuple[CircuitNode, ...]
    param_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.param_names:
            object.__setattr__(self, "param_names", tuple(_param_names(self.nodes)))
        if len(self.param_names) != sum(n.param_count for n in self.nodes):
            raise CircuitError("parameter names do not match node layout")

    @property
    def param_count(self) -> int:
        return len(self.param_names)

    def element_layout(self):
        """Yield (kind, param_start, param_stop, node_index) per element."""
        pos = 0
        for i, node in enumerate(self.nodes):
            for kind in node.kinds:
                yield kind, pos, pos + PARAM_COUNT[kind], i
                pos += PARAM_COUNT[kind]


def _param_names(nodes: tuple[CircuitNode, ...]) -> list[str]:
    # R, L, G, Ws carry their own per-kind counters; C/CPE are numbered by
    # "reactive slot" (parallel units and series C/CPE elements counted
    # together, left to right), matching the published parameter names.
    names: list[str] = []
    counters = {ElementKind.L: 0, ElementKind.R: 0, ElementKind.G: 0, ElementKind.WS: 0}
    slot = 0
    for node in nodes:
        reactive_node = node.is_parallel or node.kinds[0] in (ElementKind.C, ElementKind.CPE)
        if reactive_node:
            slot += 1
        for kind in node.kinds:
            if kind is ElementKind.L:
                counters[kind] += 1
                names.append(f"L{counters[kind]}")
            elif kind is ElementKind.R:
                counters[kind] += 1
                names.append(f"R{counters[kind]}")
            elif kind is ElementKind.C:
                names.append(f"C{slot}")
            elif kind is ElementKind.CPE:
                names.append(f"CPE{slot}_t")
                names.append(f"CPE{slot}_C")
            elif kind is ElementKind.G:
                counters[kind] += 1
                names.append(f"R_g{counters[kind]}")
                names.append(f"t_g{counters[kind]}")
            elif kind is ElementKind.WS:
                counters[kind] += 1
                names.append(f"W{counters[kind]}_R")
                names.append(f"W{counters[kind]}_T")
                names.append(f"W{counters[kind]}_p")
    return names


def parse_circuit(label: str) -> CircuitModel:
    """Parse a circuit name (or a known alias) into a CircuitModel."""
    label = label.strip()
    if not label:
        raise EmptyLabel("empty circuit label")
    label = ALIASES.get(label, label)
    nodes = []
    for token in label.split("-"):
        if token in _PARALLEL_TOKENS:
            nodes.append(CircuitNode(_PARALLEL_TOKENS[token]))
        elif token in _SERIES_TOKENS:
            nodes.append(CircuitNode((_SERIES_TOKENS[token],)))
        else:
            raise UnknownToken(token)
    return CircuitModel(canonical_name=label, nodes=tuple(nodes))


def element_impedance(kind: ElementKind, params, omega):
    """Impedance of a single element at angular frequency omega (rad/s).

    Parameter order: L -> (L,); R -> (R,); C -> (C,); CPE -> (t, C);
    G -> (R, t); Ws -> (R, t, p).
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (PARAM_COUNT[kind],):
        raise LengthMismatch(
            f"{kind.value} takes {PARAM_COUNT[kind]} parameters, got {params.shape}"
        )
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if np.any(w < 0):
        raise DomainError("omega must be >= 0")

    if kind is ElementKind.L:
        z = 1j * w * params[0]
    elif kind is ElementKind.R:
        z = np.full(w.shape, params[0], dtype=complex)
    elif kind is ElementKind.C:
        if np.any(w == 0):
            raise DomainError("capacitor impedance is singular at omega = 0")
        z = 1.0 / (1j * w * params[0])
    elif kind is ElementKind.CPE:
        t, c = params
        if np.any(w == 0):
            raise DomainError("CPE impedance is singular at omega = 0")
        z = 1.0 / (c * (1j * w) ** t)
    elif kind is ElementKind.G:
        r, t = params
        z = r / np.sqrt(1.0 + 1j * w * t)
    elif kind is ElementKind.WS:
        r, t, p = params
        x = (1j * w * t) ** p
        z = np.empty(w.shape, dtype=complex)
        zero = x == 0
        # tanh(x)/x -> 1 as x -> 0
        z[zero] = r
        z[~zero] = r * np.tanh(x[~zero]) / x[~zero]
    else:  # pragma: no cover
        raise CircuitError(f"unhandled element kind {kind}")
    return complex(z[0]) if scalar else z


@dataclass(frozen=True)
class Spectrum:
    """A frequency grid (Hz, strictly increasing) with complex impedances."""

    freq: np.ndarray
    z: np.ndarray
    label: str | None = None
    id: str | None = None
    extrapolated: bool = False

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        z = np.asarray(self.z, dtype=complex)
        if freq.ndim != 1 or z.ndim != 1 or freq.shape != z.shape:
            raise LengthMismatch("freq and z must be 1-D arrays of equal length")
        if freq.size:
            if np.any(freq <= 0):
                raise CircuitError("frequencies must be positive")
            if np.any(np.diff(freq) <= 0):
                raise CircuitError("frequencies must be strictly increasing")
        freq.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "z", z)

    def __len__(self) -> int:
        return self.freq.size

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * math.pi * self.freq


def circuit_impedance(model: CircuitModel, params, freq) -> Spectrum:
    """Evaluate a circuit at the given frequencies (Hz) and return a Spectrum."""
    params = np.asarray(params, dtype=float)
    if params.shape != (model.param_count,):
        raise LengthMismatch(
            f"{model.canonical_name} takes {model.param_count} parameters, got {params.shape}"
        )
    freq = np.asarray(freq, dtype=float)
    omega = 2.0 * math.pi * freq
    z = np.zeros(freq.shape, dtype=complex)
    pos = 0
    for node in model.nodes:
        if node.is_parallel:
            ka, kb = node.kinds
            na, nb = PARAM_COUNT[ka], PARAM_COUNT[kb]
            za = element_impedance(ka, params[pos:pos + na], omega)
            zb = element_impedance(kb, params[pos + na:pos + na + nb], omega)
            z += 1.0 / (1.0 / za + 1.0 / zb)
            pos += na + nb
        else:
            kind = node.kinds[0]
            n = PARAM_COUNT[kind]
            z += element_impedance(kind, params[pos:pos + n], omega)
            pos += n
    return Spectrum(freq=freq, z=z, label=model.canonical_name)
