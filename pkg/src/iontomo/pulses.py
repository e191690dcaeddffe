"""Primitive laser-pulse Hamiltonians and their compiled unitaries.

Three resonant couplings act on one vibrational mode and one electronic level
pair in the Lamb-Dicke regime:

    carrier      e^{i phase} |l><j|          + h.c.     (no phonon change)
    jc           e^{i phase} a-dag |l><j|    + h.c.     (phonon +1 on l<-j)
    ajc          e^{i phase} a     |l><j|    + h.c.     (phonon -1 on l<-j)

On top of these sit the electronic rotations R^l(theta) = exp(i theta sigma_y)
on the {l, xi} pair and the two-mode vibrational rotation generated by
L_y = i (a-dag_x a_z - a-dag_z a_x) gated by the {+, xi} sigma_x. Pulse areas
are dimensionless: the coupling constant and duration enter only through
angle = gamma * t, so no physical rates are modeled.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    ELECTRONIC_DIM,
    LEVEL_NAMES,
    MINUS,
    PLUS,
    XI,
    HilbertDims,
    Operator,
    annihilation,
    electronic_matrix,
    level_index,
    pauli,
    unitary_from_generator,
)

PULSE_KINDS = ("carrier", "jc", "ajc", "erot", "vrot")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PulseSpec:
    """One primitive laser pulse: kind, addressed level pair, mode, area, laser phase.

    erot uses the level pair only (no mode); vrot acts on both modes and its
    level pair is intrinsically (+, xi). Sideband and carrier pulses name one
    mode and one level pair containing xi.
    """

    kind: str
    levels: tuple[str, str]
    mode: str | None
    angle: float
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        l, j = (LEVEL_NAMES[level_index(x)] for x in self.levels)
        if l == j:
            raise ValueError("pulse level pair must be distinct")
        object.__setattr__(self, "levels", (l, j))
        if self.kind in ("carrier", "jc", "ajc"):
            if self.mode not in ("x", "z"):
                raise ValueError(f"{self.kind} pulse must name mode 'x' or 'z'")
        else:
            object.__setattr__(self, "mode", None)
        if self.kind == "erot" and (l not in ("-", "+") or j != "xi"):
            raise ValueError("erot addresses level '-' or '+' paired with 'xi'")
        if self.kind == "vrot":
            object.__setattr__(self, "levels", ("+", "xi"))
        if not math.isfinite(self.angle):
            raise ValueError("pulse angle must be finite")
        if not 0.0 <= self.phase < TWO_PI:
            raise ValueError(f"pulse phase {self.phase} not in [0, 2*pi)")

    def to_record(self) -> dict:
        """Flat record with the stable field names used in schedule dumps."""
        return {
            "kind": self.kind,
            "levels": list(self.levels),
            "mode": self.mode,
            "angle": float(self.angle),
            "phase": float(self.phase),
        }

    @classmethod
    def from_record(cls, record: dict) -> "PulseSpec":
        return cls(
            kind=record["kind"],
            levels=tuple(record["levels"]),
            mode=record["mode"],
            angle=float(record["angle"]),
            phase=float(record.get("phase", 0.0)),
        )


def _mode_factors(mode: str, dims: HilbertDims, vib_op: np.ndarray) -> np.ndarray:
    """vib_op on the named mode, identity on the other, in the (x, z) slot order."""
    if mode == "x":
        return np.kron(vib_op, np.eye(dims.dz, dtype=complex))
    if mode == "z":
        return np.kron(np.eye(dims.dx, dtype=complex), vib_op)
    raise ValueError(f"mode must be 'x' or 'z', got {mode!r}")


def _coupling(elec_lj: np.ndarray, vib: np.ndarray, phase: float) -> np.ndarray:
    term = np.exp(1j * phase) * np.kron(elec_lj, vib)
    return term + term.conj().T


def h_carrier(levels, phase: float, dims: HilbertDims) -> Operator:
    """Carrier coupling e^{i phase}|l><j| + h.c., identity on both modes."""
    l, j = (level_index(x) for x in levels)
    if l == j:
        raise ValueError("carrier level pair must be distinct")
    vib = np.eye(dims.vib_dim, dtype=complex)
    return Operator(_coupling(electronic_matrix(l, j), vib, phase), dims, hermitian=True)


def h_jc(mode: str, levels, phase: float, dims: HilbertDims) -> Operator:
    """Red-sideband-type coupling e^{i phase} a-dag_mode |l><j| + h.c."""
    l, j = (level_index(x) for x in levels)
    if l == j:
        raise ValueError("jc level pair must be distinct")
    dim_mode = dims.dx if mode == "x" else dims.dz
    adag = annihilation(dim_mode).conj().T
    vib = _mode_factors(mode, dims, adag)
    return Operator(_coupling(electronic_matrix(l, j), vib, phase), dims, hermitian=True)


def h_ajc(mode: str, levels, phase: float, dims: HilbertDims) -> Operator:
    """Blue-sideband-type coupling e^{i phase} a_mode |l><j| + h.c."""
    l, j = (level_index(x) for x in levels)
    if l == j:
        raise ValueError("ajc level pair must be distinct")
    dim_mode = dims.dx if mode == "x" else dims.dz
    vib = _mode_factors(mode, dims, annihilation(dim_mode))
    return Operator(_coupling(electronic_matrix(l, j), vib, phase), dims, hermitian=True)


@functools.lru_cache(maxsize=None)
def r_electronic(level, theta: float, dims: HilbertDims) -> Operator:
    """Electronic rotation exp(i theta sigma_y) on the {level, xi} pair.

    Acts as identity on the unaddressed level and on both vibrational modes:
    |l> -> cos(theta)|l> + sin(theta)|xi>, |xi> -> -sin(theta)|l> + cos(theta)|xi>.
    """
    l = level_index(level)
    if l == XI:
        raise ValueError("electronic rotation addresses '-' or '+' against 'xi'")
    return unitary_from_generator(pauli(l, XI, "y", dims), theta)


@functools.lru_cache(maxsize=None)
def l_y(dims: HilbertDims) -> Operator:
    """Two-mode rotation generator i(a-dag_x a_z - a-dag_z a_x), embedded in the composite space.

    Sign and scale are fixed operationally: exp(i (pi/2) L_y) maps |n>_x|0>_z
    to |0>_x|n>_z with coefficient exactly +1 for every n below cutoff. It is
    block-diagonal in total phonon number, so states supported on
    n_x + n_z < min(dx, dz) never feel the truncation.
    """
    ax = annihilation(dims.dx)
    az = annihilation(dims.dz)
    l2 = 1j * (np.kron(ax.conj().T, az) - np.kron(ax, az.conj().T))
    m = np.kron(np.eye(ELECTRONIC_DIM, dtype=complex), l2)
    return Operator(m, dims, hermitian=True)


@functools.lru_cache(maxsize=None)
def r_vibr(theta: float, dims: HilbertDims) -> Operator:
    """Vibrational rotation exp(i theta L_y sigma_x^{+xi}).

    Identity on the |-> electronic sector; on the sigma_x = +-1 eigensectors of
    the {+, xi} pair it acts as exp(+-i theta L_y), i.e. a beam splitter
    between the two trap modes. theta = pi/2 swaps the mode contents on the
    bright branch.
    """
    ax = annihilation(dims.dx)
    az = annihilation(dims.dz)
    l2 = 1j * (np.kron(ax.conj().T, az) - np.kron(ax, az.conj().T))
    sig = electronic_matrix(PLUS, XI) + electronic_matrix(XI, PLUS)
    gen = Operator(np.kron(sig, l2), dims, hermitian=True)
    return unitary_from_generator(gen, theta)


@functools.lru_cache(maxsize=None)
def compile_pulse(spec: PulseSpec, dims: HilbertDims) -> Operator:
    """Unitary exp(i * angle * H_kind) of a primitive pulse."""
    if spec.kind == "erot":
        return r_electronic(spec.levels[0], spec.angle, dims)
    if spec.kind == "vrot":
        return r_vibr(spec.angle, dims)
    if spec.kind == "carrier":
        h = h_carrier(spec.levels, spec.phase, dims)
    elif spec.kind == "jc":
        h = h_jc(spec.mode, spec.levels, spec.phase, dims)
    else:
        h = h_ajc(spec.mode, spec.levels, spec.phase, dims)
    return unitary_from_generator(h, spec.angle)
