"""Single-mode vibrational states used as the unknown input of the protocol.

Constructors produce either a pure amplitude vector or a density matrix on a
truncated Fock space of the stated dimension. Families with analytic support
beyond any cutoff (coherent, squeezed, cat, thermal) are guarded: construction
fails if the out-of-range mass exceeds tail_tol, and succeeds by renormalizing
the truncated state so every downstream invariant holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, TruncationLeakageError

STATE_NORM_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-12
_TAIL_EXTEND = 512


@dataclass(frozen=True, eq=False)
class VibrationalState:
    """Pure or mixed state of one vibrational mode on a truncated Fock space.

    tail_mass records the analytic population the truncation discarded
    (zero for states defined directly on the truncated space), tail_tol the
    tolerance it was constructed under.
    """

    dim: int
    amplitudes: np.ndarray | None = None
    matrix: np.ndarray | None = None
    tail_mass: float = 0.0
    tail_tol: float = 1.0

    def __post_init__(self):
        if (self.amplitudes is None) == (self.matrix is None):
            raise ValueError("exactly one of amplitudes / matrix must be given")
        if self.amplitudes is not None:
            v = np.array(self.amplitudes, dtype=complex).reshape(-1)
            if v.shape[0] != self.dim:
                raise ValueError(f"amplitude vector length {v.shape[0]} != dim {self.dim}")
            if abs(np.linalg.norm(v) - 1.0) > STATE_NORM_TOL:
                raise ValueError("pure vibrational state is not normalized within 1e-10")
            v.setflags(write=False)
            object.__setattr__(self, "amplitudes", v)
        else:
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"density matrix shape {m.shape} != ({self.dim}, {self.dim})")
            if np.max(np.abs(m - m.conj().T)) > 1e-12:
                raise ValueError("vibrational density matrix is not hermitian within 1e-12")
            if abs(np.trace(m).real - 1.0) > STATE_NORM_TOL:
                raise ValueError("vibrational density matrix trace deviates from 1 by more than 1e-10")
            if np.linalg.eigvalsh(m)[0] < -1e-10:
                raise ValueError("vibrational density matrix has eigenvalue below -1e-10")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def is_pure(self) -> bool:
        return self.amplitudes is not None

    def density_matrix(self) -> np.ndarray:
        """dim x dim density matrix regardless of the internal representation."""
        if self.is_pure:
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return np.array(self.matrix)


def _guard_tail(kind: str, populations: np.ndarray, dim: int, tail_tol: float) -> float:
    """Check the analytic out-of-range mass; return it or raise with the required dim."""
    suffix = np.cumsum(populations[::-1])[::-1]
    tail = float(suffix[dim]) if dim < len(suffix) else 0.0
    if tail > tail_tol:
        ok = np.nonzero(suffix <= tail_tol)[0]
        required = int(ok[0]) if len(ok) else len(populations)
        raise TruncationLeakageError(kind, dim, tail, tail_tol, required)
    return tail


def fock(n: int, dim: int) -> VibrationalState:
    """Number state |n>."""
    if not 0 <= n < dim:
        raise ValueError(f"Fock index {n} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return VibrationalState(dim, amplitudes=v, tail_tol=DEFAULT_TAIL_TOL)


def coherent(alpha: complex, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> VibrationalState:
    """Coherent state, <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!), renormalized on the cutoff."""
    alpha = complex(alpha)
    nbig = dim + _TAIL_EXTEND
    amps = np.zeros(nbig, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(nbig - 1):
        amps[n + 1] = amps[n] * alpha / math.sqrt(n + 1)
    tail = _guard_tail("coherent", np.abs(amps) ** 2, dim, tail_tol)
    v = amps[:dim]
    v = v / np.linalg.norm(v)
    return VibrationalState(dim, amplitudes=v, tail_mass=tail, tail_tol=tail_tol)


def squeezed(r: float, phi: float, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> VibrationalState:
    """Squeezed vacuum with even-Fock amplitudes from the two-term recurrence.

    c_0 = 1/sqrt(cosh r),  c_{n+2} = -e^{i phi} tanh(r) sqrt((n+1)/(n+2)) c_n.
    """
    if r < 0:
        raise ValueError("squeezing magnitude r must be >= 0")
    nbig = dim + _TAIL_EXTEND
    amps = np.zeros(nbig, dtype=complex)
    amps[0] = 1.0 / math.sqrt(math.cosh(r))
    factor = -np.exp(1j * phi) * math.tanh(r)
    for n in range(0, nbig - 2, 2):
        amps[n + 2] = amps[n] * factor * math.sqrt((n + 1) / (n + 2))
    tail = _guard_tail("squeezed", np.abs(amps) ** 2, dim, tail_tol)
    v = amps[:dim]
    v = v / np.linalg.norm(v)
    return VibrationalState(dim, amplitudes=v, tail_mass=tail, tail_tol=tail_tol)


def cat(alpha: complex, parity: str, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> VibrationalState:
    """Normalized |alpha> + |-alpha> (even) or |alpha> - |-alpha> (odd)."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    sign = 1.0 if parity == "even" else -1.0
    alpha = complex(alpha)
    norm_sq = 2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2))
    if norm_sq < 1e-30:
        raise DegenerateInputError("odd cat with alpha = 0 is the zero vector")
    nbig = dim + _TAIL_EXTEND
    base = np.zeros(nbig, dtype=complex)
    base[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(nbig - 1):
        base[n + 1] = base[n] * alpha / math.sqrt(n + 1)
    parities = np.where(np.arange(nbig) % 2 == 0, 1.0, -1.0)
    amps = base * (1.0 + sign * parities) / math.sqrt(norm_sq)
    tail = _guard_tail("cat", np.abs(amps) ** 2, dim, tail_tol)
    v = amps[:dim]
    v = v / np.linalg.norm(v)
    return VibrationalState(dim, amplitudes=v, tail_mass=tail, tail_tol=tail_tol)


def thermal(nbar: float, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> VibrationalState:
    """Thermal (mixed) state, p_n proportional to (nbar/(1+nbar))^n, renormalized on the cutoff."""
    if nbar < 0:
        raise ValueError("mean occupation nbar must be >= 0")
    if nbar == 0:
        f = fock(0, dim)
        return VibrationalState(dim, matrix=f.density_matrix(), tail_tol=tail_tol)
    q = nbar / (1.0 + nbar)
    tail = q ** dim  # geometric series remainder
    if tail > tail_tol:
        required = math.ceil(math.log(tail_tol) / math.log(q))
        raise TruncationLeakageError("thermal", dim, tail, tail_tol, required)
    p = (1.0 - q) * q ** np.arange(dim)
    p = p / p.sum()
    return VibrationalState(dim, matrix=np.diag(p).astype(complex),
                            tail_mass=tail, tail_tol=tail_tol)


def dephase(state: VibrationalState, lam: float) -> VibrationalState:
    """Fock dephasing channel: rho_mn -> rho_mn * exp(-lam (m-n)^2), populations untouched.

    The kernel is a positive-semidefinite Gaussian Gram matrix, so the output
    is a valid density operator and the map preserves the trace exactly.
    """
    if lam < 0:
        raise ValueError("dephasing strength must be >= 0")
    n = np.arange(state.dim)
    kernel = np.exp(-lam * (n[:, None] - n[None, :]) ** 2)
    rho = state.density_matrix() * kernel
    return VibrationalState(state.dim, matrix=rho,
                            tail_mass=state.tail_mass, tail_tol=state.tail_tol)


def from_amplitudes(values, dim: int | None = None) -> VibrationalState:
    """Pure state from a raw amplitude list; must be normalized within 1e-6 (then renormalized)."""
    v = np.array(values, dtype=complex).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"raw amplitude list has length {v.shape[0]}, expected {dim}")
    norm = np.linalg.norm(v)
    if norm < 1e-30:
        raise DegenerateInputError("raw amplitude list is the zero vector")
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"raw amplitude list norm {norm} deviates from 1 by more than 1e-6")
    return VibrationalState(v.shape[0], amplitudes=v / norm)
