"""Element-by-element reconstruction, physical projection, and quality metrics.

reconstruct() sweeps a square block of matrix elements, one independent
protocol run per cell; by default no hermiticity shortcut is taken, so the
(n, m) cell really is measured through its own composed unitary rather than
copied from the conjugate of (m, n). decoherence_monitor() is the three-element
use case: it tracks |rho_20| against sqrt(rho_00 rho_22) without ever filling
the full block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .hilbert import DensityOperator
from .protocol import ProtocolSettings, measure_element
from .states import VibrationalState, dephase


@dataclass
class ReconstructionReport:
    """Reconstructed block plus everything needed to judge it.

    estimates[m, n] is the measured <m| rho_vibr |n>; stderrs is zero in exact
    mode. truth is the same block of the known input (always available here,
    optional in the schema), projected the nearest physical density matrix of
    the estimates.
    """

    nmax: int
    estimates: np.ndarray
    stderrs: np.ndarray
    truth: np.ndarray | None = None
    projected: np.ndarray | None = None
    metrics: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, DensityOperator):
        return np.asarray(obj.matrix)
    return np.asarray(obj, dtype=complex)


def trace_distance(a, b) -> float:
    """(1/2) sum |eigenvalues of A - B| for hermitian A, B (density operators or blocks)."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch {ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = (diff + diff.conj().T) / 2.0
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt (Frobenius) distance between two matrices."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch {ma.shape} vs {mb.shape}")
    return float(np.linalg.norm(ma - mb))


def project_physical(matrix) -> DensityOperator:
    """Nearest physical density matrix: hermitize, clip negative eigenvalues, renormalize."""
    m = _as_matrix(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    herm = (m + m.conj().T) / 2.0
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total < 1e-30:
        raise DegenerateInputError("matrix has no positive part; cannot renormalize")
    rho = (v * (w / total)) @ v.conj().T
    rho = (rho + rho.conj().T) / 2.0
    return DensityOperator(rho, m.shape[0])


def reconstruct(phi: VibrationalState, nmax: int, settings: ProtocolSettings,
                use_hermitian_symmetry: bool = False) -> ReconstructionReport:
    """Measure every matrix element of the (nmax+1)-square block of rho_vibr.

    Each cell is one full protocol run. With use_hermitian_symmetry the lower
    triangle is filled from the conjugate upper triangle instead of being
    measured, halving the work at the cost of no longer exercising the
    element-independence property.
    """
    dims = settings.dims
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    if nmax + 1 > dims.dx:
        raise ValueError(f"nmax {nmax} needs dx >= {nmax + 1}, got {dims.dx}")
    if settings.v_mode == "compiled" and nmax > dims.dx - 2:
        raise ValueError(f"compiled mode needs nmax <= dx-2 = {dims.dx - 2}, got {nmax}")
    size = nmax + 1
    estimates = np.zeros((size, size), dtype=complex)
    stderrs = np.zeros((size, size), dtype=float)
    for m in range(size):
        for n in range(size):
            if use_hermitian_symmetry and n < m:
                estimates[m, n] = np.conj(estimates[n, m])
                stderrs[m, n] = stderrs[n, m]
                continue
            est = measure_element(phi, m, n, settings)
            estimates[m, n] = est.value
            stderrs[m, n] = est.stderr
    truth = phi.density_matrix()[:size, :size]
    metrics = {
        "max_abs_error": float(np.max(np.abs(estimates - truth))),
        "trace_distance": trace_distance(estimates, truth),
        "hs_distance": hs_distance(estimates, truth),
    }
    projected = project_physical(estimates).matrix
    echo = {
        "dx": dims.dx,
        "dz": dims.dz,
        "v_mode": settings.v_mode,
        "shots": settings.shots,
        "seed": settings.seed,
        "nmax": nmax,
        "use_hermitian_symmetry": use_hermitian_symmetry,
        "compat_rminus_final": settings.compat_rminus_final,
    }
    return ReconstructionReport(nmax, estimates, stderrs, truth=truth,
                                projected=projected, metrics=metrics, settings=echo)


@dataclass(frozen=True)
class MonitorPoint:
    """One monitor sample: dephasing strength, |rho_20|, and sqrt(rho_00 rho_22)."""

    lam: float
    rho20_abs: float
    bound: float


def decoherence_monitor(phi: VibrationalState, lambdas,
                        settings: ProtocolSettings) -> list[MonitorPoint]:
    """Track the 2-0 coherence against its positivity bound under growing dephasing.

    For each lambda the input is dephased and exactly three elements are
    measured: (2, 0), (0, 0) and (2, 2). For any valid density operator
    |rho_20| <= sqrt(rho_00 rho_22), with equality on rank-one states.
    """
    lambdas = [float(l) for l in lambdas]
    if not lambdas:
        raise ValueError("lambda list must not be empty")
    if any(l < 0 for l in lambdas):
        raise ValueError("dephasing strengths must be >= 0")
    if lambdas != sorted(lambdas):
        raise ValueError("dephasing strengths must be sorted ascending")
    if settings.dims.dx < 3:
        raise ValueError("monitor needs dx >= 3 to address the (2, 0) element")
    points = []
    for lam in lambdas:
        phi_l = dephase(phi, lam)
        r20 = measure_element(phi_l, 2, 0, settings)
        r00 = measure_element(phi_l, 0, 0, settings)
        r22 = measure_element(phi_l, 2, 2, settings)
        bound = float(np.sqrt(max(r00.value.real, 0.0) * max(r22.value.real, 0.0)))
        points.append(MonitorPoint(lam, abs(r20.value), bound))
    return points
