"""The coherence-measurement protocol.

A vibrational state phi of mode x, an empty mode z and the electronic ground
level |-> are prepared; a composed unitary entangles the two modes so that the
transverse pseudospin expectations of the {-, +} pair read out one matrix
element <m| rho_vibr |n> of the unknown vibrational density operator. Each
element is an independent protocol run: no other element is needed.

The composed unitary factors as (branch shifters) * (four-pulse entangler):

    U_mn = V+_n V-_m U_00

U_00 takes |phi>_x |0>_z |-> to (|phi>_x|0>_z|-> + |0>_x|phi>_z|+>)/sqrt(2);
V-_m then lifts the z mode of the |-> branch from |0> to |m>, and V+_n lifts
the x mode of the |+> branch from |0> to |n>, each acting as the identity on
the other branch.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import TruncationLeakageError
from .hilbert import (
    MINUS,
    PLUS,
    XI,
    DensityOperator,
    HilbertDims,
    Operator,
    PureState,
    apply,
    composite,
    electronic_matrix,
    expectation,
    pauli,
)
from .pulses import PulseSpec, compile_pulse
from .states import VibrationalState

HALF_PI = math.pi / 2.0
QUARTER_PI = math.pi / 4.0

_SQRT2 = math.sqrt(2.0)

# Transverse eigenvectors of the {-, +} pseudospin, electronic basis (-, +, xi).
_EIGVEC_PLUS = {
    "x": np.array([1.0, 1.0, 0.0]) / _SQRT2,
    "y": np.array([1.0, -1.0j, 0.0]) / _SQRT2,
}
_EIGVEC_MINUS = {
    "x": np.array([1.0, -1.0, 0.0]) / _SQRT2,
    "y": np.array([1.0, 1.0j, 0.0]) / _SQRT2,
}
_OBSERVABLE_TAGS = {"x": 0, "y": 1}


@dataclass(frozen=True)
class ProtocolSettings:
    """How a protocol run is evaluated.

    v_mode 'ideal' uses exact branch shifters (completed to permutations);
    'compiled' builds them from carrier/sideband pi-pulse ladders. shots=None
    means exact expectation values; otherwise each transverse observable is
    sampled that many times. compat_rminus_final reproduces the historical
    four-pulse ordering whose final pulse addresses the {-, xi} pair; it fails
    the entangler identity and exists only for comparison.
    """

    dims: HilbertDims
    v_mode: str = "ideal"
    shots: int | None = None
    seed: int = 0
    compat_rminus_final: bool = False

    def __post_init__(self):
        if self.v_mode not in ("ideal", "compiled"):
            raise ValueError(f"v_mode must be 'ideal' or 'compiled', got {self.v_mode!r}")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1 (or None for exact mode)")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.dims.dx != self.dims.dz:
            raise ValueError("protocol requires equal mode cutoffs (the rotation maps x-support onto z)")


@dataclass(frozen=True)
class CoherenceEstimate:
    """One measured matrix element, with its statistical error.

    stderr is zero in exact mode; in sampled mode it combines the standard
    errors of the two transverse sample means.
    """

    value: complex
    stderr: float
    shots_used: int
    m: int
    n: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")
        if self.shots_used == 0 and self.stderr != 0.0:
            raise ValueError("exact-mode estimate must carry stderr = 0")


def prepare_initial(phi: VibrationalState, dims: HilbertDims) -> DensityOperator:
    """Composite initial state rho_vibr (x) |0>_z<0| (x) |-><-|.

    phi supplies the unknown x-mode factor; a pure phi yields a rank-one
    composite. States whose recorded truncation leakage exceeds the tolerance
    they were built under are rejected.
    """
    if phi.dim != dims.dx:
        raise ValueError(f"vibrational state dim {phi.dim} != dx {dims.dx}")
    if phi.tail_mass > phi.tail_tol:
        raise TruncationLeakageError("input", phi.dim, phi.tail_mass, phi.tail_tol, phi.dim)
    z_vac = np.zeros((dims.dz, dims.dz), dtype=complex)
    z_vac[0, 0] = 1.0
    rho = composite(electronic_matrix(MINUS, MINUS), phi.density_matrix(), z_vac)
    return DensityOperator(rho, dims)


def prepare_initial_pure(phi: VibrationalState, dims: HilbertDims) -> PureState:
    """State-vector form |phi>_x |0>_z |-> for pure phi."""
    if not phi.is_pure:
        raise ValueError("prepare_initial_pure requires a pure vibrational state")
    if phi.dim != dims.dx:
        raise ValueError(f"vibrational state dim {phi.dim} != dx {dims.dx}")
    e_minus = np.zeros(3, dtype=complex)
    e_minus[MINUS] = 1.0
    z_vac = np.zeros(dims.dz, dtype=complex)
    z_vac[0] = 1.0
    return PureState(np.kron(np.kron(e_minus, phi.amplitudes), z_vac), dims)


def u00_schedule(compat_rminus_final: bool = False) -> list[PulseSpec]:
    """The four electronic/vibrational rotations of the entangler, in application order.

    The first two pulses split |-> into (|-> + |alpha>)/sqrt(2) with
    |alpha> = (|+> + |xi>)/sqrt(2) the bright state of the {+, xi} sigma_x;
    the vibrational rotation swaps the mode contents on the bright branch
    only; the final pulse restores |+> from |alpha> while leaving |->
    untouched, which forces it onto the {+, xi} pair with angle -pi/4. The
    compat variant instead repeats the opening {-, xi} pulse, leaves bright
    population on |xi>, and is kept only as a regression reference.
    """
    schedule = [
        PulseSpec("erot", ("-", "xi"), None, QUARTER_PI),
        PulseSpec("erot", ("+", "xi"), None, -QUARTER_PI),
        PulseSpec("vrot", ("+", "xi"), None, HALF_PI),
    ]
    if compat_rminus_final:
        schedule.append(PulseSpec("erot", ("-", "xi"), None, QUARTER_PI))
    else:
        schedule.append(PulseSpec("erot", ("+", "xi"), None, -QUARTER_PI))
    return schedule


@functools.lru_cache(maxsize=None)
def u00(dims: HilbertDims, compat_rminus_final: bool = False) -> Operator:
    """The four-pulse entangler; see u00_schedule for the pulse roles."""
    if dims.dx != dims.dz:
        raise ValueError("entangler requires equal mode cutoffs")
    u = None
    for spec in u00_schedule(compat_rminus_final):
        p = compile_pulse(spec, dims)
        u = p if u is None else p @ u
    return u


def _ideal_shift(k: int, dim: int, completion: str) -> np.ndarray:
    """Permutation of Fock indices extending |0> -> |k| to a unitary."""
    idx = np.arange(dim)
    if completion == "cycle":
        return (idx + k) % dim
    if completion == "swap":
        out = idx.copy()
        out[0], out[k] = k, 0
        return out
    raise ValueError(f"unknown completion {completion!r}")


def _branch_permutation(dims: HilbertDims, sector: int, axis: str, k: int,
                        completion: str) -> Operator:
    """Unitary permutation shifting one mode's Fock index inside one electronic sector."""
    dim_mode = dims.dx if axis == "x" else dims.dz
    shift = _ideal_shift(k, dim_mode, completion)
    m = np.zeros((dims.total_dim, dims.total_dim), dtype=complex)
    for e in range(3):
        for nx in range(dims.dx):
            for nz in range(dims.dz):
                if e == sector:
                    tx = shift[nx] if axis == "x" else nx
                    tz = shift[nz] if axis == "z" else nz
                else:
                    tx, tz = nx, nz
                m[dims.index(e, tx, tz), dims.index(e, nx, nz)] = 1.0
    return Operator(m, dims, unitary=True)


@functools.lru_cache(maxsize=None)
def v_plus_ideal(n: int, dims: HilbertDims, completion: str = "cycle") -> Operator:
    """Exact branch shifter: |0>_x|chi>_z|+> -> |n>_x|chi>_z|+>, identity on the |-> sector.

    Only the action on the x-vacuum slice of the |+> sector and the identity
    on |-> are protocol-relevant; the rest of the partial isometry is
    completed by a fixed Fock-index permutation ('cycle' or 'swap'), and any
    such completion yields identical observables.
    """
    if not 0 <= n < dims.dx:
        raise ValueError(f"target Fock index {n} out of range for dx={dims.dx}")
    return _branch_permutation(dims, PLUS, "x", n, completion)


@functools.lru_cache(maxsize=None)
def v_minus_ideal(m: int, dims: HilbertDims, completion: str = "cycle") -> Operator:
    """Exact branch shifter: |phi>_x|0>_z|-> -> |phi>_x|m>_z|->, identity on the |+> sector."""
    if not 0 <= m < dims.dz:
        raise ValueError(f"target Fock index {m} out of range for dz={dims.dz}")
    return _branch_permutation(dims, MINUS, "z", m, completion)


def _ladder_schedule(k: int, levels: tuple[str, str], mode: str) -> list[PulseSpec]:
    """Alternating blue/red sideband pi-pulses climbing |0> -> |k> on one branch.

    Step j has pair coupling sqrt(j+1), so the area is (pi/2)/sqrt(j+1). The
    laser phases (pi/2 on the blue steps, 3*pi/2 on the red steps and the odd
    closing carrier) cancel the factor i that each resonant pi-pulse would
    otherwise contribute, leaving every step with coefficient exactly +1.
    """
    schedule = []
    for j in range(k):
        area = HALF_PI / math.sqrt(j + 1)
        if j % 2 == 0:
            schedule.append(PulseSpec("ajc", levels, mode, area, HALF_PI))
        else:
            schedule.append(PulseSpec("jc", levels, mode, area, 3.0 * HALF_PI))
    if k % 2 == 1:
        schedule.append(PulseSpec("carrier", levels, mode, HALF_PI, 3.0 * HALF_PI))
    return schedule


def v_plus_schedule(n: int) -> list[PulseSpec]:
    """Pulse list realizing V+_n on the {+, xi} pair and mode x."""
    return _ladder_schedule(n, ("+", "xi"), "x")


def v_minus_schedule(m: int) -> list[PulseSpec]:
    """Pulse list realizing V-_m on the {-, xi} pair and mode z."""
    return _ladder_schedule(m, ("-", "xi"), "z")


def _compile_schedule(schedule: list[PulseSpec], dims: HilbertDims) -> Operator:
    u = Operator(np.eye(dims.total_dim, dtype=complex), dims, unitary=True)
    for spec in schedule:
        u = compile_pulse(spec, dims) @ u
    return u


@functools.lru_cache(maxsize=None)
def v_plus_compiled(n: int, dims: HilbertDims) -> Operator:
    """V+_n as a product of carrier/sideband pi-pulses on the {+, xi} pair, mode x.

    Requires n <= dx - 2 so the ladder stays clear of the truncation boundary.
    """
    if not 0 <= n <= dims.dx - 2:
        raise ValueError(f"compiled ladder requires 0 <= n <= dx-2 = {dims.dx - 2}, got {n}")
    return _compile_schedule(v_plus_schedule(n), dims)


@functools.lru_cache(maxsize=None)
def v_minus_compiled(m: int, dims: HilbertDims) -> Operator:
    """V-_m as a product of carrier/sideband pi-pulses on the {-, xi} pair, mode z."""
    if not 0 <= m <= dims.dz - 2:
        raise ValueError(f"compiled ladder requires 0 <= m <= dz-2 = {dims.dz - 2}, got {m}")
    return _compile_schedule(v_minus_schedule(m), dims)


def u_mn(m: int, n: int, settings: ProtocolSettings) -> Operator:
    """The full protocol unitary V+_n V-_m U_00 for one matrix element."""
    dims = settings.dims
    u = u00(dims, settings.compat_rminus_final)
    if settings.v_mode == "ideal":
        v_minus = v_minus_ideal(m, dims)
        v_plus = v_plus_ideal(n, dims)
    else:
        v_minus = v_minus_compiled(m, dims)
        v_plus = v_plus_compiled(n, dims)
    return v_plus @ (v_minus @ u)


def _electronic_reduced(rho: DensityOperator, dims: HilbertDims) -> np.ndarray:
    r = rho.matrix.reshape(3, dims.vib_dim, 3, dims.vib_dim)
    return np.einsum("avbv->ab", r)


def transverse_probabilities(rho: DensityOperator, observable: str) -> np.ndarray:
    """Outcome probabilities [p(+1), p(-1), p(0)] of one transverse pseudospin.

    The +-1 outcomes project onto the transverse eigenvectors of the {-, +}
    pair; the 0 outcome is the |xi> sector. Since all projectors act as the
    identity on the modes, only the reduced electronic state enters.
    """
    if observable not in _OBSERVABLE_TAGS:
        raise ValueError(f"observable must be 'x' or 'y', got {observable!r}")
    if not isinstance(rho.dims, HilbertDims):
        raise ValueError("transverse sampling requires a composite-space density operator")
    red = _electronic_reduced(rho, rho.dims)
    s_plus = _EIGVEC_PLUS[observable]
    s_minus = _EIGVEC_MINUS[observable]
    p = np.array([
        (s_plus.conj() @ red @ s_plus).real,
        (s_minus.conj() @ red @ s_minus).real,
        red[XI, XI].real,
    ])
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum()


def coherence_expectation(rho_mn: DensityOperator) -> complex:
    """<sigma_x> - i <sigma_y> of the transformed state = <m| rho_vibr |n>.

    With the pseudospin conventions of this package sigma_x - i sigma_y is
    2|-><+|, and on U_mn rho_0 U_mn-dag that combination evaluates to exactly
    the (m, n) matrix element of the input vibrational density operator. The
    sign of the imaginary part is pinned by the complex-coherent-state
    regression test.
    """
    if not isinstance(rho_mn.dims, HilbertDims):
        raise ValueError("coherence extraction requires a composite-space density operator")
    dims = rho_mn.dims
    ex = expectation(rho_mn, pauli(MINUS, PLUS, "x", dims)).real
    ey = expectation(rho_mn, pauli(MINUS, PLUS, "y", dims)).real
    return complex(ex, -ey)


def coherence_sampled(rho_mn: DensityOperator, m: int, n: int,
                      shots: int, seed: int) -> CoherenceEstimate:
    """Finite-statistics estimate of the coherence from projective samples.

    Each transverse observable is measured `shots` times in its own eigenbasis
    (outcomes +1, -1, and 0 for the |xi> sector) with a generator seeded from
    (seed, m, n, observable tag), so estimates are reproducible bit-for-bit
    and independent of evaluation order. stderr combines the two sample means:
    sqrt(var_x + var_y) / sqrt(shots).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    stats = {}
    for observable, tag in _OBSERVABLE_TAGS.items():
        probs = transverse_probabilities(rho_mn, observable)
        rng = np.random.default_rng([int(seed), int(m), int(n), tag])
        c_plus, c_minus, _ = rng.multinomial(shots, probs)
        mean = (c_plus - c_minus) / shots
        second_moment = (c_plus + c_minus) / shots
        var = max(second_moment - mean * mean, 0.0)
        if shots > 1:
            var *= shots / (shots - 1)
        stats[observable] = (mean, var)
    mean_x, var_x = stats["x"]
    mean_y, var_y = stats["y"]
    value = complex(mean_x, -mean_y)
    stderr = math.sqrt((var_x + var_y) / shots)
    return CoherenceEstimate(value, stderr, shots, m, n)


def measure_element(phi: VibrationalState, m: int, n: int,
                    settings: ProtocolSettings) -> CoherenceEstimate:
    """One full protocol run: prepare, transform with U_mn, read out <m| rho_vibr |n>."""
    rho0 = prepare_initial(phi, settings.dims)
    u = u_mn(m, n, settings)
    rho_mn = apply(u, rho0)
    if settings.shots is None:
        return CoherenceEstimate(coherence_expectation(rho_mn), 0.0, 0, m, n)
    return coherence_sampled(rho_mn, m, n, settings.shots, settings.seed)
