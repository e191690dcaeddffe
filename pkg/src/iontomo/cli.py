"""Command-line interface.

Subcommands: reconstruct, coherence, monitor, validate. Runs are driven by a
JSON config (archivable, reproducible); output is JSON or CSV with sorted
keys, floats printed to 17 significant digits and complex values as {re, im}
pairs, so identical configs produce byte-identical files. Every failure path
emits a structured error record and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import protocol, tomography
from .errors import DegenerateInputError, TruncationLeakageError
from .hilbert import HilbertDims, apply, basis_state, unitary_from_generator
from .pulses import compile_pulse, l_y
from .states import (
    DEFAULT_TAIL_TOL,
    VibrationalState,
    cat,
    coherent,
    dephase,
    fock,
    from_amplitudes,
    squeezed,
    thermal,
)


class UsageError(ValueError):
    """Bad command line."""


class ConfigError(ValueError):
    """Bad or missing config field."""


# ---------------------------------------------------------------------------
# stable serialization

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("cannot serialize non-finite float")
    return format(float(x), ".17g")


def stable_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return stable_json(complex_record(complex(obj)))
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {stable_json(v)}" for k, v in sorted(obj.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(stable_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return stable_json(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj)}")


def complex_record(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def to_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# config handling

def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: "
                          f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _field(cfg: dict, name: str, default=None, required: bool = False):
    if name not in cfg:
        if required:
            raise ConfigError(f"missing config field '{name}'")
        return default
    return cfg[name]


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    raise ConfigError(f"field '{where}' must be a number or {{re, im}} pair")


def build_dims(cfg: dict) -> HilbertDims:
    d = _field(cfg, "dims", required=True)
    if not isinstance(d, dict) or "dx" not in d or "dz" not in d:
        raise ConfigError("config field 'dims' must be an object with dx and dz")
    try:
        return HilbertDims(int(d["dx"]), int(d["dz"]))
    except ValueError as exc:
        raise ConfigError(f"bad dims: {exc}") from exc


def build_state(cfg: dict, dims: HilbertDims) -> VibrationalState:
    spec = _field(cfg, "state", required=True)
    if not isinstance(spec, dict):
        raise ConfigError("config field 'state' must be an object")
    kind = _field(spec, "kind", required=True)
    tail_tol = float(_field(spec, "tail_tol", DEFAULT_TAIL_TOL))
    dim = dims.dx
    if kind == "fock":
        state = fock(int(_field(spec, "n", required=True)), dim)
    elif kind == "coherent":
        alpha = _as_complex(_field(spec, "alpha", required=True), "state.alpha")
        state = coherent(alpha, dim, tail_tol)
    elif kind == "squeezed":
        state = squeezed(float(_field(spec, "r", required=True)),
                         float(_field(spec, "phi", 0.0)), dim, tail_tol)
    elif kind == "cat":
        alpha = _as_complex(_field(spec, "alpha", required=True), "state.alpha")
        state = cat(alpha, _field(spec, "parity", required=True), dim, tail_tol)
    elif kind == "thermal":
        state = thermal(float(_field(spec, "nbar", required=True)), dim, tail_tol)
    elif kind == "raw":
        values = _field(spec, "amplitudes", required=True)
        if not isinstance(values, list):
            raise ConfigError("state.amplitudes must be a list")
        amps = [_as_complex(v, "state.amplitudes") for v in values]
        state = from_amplitudes(amps, dim)
    else:
        raise ConfigError(f"unknown state kind {kind!r}")
    lam = _field(spec, "dephase", None)
    if lam is not None:
        state = dephase(state, float(lam))
    return state


def build_settings(cfg: dict, dims: HilbertDims, compat: bool) -> protocol.ProtocolSettings:
    shots = _field(cfg, "shots", None)
    try:
        return protocol.ProtocolSettings(
            dims=dims,
            v_mode=_field(cfg, "v_mode", "ideal"),
            shots=None if shots is None else int(shots),
            seed=int(_field(cfg, "seed", 0)),
            compat_rminus_final=compat,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _settings_echo(cfg: dict, settings: protocol.ProtocolSettings, **extra) -> dict:
    echo = {
        "dims": {"dx": settings.dims.dx, "dz": settings.dims.dz},
        "state": _field(cfg, "state", {}),
        "v_mode": settings.v_mode,
        "shots": settings.shots,
        "seed": settings.seed,
        "compat_rminus_final": settings.compat_rminus_final,
    }
    echo.update(extra)
    return echo


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_reconstruct(cfg: dict, args) -> int:
    dims = build_dims(cfg)
    settings = build_settings(cfg, dims, args.compat_rminus_final)
    phi = build_state(cfg, dims)
    nmax = _field(cfg, "nmax", required=True)
    report = tomography.reconstruct(phi, int(nmax), settings,
                                    use_hermitian_symmetry=args.use_hermitian_symmetry)
    size = report.nmax + 1
    cells = [[{"re": report.estimates[m, n].real,
               "im": report.estimates[m, n].imag,
               "stderr": report.stderrs[m, n]}
              for n in range(size)] for m in range(size)]
    payload = {
        "report": {
            "nmax": report.nmax,
            "estimates": cells,
            "truth": [[complex_record(v) for v in row] for row in report.truth],
            "projected": [[complex_record(v) for v in row] for row in report.projected],
            "metrics": report.metrics,
        },
        "settings": _settings_echo(cfg, settings, nmax=report.nmax,
                                   use_hermitian_symmetry=args.use_hermitian_symmetry),
    }
    fmt = args.format or _field(cfg, "format", "json")
    out = args.out or _field(cfg, "out", None)
    if fmt == "csv":
        rows = [[m, n, report.estimates[m, n].real, report.estimates[m, n].imag,
                 report.stderrs[m, n]]
                for m in range(size) for n in range(size)]
        _write_output(to_csv(["m", "n", "re", "im", "stderr"], rows), out)
    else:
        _write_output(stable_json(payload) + "\n", out)
    return 0


def cmd_coherence(cfg: dict, args) -> int:
    if args.m is None or args.n is None:
        raise UsageError("coherence requires --m and --n")
    dims = build_dims(cfg)
    settings = build_settings(cfg, dims, args.compat_rminus_final)
    phi = build_state(cfg, dims)
    est = protocol.measure_element(phi, args.m, args.n, settings)
    payload = {
        "m": est.m,
        "n": est.n,
        "value": complex_record(est.value),
        "stderr": est.stderr,
        "shots": est.shots_used,
        "settings": _settings_echo(cfg, settings),
    }
    fmt = args.format or _field(cfg, "format", "json")
    out = args.out or _field(cfg, "out", None)
    if fmt == "csv":
        rows = [[est.m, est.n, est.value.real, est.value.imag, est.stderr, est.shots_used]]
        _write_output(to_csv(["m", "n", "re", "im", "stderr", "shots"], rows), out)
    else:
        _write_output(stable_json(payload) + "\n", out)
    return 0


def _parse_lambdas(raw: str | None) -> list[float]:
    if raw is None or raw.strip() == "":
        raise UsageError("monitor requires a non-empty --lambdas list")
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad --lambdas value: {exc}") from exc


def cmd_monitor(cfg: dict, args) -> int:
    lambdas = _parse_lambdas(args.lambdas)
    if not lambdas:
        raise UsageError("monitor requires a non-empty --lambdas list")
    dims = build_dims(cfg)
    settings = build_settings(cfg, dims, args.compat_rminus_final)
    phi = build_state(cfg, dims)
    points = tomography.decoherence_monitor(phi, lambdas, settings)
    payload = {
        "series": [{"lambda": p.lam, "rho20_abs": p.rho20_abs, "bound": p.bound}
                   for p in points],
        "settings": _settings_echo(cfg, settings),
    }
    fmt = args.format or _field(cfg, "format", "json")
    out = args.out or _field(cfg, "out", None)
    if fmt == "csv":
        rows = [[p.lam, p.rho20_abs, p.bound] for p in points]
        _write_output(to_csv(["lambda", "rho20_abs", "bound"], rows), out)
    else:
        _write_output(stable_json(payload) + "\n", out)
    return 0


def _validate_checks(dims: HilbertDims, settings: protocol.ProtocolSettings) -> list[dict]:
    """The invariant suite behind the validate subcommand."""
    checks = []

    def record(name, deviation, tol):
        checks.append({"name": name, "passed": bool(deviation <= tol),
                       "deviation": float(deviation), "tolerance": float(tol)})

    # Mode swap: exp(i pi/2 L_y)|n,0> = |0,n> with amplitude +1.
    swap = unitary_from_generator(l_y(dims), math.pi / 2.0)
    dev = max(abs(apply(swap, basis_state(dims, 0, n, 0)).amplitudes[dims.index(0, 0, n)] - 1.0)
              for n in range(dims.dx))
    record("mode-swap-identity", dev, 1e-10)

    # Entangler: U_00 |phi,0,-> = (|phi,0,-> + |0,phi,+>)/sqrt(2).
    u0 = protocol.u00(dims, settings.compat_rminus_final)
    try:
        family = [fock(0, dims.dx), fock(min(2, dims.dx - 1), dims.dx),
                  coherent(0.5, dims.dx, tail_tol=1e-6)]
    except TruncationLeakageError:
        family = [fock(0, dims.dx)]
    dev = 0.0
    for phi in family:
        psi = protocol.prepare_initial_pure(phi, dims)
        got = apply(u0, psi).amplitudes
        target = np.zeros(dims.total_dim, dtype=complex)
        for k in range(dims.dx):
            target[dims.index(0, k, 0)] += phi.amplitudes[k] / math.sqrt(2.0)
            target[dims.index(1, 0, k)] += phi.amplitudes[k] / math.sqrt(2.0)
        dev = max(dev, float(np.linalg.norm(got - target)))
    record("entangler-identity", dev, 1e-9)

    # Element identity, ideal and compiled branch shifters.
    phi = family[-1]
    truth = phi.density_matrix()
    kmax = min(2, dims.dx - 2)
    for v_mode, tol in (("ideal", 1e-9), ("compiled", 1e-7)):
        st = protocol.ProtocolSettings(dims, v_mode=v_mode,
                                       compat_rminus_final=settings.compat_rminus_final)
        dev = max(abs(protocol.measure_element(phi, m, n, st).value - truth[m, n])
                  for m in range(kmax + 1) for n in range(kmax + 1))
        record(f"element-identity-{v_mode}", dev, tol)

    # Compiled vs ideal shifters on the protocol-relevant subspace.
    dev = 0.0
    for k in range(min(4, dims.dx - 2) + 1):
        for vc, vi, sector, axis in (
            (protocol.v_plus_compiled(k, dims), protocol.v_plus_ideal(k, dims), 1, "x"),
            (protocol.v_minus_compiled(k, dims), protocol.v_minus_ideal(k, dims), 0, "z"),
        ):
            diff = vc.matrix - vi.matrix
            for nv in range(dims.dz if axis == "x" else dims.dx):
                nx, nz = (0, nv) if axis == "x" else (nv, 0)
                dev = max(dev, float(np.linalg.norm(diff[:, dims.index(sector, nx, nz)])))
            other = 1 - sector
            lo = other * dims.vib_dim
            dev = max(dev, float(np.max(np.abs(diff[:, lo:lo + dims.vib_dim]))))
    record("compiled-vs-ideal", dev, 1e-8)

    # Unitarity of every pulse the protocol compiles.
    eye = np.eye(dims.total_dim)
    specs = list(protocol.u00_schedule(settings.compat_rminus_final))
    for k in range(min(4, dims.dx - 2) + 1):
        specs.extend(protocol.v_plus_schedule(k))
        specs.extend(protocol.v_minus_schedule(k))
    dev = max(float(np.max(np.abs(compile_pulse(s, dims).matrix.conj().T
                                  @ compile_pulse(s, dims).matrix - eye)))
              for s in specs)
    record("pulse-unitarity", dev, 1e-10)

    return checks


def cmd_validate(cfg: dict, args) -> int:
    dims = build_dims(cfg)
    settings = build_settings(cfg, dims, args.compat_rminus_final)
    checks = _validate_checks(dims, settings)
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']} (deviation {c['deviation']:.3e}, tolerance {c['tolerance']:.1e})")
    all_passed = all(c["passed"] for c in checks)
    out = args.out or _field(cfg, "out", None)
    if out is not None:
        schedules = {
            "u00": [s.to_record() for s in protocol.u00_schedule(settings.compat_rminus_final)],
            "v_plus": {str(k): [s.to_record() for s in protocol.v_plus_schedule(k)]
                       for k in range(min(4, dims.dx - 2) + 1)},
            "v_minus": {str(k): [s.to_record() for s in protocol.v_minus_schedule(k)]
                        for k in range(min(4, dims.dz - 2) + 1)},
        }
        payload = {"checks": checks, "passed": all_passed, "schedules": schedules,
                   "settings": _settings_echo(cfg, settings)}
        _write_output(stable_json(payload) + "\n", out)
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="iontomo",
                     description="Vibrational density-matrix tomography, element by element.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("reconstruct", cmd_reconstruct), ("coherence", cmd_coherence),
                     ("monitor", cmd_monitor), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", default=None, choices=["json", "csv"])
        p.add_argument("--compat-rminus-final", action="store_true",
                       help="use the comparison entangler whose final pulse addresses the {-, xi} pair")
        p.set_defaults(func=fn)
    sub.choices["reconstruct"].add_argument("--use-hermitian-symmetry", action="store_true",
                                            help="fill the lower triangle from conjugates instead of measuring")
    sub.choices["coherence"].add_argument("--m", type=int, default=None)
    sub.choices["coherence"].add_argument("--n", type=int, default=None)
    sub.choices["monitor"].add_argument("--lambdas", default=None,
                                        help="comma-separated dephasing strengths")
    return parser


_ERROR_TYPES = (
    (UsageError, "usage-error", 2),
    (ConfigError, "config-error", 1),
    (TruncationLeakageError, "truncation-leakage", 1),
    (DegenerateInputError, "degenerate-input", 1),
    (ValueError, "invalid-arguments", 1),
)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except Exception as exc:  # every failure becomes a structured record
        for klass, label, code in _ERROR_TYPES:
            if isinstance(exc, klass):
                kind, exit_code = label, code
                break
        else:
            kind, exit_code = "internal-error", 1
        record = {"error": {"type": kind, "message": str(exc)}}
        print(stable_json(record))
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
