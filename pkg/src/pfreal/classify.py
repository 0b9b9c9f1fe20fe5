"""Sorting solutions into real/nonreal and trivial/nonconstant, and checking them."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousRealityWarning, StructuralError, VerificationError
from .pf_model import PQ, PowerSystem, build_system, injections, line_flows
from .poly import evaluate
from .tracker import SolutionSet

REAL_TOL = 1e-8


def _points(solutions) -> list[np.ndarray]:
    if isinstance(solutions, SolutionSet):
        solutions = solutions.solutions
    return [np.asarray(x, dtype=complex) for x in solutions]


def imag_size(x) -> float:
    x = np.asarray(x, dtype=complex)
    return float(np.max(np.abs(x.imag)) / max(1.0, np.max(np.abs(x.real))))


def split_real(solutions, real_tol: float = REAL_TOL) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Partition into real and nonreal solutions.

    A solution whose largest (scaled) imaginary part is within a factor of ten
    of ``real_tol`` on either side is ambiguous: it is counted as nonreal and
    an :class:`AmbiguousRealityWarning` is emitted.  Real solutions come back
    with their imaginary parts dropped.
    """
    real, nonreal = [], []
    for x in _points(solutions):
        m = imag_size(x)
        if m <= real_tol / 10:
            real.append(x.real.astype(complex))
        else:
            if m < real_tol * 10:
                warnings.warn(
                    f"ambiguous reality: imaginary magnitude {m:.3e} near tolerance {real_tol:.1e}; counted as nonreal",
                    AmbiguousRealityWarning,
                    stacklevel=2,
                )
            nonreal.append(x)
    return real, nonreal


def is_trivial(x, vm=None, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=complex)
    vd, vq = x[0::2], x[1::2]
    vm = np.ones(len(vd)) if vm is None else np.asarray(vm, dtype=float)
    return bool(np.all(np.abs(vq) <= tol) and np.all(np.abs(np.abs(vd) - vm) <= tol) and np.all(np.abs(vd.imag) <= tol))


def split_trivial(solutions, vm=None, tol: float = 1e-9) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Split off the solutions with every ``Vq = 0`` and ``Vd = +-|V|``."""
    trivial, other = [], []
    for x in _points(solutions):
        (trivial if is_trivial(x, vm, tol) else other).append(x)
    return trivial, other


def check_symmetry(nonconstant, tol: float = 1e-8) -> list[tuple[int, int]]:
    """Pair each solution with its ``(Vd, -Vq)`` mirror image.

    Works on complex solutions as well; raises :class:`StructuralError` when a
    solution has no partner or is its own mirror.
    """
    pts = _points(nonconstant)
    flip = np.tile([1.0, -1.0], len(pts[0]) // 2) if pts else np.zeros(0)
    unmatched = set(range(len(pts)))
    pairs = []
    for i in range(len(pts)):
        if i not in unmatched:
            continue
        unmatched.discard(i)
        mirror = pts[i] * flip
        if np.max(np.abs(mirror - pts[i])) <= tol:
            raise StructuralError(f"solution {i} is its own (Vd, -Vq) mirror")
        best, dist = None, np.inf
        for j in unmatched:
            d = np.max(np.abs(pts[j] - mirror))
            if d < dist:
                best, dist = j, d
        if best is None or dist > tol * max(1.0, np.max(np.abs(mirror))):
            raise StructuralError(f"solution {i} has no (Vd, -Vq) partner (closest at {dist:.2e})")
        unmatched.discard(best)
        pairs.append((i, best))
    return pairs


@dataclass
class SolutionRecord:
    sol_id: int
    x: np.ndarray
    vd: np.ndarray
    vq: np.ndarray
    is_real: bool
    is_trivial: bool
    residual: float
    q_out: np.ndarray = field(default=None)
    slack_p: complex = 0.0
    imag: float = 0.0


def records(ss, ps: PowerSystem, real_tol: float = REAL_TOL) -> list[SolutionRecord]:
    sys = build_system(ps)
    vm = [b.vm for b in ps.others] if all(b.kind != PQ for b in ps.others) else None
    out = []
    for i, x in enumerate(_points(ss), start=1):
        m = imag_size(x)
        real = m <= real_tol / 10
        xx = x.real.astype(complex) if real else x
        P, Q = injections(ps, xx)
        slack = ps.index()[ps.slack.id]
        out.append(
            SolutionRecord(
                sol_id=i,
                x=xx,
                vd=xx[0::2],
                vq=xx[1::2],
                is_real=real,
                is_trivial=vm is not None and is_trivial(x, vm),
                residual=float(np.max(np.abs(evaluate(sys, xx)))),
                q_out=np.delete(Q, slack),
                slack_p=complex(P[slack]),
                imag=m,
            )
        )
    return out


@dataclass
class VerificationReport:
    residuals: np.ndarray
    max_residual: float
    p: np.ndarray
    q: np.ndarray
    slack_p: float
    balance: float
    flows: dict
    magnitude_error: float


def verify(record: SolutionRecord | np.ndarray, ps: PowerSystem, residual_tol: float = 1e-7, balance_tol: float = 1e-9) -> VerificationReport:
    """Recompute everything about a real solution from the network data.

    Raises :class:`VerificationError` when the equations are not satisfied to
    ``residual_tol`` or, for lossless networks, active power does not sum to
    zero over all buses.
    """
    x = record.x if isinstance(record, SolutionRecord) else np.asarray(record)
    if np.max(np.abs(np.imag(x))) > 0:
        raise VerificationError("verify expects a real solution")
    x = np.real(x).astype(float)
    res = np.abs(evaluate(build_system(ps), x))
    P, Q = injections(ps, x)
    slack = ps.index()[ps.slack.id]
    balance = float(abs(P.sum()))
    vm_err = 0.0
    for i, bus in enumerate(ps.others):
        if bus.kind != PQ:
            vm_err = max(vm_err, abs(x[2 * i] ** 2 + x[2 * i + 1] ** 2 - bus.vm**2))
    rep = VerificationReport(
        residuals=res,
        max_residual=float(res.max()) if len(res) else 0.0,
        p=P,
        q=Q,
        slack_p=float(P[slack]),
        balance=balance,
        flows={k: float(np.real(v)) for k, v in line_flows(ps, x).items()},
        magnitude_error=vm_err,
    )
    if rep.max_residual > residual_tol:
        raise VerificationError(f"residual {rep.max_residual:.3e} exceeds {residual_tol:.1e}")
    if ps.is_lossless() and balance > balance_tol:
        raise VerificationError(f"lossless power balance violated: sum P = {balance:.3e}")
    return rep


def _columns(ps: PowerSystem) -> list[str]:
    return ["sol_id", *ps.variable_names(), "is_real", "is_trivial", "residual"]


def _fmt(v: complex, real: bool) -> str:
    if real:
        return repr(float(np.real(v)) + 0.0)
    return repr(complex(v))


def solutions_csv(recs: list[SolutionRecord], ps: PowerSystem) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_columns(ps))
    for r in recs:
        w.writerow([r.sol_id, *(_fmt(v, r.is_real) for v in r.x), int(r.is_real), int(r.is_trivial), repr(r.residual)])
    return buf.getvalue()


def solutions_json(recs: list[SolutionRecord], ps: PowerSystem, extra: dict | None = None) -> str:
    rows = []
    for r in recs:
        row = {"sol_id": r.sol_id}
        for name, v in zip(ps.variable_names(), r.x):
            row[name] = float(np.real(v)) + 0.0 if r.is_real else [float(v.real) + 0.0, float(v.imag) + 0.0]
        row.update(is_real=r.is_real, is_trivial=r.is_trivial, residual=r.residual)
        rows.append(row)
    doc = dict(extra or {})
    doc["solutions"] = rows
    return json.dumps(doc, indent=2)
