"""Power-flow networks and their polynomial systems in rectangular coordinates.

Sign convention: the off-diagonal susceptance entry is the line parameter
itself, ``B[i, k] = b_ik``, so that a lossless injection reads
``P_i = sum_k |V_i||V_k| b_ik sin(theta_i - theta_k)``.  Diagonal entries make
rows sum to zero (no shunts).  Conductances follow the usual ``G[i, k] = -g_ik``.

Variables are ``(Vd, Vq)`` of every non-slack bus in increasing id order; for
each such bus the system holds its active-power equation followed by its
magnitude equation (PV) or reactive-power equation (PQ).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .poly import Poly, PolySystem

SLACK, PV, PQ = "slack", "pv", "pq"
BUS_KINDS = (SLACK, PV, PQ)

# susceptances of the published 16-real-solution witness (b12, b13, b14, b23, b24, b34)
TABLE_I = (1.612, -4.649, -5.472, -7.504, 10.05, -13.571)
FOUR_BUS_LINES = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


class PowerSystemError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str
    vm: float | None = None
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in BUS_KINDS:
            raise PowerSystemError(f"bus {self.id}: unknown type {self.kind!r}")
        if self.id < 1:
            raise PowerSystemError(f"bus id must be positive, got {self.id}")
        if kind in (SLACK, PV):
            if self.vm is None or not self.vm > 0:
                raise PowerSystemError(f"bus {self.id}: voltage magnitude must be positive, got {self.vm}")


@dataclass(frozen=True)
class Line:
    frm: int
    to: int
    b: float
    g: float = 0.0

    def __post_init__(self):
        if self.frm == self.to:
            raise PowerSystemError(f"line {self.frm}-{self.to} connects a bus to itself")
        if self.g < 0:
            raise PowerSystemError(f"line {self.frm}-{self.to}: conductance must be >= 0")

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.frm, self.to), max(self.frm, self.to))


@dataclass(frozen=True)
class PowerSystem:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(sorted(self.buses, key=lambda b: b.id)))
        object.__setattr__(self, "lines", tuple(self.lines))
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise PowerSystemError("duplicate bus ids")
        slacks = [b for b in self.buses if b.kind == SLACK]
        if len(slacks) != 1:
            raise PowerSystemError(f"exactly one slack bus required, found {len(slacks)}")
        seen = set()
        for ln in self.lines:
            if ln.frm not in ids or ln.to not in ids:
                raise PowerSystemError(f"line {ln.frm}-{ln.to} references an unknown bus")
            if ln.pair in seen:
                raise PowerSystemError(f"duplicate line between buses {ln.pair}")
            seen.add(ln.pair)

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def slack(self) -> Bus:
        return next(b for b in self.buses if b.kind == SLACK)

    @property
    def others(self) -> tuple[Bus, ...]:
        return tuple(b for b in self.buses if b.kind != SLACK)

    def is_lossless(self) -> bool:
        return all(ln.g == 0 for ln in self.lines)

    def index(self) -> dict[int, int]:
        return {b.id: i for i, b in enumerate(self.buses)}

    def susceptance(self) -> np.ndarray:
        idx = self.index()
        B = np.zeros((self.n, self.n))
        for ln in self.lines:
            i, k = idx[ln.frm], idx[ln.to]
            B[i, k] = B[k, i] = ln.b
        np.fill_diagonal(B, -B.sum(axis=1))
        return B

    def conductance(self) -> np.ndarray:
        idx = self.index()
        G = np.zeros((self.n, self.n))
        for ln in self.lines:
            i, k = idx[ln.frm], idx[ln.to]
            G[i, k] = G[k, i] = -ln.g
        np.fill_diagonal(G, -G.sum(axis=1))
        return G

    def line_b(self, i: int, k: int) -> float:
        pair = (min(i, k), max(i, k))
        return next((ln.b for ln in self.lines if ln.pair == pair), 0.0)

    def with_lines(self, b: dict[tuple[int, int], float]) -> "PowerSystem":
        """Copy with the susceptances of the given pairs replaced (lines added if absent)."""
        lines = {ln.pair: ln for ln in self.lines}
        for (i, k), val in b.items():
            pair = (min(i, k), max(i, k))
            old = lines.get(pair)
            lines[pair] = replace(old, b=val) if old else Line(pair[0], pair[1], val)
        return PowerSystem(self.buses, tuple(lines[p] for p in sorted(lines)))

    def variable_names(self) -> tuple[str, ...]:
        names = []
        for bus in self.others:
            names += [f"vd{bus.id}", f"vq{bus.id}"]
        return tuple(names)


def four_bus(b=TABLE_I, p=(0.0, 0.0, 0.0), vm=(1.0, 1.0, 1.0, 1.0)) -> PowerSystem:
    """Lossless four-bus network of PV buses with bus 1 as slack.

    ``b`` is ordered (b12, b13, b14, b23, b24, b34).
    """
    buses = [Bus(1, SLACK, vm[0])] + [Bus(i, PV, vm[i - 1], p[i - 2]) for i in (2, 3, 4)]
    lines = [Line(i, k, float(v)) for (i, k), v in zip(FOUR_BUS_LINES, b)]
    return PowerSystem(tuple(buses), tuple(lines))


def two_bus(b12: float, p2: float, vm=(1.0, 1.0)) -> PowerSystem:
    return PowerSystem((Bus(1, SLACK, vm[0]), Bus(2, PV, vm[1], p2)), (Line(1, 2, b12),))


def _voltage_polys(ps: PowerSystem):
    """Vd, Vq of every bus as polynomials (slack fixed at (|V1|, 0))."""
    nv = 2 * (ps.n - 1)
    vd, vq = [], []
    j = 0
    for bus in ps.buses:
        if bus.kind == SLACK:
            vd.append(Poly.const(bus.vm, nv))
            vq.append(Poly.const(0.0, nv))
        else:
            vd.append(Poly.var(j, nv))
            vq.append(Poly.var(j + 1, nv))
            j += 2
    return vd, vq


def injection_polys(ps: PowerSystem) -> tuple[list[Poly], list[Poly]]:
    """Active and reactive injections of every bus as polynomials in the variables."""
    B, G = ps.susceptance(), ps.conductance()
    vd, vq = _voltage_polys(ps)
    nv = 2 * (ps.n - 1)
    zero = Poly.const(0.0, nv)
    P, Q = [], []
    for i in range(ps.n):
        sd, sq, td, tq = zero, zero, zero, zero
        for k in range(ps.n):
            if B[i, k] == 0 and G[i, k] == 0:
                continue
            sd = sd + G[i, k] * vd[k] - B[i, k] * vq[k]
            sq = sq + B[i, k] * vd[k] + G[i, k] * vq[k]
            td = td - B[i, k] * vd[k] - G[i, k] * vq[k]
            tq = tq + G[i, k] * vd[k] - B[i, k] * vq[k]
        P.append(vd[i] * sd + vq[i] * sq)
        Q.append(vd[i] * td + vq[i] * tq)
    return P, Q


def build_system(ps: PowerSystem) -> PolySystem:
    """Rectangular power-flow equations with the slack bus eliminated.

    Every equation is declared quadratic for homotopy purposes, even where a
    sparse network leaves it linear.
    """
    if ps.n < 2:
        raise PowerSystemError("need at least two buses")
    P, Q = injection_polys(ps)
    vd, vq = _voltage_polys(ps)
    polys = []
    for i, bus in enumerate(ps.buses):
        if bus.kind == SLACK:
            continue
        polys.append(P[i] - bus.p)
        if bus.kind == PV:
            polys.append(vd[i] * vd[i] + vq[i] * vq[i] - bus.vm**2)
        else:
            polys.append(Q[i] - bus.q)
    nv = len(polys)
    degrees = tuple(max(2, p.degree()) for p in polys)
    return PolySystem(nv, tuple(polys), degrees=degrees, names=ps.variable_names())


def full_voltages(ps: PowerSystem, x) -> tuple[np.ndarray, np.ndarray]:
    """(Vd, Vq) of all buses including the slack from a variable vector."""
    x = np.asarray(x)
    vd = np.zeros(ps.n, dtype=x.dtype)
    vq = np.zeros(ps.n, dtype=x.dtype)
    j = 0
    for i, bus in enumerate(ps.buses):
        if bus.kind == SLACK:
            vd[i] = bus.vm
        else:
            vd[i], vq[i] = x[j], x[j + 1]
            j += 2
    return vd, vq


def injections(ps: PowerSystem, x) -> tuple[np.ndarray, np.ndarray]:
    """Active and reactive injections at every bus, computed from rectangular voltages."""
    B, G = ps.susceptance(), ps.conductance()
    vd, vq = full_voltages(ps, x)
    P = vd * (G @ vd - B @ vq) + vq * (B @ vd + G @ vq)
    Q = vd * (-B @ vd - G @ vq) + vq * (G @ vd - B @ vq)
    return P, Q


def line_flows(ps: PowerSystem, x) -> dict[tuple[int, int], complex]:
    """Lossless active flow ``b_ik (Vq_i Vd_k - Vd_i Vq_k)`` from bus i to k on every line."""
    idx = ps.index()
    vd, vq = full_voltages(ps, x)
    out = {}
    for ln in ps.lines:
        i, k = idx[ln.frm], idx[ln.to]
        out[(ln.frm, ln.to)] = ln.b * (vq[i] * vd[k] - vd[i] * vq[k])
    return out


def polar_injections(ps: PowerSystem, theta, vm=None) -> tuple[np.ndarray, np.ndarray]:
    """Injections in polar form for all buses; ``theta`` and ``vm`` include the slack."""
    B, G = ps.susceptance(), ps.conductance()
    theta = np.asarray(theta, dtype=float)
    vm = np.array([b.vm if b.vm is not None else 1.0 for b in ps.buses]) if vm is None else np.asarray(vm)
    dth = theta[:, None] - theta[None, :]
    mm = vm[:, None] * vm[None, :]
    P = np.sum(mm * (G * np.cos(dth) + B * np.sin(dth)), axis=1)
    Q = np.sum(mm * (G * np.sin(dth) - B * np.cos(dth)), axis=1)
    return P, Q


def polar_point(ps: PowerSystem, theta, vm=None) -> np.ndarray:
    """Variable vector for the given angles (slack angle ignored, taken as 0)."""
    vm = [b.vm for b in ps.buses] if vm is None else vm
    x = []
    for i, bus in enumerate(ps.buses):
        if bus.kind != SLACK:
            x += [vm[i] * math.cos(theta[i]), vm[i] * math.sin(theta[i])]
    return np.array(x)


def normalize_vm(ps: PowerSystem) -> PowerSystem:
    """Equivalent unit-magnitude system with susceptances scaled by ``|V_i||V_k|``."""
    if any(b.kind == PQ for b in ps.buses):
        raise PowerSystemError("magnitude normalization only applies to slack/PV systems")
    vm = {b.id: b.vm for b in ps.buses}
    buses = tuple(replace(b, vm=1.0) for b in ps.buses)
    lines = tuple(replace(ln, b=vm[ln.frm] * vm[ln.to] * ln.b, g=vm[ln.frm] * vm[ln.to] * ln.g) for ln in ps.lines)
    return PowerSystem(buses, lines)


def complex_bound(n: int | PowerSystem) -> int:
    """Maximum number of isolated complex solutions, C(2n-2, n-1)."""
    n = n.n if isinstance(n, PowerSystem) else n
    if n < 2:
        raise ValueError("need n >= 2")
    return math.comb(2 * n - 2, n - 1)


def bezout_bound(n: int | PowerSystem) -> int:
    n = n.n if isinstance(n, PowerSystem) else n
    if n < 2:
        raise ValueError("need n >= 2")
    return 2 ** (2 * n - 2)


# ----------------------------------------------------------------------------
# JSON system description

_BUS_FIELDS = {"id", "type", "vm", "p", "q"}
_LINE_FIELDS = {"from", "to", "b", "g"}


def from_dict(data: dict) -> PowerSystem:
    if not isinstance(data, dict):
        raise PowerSystemError("a system description must be a JSON object")
    if set(data) - {"buses", "lines"}:
        raise PowerSystemError(f"unknown top-level fields: {sorted(set(data) - {'buses', 'lines'})}")
    buses = []
    for raw in data.get("buses", []):
        extra = set(raw) - _BUS_FIELDS
        if extra:
            raise PowerSystemError(f"unknown bus fields {sorted(extra)}")
        kind = str(raw.get("type", "")).lower()
        if kind == SLACK and ("p" in raw or "q" in raw):
            raise PowerSystemError("slack bus injections are outputs, not inputs")
        if kind == PV and "q" in raw:
            raise PowerSystemError(f"bus {raw.get('id')}: reactive injection is an output at PV buses")
        if kind == PQ and "vm" in raw:
            raise PowerSystemError(f"bus {raw.get('id')}: voltage magnitude is an output at PQ buses")
        buses.append(Bus(int(raw["id"]), kind, raw.get("vm"), float(raw.get("p", 0.0)), float(raw.get("q", 0.0))))
    ids = sorted(b.id for b in buses)
    if ids != list(range(1, len(ids) + 1)):
        raise PowerSystemError(f"bus ids must be contiguous 1..n, got {ids}")
    lines = []
    for raw in data.get("lines", []):
        extra = set(raw) - _LINE_FIELDS
        if extra:
            raise PowerSystemError(f"unknown line fields {sorted(extra)}")
        lines.append(Line(int(raw["from"]), int(raw["to"]), float(raw["b"]), float(raw.get("g", 0.0))))
    return PowerSystem(tuple(buses), tuple(lines))


def to_dict(ps: PowerSystem) -> dict:
    buses = []
    for b in ps.buses:
        d = {"id": b.id, "type": b.kind}
        if b.kind in (SLACK, PV):
            d["vm"] = b.vm
        if b.kind in (PV, PQ):
            d["p"] = b.p
        if b.kind == PQ:
            d["q"] = b.q
        buses.append(d)
    lines = []
    for ln in ps.lines:
        d = {"from": ln.frm, "to": ln.to, "b": ln.b}
        if ln.g:
            d["g"] = ln.g
        lines.append(d)
    return {"buses": buses, "lines": lines}


def load_system(path) -> PowerSystem:
    with open(path) as fh:
        return from_dict(json.load(fh))


def save_system(ps: PowerSystem, path) -> None:
    Path(path).write_text(json.dumps(to_dict(ps), indent=2) + "\n")
