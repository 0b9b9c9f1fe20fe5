"""Monodromy (Galois) groups of the four-bus family by tracking solutions around loops.

The power-flow coefficients are affine in the susceptances and injections,
so a straight segment in parameter space is exactly a straight-line
coefficient homotopy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .classify import split_trivial
from .errors import LoopRejected, StructuralError
from .pf_model import FOUR_BUS_LINES, PV, PowerSystem, build_system
from .permgroup import Perm, PermGroup, identity
from .poly import Poly, PolySystem
from .tracker import (
    DIVERGED,
    FINITE,
    DivergenceDiagnosis,
    Homotopy,
    HomotopyConfig,
    PathResult,
    classify_divergence,
    sharpen,
    solve_all,
    track_all,
)

log = logging.getLogger(__name__)

ZERO_INJECTION, FULL = "zero-injection", "full"


class ParamFamily:
    """Power-flow systems as an affine function of selected line and bus parameters.

    ``coefficients(p) = c0 + p @ C`` on a fixed union support, where ``p``
    lists the susceptances of ``lines`` followed by the injections of
    ``buses``.  Parameters may be complex.
    """

    def __init__(self, ps: PowerSystem, lines=FOUR_BUS_LINES, buses=()):
        self.ps = ps
        self.lines = tuple(tuple(x) for x in lines)
        self.buses = tuple(buses)
        zeroed = self._with(ps, np.zeros(self.dim))
        f0 = build_system(zeroed)
        fs = []
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            fj = build_system(self._with(ps, e))
            fs.append([p - q for p, q in zip(fj.polys, f0.polys)])
        self.nvars = f0.nvars
        self.degrees = f0.degrees
        self.names = f0.names
        support = []
        for i in range(self.nvars):
            exps = set(t.exponents for t in f0.polys[i].terms)
            for f in fs:
                exps |= set(t.exponents for t in f[i].terms)
            support.append(sorted(exps, key=lambda e: (-sum(e), e)))
        self.support = support
        self.ptr = np.cumsum([0] + [len(s) for s in support]).astype(np.int64)
        self.exps = np.array([e for s in support for e in s], dtype=np.int64).reshape(-1, self.nvars)
        self.c0 = self._flatten(f0.polys)
        self.C = np.array([self._flatten(f) for f in fs]).reshape(self.dim, -1)

    @property
    def dim(self) -> int:
        return len(self.lines) + len(self.buses)

    def _with(self, ps: PowerSystem, p) -> PowerSystem:
        nl = len(self.lines)
        out = ps.with_lines({pair: float(v) for pair, v in zip(self.lines, p[:nl])})
        if self.buses:
            inj = dict(zip(self.buses, p[nl:]))
            out = PowerSystem(tuple(replace(b, p=float(inj[b.id])) if b.id in inj else b for b in out.buses), out.lines)
        return out

    def _flatten(self, polys) -> np.ndarray:
        out = []
        for i, s in enumerate(self.support):
            for e in s:
                out.append(polys[i].coeff(e))
        return np.array(out, dtype=complex)

    def base(self) -> np.ndarray:
        b = [self.ps.line_b(i, k) for i, k in self.lines]
        bus = {x.id: x for x in self.ps.buses}
        return np.array(b + [bus[i].p for i in self.buses], dtype=complex)

    def coefficients(self, p) -> np.ndarray:
        return self.c0 + np.asarray(p, dtype=complex) @ self.C

    def system(self, p) -> PolySystem:
        c = self.coefficients(p)
        polys = []
        for i in range(self.nvars):
            lo, hi = self.ptr[i], self.ptr[i + 1]
            polys.append(Poly.from_terms(self.nvars, zip(self.exps[lo:hi], c[lo:hi])))
        return PolySystem(self.nvars, tuple(polys), degrees=self.degrees, names=self.names)

    def segment(self, p_from, p_to) -> Homotopy:
        """Homotopy equal to the system at ``p_from`` for t=1 and at ``p_to`` for t=0."""
        ca, cb = self.coefficients(p_from), self.coefficients(p_to)
        return Homotopy(self.nvars, cb.astype(np.complex128), (ca - cb).astype(np.complex128), self.exps, self.ptr)


def four_bus_family(ps: PowerSystem, slice: str = ZERO_INJECTION) -> ParamFamily:
    if slice == ZERO_INJECTION:
        return ParamFamily(ps, FOUR_BUS_LINES)
    if slice == FULL:
        return ParamFamily(ps, FOUR_BUS_LINES, tuple(b.id for b in ps.buses if b.kind == PV))
    raise ValueError(f"unknown parameter slice {slice!r}")


@dataclass(frozen=True)
class ParamLoop:
    base: np.ndarray
    waypoints: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (np.array_equal(self.waypoints[0], self.base) and np.array_equal(self.waypoints[-1], self.base)):
            raise ValueError("a loop must start and end at its base point")

    @classmethod
    def triangle(cls, base, rng: np.random.Generator, scale: float = 0.5) -> "ParamLoop":
        """base -> base + d1 -> base + d2 -> base with complex Gaussian offsets.

        Offsets have per-component standard deviation ``scale * |base| / sqrt(dim)``.
        """
        base = np.asarray(base, dtype=complex)
        sigma = scale * np.linalg.norm(base) / np.sqrt(len(base))
        d = sigma * (rng.standard_normal((2, len(base))) + 1j * rng.standard_normal((2, len(base)))) / np.sqrt(2)
        return cls(base, (base, base + d[0], base + d[1], base))


def track_parameter_path(family: ParamFamily, solutions, waypoints, cfg: HomotopyConfig | None = None) -> list[PathResult]:
    """Carry every solution along the polygon through ``waypoints``.

    A path that diverges or fails on some segment is reported with that status
    and not continued.
    """
    cfg = cfg or HomotopyConfig()
    current = [PathResult(FINITE, np.asarray(x, dtype=complex), 1.0, 0, 0.0) for x in solutions]
    for p_from, p_to in zip(waypoints, waypoints[1:]):
        alive = [i for i, r in enumerate(current) if r.status == FINITE]
        if not alive:
            break
        H = family.segment(p_from, p_to)
        results = track_all(H, np.array([current[i].endpoint for i in alive]), cfg)
        for i, r in zip(alive, results):
            current[i] = replace(r, steps=r.steps + current[i].steps)
    return current


def _match(ordered: np.ndarray, ends: np.ndarray, tol: float) -> Perm:
    perm = []
    for x in ends:
        d = np.max(np.abs(ordered - x[None, :]), axis=1)
        j = int(np.argmin(d))
        if d[j] > tol * max(1.0, float(np.max(np.abs(x)))):
            raise LoopRejected(f"endpoint does not match any base solution (closest at {d[j]:.2e})")
        perm.append(j)
    if len(set(perm)) != len(perm):
        raise LoopRejected("two endpoints landed on the same base solution")
    return tuple(perm)


def track_loop(family: ParamFamily, solutions, loop: ParamLoop, cfg: HomotopyConfig | None = None, match_tol: float = 1e-6) -> Perm:
    """Permutation ``perm[i] = j``: solution i at the base returns as solution j."""
    ordered = np.asarray(solutions, dtype=complex)
    if len(loop.waypoints) <= 1:
        return identity(len(ordered))
    res = track_parameter_path(family, ordered, loop.waypoints, cfg)
    bad = [r.status for r in res if r.status != FINITE]
    if bad:
        raise LoopRejected(f"{len(bad)} paths did not return ({', '.join(sorted(set(bad)))})")
    ends, _ = sharpen(family.system(loop.base), [r.endpoint for r in res])
    return _match(ordered, ends, match_tol)


@dataclass
class MonodromyGroup:
    generators: list[Perm]
    order: int
    fixed_points: list[int]
    blocks: list[list[int]]
    loops_used: int
    loops_rejected: int
    solutions: np.ndarray = field(repr=False)
    order_history: list[int] = field(default_factory=list, repr=False)
    permutations: list[Perm] = field(default_factory=list, repr=False)

    def report(self) -> dict:
        """JSON-ready summary with 1-based solution indices."""
        return {
            "order": str(self.order),
            "fixed_points": [i + 1 for i in self.fixed_points],
            "blocks": [[i + 1 for i in b] for b in self.blocks],
            "loops_used": self.loops_used,
            "loops_rejected": self.loops_rejected,
        }


def generate_group(
    ps: PowerSystem,
    cfg: HomotopyConfig | None = None,
    budget: int = 25,
    seed: int = 0,
    slice: str = ZERO_INJECTION,
    scale: float = 0.5,
    max_loops: int = 2000,
    solutions=None,
) -> MonodromyGroup:
    """Sample random triangle loops until ``budget`` consecutive loops add nothing."""
    cfg = cfg or HomotopyConfig(seed=seed)
    family = four_bus_family(ps, slice)
    base = family.base()
    if solutions is None:
        ss = solve_all(family.system(base), cfg)
        if ss.failed_count:
            raise StructuralError(f"base solve left {ss.failed_count} failed paths")
        solutions = ss.array()
    solutions = np.asarray(solutions, dtype=complex)
    m = len(solutions)
    rng = np.random.default_rng(seed)
    group = PermGroup(m)
    used = rejected = quiet = 0
    history, perms = [], []
    while quiet < budget:
        if used + rejected >= max_loops:
            log.warning("loop limit %d reached before the stopping rule fired", max_loops)
            break
        loop = ParamLoop.triangle(base, rng, scale)
        try:
            perm = track_loop(family, solutions, loop, cfg)
        except LoopRejected as err:
            rejected += 1
            log.debug("loop rejected: %s", err)
            if rejected >= 20 and rejected > 0.9 * (used + rejected):
                raise StructuralError(f"{rejected} of {used + rejected} loops rejected; base point looks non-generic")
            continue
        used += 1
        perms.append(perm)
        quiet = 0 if group.add(perm) else quiet + 1
        history.append(group.order())
    return MonodromyGroup(
        generators=list(group.generators),
        order=group.order(),
        fixed_points=group.fixed_points(),
        blocks=group.blocks(),
        loops_used=used,
        loops_rejected=rejected,
        solutions=solutions,
        order_history=history,
        permutations=perms,
    )


def trivial_indices(solutions, vm=None) -> list[int]:
    trivial, _ = split_trivial(solutions, vm)
    keys = {tuple(np.round(t, 9)) for t in trivial}
    return [i for i, x in enumerate(solutions) if tuple(np.round(x, 9)) in keys]


@dataclass
class LineRemoval:
    waypoints: list[np.ndarray]
    results: list[PathResult]
    diagnoses: list[DivergenceDiagnosis]

    @property
    def n_diverged(self) -> int:
        return sum(r.status == DIVERGED for r in self.results)

    @property
    def n_finite(self) -> int:
        return sum(r.status == FINITE for r in self.results)


def track_line_removal(
    ps: PowerSystem,
    line=(1, 2),
    n_waypoints: int = 5,
    cfg: HomotopyConfig | None = None,
    detour: float = 0.1,
    seed: int = 0,
    solutions=None,
) -> LineRemoval:
    """Follow all solutions while one susceptance is driven to zero.

    Interior waypoints get a small random imaginary detour so the path stays
    clear of real discriminant points; the last waypoint sets the line to 0.
    """
    cfg = cfg or HomotopyConfig(seed=seed)
    family = ParamFamily(ps, FOUR_BUS_LINES)
    base = family.base()
    j = FOUR_BUS_LINES.index(tuple(sorted(line)))
    if solutions is None:
        solutions = solve_all(family.system(base), cfg).array()
    rng = np.random.default_rng(seed)
    b0 = base[j]
    waypoints = []
    for k, s in enumerate(np.linspace(1.0, 0.0, n_waypoints)):
        p = base.copy()
        p[j] = b0 * s
        if 0 < k < n_waypoints - 1:
            p[j] += 1j * detour * abs(b0) * rng.standard_normal()
        waypoints.append(p)
    results = track_parameter_path(family, solutions, waypoints, cfg)
    end_sys = family.system(waypoints[-1])
    diags = [classify_divergence(end_sys, r) for r in results if r.status == DIVERGED]
    return LineRemoval(waypoints, results, diags)
