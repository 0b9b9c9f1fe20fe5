"""Total-degree homotopy continuation over the complex numbers.

``H(x, t) = gamma * t * g(x) + (1 - t) * f(x)`` is tracked from the roots of
``g_i = x_i**d_i - 1`` at ``t = 1`` to the target ``f`` at ``t = 0``.
Tracking happens in affine coordinates; paths whose norm exceeds
``divergence_radius`` are reported as diverged rather than followed into
projective space.
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel as K
from .poly import Poly, PolySystem, compile_system, evaluate, homogeneous_top

log = logging.getLogger(__name__)

FINITE, DIVERGED, FAILED = "finite", "diverged", "failed"
_STATUS = {K.FINITE: FINITE, K.DIVERGED: DIVERGED, K.FAILED: FAILED}


@dataclass(frozen=True)
class HomotopyConfig:
    gamma: complex | None = None
    step_init: float = 0.02
    step_min: float = 1e-9
    step_max: float = 0.1
    corrector_tol: float = 1e-10
    track_tol: float = 1e-8
    corrector_max_iters: int = 3
    divergence_radius: float = 1e8
    endgame_start_t: float = 0.1
    seed: int = 0
    dedup_tol: float = 1e-6
    sharpen_tol: float = 1e-11
    t_min: float = 1e-60
    max_steps: int = 100_000

    def __post_init__(self):
        if not 0 < self.step_min <= self.step_init <= self.step_max < 1:
            raise ValueError("need 0 < step_min <= step_init <= step_max < 1")
        if not self.divergence_radius > 1:
            raise ValueError("divergence_radius must exceed 1")
        if not 0 < self.endgame_start_t < 1:
            raise ValueError("endgame_start_t must lie in (0, 1)")
        if self.gamma is not None and abs(abs(self.gamma) - 1) > 1e-12:
            raise ValueError("gamma must have unit modulus")

    def resolved_gamma(self) -> complex:
        """The configured gamma, or one drawn from ``seed``."""
        if self.gamma is not None:
            return complex(self.gamma)
        rng = np.random.default_rng(self.seed)
        return cmath.exp(2j * math.pi * rng.random())

    def params(self) -> np.ndarray:
        p = np.empty(K.N_PARAMS)
        p[K.P_STEP_INIT] = self.step_init
        p[K.P_STEP_MIN] = self.step_min
        p[K.P_STEP_MAX] = self.step_max
        p[K.P_TOL] = self.corrector_tol
        p[K.P_MAXIT] = self.corrector_max_iters
        p[K.P_RADIUS] = self.divergence_radius
        p[K.P_T_EG] = self.endgame_start_t
        p[K.P_T_MIN] = self.t_min
        p[K.P_MAX_STEPS] = self.max_steps
        p[K.P_TRACK_TOL] = self.track_tol
        return p


@dataclass(frozen=True)
class Homotopy:
    """Homotopy whose coefficients are affine in t, flattened for the kernel."""

    nvars: int
    a: np.ndarray
    b: np.ndarray
    exps: np.ndarray
    ptr: np.ndarray

    @classmethod
    def straight_line(cls, start: PolySystem, target: PolySystem, gamma: complex = 1.0) -> "Homotopy":
        """``gamma * t * start + (1 - t) * target``."""
        if start.nvars != target.nvars:
            raise ValueError("start and target systems differ in size")
        a, b, exps, ptr = [], [], [], [0]
        for f, g in zip(target.polys, start.polys):
            for term in f.terms:
                a.append(term.coeff)
                b.append(-term.coeff)
                exps.append(term.exponents)
            for term in g.terms:
                a.append(0j)
                b.append(gamma * term.coeff)
                exps.append(term.exponents)
            ptr.append(len(a))
        n = target.nvars
        return cls(
            n,
            np.array(a, dtype=np.complex128),
            np.array(b, dtype=np.complex128),
            np.array(exps, dtype=np.int64).reshape(len(a), n),
            np.array(ptr, dtype=np.int64),
        )

    @classmethod
    def constant(cls, sys: PolySystem) -> "Homotopy":
        c, exps, ptr = compile_system(sys)
        return cls(sys.nvars, c, np.zeros_like(c), exps, ptr)

    def arrays(self):
        return self.a, self.b, self.exps, self.ptr

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        n = self.nvars
        H = np.empty(n, np.complex128)
        J = np.empty((n, n), np.complex128)
        Ht = np.empty(n, np.complex128)
        K._evaluate(self.a, self.b, self.exps, self.ptr, x, complex(t), H, J, Ht)
        return H


@dataclass(frozen=True)
class PathResult:
    status: str
    endpoint: np.ndarray
    last_t: float
    steps: int
    final_residual: float
    cycle: int = 0
    start: np.ndarray | None = None

    @property
    def singular(self) -> bool:
        return self.cycle > 1


@dataclass
class SolutionSet:
    solutions: list[np.ndarray]
    multiplicity: list[int]
    singular: list[bool]
    residuals: list[float]
    diverged_count: int
    failed_count: int
    finite_paths: int
    total_paths: int
    gamma: complex
    paths: list[PathResult] = field(default_factory=list, repr=False)
    retried: bool = False

    def __len__(self) -> int:
        return len(self.solutions)

    @property
    def nvars(self) -> int:
        return len(self.solutions[0]) if self.solutions else 0

    def array(self) -> np.ndarray:
        return np.array(self.solutions, dtype=complex).reshape(len(self.solutions), -1)

    @property
    def diverged_paths(self) -> list[PathResult]:
        return [p for p in self.paths if p.status == DIVERGED]


def start_system(sys: PolySystem, gamma: complex = 1.0):
    """``g_i = x_i**d_i - 1`` and its ``prod(d_i)`` roots (tuples of roots of unity).

    ``gamma`` only enters the homotopy; it is accepted here so callers can
    build both pieces from one call.
    """
    degrees = sys.degrees
    if any(d < 1 for d in degrees):
        raise ValueError(f"every polynomial needs degree >= 1, got {degrees}")
    n = sys.nvars
    polys = tuple(Poly.var(i, n) ** d - 1.0 for i, d in enumerate(degrees))
    g = PolySystem(n, polys, degrees=degrees, names=sys.names)
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    points = [np.array(p, dtype=complex) for p in itertools.product(*roots)]
    return g, points


def total_degree_homotopy(sys: PolySystem, gamma: complex):
    g, points = start_system(sys, gamma)
    return Homotopy.straight_line(g, sys, gamma), points


def track_path(H: Homotopy, start, cfg: HomotopyConfig | None = None) -> PathResult:
    cfg = cfg or HomotopyConfig()
    start = np.asarray(start, dtype=np.complex128)
    code, x, t, steps, res, cyc = K.track_path(*H.arrays(), start, cfg.params())
    return PathResult(_STATUS[int(code)], x, float(t), int(steps), float(res), int(cyc), start)


def track_all(H: Homotopy, starts, cfg: HomotopyConfig) -> list[PathResult]:
    starts = np.asarray(starts, dtype=np.complex128).reshape(len(starts), H.nvars)
    status, ends, last_t, steps, res, cyc = K.track_many(*H.arrays(), starts, cfg.params())
    return [
        PathResult(_STATUS[int(status[i])], ends[i].copy(), float(last_t[i]), int(steps[i]), float(res[i]), int(cyc[i]), starts[i])
        for i in range(len(starts))
    ]


def sharpen(sys: PolySystem, points, tol: float = 1e-11, maxit: int = 8):
    """Newton-refine points on the target system; returns (points, residuals)."""
    if len(points) == 0:
        return np.zeros((0, sys.nvars), complex), np.zeros(0)
    c, exps, ptr = compile_system(sys)
    pts = np.asarray(points, dtype=np.complex128).reshape(len(points), sys.nvars)
    out, _, res = K.newton_many(c, np.zeros_like(c), exps, ptr, pts, 0j, maxit, 1e-15)
    # keep the unrefined point where refinement made things worse (singular endpoints)
    _, _, res0 = K.newton_many(c, np.zeros_like(c), exps, ptr, pts, 0j, 0, 1e-15)
    worse = res > res0
    out[worse] = pts[worse]
    res[worse] = res0[worse]
    return out, res


def sort_key(x, decimals: int = 8):
    x = np.asarray(x)
    re = np.round(x.real, decimals) + 0.0
    im = np.round(x.imag, decimals) + 0.0
    return tuple(re) + tuple(im)


def _collect(sys: PolySystem, paths: list[PathResult], cfg: HomotopyConfig, gamma: complex) -> SolutionSet:
    finite = [p for p in paths if p.status == FINITE]
    diverged = sum(p.status == DIVERGED for p in paths)
    failed = sum(p.status == FAILED for p in paths)
    pts, res = sharpen(sys, [p.endpoint for p in finite], cfg.sharpen_tol)
    c, exps, ptr = compile_system(sys)

    clusters: list[list[int]] = []
    for i, x in enumerate(pts):
        for cl in clusters:
            if np.linalg.norm(x - pts[cl[0]]) <= cfg.dedup_tol * (1 + np.linalg.norm(x)):
                cl.append(i)
                break
        else:
            clusters.append([i])

    records = []
    for cl in clusters:
        i = min(cl, key=lambda j: res[j])
        x = pts[i]
        cond = K.condition_at(c, exps, ptr, np.asarray(x, np.complex128))
        singular = any(finite[j].singular for j in cl) or not cond < 1e12
        records.append((sort_key(x), x, len(cl), singular, float(res[i])))
    records.sort(key=lambda r: r[0])
    return SolutionSet(
        solutions=[r[1] for r in records],
        multiplicity=[r[2] for r in records],
        singular=[r[3] for r in records],
        residuals=[r[4] for r in records],
        diverged_count=diverged,
        failed_count=failed,
        finite_paths=len(finite),
        total_paths=len(paths),
        gamma=gamma,
        paths=paths,
    )


def _suspect(ss: SolutionSet) -> bool:
    # a nonsingular root reached by two paths means a path jumped
    jumped = any(m > 1 and not s for m, s in zip(ss.multiplicity, ss.singular))
    return ss.failed_count > 0 or jumped


def solve_all(sys: PolySystem, cfg: HomotopyConfig | None = None) -> SolutionSet:
    """All isolated finite solutions of a square system.

    A run with failed paths (or two paths landing on one regular root) is
    repeated once with a fresh gamma; the second result is returned either way.
    """
    cfg = cfg or HomotopyConfig()
    gamma = cfg.resolved_gamma()
    H, starts = total_degree_homotopy(sys, gamma)
    ss = _collect(sys, track_all(H, starts, cfg), cfg, gamma)
    if _suspect(ss):
        log.info("retrying with fresh gamma: %d failed paths", ss.failed_count)
        cfg2 = replace(cfg, gamma=None, seed=cfg.seed + 7919)
        gamma = cfg2.resolved_gamma()
        H, starts = total_degree_homotopy(sys, gamma)
        ss = _collect(sys, track_all(H, starts, cfg2), cfg2, gamma)
        ss.retried = True
    return ss


@dataclass(frozen=True)
class DivergenceDiagnosis:
    direction: np.ndarray
    top_residual: float
    realness_gap: float
    nonreal: bool
    norm: float


def classify_divergence(sys: PolySystem, path: PathResult, real_tol: float = 1e-3) -> DivergenceDiagnosis | None:
    """Inspect the limiting direction of a diverged path.

    The last iterate is scaled to unit norm and substituted into the
    homogeneous top parts of ``sys`` (taken at the declared degrees).  The
    direction is flagged nonreal when no complex multiple of it is real,
    i.e. when its real and imaginary parts are not parallel.  Returns None for
    paths that did not diverge.
    """
    if path.status != DIVERGED:
        return None
    x = np.asarray(path.endpoint, dtype=complex)
    nrm = float(np.linalg.norm(x))
    u = x / nrm
    top = homogeneous_top(sys)
    residual = float(np.max(np.abs(evaluate(top, u)))) if sys.nvars else 0.0
    gap = float(np.linalg.svd(np.column_stack([u.real, u.imag]), compute_uv=False)[-1])
    return DivergenceDiagnosis(u, residual, gap, gap > real_tol, nrm)
