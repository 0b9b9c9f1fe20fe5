"""Univariate eliminants built from computed solutions, and positive-root counts.

For zero-injection, unit-magnitude PV networks the nonconstant solutions come
in ``(Vd, Vq) / (Vd, -Vq)`` pairs, so the squares of one ``Vq`` coordinate are
the roots of a polynomial of half the size.  Real solutions correspond to its
positive roots, which are counted with a Sturm chain in extended precision.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

from .classify import check_symmetry, split_real, split_trivial
from .errors import NonGenericCoordinateError, PrecisionError, StructuralError
from .tracker import SolutionSet

log = logging.getLogger(__name__)

PREC = 128  # bits


class NearMultipleRootWarning(UserWarning):
    pass


@dataclass(frozen=True)
class UniPoly:
    """Real polynomial, coefficients in ascending degree as mpmath floats."""

    coeffs: tuple
    prec: int = PREC

    def __post_init__(self):
        cs = [mpmath.mpf(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs or (len(cs) == 1 and cs[0] == 0):
            raise ValueError("zero polynomial")
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_roots(cls, roots, prec: int = PREC) -> "UniPoly":
        return _vieta(roots, prec)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def monic(self) -> "UniPoly":
        with mpmath.workprec(self.prec):
            lead = self.coeffs[-1]
            return UniPoly(tuple(c / lead for c in self.coeffs), self.prec)

    def __call__(self, x):
        with mpmath.workprec(self.prec):
            return mpmath.polyval(list(reversed(self.coeffs)), x)

    def descending(self) -> list[float]:
        return [float(c) for c in reversed(self.coeffs)]

    def ascending(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def roots(self) -> list:
        with mpmath.workprec(self.prec):
            return mpmath.polyroots(list(reversed(self.coeffs)), maxsteps=200, extraprec=2 * self.prec)

    def format(self, decimals: int = 4, var: str = "x") -> str:
        """Descending-power display, e.g. ``x^6 + 13.4913x^5 - ...``."""
        out = []
        for k, c in zip(range(self.degree, -1, -1), self.descending()):
            if c == 0 and k < self.degree:
                continue
            mag = abs(c)
            body = "" if (k > 0 and round(mag, decimals) == 1) else f"{mag:.{decimals}f}"
            if k > 1:
                body += f"{var}^{k}"
            elif k == 1:
                body += var
            sign = "-" if c < 0 else "+"
            out.append((sign, body))
        first_sign, first = out[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text


@dataclass(frozen=True)
class RootCount:
    descartes_max: int
    sturm_positive: int
    sturm_negative: int

    @property
    def agrees(self) -> bool:
        return self.descartes_max == self.sturm_positive


def _vieta(roots, prec: int) -> UniPoly:
    with mpmath.workprec(prec):
        coeffs = [mpmath.mpc(1)]
        for r in roots:
            r = mpmath.mpc(r)
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] += c
                nxt[i] -= r * c
            coeffs = nxt
        scale = max(abs(c) for c in coeffs)
        worst = max(abs(c.imag) for c in coeffs)
        if worst > 1e-8 * max(1, scale):
            raise StructuralError(f"eliminant coefficients not real (imaginary residue {float(worst):.2e})")
        return UniPoly(tuple(c.real for c in coeffs), prec)


def default_coordinate(nvars: int) -> int:
    """Index of the last bus's Vq."""
    return nvars - 1


def build_eliminant(nonconstant, coord_index: int | None = None, prec: int = PREC, distinct_tol: float = 1e-10) -> UniPoly:
    """Monic polynomial whose roots are the squared ``coord_index`` values of the pairs."""
    pts = [np.asarray(x, dtype=complex) for x in (nonconstant.solutions if isinstance(nonconstant, SolutionSet) else nonconstant)]
    if not pts:
        return UniPoly((1,), prec)
    if len(pts) % 2:
        raise StructuralError(f"odd number ({len(pts)}) of nonconstant solutions")
    coord = default_coordinate(len(pts[0])) if coord_index is None else coord_index
    if coord % 2 != 1:
        raise ValueError("the eliminant coordinate must be a Vq component")
    pairs = check_symmetry(pts)
    values = [complex(pts[i][coord]) ** 2 for i, _ in pairs]
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            if abs(values[a] - values[b]) <= distinct_tol * max(1.0, abs(values[a])):
                raise NonGenericCoordinateError(f"coordinate {coord} does not separate solution pairs")
    return _vieta(values, prec)


def descartes(p: UniPoly) -> int:
    signs = [mpmath.sign(c) for c in p.coeffs if c != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _rem(num: list, den: list) -> list:
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    while len(num) - 1 >= dn and len(num) > 0:
        f = num[-1] / lead
        shift = len(num) - 1 - dn
        for i in range(dn + 1):
            num[shift + i] -= f * den[i]
        num.pop()
    return num


def _trim(p: list, scale) -> list:
    p = list(p)
    while p and abs(p[-1]) <= scale:
        p.pop()
    return p


def sturm_chain(p: UniPoly) -> list[list]:
    with mpmath.workprec(p.prec):
        p0 = list(p.monic().coeffs)
        p1 = [k * c for k, c in enumerate(p0)][1:]
        chain = [p0, p1]
        eps = mpmath.mpf(2) ** (-(p.prec * 3 // 4))
        while len(chain[-1]) > 1:
            a, b = chain[-2], chain[-1]
            scale = eps * max(abs(c) for c in a)
            r = _trim([-c for c in _rem(a, b)], scale)
            if not r:
                break
            chain.append(r)
        return chain


def _variations(values) -> int:
    signs = [v for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _signs_at_zero(chain, tol) -> list[int]:
    """Signs of the chain at 0.

    Only the first member needs a reliable sign: where a later member
    vanishes its neighbours have opposite signs, so a zero (or a tiny value of
    either sign) leaves the variation count unchanged.
    """
    out = []
    for i, q in enumerate(chain):
        scale = max(abs(c) for c in q)
        if abs(q[0]) <= tol * scale:
            if i == 0:
                raise PrecisionError("polynomial value at 0 indistinguishable from zero")
            out.append(0)
        else:
            out.append(int(mpmath.sign(q[0])))
    return out


def _count(p: UniPoly, sign_tol: float) -> tuple[int, int]:
    chain = sturm_chain(p)
    with mpmath.workprec(p.prec):
        at_zero = _signs_at_zero(chain, sign_tol)
        at_pinf = [int(mpmath.sign(q[-1])) for q in chain]
        at_minf = [int(mpmath.sign(q[-1])) * (-1) ** (len(q) - 1) for q in chain]
    positive = _variations(at_zero) - _variations(at_pinf)
    negative = _variations(at_minf) - _variations(at_zero)
    return positive, negative


def squarefree_defect(p: UniPoly, threshold: float = 1e-10) -> int:
    """Number of roots lying within ``threshold`` (relative) of an earlier root.

    Zero for a numerically squarefree polynomial.  Relative separation is used
    because eliminant coefficients can span many orders of magnitude.
    """
    if p.degree < 2:
        return 0
    roots = p.roots()
    with mpmath.workprec(p.prec):
        defect = 0
        for i in range(1, len(roots)):
            for j in range(i):
                gap = abs(roots[i] - roots[j])
                if gap <= threshold * max(abs(roots[i]), abs(roots[j]), mpmath.mpf(1e-300)):
                    defect += 1
                    break
    return defect


def _check_squarefree(p: UniPoly) -> None:
    if p.degree > 1 and squarefree_defect(p) > 0:
        warnings.warn("eliminant has a numerically multiple root; Sturm count may be unreliable", NearMultipleRootWarning, stacklevel=3)


def _with_retry(p: UniPoly, sign_tol: float, max_prec: int):
    prec = p.prec
    while True:
        try:
            return _count(UniPoly(p.coeffs, prec), sign_tol)
        except PrecisionError:
            if prec * 2 > max_prec:
                raise
            prec *= 2
            log.info("retrying Sturm count at %d bits", prec)


def sturm_positive(p: UniPoly, sign_tol: float = 1e-20, max_prec: int = 1024) -> int:
    """Number of distinct roots in (0, inf)."""
    _check_squarefree(p)
    return _with_retry(p, sign_tol, max_prec)[0]


def sturm_negative(p: UniPoly, sign_tol: float = 1e-20, max_prec: int = 1024) -> int:
    """Number of distinct roots in (-inf, 0)."""
    return _with_retry(p, sign_tol, max_prec)[1]


def root_count(p: UniPoly) -> RootCount:
    _check_squarefree(p)
    pos, neg = _with_retry(p, 1e-20, 1024)
    return RootCount(descartes(p), pos, neg)


@dataclass(frozen=True)
class EliminantCount:
    eliminant: UniPoly
    coord_index: int
    counts: RootCount
    n_trivial: int
    n_real: int
    n_direct: int | None


def eliminant_analysis(solutions, coord_index: int | None = None, vm=None) -> EliminantCount:
    """Eliminant, root counts and implied real-solution count for a solved instance.

    Tries ``coord_index`` (default: last Vq) first and falls back to the other
    Vq coordinates when it does not separate the solution pairs.
    """
    pts = solutions.solutions if isinstance(solutions, SolutionSet) else solutions
    trivial, nonconstant = split_trivial(pts, vm)
    nvars = len(pts[0])
    candidates = [default_coordinate(nvars) if coord_index is None else coord_index]
    candidates += [j for j in range(nvars - 1, 0, -2) if j not in candidates]
    last_err = None
    for coord in candidates:
        try:
            r = build_eliminant(nonconstant, coord)
        except NonGenericCoordinateError as err:
            last_err = err
            continue
        counts = root_count(r)
        direct = len(split_real(pts)[0])
        return EliminantCount(r, coord, counts, len(trivial), len(trivial) + 2 * counts.sturm_positive, direct)
    raise last_err


def count_real_via_eliminant(ss, vm=None) -> int:
    """``#trivial + 2 * #positive roots``; raises if it disagrees with direct classification."""
    res = eliminant_analysis(ss, vm=vm)
    if res.n_direct is not None and res.n_real != res.n_direct:
        raise StructuralError(f"eliminant count {res.n_real} disagrees with direct count {res.n_direct}")
    return res.n_real
