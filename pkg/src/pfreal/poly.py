"""Sparse multivariate polynomials with complex coefficients.

Polynomials are stored as a canonical tuple of ``(exponents, coeff)`` pairs
with dense exponent vectors.  Systems are small (a handful of variables,
quadratic), so nothing here tries to be clever about sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np

# coefficients smaller than this after merging are treated as numeric dust
DROP_TOL = 1e-14


@dataclass(frozen=True)
class Term:
    coeff: complex
    exponents: tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.exponents)


def _canonical(nvars: int, pairs: Iterable[tuple[Sequence[int], complex]]) -> tuple[Term, ...]:
    merged: dict[tuple[int, ...], complex] = {}
    for exps, c in pairs:
        exps = tuple(int(e) for e in exps)
        if len(exps) != nvars:
            raise ValueError(f"exponent vector {exps} does not match nvars={nvars}")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        merged[exps] = merged.get(exps, 0j) + complex(c)
    terms = [Term(c, e) for e, c in merged.items() if abs(c) >= DROP_TOL]
    # graded reverse order: highest total degree first, then lexicographic
    terms.sort(key=lambda t: (-t.degree, tuple(-e for e in t.exponents)))
    return tuple(terms)


@dataclass(frozen=True)
class Poly:
    nvars: int
    terms: tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, nvars: int, pairs: Iterable[tuple[Sequence[int], complex]]) -> "Poly":
        return cls(nvars, _canonical(nvars, pairs))

    @classmethod
    def const(cls, c: complex, nvars: int) -> "Poly":
        return cls.from_terms(nvars, [((0,) * nvars, c)])

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        exps = [0] * nvars
        exps[i] = 1
        return cls.from_terms(nvars, [(exps, 1.0)])

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((t.degree for t in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, exps: Sequence[int]) -> complex:
        exps = tuple(exps)
        for t in self.terms:
            if t.exponents == exps:
                return t.coeff
        return 0j

    def support(self) -> frozenset[tuple[int, ...]]:
        return frozenset(t.exponents for t in self.terms)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different rings")
            return other
        return Poly.const(other, self.nvars)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        pairs = [(t.exponents, t.coeff) for t in self.terms + other.terms]
        return Poly.from_terms(self.nvars, pairs)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, tuple(Term(-t.coeff, t.exponents) for t in self.terms))

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        pairs = [
            (tuple(a + b for a, b in zip(s.exponents, o.exponents)), s.coeff * o.coeff)
            for s in self.terms
            for o in other.terms
        ]
        return Poly.from_terms(self.nvars, pairs)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1.0, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def diff(self, j: int) -> "Poly":
        pairs = []
        for t in self.terms:
            e = t.exponents[j]
            if e:
                exps = list(t.exponents)
                exps[j] -= 1
                pairs.append((exps, t.coeff * e))
        return Poly.from_terms(self.nvars, pairs)

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.nvars, tuple(t for t in self.terms if t.degree == d))

    def __call__(self, point) -> complex:
        return complex(evaluate_poly(self, point))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            mono = "*".join(
                f"x{j}" if e == 1 else f"x{j}^{e}" for j, e in enumerate(t.exponents) if e
            )
            c = t.coeff.real if t.coeff.imag == 0 else t.coeff
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


@dataclass(frozen=True)
class PolySystem:
    """Square polynomial system.

    ``degrees`` are the homogenization degrees used for the start system and
    for solutions at infinity.  They default to the actual total degrees but a
    builder may declare larger ones (e.g. every power-flow equation is treated
    as quadratic even when a sparse network makes it linear).
    """

    nvars: int
    polys: tuple[Poly, ...]
    degrees: tuple[int, ...] = field(default=())
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        polys = tuple(self.polys)
        object.__setattr__(self, "polys", polys)
        if len(polys) != self.nvars:
            raise ValueError(f"system is not square: {len(polys)} polynomials in {self.nvars} variables")
        for p in polys:
            if p.nvars != self.nvars:
                raise ValueError("polynomial ring does not match system")
        if not self.degrees:
            object.__setattr__(self, "degrees", tuple(p.degree() for p in polys))
        elif len(self.degrees) != self.nvars:
            raise ValueError("one declared degree per polynomial is required")
        else:
            for p, d in zip(polys, self.degrees):
                if p.degree() > d:
                    raise ValueError(f"declared degree {d} below actual degree {p.degree()}")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{j}" for j in range(self.nvars)))

    def __len__(self) -> int:
        return self.nvars

    def __iter__(self):
        return iter(self.polys)

    def total_degree(self) -> int:
        return int(np.prod(self.degrees)) if self.nvars else 1

    def support(self) -> frozenset[tuple[int, tuple[int, ...]]]:
        return frozenset((i, e) for i, p in enumerate(self.polys) for e in p.support())


def _poly_arrays(p: Poly):
    if not p.terms:
        return np.zeros(0, dtype=complex), np.zeros((0, p.nvars), dtype=np.int64)
    coeffs = np.array([t.coeff for t in p.terms], dtype=complex)
    exps = np.array([t.exponents for t in p.terms], dtype=np.int64)
    return coeffs, exps


def evaluate_poly(p: Poly, point, precision: int | None = None):
    """Evaluate one polynomial.

    With ``precision`` (bits) the accumulation is done in mpmath at that
    working precision and an ``mpc`` is returned.
    """
    if precision is not None:
        with mpmath.workprec(precision):
            xs = [mpmath.mpc(v) for v in point]
            acc = mpmath.mpc(0)
            for t in p.terms:
                m = mpmath.mpc(t.coeff)
                for x, e in zip(xs, t.exponents):
                    if e:
                        m *= x**e
                acc += m
            return acc
    coeffs, exps = _poly_arrays(p)
    x = np.asarray(point, dtype=complex)
    return complex(np.sum(coeffs * np.prod(x[None, :] ** exps, axis=1)))


def evaluate(sys: PolySystem, point, precision: int | None = None):
    point = list(point) if precision is not None else np.asarray(point, dtype=complex).ravel()
    if len(point) != sys.nvars:
        raise ValueError(f"point has {len(point)} coordinates, system has {sys.nvars} variables")
    if precision is not None:
        return [evaluate_poly(p, point, precision) for p in sys.polys]
    return np.array([evaluate_poly(p, point) for p in sys.polys], dtype=complex)


def jacobian(sys: PolySystem) -> list[list[Poly]]:
    return [[p.diff(j) for j in range(sys.nvars)] for p in sys.polys]


def evaluate_jacobian(sys: PolySystem, point) -> np.ndarray:
    x = np.asarray(point, dtype=complex)
    return np.array([[evaluate_poly(d, x) for d in row] for row in jacobian(sys)], dtype=complex)


def top_form(sys: PolySystem) -> PolySystem:
    """Keep only the terms of maximal total degree in each polynomial."""
    polys = tuple(p.homogeneous_part(p.degree()) for p in sys.polys)
    return PolySystem(sys.nvars, polys, names=sys.names)


def homogeneous_top(sys: PolySystem) -> PolySystem:
    """Degree-``d_i`` parts with respect to the declared degrees.

    These are the equations solutions at infinity satisfy after homogenizing
    each polynomial to its declared degree; a polynomial whose actual degree is
    below the declared one contributes the zero polynomial.
    """
    polys = tuple(p.homogeneous_part(d) for p, d in zip(sys.polys, sys.degrees))
    return PolySystem(sys.nvars, polys, degrees=sys.degrees, names=sys.names)


def compile_system(sys: PolySystem):
    """Flatten into ``(coeffs, exps, ptr)`` arrays for the compiled kernels."""
    coeffs, exps, ptr = [], [], [0]
    for p in sys.polys:
        for t in p.terms:
            coeffs.append(t.coeff)
            exps.append(t.exponents)
        ptr.append(len(coeffs))
    return (
        np.array(coeffs, dtype=np.complex128),
        np.array(exps, dtype=np.int64).reshape(len(coeffs), sys.nvars),
        np.array(ptr, dtype=np.int64),
    )
