"""Permutation groups on {0, ..., n-1}: stabilizer chains, orders, blocks.

Permutations are tuples of images, ``p[i]`` being where ``i`` goes.  Products
apply the right factor first: ``mul(p, q)[i] == p[q[i]]``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

Perm = tuple[int, ...]


def identity(n: int) -> Perm:
    return tuple(range(n))


def mul(p: Perm, q: Perm) -> Perm:
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def is_identity(p: Perm) -> bool:
    return all(i == j for i, j in enumerate(p))


def check_perm(p: Sequence[int]) -> Perm:
    p = tuple(int(i) for i in p)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation: {p}")
    return p


def cycles(p: Perm, one_based: bool = True) -> list[tuple[int, ...]]:
    seen, out = set(), []
    off = 1 if one_based else 0
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j + off)
            j = p[j]
        out.append(tuple(cyc))
    return out


def from_cycles(n: int, cyc: Iterable[Sequence[int]], one_based: bool = True) -> Perm:
    img = list(range(n))
    off = 1 if one_based else 0
    for c in cyc:
        c = [x - off for x in c]
        for a, b in zip(c, c[1:] + c[:1]):
            img[a] = b
    return check_perm(img)


def _orbit_transversal(point: int, gens: list[Perm], n: int) -> dict[int, Perm]:
    """Map each orbit point q to a group element sending ``point`` to q."""
    T = {point: identity(n)}
    frontier = [point]
    while frontier:
        nxt = []
        for q in frontier:
            for g in gens:
                r = g[q]
                if r not in T:
                    T[r] = mul(g, T[q])
                    nxt.append(r)
        frontier = nxt
    return T


class StabilizerChain:
    """Base and strong generating set built by the incremental Schreier-Sims method."""

    def __init__(self, n: int, gens: Iterable[Perm] = ()):
        self.n = n
        self.base: list[int] = []
        self.strong: list[Perm] = []
        self.transversals: list[dict[int, Perm]] = []
        gens = [check_perm(g) for g in gens]
        for g in gens:
            if len(g) != n:
                raise ValueError("generators act on different domains")
        self._build([g for g in gens if not is_identity(g)])

    def _level_gens(self, i: int) -> list[Perm]:
        fixed = self.base[:i]
        return [s for s in self.strong if all(s[b] == b for b in fixed)]

    def _refresh(self, i: int) -> None:
        while len(self.transversals) < len(self.base):
            self.transversals.append({})
        self.transversals[i] = _orbit_transversal(self.base[i], self._level_gens(i), self.n)

    def sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        """Strip ``g`` through the chain; returns (residue, level reached)."""
        for i in range(start, len(self.base)):
            beta = g[self.base[i]]
            T = self.transversals[i]
            if beta not in T:
                return g, i
            g = mul(inverse(T[beta]), g)
        return g, len(self.base)

    def _new_base_point(self, g: Perm) -> int:
        return next(i for i in range(self.n) if g[i] != i)

    def _build(self, gens: list[Perm]) -> None:
        for g in gens:
            if all(g[b] == b for b in self.base):
                self.base.append(self._new_base_point(g))
            self.strong.append(g)
        for i in range(len(self.base)):
            self._refresh(i)
        i = len(self.base) - 1
        while i >= 0:
            grew = False
            gens_i = self._level_gens(i)
            T = self.transversals[i]
            for q, u in list(T.items()):
                for s in gens_i:
                    sg = mul(inverse(T[s[q]]), mul(s, u))
                    if is_identity(sg):
                        continue
                    h, j = self.sift(sg, i + 1)
                    if is_identity(h):
                        continue
                    if j == len(self.base):
                        self.base.append(self._new_base_point(h))
                        self.transversals.append({})
                    self.strong.append(h)
                    for level in range(i + 1, j + 1):
                        self._refresh(level)
                    i = j
                    grew = True
                    break
                if grew:
                    break
            if not grew:
                i -= 1

    def contains(self, g: Perm) -> bool:
        h, j = self.sift(check_perm(g))
        return j == len(self.base) and is_identity(h)

    def order(self) -> int:
        return math.prod(len(T) for T in self.transversals)


class PermGroup:
    """Generated permutation group that can grow one generator at a time."""

    def __init__(self, n: int, gens: Iterable[Perm] = ()):
        self.n = n
        self.generators: list[Perm] = []
        self.chain = StabilizerChain(n)
        for g in gens:
            self.add(g)

    def add(self, g: Perm) -> bool:
        """Add a generator; True when the group got bigger."""
        g = check_perm(g)
        if self.chain.contains(g):
            return False
        self.generators.append(g)
        self.chain = StabilizerChain(self.n, list(self.chain.strong) + [g])
        return True

    def order(self) -> int:
        return self.chain.order()

    def __contains__(self, g) -> bool:
        return self.chain.contains(g)

    def orbits(self) -> list[list[int]]:
        return orbits(self.generators, self.n)

    def fixed_points(self) -> list[int]:
        return [i for i in range(self.n) if all(g[i] == i for g in self.generators)]

    def blocks(self) -> list[list[int]]:
        return block_system(self.generators, self.n)


def group_order(generators: Sequence[Sequence[int]], n: int | None = None) -> int:
    gens = [check_perm(g) for g in generators]
    if n is None:
        n = len(gens[0]) if gens else 0
    return StabilizerChain(n, gens).order()


def orbits(gens: Sequence[Perm], n: int) -> list[list[int]]:
    seen, out = set(), []
    for p in range(n):
        if p in seen:
            continue
        orb = sorted(_orbit_transversal(p, list(gens), n)) if gens else [p]
        seen.update(orb)
        out.append(orb)
    return out


def minimal_block(gens: Sequence[Perm], n: int, a: int, b: int) -> list[list[int]]:
    """Finest block system in which ``a`` and ``b`` share a block."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    parent[find(b)] = find(a)
    queue = [(a, b)]
    while queue:
        x, y = queue.pop()
        for g in gens:
            u, v = find(g[x]), find(g[y])
            if u != v:
                parent[v] = u
                queue.append((g[x], g[y]))
    classes: dict[int, list[int]] = {}
    for p in range(n):
        classes.setdefault(find(p), []).append(p)
    return list(classes.values())


def block_system(gens: Sequence[Perm], n: int) -> list[list[int]]:
    """Smallest nontrivial blocks on every non-fixed orbit; [] where the action is primitive.

    Each transitive orbit of size > 2 is examined independently; blocks of the
    orbits that admit one are concatenated.
    """
    out = []
    for orb in orbits(gens, n):
        if len(orb) <= 2:
            continue
        alpha = orb[0]
        best = None
        for beta in orb[1:]:
            part = minimal_block(gens, n, alpha, beta)
            blk = next(c for c in part if alpha in c)
            if len(blk) < len(orb) and (best is None or len(blk) < len(best[0])):
                best = (blk, part)
        if best is not None:
            members = set(orb)
            out += sorted(sorted(c) for c in best[1] if c[0] in members)
    return out
