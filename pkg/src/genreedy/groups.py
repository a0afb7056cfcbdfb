"""Finite groups as multiplication tables."""
from __future__ import annotations

from functools import cached_property
from itertools import permutations
from typing import Hashable, Sequence

import numpy as np

from .fincat import FinCategory, StructureError, ValidationReport


def compose_perm(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``p o q`` as tuples: ``x -> p[q[x]]``."""
    return tuple(p[i] for i in q)


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


class FiniteGroup:
    """A finite group with elements ``0..n-1``; ``mult[a, b] = a * b``."""

    def __init__(self, mult, unit: int = 0, labels: Sequence[Hashable] | None = None, name: str = ""):
        mult = np.array(mult, dtype=np.int64)
        n = mult.shape[0]
        if mult.shape != (n, n) or n == 0:
            raise StructureError("group table must be a non-empty square")
        if mult.min() < 0 or mult.max() >= n:
            raise StructureError("group table refers to a missing element")
        if not 0 <= unit < n:
            raise StructureError(f"unit {unit} is not an element")
        mult.setflags(write=False)
        self.mult = mult
        self.unit = int(unit)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        self.name = name

    @property
    def order(self) -> int:
        return self.mult.shape[0]

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(range(self.order))

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    @cached_property
    def inv(self) -> np.ndarray:
        out = np.argmax(self.mult == self.unit, axis=1)
        out.setflags(write=False)
        return out

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    @cached_property
    def _label_index(self):
        return {l: i for i, l in enumerate(self.labels)}

    def index(self, label) -> int:
        return self._label_index[label]

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        m, e = self.mult, self.unit
        n = self.order
        idx = np.arange(n)
        if not (np.array_equal(m[e], idx) and np.array_equal(m[:, e], idx)):
            rep.add("unit", (e,), "unit law fails")
        for a in range(n):
            if len(set(m[a].tolist())) != n:
                rep.add("latin", (a,), "row is not a permutation")
        lhs = m[m[:, :, None], idx[None, None, :]]          # (ab)c
        rhs = m[idx[:, None, None], m[None, :, :]]          # a(bc)
        for a, b, c in np.argwhere(lhs != rhs)[:25]:
            rep.add("associativity", (int(a), int(b), int(c)), "(ab)c != a(bc)")
        return rep

    def is_trivial(self) -> bool:
        return self.order == 1

    def subgroups(self) -> list[frozenset[int]]:
        """All subgroups, found by closing sets of at most two generators (enough for order <= 6 corpora)."""
        found = {frozenset([self.unit])}
        frontier = list(found)
        while frontier:
            nxt = []
            for H in frontier:
                for g in range(self.order):
                    if g in H:
                        continue
                    K = self.closure(set(H) | {g})
                    if K not in found:
                        found.add(K)
                        nxt.append(K)
            frontier = nxt
        return sorted(found, key=lambda H: (len(H), sorted(H)))

    def closure(self, gens) -> frozenset[int]:
        elems = {self.unit} | set(gens)
        frontier = list(elems)
        while frontier:
            nxt = []
            for a in frontier:
                for b in list(elems):
                    for c in (self.mult[a, b], self.mult[b, a]):
                        c = int(c)
                        if c not in elems:
                            elems.add(c)
                            nxt.append(c)
            frontier = nxt
        return frozenset(elems)

    def as_category(self, name: str = "") -> FinCategory:
        n = self.order
        comp = np.array(self.mult)
        return FinCategory(["*"], [0] * n, [0] * n, [self.unit], comp,
                           names=[str(l) for l in self.labels], keys=list(self.labels),
                           object_keys=["*"], name=name or self.name)

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.unit == other.unit and np.array_equal(self.mult, other.mult)

    def __hash__(self):
        return hash((self.unit, self.mult.tobytes()))

    def __repr__(self):
        return f"<FiniteGroup {self.name or ''} of order {self.order}>"

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]], degree: int, name: str = "") -> FiniteGroup:
        """The permutation group on ``range(degree)`` generated by ``gens``; labels are the tuples."""
        ident = tuple(range(degree))
        elems = [ident]
        seen = {ident}
        gens = [tuple(g) for g in gens]
        i = 0
        while i < len(elems):
            for g in gens:
                c = compose_perm(g, elems[i])
                if c not in seen:
                    seen.add(c)
                    elems.append(c)
            i += 1
        elems.sort()
        return cls.from_elements(elems, compose_perm, ident, name=name)

    @classmethod
    def from_elements(cls, elems: Sequence[Hashable], op, unit, name: str = "") -> FiniteGroup:
        elems = list(elems)
        pos = {e: i for i, e in enumerate(elems)}
        mult = [[pos[op(a, b)] for b in elems] for a in elems]
        return cls(mult, pos[unit], labels=elems, name=name)

    @classmethod
    def cyclic(cls, n: int) -> FiniteGroup:
        mult = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
        return cls(mult, 0, name=f"Z/{n}")

    @classmethod
    def symmetric(cls, n: int) -> FiniteGroup:
        elems = sorted(permutations(range(n)))
        return cls.from_elements(elems, compose_perm, tuple(range(n)), name=f"S{n}")

    @classmethod
    def trivial(cls) -> FiniteGroup:
        return cls([[0]], 0, name="1")

    @classmethod
    def product(cls, G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
        elems = [(a, b) for a in range(G.order) for b in range(H.order)]
        return cls.from_elements(elems, lambda x, y: (G.mul(x[0], y[0]), H.mul(x[1], y[1])),
                                 (G.unit, H.unit), name=f"{G.name}x{H.name}")


def cyclic_permutation(n: int) -> tuple[int, ...]:
    """The generator ``i -> i+1 mod n+1`` of the cyclic group acting on ``[n] = {0..n}``."""
    return tuple((i + 1) % (n + 1) for i in range(n + 1))
