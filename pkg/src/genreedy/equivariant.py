"""Finite sets with an action of an automorphism group of a category object."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fincat import FinCategory, ValidationReport


@dataclass
class EquivariantSet:
    """``size`` points acted on by ``group`` (morphism ids of ``category``) on the left.

    ``action[g][x]`` is ``g . x``; the group law is the category's composition.
    """
    category: FinCategory
    obj: int
    size: int
    action: dict[int, np.ndarray]
    labels: tuple = ()

    @property
    def group(self) -> list[int]:
        return sorted(self.action)

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        C = self.category
        e = int(C.ident[self.obj])
        if e in self.action and not np.array_equal(self.action[e], np.arange(self.size)):
            rep.add("unit", (e,), "identity acts non-trivially")
        for g, ag in self.action.items():
            for h, ah in self.action.items():
                gh = int(C.comp[g, h])
                if not np.array_equal(self.action[gh], ag[ah]):
                    rep.add("action", (g, h), "(gh).x != g.(h.x)")
        return rep

    def orbits(self) -> list[list[int]]:
        seen = np.zeros(self.size, dtype=bool)
        out = []
        for x in range(self.size):
            if seen[x]:
                continue
            orb = sorted({int(a[x]) for a in self.action.values()} | {x})
            seen[orb] = True
            out.append(orb)
        return out

    def stabilizer(self, x: int) -> list[int]:
        return [g for g, a in sorted(self.action.items()) if a[x] == x]

    def restrict_to(self, subset: Sequence[int]) -> EquivariantSet:
        subset = list(subset)
        pos = {v: i for i, v in enumerate(subset)}
        act = {g: np.array([pos[int(a[x])] for x in subset], dtype=np.int64) for g, a in self.action.items()}
        return EquivariantSet(self.category, self.obj, len(subset), act)


@dataclass
class EquivariantMap:
    source: EquivariantSet
    target: EquivariantSet
    mapping: np.ndarray

    def is_equivariant(self) -> bool:
        for g, a in self.source.action.items():
            if not np.array_equal(self.mapping[a], self.target.action[g][self.mapping]):
                return False
        return True

    def is_injective(self) -> bool:
        return len(np.unique(self.mapping)) == len(self.mapping)

    def is_bijective(self) -> bool:
        return self.is_injective() and len(self.mapping) == self.target.size

    def complement(self) -> list[int]:
        hit = np.zeros(self.target.size, dtype=bool)
        hit[self.mapping] = True
        return [int(y) for y in np.flatnonzero(~hit)]


@dataclass
class FreeExtensionCheck:
    """Verdict on whether an equivariant map is a free extension."""
    injective: bool
    free_on_complement: bool
    orbit_representatives: list[int] = field(default_factory=list)
    witness: object = None

    @property
    def verdict(self) -> bool:
        return self.injective and self.free_on_complement


def free_extension_check(f: EquivariantMap) -> FreeExtensionCheck:
    """Is ``f`` injective with the group acting freely on the complement of its image?"""
    if not f.is_injective():
        vals, counts = np.unique(f.mapping, return_counts=True)
        return FreeExtensionCheck(False, False, witness=("collision", int(vals[np.argmax(counts)])))
    comp = f.complement()
    B = f.target
    e = int(B.category.ident[B.obj])
    reps = []
    seen = set()
    for y in comp:
        stab = [g for g in B.stabilizer(y) if g != e]
        if stab:
            return FreeExtensionCheck(True, False, witness=("isotropy", y, stab))
        if y not in seen:
            reps.append(y)
            seen.update(int(a[y]) for a in B.action.values())
    return FreeExtensionCheck(True, True, reps)


def find_equivariant_iso(A: EquivariantSet, B: EquivariantSet) -> np.ndarray | None:
    """Search for an equivariant bijection ``A -> B`` orbit by orbit."""
    if A.size != B.size or set(A.action) != set(B.action):
        return None
    gens = A.group
    mapping = np.full(A.size, -1, dtype=np.int64)
    used = np.zeros(B.size, dtype=bool)
    orbitsA = A.orbits()
    orbitsB = B.orbits()
    stabA = [frozenset(A.stabilizer(o[0])) for o in orbitsA]

    def assign(i):
        if i == len(orbitsA):
            return True
        x = orbitsA[i][0]
        for ob in orbitsB:
            if used[ob[0]] or len(ob) != len(orbitsA[i]):
                continue
            for y in ob:
                if frozenset(B.stabilizer(y)) != stabA[i]:
                    continue
                ok = True
                for g in gens:
                    gx, gy = int(A.action[g][x]), int(B.action[g][y])
                    if mapping[gx] >= 0 and mapping[gx] != gy:
                        ok = False
                        break
                    mapping[gx] = gy
                if ok:
                    used[ob] = True
                    if assign(i + 1):
                        return True
                    used[ob] = False
                mapping[orbitsA[i]] = -1
        return False

    return mapping if assign(0) else None
