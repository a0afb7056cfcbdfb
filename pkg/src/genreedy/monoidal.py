"""Quasi-monoidal checks and the pushout-product property for presheaf monomorphisms."""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diagram import (DiagramMap, PreconditionError, SetDiagram, coproduct, product, product_map, pullback,
                      pushout, representable)
from .ez import EZStructure, _map_from_pushout, boundary, degenerate_mask, is_normal_mono


class ProductOracle(ABC):
    """A monoidal product on presheaves together with its unit."""

    name = "abstract"

    @abstractmethod
    def tensor(self, X: SetDiagram, Y: SetDiagram) -> SetDiagram: ...

    @abstractmethod
    def tensor_map(self, f: DiagramMap, g: DiagramMap) -> DiagramMap: ...

    @abstractmethod
    def unit(self, E: EZStructure) -> SetDiagram: ...

    def adequate(self, E: EZStructure, r: int, s: int) -> tuple[bool, int]:
        """Whether ``C[r] □ C[s]`` is fully visible in the truncation, and the bound it needs."""
        return True, 0


class CartesianProduct(ProductOracle):
    """Pointwise product; unit the terminal presheaf."""

    name = "cartesian"

    def tensor(self, X, Y):
        return product(X, Y)

    def tensor_map(self, f, g):
        return product_map(f, g)

    def unit(self, E):
        return SetDiagram.terminal(E.category.op)

    def adequate(self, E, r, s):
        need = int(E.degree[r] + E.degree[s])
        if need > int(E.degree.max()):
            return False, need
        # no non-degenerate product element may sit above the combined degree
        P = product(representable(E.category, r), representable(E.category, s))
        deg = degenerate_mask(E, P)
        for o in range(E.category.n_obj):
            if E.degree[o] > need and (~deg[o]).any():
                return False, need
        return True, need


class SmashProduct(ProductOracle):
    """Extension point for the smash product on pointed-set presheaves; not provided."""

    name = "smash"

    def tensor(self, X, Y):
        raise NotImplementedError("the smash product oracle is not implemented")

    def tensor_map(self, f, g):
        raise NotImplementedError("the smash product oracle is not implemented")

    def unit(self, E):
        raise NotImplementedError("the smash product oracle is not implemented")


def _require_adequate(P: ProductOracle, E: EZStructure, r: int, s: int):
    ok, need = P.adequate(E, r, s)
    if not ok:
        raise PreconditionError(f"truncation too small: the pair needs degrees up to {need}", (r, s, need))


def _generating_degree(E: EZStructure, X: SetDiagram) -> int:
    """Largest degree of a non-degenerate element (-1 for the empty presheaf)."""
    deg = degenerate_mask(E, X)
    tops = [int(E.degree[o]) for o in range(E.category.n_obj) if (~deg[o]).any()]
    return max(tops, default=-1)


# ---------------------------------------------------------------------------
# pushout-product


@dataclass
class PushoutProduct:
    map: DiagramMap                 # (A□D) ∪_{A□C} (B□C) -> B□D
    monic: bool
    verdict: object                 # NormalityVerdict

    @property
    def normal(self) -> bool:
        return self.verdict.normal


def pushout_product(P: ProductOracle, E: EZStructure, u: DiagramMap, v: DiagramMap,
                    check_inputs: bool = True) -> PushoutProduct:
    """``(A□D) ∪_{A□C} (B□C) -> B□D`` for ``u: A -> B``, ``v: C -> D``, with its normality verdict."""
    if check_inputs:
        for name, f in (("first", u), ("second", v)):
            if not is_normal_mono(E, f).normal:
                raise PreconditionError(f"the {name} map is not a normal monomorphism")
    need = _generating_degree(E, u.target) + _generating_degree(E, v.target)
    if need > int(E.degree.max()):
        raise PreconditionError(f"truncation too small: the pair needs degrees up to {need}", need)
    A, B, Cd, D = u.source, u.target, v.source, v.target
    idA, idD = DiagramMap.identity(A), DiagramMap.identity(D)
    idB, idC = DiagramMap.identity(B), DiagramMap.identity(Cd)
    AC_AD = P.tensor_map(idA, v)            # A□C -> A□D
    AC_BC = P.tensor_map(u, idC)            # A□C -> B□C
    Q, inAD, inBC = pushout(AC_AD, AC_BC)
    AD_BD = P.tensor_map(u, idD)
    BC_BD = P.tensor_map(idB, v)
    m = _map_from_pushout(Q, inAD, inBC, AD_BD, BC_BD)
    if m is None:
        raise AssertionError("pushout-product legs do not agree on A□C")
    return PushoutProduct(m, m.is_mono(), is_normal_mono(E, m))


# ---------------------------------------------------------------------------
# quasi-monoidal conditions


@dataclass
class PairVerdict:
    pair: tuple[int, int]
    pullback: bool
    maps_normal: dict[str, bool]
    comparison_normal: bool

    @property
    def ok(self) -> bool:
        return self.pullback and all(self.maps_normal.values()) and self.comparison_normal


@dataclass
class QuasiMonoidalReport:
    oracle: str
    unit_cofibrant: bool
    pairs: list[PairVerdict] = field(default_factory=list)
    colimit_preservation_sampled: bool = True
    colimit_samples: int = 0
    truncation_adequate: bool = True

    @property
    def ok(self) -> bool:
        return (self.unit_cofibrant and self.colimit_preservation_sampled and self.truncation_adequate
                and all(p.ok for p in self.pairs))

    def to_json(self):
        return {"oracle": self.oracle, "ok": self.ok, "unit_cofibrant": self.unit_cofibrant,
                "colimit_preservation": {"verdict": "sampled", "passed": self.colimit_preservation_sampled,
                                         "samples": self.colimit_samples},
                "truncation_adequate": self.truncation_adequate,
                "pairs": [{"pair": list(p.pair), "pullback": p.pullback, "maps_normal": p.maps_normal,
                           "comparison_normal": p.comparison_normal, "ok": p.ok} for p in self.pairs]}


def _same_subobject(f: DiagramMap, g: DiagramMap) -> bool:
    """Do two monos into the same presheaf have the same image?"""
    return all(np.array_equal(np.unique(a), np.unique(b)) for a, b in zip(f.components, g.components))


def _colimit_spot_checks(P: ProductOracle, E: EZStructure, objs: Sequence[int]) -> tuple[bool, int]:
    """``(X ⊔ Y)□Z ≅ X□Z ⊔ Y□Z`` and ``(B ∪_∂ B)□Z ≅ B□Z ∪_{∂□Z} B□Z`` in each variable."""
    C = E.category
    n = 0
    for r in objs:
        for s in objs:
            X, Z = representable(C, r), representable(C, s)
            _, inc = boundary(E, r)
            for left in (True, False):
                def t(a, b):
                    return P.tensor(a, b) if left else P.tensor(b, a)

                def tm(f, g):
                    return P.tensor_map(f, g) if left else P.tensor_map(g, f)
                idZ = DiagramMap.identity(Z)
                # coproducts
                S, i1, i2 = coproduct(X, X)
                lhs = t(S, Z)
                rhs, j1, j2 = coproduct(t(X, Z), t(X, Z))
                cmp_ = _map_from_pushout(rhs, j1, j2, tm(i1, idZ), tm(i2, idZ))
                n += 1
                if cmp_ is None or not cmp_.is_iso() or tuple(cmp_.target.sizes) != tuple(lhs.sizes):
                    return False, n
                # pushouts along boundary inclusions
                Q, q1, q2 = pushout(inc, inc)
                lhs = t(Q, Z)
                R, k1, k2 = pushout(tm(inc, idZ), tm(inc, idZ))
                cmp_ = _map_from_pushout(R, k1, k2, tm(q1, idZ), tm(q2, idZ))
                n += 1
                if cmp_ is None or not cmp_.is_iso() or tuple(cmp_.target.sizes) != tuple(lhs.sizes):
                    return False, n
    return True, n


def quasi_monoidal_check(E: EZStructure, P: ProductOracle, pairs: Sequence[tuple[int, int]],
                         colimit_objects: Sequence[int] | None = None) -> QuasiMonoidalReport:
    """Unit cofibrancy, the boundary pullback squares, and sampled colimit preservation."""
    E.require()
    for r, s in pairs:
        _require_adequate(P, E, r, s)
    C = E.category
    I = P.unit(E)
    rep = QuasiMonoidalReport(P.name, is_normal_mono(E, DiagramMap.from_empty(I)).normal)
    for r, s in pairs:
        R, S = representable(C, r), representable(C, s)
        bR, iR = boundary(E, r)
        bS, iS = boundary(E, s)
        idR, idS = DiagramMap.identity(R), DiagramMap.identity(S)
        idbR, idbS = DiagramMap.identity(bR), DiagramMap.identity(bS)
        top = P.tensor_map(iR, idbS)          # ∂R□∂S -> R□∂S
        left = P.tensor_map(idbR, iS)         # ∂R□∂S -> ∂R□S
        right = P.tensor_map(idR, iS)         # R□∂S -> R□S
        bottom = P.tensor_map(iR, idS)        # ∂R□S -> R□S
        # ∂R□∂S must be the pullback of R□∂S -> R□S <- ∂R□S
        Pb, p1, p2 = pullback(right, bottom)
        corner = top.then(right)
        is_pb = (corner.is_mono() and sum(Pb.sizes) == sum(top.source.sizes)
                 and _same_subobject(p1.then(right), corner))
        maps = {name: is_normal_mono(E, f).normal
                for name, f in (("top", top), ("left", left), ("right", right), ("bottom", bottom))}
        # comparison R□∂S ∪ ∂R□S -> R□S
        Q, q1, q2 = pushout(top, left)
        cmp_ = _map_from_pushout(Q, q1, q2, right, bottom)
        comp_ok = cmp_ is not None and is_normal_mono(E, cmp_).normal
        rep.pairs.append(PairVerdict((int(r), int(s)), bool(is_pb), maps, bool(comp_ok)))
    objs = colimit_objects if colimit_objects is not None else sorted({o for p in pairs for o in p})[:2]
    rep.colimit_preservation_sampled, rep.colimit_samples = _colimit_spot_checks(P, E, objs)
    return rep
