"""Crossed groups on a finite category and their total categories."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diagram import PreconditionError
from .fincat import FinCategory, FunctorData, StructureError, ValidationReport, subcategory
from .groups import FiniteGroup
from .reedy import GeneralizedReedyStructure, validate_reedy_functor


class CrossedGroup:
    """Per-object groups with restrictions ``alpha^*`` and hom-set actions ``g_*``.

    ``restrict[alpha][g]`` is ``alpha^*(g)`` for ``g`` in the group at ``cod(alpha)``;
    ``act[alpha][g]`` is the morphism ``g_*(alpha)``.
    """

    def __init__(self, base: FinCategory, groups: Sequence[FiniteGroup], restrict: Sequence, act: Sequence,
                 name: str = ""):
        if len(groups) != base.n_obj:
            raise StructureError("one group per object is required")
        if len(restrict) != base.n_mor or len(act) != base.n_mor:
            raise StructureError("restriction and action tables need one entry per morphism")
        self.base = base
        self.groups = tuple(groups)
        self.restrict = tuple(np.asarray(r, dtype=np.int64) for r in restrict)
        self.act = tuple(np.asarray(a, dtype=np.int64) for a in act)
        for m in range(base.n_mor):
            n = self.groups[int(base.cod[m])].order
            if self.restrict[m].shape != (n,) or self.act[m].shape != (n,):
                raise StructureError(f"tables for morphism {m} must be indexed by the group at its codomain")
        self.name = name

    @classmethod
    def trivial(cls, base: FinCategory) -> CrossedGroup:
        return cls(base, [FiniteGroup.trivial()] * base.n_obj, [[0]] * base.n_mor,
                   [[m] for m in range(base.n_mor)], name="trivial")

    @classmethod
    def constant(cls, base: FinCategory, G: FiniteGroup) -> CrossedGroup:
        """Constant presheaf ``G`` with trivial action on hom-sets."""
        ids = np.arange(G.order)
        return cls(base, [G] * base.n_obj, [ids] * base.n_mor,
                   [np.full(G.order, m) for m in range(base.n_mor)], name=f"const({G.name})")

    def is_trivial_action(self) -> bool:
        return all((a == m).all() for m, a in enumerate(self.act))

    def __repr__(self):
        return f"<CrossedGroup {self.name} on {self.base!r}>"


def validate_crossed(G: CrossedGroup) -> ValidationReport:
    """Check the eight identities exhaustively, labelled (1)..(8)."""
    rep = ValidationReport()
    C = G.base
    for grp in G.groups:
        if not grp.validate().ok:
            rep.add("group", (grp.name,), "group table invalid")
    for a in range(C.n_mor):
        acts = G.act[a]
        bad = (C.dom[acts] != C.dom[a]) | (C.cod[acts] != C.cod[a])
        for g in np.flatnonzero(bad):
            rep.add("action_hom", (int(g), a), "g_*(alpha) has the wrong domain or codomain")
    if not rep.ok:
        return rep
    # (1) g_*(alpha beta) = g_*(alpha) o alpha^*(g)_*(beta)
    for a in range(C.n_mor):
        for b in C.into(int(C.dom[a])):
            b = int(b)
            ab = int(C.comp[a, b])
            lhs = G.act[ab]
            rhs = C.comp[G.act[a], G.act[b][G.restrict[a]]]
            for g in np.flatnonzero(lhs != rhs):
                rep.add("(1)", (int(g), a, b), "g_*(ab) != g_*(a) o a^*(g)_*(b)")
    for r in range(C.n_obj):
        i = int(C.ident[r])
        grp = G.groups[r]
        # (2) g_*(1_r) = 1_r
        for g in np.flatnonzero(G.act[i] != i):
            rep.add("(2)", (int(g), r), "g_*(1) != 1")
        # (6) 1_r^*(g) = g
        for g in np.flatnonzero(G.restrict[i] != np.arange(grp.order)):
            rep.add("(6)", (int(g), r), "1^*(g) != g")
    for a in range(C.n_mor):
        r, s = int(C.cod[a]), int(C.dom[a])
        Gr, Gs = G.groups[r], G.groups[s]
        R = G.restrict[a]
        # (3) a^*(gh) = h_*(a)^*(g) . a^*(h), over all pairs (g, h)
        lhs = R[Gr.mult]                                          # [g, h]
        ha = G.act[a]                                             # h -> h_*(a)
        restr_ha = np.stack([G.restrict[int(m)] for m in ha], axis=1)   # [g, h] = h_*(a)^*(g)
        rhs = Gs.mult[restr_ha, R[None, :]]
        for g, h in np.argwhere(lhs != rhs):
            rep.add("(3)", (int(g), int(h), a), "a^*(gh) != h_*(a)^*(g) a^*(h)")
        # (4) a^*(e) = e
        if R[Gr.unit] != Gs.unit:
            rep.add("(4)", (a,), "a^*(e) != e")
        # (7) (gh)_*(a) = g_*(h_*(a))
        lhs = G.act[a][Gr.mult]
        rhs = np.stack([G.act[int(m)] for m in ha], axis=1)
        for g, h in np.argwhere(lhs != rhs):
            rep.add("(7)", (int(g), int(h), a), "(gh)_*(a) != g_*h_*(a)")
        # (8) e_*(a) = a
        if G.act[a][Gr.unit] != a:
            rep.add("(8)", (a,), "e_*(a) != a")
        # (5) (a b)^*(g) = b^*(a^*(g))
        for b in C.into(s):
            b = int(b)
            ab = int(C.comp[a, b])
            bad = np.flatnonzero(G.restrict[ab] != G.restrict[b][R])
            for g in bad:
                rep.add("(5)", (int(g), a, b), "(ab)^*(g) != b^*a^*(g)")
    return rep


@dataclass
class TotalCategory:
    category: FinCategory
    embedding: FunctorData              # base -> total, alpha -> (alpha, e)
    special: dict[int, list[int]]       # r -> morphism ids (1_r, g), indexed by g
    crossed: CrossedGroup

    def pair(self, m: int) -> tuple[int, int]:
        return self.category.keys[m]

    def index(self, alpha: int, g: int) -> int:
        return self.category.index((alpha, g))


def total_category(G: CrossedGroup, check: bool = True) -> TotalCategory:
    """Pairs ``(alpha, g)`` with ``g`` in the group at ``dom(alpha)``, composed by
    ``(a, g)(b, h) = (a g_*(b), b^*(g) h)``."""
    if check:
        rep = validate_crossed(G)
        if not rep.ok:
            raise PreconditionError("crossed group fails its identities", rep.violations[0])
    C = G.base
    mors = []
    for a in range(C.n_mor):
        for g in range(G.groups[int(C.dom[a])].order):
            mors.append(((a, g), int(C.dom[a]), int(C.cod[a])))

    def compose(k2, k1):
        a, g = k2
        b, h = k1
        r = int(C.dom[b])
        return (int(C.comp[a, G.act[b][g]]), G.groups[r].mul(int(G.restrict[b][g]), h))

    def identity(o):
        return (int(C.ident[o]), G.groups[o].unit)

    def naming(k):
        a, g = k
        grp = G.groups[int(C.dom[a])]
        return C.names[a] if g == grp.unit else f"({C.names[a]},{_glabel(grp, g)})"

    T = FinCategory.from_composition(list(C.object_keys or range(C.n_obj)), mors, compose, identity,
                                     naming=naming, object_naming=lambda o: C.objects[_opos(C, o)],
                                     name=f"{C.name}{G.name}")
    emb = FunctorData(C, T, range(C.n_obj), [T.index((a, G.groups[int(C.dom[a])].unit)) for a in range(C.n_mor)],
                      name="embedding")
    special = {r: [T.index((int(C.ident[r]), g)) for g in range(G.groups[r].order)] for r in range(C.n_obj)}
    return TotalCategory(T, emb, special, G)


def _opos(C, key):
    if C.object_keys is None:
        return key
    return C.object_index(key)


def _glabel(grp, g):
    lab = grp.labels[g]
    if isinstance(lab, tuple):
        return "".join(map(str, lab))
    return str(lab)


# ---------------------------------------------------------------------------
# the permutation crossed groups on the simplex category


def cyclic_action(alpha: Sequence[int], g: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(alpha^*(g), g_*(alpha))`` for a monotone ``alpha: [m] -> [n]`` and a permutation ``g`` of ``[n]``.

    Sorting the positions of ``[m]`` by ``(g(alpha(i)), i)`` gives the unique
    permutation that is order-preserving on fibers and makes ``g alpha pi^-1`` monotone.
    """
    vals = [g[a] for a in alpha]
    order = sorted(range(len(alpha)), key=lambda i: (vals[i], i))
    pi = [0] * len(alpha)
    for k, i in enumerate(order):
        pi[i] = k
    moved = tuple(vals[i] for i in order)
    return tuple(pi), moved


def fiber_order_permutations(alpha: Sequence[int], g: Sequence[int]) -> list[tuple[int, ...]]:
    """Every permutation ``pi`` order-preserving on the fibers of ``alpha`` with ``g alpha pi^-1`` monotone."""
    from itertools import permutations
    m = len(alpha)
    out = []
    for pi in permutations(range(m)):
        inv = [0] * m
        for i, v in enumerate(pi):
            inv[v] = i
        h = [g[alpha[inv[k]]] for k in range(m)]
        if any(h[k] > h[k + 1] for k in range(m - 1)):
            continue
        if any(alpha[i] == alpha[j] and i < j and pi[i] > pi[j] for i in range(m) for j in range(m)):
            continue
        out.append(pi)
    return out


def permutation_crossed_group(base: FinCategory, groups: Sequence[FiniteGroup], name: str) -> CrossedGroup:
    """Crossed group on a truncated simplex category whose groups are permutation groups of ``[n]``.

    ``base`` must carry keys ``(m, n, tuple)``; group labels are permutation tuples.
    """
    restrict, act = [], []
    for a in range(base.n_mor):
        m, n, alpha = base.keys[a]
        Gn, Gm = groups[n], groups[m]
        r_row, a_row = [], []
        for g in Gn.labels:
            pi, moved = cyclic_action(alpha, g)
            try:
                r_row.append(Gm.index(pi))
            except KeyError:
                raise StructureError(f"restriction of {g} along {alpha} leaves the subgroup at [{m}]") from None
            a_row.append(base.index((m, n, moved)))
        restrict.append(r_row)
        act.append(a_row)
    return CrossedGroup(base, groups, restrict, act, name=name)


# ---------------------------------------------------------------------------
# recovering a crossed group from a unique factorization


@dataclass
class RecoveredCrossedGroup:
    crossed: CrossedGroup
    base_inclusion: FunctorData          # base (the wide subcategory) -> S
    special: dict[int, list[int]]        # group element index -> automorphism of S
    comparison: FunctorData              # total category of the result -> S


def crossed_from_wide(S: FinCategory, members, special: dict[int, Sequence[int]]) -> RecoveredCrossedGroup:
    """Crossed group on the wide subcategory ``members`` defined by factoring ``g alpha = g_*(alpha) alpha^*(g)``."""
    mask = np.zeros(S.n_mor, dtype=bool)
    mask[list(members)] = True
    groups, spec = [], {}
    for r in range(S.n_obj):
        els = [int(x) for x in special[r]]
        if int(S.ident[r]) not in els:
            raise PreconditionError("special automorphisms must contain the identity", r)
        els = [int(S.ident[r])] + [x for x in els if x != int(S.ident[r])]
        pos = {x: i for i, x in enumerate(els)}
        try:
            mult = [[pos[int(S.comp[a, b])] for b in els] for a in els]
        except KeyError:
            raise PreconditionError("special automorphisms are not closed under composition", r) from None
        groups.append(FiniteGroup(mult, 0, labels=[S.names[x] for x in els], name=f"G{r}"))
        spec[r] = els
    # unique factorization: m = phi o gamma, gamma special at dom(m), phi in members
    fact = {}
    for m in range(S.n_mor):
        r = int(S.dom[m])
        hits = []
        for gi, gam in enumerate(spec[r]):
            phis = S.hom(r, int(S.cod[m]))
            phis = phis[mask[phis] & (S.comp[phis, gam] == m)]
            hits += [(int(p), gi) for p in phis]
        if len(hits) != 1:
            raise PreconditionError("morphism does not factor uniquely as special automorphism then member",
                                    (m, hits))
        fact[m] = hits[0]
    base, inc = subcategory(S, range(S.n_obj), np.flatnonzero(mask), name=S.name + "_base")
    back = np.full(S.n_mor, -1, dtype=np.int64)
    back[inc.mor_map] = np.arange(base.n_mor)
    restrict, act = [], []
    for a in range(base.n_mor):
        alpha = int(inc.mor_map[a])
        s = int(S.cod[alpha])
        r_row, a_row = [], []
        for g in spec[s]:
            phi, gam = fact[int(S.comp[g, alpha])]
            r_row.append(gam)
            a_row.append(int(back[phi]))
        restrict.append(r_row)
        act.append(a_row)
    G = CrossedGroup(base, groups, restrict, act, name="recovered")
    T = total_category(G)
    comp_mor = [int(S.comp[inc.mor_map[a], spec[int(base.dom[a])][g]]) for (a, g) in T.category.keys]
    comparison = FunctorData(T.category, S, range(S.n_obj), comp_mor, name="comparison")
    return RecoveredCrossedGroup(G, inc, spec, comparison)


def crossed_isomorphic(G: CrossedGroup, H: CrossedGroup, base_map: FunctorData,
                       group_maps: Sequence[Sequence[int]]) -> bool:
    """Do the given base isomorphism and group bijections intertwine all structure?"""
    if not base_map.is_isomorphism():
        return False
    for r in range(G.base.n_obj):
        gm = np.asarray(group_maps[r])
        Gr, Hr = G.groups[r], H.groups[int(base_map.obj_map[r])]
        if len(np.unique(gm)) != Gr.order or Hr.order != Gr.order:
            return False
        if not np.array_equal(gm[Gr.mult], Hr.mult[gm[:, None], gm[None, :]]):
            return False
    for a in range(G.base.n_mor):
        b = int(base_map.mor_map[a])
        r, s = int(G.base.cod[a]), int(G.base.dom[a])
        gr, gs = np.asarray(group_maps[r]), np.asarray(group_maps[s])
        if not np.array_equal(gs[G.restrict[a]], H.restrict[b][gr]):
            return False
        if not np.array_equal(base_map.mor_map[G.act[a]], H.act[b][gr]):
            return False
    return True


# ---------------------------------------------------------------------------
# compatibility with a Reedy structure


@dataclass
class CompatibilityResult:
    structure: GeneralizedReedyStructure
    total: TotalCategory


def check_compatibility(G: CrossedGroup, S: GeneralizedReedyStructure) -> ValidationReport:
    rep = ValidationReport()
    C = G.base
    for a in range(C.n_mor):
        for cls, mask in (("plus", S.plus), ("minus", S.minus)):
            if mask[a]:
                for g in np.flatnonzero(~mask[G.act[a]]):
                    rep.add("(i)", (a, int(g), cls), f"g_*(alpha) leaves {cls}")
        if S.minus[a]:
            grp_r = G.groups[int(C.dom[a])]
            grp_s = G.groups[int(C.cod[a])]
            fixed = (G.restrict[a] == grp_r.unit) & (G.act[a] == a)
            fixed[grp_s.unit] = False
            for g in np.flatnonzero(fixed):
                rep.add("(ii)", (a, int(g)), "non-trivial g fixes alpha with trivial restriction")
    return rep


def compatibility_and_induced(G: CrossedGroup, S: GeneralizedReedyStructure,
                              total: TotalCategory | None = None) -> CompatibilityResult:
    """The structure on the total category with ``(alpha, g)`` in plus/minus iff ``alpha`` is."""
    if S.category != G.base:
        raise ValueError("structure and crossed group live on different categories")
    if not G.base.is_strict():
        raise PreconditionError("the base must be strict (every isomorphism an identity)",
                                [int(m) for m in np.flatnonzero(G.base.isos & ~G.base.is_identity)][:1])
    rep = check_compatibility(G, S)
    if not rep.ok:
        raise PreconditionError("crossed group is not compatible with the structure", rep.violations[0])
    T = total or total_category(G)
    alphas = np.array([k[0] for k in T.category.keys], dtype=np.int64)
    R = GeneralizedReedyStructure(T.category, S.degree, S.plus[alphas], S.minus[alphas], dualizable=True,
                                  name=T.category.name)
    frep = validate_reedy_functor(T.embedding, S, R)
    if not frep.ok:
        raise AssertionError(f"embedding is not a morphism of structures: {frep.violations[0]}")
    return CompatibilityResult(R, T)
