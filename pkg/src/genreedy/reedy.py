"""Generalized Reedy structures on finite categories.

A structure is a degree per object plus two wide subcategories: ``plus``
(non-invertible members raise degree) and ``minus`` (non-invertible members
lower it).  Presheaves are handled by passing ``S.opposite()`` and diagrams on
``C.op``; every construction here is covariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .diagram import (DiagramMap, ElementGraph, KanExtension, PreconditionError,
                      SetDiagram, _row_lookup, is_cofibered, is_fibered, is_pullback_square, lan,
                      lan_counit, lan_fiber, lan_map, ran, ran_fiber, ran_map, ran_unit,
                      projection_formula_check)
from .equivariant import EquivariantMap, EquivariantSet
from .fincat import (FinCategory, FunctorData, StructureError, ValidationReport, WideSubcategory,
                     full_subcategory, subcategory)


def _mask(n, members):
    m = np.zeros(n, dtype=bool)
    m[list(members)] = True
    m.setflags(write=False)
    return m


class GeneralizedReedyStructure:
    def __init__(self, category: FinCategory, degree: Sequence[int], plus, minus,
                 dualizable: bool = False, name: str = ""):
        self.category = category
        degree = list(degree)
        if len(degree) != category.n_obj:
            raise StructureError(f"degree is defined on {len(degree)} objects, the category has {category.n_obj}")
        if any(d is None for d in degree):
            raise StructureError("degree missing for some object")
        self.degree = np.array(degree, dtype=np.int64)
        self.degree.setflags(write=False)
        self.plus = plus if isinstance(plus, np.ndarray) and plus.dtype == bool else _mask(category.n_mor, plus)
        self.minus = minus if isinstance(minus, np.ndarray) and minus.dtype == bool else _mask(category.n_mor, minus)
        self.dualizable = dualizable
        self.name = name or category.name

    def opposite(self) -> GeneralizedReedyStructure:
        """The structure used for presheaves: same degree, roles of plus and minus swapped."""
        op = GeneralizedReedyStructure(self.category.op, self.degree, self.minus, self.plus,
                                       dualizable=self.dualizable, name=f"{self.name}^op")
        return op

    @property
    def plus_sub(self) -> WideSubcategory:
        return WideSubcategory(self.category, frozenset(np.flatnonzero(self.plus).tolist()))

    @property
    def minus_sub(self) -> WideSubcategory:
        return WideSubcategory(self.category, frozenset(np.flatnonzero(self.minus).tolist()))

    @property
    def max_degree(self) -> int:
        return int(self.degree.max()) if len(self.degree) else -1

    def degrees(self) -> list[int]:
        return sorted(set(self.degree.tolist()))

    def objects_of_degree(self, n: int) -> list[int]:
        return [int(o) for o in np.flatnonzero(self.degree == n)]

    @cached_property
    def nonidentity_plus(self) -> np.ndarray:
        return self.plus & ~self.category.isos

    @cached_property
    def nonidentity_minus(self) -> np.ndarray:
        return self.minus & ~self.category.isos

    @cached_property
    def plus_generators(self) -> list[int]:
        sub, inc = subcategory(self.category, range(self.category.n_obj), np.flatnonzero(self.plus))
        return [int(inc.mor_map[g]) for g in sub.generators]

    @cached_property
    def minus_generators(self) -> list[int]:
        sub, inc = subcategory(self.category, range(self.category.n_obj), np.flatnonzero(self.minus))
        return [int(inc.mor_map[g]) for g in sub.generators]

    def automorphisms(self, r: int) -> list[int]:
        return [int(g) for g in self.category.automorphisms(r)]

    def to_json(self):
        C = self.category
        return {"degree": {C.objects[o]: int(d) for o, d in enumerate(self.degree)},
                "plus": [int(m) for m in np.flatnonzero(self.plus)],
                "minus": [int(m) for m in np.flatnonzero(self.minus)],
                "dualizable": bool(self.dualizable)}

    def __repr__(self):
        return f"<GeneralizedReedyStructure {self.name} on {self.category!r}>"


# ---------------------------------------------------------------------------
# validation


@dataclass
class AxiomResult:
    passed: bool
    counterexamples: list = field(default_factory=list)
    count: int = 0

    def fail(self, witness, limit=10):
        self.passed = False
        self.count += 1
        if len(self.counterexamples) < limit:
            self.counterexamples.append(witness)


@dataclass
class ReedyReport:
    axioms: dict[str, AxiomResult]
    strict: bool
    nontrivial_automorphisms: dict[int, int]
    wide: dict[str, ValidationReport]
    check_dual: bool

    @property
    def ok(self) -> bool:
        keys = ["i", "ii", "iii", "iv"] + (["iv'"] if self.check_dual else [])
        return all(w.ok for w in self.wide.values()) and all(self.axioms[k].passed for k in keys)

    def failures(self) -> dict[str, list]:
        return {k: a.counterexamples for k, a in self.axioms.items() if not a.passed}

    def to_json(self, category: FinCategory | None = None):
        def name(w):
            if category is None:
                return w
            return [category.names[m] if isinstance(m, (int, np.integer)) else m for m in w]
        return {
            "ok": self.ok,
            "strict": self.strict,
            "check_dual": self.check_dual,
            "nontrivial_automorphisms": {str(k): v for k, v in self.nontrivial_automorphisms.items()},
            "wide": {k: v.to_json() for k, v in self.wide.items()},
            "axioms": {k: {"passed": a.passed, "count": a.count,
                           "counterexamples": [name(w) for w in a.counterexamples]}
                       for k, a in self.axioms.items()},
        }


def _factorizations(S: GeneralizedReedyStructure, a: int, b: int):
    """All (g, h, s) with h: a -> s in minus, g: s -> b in plus; grouped by the composite."""
    C = S.category
    out: dict[int, list] = {}
    for s in range(C.n_obj):
        H = C.hom(a, s)
        H = H[S.minus[H]]
        G = C.hom(s, b)
        G = G[S.plus[G]]
        if not len(H) or not len(G):
            continue
        F = C.comp[np.ix_(G, H)]
        for i, j in np.ndindex(F.shape):
            out.setdefault(int(F[i, j]), []).append((int(G[i]), int(H[j])))
    return out


def _connecting_iso(C: FinCategory, gh1, gh2) -> list[int]:
    """Isos theta with theta h1 = h2 and g2 theta = g1."""
    g1, h1 = gh1
    g2, h2 = gh2
    s1, s2 = int(C.cod[h1]), int(C.cod[h2])
    th = C.hom(s1, s2)
    th = th[C.isos[th]]
    ok = (C.comp[th, h1] == h2) & (C.comp[g2, th] == g1)
    return [int(t) for t in th[ok]]


def validate_reedy(S: GeneralizedReedyStructure, check_dual: bool | None = None) -> ReedyReport:
    C = S.category
    if check_dual is None:
        check_dual = S.dualizable
    deg = S.degree
    iso = C.isos
    ax = {k: AxiomResult(True) for k in ("i", "ii", "iii", "iv", "iv'")}
    wide = {"plus": S.plus_sub.validate(), "minus": S.minus_sub.validate()}
    dd, dc = deg[C.dom], deg[C.cod]
    for m in range(C.n_mor):
        if iso[m]:
            if dd[m] != dc[m]:
                ax["i"].fail((m, "isomorphism changes degree"))
            continue
        if S.plus[m] and not dc[m] > dd[m]:
            ax["i"].fail((m, "non-invertible plus morphism does not raise degree"))
        if S.minus[m] and not dc[m] < dd[m]:
            ax["i"].fail((m, "non-invertible minus morphism does not lower degree"))
    both = S.plus & S.minus
    for m in np.flatnonzero(both != iso):
        what = "isomorphism outside plus/minus" if iso[m] else "non-invertible morphism in plus and minus"
        ax["ii"].fail((int(m), what))
    for a in range(C.n_obj):
        for b in range(C.n_obj):
            hom = C.hom(a, b)
            if not len(hom):
                continue
            facts = _factorizations(S, a, b)
            for f in hom:
                f = int(f)
                fs = facts.get(f)
                if not fs:
                    ax["iii"].fail((f, "no factorization"))
                    continue
                for other in fs[1:]:
                    if not _connecting_iso(C, fs[0], other):
                        ax["iii"].fail((f, "factorizations not related by an isomorphism", fs[0], other))
                        break
    for f in np.flatnonzero(S.minus):
        f = int(f)
        auts = C.automorphisms(int(C.cod[f]))
        bad = auts[(C.comp[auts, f] == f) & ~C.is_identity[auts]]
        if len(bad):
            ax["iv"].fail((f, int(bad[0])))
    for f in np.flatnonzero(S.plus):
        f = int(f)
        auts = C.automorphisms(int(C.dom[f]))
        bad = auts[(C.comp[f, auts] == f) & ~C.is_identity[auts]]
        if len(bad):
            ax["iv'"].fail((f, int(bad[0])))
    nontrivial = {o: len(C.automorphisms(o)) for o in range(C.n_obj) if len(C.automorphisms(o)) > 1}
    return ReedyReport(ax, C.is_strict(), nontrivial, wide, bool(check_dual))


def validate_reedy_functor(phi: FunctorData, S: GeneralizedReedyStructure, R: GeneralizedReedyStructure) -> ValidationReport:
    """A morphism of structures preserves degree, plus and minus."""
    rep = phi.validate()
    for o in range(S.category.n_obj):
        if S.degree[o] != R.degree[phi.obj_map[o]]:
            rep.add("degree", (o,), "degree not preserved")
    for m in np.flatnonzero(S.plus & ~R.plus[phi.mor_map]):
        rep.add("plus", (int(m),), "plus morphism not sent to plus")
    for m in np.flatnonzero(S.minus & ~R.minus[phi.mor_map]):
        rep.add("minus", (int(m),), "minus morphism not sent to minus")
    return rep


# ---------------------------------------------------------------------------
# factorization


@dataclass
class FactorizationWitness:
    morphism: int
    factorizations: list[tuple[int, int]]      # (g in plus, h in minus), f = g o h
    chosen: tuple[int, int]
    connecting: list[int]                      # the iso relating ``chosen`` to each factorization
    unique_connecting: bool


def factorize(S: GeneralizedReedyStructure, f: int) -> FactorizationWitness:
    C = S.category
    fs = _factorizations(S, int(C.dom[f]), int(C.cod[f])).get(int(f), [])
    if not fs:
        raise PreconditionError("morphism has no plus/minus factorization (axiom iii)", f)
    chosen = fs[0]
    conn, unique = [], True
    for other in fs:
        th = _connecting_iso(C, chosen, other)
        if not th:
            raise PreconditionError("factorizations not related by an isomorphism (axiom iii)", (f, chosen, other))
        unique &= len(th) == 1
        conn.append(th[0])
    return FactorizationWitness(int(f), fs, chosen, conn, unique)


# ---------------------------------------------------------------------------
# degree slices


@dataclass
class DegreeSlice:
    n: int
    groupoid: FinCategory              # G_n
    discrete: FinCategory              # R_n
    truncation: FinCategory            # R<=n
    plus_wide: FinCategory             # R+((n))
    plus_fixed: FinCategory            # R+(n)
    minus_wide: FinCategory            # R-((n))
    minus_fixed: FinCategory           # R-(n)
    d: FunctorData                     # R+((n)) -> R, domain
    c: FunctorData                     # R+((n)) -> G_n, codomain
    b: FunctorData                     # R+(n) -> R_n
    k: FunctorData                     # R+(n) -> R+((n))
    i: FunctorData                     # R_n -> G_n
    j: FunctorData                     # G_n -> R
    t: FunctorData                     # R<=n -> R
    gamma: FunctorData                 # R-((n)) -> R, codomain
    delta: FunctorData                 # R-((n)) -> G_n, domain
    beta: FunctorData                  # R-(n) -> R_n
    kappa: FunctorData                 # R-(n) -> R-((n))
    objects: list[int]                 # objects of R of degree n, in G_n order

    def local(self, r: int) -> int:
        """Index of the object ``r`` of R inside G_n."""
        return self.objects.index(r)

    def functors(self) -> dict[str, FunctorData]:
        return {k: getattr(self, k) for k in ("d", "c", "b", "k", "i", "j", "t", "gamma", "delta", "beta", "kappa")}


def _slice_category(S, n, side):
    """R+((n)) (side 'plus') or R-((n)) (side 'minus') with the groupoid coordinate."""
    C = S.category
    objs_n = S.objects_of_degree(n)
    Gn, j = subcategory(C, objs_n, [m for m in range(C.n_mor) if C.isos[m]
                                     and S.degree[C.dom[m]] == n and S.degree[C.cod[m]] == n],
                        name=f"G{n}")
    gpos = {int(m): i for i, m in enumerate(j.mor_map)}
    if side == "plus":
        us = [int(u) for u in np.flatnonzero(S.nonidentity_plus) if S.degree[C.cod[u]] == n]
        cls_mask = S.plus
    else:
        us = [int(u) for u in np.flatnonzero(S.nonidentity_minus) if S.degree[C.dom[u]] == n]
        cls_mask = S.minus
    upos = {u: i for i, u in enumerate(us)}
    mors = []
    for u in us:
        for u2 in us:
            if side == "plus":
                # (f, g): u -> u2 with u2 f = g u, f in plus, g in G_n
                fs = C.hom(int(C.dom[u]), int(C.dom[u2]))
                fs = fs[cls_mask[fs]]
                gs = C.hom(int(C.cod[u]), int(C.cod[u2]))
                gs = gs[C.isos[gs]]
                if not len(fs) or not len(gs):
                    continue
                lhs = C.comp[u2, fs]
                rhs = C.comp[gs, u]
                for a, f in enumerate(fs):
                    for g in gs[rhs == lhs[a]]:
                        mors.append(((u, u2, int(f), int(g)), upos[u], upos[u2]))
            else:
                # (g, f): u -> u2 with u2 g = f u, g in G_n, f in minus
                gs = C.hom(int(C.dom[u]), int(C.dom[u2]))
                gs = gs[C.isos[gs]]
                fs = C.hom(int(C.cod[u]), int(C.cod[u2]))
                fs = fs[cls_mask[fs]]
                if not len(fs) or not len(gs):
                    continue
                lhs = C.comp[u2, gs]
                rhs = C.comp[fs, u]
                for a, g in enumerate(gs):
                    for f in fs[rhs == lhs[a]]:
                        mors.append(((u, u2, int(f), int(g)), upos[u], upos[u2]))

    def compose(k2, k1):
        return (k1[0], k2[1], int(C.comp[k2[2], k1[2]]), int(C.comp[k2[3], k1[3]]))

    def identity(i):
        u = us[i]
        if side == "plus":
            return (u, u, int(C.ident[C.dom[u]]), int(C.ident[C.cod[u]]))
        return (u, u, int(C.ident[C.cod[u]]), int(C.ident[C.dom[u]]))

    W = FinCategory.from_composition(us, mors, compose, identity,
                                     naming=lambda k: f"({C.names[k[2]]},{C.names[k[3]]})",
                                     object_naming=lambda u: C.names[u],
                                     name=f"R{'+' if side == 'plus' else '-'}(({n}))")
    return W, us, Gn, j, gpos


def degree_slice(S: GeneralizedReedyStructure, n: int) -> DegreeSlice:
    C = S.category
    objs_n = S.objects_of_degree(n)
    Wp, usp, Gn, j, gpos = _slice_category(S, n, "plus")
    Wm, usm, _, _, _ = _slice_category(S, n, "minus")
    opos = {r: i for i, r in enumerate(objs_n)}
    Rn, Rn_inc = subcategory(C, objs_n, [], name=f"R{n}")
    i_n = FunctorData(Rn, Gn, range(len(objs_n)), [gpos[int(m)] for m in Rn_inc.mor_map], name="i")
    low = [o for o in range(C.n_obj) if S.degree[o] <= n]
    T, t = full_subcategory(C, low, name=f"R<={n}")

    d = FunctorData(Wp, C, [int(C.dom[u]) for u in usp], [k[2] for k in Wp.keys], name="d")
    c = FunctorData(Wp, Gn, [opos[int(C.cod[u])] for u in usp], [gpos[k[3]] for k in Wp.keys], name="c")
    fixed_p = [m for m, k in enumerate(Wp.keys) if C.is_identity[k[3]]]
    Pp, k_n = subcategory(Wp, range(Wp.n_obj), fixed_p, name=f"R+({n})")
    b = FunctorData(Pp, Rn, [opos[int(C.cod[u])] for u in usp],
                    [opos[int(C.cod[Wp.keys[m][0]])] for m in k_n.mor_map], name="b")

    gamma = FunctorData(Wm, C, [int(C.cod[u]) for u in usm], [k[2] for k in Wm.keys], name="gamma")
    delta = FunctorData(Wm, Gn, [opos[int(C.dom[u])] for u in usm], [gpos[k[3]] for k in Wm.keys], name="delta")
    fixed_m = [m for m, k in enumerate(Wm.keys) if C.is_identity[k[3]]]
    Pm, kappa = subcategory(Wm, range(Wm.n_obj), fixed_m, name=f"R-({n})")
    beta = FunctorData(Pm, Rn, [opos[int(C.dom[u])] for u in usm],
                       [opos[int(C.dom[Wm.keys[m][0]])] for m in kappa.mor_map], name="beta")
    return DegreeSlice(n, Gn, Rn, T, Wp, Pp, Wm, Pm, d, c, b, k_n, i_n, j, t, gamma, delta, beta, kappa,
                       objs_n)


@dataclass
class SliceChecks:
    functors_valid: dict[str, bool]
    plus_pullback: bool
    minus_pullback: bool
    c_cofibered: bool
    delta_fibered: bool
    plus_fixed_is_disjoint_union: bool

    @property
    def ok(self):
        return (all(self.functors_valid.values()) and self.plus_pullback and self.minus_pullback
                and self.c_cofibered and self.delta_fibered and self.plus_fixed_is_disjoint_union)


def check_degree_slice(S: GeneralizedReedyStructure, D: DegreeSlice) -> SliceChecks:
    valid = {k: F.validate().ok for k, F in D.functors().items()}
    pp, _ = is_pullback_square(D.k, D.b, D.c, D.i)
    mp, _ = is_pullback_square(D.kappa, D.beta, D.delta, D.i)
    cof, _ = is_cofibered(D.c)
    fib, _ = is_fibered(D.delta)
    # R+(n) splits by codomain: no morphism joins objects with different codomains
    C = S.category
    P = D.plus_fixed
    cods = [int(C.cod[u]) for u in D.plus_wide.object_keys]
    disjoint = all(cods[int(D.k.obj_map[P.dom[m]])] == cods[int(D.k.obj_map[P.cod[m]])] for m in range(P.n_mor))
    return SliceChecks(valid, pp, mp, cof, fib, disjoint)


# ---------------------------------------------------------------------------
# latching and matching objects


def value_set(S: GeneralizedReedyStructure, X: SetDiagram, r: int) -> EquivariantSet:
    """``X_r`` with its ``Aut(r)``-action."""
    act = {g: X.actions[g] for g in S.automorphisms(r)}
    return EquivariantSet(S.category, r, X.sizes[r], act)


@dataclass
class LatchingObject:
    obj: int
    equivariant: EquivariantSet
    to_value: np.ndarray                  # latching map L_r -> X_r
    reps: list[tuple[int, int]]           # (u, x) representing each element
    _block: dict
    _offsets: list
    _classes: np.ndarray

    def element(self, u: int, x: int) -> int:
        return int(self._classes[self._offsets[self._block[u]] + x])

    @property
    def size(self):
        return self.equivariant.size


@dataclass
class MatchingObject:
    obj: int
    equivariant: EquivariantSet
    from_value: np.ndarray                # matching map X_r -> M_r
    blocks: list[int]                     # the morphisms u: r -> s indexing columns
    families: np.ndarray

    @property
    def size(self):
        return self.equivariant.size


def latching(S: GeneralizedReedyStructure, X: SetDiagram, r: int) -> LatchingObject:
    """Colimit of ``X o dom`` over the non-invertible plus morphisms into ``r``."""
    C = S.category
    us = [int(u) for u in C.into(r) if S.nonidentity_plus[u]]
    G = ElementGraph()
    block = {}
    for u in us:
        block[u] = G.add_block(u, X.sizes[int(C.dom[u])])
    for w in S.plus_generators:
        for u2 in us:
            if C.dom[u2] != C.cod[w]:
                continue
            u = int(C.comp[u2, w])
            G.add_edge(block[u], block[u2], X.actions[w])
    k, lab = G.colimit()
    reps = [None] * k
    for u in us:
        off = G.offsets[block[u]]
        for x in range(G.sizes[block[u]]):
            if reps[lab[off + x]] is None:
                reps[lab[off + x]] = (u, x)
    to_value = np.array([X.actions[u][x] for (u, x) in reps], dtype=np.int64)
    act = {}
    for g in S.automorphisms(r):
        act[g] = np.array([lab[G.offsets[block[int(C.comp[g, u])]] + x] for (u, x) in reps], dtype=np.int64)
    eq = EquivariantSet(C, r, k, act)
    return LatchingObject(r, eq, to_value, reps, block, G.offsets, lab)


def matching(S: GeneralizedReedyStructure, X: SetDiagram, r: int) -> MatchingObject:
    """Limit of ``X o cod`` over the non-invertible minus morphisms out of ``r``."""
    C = S.category
    us = [int(u) for u in C.out_of(r) if S.nonidentity_minus[u]]
    G = ElementGraph()
    block = {}
    for u in us:
        block[u] = G.add_block(u, X.sizes[int(C.cod[u])])
    for w in S.minus_generators:
        for u in us:
            if C.cod[u] != C.dom[w]:
                continue
            G.add_edge(block[u], block[int(C.comp[w, u])], X.actions[w])
    fam = G.limit()
    act = {}
    for g in S.automorphisms(r):
        cols = [block[int(C.comp[u, g])] for u in us]
        act[g] = _row_lookup(fam, fam[:, cols]) if us else np.zeros(len(fam), dtype=np.int64)
    if us:
        rows = np.stack([X.actions[u] for u in us], axis=1) if X.sizes[r] else np.zeros((0, len(us)), dtype=np.int64)
        from_value = _row_lookup(fam, rows)
    else:
        from_value = np.zeros(X.sizes[r], dtype=np.int64)
    eq = EquivariantSet(C, r, len(fam), act)
    return MatchingObject(r, eq, from_value, us, fam)


def latching_map(S, X, r) -> EquivariantMap:
    L = latching(S, X, r)
    return EquivariantMap(L.equivariant, value_set(S, X, r), L.to_value)


def matching_map(S, X, r) -> EquivariantMap:
    M = matching(S, X, r)
    return EquivariantMap(value_set(S, X, r), M.equivariant, M.from_value)


@dataclass
class GlobalComparison:
    """Agreement of the three routes to L_n (or M_n) at one object."""
    obj: int
    pointwise_vs_comma: bool
    comma_vs_fiber: bool
    projection_formula: bool
    equivariant: bool

    @property
    def ok(self):
        return self.pointwise_vs_comma and self.comma_vs_fiber and self.projection_formula and self.equivariant


def _is_bijection(mapping, n) -> bool:
    mapping = np.asarray(mapping)
    return len(mapping) == n and (len(mapping) == 0 or (mapping.min() >= 0 and len(np.unique(mapping)) == n))


def global_latching(S: GeneralizedReedyStructure, X: SetDiagram, n: int,
                    D: DegreeSlice | None = None) -> list[GlobalComparison]:
    """Compare the global form ``(c_n)_! d_n^* X`` with the pointwise latching objects."""
    D = D or degree_slice(S, n)
    Y = X.restrict(D.d)
    comma = lan(D.c, Y)
    fib = lan_fiber(D.c, Y)
    proj = projection_formula_check(D.k, D.b, D.c, D.i, Y, "cofibered")
    out = []
    for r in D.objects:
        lr = D.local(r)
        L = latching(S, X, r)
        # pointwise element [(u, x)] -> comma node (u, id_r, x)
        pw = np.array([comma.node(lr, _obj_index(D.plus_wide, u), int(D.groupoid.ident[lr]), x)
                       for (u, x) in L.reps], dtype=np.int64)
        ok1 = _is_bijection(pw, comma.diagram.sizes[lr])
        # fiber element (object of R+((n)), x) -> comma node (object, id, x)
        fb = np.array([comma.node(lr, d, int(D.groupoid.ident[lr]), x) for (d, x) in fib.reps[lr]], dtype=np.int64)
        ok2 = _is_bijection(fb, comma.diagram.sizes[lr]) and fib.diagram.sizes[lr] == comma.diagram.sizes[lr]
        eq = True
        for g in S.automorphisms(r):
            gl = _groupoid_index(D, g)
            if not np.array_equal(pw[L.equivariant.action[g]], comma.diagram.actions[gl][pw]):
                eq = False
            if not np.array_equal(fb[fib.diagram.actions[gl]], comma.diagram.actions[gl][fb]):
                eq = False
        out.append(GlobalComparison(r, ok1, ok2, bool(proj.is_iso), eq))
    return out


def global_matching(S: GeneralizedReedyStructure, X: SetDiagram, n: int,
                    D: DegreeSlice | None = None) -> list[GlobalComparison]:
    """Compare ``(delta_n)_* gamma_n^* X`` with the pointwise matching objects."""
    D = D or degree_slice(S, n)
    Y = X.restrict(D.gamma)
    comma = ran(D.delta, Y)
    fib = ran_fiber(D.delta, Y)
    proj = projection_formula_check(D.kappa, D.beta, D.delta, D.i, Y, "fibered")
    out = []
    for r in D.objects:
        lr = D.local(r)
        M = matching(S, X, r)
        idr = int(D.groupoid.ident[lr])
        fam = comma.families[lr]
        # comma family -> pointwise family: restrict to the blocks (u, id_r)
        cols = [comma.block(lr, _obj_index(D.minus_wide, u), idr) for u in M.blocks]
        moved = fam[:, cols] if cols else np.zeros((len(fam), 0), dtype=np.int64)
        pw = _row_lookup(M.families, moved)
        ok1 = _is_bijection(pw, M.size) and len(fam) == M.size
        fcols = [comma.block(lr, d, idr) for d in fib.objects[lr]]
        fmoved = fam[:, fcols] if fcols else np.zeros((len(fam), 0), dtype=np.int64)
        fb = _row_lookup(fib.families[lr], fmoved)
        ok2 = _is_bijection(fb, fib.diagram.sizes[lr]) and len(fam) == fib.diagram.sizes[lr]
        eq = True
        for g in S.automorphisms(r):
            gl = _groupoid_index(D, g)
            if not np.array_equal(pw[comma.diagram.actions[gl]], M.equivariant.action[g][pw]):
                eq = False
            if not np.array_equal(fb[comma.diagram.actions[gl]], fib.diagram.actions[gl][fb]):
                eq = False
        out.append(GlobalComparison(r, ok1, ok2, bool(proj.is_iso), eq))
    return out


def _obj_index(W: FinCategory, u: int) -> int:
    return W.object_index(u)


def _groupoid_index(D: DegreeSlice, g: int) -> int:
    return int(np.flatnonzero(D.j.mor_map == g)[0])


# ---------------------------------------------------------------------------
# relative latching / matching


def _pushout_sets(a_to_b, a_to_c, nb, nc):
    G = ElementGraph()
    G.add_block("A", len(a_to_b))
    G.add_block("B", nb)
    G.add_block("C", nc)
    G.add_edge(0, 1, a_to_b)
    G.add_edge(0, 2, a_to_c)
    k, lab = G.colimit()
    return k, lab[G.offsets[1]:G.offsets[1] + nb], lab[G.offsets[2]:G.offsets[2] + nc]


def relative_latching(S: GeneralizedReedyStructure, f: DiagramMap, r: int) -> EquivariantMap:
    """``X_r u_{L_r X} L_r Y -> Y_r`` with its ``Aut(r)``-action."""
    X, Y = f.source, f.target
    LX, LY = latching(S, X, r), latching(S, Y, r)
    Lf = np.array([LY.element(u, int(f.components[S.category.dom[u]][x])) for (u, x) in LX.reps], dtype=np.int64)
    k, inX, inL = _pushout_sets(LX.to_value, Lf, X.sizes[r], LY.size)
    # each pushout element comes from X_r or from L_r Y
    src = [None] * k
    for x, cl in enumerate(inX):
        if src[cl] is None:
            src[cl] = ("X", x)
    for y, cl in enumerate(inL):
        if src[cl] is None:
            src[cl] = ("L", y)
    mapping = np.array([f.components[r][x] if s == "X" else LY.to_value[x] for (s, x) in src], dtype=np.int64)
    act = {}
    for g in S.automorphisms(r):
        act[g] = np.array([inX[X.actions[g][x]] if s == "X" else inL[LY.equivariant.action[g][x]]
                           for (s, x) in src], dtype=np.int64)
    P = EquivariantSet(S.category, r, k, act)
    return EquivariantMap(P, value_set(S, Y, r), mapping)


def relative_matching(S: GeneralizedReedyStructure, f: DiagramMap, r: int) -> EquivariantMap:
    """``X_r -> Y_r x_{M_r Y} M_r X`` with its ``Aut(r)``-action."""
    X, Y = f.source, f.target
    MX, MY = matching(S, X, r), matching(S, Y, r)
    C = S.category
    # M_r(f): M_r X -> M_r Y on families
    if MX.blocks:
        moved = np.stack([f.components[int(C.cod[u])][MX.families[:, j]] for j, u in enumerate(MX.blocks)], axis=1) \
            if len(MX.families) else np.zeros((0, len(MX.blocks)), dtype=np.int64)
        Mf = _row_lookup(MY.families, moved)
    else:
        Mf = np.zeros(MX.size, dtype=np.int64)
    pairs = [(int(y), int(m)) for y in range(Y.sizes[r]) for m in range(MX.size) if MY.from_value[y] == Mf[m]]
    index = {p: i for i, p in enumerate(pairs)}
    mapping = np.array([index[(int(f.components[r][x]), int(MX.from_value[x]))] for x in range(X.sizes[r])],
                       dtype=np.int64)
    act = {}
    for g in S.automorphisms(r):
        act[g] = np.array([index[(int(Y.actions[g][y]), int(MX.equivariant.action[g][m]))] for (y, m) in pairs],
                          dtype=np.int64)
    P = EquivariantSet(C, r, len(pairs), act)
    return EquivariantMap(value_set(S, X, r), P, mapping)


# ---------------------------------------------------------------------------
# skeleta and coskeleta


@dataclass
class Skeleton:
    n: int
    diagram: SetDiagram
    counit: DiagramMap              # sk_n X -> X  (or the unit X -> cosk_n X)
    kan: KanExtension | None
    truncation: FunctorData | None


def truncation(S: GeneralizedReedyStructure, n: int) -> tuple[FinCategory, FunctorData]:
    C = S.category
    return full_subcategory(C, [o for o in range(C.n_obj) if S.degree[o] <= n], name=f"<={n}")


def skeleton(S: GeneralizedReedyStructure, X: SetDiagram, n: int) -> Skeleton:
    if n < 0:
        E = SetDiagram.empty(S.category)
        return Skeleton(n, E, DiagramMap(E, X, [[] for _ in X.sizes]), None, None)
    _, t = truncation(S, n)
    K = lan(t, X.restrict(t))
    return Skeleton(n, K.diagram, lan_counit(K, X), K, t)


def coskeleton(S: GeneralizedReedyStructure, X: SetDiagram, n: int) -> Skeleton:
    if n < 0:
        T = SetDiagram.terminal(S.category)
        return Skeleton(n, T, DiagramMap.to_terminal(X), None, None)
    _, t = truncation(S, n)
    K = ran(t, X.restrict(t))
    return Skeleton(n, K.diagram, ran_unit(K, X), K, t)


def skeleton_map(S: GeneralizedReedyStructure, f: DiagramMap, n: int,
                 src: Skeleton | None = None, tgt: Skeleton | None = None) -> DiagramMap:
    src = src or skeleton(S, f.source, n)
    tgt = tgt or skeleton(S, f.target, n)
    if n < 0:
        return DiagramMap(src.diagram, tgt.diagram, [[] for _ in src.diagram.sizes])
    restricted = DiagramMap(f.source.restrict(src.truncation), f.target.restrict(src.truncation),
                            [f.components[int(o)] for o in src.truncation.obj_map])
    return lan_map(src.truncation, restricted, src.kan, tgt.kan)


def coskeleton_map(S: GeneralizedReedyStructure, f: DiagramMap, n: int,
                   src: Skeleton | None = None, tgt: Skeleton | None = None) -> DiagramMap:
    src = src or coskeleton(S, f.source, n)
    tgt = tgt or coskeleton(S, f.target, n)
    if n < 0:
        return DiagramMap(src.diagram, tgt.diagram, [np.zeros(s, dtype=np.int64) for s in src.diagram.sizes])
    restricted = DiagramMap(f.source.restrict(src.truncation), f.target.restrict(src.truncation),
                            [f.components[int(o)] for o in src.truncation.obj_map])
    return ran_map(src.truncation, restricted, src.kan, tgt.kan)


@dataclass
class SkeletonLemmaReport:
    latching: dict[int, bool] = field(default_factory=dict)
    matching: dict[int, bool] = field(default_factory=dict)
    idempotent_sk: dict[tuple[int, int], bool] = field(default_factory=dict)
    idempotent_cosk: dict[tuple[int, int], bool] = field(default_factory=dict)
    extreme: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self):
        return all(all(d.values()) for d in (self.latching, self.matching, self.idempotent_sk,
                                              self.idempotent_cosk, self.extreme))

    def failures(self):
        out = []
        for name in ("latching", "matching", "idempotent_sk", "idempotent_cosk", "extreme"):
            out += [(name, k) for k, v in getattr(self, name).items() if not v]
        return out


def _equivariant_bijection(mapping, size, act_src, act_tgt) -> bool:
    if not _is_bijection(mapping, size):
        return False
    return all(np.array_equal(mapping[act_src[g]], act_tgt[g][mapping]) for g in act_src)


def skeleton_lemma_checks(S: GeneralizedReedyStructure, X: SetDiagram, idempotence: bool = True) -> SkeletonLemmaReport:
    rep = SkeletonLemmaReport()
    C = S.category
    degs = S.degrees()
    sks = {m: skeleton(S, X, m) for m in [-1] + degs}
    csks = {m: coskeleton(S, X, m) for m in [-1] + degs}
    for r in range(C.n_obj):
        n = int(S.degree[r])
        below = max([m for m in sks if m < n], default=-1)
        sk, csk = sks[below], csks[below]
        L = latching(S, X, r)
        if sk.kan is None:
            mapping = np.zeros(0, dtype=np.int64)
            ok = L.size == 0 and sk.diagram.sizes[r] == 0
        else:
            mapping = np.array([sk.kan.node(r, _pos(sk.truncation, int(C.dom[u])), u, x) for (u, x) in L.reps],
                               dtype=np.int64)
            acts = {g: sk.diagram.actions[g] for g in L.equivariant.action}
            ok = _equivariant_bijection(mapping, sk.diagram.sizes[r], L.equivariant.action, acts)
            ok &= np.array_equal(sk.counit.components[r][mapping], L.to_value)
        rep.latching[r] = bool(ok)
        M = matching(S, X, r)
        if csk.kan is None:
            ok = M.size == 1 and csk.diagram.sizes[r] == 1
        else:
            fam = csk.kan.families[r]
            cols = [csk.kan.block(r, _pos(csk.truncation, int(C.cod[u])), u) for u in M.blocks]
            moved = fam[:, cols] if cols else np.zeros((len(fam), 0), dtype=np.int64)
            mapping = _row_lookup(M.families, moved)
            acts = {g: csk.diagram.actions[g] for g in M.equivariant.action}
            ok = _equivariant_bijection(mapping, M.size, acts, M.equivariant.action) and len(fam) == M.size
            ok &= np.array_equal(mapping[csk.counit.components[r]], M.from_value)
        rep.matching[r] = bool(ok)
    rep.extreme["sk_-1_initial"] = sum(sks[-1].diagram.sizes) == 0
    rep.extreme["cosk_-1_terminal"] = all(s == 1 for s in csks[-1].diagram.sizes)
    top = degs[-1] if degs else -1
    rep.extreme["sk_top_iso"] = sks[top].counit.is_iso()
    rep.extreme["cosk_top_iso"] = csks[top].counit.is_iso()
    if idempotence:
        for m in degs:
            for n in degs:
                inner = sks[m]
                outer = skeleton(S, inner.diagram, n)
                if n >= m:
                    rep.idempotent_sk[(n, m)] = outer.counit.is_iso()
                else:
                    f = skeleton_map(S, inner.counit, n, outer, sks[n])
                    rep.idempotent_sk[(n, m)] = f.is_iso() and f.validate().ok
                inner_c = csks[m]
                outer_c = coskeleton(S, inner_c.diagram, n)
                if n >= m:
                    rep.idempotent_cosk[(n, m)] = outer_c.counit.is_iso()
                else:
                    f = coskeleton_map(S, inner_c.counit, n, csks[n], outer_c)
                    rep.idempotent_cosk[(n, m)] = f.is_iso() and f.validate().ok
    return rep


def _pos(t: FunctorData, o: int) -> int:
    return int(np.flatnonzero(t.obj_map == o)[0])


# ---------------------------------------------------------------------------
# restriction comparisons


@dataclass
class RestrictionComparison:
    side: str
    k: int
    hypothesis: bool
    witness: object
    per_object: dict[int, bool]

    @property
    def ok(self) -> bool:
        return self.hypothesis and all(self.per_object.values())


def induced_slice_functor(phi: FunctorData, S: GeneralizedReedyStructure, R: GeneralizedReedyStructure,
                          DS: DegreeSlice, DR: DegreeSlice, side: str):
    """Functors ``S^{+-}((k)) -> R^{+-}((k))`` and ``G_k(S) -> G_k(R)`` induced by ``phi``."""
    WS = DS.plus_wide if side == "latching" else DS.minus_wide
    WR = DR.plus_wide if side == "latching" else DR.minus_wide
    obj = [WR.object_index(int(phi.mor_map[u])) for u in WS.object_keys]
    mor = []
    for key in WS.keys:
        u, u2, f, g = key
        mor.append(WR.index((int(phi.mor_map[u]), int(phi.mor_map[u2]), int(phi.mor_map[f]), int(phi.mor_map[g]))))
    W = FunctorData(WS, WR, obj, mor)
    gobj = [DR.local(int(phi.obj_map[r])) for r in DS.objects]
    gmor = [_groupoid_index(DR, int(phi.mor_map[DS.j.mor_map[m]])) for m in range(DS.groupoid.n_mor)]
    Gf = FunctorData(DS.groupoid, DR.groupoid, gobj, gmor)
    return W, Gf


def restriction_comparison(phi: FunctorData, S: GeneralizedReedyStructure, R: GeneralizedReedyStructure,
                           X: SetDiagram, k: int, side: str = "latching") -> RestrictionComparison:
    """Compare ``L_k(phi^* X)`` with ``phi_k^* L_k(X)`` (or the matching version) objectwise."""
    rep = validate_reedy_functor(phi, S, R)
    if not rep.ok:
        raise PreconditionError("functor is not a morphism of generalized Reedy structures", rep.violations[0])
    DS, DR = degree_slice(S, k), degree_slice(R, k)
    W, Gf = induced_slice_functor(phi, S, R, DS, DR, side)
    if side == "latching":
        ok, wit = is_pullback_square(W, DS.c, DR.c, Gf)
    elif side == "matching":
        ok, wit = is_pullback_square(W, DS.delta, DR.delta, Gf)
    else:
        raise ValueError("side must be 'latching' or 'matching'")
    if not ok:
        return RestrictionComparison(side, k, False, wit, {})
    Y = X.restrict(phi)
    per = {}
    for s in DS.objects:
        r = int(phi.obj_map[s])
        auts = S.automorphisms(s)
        if side == "latching":
            LS, LR = latching(S, Y, s), latching(R, X, r)
            mapping = np.array([LR.element(int(phi.mor_map[v]), x) for (v, x) in LS.reps], dtype=np.int64)
            acts = {g: LR.equivariant.action[int(phi.mor_map[g])] for g in auts}
            per[s] = _equivariant_bijection(mapping, LR.size, LS.equivariant.action, acts)
        else:
            MS, MR = matching(S, Y, s), matching(R, X, r)
            colpos = {u: j for j, u in enumerate(MR.blocks)}
            cols = [colpos[int(phi.mor_map[v])] for v in MS.blocks]
            moved = MR.families[:, cols] if cols else np.zeros((MR.size, 0), dtype=np.int64)
            mapping = _row_lookup(MS.families, moved)
            acts = {g: MR.equivariant.action[int(phi.mor_map[g])] for g in auts}
            per[s] = _equivariant_bijection(mapping, MS.size, acts, MS.equivariant.action)
    return RestrictionComparison(side, k, True, None, per)


def plus_fixed_structure(S: GeneralizedReedyStructure, n: int) -> tuple[GeneralizedReedyStructure, FunctorData]:
    """``R+(n)`` with everything in plus, isos in minus, degree of the domain; and its domain functor."""
    D = degree_slice(S, n)
    P = D.plus_fixed
    obj = [int(D.d.obj_map[D.k.obj_map[o]]) for o in range(P.n_obj)]
    mor = [int(D.d.mor_map[D.k.mor_map[m]]) for m in range(P.n_mor)]
    F = FunctorData(P, S.category, obj, mor, name="domain")
    deg = [int(S.degree[o]) for o in obj]
    T = GeneralizedReedyStructure(P, deg, np.ones(P.n_mor, dtype=bool), P.isos.copy(), name=P.name)
    return T, F


def minus_fixed_structure(S: GeneralizedReedyStructure, n: int) -> tuple[GeneralizedReedyStructure, FunctorData]:
    """``R-(n)`` with everything in minus, isos in plus, degree of the codomain; and its codomain functor."""
    D = degree_slice(S, n)
    P = D.minus_fixed
    obj = [int(D.gamma.obj_map[D.kappa.obj_map[o]]) for o in range(P.n_obj)]
    mor = [int(D.gamma.mor_map[D.kappa.mor_map[m]]) for m in range(P.n_mor)]
    F = FunctorData(P, S.category, obj, mor, name="codomain")
    deg = [int(S.degree[o]) for o in obj]
    T = GeneralizedReedyStructure(P, deg, P.isos.copy(), np.ones(P.n_mor, dtype=bool), name=P.name)
    return T, F


def truncated_structure(S: GeneralizedReedyStructure, n: int) -> tuple[GeneralizedReedyStructure, FunctorData]:
    """``R<=n`` with the restricted structure, and its embedding."""
    T, t = truncation(S, n)
    return (GeneralizedReedyStructure(T, S.degree[t.obj_map], S.plus[t.mor_map], S.minus[t.mor_map],
                                      dualizable=S.dualizable, name=f"{S.name}<={n}"), t)
