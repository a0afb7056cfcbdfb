"""Canned example categories with their generalized Reedy structures."""
from __future__ import annotations

from itertools import combinations, product as iproduct
from typing import Callable, Mapping, Sequence

import numpy as np

from .crossed import CrossedGroup, compatibility_and_induced, permutation_crossed_group
from .fincat import FinCategory, FunctorData, StructureError, grothendieck, terminal_category
from .groups import FiniteGroup, cyclic_permutation
from .reedy import GeneralizedReedyStructure

_SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")

#: upper truncation bounds used by the default corpus and enforced by the CLI
MAX_TRUNCATION = {"simplex": 4, "cyclic": 3, "symmetric": 2, "fin": 3, "gamma": 3}


def _is_injective(t):
    return len(set(t)) == len(t)


def _is_surjective(t, n):
    return len(set(t)) == n


def _monotone_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """Monotone maps ``[m] -> [n]`` in descending lexicographic order."""
    maps = [tuple(c) for c in _nondecreasing(m + 1, n)]
    return sorted(maps, reverse=True)


def _nondecreasing(length, top):
    if length == 0:
        yield ()
        return
    from itertools import combinations_with_replacement
    yield from combinations_with_replacement(range(top + 1), length)


def simplex_name(m: int, n: int, t: tuple[int, ...]) -> str:
    if m == n and t == tuple(range(n + 1)):
        return f"1_[{n}]"
    if m == n - 1 and _is_injective(t):
        i = next(k for k in range(n + 1) if k not in t)
        return f"δ{str(i).translate(_SUP)}"
    if m == n + 1 and _is_surjective(t, n + 1):
        i = next(k for k in range(m) if t[k] == t[k + 1])
        return f"σ{str(i).translate(_SUP)}"
    return f"<{','.join(map(str, t))}>[{n}]"


def _map_category(sizes: Sequence[int], maps: Callable[[int, int], list], naming, object_naming,
                  name: str) -> FinCategory:
    """Category of finite sets ``range(sizes[i])`` and the given maps, composed as functions."""
    mors = []
    for a in range(len(sizes)):
        for b in range(len(sizes)):
            mors += [((a, b, t), a, b) for t in maps(a, b)]

    def compose(kg, kf):
        return (kf[0], kg[1], tuple(kg[2][x] for x in kf[2]))

    return FinCategory.from_composition(list(range(len(sizes))), mors, compose,
                                        lambda o: (o, o, tuple(range(sizes[o]))),
                                        naming=naming, object_naming=object_naming, name=name)


def _mono_epi_structure(C: FinCategory, sizes, degree, name, dualizable=True) -> GeneralizedReedyStructure:
    plus = np.array([_is_injective(k[2]) for k in C.keys], dtype=bool)
    minus = np.array([_is_surjective(k[2], sizes[k[1]]) for k in C.keys], dtype=bool)
    return GeneralizedReedyStructure(C, degree, plus, minus, dualizable=dualizable, name=name)


def simplex_category(N: int) -> FinCategory:
    if N < 0:
        raise ValueError("truncation degree must be non-negative")
    return _map_category([n + 1 for n in range(N + 1)], _monotone_maps,
                         naming=lambda k: simplex_name(*k), object_naming=lambda o: f"[{o}]",
                         name=f"Δ≤{N}")


def simplex_trunc(N: int) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """``[0..N]`` and monotone maps; plus = injections, minus = surjections."""
    C = simplex_category(N)
    return C, _mono_epi_structure(C, [n + 1 for n in range(N + 1)], range(N + 1), C.name)


def cyclic_groups(N: int) -> list[FiniteGroup]:
    return [FiniteGroup.from_permutations([cyclic_permutation(n)], n + 1, name=f"C[{n}]") for n in range(N + 1)]


def symmetric_groups(N: int) -> list[FiniteGroup]:
    return [FiniteGroup.symmetric(n + 1) for n in range(N + 1)]


def cyclic_crossed_group(N: int) -> CrossedGroup:
    return permutation_crossed_group(simplex_category(N), cyclic_groups(N), name="C")


def symmetric_crossed_group(N: int) -> CrossedGroup:
    return permutation_crossed_group(simplex_category(N), symmetric_groups(N), name="Σ")


def _crossed_trunc(G: CrossedGroup, N: int, name: str):
    _, S = simplex_trunc(N)
    S = GeneralizedReedyStructure(G.base, S.degree, S.plus, S.minus, dualizable=True, name=S.name)
    res = compatibility_and_induced(G, S)
    T = res.total.category
    T.name = name
    res.structure.name = name
    return T, res.structure, res


def cyclic_trunc(N: int) -> tuple[FinCategory, GeneralizedReedyStructure, CrossedGroup]:
    """The truncated cyclic category as the total category of the cyclic crossed group."""
    G = cyclic_crossed_group(N)
    T, S, _ = _crossed_trunc(G, N, f"Λ≤{N}")
    return T, S, G


def sym_trunc(N: int) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """The truncated symmetric simplicial category, total category of the symmetric crossed group."""
    T, S, _ = _crossed_trunc(symmetric_crossed_group(N), N, f"ΔΣ≤{N}")
    return T, S


def _periodic_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """Values on ``0..m`` of non-decreasing ``f: Z -> Z`` with ``f(i + m + 1) = f(i) + n + 1``,
    normalized so that ``0 <= f(0) <= n``."""
    out = []
    for start in range(n + 1):
        for rest in _nondecreasing(m, n + 1):
            t = (start,) + tuple(start + v for v in rest)
            out.append(t)
    return sorted(set(out), reverse=True)


def cyclic_category_periodic(N: int) -> FinCategory:
    """The truncated cyclic category built directly from periodic monotone maps of ``Z``.

    This construction does not go through crossed groups, so it serves as an
    independent reference for the total category of the cyclic crossed group.
    """
    def compose(kg, kf):
        m, n, f = kf
        _, p, g = kg
        vals = [g[v % (n + 1)] + (v // (n + 1)) * (p + 1) for v in f]
        shift = (vals[0] // (p + 1)) * (p + 1)
        return (m, p, tuple(v - shift for v in vals))

    mors = [((a, b, t), a, b) for a in range(N + 1) for b in range(N + 1) for t in _periodic_maps(a, b)]
    return FinCategory.from_composition(list(range(N + 1)), mors, compose, lambda o: (o, o, tuple(range(o + 1))),
                                        naming=lambda k: f"<{','.join(map(str, k[2]))}>[{k[1]}]",
                                        object_naming=lambda o: f"[{o}]", name=f"Λ≤{N} (periodic)")


def fin_trunc(N: int) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """Skeleton of finite non-empty sets ``{0..n}``, ``n <= N``, all maps; degree ``n``."""
    sizes = [n + 1 for n in range(N + 1)]
    C = _map_category(sizes, lambda a, b: list(iproduct(range(sizes[b]), repeat=sizes[a])),
                      naming=lambda k: f"{''.join(map(str, k[2]))}:{k[0]}→{k[1]}",
                      object_naming=lambda o: f"<{o + 1}>", name=f"Fin≤{N}")
    return C, _mono_epi_structure(C, sizes, range(N + 1), C.name)


def gamma_trunc(N: int) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """Skeleton of pointed finite sets ``k+ = {0 (base), 1..k}``, ``k <= N``; degree ``k``."""
    sizes = [k + 1 for k in range(N + 1)]

    def pointed(a, b):
        return [(0,) + t for t in iproduct(range(b + 1), repeat=a)]

    C = _map_category(sizes, pointed, naming=lambda k: f"{''.join(map(str, k[2][1:]))}:{k[0]}+→{k[1]}+",
                      object_naming=lambda o: f"{o}+", name=f"Fin*≤{N}")
    return C, _mono_epi_structure(C, sizes, range(N + 1), C.name)


def simplicial_circle(N: int) -> tuple[FunctorData, GeneralizedReedyStructure, GeneralizedReedyStructure]:
    """The functor ``Δ≤N^op -> Fin*≤N``, ``[n] -> n+``, with both structures.

    A monotone ``θ: [m] -> [n]`` goes to the pointed map ``n+ -> m+`` sending ``j``
    to ``#{i : θ(i) < j}``, with ``0`` and ``m+1`` collapsed to the base point.
    """
    D, SD = simplex_trunc(N)
    F, SF = gamma_trunc(N)
    mor = []
    for (m, n, th) in D.keys:
        out = [0]
        for j in range(1, n + 1):
            c = sum(1 for v in th if v < j)
            out.append(0 if c in (0, m + 1) else c)
        mor.append(F.index((n, m, tuple(out))))
    return FunctorData(D.op, F, range(N + 1), mor, name="circle"), SD.opposite(), SF


# ---------------------------------------------------------------------------
# groupoids and orbit categories


def group_category(G: FiniteGroup) -> tuple[FinCategory, GeneralizedReedyStructure]:
    C = G.as_category()
    allm = np.ones(C.n_mor, dtype=bool)
    return C, GeneralizedReedyStructure(C, [0], allm, allm, dualizable=True, name=C.name)


def groupoid(G: FiniteGroup, n_objects: int = 1, degrees: Sequence[int] | None = None
             ) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """Connected groupoid on ``n_objects`` objects with vertex group ``G``; morphisms ``(i, j, g)``."""
    mors = [((i, j, g), i, j) for i in range(n_objects) for j in range(n_objects) for g in range(G.order)]
    # (j, k, h) o (i, j, g) = (i, k, h g)
    C = FinCategory.from_composition(list(range(n_objects)), mors,
                                     lambda kg, kf: (kf[0], kg[1], G.mul(kg[2], kf[2])),
                                     lambda o: (o, o, G.unit),
                                     naming=lambda k: f"{G.labels[k[2]]}:{k[0]}→{k[1]}",
                                     object_naming=lambda o: f"x{o}", name=f"groupoid({G.name},{n_objects})")
    allm = np.ones(C.n_mor, dtype=bool)
    deg = list(degrees) if degrees is not None else [0] * n_objects
    return C, GeneralizedReedyStructure(C, deg, allm, allm, dualizable=True, name=C.name)


def orbit_category(G: FiniteGroup, variant: str = "minus") -> tuple[FinCategory, GeneralizedReedyStructure]:
    """Orbits ``G/H`` for every subgroup ``H`` and the equivariant maps between them.

    A map ``G/H -> G/K`` is ``xH -> xgK`` for a coset ``gK`` with ``g^-1 H g ⊆ K``.
    ``variant="minus"`` puts everything in minus with degree ``|G/H|``;
    ``variant="plus"`` puts everything in plus with degree ``|H|``.
    """
    if variant not in ("minus", "plus"):
        raise ValueError("variant must be 'minus' or 'plus'")
    subs = G.subgroups()
    inv = G.inv
    mors = []
    for a, H in enumerate(subs):
        for b, K in enumerate(subs):
            seen = set()
            for g in range(G.order):
                coset = frozenset(G.mul(g, k) for k in K)
                if coset in seen:
                    continue
                if all(G.mul(G.mul(int(inv[g]), h), g) in K for h in H):
                    seen.add(coset)
                    mors.append(((a, b, coset), a, b))

    def compose(kg, kf):
        # kf = gK : G/H -> G/K, kg = g'L : G/K -> G/L; composite is g g' L
        g = min(kf[2])
        g2 = min(kg[2])
        L = subs[kg[1]]
        return (kf[0], kg[1], frozenset(G.mul(G.mul(g, g2), l) for l in L))

    def naming(k):
        return f"{min(k[2])}{_subgroup_name(G, subs[k[1]])}:{k[0]}→{k[1]}"

    C = FinCategory.from_composition(list(range(len(subs))), mors, compose,
                                     lambda o: (o, o, frozenset(subs[o])), naming=naming,
                                     object_naming=lambda o: f"G/{_subgroup_name(G, subs[o])}",
                                     name=f"O({G.name or G.order})")
    allm = np.ones(C.n_mor, dtype=bool)
    isos = C.isos.copy()
    if variant == "minus":
        deg = [G.order // len(H) for H in subs]
        S = GeneralizedReedyStructure(C, deg, isos, allm, dualizable=True, name=f"{C.name}-")
    else:
        deg = [len(H) for H in subs]
        S = GeneralizedReedyStructure(C, deg, allm, isos, dualizable=False, name=f"{C.name}+")
    return C, S


def _subgroup_name(G, H):
    if len(H) == 1:
        return "e"
    if len(H) == G.order:
        return "G"
    return "{" + ",".join(str(x) for x in sorted(H)) + "}"


# ---------------------------------------------------------------------------
# complexes of groups


def complex_of_groups(simplices: Sequence[Sequence], groups: Mapping, injections: Mapping | None = None,
                      twists: Mapping | None = None) -> tuple[FinCategory, GeneralizedReedyStructure]:
    """The category of a complex of groups over a simplicial complex.

    ``groups[σ]`` is a :class:`FiniteGroup`; ``injections[(σ, τ)]`` lists the image in
    ``G_σ`` of each element of ``G_τ`` for ``σ ⊊ τ`` (may be omitted when ``G_τ`` is trivial);
    ``twists[(ρ, σ, τ)]`` is an element of ``G_ρ`` (default the unit).  A morphism
    ``σ -> τ`` is an element ``y`` of ``G_σ``; the composite of ``y: σ -> τ`` and
    ``x: ρ -> σ`` is ``g⁻¹ φ(y) x`` with ``g = twists[(ρ, σ, τ)]``.
    """
    simp = sorted({frozenset(s) for s in simplices}, key=lambda s: (len(s), sorted(s)))
    if any(len(s) == 0 for s in simp):
        raise StructureError("simplices must be non-empty")
    spos = {s: i for i, s in enumerate(simp)}
    for s in simp:
        for k in range(1, len(s)):
            for f in combinations(sorted(s), k):
                if frozenset(f) not in spos:
                    raise StructureError(f"face {sorted(f)} of {sorted(s)} is missing")
    key = lambda s: frozenset(s)
    grp = {key(s): g for s, g in groups.items()}
    if set(grp) != set(simp):
        raise StructureError("need exactly one group per simplex")
    inj = {(key(a), key(b)): list(v) for (a, b), v in (injections or {}).items()}
    tw = {(key(a), key(b), key(c)): int(v) for (a, b, c), v in (twists or {}).items()}

    def phi(s, t):
        if s == t:
            return list(range(grp[s].order))
        if (s, t) in inj:
            return inj[(s, t)]
        if grp[t].order == 1:
            return [grp[s].unit]
        raise StructureError(f"missing injection for {sorted(s)} ⊆ {sorted(t)}")

    def twist(r, s, t):
        return tw.get((r, s, t), grp[r].unit)

    below = [(s, t) for s in simp for t in simp if s <= t]
    for s, t in below:
        p = phi(s, t)
        Gs, Gt = grp[s], grp[t]
        if len(p) != Gt.order or len(set(p)) != Gt.order:
            raise StructureError(f"injection {sorted(s)} ⊆ {sorted(t)} is not injective")
        for x in range(Gt.order):
            for y in range(Gt.order):
                if p[Gt.mul(x, y)] != Gs.mul(p[x], p[y]):
                    raise StructureError(f"injection {sorted(s)} ⊆ {sorted(t)} is not a homomorphism at {(x, y)}")
    chains = [(r, s, t) for r in simp for s in simp for t in simp if r <= s <= t]
    for r, s, t in chains:
        Gr, g = grp[r], twist(r, s, t)
        prt, prs, pst = phi(r, t), phi(r, s), phi(s, t)
        for x in range(grp[t].order):
            if Gr.mul(Gr.mul(g, prt[x]), Gr.inverse(g)) != prs[pst[x]]:
                raise StructureError(f"conjugation identity fails for {[sorted(r), sorted(s), sorted(t)]} at {x}")
    for p_, r, s, t in ((a, b, c, d) for a, b, c in chains for d in simp if c <= d):
        Gp = grp[p_]
        lhs = Gp.mul(phi(p_, r)[twist(r, s, t)], twist(p_, r, t))
        rhs = Gp.mul(twist(p_, r, s), twist(p_, s, t))
        if lhs != rhs:
            raise StructureError(f"coherence fails for {[sorted(p_), sorted(r), sorted(s), sorted(t)]}")

    # base poset of simplices, fibers the groups, transitions the injections
    pmors = [((a, b), spos[a], spos[b]) for a, b in below]
    base = FinCategory.from_composition(simp, pmors, lambda kg, kf: (kf[0], kg[1]), lambda o: (simp[o], simp[o]),
                                        naming=lambda k: f"{_sname(k[0])}⊆{_sname(k[1])}",
                                        object_naming=_sname, name="simplices")
    fibers = [grp[s].as_category(name=f"G{_sname(s)}") for s in simp]

    def transition(beta):
        a, b = base.keys[beta]
        return FunctorData(fibers[spos[b]], fibers[spos[a]], [0], phi(a, b))

    def twist_mor(beta1, beta2, x3):
        r, s = base.keys[beta1]
        t = base.keys[beta2][1]
        return grp[r].inverse(twist(r, s, t))

    C = grothendieck(base, fibers, transition, twist_mor)
    C.name = "Δ_X(G)"
    C.objects = tuple(_sname(s) for s in simp)
    deg = [len(s) - 1 for s in simp]
    allm = np.ones(C.n_mor, dtype=bool)
    return C, GeneralizedReedyStructure(C, deg, allm, C.isos.copy(), dualizable=False, name=C.name)


def _sname(s):
    return "{" + ",".join(str(v) for v in sorted(s)) + "}"


# ---------------------------------------------------------------------------
# products and coproducts


def combine(specs: Sequence[GeneralizedReedyStructure], mode: str = "product") -> tuple[FinCategory, GeneralizedReedyStructure]:
    """Finite products (degrees add) or coproducts of structures."""
    specs = list(specs)
    if mode == "product":
        if not specs:
            C = terminal_category()
            one = np.ones(1, dtype=bool)
            return C, GeneralizedReedyStructure(C, [0], one, one, dualizable=True, name="1")
        cats = [S.category for S in specs]
        objs = list(iproduct(*[range(C.n_obj) for C in cats]))
        opos = {o: i for i, o in enumerate(objs)}
        mors = []
        for combo in iproduct(*[range(C.n_mor) for C in cats]):
            d = tuple(int(C.dom[m]) for C, m in zip(cats, combo))
            c = tuple(int(C.cod[m]) for C, m in zip(cats, combo))
            mors.append((combo, opos[d], opos[c]))
        P = FinCategory.from_composition(
            objs, mors, lambda kg, kf: tuple(int(C.comp[g, f]) for C, g, f in zip(cats, kg, kf)),
            lambda i: tuple(int(C.ident[o]) for C, o in zip(cats, objs[i])),
            naming=lambda k: "(" + ",".join(C.names[m] for C, m in zip(cats, k)) + ")",
            object_naming=lambda o: "(" + ",".join(C.objects[x] for C, x in zip(cats, o)) + ")",
            name="×".join(C.name for C in cats))
        deg = [sum(int(S.degree[x]) for S, x in zip(specs, o)) for o in objs]
        plus = np.array([all(S.plus[m] for S, m in zip(specs, k)) for k in P.keys], dtype=bool)
        minus = np.array([all(S.minus[m] for S, m in zip(specs, k)) for k in P.keys], dtype=bool)
    elif mode == "coproduct":
        objs = [(i, o) for i, S in enumerate(specs) for o in range(S.category.n_obj)]
        opos = {o: i for i, o in enumerate(objs)}
        mors = [((i, m), opos[(i, int(S.category.dom[m]))], opos[(i, int(S.category.cod[m]))])
                for i, S in enumerate(specs) for m in range(S.category.n_mor)]
        cats = [S.category for S in specs]
        P = FinCategory.from_composition(
            objs, mors, lambda kg, kf: (kg[0], int(cats[kg[0]].comp[kg[1], kf[1]])),
            lambda i: (objs[i][0], int(cats[objs[i][0]].ident[objs[i][1]])),
            naming=lambda k: f"{cats[k[0]].names[k[1]]}@{k[0]}",
            object_naming=lambda o: f"{cats[o[0]].objects[o[1]]}@{o[0]}",
            name="+".join(C.name for C in cats))
        deg = [int(specs[i].degree[o]) for i, o in objs]
        plus = np.array([specs[i].plus[m] for i, m in P.keys], dtype=bool)
        minus = np.array([specs[i].minus[m] for i, m in P.keys], dtype=bool)
    else:
        raise ValueError("mode must be 'product' or 'coproduct'")
    dual = all(S.dualizable for S in specs)
    return P, GeneralizedReedyStructure(P, deg, plus, minus, dualizable=dual, name=P.name)


# ---------------------------------------------------------------------------
# corpus


def edge_complex() -> tuple[FinCategory, GeneralizedReedyStructure]:
    """One edge with vertex groups Z/2 and trivial edge group."""
    Z2 = FiniteGroup.cyclic(2)
    return complex_of_groups([(0,), (1,), (0, 1)], {(0,): Z2, (1,): Z2, (0, 1): FiniteGroup.trivial()})


def twisted_triangle() -> tuple[FinCategory, GeneralizedReedyStructure]:
    """A triangle with all groups Z/2, identity injections and a non-trivial twist."""
    Z2 = FiniteGroup.cyclic(2)
    simp = [s for k in (1, 2, 3) for s in combinations(range(3), k)]
    inj = {(a, b): [0, 1] for a in simp for b in simp if set(a) < set(b)}
    return complex_of_groups(simp, {s: Z2 for s in simp}, inj, {((0,), (0, 1), (0, 1, 2)): 1})


def named_group(name: str) -> FiniteGroup:
    name = name.replace(" ", "")
    if name in ("1", "e", "trivial"):
        return FiniteGroup.trivial()
    if name.startswith("Z/") or name.startswith("C"):
        return FiniteGroup.cyclic(int(name.split("/")[-1].lstrip("C")))
    if name.startswith("S"):
        return FiniteGroup.symmetric(int(name[1:]))
    raise ValueError(f"unknown group {name!r}; use Z/n, Sn or 1")


def axiom_corpus() -> dict[str, Callable[[], GeneralizedReedyStructure]]:
    """The structures whose axioms the acceptance suite validates."""
    Z2, Z3, S3 = FiniteGroup.cyclic(2), FiniteGroup.cyclic(3), FiniteGroup.symmetric(3)
    corpus = {
        "simplex3": lambda: simplex_trunc(3)[1],
        "cyclic3": lambda: cyclic_trunc(3)[1],
        "symmetric2": lambda: sym_trunc(2)[1],
        "gamma3": lambda: gamma_trunc(3)[1],
        "fin3": lambda: fin_trunc(3)[1],
        "cog_edge": lambda: edge_complex()[1],
        "cog_triangle": lambda: twisted_triangle()[1],
        "group_S3": lambda: group_category(S3)[1],
        "groupoid_Z2_3": lambda: groupoid(Z2, 3)[1],
        "product_simplex1_simplex1": lambda: combine([simplex_trunc(1)[1]] * 2, "product")[1],
        "product_simplex2_Z2": lambda: combine([simplex_trunc(2)[1], group_category(Z2)[1]], "product")[1],
        "coproduct_simplex1_Z2": lambda: combine([simplex_trunc(1)[1], group_category(Z2)[1]], "coproduct")[1],
        "product_cyclic1_orbitZ2": lambda: combine([cyclic_trunc(1)[1], orbit_category(Z2, "minus")[1]],
                                                   "product")[1],
    }
    for gname, G in (("Z2", Z2), ("Z3", Z3), ("S3", S3)):
        for v in ("minus", "plus"):
            corpus[f"orbit_{gname}_{v}"] = (lambda G=G, v=v: orbit_category(G, v)[1])
    return corpus
