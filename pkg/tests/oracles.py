"""Brute-force reference computations, written without the library's algorithms.

Each oracle works from the definitions directly (enumerating functions,
families or factorizations) and is only fit for tiny inputs.
"""
from __future__ import annotations

import itertools
from math import comb, factorial

import numpy as np

from genreedy.fincat import FinCategory


# -- counting -----------------------------------------------------------------


def monotone_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """All order-preserving maps [m] -> [n] as value tuples."""
    return [t for t in itertools.product(range(n + 1), repeat=m + 1)
            if all(a <= b for a, b in zip(t, t[1:]))]


def monotone_count(m: int, n: int) -> int:
    return comb(n + m + 1, m + 1)


def simplex_morphism_count(N: int) -> int:
    return sum(monotone_count(m, n) for m in range(N + 1) for n in range(N + 1))


def symmetric_morphism_count(N: int) -> int:
    # a map of the symmetric simplex category is a monotone map with a permutation of the source
    return sum(monotone_count(m, n) * factorial(m + 1) for m in range(N + 1) for n in range(N + 1))


def fin_morphism_count(N: int) -> int:
    return sum(b ** a for a in range(1, N + 2) for b in range(1, N + 2))


def pointed_morphism_count(N: int) -> int:
    return sum((b + 1) ** a for a in range(N + 1) for b in range(N + 1))


# -- categories built from explicit maps ------------------------------------------


def category_from_maps(objects, maps, compose) -> FinCategory:
    """A FinCategory from explicit morphism keys ``(dom, cod, data)`` and a composition rule."""
    maps = list(maps)
    index = {k: i for i, k in enumerate(maps)}
    ident = []
    for o in range(len(objects)):
        ids = [i for i, k in enumerate(maps) if k[0] == o and k[1] == o and k[3]]
        ident.append(ids[0])
    comp = []
    for i, f in enumerate(maps):
        for j, g in enumerate(maps):
            if g[0] == f[1]:
                comp.append((j, i, index[compose(g, f)]))
    return FinCategory(objects, [k[0] for k in maps], [k[1] for k in maps], ident, comp,
                       names=[str(k[2]) for k in maps])


def simplex_by_maps(N: int) -> FinCategory:
    maps = []
    for m in range(N + 1):
        for n in range(N + 1):
            for t in monotone_maps(m, n):
                maps.append((m, n, t, m == n and t == tuple(range(m + 1))))

    def compose(g, f):
        t = tuple(g[2][i] for i in f[2])
        return (f[0], g[1], t, f[0] == g[1] and t == tuple(range(f[0] + 1)))
    return category_from_maps([f"[{n}]" for n in range(N + 1)], maps, compose)


def symmetric_by_fiber_orders(N: int) -> FinCategory:
    """Finite ordinals with maps carrying a linear order on each fiber.

    Composition concatenates fibers: the fiber of ``g f`` over ``z`` lists the
    fibers of ``f`` over the points of ``g``'s fiber over ``z``, in that order.
    """
    maps = []
    for m in range(N + 1):
        for n in range(N + 1):
            for f in itertools.product(range(n + 1), repeat=m + 1):
                fibers = [[i for i in range(m + 1) if f[i] == y] for y in range(n + 1)]
                for orders in itertools.product(*[list(itertools.permutations(F)) for F in fibers]):
                    ident = m == n and f == tuple(range(m + 1))
                    maps.append((m, n, (f, orders), ident))

    def compose(g, f):
        (gf, gord), (ff, ford) = g[2], f[2]
        h = tuple(gf[ff[i]] for i in range(f[0] + 1))
        orders = tuple(tuple(x for y in gord[z] for x in ford[y]) for z in range(g[1] + 1))
        return (f[0], g[1], (h, orders), f[0] == g[1] and h == tuple(range(f[0] + 1)))
    return category_from_maps([f"[{n}]" for n in range(N + 1)], maps, compose)


def coset_maps_count(elements, mult, H, K) -> int:
    """G-maps G/H -> G/K, counted as cosets gK with H g K = g K."""
    K = frozenset(K)
    cosets = {frozenset(mult(g, k) for k in K) for g in elements}
    return sum(all(frozenset(mult(h, x) for x in c) == c for h in H) for c in cosets)


# -- classification -----------------------------------------------------------------


def classify(C: FinCategory, f: int) -> dict:
    """Mono/epi/split flags by exhaustive search over all parallel pairs and candidate sections."""
    a, b = int(C.dom[f]), int(C.cod[f])
    comp = C.compose
    mono = all(g == h or comp(f, g) != comp(f, h)
               for x in range(C.n_obj) for g in C.hom(x, a) for h in C.hom(x, a))
    epi = all(g == h or comp(g, f) != comp(h, f)
              for y in range(C.n_obj) for g in C.hom(b, y) for h in C.hom(b, y))
    split_epi = any(comp(f, s) == C.ident[b] for s in C.hom(b, a))
    split_mono = any(comp(r, f) == C.ident[a] for r in C.hom(b, a))
    iso = split_epi and split_mono
    return dict(iso=iso, mono=mono, epi=epi, split_epi=split_epi, split_mono=split_mono)


# -- (co)limits in Set ------------------------------------------------------------------


def compatible_families(X) -> int:
    """Number of elements of the limit: tuples (x_o) with X(m)(x_dom) = x_cod for all m."""
    C = X.shape
    total = 0
    for fam in itertools.product(*[range(s) for s in X.sizes]):
        if all(X.actions[m][fam[C.dom[m]]] == fam[C.cod[m]] for m in range(C.n_mor)):
            total += 1
    return total


def cocones_into(X, k: int) -> int:
    """Number of cocones from ``X`` to a constant ``k``-element set."""
    C = X.shape
    total = 0
    for legs in itertools.product(*[list(itertools.product(range(k), repeat=s)) for s in X.sizes]):
        if all(legs[C.cod[m]][X.actions[m][x]] == legs[C.dom[m]][x]
               for m in range(C.n_mor) for x in range(X.sizes[C.dom[m]])):
            total += 1
    return total


def element_components(X) -> int:
    """Connected components of the category of elements, by flood fill."""
    C = X.shape
    nodes = [(o, x) for o in range(C.n_obj) for x in range(X.sizes[o])]
    adj = {v: set() for v in nodes}
    for m in range(C.n_mor):
        for x in range(X.sizes[C.dom[m]]):
            u, v = (int(C.dom[m]), x), (int(C.cod[m]), int(X.actions[m][x]))
            adj[u].add(v)
            adj[v].add(u)
    seen, count = set(), 0
    for v in nodes:
        if v in seen:
            continue
        count += 1
        stack = [v]
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(adj[w] - seen)
    return count


# -- presheaf elements ------------------------------------------------------------------


def pulled_back_elements(X, f: int, y: int) -> int:
    """``X(f)(y)`` for a presheaf ``X`` stored on the opposite category."""
    return int(X.actions[f][y])


def degenerate_elements(E, X) -> list[set[int]]:
    """Elements of the form ``X(s)(y)`` for a non-invertible split epi ``s``, by brute force."""
    C = E.category
    cls = [classify(C, f) for f in range(C.n_mor)]
    out = [set() for _ in range(C.n_obj)]
    for s in range(C.n_mor):
        if cls[s]["split_epi"] and not cls[s]["iso"]:
            r, t = int(C.dom[s]), int(C.cod[s])
            for y in range(X.sizes[t]):
                out[r].add(int(X.actions[s][y]))
    return out


def isotropy_free(X, C, r: int, x: int) -> bool:
    """Does only the identity automorphism of ``r`` fix the element ``x`` of ``X_r``?"""
    return all(int(X.actions[a][x]) != x for a in C.automorphisms(r) if a != C.ident[r])


def as_array(xs) -> np.ndarray:
    return np.asarray(sorted(xs), dtype=np.int64)
