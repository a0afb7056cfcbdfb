"""Seeded random presheaves and monomorphisms for property checks."""
from __future__ import annotations

import numpy as np

from .diagram import DiagramMap, SetDiagram, coproduct, generated_subdiagram, quotient, representable
from .fincat import FinCategory


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_presheaf(C: FinCategory, seed, max_pieces: int = 2, max_degree_obj: int | None = None,
                    relations: int = 1, degree=None) -> SetDiagram:
    """A coproduct of random representables, quotiented by a few random relations.

    ``max_degree_obj`` caps the objects used for representables (by degree when
    ``degree`` is given, by index otherwise) so values stay small.
    """
    rng = _rng(seed)
    objs = list(range(C.n_obj))
    if max_degree_obj is not None:
        key = degree if degree is not None else np.arange(C.n_obj)
        objs = [o for o in objs if key[o] <= max_degree_obj]
    k = int(rng.integers(1, max_pieces + 1))
    X = None
    for _ in range(k):
        Y = representable(C, int(rng.choice(objs)))
        X = Y if X is None else coproduct(X, Y)[0]
    pairs = []
    for _ in range(int(rng.integers(0, relations + 1))):
        o = int(rng.choice([o for o in range(C.n_obj) if X.sizes[o] >= 2] or [0]))
        if X.sizes[o] >= 2:
            x, y = rng.choice(X.sizes[o], size=2, replace=False)
            pairs.append((o, int(x), int(y)))
    if pairs:
        X = quotient(X, pairs)[0]
    X.name = "random"
    return X


def random_subpresheaf(X: SetDiagram, seed, n_seeds: int | None = None) -> DiagramMap:
    """The subpresheaf generated by a few random elements, with its inclusion."""
    rng = _rng(seed)
    elems = [(o, x) for o in range(X.shape.n_obj) for x in range(X.sizes[o])]
    if not elems:
        return DiagramMap.identity(X)
    n = int(rng.integers(0, 3)) if n_seeds is None else n_seeds
    picks = [elems[int(i)] for i in rng.choice(len(elems), size=min(n, len(elems)), replace=False)]
    return generated_subdiagram(X, picks)[1]


def random_mono(C: FinCategory, seed, **kw) -> DiagramMap:
    """``A ⊆ B``: a random subpresheaf of a random subpresheaf of a random presheaf."""
    rng = _rng(seed)
    X = random_presheaf(C, rng, **kw)
    B = random_subpresheaf(X, rng, n_seeds=int(rng.integers(1, 4)))
    A = random_subpresheaf(B.source, rng)
    return A


def orbit_quotient(C: FinCategory, r: int, automorphism: int) -> SetDiagram:
    """``C[r]`` with the identity identified with ``automorphism`` (and everything this forces)."""
    X = representable(C, r)
    hom = [int(h) for h in C.hom(r, r)]
    Q = quotient(X, [(r, hom.index(int(C.ident[r])), hom.index(int(automorphism)))])[0]
    Q.name = f"C[{C.objects[r]}]/{C.names[automorphism]}"
    return Q


def random_orbit_presheaf(C: FinCategory, seed, max_degree_obj: int | None = None, degree=None) -> SetDiagram:
    """A representable ``C[r]`` divided by a random nontrivial automorphism of ``r``.

    Falls back to a plain random presheaf when no object in range has automorphisms.
    """
    rng = _rng(seed)
    objs = [o for o in range(C.n_obj) if len(C.automorphisms(o)) > 1]
    if max_degree_obj is not None:
        key = degree if degree is not None else np.arange(C.n_obj)
        objs = [o for o in objs if key[o] <= max_degree_obj]
    if not objs:
        return random_presheaf(C, rng, max_degree_obj=max_degree_obj, degree=degree)
    r = int(rng.choice(objs))
    autos = [int(a) for a in C.automorphisms(r) if a != C.ident[r]]
    return orbit_quotient(C, r, autos[int(rng.integers(len(autos)))])


def random_monos(C: FinCategory, seed, count: int, orbit_share: float = 0.25, **kw) -> list[DiagramMap]:
    """``count`` random monos; about ``orbit_share`` of them land in automorphism quotients."""
    rng = _rng(seed)
    out = []
    for _ in range(count):
        if rng.random() < orbit_share:
            X = random_orbit_presheaf(C, rng, kw.get("max_degree_obj"), kw.get("degree"))
            B = random_subpresheaf(X, rng, n_seeds=int(rng.integers(1, 3)))
            out.append(random_subpresheaf(B.source, rng).then(B))
        else:
            m = random_mono(C, rng, **kw)
            out.append(m)
    return out
