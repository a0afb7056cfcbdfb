"""Finite categories stored as dense composition tables.

Objects and morphisms are integer indices.  ``comp[g, f]`` holds the index of
``g o f`` (or -1 where the pair is not composable).  Everything else in the
package (diagrams, Reedy structures, crossed groups) lives on top of
:class:`FinCategory`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np


class StructureError(ValueError):
    """A table refers to an index that does not exist, or is otherwise malformed."""


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple
    message: str = ""

    def __str__(self):
        return f"{self.kind}{self.witness}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind, witness, message="", limit=25):
        self.counts[kind] = self.counts.get(kind, 0) + 1
        if self.counts[kind] <= limit:
            self.violations.append(Violation(kind, tuple(witness), message))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def to_json(self):
        return {
            "ok": self.ok,
            "counts": dict(self.counts),
            "violations": [
                {"kind": v.kind, "witness": [_jsonable(w) for w in v.witness], "message": v.message}
                for v in self.violations
            ],
        }


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MorphismClass:
    iso: bool
    mono: bool
    epi: bool
    split_epi: bool
    split_mono: bool


class FinCategory:
    """A finite category given by explicit tables.

    ``keys`` optionally records the concrete datum each morphism was built
    from (a monotone map, a pair ``(alpha, g)``, ...); it lets callers look
    morphisms up with :meth:`index`.  Names are decorative only.
    """

    def __init__(self, objects: Sequence[str], dom, cod, identities, comp,
                 names: Sequence[str] | None = None, keys: Sequence[Hashable] | None = None,
                 object_keys: Sequence[Hashable] | None = None, name: str = ""):
        self.objects = tuple(str(o) for o in objects)
        n_obj = len(self.objects)
        dom = list(dom)
        cod = list(cod)
        if len(dom) != len(cod):
            raise StructureError("dom and cod tables have different lengths")
        n_mor = len(dom)
        for m, (a, b) in enumerate(zip(dom, cod)):
            if not (0 <= a < n_obj and 0 <= b < n_obj):
                raise StructureError(f"morphism {m} has dom/cod ({a}, {b}) outside 0..{n_obj - 1}")
        identities = list(identities)
        if len(identities) != n_obj:
            raise StructureError(f"expected {n_obj} identities, got {len(identities)}")
        for o, i in enumerate(identities):
            if not 0 <= i < n_mor:
                raise StructureError(f"identity of object {o} is morphism {i}, which does not exist")
        self.dom = _frozen(dom)
        self.cod = _frozen(cod)
        self.ident = _frozen(identities)
        if isinstance(comp, np.ndarray):
            if comp.shape != (n_mor, n_mor):
                raise StructureError(f"composition table has shape {comp.shape}, expected {(n_mor, n_mor)}")
            table = np.array(comp, dtype=np.int64)
            bad = (table < -1) | (table >= n_mor)
            if bad.any():
                g, f = map(int, np.argwhere(bad)[0])
                raise StructureError(f"comp[{g}, {f}] = {table[g, f]} is not a morphism index")
        else:
            table = np.full((n_mor, n_mor), -1, dtype=np.int64)
            for entry in comp:
                if len(entry) != 3:
                    raise StructureError(f"composition entry {entry!r} is not a triple [g, f, gf]")
                g, f, gf = entry
                for v in (g, f, gf):
                    if not 0 <= v < n_mor:
                        raise StructureError(f"composition entry {list(entry)} refers to missing morphism {v}")
                table[g, f] = gf
        table.setflags(write=False)
        self.comp = table
        self.names = tuple(names) if names is not None else tuple(f"m{i}" for i in range(n_mor))
        self.keys = tuple(keys) if keys is not None else None
        self.object_keys = tuple(object_keys) if object_keys is not None else None
        self.name = name

    # -- construction -------------------------------------------------------

    @classmethod
    def from_composition(cls, objects: Sequence[Hashable], morphisms: Iterable[tuple[Hashable, int, int]],
                         compose: Callable, identity: Callable, naming: Callable | None = None,
                         object_naming: Callable | None = None, name: str = "") -> FinCategory:
        """Build a category from concrete data.

        ``morphisms`` lists ``(key, dom, cod)``; ``compose(kg, kf)`` returns the
        key of ``g o f`` and ``identity(i)`` the key of the identity on object ``i``.
        """
        objects = list(objects)
        morphisms = list(morphisms)
        index = {}
        for i, (k, _, _) in enumerate(morphisms):
            if k in index:
                raise StructureError(f"duplicate morphism key {k!r}")
            index[k] = i
        dom = [a for _, a, _ in morphisms]
        cod = [b for _, _, b in morphisms]
        ids = []
        for o in range(len(objects)):
            k = identity(o)
            if k not in index:
                raise StructureError(f"identity {k!r} of object {o} is not among the morphisms")
            ids.append(index[k])
        n = len(morphisms)
        into = [[] for _ in objects]
        outof = [[] for _ in objects]
        for i, (_, a, b) in enumerate(morphisms):
            into[b].append(i)
            outof[a].append(i)
        table = np.full((n, n), -1, dtype=np.int64)
        keys = [k for k, _, _ in morphisms]
        for b in range(len(objects)):
            for f in into[b]:
                kf = keys[f]
                for g in outof[b]:
                    kgf = compose(keys[g], kf)
                    try:
                        table[g, f] = index[kgf]
                    except KeyError:
                        raise StructureError(
                            f"composite of {keys[g]!r} and {kf!r} is {kgf!r}, not a listed morphism") from None
        naming = naming or str
        object_naming = object_naming or str
        return cls([object_naming(o) for o in objects], dom, cod, ids, table,
                   names=[naming(k) for k in keys], keys=keys, object_keys=objects, name=name)

    # -- basic queries ------------------------------------------------------

    @property
    def n_obj(self) -> int:
        return len(self.objects)

    @property
    def n_mor(self) -> int:
        return len(self.dom)

    def compose(self, g: int, f: int) -> int:
        h = int(self.comp[g, f])
        if h < 0:
            raise ValueError(f"{self.names[g]} o {self.names[f]} is not defined")
        return h

    def index(self, key) -> int:
        return self._key_index[key]

    def object_index(self, key) -> int:
        if self.object_keys is not None and key in self._object_key_index:
            return self._object_key_index[key]
        return self.objects.index(str(key))

    @cached_property
    def _key_index(self):
        if self.keys is None:
            raise KeyError("category has no morphism keys")
        return {k: i for i, k in enumerate(self.keys)}

    @cached_property
    def _object_key_index(self):
        return {k: i for i, k in enumerate(self.object_keys)}

    @cached_property
    def _homs(self):
        order = np.lexsort((np.arange(self.n_mor), self.cod, self.dom))
        homs = {}
        pos = np.empty(self.n_mor, dtype=np.int64)
        for m in order:
            lst = homs.setdefault((int(self.dom[m]), int(self.cod[m])), [])
            pos[m] = len(lst)
            lst.append(int(m))
        out = {k: _frozen(v) for k, v in homs.items()}
        pos.setflags(write=False)
        return out, pos

    _EMPTY = _frozen([])

    def hom(self, a: int, b: int) -> np.ndarray:
        """Morphism ids a -> b in increasing order."""
        return self._homs[0].get((a, b), self._EMPTY)

    @property
    def hom_index(self) -> np.ndarray:
        """Position of each morphism inside its hom-set."""
        return self._homs[1]

    @cached_property
    def _into(self):
        return [_frozen(np.flatnonzero(self.cod == b)) for b in range(self.n_obj)]

    @cached_property
    def _outof(self):
        return [_frozen(np.flatnonzero(self.dom == a)) for a in range(self.n_obj)]

    def into(self, b: int) -> np.ndarray:
        return self._into[b]

    def out_of(self, a: int) -> np.ndarray:
        return self._outof[a]

    @cached_property
    def is_identity(self) -> np.ndarray:
        mask = np.zeros(self.n_mor, dtype=bool)
        mask[self.ident] = True
        mask.setflags(write=False)
        return mask

    # -- morphism classification --------------------------------------------

    @cached_property
    def flags(self) -> dict[str, np.ndarray]:
        """Boolean arrays ``iso, mono, epi, split_epi, split_mono`` over all morphisms."""
        n = self.n_mor
        out = {k: np.zeros(n, dtype=bool) for k in ("iso", "mono", "epi", "split_epi", "split_mono")}
        inverse = np.full(n, -1, dtype=np.int64)
        comp = self.comp
        for f in range(n):
            a, b = int(self.dom[f]), int(self.cod[f])
            back = self.hom(b, a)
            if len(back):
                sec = comp[f, back] == self.ident[b]      # f o s = 1_b
                ret = comp[back, f] == self.ident[a]      # r o f = 1_a
                out["split_epi"][f] = sec.any()
                out["split_mono"][f] = ret.any()
                both = sec & ret
                if both.any():
                    out["iso"][f] = True
                    inverse[f] = back[np.argmax(both)]
            mono = True
            for x in range(self.n_obj):
                h = self.hom(x, a)
                if len(h) > 1 and len(np.unique(comp[f, h])) < len(h):
                    mono = False
                    break
            out["mono"][f] = mono
            epi = True
            for y in range(self.n_obj):
                h = self.hom(b, y)
                if len(h) > 1 and len(np.unique(comp[h, f])) < len(h):
                    epi = False
                    break
            out["epi"][f] = epi
        for v in out.values():
            v.setflags(write=False)
        inverse.setflags(write=False)
        self.__dict__["inverse_table"] = inverse
        return out

    @property
    def inverse(self) -> np.ndarray:
        self.flags
        return self.__dict__["inverse_table"]

    @property
    def isos(self) -> np.ndarray:
        return self.flags["iso"]

    def automorphisms(self, r: int) -> np.ndarray:
        h = self.hom(r, r)
        return h[self.isos[h]]

    def is_strict(self) -> bool:
        """True when every isomorphism is an identity."""
        return bool(np.array_equal(self.isos, self.is_identity))

    # -- generators -----------------------------------------------------------

    @cached_property
    def _generation(self):
        n = self.n_mor
        known = np.zeros(n, dtype=bool)
        known[self.ident] = True
        parent = {}
        order = [int(i) for i in self.ident]
        gens: list[int] = []
        by_dom: dict[int, list[int]] = {}
        comp = self.comp
        for cand in range(n):
            if known[cand]:
                continue
            g = cand
            gens.append(g)
            by_dom.setdefault(int(self.dom[g]), []).append(g)
            queue = deque()
            for e in list(order):
                if self.cod[e] == self.dom[g]:
                    m = int(comp[g, e])
                    if m >= 0 and not known[m]:
                        known[m] = True
                        parent[m] = (g, e)
                        order.append(m)
                        queue.append(m)
            while queue:
                e = queue.popleft()
                for h in by_dom.get(int(self.cod[e]), ()):
                    m = int(comp[h, e])
                    if m >= 0 and not known[m]:
                        known[m] = True
                        parent[m] = (h, e)
                        order.append(m)
                        queue.append(m)
        return tuple(gens), parent, tuple(order)

    @property
    def generators(self) -> tuple[int, ...]:
        """A set of morphisms whose composites give every morphism."""
        return self._generation[0]

    @property
    def derivation(self) -> tuple[dict, tuple[int, ...]]:
        """``(parent, order)``: each non-identity ``m`` equals ``g o e`` with ``parent[m] == (g, e)``."""
        return self._generation[1], self._generation[2]

    @cached_property
    def composable_pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g, f = np.nonzero(self.comp >= 0)
        return g, f, self.comp[g, f]

    # -- duality ---------------------------------------------------------------

    @cached_property
    def op(self) -> FinCategory:
        o = FinCategory(self.objects, self.cod, self.dom, self.ident, self.comp.T.copy(),
                        names=self.names, keys=self.keys, object_keys=self.object_keys,
                        name=f"{self.name}^op" if self.name else "")
        o.__dict__["op"] = self
        return o

    # -- equality ----------------------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FinCategory):
            return NotImplemented
        return (self.n_obj == other.n_obj and np.array_equal(self.dom, other.dom)
                and np.array_equal(self.cod, other.cod) and np.array_equal(self.ident, other.ident)
                and np.array_equal(self.comp, other.comp))

    def __hash__(self):
        return hash((self.n_obj, self.n_mor, self.comp.tobytes()))

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FinCategory{label}: {self.n_obj} objects, {self.n_mor} morphisms>"


def validate_category(C: FinCategory) -> ValidationReport:
    """Exhaustively check totality, unit laws and associativity."""
    rep = ValidationReport()
    dom, cod, comp = C.dom, C.cod, C.comp
    for o, i in enumerate(C.ident):
        if dom[i] != o or cod[i] != o:
            rep.add("identity", (o, int(i)), "identity does not go from the object to itself")
    composable = cod[None, :] == dom[:, None]          # [g, f]
    defined = comp >= 0
    for g, f in np.argwhere(composable & ~defined):
        rep.add("totality", (int(g), int(f)), "composable pair has no composite")
    for g, f in np.argwhere(~composable & defined):
        rep.add("totality", (int(g), int(f)), "composite defined for a non-composable pair")
    gi, fi = np.nonzero(composable & defined)
    gf = comp[gi, fi]
    bad = (dom[gf] != dom[fi]) | (cod[gf] != cod[gi])
    for k in np.flatnonzero(bad):
        rep.add("totality", (int(gi[k]), int(fi[k])), "composite has wrong domain or codomain")
    if not rep.ok:
        return rep
    m = np.arange(C.n_mor)
    left = comp[C.ident[cod], m]
    right = comp[m, C.ident[dom]]
    for f in np.flatnonzero(left != m):
        rep.add("unit", (int(C.ident[cod[f]]), int(f)), "id o f != f")
    for f in np.flatnonzero(right != m):
        rep.add("unit", (int(f), int(C.ident[dom[f]])), "f o id != f")
    for b in range(C.n_obj):
        F = C.into(b)
        if not len(F):
            continue
        for c in range(C.n_obj):
            G = C.hom(b, c)
            H = C.out_of(c)
            if not len(G) or not len(H):
                continue
            GF = comp[np.ix_(G, F)]
            step = max(1, 2_000_000 // (len(G) * len(F)))
            for s in range(0, len(H), step):
                Hs = H[s:s + step]
                lhs = comp[Hs[:, None, None], GF[None, :, :]]
                HG = comp[np.ix_(Hs, G)]
                rhs = comp[HG[:, :, None], F[None, None, :]]
                for i, j, k in np.argwhere(lhs != rhs):
                    rep.add("associativity", (int(Hs[i]), int(G[j]), int(F[k])),
                            "h o (g o f) != (h o g) o f")
    return rep


def classify_morphism(C: FinCategory, f: int) -> MorphismClass:
    fl = C.flags
    return MorphismClass(bool(fl["iso"][f]), bool(fl["mono"][f]), bool(fl["epi"][f]),
                         bool(fl["split_epi"][f]), bool(fl["split_mono"][f]))


def opposite(C: FinCategory) -> FinCategory:
    return C.op


def terminal_category() -> FinCategory:
    return FinCategory(["*"], [0], [0], [0], [[0, 0, 0]], names=["1"], keys=["1"],
                       object_keys=["*"], name="1")


def discrete_category(objects: Sequence[str]) -> FinCategory:
    n = len(objects)
    return FinCategory(objects, range(n), range(n), range(n), [[i, i, i] for i in range(n)],
                       names=[f"1_{o}" for o in objects], keys=list(range(n)), object_keys=list(range(n)))


# ---------------------------------------------------------------------------
# functors and subcategories


class FunctorData:
    """A functor given by object and morphism maps."""

    def __init__(self, source: FinCategory, target: FinCategory, obj_map, mor_map, name: str = ""):
        self.source = source
        self.target = target
        self.obj_map = _frozen(obj_map)
        self.mor_map = _frozen(mor_map)
        if len(self.obj_map) != source.n_obj or len(self.mor_map) != source.n_mor:
            raise StructureError("functor tables do not match the size of the source category")
        if len(self.obj_map) and (self.obj_map.min() < 0 or self.obj_map.max() >= target.n_obj):
            raise StructureError("functor object map leaves the target category")
        if len(self.mor_map) and (self.mor_map.min() < 0 or self.mor_map.max() >= target.n_mor):
            raise StructureError("functor morphism map leaves the target category")
        self.name = name

    @classmethod
    def identity(cls, C: FinCategory) -> FunctorData:
        return cls(C, C, np.arange(C.n_obj), np.arange(C.n_mor), name="id")

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        S, T = self.source, self.target
        F0, F1 = self.obj_map, self.mor_map
        for o in range(S.n_obj):
            if F1[S.ident[o]] != T.ident[F0[o]]:
                rep.add("identity", (o,), "identity not preserved")
        bad = (T.dom[F1] != F0[S.dom]) | (T.cod[F1] != F0[S.cod])
        for m in np.flatnonzero(bad):
            rep.add("dom_cod", (int(m),), "dom/cod not preserved")
        if not rep.ok:
            return rep
        g, f, gf = S.composable_pairs
        ok = T.comp[F1[g], F1[f]] == F1[gf]
        for k in np.flatnonzero(~ok):
            rep.add("composition", (int(g[k]), int(f[k])), "F(g o f) != F(g) o F(f)")
        return rep

    def then(self, other: FunctorData) -> FunctorData:
        """``other o self``."""
        return FunctorData(self.source, other.target, other.obj_map[self.obj_map],
                           other.mor_map[self.mor_map])

    def op(self) -> FunctorData:
        cached = self.__dict__.get("_op")
        if cached is None:
            cached = FunctorData(self.source.op, self.target.op, self.obj_map, self.mor_map, name=self.name)
            cached.__dict__["_op"] = self
            self.__dict__["_op"] = cached
        return cached

    def is_isomorphism(self) -> bool:
        return (self.source.n_obj == self.target.n_obj and self.source.n_mor == self.target.n_mor
                and len(np.unique(self.obj_map)) == self.target.n_obj
                and len(np.unique(self.mor_map)) == self.target.n_mor
                and self.validate().ok)

    def __eq__(self, other):
        if not isinstance(other, FunctorData):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and np.array_equal(self.obj_map, other.obj_map)
                and np.array_equal(self.mor_map, other.mor_map))

    __hash__ = None

    def __repr__(self):
        return f"<FunctorData {self.name or ''} {self.source!r} -> {self.target!r}>"


@dataclass(frozen=True)
class WideSubcategory:
    parent: FinCategory
    members: frozenset

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.n_mor, dtype=bool)
        m[list(self.members)] = True
        return m

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        C = self.parent
        for o, i in enumerate(C.ident):
            if int(i) not in self.members:
                rep.add("identity", (o,), "identity missing from wide subcategory")
        mask = self.mask
        g, f, gf = C.composable_pairs
        sel = mask[g] & mask[f] & ~mask[gf]
        for k in np.flatnonzero(sel):
            rep.add("closure", (int(g[k]), int(f[k])), "composite leaves the subcategory")
        return rep

    def as_category(self) -> tuple[FinCategory, FunctorData]:
        return subcategory(self.parent, range(self.parent.n_obj), sorted(self.members))


def subcategory(C: FinCategory, objects: Iterable[int], morphisms: Iterable[int],
                name: str = "") -> tuple[FinCategory, FunctorData]:
    """The subcategory on the given (closed) sets, reindexed, plus its inclusion functor."""
    objects = [int(o) for o in objects]
    morphisms = sorted({int(m) for m in morphisms} | {int(C.ident[o]) for o in objects})
    opos = {o: i for i, o in enumerate(objects)}
    mpos = np.full(C.n_mor, -1, dtype=np.int64)
    mpos[morphisms] = np.arange(len(morphisms))
    mors = np.array(morphisms, dtype=np.int64)
    for m in mors:
        if int(C.dom[m]) not in opos or int(C.cod[m]) not in opos:
            raise StructureError(f"morphism {C.names[m]} leaves the chosen objects")
    sub = C.comp[np.ix_(mors, mors)] if len(mors) else np.zeros((0, 0), dtype=np.int64)
    table = np.where(sub >= 0, mpos[np.maximum(sub, 0)], -1)
    if ((sub >= 0) & (table < 0)).any():
        g, f = np.argwhere((sub >= 0) & (table < 0))[0]
        raise StructureError(f"subcategory not closed: {C.names[mors[g]]} o {C.names[mors[f]]}")
    keys = [C.keys[m] for m in mors] if C.keys is not None else None
    okeys = [C.object_keys[o] for o in objects] if C.object_keys is not None else None
    D = FinCategory([C.objects[o] for o in objects], [opos[int(C.dom[m])] for m in mors],
                    [opos[int(C.cod[m])] for m in mors], [int(mpos[C.ident[o]]) for o in objects],
                    table, names=[C.names[m] for m in mors], keys=keys, object_keys=okeys, name=name)
    return D, FunctorData(D, C, objects, mors, name="incl")


def full_subcategory(C: FinCategory, objects: Iterable[int], name: str = "") -> tuple[FinCategory, FunctorData]:
    objects = [int(o) for o in objects]
    keep = set(objects)
    mors = [m for m in range(C.n_mor) if int(C.dom[m]) in keep and int(C.cod[m]) in keep]
    return subcategory(C, objects, mors, name=name)


# ---------------------------------------------------------------------------
# comma categories and the Grothendieck construction


def comma_category(phi: FunctorData, c: int, side: str = "over") -> tuple[FinCategory, FunctorData]:
    """``phi/c`` (side="over") or ``c/phi`` (side="under") with its projection to the source."""
    if side not in ("over", "under"):
        raise ValueError("side must be 'over' or 'under'")
    D, C = phi.source, phi.target
    objs = []
    for d in range(D.n_obj):
        hs = C.hom(int(phi.obj_map[d]), c) if side == "over" else C.hom(c, int(phi.obj_map[d]))
        objs.extend((d, int(u)) for u in hs)
    opos = {o: i for i, o in enumerate(objs)}
    mors = []
    for (d, u) in objs:
        for f in D.out_of(d):
            f = int(f)
            d2 = int(D.cod[f])
            if side == "over":
                # morphisms (d, u' o phi(f)) -> (d2, u'), keyed by (f, u')
                for u2 in C.hom(int(phi.obj_map[d2]), c):
                    if int(C.comp[u2, phi.mor_map[f]]) == u:
                        mors.append(((f, int(u2)), opos[(d, u)], opos[(d2, int(u2))]))
            else:
                u2 = int(C.comp[phi.mor_map[f], u])
                mors.append(((f, u), opos[(d, u)], opos[(d2, u2)]))
    if side == "over":
        def compose(kg, kf):
            return (int(D.comp[kg[0], kf[0]]), kg[1])

        def identity(i):
            return (int(D.ident[objs[i][0]]), objs[i][1])
    else:
        def compose(kg, kf):
            return (int(D.comp[kg[0], kf[0]]), kf[1])

        def identity(i):
            return (int(D.ident[objs[i][0]]), objs[i][1])
    K = FinCategory.from_composition(
        objs, mors, compose, identity,
        naming=lambda k: f"{D.names[k[0]]}|{C.names[k[1]]}",
        object_naming=lambda o: f"({D.objects[o[0]]},{C.names[o[1]]})",
        name=f"comma_{side}")
    proj = FunctorData(K, D, [o[0] for o in objs], [K.keys[m][0] for m in range(K.n_mor)], name="pi")
    return K, proj


def grothendieck(base: FinCategory, fibers: Sequence[FinCategory], transition: Callable[[int], FunctorData],
                 twist: Callable[[int, int, int], int] | None = None) -> FinCategory:
    """Grothendieck construction of a contravariant diagram of categories on ``base``.

    ``transition(beta)`` for ``beta: b -> b2`` is a functor ``fibers[b2] -> fibers[b]``.
    Objects are pairs ``(b, x)``; a morphism ``(b, x) -> (b2, x2)`` is ``(beta, f)`` with
    ``f: x -> Phi(beta)(x2)`` in ``fibers[b]``.  Composition is
    ``(beta2, f2) o (beta1, f1) = (beta2 beta1, t o Phi(beta1)(f2) o f1)`` where
    ``t = twist(beta1, beta2, x3)`` is the comparison ``Phi(beta1)Phi(beta2)(x3) -> Phi(beta2 beta1)(x3)``.
    Without ``twist`` the transition functors must compose strictly.
    """
    trans = {}
    for beta in range(base.n_mor):
        F = transition(beta)
        b, b2 = int(base.dom[beta]), int(base.cod[beta])
        if F.source is not fibers[b2] and F.source != fibers[b2]:
            raise ValueError(f"transition of {base.names[beta]} has the wrong source fiber")
        if F.target is not fibers[b] and F.target != fibers[b]:
            raise ValueError(f"transition of {base.names[beta]} has the wrong target fiber")
        trans[beta] = F
    if twist is None:
        for o in range(base.n_obj):
            F = trans[int(base.ident[o])]
            if not (np.array_equal(F.obj_map, np.arange(fibers[o].n_obj))
                    and np.array_equal(F.mor_map, np.arange(fibers[o].n_mor))):
                raise ValueError(f"incoherent transition data: identity of {base.objects[o]} not sent to identity")
        g, f, gf = base.composable_pairs
        for b2, b1, b21 in zip(g, f, gf):
            lhs = trans[int(b2)].then(trans[int(b1)])
            rhs = trans[int(b21)]
            if not (np.array_equal(lhs.obj_map, rhs.obj_map) and np.array_equal(lhs.mor_map, rhs.mor_map)):
                raise ValueError(
                    f"incoherent transition data at triangle ({base.names[b1]}, {base.names[b2]})")
    objs = [(b, x) for b in range(base.n_obj) for x in range(fibers[b].n_obj)]
    opos = {o: i for i, o in enumerate(objs)}
    mors = []
    for beta in range(base.n_mor):
        b, b2 = int(base.dom[beta]), int(base.cod[beta])
        F = trans[beta]
        for x2 in range(fibers[b2].n_obj):
            y = int(F.obj_map[x2])
            for f in fibers[b].into(y):
                x = int(fibers[b].dom[f])
                mors.append(((beta, x2, int(f)), opos[(b, x)], opos[(b2, x2)]))

    def compose(kg, kf):
        beta2, x3, f2 = kg
        beta1, x2, f1 = kf
        b = int(base.dom[beta1])
        fib = fibers[b]
        h = fib.comp[trans[beta1].mor_map[f2], f1]
        if twist is not None:
            t = twist(beta1, beta2, x3)
            h = fib.comp[t, h]
        return (int(base.comp[beta2, beta1]), x3, int(h))

    def identity(i):
        b, x = objs[i]
        return (int(base.ident[b]), x, int(fibers[b].ident[x]))

    return FinCategory.from_composition(
        objs, mors, compose, identity,
        naming=lambda k: f"({base.names[k[0]]},{fibers[int(base.dom[k[0]])].names[k[2]]})",
        object_naming=lambda o: f"({base.objects[o[0]]},{fibers[o[0]].objects[o[1]]})",
        name="grothendieck")


# ---------------------------------------------------------------------------
# isomorphism search


def _object_signature(C: FinCategory, a: int):
    prof = sorted((len(C.hom(a, b)), len(C.hom(b, a))) for b in range(C.n_obj))
    return (len(C.hom(a, a)), tuple(prof))


def _morphism_signature(C: FinCategory, m: int):
    fl = C.flags
    return (bool(fl["iso"][m]), bool(fl["mono"][m]), bool(fl["epi"][m]),
            bool(fl["split_epi"][m]), bool(fl["split_mono"][m]))


def find_isomorphism(C: FinCategory, D: FinCategory, fixed_objects: dict | None = None,
                     fixed_morphisms: dict | None = None) -> FunctorData | None:
    """Exhaustive search for an isomorphism of categories ``C -> D``.

    Objects are matched by hom-size profiles; morphisms are determined by the
    images of ``C.generators`` and checked against every generator composite.
    """
    if C.n_obj != D.n_obj or C.n_mor != D.n_mor:
        return None
    fixed_objects = dict(fixed_objects or {})
    fixed_morphisms = dict(fixed_morphisms or {})
    for m, m2 in fixed_morphisms.items():
        fixed_objects.setdefault(int(C.dom[m]), int(D.dom[m2]))
        fixed_objects.setdefault(int(C.cod[m]), int(D.cod[m2]))
    csig = [_object_signature(C, a) for a in range(C.n_obj)]
    dsig = [_object_signature(D, a) for a in range(D.n_obj)]
    if sorted(csig) != sorted(dsig):
        return None
    gens = list(C.generators)
    parent, order = C.derivation
    checks = []                           # (g, e, m) with m = g o e
    for g in gens:
        for e in C.into(int(C.dom[g])):
            checks.append((g, int(e), int(C.comp[g, e])))
    msig_c = [_morphism_signature(C, m) for m in range(C.n_mor)]
    msig_d = [_morphism_signature(D, m) for m in range(D.n_mor)]

    def search_morphisms(F0):
        F1 = np.full(C.n_mor, -1, dtype=np.int64)
        for o in range(C.n_obj):
            F1[C.ident[o]] = D.ident[F0[o]]
        # derivation rank of each generator: the latest generator a morphism depends on
        gen_rank = {g: i for i, g in enumerate(gens)}
        dep = {}
        for m in order:
            if m in parent:
                g, e = parent[m]
                dep[m] = max(gen_rank[g], dep.get(e, -1))
            else:
                dep[m] = -1
        by_rank = {}
        for m in order:
            if m in parent:
                by_rank.setdefault(dep[m], []).append(m)
        checks_by_rank = {}
        for g, e, m in checks:
            r = max(gen_rank[g], dep[e], dep[m])
            checks_by_rank.setdefault(r, []).append((g, e, m))

        def assign(i, used):
            if i == len(gens):
                return F1.copy()
            g = gens[i]
            a, b = F0[C.dom[g]], F0[C.cod[g]]
            cands = D.hom(a, b)
            if g in fixed_morphisms:
                cands = [fixed_morphisms[g]]
            for cand in cands:
                cand = int(cand)
                if msig_d[cand] != msig_c[g]:
                    continue
                F1[g] = cand
                newly = []
                ok = True
                for m in by_rank.get(i, ()):
                    pg, pe = parent[m]
                    v = int(D.comp[F1[pg], F1[pe]])
                    if m in fixed_morphisms and fixed_morphisms[m] != v:
                        ok = False
                        break
                    if v in used:
                        ok = False
                        break
                    F1[m] = v
                    used.add(v)
                    newly.append(m)
                if ok:
                    for cg, ce, cm in checks_by_rank.get(i, ()):
                        if D.comp[F1[cg], F1[ce]] != F1[cm]:
                            ok = False
                            break
                if ok:
                    res = assign(i + 1, used)
                    if res is not None:
                        return res
                for m in newly:
                    used.discard(int(F1[m]))
                    F1[m] = -1
            F1[g] = -1
            return None

        used = {int(F1[C.ident[o]]) for o in range(C.n_obj)}
        return assign(0, used)

    objs = list(range(C.n_obj))

    def assign_objects(i, F0, used):
        if i == len(objs):
            F1 = search_morphisms(F0)
            if F1 is None:
                return None
            F = FunctorData(C, D, F0, F1, name="iso")
            return F if F.is_isomorphism() else None
        a = objs[i]
        cands = [fixed_objects[a]] if a in fixed_objects else range(D.n_obj)
        for b in cands:
            if b in used or csig[a] != dsig[b]:
                continue
            if any(len(C.hom(a, x)) != len(D.hom(b, F0[x])) or len(C.hom(x, a)) != len(D.hom(F0[x], b))
                   for x in objs[:i]):
                continue
            F0[a] = b
            used.add(b)
            res = assign_objects(i + 1, F0, used)
            if res is not None:
                return res
            used.discard(b)
        return None

    return assign_objects(0, [0] * C.n_obj, set())
