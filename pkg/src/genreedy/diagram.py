"""Finite Set-valued diagrams, their (co)limits and Kan extensions.

A covariant functor ``X: C -> Set`` stores one integer array per morphism:
``X.actions[m][x]`` is the image of element ``x`` of ``X(dom m)``.  A presheaf
on ``C`` is simply a diagram on ``C.op`` (same morphism ids).

All (co)limits are reduced to (co)limits over an *element graph*: a list of
blocks, each carrying a finite set, and edges labelled by maps between blocks.
Generators of the indexing category are enough to produce the edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .fincat import FinCategory, FunctorData, StructureError, ValidationReport


class PreconditionError(ValueError):
    """A hypothesis of an operation fails; ``witness`` names the culprit."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _arr(a):
    a = np.asarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class SetDiagram:
    """A functor ``shape -> FinSet``."""

    def __init__(self, shape: FinCategory, sizes: Sequence[int], actions: Sequence, labels=None,
                 name: str = ""):
        self.shape = shape
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) != shape.n_obj:
            raise StructureError(f"expected {shape.n_obj} value sets, got {len(self.sizes)}")
        if len(actions) != shape.n_mor:
            raise StructureError(f"expected {shape.n_mor} action maps, got {len(actions)}")
        acts = []
        for m, a in enumerate(actions):
            a = _arr(a)
            d, c = int(shape.dom[m]), int(shape.cod[m])
            if a.shape != (self.sizes[d],):
                raise StructureError(f"action of morphism {m} has length {len(a)}, expected {self.sizes[d]}")
            if len(a) and (a.min() < 0 or a.max() >= self.sizes[c]):
                raise StructureError(f"action of morphism {m} leaves the codomain value set")
            acts.append(a)
        self.actions = tuple(acts)
        self._labels = None if labels is None else tuple(tuple(l) for l in labels)
        self.name = name

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_function(cls, shape: FinCategory, values: Sequence[Sequence[Hashable]],
                      act: Callable[[int, Hashable], Hashable], name: str = "") -> SetDiagram:
        """``act(m, v)`` gives the image of value ``v`` under morphism ``m``."""
        index = [{v: i for i, v in enumerate(vals)} for vals in values]
        actions = []
        for m in range(shape.n_mor):
            d, c = int(shape.dom[m]), int(shape.cod[m])
            try:
                actions.append([index[c][act(m, v)] for v in values[d]])
            except KeyError as e:
                raise StructureError(f"image {e.args[0]!r} under morphism {m} is not a listed value") from None
        return cls(shape, [len(v) for v in values], actions, labels=values, name=name)

    @classmethod
    def empty(cls, shape: FinCategory) -> SetDiagram:
        return cls(shape, [0] * shape.n_obj, [[] for _ in range(shape.n_mor)], name="empty")

    @classmethod
    def terminal(cls, shape: FinCategory) -> SetDiagram:
        return cls(shape, [1] * shape.n_obj, [[0] for _ in range(shape.n_mor)],
                   labels=[("*",)] * shape.n_obj, name="1")

    @classmethod
    def constant(cls, shape: FinCategory, n: int) -> SetDiagram:
        return cls(shape, [n] * shape.n_obj, [np.arange(n) for _ in range(shape.n_mor)])

    # -- basics ------------------------------------------------------------

    @property
    def labels(self) -> tuple[tuple, ...]:
        if self._labels is None:
            return tuple(tuple(range(s)) for s in self.sizes)
        return self._labels

    def label(self, obj: int, x: int):
        return self.labels[obj][x]

    def total_size(self) -> int:
        return sum(self.sizes)

    def act(self, m: int, x: int) -> int:
        return int(self.actions[m][x])

    @cached_property
    def _hom_actions(self):
        """``(a, b) -> matrix`` whose row ``i`` is the action of the i-th morphism in ``hom(a, b)``."""
        out = {}
        C = self.shape
        for a in range(C.n_obj):
            for b in range(C.n_obj):
                h = C.hom(a, b)
                if len(h):
                    out[(a, b)] = np.stack([self.actions[m] for m in h]) if self.sizes[a] else np.zeros((len(h), 0), dtype=np.int64)
        return out

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        C = self.shape
        for o in range(C.n_obj):
            if not np.array_equal(self.actions[C.ident[o]], np.arange(self.sizes[o])):
                rep.add("identity", (o,), "identity does not act trivially")
        H = self._hom_actions
        hidx = C.hom_index
        for f in range(C.n_mor):
            a, b = int(C.dom[f]), int(C.cod[f])
            if not self.sizes[a]:
                continue
            act_f = self.actions[f]
            for e in range(C.n_obj):
                G = C.hom(b, e)
                if not len(G):
                    continue
                lhs = H[(a, e)][hidx[C.comp[G, f]]]
                rhs = H[(b, e)][:, act_f]
                bad = np.flatnonzero((lhs != rhs).any(axis=1))
                for k in bad:
                    rep.add("functoriality", (int(G[k]), f), "X(g o f) != X(g) X(f)")
        return rep

    def restrict(self, F: FunctorData) -> SetDiagram:
        """``F^* X`` for ``F: S -> shape``."""
        if F.target != self.shape:
            raise ValueError("functor does not land in the diagram's shape")
        labels = None if self._labels is None else [self._labels[int(o)] for o in F.obj_map]
        return SetDiagram(F.source, [self.sizes[int(o)] for o in F.obj_map],
                          [self.actions[int(m)] for m in F.mor_map], labels=labels)

    def relabel(self, shape: FinCategory) -> SetDiagram:
        """Same tables on an equal category object (e.g. after a round trip)."""
        return SetDiagram(shape, self.sizes, self.actions, labels=self._labels, name=self.name)

    def __eq__(self, other):
        if not isinstance(other, SetDiagram):
            return NotImplemented
        return (self.shape == other.shape and self.sizes == other.sizes
                and all(np.array_equal(a, b) for a, b in zip(self.actions, other.actions)))

    __hash__ = None

    def __repr__(self):
        return f"<SetDiagram {self.name} sizes={self.sizes}>"


def corepresentable(C: FinCategory, r: int) -> SetDiagram:
    """``Hom(r, -)``; elements of the value at ``s`` are ordered like ``C.hom(r, s)``."""
    values = [C.hom(r, s) for s in range(C.n_obj)]
    hidx = C.hom_index
    actions = [hidx[C.comp[m, values[int(C.dom[m])]]] if len(values[int(C.dom[m])]) else []
               for m in range(C.n_mor)]
    labels = [tuple(C.names[u] for u in v) for v in values]
    return SetDiagram(C, [len(v) for v in values], actions, labels=labels, name=f"h^{C.objects[r]}")


def representable(C: FinCategory, r: int) -> SetDiagram:
    """The presheaf ``Hom(-, r)``, as a diagram on ``C.op``."""
    X = corepresentable(C.op, r)
    X.name = f"y{C.objects[r]}"
    return X


# ---------------------------------------------------------------------------
# natural transformations


class DiagramMap:
    def __init__(self, source: SetDiagram, target: SetDiagram, components: Sequence):
        if source.shape != target.shape:
            raise StructureError("source and target live on different shapes")
        self.source = source
        self.target = target
        comps = []
        for o, c in enumerate(components):
            c = _arr(c)
            if c.shape != (source.sizes[o],):
                raise StructureError(f"component at object {o} has the wrong length")
            if len(c) and (c.min() < 0 or c.max() >= target.sizes[o]):
                raise StructureError(f"component at object {o} leaves the target set")
            comps.append(c)
        if len(comps) != source.shape.n_obj:
            raise StructureError("one component per object is required")
        self.components = tuple(comps)

    @property
    def shape(self):
        return self.source.shape

    @classmethod
    def identity(cls, X: SetDiagram) -> DiagramMap:
        return cls(X, X, [np.arange(s) for s in X.sizes])

    @classmethod
    def from_empty(cls, X: SetDiagram) -> DiagramMap:
        return cls(SetDiagram.empty(X.shape), X, [[] for _ in X.sizes])

    @classmethod
    def to_terminal(cls, X: SetDiagram) -> DiagramMap:
        return cls(X, SetDiagram.terminal(X.shape), [np.zeros(s, dtype=np.int64) for s in X.sizes])

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        C = self.shape
        X, Y = self.source, self.target
        for m in range(C.n_mor):
            a, b = int(C.dom[m]), int(C.cod[m])
            lhs = self.components[b][X.actions[m]]
            rhs = Y.actions[m][self.components[a]]
            bad = np.flatnonzero(lhs != rhs)
            if len(bad):
                rep.add("naturality", (m, int(bad[0])), "naturality square does not commute")
        return rep

    def then(self, other: DiagramMap) -> DiagramMap:
        return DiagramMap(self.source, other.target,
                          [other.components[o][c] for o, c in enumerate(self.components)])

    def is_mono(self) -> bool:
        return all(len(np.unique(c)) == len(c) for c in self.components)

    def is_epi(self) -> bool:
        return all(len(np.unique(c)) == n for c, n in zip(self.components, self.target.sizes))

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()

    def inverse(self) -> DiagramMap:
        if not self.is_iso():
            raise ValueError("map is not invertible")
        return DiagramMap(self.target, self.source, [np.argsort(c) for c in self.components])

    def __repr__(self):
        return f"<DiagramMap {self.source!r} -> {self.target!r}>"


# ---------------------------------------------------------------------------
# element graphs


class ElementGraph:
    """Blocks of finite sets connected by maps; the data of a (co)limit problem."""

    def __init__(self):
        self.sizes: list[int] = []
        self.offsets: list[int] = []
        self.keys: list[Hashable] = []
        self.edges: list[tuple[int, int, np.ndarray]] = []
        self._total = 0

    def add_block(self, key, size: int) -> int:
        i = len(self.sizes)
        self.keys.append(key)
        self.sizes.append(int(size))
        self.offsets.append(self._total)
        self._total += int(size)
        return i

    def add_edge(self, a: int, b: int, mapping):
        self.edges.append((a, b, np.asarray(mapping, dtype=np.int64)))

    @property
    def n_nodes(self) -> int:
        return self._total

    def colimit(self) -> tuple[int, np.ndarray]:
        """Number of classes and the class of every node, classes ordered by least node."""
        n = self._total
        if n == 0:
            return 0, np.zeros(0, dtype=np.int64)
        src, dst = [], []
        for a, b, m in self.edges:
            if len(m):
                src.append(self.offsets[a] + np.arange(len(m)))
                dst.append(self.offsets[b] + m)
        if src:
            s = np.concatenate(src)
            d = np.concatenate(dst)
        else:
            s = d = np.zeros(0, dtype=np.int64)
        g = coo_matrix((np.ones(len(s), dtype=np.int8), (s, d)), shape=(n, n))
        k, lab = connected_components(g, directed=True, connection="weak")
        first = np.full(k, n, dtype=np.int64)
        np.minimum.at(first, lab, np.arange(n))
        rank = np.empty(k, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(k)
        return int(k), rank[lab]

    def limit(self) -> np.ndarray:
        """Compatible families: an array of shape (n_families, n_blocks), rows sorted."""
        nb = len(self.sizes)
        if nb == 0:
            return np.zeros((1, 0), dtype=np.int64)
        dom = [np.ones(s, dtype=bool) for s in self.sizes]
        changed = True
        while changed:
            changed = False
            for a, b, m in self.edges:
                if not len(m):
                    continue
                keep = dom[a] & dom[b][m]
                if not np.array_equal(keep, dom[a]):
                    dom[a] = keep
                    changed = True
        if any(not d.any() for d in dom):
            return np.zeros((0, nb), dtype=np.int64)
        out_edges = [[] for _ in range(nb)]
        touching = [[] for _ in range(nb)]
        for e, (a, b, m) in enumerate(self.edges):
            out_edges[a].append(e)
            touching[a].append(e)
            touching[b].append(e)
        # forward reach decides the branching order: assigning a block forces its successors
        reach = []
        for s in range(nb):
            seen = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for e in out_edges[v]:
                    w = self.edges[e][1]
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            reach.append(len(seen))
        rows = np.zeros((1, nb), dtype=np.int64)
        assigned = np.zeros(nb, dtype=bool)
        queue = []

        def settle(v):
            nonlocal rows
            assigned[v] = True
            for e in touching[v]:
                a, b, m = self.edges[e]
                if assigned[a] and assigned[b]:
                    rows = rows[m[rows[:, a]] == rows[:, b]]
                elif assigned[a] and not assigned[b]:
                    queue.append(e)

        while not assigned.all():
            if queue:
                e = queue.pop()
                a, b, m = self.edges[e]
                if assigned[b]:
                    continue
                rows[:, b] = m[rows[:, a]]
                settle(b)
                continue
            free = np.flatnonzero(~assigned)
            v = int(max(free, key=lambda i: (reach[i], -int(dom[i].sum()), -i)))
            vals = np.flatnonzero(dom[v])
            rows = np.repeat(rows, len(vals), axis=0)
            rows[:, v] = np.tile(vals, len(rows) // max(len(vals), 1))
            settle(v)
            if not len(rows):
                return np.zeros((0, nb), dtype=np.int64)
        if len(rows) > 1:
            rows = rows[np.lexsort(rows.T[::-1])]
        return rows


def _row_lookup(table: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Index in ``table`` of each row of ``rows`` (-1 if absent)."""
    table = np.asarray(table, dtype=np.int64)
    rows = np.asarray(rows, dtype=np.int64)
    out = np.full(len(rows), -1, dtype=np.int64)
    if not len(table) or not len(rows):
        return out
    width = table.shape[1] if table.ndim == 2 else 0
    if width == 0:
        out[:] = 0
        return out
    base = int(max(table.max(), rows.max())) + 2
    if width * np.log2(base) < 62:
        # rows as mixed-radix integers, then a sorted search
        weights = base ** np.arange(width, dtype=np.int64)
        tk, rk = (table + 1) @ weights, (rows + 1) @ weights
        order = np.argsort(tk, kind="stable")
        pos = np.searchsorted(tk[order], rk)
        pos = np.minimum(pos, len(order) - 1)
        hit = tk[order][pos] == rk
        out[hit] = order[pos[hit]]
        return out
    index = {}
    for i, r in enumerate(table.tolist()):
        index.setdefault(tuple(r), i)
    return np.array([index.get(tuple(r), -1) for r in rows.tolist()], dtype=np.int64)


@dataclass
class CoconeResult:
    apex_size: int
    legs: tuple[np.ndarray, ...]
    representatives: tuple[tuple[int, int], ...]

    def validate_against(self, D: SetDiagram) -> bool:
        for m in range(D.shape.n_mor):
            a, b = int(D.shape.dom[m]), int(D.shape.cod[m])
            if not np.array_equal(self.legs[b][D.actions[m]], self.legs[a]):
                return False
        return True


@dataclass
class ConeResult:
    apex_size: int
    legs: tuple[np.ndarray, ...]
    families: np.ndarray

    def validate_against(self, D: SetDiagram) -> bool:
        for m in range(D.shape.n_mor):
            a, b = int(D.shape.dom[m]), int(D.shape.cod[m])
            if not np.array_equal(D.actions[m][self.legs[a]], self.legs[b]):
                return False
        return True


def _diagram_graph(D: SetDiagram) -> ElementGraph:
    G = ElementGraph()
    for o in range(D.shape.n_obj):
        G.add_block(o, D.sizes[o])
    for m in D.shape.generators:
        G.add_edge(int(D.shape.dom[m]), int(D.shape.cod[m]), D.actions[m])
    return G


def colimit(D: SetDiagram) -> CoconeResult:
    G = _diagram_graph(D)
    k, lab = G.colimit()
    legs = tuple(lab[G.offsets[o]:G.offsets[o] + D.sizes[o]] for o in range(D.shape.n_obj))
    reps = [None] * k
    for o in range(D.shape.n_obj):
        for x, c in enumerate(legs[o]):
            if reps[c] is None:
                reps[c] = (o, x)
    return CoconeResult(k, legs, tuple(reps))


def limit(D: SetDiagram) -> ConeResult:
    fam = _diagram_graph(D).limit()
    return ConeResult(len(fam), tuple(fam[:, o] for o in range(D.shape.n_obj)), fam)


# ---------------------------------------------------------------------------
# Kan extensions


@dataclass
class KanExtension:
    """``phi_! X`` or ``phi_* X`` with bookkeeping that makes comparison maps cheap.

    For ``lan`` the element ``i`` of the value at ``c`` is represented by the
    node ``reps[c][i] = (d, u, x)`` of the comma category ``phi/c``; ``classes[c]``
    maps ``(d, u, x)`` nodes (flattened through ``offsets[c]``) to elements.  For
    ``ran`` the element ``i`` is the family ``families[c][i]`` indexed by the
    objects ``(d, u)`` of ``c/phi`` listed in ``blocks[c]``.
    """
    phi: FunctorData
    X: SetDiagram
    diagram: SetDiagram
    kind: str
    blocks: list
    offsets: list
    classes: list
    reps: list
    families: list
    starts: list

    def block(self, c, d, u) -> int:
        """Position of the comma object ``(d, u)`` among the blocks at ``c``."""
        return self.starts[c][d] + int(self.phi.target.hom_index[u])

    def node(self, c, d, u, x) -> int:
        """(lan) the element of the value at ``c`` represented by ``(d, u, x)``."""
        return int(self.classes[c][self.offsets[c][self.block(c, d, u)] + x])

    def family(self, c, i) -> dict:
        """(ran) the family of element ``i`` at ``c`` as a dict ``(d, u) -> x``."""
        return {k: int(v) for k, v in zip(self.blocks[c], self.families[c][i])}


def _comma_homs(phi: FunctorData, c: int, side: str) -> dict:
    C = phi.target
    if side == "over":
        return {d: C.hom(int(phi.obj_map[d]), c) for d in range(phi.source.n_obj)}
    return {d: C.hom(c, int(phi.obj_map[d])) for d in range(phi.source.n_obj)}


def lan(phi: FunctorData, X: SetDiagram) -> KanExtension:
    """Left Kan extension, pointwise as a colimit over the comma category ``phi/c``."""
    D, C = phi.source, phi.target
    if X.shape != D:
        raise ValueError("diagram is not defined on the source of phi")
    hidx = C.hom_index
    gens = [int(g) for g in D.generators]
    all_blocks, all_offsets, all_classes, all_reps, all_starts, sizes = [], [], [], [], [], []
    for c in range(C.n_obj):
        per_d = _comma_homs(phi, c, "over")
        G = ElementGraph()
        start = {}
        for d in range(D.n_obj):
            start[d] = len(G.sizes)
            for u in per_d[d]:
                G.add_block((d, int(u)), X.sizes[d])
        for f in gens:
            d, d2 = int(D.dom[f]), int(D.cod[f])
            pf = int(phi.mor_map[f])
            for u2 in per_d[d2]:
                u = int(C.comp[u2, pf])
                G.add_edge(start[d] + int(hidx[u]), start[d2] + int(hidx[u2]), X.actions[f])
        k, lab = G.colimit()
        reps = [None] * k
        for b, key in enumerate(G.keys):
            off = G.offsets[b]
            for x in range(G.sizes[b]):
                cl = lab[off + x]
                if reps[cl] is None:
                    reps[cl] = (key[0], key[1], x)
        all_blocks.append(G.keys)
        all_offsets.append(G.offsets)
        all_classes.append(lab)
        all_reps.append(reps)
        all_starts.append(start)
        sizes.append(k)
    actions = []
    for h in range(C.n_mor):
        c, c2 = int(C.dom[h]), int(C.cod[h])
        img = []
        for (d, u, x) in all_reps[c]:
            b = all_starts[c2][d] + int(hidx[C.comp[h, u]])
            img.append(int(all_classes[c2][all_offsets[c2][b] + x]))
        actions.append(img)
    labels = [tuple((D.objects[d], C.names[u], X.label(d, x)) for (d, u, x) in reps) for reps in all_reps]
    out = SetDiagram(C, sizes, actions, labels=labels, name=f"lan({X.name})")
    return KanExtension(phi, X, out, "lan", all_blocks, all_offsets, all_classes, all_reps, [], all_starts)


def ran(phi: FunctorData, X: SetDiagram) -> KanExtension:
    """Right Kan extension, pointwise as a limit over the comma category ``c/phi``."""
    D, C = phi.source, phi.target
    if X.shape != D:
        raise ValueError("diagram is not defined on the source of phi")
    hidx = C.hom_index
    gens = [int(g) for g in D.generators]
    all_blocks, all_fams, all_starts, sizes = [], [], [], []
    for c in range(C.n_obj):
        per_d = _comma_homs(phi, c, "under")
        G = ElementGraph()
        start = {}
        for d in range(D.n_obj):
            start[d] = len(G.sizes)
            for u in per_d[d]:
                G.add_block((d, int(u)), X.sizes[d])
        for f in gens:
            d, d2 = int(D.dom[f]), int(D.cod[f])
            pf = int(phi.mor_map[f])
            for u in per_d[d]:
                u2 = int(C.comp[pf, u])
                G.add_edge(start[d] + int(hidx[u]), start[d2] + int(hidx[u2]), X.actions[f])
        fam = G.limit()
        all_blocks.append(G.keys)
        all_fams.append(fam)
        all_starts.append(start)
        sizes.append(len(fam))
    actions = []
    for h in range(C.n_mor):
        c, c2 = int(C.dom[h]), int(C.cod[h])
        # (h . xi)_{(d, u')} = xi_{(d, u' o h)}
        cols = [all_starts[c][d] + int(hidx[C.comp[u2, h]]) for (d, u2) in all_blocks[c2]]
        moved = all_fams[c][:, cols] if len(cols) else np.zeros((len(all_fams[c]), 0), dtype=np.int64)
        img = _row_lookup(all_fams[c2], moved)
        if (img < 0).any():
            raise AssertionError("right Kan extension action produced an incompatible family")
        actions.append(img)
    labels = [tuple(tuple(int(v) for v in row) for row in fam) for fam in all_fams]
    out = SetDiagram(C, sizes, actions, labels=labels, name=f"ran({X.name})")
    return KanExtension(phi, X, out, "ran", all_blocks, [], [], [], all_fams, all_starts)


def lan_map(phi: FunctorData, f: DiagramMap, src: KanExtension | None = None,
            tgt: KanExtension | None = None) -> DiagramMap:
    """``phi_!(f)`` on representatives."""
    src = src or lan(phi, f.source)
    tgt = tgt or lan(phi, f.target)
    comps = []
    for c in range(phi.target.n_obj):
        comps.append([tgt.node(c, d, u, int(f.components[d][x])) for (d, u, x) in src.reps[c]])
    return DiagramMap(src.diagram, tgt.diagram, comps)


def ran_map(phi: FunctorData, f: DiagramMap, src: KanExtension | None = None,
            tgt: KanExtension | None = None) -> DiagramMap:
    src = src or ran(phi, f.source)
    tgt = tgt or ran(phi, f.target)
    comps = []
    for c in range(phi.target.n_obj):
        fam = src.families[c]
        moved = np.empty_like(fam)
        for j, (d, u) in enumerate(src.blocks[c]):
            moved[:, j] = f.components[d][fam[:, j]] if len(fam) else []
        comps.append(_row_lookup(tgt.families[c], moved))
    return DiagramMap(src.diagram, tgt.diagram, comps)


def lan_unit(K: KanExtension) -> DiagramMap:
    """``X -> phi^* phi_! X``."""
    phi, X = K.phi, K.X
    D, C = phi.source, phi.target
    comps = []
    for d in range(D.n_obj):
        c = int(phi.obj_map[d])
        comps.append([K.node(c, d, int(C.ident[c]), x) for x in range(X.sizes[d])])
    return DiagramMap(X, K.diagram.restrict(phi), comps)


def lan_counit(K: KanExtension, Y: SetDiagram) -> DiagramMap:
    """``phi_! phi^* Y -> Y`` where ``K = lan(phi, phi^* Y)``."""
    C = K.phi.target
    comps = []
    for c in range(C.n_obj):
        comps.append([int(Y.actions[u][x]) for (d, u, x) in K.reps[c]])
    return DiagramMap(K.diagram, Y, comps)


def ran_unit(K: KanExtension, Y: SetDiagram) -> DiagramMap:
    """``Y -> phi_* phi^* Y`` where ``K = ran(phi, phi^* Y)``."""
    C = K.phi.target
    comps = []
    for c in range(C.n_obj):
        if not len(K.blocks[c]):
            comps.append(np.zeros(Y.sizes[c], dtype=np.int64))
            continue
        rows = np.stack([Y.actions[u][np.arange(Y.sizes[c])] for (d, u) in K.blocks[c]], axis=1)
        comps.append(_row_lookup(K.families[c], rows))
    return DiagramMap(Y, K.diagram, comps)


def ran_counit(K: KanExtension) -> DiagramMap:
    """``phi^* phi_* X -> X``."""
    phi, X = K.phi, K.X
    D, C = phi.source, phi.target
    comps = []
    for d in range(D.n_obj):
        c = int(phi.obj_map[d])
        j = K.block(c, d, int(C.ident[c]))
        comps.append(K.families[c][:, j])
    return DiagramMap(K.diagram.restrict(phi), X, comps)


# ---------------------------------------------------------------------------
# fibrations and fiber shortcuts


def cocartesian_mask(phi: FunctorData) -> np.ndarray:
    """Which morphisms of the source are cocartesian for ``phi`` (cached on ``phi``)."""
    cached = phi.__dict__.get("_cocartesian")
    if cached is not None:
        return cached
    D, C = phi.source, phi.target
    F = phi.mor_map
    mask = np.zeros(D.n_mor, dtype=bool)
    for f in range(D.n_mor):
        d, d1 = int(D.dom[f]), int(D.cod[f])
        pf = int(F[f])
        # every g: d -> d2 and h with h o phi(f) = phi(g) needs exactly one k with k o f = g, phi(k) = h
        ks = D.out_of(d1)
        pairs = D.comp[ks, f] * C.n_mor + F[ks]
        if len(np.unique(pairs)) != len(pairs):
            continue
        hs = C.out_of(int(phi.obj_map[d1]))
        wanted = np.bincount(C.comp[hs, pf], minlength=C.n_mor)
        mask[f] = wanted[F[D.out_of(d)]].sum() == len(pairs)
    mask.setflags(write=False)
    phi.__dict__["_cocartesian"] = mask
    return mask


def is_cocartesian(phi: FunctorData, f: int) -> bool:
    """Every ``g: d -> d''`` with ``phi(g) = h o phi(f)`` factors uniquely as ``k o f`` with ``phi(k) = h``."""
    return bool(cocartesian_mask(phi)[f])


def is_cartesian(phi: FunctorData, f: int) -> bool:
    return is_cocartesian(phi.op(), f)


def cocartesian_lift(phi: FunctorData, d: int, h: int) -> int | None:
    D = phi.source
    out = D.out_of(d)
    hits = out[(phi.mor_map[out] == h) & cocartesian_mask(phi)[out]]
    return int(hits[0]) if len(hits) else None


def is_cofibered(phi: FunctorData) -> tuple[bool, tuple | None]:
    """Every (object, morphism out of its image) pair has a cocartesian lift, and
    cocartesian morphisms are closed under composition."""
    D, C = phi.source, phi.target
    for d in range(D.n_obj):
        for h in C.out_of(int(phi.obj_map[d])):
            if cocartesian_lift(phi, d, int(h)) is None:
                return False, (d, int(h))
    cocart = cocartesian_mask(phi)
    g, f, gf = D.composable_pairs
    bad = cocart[g] & cocart[f] & ~cocart[gf]
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        return False, ("composite", int(g[i]), int(f[i]))
    return True, None


def is_fibered(phi: FunctorData) -> tuple[bool, tuple | None]:
    return is_cofibered(phi.op())


def fiber(phi: FunctorData, c: int) -> tuple[FinCategory, FunctorData]:
    from .fincat import subcategory
    D = phi.source
    objs = [d for d in range(D.n_obj) if phi.obj_map[d] == c]
    idc = phi.target.ident[c]
    mors = [m for m in range(D.n_mor) if phi.mor_map[m] == idc]
    return subcategory(D, objs, mors, name=f"fiber({phi.target.objects[c]})")


@dataclass
class FiberKan:
    """A Kan extension computed fiberwise.

    ``reps[c]`` lists ``(d, x)`` representatives (left case); ``families[c]``
    are compatible families over the fiber objects ``objects[c]`` (right case).
    """
    diagram: SetDiagram
    objects: list
    reps: list
    families: list


def lan_fiber(phi: FunctorData, X: SetDiagram) -> FiberKan:
    """``phi_! X`` for cofibered ``phi``: colimits over fibers, transported along cocartesian lifts."""
    ok, wit = is_cofibered(phi)
    if not ok:
        raise PreconditionError("functor is not cofibered", wit)
    D, C = phi.source, phi.target
    sizes, classes, reps, objs = [], [], [], []
    for c in range(C.n_obj):
        F, inc = fiber(phi, c)
        k = colimit(X.restrict(inc))
        objs.append([int(o) for o in inc.obj_map])
        sizes.append(k.apex_size)
        classes.append({int(inc.obj_map[o]): k.legs[o] for o in range(F.n_obj)})
        reps.append([(int(inc.obj_map[o]), x) for (o, x) in k.representatives])
    actions = []
    for h in range(C.n_mor):
        c = int(C.dom[h])
        c2 = int(C.cod[h])
        img = []
        for d, x in reps[c]:
            f = cocartesian_lift(phi, d, h)
            img.append(int(classes[c2][int(D.cod[f])][X.actions[f][x]]))
        actions.append(img)
    return FiberKan(SetDiagram(C, sizes, actions, name=f"lan_fiber({X.name})"), objs, reps, [])


def ran_fiber(phi: FunctorData, X: SetDiagram) -> FiberKan:
    """``phi_* X`` for fibered ``phi``: limits over fibers, transported along cartesian lifts."""
    ok, wit = is_fibered(phi)
    if not ok:
        raise PreconditionError("functor is not fibered", wit)
    D, C = phi.source, phi.target
    fams, objs = [], []
    for c in range(C.n_obj):
        F, inc = fiber(phi, c)
        k = limit(X.restrict(inc))
        fams.append(k.families)
        objs.append([int(o) for o in inc.obj_map])
    actions = []
    for h in range(C.n_mor):
        c, c2 = int(C.dom[h]), int(C.cod[h])
        # a family over the fiber at c is pushed to c2 through cartesian lifts f: d -> d2 over h
        cols = []
        for d2 in objs[c2]:
            f = cocartesian_lift(phi.op(), d2, h)
            d = int(D.dom[f])
            cols.append((objs[c].index(d), f))
        moved = np.zeros((len(fams[c]), len(cols)), dtype=np.int64)
        for j, (i, f) in enumerate(cols):
            moved[:, j] = X.actions[f][fams[c][:, i]] if len(fams[c]) else []
        actions.append(_row_lookup(fams[c2], moved))
    return FiberKan(SetDiagram(C, [len(f) for f in fams], actions, name=f"ran_fiber({X.name})"), objs, [], fams)


# ---------------------------------------------------------------------------
# pullbacks of categories and projection formulas


def is_pullback_square(top: FunctorData, left: FunctorData, right: FunctorData, bottom: FunctorData):
    """Is ``P --top--> D``, ``P --left--> A``, ``A --bottom--> C``, ``D --right--> C`` a pullback?

    Returns ``(ok, witness)``.  The induced functor to the strict fiber product
    must be bijective on objects and on morphisms.
    """
    P, D, A = top.source, top.target, left.target
    if not (np.array_equal(right.obj_map[top.obj_map], bottom.obj_map[left.obj_map])
            and np.array_equal(right.mor_map[top.mor_map], bottom.mor_map[left.mor_map])):
        return False, ("square does not commute",)
    obj_pairs = {(int(a), int(d)) for a in range(A.n_obj) for d in range(D.n_obj)
                 if bottom.obj_map[a] == right.obj_map[d]}
    got = set(zip(left.obj_map.tolist(), top.obj_map.tolist()))
    if len(got) != P.n_obj or got != obj_pairs:
        missing = sorted(obj_pairs - got)
        return False, ("objects", missing[:1] or "duplicate")
    mor_pairs = {(int(a), int(d)) for a in range(A.n_mor) for d in range(D.n_mor)
                 if bottom.mor_map[a] == right.mor_map[d]}
    got = set(zip(left.mor_map.tolist(), top.mor_map.tolist()))
    if len(got) != P.n_mor or got != mor_pairs:
        missing = sorted(mor_pairs - got)
        return False, ("morphisms", missing[:1] or "duplicate")
    return True, None


@dataclass
class IsoWitness:
    """A comparison map together with the verdict that it is an isomorphism."""
    map: DiagramMap
    is_iso: bool
    counterexample: object = None


def projection_formula_check(top: FunctorData, left: FunctorData, right: FunctorData,
                             bottom: FunctorData, X: SetDiagram, variance: str = "cofibered") -> IsoWitness:
    """Compare ``bottom^* right_! X`` with ``left_! top^* X`` (or the ``*`` version when fibered).

    ``X`` lives on ``right.source``.  Hypotheses are verified first.
    """
    ok, wit = is_pullback_square(top, left, right, bottom)
    if not ok:
        raise PreconditionError("square of categories is not a pullback", wit)
    if variance == "cofibered":
        ok, wit = is_cofibered(right)
        if not ok:
            raise PreconditionError("functor is not cofibered", wit)
        big = lan(right, X)
        small = lan(left, X.restrict(top))
        A = left.target
        comps = []
        for a in range(A.n_obj):
            c = int(bottom.obj_map[a])
            comps.append([big.node(c, int(top.obj_map[p]), int(bottom.mor_map[v]), x)
                          for (p, v, x) in small.reps[a]])
        m = DiagramMap(small.diagram, big.diagram.restrict(bottom), comps)
    elif variance == "fibered":
        ok, wit = is_fibered(right)
        if not ok:
            raise PreconditionError("functor is not fibered", wit)
        big = ran(right, X)
        small = ran(left, X.restrict(top))
        A = left.target
        comps = []
        for a in range(A.n_obj):
            c = int(bottom.obj_map[a])
            fam = big.families[c]
            cols = [big.block(c, int(top.obj_map[p]), int(bottom.mor_map[v])) for (p, v) in small.blocks[a]]
            moved = fam[:, cols] if cols else np.zeros((len(fam), 0), dtype=np.int64)
            comps.append(_row_lookup(small.families[a], moved))
        m = DiagramMap(big.diagram.restrict(bottom), small.diagram, comps)
    else:
        raise ValueError("variance must be 'cofibered' or 'fibered'")
    bad = m.validate()
    if not bad.ok:
        return IsoWitness(m, False, bad.violations[0])
    if m.is_iso():
        return IsoWitness(m, True)
    for o, c in enumerate(m.components):
        if len(np.unique(c)) != len(c) or len(c) != m.target.sizes[o]:
            return IsoWitness(m, False, ("object", o))
    return IsoWitness(m, False)


# ---------------------------------------------------------------------------
# pointwise operations on diagrams


def pushout(f: DiagramMap, g: DiagramMap) -> tuple[SetDiagram, DiagramMap, DiagramMap]:
    """Pushout of ``B <-f- A -g-> C``; returns ``(P, B -> P, C -> P)``."""
    A, B, Cd = f.source, f.target, g.target
    if g.source is not A and g.source != A:
        raise ValueError("span maps need a common source")
    shape = A.shape
    sizes, legsB, legsC, reps = [], [], [], []
    for o in range(shape.n_obj):
        G = ElementGraph()
        G.add_block("A", A.sizes[o])
        G.add_block("B", B.sizes[o])
        G.add_block("C", Cd.sizes[o])
        G.add_edge(0, 1, f.components[o])
        G.add_edge(0, 2, g.components[o])
        k, lab = G.colimit()
        lb = lab[G.offsets[1]:G.offsets[1] + B.sizes[o]]
        lc = lab[G.offsets[2]:G.offsets[2] + Cd.sizes[o]]
        # representative of each class: an element of B if possible, else of C
        from_b = np.zeros(k, dtype=bool)
        idx = np.zeros(k, dtype=np.int64)
        idx[lc[::-1]] = np.arange(len(lc))[::-1]
        idx[lb[::-1]] = np.arange(len(lb))[::-1]
        from_b[lb] = True
        if k and not np.isin(np.arange(k), np.concatenate([lb, lc])).all():
            raise AssertionError("pushout class without a representative in either leg")
        sizes.append(k)
        legsB.append(lb)
        legsC.append(lc)
        reps.append((from_b, idx))
    actions = []
    for m in range(shape.n_mor):
        a, b = int(shape.dom[m]), int(shape.cod[m])
        from_b, idx = reps[a]
        img = np.empty(len(idx), dtype=np.int64)
        if from_b.any():
            img[from_b] = legsB[b][B.actions[m][idx[from_b]]]
        if (~from_b).any():
            img[~from_b] = legsC[b][Cd.actions[m][idx[~from_b]]]
        actions.append(img)
    P = SetDiagram(shape, sizes, actions, name="pushout")
    return P, DiagramMap(B, P, legsB), DiagramMap(Cd, P, legsC)


def pullback(f: DiagramMap, g: DiagramMap) -> tuple[SetDiagram, DiagramMap, DiagramMap]:
    """Pullback of ``B -f-> A <-g- C``; returns ``(P, P -> B, P -> C)``."""
    B, Cd = f.source, g.source
    shape = B.shape
    pairs = []
    for o in range(shape.n_obj):
        fb, gc = f.components[o], g.components[o]
        eq = fb[:, None] == gc[None, :]
        pairs.append(np.argwhere(eq))
    index = [{(int(p[0]), int(p[1])): i for i, p in enumerate(pr)} for pr in pairs]
    actions = []
    for m in range(shape.n_mor):
        a, b = int(shape.dom[m]), int(shape.cod[m])
        actions.append([index[b][(int(B.actions[m][x]), int(Cd.actions[m][y]))] for x, y in pairs[a]])
    P = SetDiagram(shape, [len(p) for p in pairs], actions,
                   labels=[tuple((int(x), int(y)) for x, y in p) for p in pairs], name="pullback")
    return P, DiagramMap(P, B, [p[:, 0] for p in pairs]), DiagramMap(P, Cd, [p[:, 1] for p in pairs])


def subdiagram(X: SetDiagram, keep: Sequence) -> tuple[SetDiagram, DiagramMap]:
    """The subdiagram on the element subsets ``keep[o]`` (must be closed), with its inclusion."""
    keep = [np.array(sorted(set(int(v) for v in k)), dtype=np.int64) for k in keep]
    pos = []
    for o, k in enumerate(keep):
        p = np.full(X.sizes[o], -1, dtype=np.int64)
        p[k] = np.arange(len(k))
        pos.append(p)
    actions = []
    C = X.shape
    for m in range(C.n_mor):
        a, b = int(C.dom[m]), int(C.cod[m])
        img = pos[b][X.actions[m][keep[a]]] if len(keep[a]) else np.zeros(0, dtype=np.int64)
        if (img < 0).any():
            raise ValueError(f"element subsets are not closed under morphism {m}")
        actions.append(img)
    labels = [tuple(X.labels[o][int(i)] for i in k) for o, k in enumerate(keep)]
    S = SetDiagram(C, [len(k) for k in keep], actions, labels=labels)
    return S, DiagramMap(S, X, keep)


def generated_subdiagram(X: SetDiagram, seeds: Sequence[tuple[int, int]]) -> tuple[SetDiagram, DiagramMap]:
    """Smallest subdiagram containing the given ``(object, element)`` pairs."""
    C = X.shape
    keep = [set() for _ in range(C.n_obj)]
    for o, x in seeds:
        for m in C.out_of(o):
            keep[int(C.cod[m])].add(int(X.actions[m][x]))
    return subdiagram(X, keep)


def image(f: DiagramMap) -> tuple[SetDiagram, DiagramMap]:
    """Pointwise image of ``f`` as a subdiagram of the target."""
    return subdiagram(f.target, [np.unique(c) for c in f.components])


def quotient(X: SetDiagram, pairs: Sequence[tuple[int, int, int]]) -> tuple[SetDiagram, DiagramMap]:
    """Quotient of ``X`` by the smallest congruence identifying the pairs ``(object, x, y)``."""
    C = X.shape
    G = ElementGraph()
    for o in range(C.n_obj):
        G.add_block(o, X.sizes[o])
    for o, x, y in pairs:
        for m in C.out_of(o):
            b = int(C.cod[m])
            xb, yb = int(X.actions[m][x]), int(X.actions[m][y])
            if xb != yb:
                # single-element edges: a "map" from a virtual block glues xb and yb
                k = G.add_block(("glue", b, xb, yb), 1)
                G.add_edge(k, b, [xb])
                G.add_edge(k, b, [yb])
    k, lab = G.colimit()
    comps = []
    sizes = []
    for o in range(C.n_obj):
        cl = lab[G.offsets[o]:G.offsets[o] + X.sizes[o]]
        uniq, inv = np.unique(cl, return_inverse=True)
        comps.append(inv.astype(np.int64))
        sizes.append(len(uniq))
    actions = []
    for m in range(C.n_mor):
        a, b = int(C.dom[m]), int(C.cod[m])
        img = np.zeros(sizes[a], dtype=np.int64)
        img[comps[a]] = comps[b][X.actions[m]]
        actions.append(img)
    Q = SetDiagram(C, sizes, actions, name="quotient")
    return Q, DiagramMap(X, Q, comps)


def coproduct(X: SetDiagram, Y: SetDiagram) -> tuple[SetDiagram, DiagramMap, DiagramMap]:
    C = X.shape
    actions = []
    for m in range(C.n_mor):
        b = int(C.cod[m])
        actions.append(np.concatenate([X.actions[m], Y.actions[m] + X.sizes[b]]))
    labels = [tuple(("L", l) for l in X.labels[o]) + tuple(("R", l) for l in Y.labels[o]) for o in range(C.n_obj)]
    S = SetDiagram(C, [a + b for a, b in zip(X.sizes, Y.sizes)], actions, labels=labels)
    return (S, DiagramMap(X, S, [np.arange(s) for s in X.sizes]),
            DiagramMap(Y, S, [np.arange(s) + X.sizes[o] for o, s in enumerate(Y.sizes)]))


def product(X: SetDiagram, Y: SetDiagram) -> SetDiagram:
    C = X.shape
    actions = []
    for m in range(C.n_mor):
        b = int(C.cod[m])
        ax, ay = X.actions[m], Y.actions[m]
        actions.append((ax[:, None] * Y.sizes[b] + ay[None, :]).reshape(-1))
    labels = [tuple((lx, ly) for lx in X.labels[o] for ly in Y.labels[o]) for o in range(C.n_obj)]
    return SetDiagram(C, [a * b for a, b in zip(X.sizes, Y.sizes)], actions, labels=labels,
                      name=f"{X.name}x{Y.name}")


def product_map(f: DiagramMap, g: DiagramMap) -> DiagramMap:
    S = product(f.source, g.source)
    T = product(f.target, g.target)
    comps = []
    for o in range(S.shape.n_obj):
        comps.append((f.components[o][:, None] * g.target.sizes[o] + g.components[o][None, :]).reshape(-1))
    return DiagramMap(S, T, comps)
