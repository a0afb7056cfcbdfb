"""EZ-categories: degeneracies, boundaries, standard decompositions and normal monomorphisms.

Presheaves on ``C`` are diagrams on ``C.op``.  For a morphism ``u: r -> s`` of
``C`` and a presheaf ``X``, ``X.actions[u]`` maps ``X_s`` to ``X_r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .diagram import (DiagramMap, PreconditionError, SetDiagram, coproduct, pushout, representable,
                      subdiagram)
from .equivariant import free_extension_check
from .fincat import FinCategory
from .reedy import (AxiomResult, GeneralizedReedyStructure, ReedyReport, _pos, relative_latching, skeleton,
                    skeleton_map, validate_reedy)


class EZStructure:
    """A category with a degree function, read as a candidate EZ-category."""

    def __init__(self, category: FinCategory, degree: Sequence[int], name: str = ""):
        self.category = category
        self.degree = np.asarray(list(degree), dtype=np.int64)
        if len(self.degree) != category.n_obj:
            raise ValueError("one degree per object is required")
        self.name = name or category.name

    @classmethod
    def from_reedy(cls, S: GeneralizedReedyStructure) -> EZStructure:
        return cls(S.category, S.degree, name=S.name)

    @cached_property
    def faces(self) -> np.ndarray:
        return self.category.flags["mono"]

    @cached_property
    def degeneracies(self) -> np.ndarray:
        return self.category.flags["split_epi"]

    @cached_property
    def reedy(self) -> GeneralizedReedyStructure:
        """Plus = monomorphisms, minus = split epimorphisms."""
        return GeneralizedReedyStructure(self.category, self.degree, self.faces, self.degeneracies,
                                         dualizable=True, name=self.name)

    @cached_property
    def presheaf_structure(self) -> GeneralizedReedyStructure:
        """The structure on ``C.op`` that the covariant machinery uses for presheaves."""
        return self.reedy.opposite()

    @cached_property
    def report(self) -> EZReport:
        """Full validation, absolute pushouts included."""
        return validate_ez(self.category, self.degree)

    @cached_property
    def basic_report(self) -> EZReport:
        """Axioms (i), (ii) and the induced structure; the pushout search is skipped."""
        if "report" in self.__dict__:
            return self.report
        return validate_ez(self.category, self.degree, pushouts=False)

    def require(self, full: bool = False) -> EZStructure:
        """Refuse categories whose monos and split epis do not even form the expected structure.

        With ``full=True`` the absolute-pushout axiom is demanded as well.
        """
        rep = self.report if full else self.basic_report
        if not rep.ok:
            raise PreconditionError(f"{self.name} is not an EZ-category", rep.first_failure())
        return self

    @property
    def pushout_axiom(self) -> bool | None:
        """Verdict of axiom (iii) if the full report has been computed."""
        rep = self.__dict__.get("report")
        return None if rep is None else rep.axioms["iii"].passed

    def representable(self, r: int) -> SetDiagram:
        return representable(self.category, r)

    def __repr__(self):
        return f"<EZStructure {self.name}>"


def ez_structure(S: GeneralizedReedyStructure, full: bool = False) -> EZStructure:
    """The EZ structure on the category of ``S``, validated."""
    return EZStructure.from_reedy(S).require(full)


# ---------------------------------------------------------------------------
# Yoneda


def _representable(C: FinCategory, r: int) -> SetDiagram:
    """Shared, cached representable; callers must not mutate it."""
    cache = C.__dict__.setdefault("_representable_cache", {})
    if r not in cache:
        cache[r] = representable(C, r)
    return cache[r]


def yoneda_map(C: FinCategory, f: int) -> DiagramMap:
    """``C[r] -> C[s]`` for ``f: r -> s``, postcomposition with ``f``."""
    r, s = int(C.dom[f]), int(C.cod[f])
    A, B = _representable(C, r), _representable(C, s)
    hidx = C.hom_index
    comps = [hidx[C.comp[f, C.hom(x, r)]] if len(C.hom(x, r)) else [] for x in range(C.n_obj)]
    return DiagramMap(A, B, comps)


def element_map(X: SetDiagram, r: int, x: int) -> DiagramMap:
    """The map ``C[r] -> X`` classifying ``x ∈ X_r``."""
    C = X.shape.op
    Y = representable(C, r)
    comps = [np.array([X.actions[u][x] for u in C.hom(o, r)], dtype=np.int64) for o in range(C.n_obj)]
    return DiagramMap(Y, X, comps)


# ---------------------------------------------------------------------------
# validation


@dataclass
class EZReport:
    axioms: dict[str, AxiomResult]
    reedy: ReedyReport
    pushouts_checked: int = 0

    @property
    def ok(self) -> bool:
        return all(a.passed for a in self.axioms.values()) and self.reedy.ok

    def first_failure(self):
        for k, a in self.axioms.items():
            if not a.passed:
                return (k, a.counterexamples[:1])
        if not self.reedy.ok:
            return ("reedy", self.reedy.failures())
        return None

    def to_json(self, category: FinCategory | None = None):
        return {"ok": self.ok, "pushouts_checked": self.pushouts_checked,
                "axioms": {k: {"passed": a.passed, "count": a.count,
                               "counterexamples": [_jsonable(w) for w in a.counterexamples]}
                           for k, a in self.axioms.items()},
                "reedy": self.reedy.to_json(category)}


def _jsonable(w):
    if isinstance(w, (tuple, list)):
        return [_jsonable(v) for v in w]
    if isinstance(w, (np.integer,)):
        return int(w)
    return w


def validate_ez(C: FinCategory, degree: Sequence[int], pushouts: bool = True) -> EZReport:
    """Check the three EZ axioms and the induced generalized Reedy structure.

    With ``pushouts=False`` axiom (iii) is not examined and reported as passed.
    """
    degree = np.asarray(list(degree), dtype=np.int64)
    flags = C.flags
    mono, split = flags["mono"], flags["split_epi"]
    iso = C.isos
    ax = {k: AxiomResult(True) for k in ("i", "ii", "iii")}
    dd, dc = degree[C.dom], degree[C.cod]
    for m in np.flatnonzero(mono):
        m = int(m)
        if iso[m] and dd[m] != dc[m]:
            ax["i"].fail((m, "invertible monomorphism changes degree"))
        if not iso[m] and not dc[m] > dd[m]:
            ax["i"].fail((m, "non-invertible monomorphism does not raise degree"))
    for a in range(C.n_obj):
        for b in range(C.n_obj):
            hom = C.hom(a, b)
            if not len(hom):
                continue
            found = np.zeros(C.n_mor, dtype=bool)
            for s in range(C.n_obj):
                P = C.hom(a, s)
                P = P[split[P]]
                M = C.hom(s, b)
                M = M[mono[M]]
                if len(P) and len(M):
                    found[C.comp[np.ix_(M, P)].ravel()] = True
            for f in hom[~found[hom]]:
                ax["ii"].fail((int(f), "no split epi / mono factorization"))
    count = 0
    for r in range(C.n_obj if pushouts else 0):
        outs = [int(u) for u in C.out_of(r) if split[u]]
        for i, p in enumerate(outs):
            for q in outs[i:]:
                count += 1
                if absolute_pushout(C, p, q) is None:
                    ax["iii"].fail((p, q, "no absolute pushout"))
    rs = validate_reedy(GeneralizedReedyStructure(C, degree, mono, split, dualizable=True), check_dual=True)
    return EZReport(ax, rs, count)


# ---------------------------------------------------------------------------
# absolute pushouts


@dataclass
class AbsolutePushout:
    apex: int
    left: int                    # s -> t
    right: int                   # s' -> t
    presheaf_pushout: SetDiagram


def absolute_pushout(C: FinCategory, rho: int, rho2: int) -> AbsolutePushout | None:
    """Absolute pushout of two split epis with common domain, or ``None``.

    The pushout of the Yoneda images is computed in presheaves; a square in ``C``
    is returned when that pushout is representable through it.
    """
    r = int(C.dom[rho])
    if int(C.dom[rho2]) != r:
        raise ValueError("the two morphisms need a common domain")
    split = C.flags["split_epi"]
    if not (split[rho] and split[rho2]):
        raise PreconditionError("absolute pushouts are only formed for split epimorphisms", (rho, rho2))
    s, s2 = int(C.cod[rho]), int(C.cod[rho2])
    P, inl, inr = pushout(yoneda_map(C, rho), yoneda_map(C, rho2))
    # class of u: x -> r in P
    quot = [inl.components[x][C.hom_index[C.comp[rho, C.hom(x, r)]]] if len(C.hom(x, r)) else np.zeros(0, dtype=np.int64)
            for x in range(C.n_obj)]
    sizes = np.array(P.sizes)
    cands = []
    for t in range(C.n_obj):
        if any(len(C.hom(x, t)) != sizes[x] for x in range(C.n_obj)):
            continue
        A = C.hom(s, t)
        A = A[np.argsort(~C.is_identity[A], kind="stable")]
        B = C.hom(s2, t)
        for a in A:
            c = int(C.comp[a, rho])
            bs = B[C.comp[B, rho2] == c]
            if len(bs):
                cands.append((t, int(a), int(bs[0]), c))
    cands.sort(key=lambda k: k[0] != s)
    for t, a, b, c in cands:
        ok = True
        for x in range(C.n_obj):
            h = C.hom(x, r)
            if not len(h):
                continue
            img = C.comp[c, h]
            # the induced map P_x -> Hom(x, t) must be a bijection
            pairs = set(zip(quot[x].tolist(), img.tolist()))
            if len(pairs) != sizes[x] or len({v for _, v in pairs}) != sizes[x]:
                ok = False
                break
        if ok:
            return AbsolutePushout(t, a, b, P)
    return None


# ---------------------------------------------------------------------------
# degenerate elements and standard decompositions


def degenerate_mask(E: EZStructure, X: SetDiagram) -> list[np.ndarray]:
    """Per object, the elements in the image of a non-invertible degeneracy."""
    C = E.require().category
    out = []
    for r in range(C.n_obj):
        m = np.zeros(X.sizes[r], dtype=bool)
        for u in C.out_of(r):
            if E.degeneracies[u] and not C.isos[u]:
                m[X.actions[u]] = True
        out.append(m)
    return out


def is_degenerate(E: EZStructure, X: SetDiagram, r: int, x: int) -> bool:
    return bool(degenerate_mask(E, X)[r][x])


@dataclass
class StandardDecomposition:
    obj: int
    element: int
    degeneracy: int                          # rho: r ->> s
    base: int                                # s
    nondegenerate: int                       # sigma in X_s
    all_decompositions: list[tuple[int, int]] = field(default_factory=list)
    connecting: list[list[int]] = field(default_factory=list)

    @property
    def essentially_unique(self) -> bool:
        return all(len(c) == 1 for c in self.connecting)


def standard_decomposition(E: EZStructure, X: SetDiagram, r: int, x: int,
                           degenerate: list[np.ndarray] | None = None) -> StandardDecomposition:
    """``x = X(rho)(sigma)`` with ``rho`` a degeneracy and ``sigma`` non-degenerate."""
    C = E.category
    degenerate = degenerate if degenerate is not None else degenerate_mask(E, X)
    degs = [int(u) for u in C.out_of(r) if E.degeneracies[u]]
    degs.sort(key=lambda u: (int(E.degree[C.cod[u]]), u))
    found = []
    for u in degs:
        s = int(C.cod[u])
        hits = np.flatnonzero((X.actions[u] == x) & ~degenerate[s])
        found += [(u, int(y)) for y in hits]
    if not found:
        raise AssertionError("element without a standard decomposition")
    u0, y0 = found[0]
    s0 = int(C.cod[u0])
    connecting = []
    for u, y in found:
        s = int(C.cod[u])
        th = C.hom(s0, s)
        th = th[C.isos[th]]
        # theta rho0 = rho and theta^*(y) = y0
        ok = th[(C.comp[th, u0] == u) & (np.array([X.actions[t][y] for t in th], dtype=np.int64) == y0)] \
            if len(th) else th
        connecting.append([int(t) for t in ok])
    return StandardDecomposition(r, x, u0, s0, y0, found, connecting)


# ---------------------------------------------------------------------------
# boundaries and skeleton images


def boundary(E: EZStructure, r: int, check: bool = False) -> tuple[SetDiagram, DiagramMap]:
    """``∂C[r] ⊆ C[r]``: elements factoring through a non-invertible face."""
    C = E.require().category
    Y = representable(C, r)
    keep = []
    hidx = C.hom_index
    faces = [int(i) for i in C.into(r) if E.faces[i] and not C.isos[i]]
    for x in range(C.n_obj):
        m = np.zeros(Y.sizes[x], dtype=bool)
        for i in faces:
            v = C.hom(x, int(C.dom[i]))
            if len(v):
                m[hidx[C.comp[i, v]]] = True
        keep.append(np.flatnonzero(m))
    B, inc = subdiagram(Y, keep)
    B.name = f"∂{Y.name}"
    if check:
        sk = skeleton(E.presheaf_structure, Y, int(E.degree[r]) - 1)
        img = [np.unique(c) for c in sk.counit.components]
        if not (sk.counit.is_mono() and all(np.array_equal(a, b) for a, b in zip(img, keep))):
            raise AssertionError("boundary differs from the skeleton one degree down")
    return B, inc


def skeleton_image(E: EZStructure, X: SetDiagram, n: int) -> list[np.ndarray]:
    """Brute force ``X^(n)``: elements ``X(u)(y)`` with ``u: r -> s``, ``d(s) <= n``."""
    C = E.category
    out = []
    for r in range(C.n_obj):
        m = np.zeros(X.sizes[r], dtype=bool)
        for u in C.out_of(r):
            if E.degree[C.cod[u]] <= n:
                m[X.actions[u]] = True
        out.append(np.flatnonzero(m))
    return out


@dataclass
class SkeletonImageCheck:
    n: int
    injective: bool
    image_matches: bool
    mismatch: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.injective and self.image_matches


def skeleton_image_check(E: EZStructure, X: SetDiagram, n: int) -> SkeletonImageCheck:
    """Is the counit ``sk_n X -> X`` injective with image ``X^(n)``?"""
    E.require()
    sk = skeleton(E.presheaf_structure, X, n)
    inj = sk.counit.is_mono()
    brute = skeleton_image(E, X, n)
    for r, (c, b) in enumerate(zip(sk.counit.components, brute)):
        if not np.array_equal(np.unique(c), b):
            return SkeletonImageCheck(n, inj, False, (r, sorted(set(b.tolist()) ^ set(np.unique(c).tolist()))))
    return SkeletonImageCheck(n, inj, True)


# ---------------------------------------------------------------------------
# normal monomorphisms


def _map_from_pushout(P: SetDiagram, inB: DiagramMap, inC: DiagramMap, toB: DiagramMap,
                      toC: DiagramMap) -> DiagramMap | None:
    """The map out of a pushout determined by its legs, or ``None`` if they disagree."""
    target = toB.target
    comps = []
    for o in range(P.shape.n_obj):
        c = np.full(P.sizes[o], -1, dtype=np.int64)
        for leg, f in ((inB, toB), (inC, toC)):
            idx, val = leg.components[o], f.components[o]
            prev = c[idx]
            if ((prev >= 0) & (prev != val)).any():
                return None
            c[idx] = val
        if (c < 0).any():
            return None
        comps.append(c)
    return DiagramMap(P, target, comps)


def _lan_inclusion(lo, hi) -> DiagramMap:
    """The canonical map ``sk_m X -> sk_n X`` for ``m <= n`` (skeleta as returned by :func:`skeleton`)."""
    if lo.kan is None:
        return DiagramMap(lo.diagram, hi.diagram, [[] for _ in lo.diagram.sizes])
    comps = []
    tl, th = lo.truncation, hi.truncation
    for c, reps in enumerate(lo.kan.reps):
        comps.append([hi.kan.node(c, _pos(th, int(tl.obj_map[d])), u, x) for (d, u, x) in reps])
    return DiagramMap(lo.diagram, hi.diagram, comps)


@dataclass
class Cell:
    obj: int
    element: int                  # representative in the new stage
    attaching: DiagramMap         # ∂C[r] -> previous stage


@dataclass
class FiltrationStage:
    n: int
    diagram: SetDiagram           # sk_n(φ)
    from_previous: DiagramMap | None
    cells: list[Cell]
    is_pushout: bool
    witness: object = None


@dataclass
class CellularFiltration:
    stages: list[FiltrationStage]
    reconstructs: bool            # last stage -> Y is an iso

    @property
    def ok(self) -> bool:
        return self.reconstructs and all(s.is_pushout for s in self.stages)

    def cell_count(self) -> int:
        return sum(len(s.cells) for s in self.stages)


def relative_skeleton(E: EZStructure, phi: DiagramMap, n: int, skX=None, skY=None):
    """``X ∪_{sk_n X} sk_n Y`` with legs from ``X`` and ``sk_n Y``."""
    PS = E.presheaf_structure
    skX = skX or skeleton(PS, phi.source, n)
    skY = skY or skeleton(PS, phi.target, n)
    f = skeleton_map(PS, phi, n, skX, skY)
    P, inX, inY = pushout(skX.counit, f)
    return P, inX, inY, skY


def cellular_filtration(E: EZStructure, phi: DiagramMap) -> CellularFiltration:
    """Relative skeleta of ``phi`` with every stage checked to be a cell attachment."""
    C = E.category
    PS = E.presheaf_structure
    X, Y = phi.source, phi.target
    top = int(E.degree.max()) if C.n_obj else -1
    prev = X
    prev_in = (DiagramMap.identity(X), None)     # legs into the previous stage
    prev_skY = None
    to_Y_prev = phi
    stages = []
    for n in range(0, top + 1):
        skY = skeleton(PS, Y, n)
        P, inX, inY, _ = relative_skeleton(E, phi, n, skY=skY)
        # stage map sk_{n-1}(φ) -> sk_n(φ)
        if prev_in[1] is None:
            step = inX
        else:
            j = _lan_inclusion(prev_skY, skY)
            step = _map_from_pushout(prev, prev_in[0], prev_in[1], inX, j.then(inY))
        to_Y = _map_from_pushout(P, inX, inY, phi, skY.counit)
        stage = FiltrationStage(n, P, step, [], False)
        stages.append(stage)
        if step is None or to_Y is None:
            stage.witness = "stage maps are incompatible"
            return CellularFiltration(stages, False)
        if not step.is_mono():
            o = next(o for o, c in enumerate(step.components) if len(np.unique(c)) != len(c))
            stage.witness = ("stage map not injective", o)
            return CellularFiltration(stages, False)
        # cells: Aut(r)-orbits of new elements at objects of degree n, ordered by (object, element)
        cells = []
        for r in E.reedy.objects_of_degree(n):
            hit = np.zeros(P.sizes[r], dtype=bool)
            hit[step.components[r]] = True
            new = np.flatnonzero(~hit)
            seen = set()
            auts = [int(g) for g in C.automorphisms(r)]
            for y in new:
                y = int(y)
                if y in seen:
                    continue
                seen.update(int(P.actions[g][y]) for g in auts)
                cells.append((r, y))
        inverse = []
        for o in range(C.n_obj):
            inv = np.full(P.sizes[o], -1, dtype=np.int64)
            inv[step.components[o]] = np.arange(prev.sizes[o])
            inverse.append(inv)
        comparison_cells = []
        ok = True
        for (r, y) in cells:
            B, inc = boundary(E, r)
            cls = element_map(P, r, y)
            along = inc.then(cls)
            comps = [inverse[o][c] for o, c in enumerate(along.components)]
            if any((c < 0).any() for c in comps):
                ok = False
                stage.witness = ("boundary of a cell does not land in the previous stage", r, y)
                break
            att = DiagramMap(B, prev, comps)
            stage.cells.append(Cell(r, y, att))
            comparison_cells.append((inc, att, cls))
        if ok:
            # pushout of prev <- ⊔∂ -> ⊔C[r], compared with the new stage
            if comparison_cells:
                bd, rep_, att_all, cls_all = _coproduct_cells(comparison_cells, prev, P)
                Q, qprev, qcells = pushout(att_all, bd)
                cmp_ = _map_from_pushout(Q, qprev, qcells, step, cls_all)
            else:
                cmp_ = step
            if cmp_ is None or not cmp_.is_iso():
                stage.witness = ("cell attachment is not a pushout", n)
                ok = False
        stage.is_pushout = ok
        if not ok:
            return CellularFiltration(stages, False)
        prev, prev_in, prev_skY, to_Y_prev = P, (inX, inY), skY, to_Y
    recon = to_Y_prev.is_iso()
    return CellularFiltration(stages, recon)


def _coproduct_cells(cells, prev: SetDiagram, P: SetDiagram):
    """``⊔∂C[r] -> ⊔C[r]``, the attaching map ``⊔∂C[r] -> prev`` and the classifying map ``⊔C[r] -> P``."""
    inc0, att0, cls0 = cells[0]
    Bd, Rep = inc0.source, inc0.target
    bd_comps = list(inc0.components)
    att_comps = list(att0.components)
    cls_comps = list(cls0.components)
    for inc, att, cls in cells[1:]:
        nR = Rep.sizes
        Bd, _, _ = coproduct(Bd, inc.source)
        Rep, _, _ = coproduct(Rep, inc.target)
        bd_comps = [np.concatenate([a, b + nR[o]]) for o, (a, b) in enumerate(zip(bd_comps, inc.components))]
        att_comps = [np.concatenate([a, b]) for a, b in zip(att_comps, att.components)]
        cls_comps = [np.concatenate([a, b]) for a, b in zip(cls_comps, cls.components)]
    return (DiagramMap(Bd, Rep, bd_comps), Rep, DiagramMap(Bd, prev, att_comps), DiagramMap(Rep, P, cls_comps))


@dataclass
class NormalityVerdict:
    via_i: bool
    via_ii: bool
    via_iii: bool
    witness: dict = field(default_factory=dict)
    filtration: CellularFiltration | None = None

    @property
    def agreement(self) -> bool:
        return self.via_i == self.via_ii == self.via_iii

    @property
    def normal(self) -> bool:
        if not self.agreement:
            raise AssertionError(f"normality characterizations disagree: {self.to_json()}")
        return self.via_i

    def to_json(self):
        return {"via_i": self.via_i, "via_ii": self.via_ii, "via_iii": self.via_iii,
                "agreement": self.agreement, "witness": _jsonable_dict(self.witness)}


def _jsonable_dict(d):
    return {k: _jsonable(v) for k, v in d.items()}


def normal_via_latching(E: EZStructure, phi: DiagramMap) -> tuple[bool, object]:
    """Every relative latching map is a free ``Aut(r)``-extension."""
    for r in range(E.category.n_obj):
        chk = free_extension_check(relative_latching(E.presheaf_structure, phi, r))
        if not chk.verdict:
            return False, (r, chk.witness)
    return True, None


def normal_via_isotropy(E: EZStructure, phi: DiagramMap) -> tuple[bool, object]:
    """``phi`` is monic and non-degenerate new elements have trivial isotropy."""
    C = E.category
    if not phi.is_mono():
        o = next(o for o, c in enumerate(phi.components) if len(np.unique(c)) != len(c))
        return False, ("not monic", o)
    Y = phi.target
    deg = degenerate_mask(E, Y)
    for r in range(C.n_obj):
        new = np.ones(Y.sizes[r], dtype=bool)
        new[phi.components[r]] = False
        new &= ~deg[r]
        for g in C.automorphisms(r):
            if C.is_identity[g]:
                continue
            fixed = np.flatnonzero(new & (Y.actions[g] == np.arange(Y.sizes[r])))
            if len(fixed):
                return False, ("isotropy", r, int(fixed[0]), int(g))
    return True, None


def normal_via_cells(E: EZStructure, phi: DiagramMap) -> tuple[bool, object, CellularFiltration]:
    F = cellular_filtration(E, phi)
    if F.ok:
        return True, None, F
    bad = next((s for s in F.stages if not s.is_pushout), None)
    return False, (bad.witness if bad else "reconstruction fails"), F


def is_normal_mono(E: EZStructure, phi: DiagramMap) -> NormalityVerdict:
    """Evaluate the three characterizations independently."""
    E.require()
    a, wa = normal_via_latching(E, phi)
    b, wb = normal_via_isotropy(E, phi)
    c, wc, F = normal_via_cells(E, phi)
    w = {k: v for k, v in (("via_i", wa), ("via_ii", wb), ("via_iii", wc)) if v is not None}
    return NormalityVerdict(a, b, c, w, F)


def boundary_inclusion(E: EZStructure, r: int) -> DiagramMap:
    return boundary(E, r)[1]
