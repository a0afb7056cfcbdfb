"""The acceptance harness: twelve end-to-end checks over the canned corpora.

Every check is deterministic given the seed.  Results carry counts and
witnesses, never timings, so two runs with the same configuration produce
identical reports.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable

import numpy as np

from .crossed import (crossed_from_wide, crossed_isomorphic, total_category, validate_crossed)
from .diagram import DiagramMap, PreconditionError, SetDiagram, representable
from .ez import (EZStructure, absolute_pushout, boundary, degenerate_mask, is_normal_mono, skeleton_image_check,
                 standard_decomposition, validate_ez)
from .fincat import FunctorData, find_isomorphism
from .generators import (axiom_corpus, cyclic_category_periodic, cyclic_crossed_group, cyclic_trunc, fin_trunc,
                         gamma_trunc, simplex_trunc, sym_trunc, symmetric_crossed_group)
from .monoidal import CartesianProduct, pushout_product, quasi_monoidal_check
from .reedy import (degree_slice, global_latching, global_matching, minus_fixed_structure, plus_fixed_structure,
                    restriction_comparison, skeleton_lemma_checks, truncated_structure, validate_reedy)
from .sampling import orbit_quotient, random_mono, random_monos, random_presheaf


@dataclass
class SuiteConfig:
    seed: int = 42
    corpus: str = "default"
    kan_samples: int = 3            # diagrams per category for the Kan-extension comparison
    skeleton_samples: int = 50      # presheaves per category for the skeleton lemmas
    ez_samples: int = 12            # random presheaves per EZ category for decompositions and skeleta
    mono_samples: int = 200         # random monos per EZ category
    pp_samples: int = 100           # pushout-product pairs over the simplex category

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def quick(cls, seed: int = 42) -> SuiteConfig:
        """Small sample counts, for smoke runs."""
        return cls(seed=seed, corpus="quick", kan_samples=1, skeleton_samples=5, ez_samples=3,
                   mono_samples=20, pp_samples=10)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else f"  [{len(self.failures)} failing part(s): " + \
            "; ".join(str(f.get("part", f)) for f in self.failures[:4]) + "]"
        return f"criterion {self.number:2d} {status}  {self.title}{tail}"

    def to_json(self):
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "details": _clean(self.details), "failures": _clean(self.failures)}


@dataclass
class SuiteReport:
    config: SuiteConfig
    results: list[CriterionResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]

    def to_json(self):
        return {"seed": self.config.seed, "config": self.config.to_json(), "ok": self.ok,
                "passed": sum(r.passed for r in self.results), "total": len(self.results),
                "criteria": [r.to_json() for r in self.results]}


def _clean(x):
    """Plain JSON values: numpy scalars to Python, tuples to lists, keys to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


# ---------------------------------------------------------------------------
# corpora


def ez_corpus() -> dict[str, Callable]:
    """Categories for the EZ checks: the simplex, cyclic, symmetric, Gamma and Fin truncations."""
    return {"simplex3": lambda: simplex_trunc(3)[1], "cyclic2": lambda: cyclic_trunc(2)[1],
            "symmetric2": lambda: sym_trunc(2)[1], "gamma2": lambda: gamma_trunc(2)[1],
            "fin2": lambda: fin_trunc(2)[1]}


def _corpus_presheaves(E: EZStructure, rng, count: int) -> list[SetDiagram]:
    C = E.category
    out = [representable(C, r) for r in range(C.n_obj)]
    out += [boundary(E, r)[0] for r in range(C.n_obj)]
    out.append(SetDiagram.terminal(C.op))
    for r in range(C.n_obj):
        for a in C.automorphisms(r):
            if not C.is_identity[a]:
                out.append(orbit_quotient(C, r, int(a)))
                break
    out += [random_presheaf(C, rng, max_pieces=2) for _ in range(count)]
    return out


# ---------------------------------------------------------------------------
# the criteria


def criterion_axioms(cfg: SuiteConfig) -> CriterionResult:
    details, failures = {}, []
    for name, make in axiom_corpus().items():
        S = make()
        rep = validate_reedy(S)
        details[name] = {"morphisms": S.category.n_mor, "dual_checked": rep.check_dual, "ok": rep.ok}
        if not rep.ok:
            failures.append({"part": name, "axioms": rep.failures()})
    return CriterionResult(1, "generalized Reedy axioms on the structure corpus", not failures, details, failures)


def _brute_isos_are_identities(C) -> tuple[bool, int]:
    """Search all pairs for two-sided inverses; report whether only identities have one."""
    found = 0
    for f in range(C.n_mor):
        for g in C.hom(int(C.cod[f]), int(C.dom[f])):
            if C.comp[g, f] == C.ident[C.dom[f]] and C.comp[f, g] == C.ident[C.cod[f]]:
                found += 1
                if not C.is_identity[f]:
                    return False, found
                break
    return True, found


def criterion_strictness(cfg: SuiteConfig) -> CriterionResult:
    failures = []
    _, D3 = simplex_trunc(3)
    L1 = cyclic_trunc(1)[1]
    strict_d3 = validate_reedy(D3).strict
    strict_l1 = validate_reedy(L1).strict
    aut_l1 = len(L1.automorphisms(1))
    only_ids, n_inv = _brute_isos_are_identities(D3.category)
    details = {"simplex3_strict": strict_d3, "cyclic1_strict": strict_l1, "cyclic1_aut_1": aut_l1,
               "simplex3_invertible_morphisms": n_inv, "simplex3_isos_are_identities": only_ids}
    if not strict_d3:
        failures.append({"part": "simplex3 strict"})
    if strict_l1 or aut_l1 != 2:
        failures.append({"part": "cyclic1 non-strict with |Aut([1])| = 2", "aut": aut_l1})
    if not only_ids:
        failures.append({"part": "isos are identities on simplex3"})
    return CriterionResult(2, "strictness", not failures, details, failures)


def criterion_crossed(cfg: SuiteConfig) -> CriterionResult:
    details, failures = {}, []
    for label, G, factor in (("cyclic", cyclic_crossed_group(2), lambda m: m + 1),
                             ("symmetric", symmetric_crossed_group(2), lambda m: factorial(m + 1))):
        rep = validate_crossed(G)
        details[f"{label}_identities"] = {"ok": rep.ok, "violations": rep.counts}
        if not rep.ok:
            failures.append({"part": f"{label} identities", "first": str(rep.violations[0])})
        T = total_category(G).category
        counts = {}
        for m in range(3):
            for n in range(3):
                delta = comb(n + m + 1, m + 1)           # monotone maps [m] -> [n]
                want = factor(m) * delta
                got = len(T.hom(m, n))
                counts[f"{m},{n}"] = got
                if got != want:
                    failures.append({"part": f"{label} hom count", "at": [m, n], "got": got, "want": want})
        details[f"{label}_hom_counts"] = counts
    return CriterionResult(3, "crossed-group identities and hom counts on Δ≤2", not failures, details, failures)


def criterion_round_trip(cfg: SuiteConfig) -> CriterionResult:
    failures = []
    G = cyclic_crossed_group(2)
    T = total_category(G)
    members = [int(m) for m in T.embedding.mor_map]
    R = crossed_from_wide(T.category, members, T.special)
    back = {int(m): i for i, m in enumerate(R.base_inclusion.mor_map)}
    base_map = FunctorData(G.base, R.crossed.base, range(G.base.n_obj),
                           [back[int(T.embedding.mor_map[a])] for a in range(G.base.n_mor)])
    group_maps = [[R.special[r].index(T.special[r][g]) for g in range(G.groups[r].order)]
                  for r in range(G.base.n_obj)]
    iso_crossed = crossed_isomorphic(G, R.crossed, base_map, group_maps)
    comparison_iso = R.comparison.is_isomorphism()
    reference = cyclic_category_periodic(2)
    iso_reference = find_isomorphism(total_category(R.crossed).category, reference) is not None
    details = {"recovered_valid": validate_crossed(R.crossed).ok, "crossed_isomorphic": iso_crossed,
               "comparison_is_isomorphism": comparison_iso, "total_isomorphic_to_periodic_reference": iso_reference,
               "reference_morphisms": reference.n_mor}
    for k in ("recovered_valid", "crossed_isomorphic", "comparison_is_isomorphism",
              "total_isomorphic_to_periodic_reference"):
        if not details[k]:
            failures.append({"part": k})
    return CriterionResult(4, "crossed group recovered from its total category", not failures, details, failures)


def criterion_kan(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed)
    details, failures = {}, []
    for name, make in axiom_corpus().items():
        S = make()
        C = S.category
        diagrams = [random_presheaf(C.op, rng, max_pieces=2) for _ in range(cfg.kan_samples)]
        checked = 0
        for n in S.degrees():
            D = degree_slice(S, n)
            for i, X in enumerate(diagrams):
                for side, comps in (("latching", global_latching(S, X, n, D)),
                                    ("matching", global_matching(S, X, n, D))):
                    for c in comps:
                        checked += 1
                        if not c.ok:
                            failures.append({"part": f"{name} {side} n={n}", "object": c.obj, "sample": i,
                                             "pointwise_vs_comma": c.pointwise_vs_comma,
                                             "comma_vs_fiber": c.comma_vs_fiber,
                                             "projection_formula": c.projection_formula,
                                             "equivariant": c.equivariant})
        details[name] = checked
    return CriterionResult(5, "latching/matching via comma, fiber and pointwise routes", not failures, details,
                           failures)


def _skeleton_categories():
    from .generators import named_group, orbit_category, twisted_triangle
    return {"simplex3": lambda: simplex_trunc(3)[1], "cyclic2": lambda: cyclic_trunc(2)[1],
            "symmetric2": lambda: sym_trunc(2)[1], "gamma2": lambda: gamma_trunc(2)[1],
            "fin2": lambda: fin_trunc(2)[1], "orbit_S3": lambda: orbit_category(named_group("S3"), "minus")[1],
            "cog_triangle": lambda: twisted_triangle()[1]}


def criterion_skeleta(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed + 6)
    details, failures = {}, []
    for name, make in _skeleton_categories().items():
        S = make()
        P = S.opposite()
        bad = 0
        for i in range(cfg.skeleton_samples):
            X = random_presheaf(S.category, rng, max_pieces=2)
            rep = skeleton_lemma_checks(P, X)
            if not rep.ok:
                bad += 1
                failures.append({"part": f"{name} sample {i}", "checks": rep.failures()[:5]})
        details[name] = {"presheaves": cfg.skeleton_samples, "failures": bad}
    return CriterionResult(6, "skeleton/coskeleton lemmas and idempotence", not failures, details, failures)


def criterion_ez(cfg: SuiteConfig) -> CriterionResult:
    details, failures = {}, []
    for name, make in ez_corpus().items():
        S = make()
        rep = validate_ez(S.category, S.degree)
        details[name] = {"ok": rep.ok, "pushouts_checked": rep.pushouts_checked,
                         "axioms": {k: a.passed for k, a in rep.axioms.items()}, "reedy": rep.reedy.ok}
        if not rep.ok:
            axiom, wit = rep.first_failure()
            C = S.category
            named = [[C.names[m] if isinstance(m, (int, np.integer)) else m for m in w]
                     if isinstance(w, (tuple, list)) else w for w in wit]
            failures.append({"part": f"{name} axiom ({axiom})", "witness": named})
    C, _ = simplex_trunc(2)
    s0, s1 = C.index((2, 1, (0, 0, 1))), C.index((2, 1, (0, 1, 1)))
    ap = absolute_pushout(C, s0, s1)
    apex = None if ap is None else C.objects[ap.apex]
    details["absolute_pushout"] = {"rho": C.names[s0], "rho2": C.names[s1], "apex": apex}
    if apex != "[0]":
        failures.append({"part": "absolute pushout of (σ⁰, σ¹)", "apex": apex})
    return CriterionResult(7, "EZ axioms and absolute pushouts", not failures, details, failures)


def criterion_decompositions(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed + 8)
    details, failures = {}, []
    for name, make in ez_corpus().items():
        E = EZStructure.from_reedy(make())
        count, missing, ambiguous = 0, 0, 0
        first = None
        for X in _corpus_presheaves(E, rng, cfg.ez_samples):
            deg = degenerate_mask(E, X)
            for r in range(E.category.n_obj):
                for x in range(X.sizes[r]):
                    count += 1
                    try:
                        d = standard_decomposition(E, X, r, x, deg)
                    except AssertionError:
                        missing += 1
                        continue
                    if not d.essentially_unique:
                        ambiguous += 1
                        if first is None:
                            first = {"presheaf": X.name, "object": E.category.objects[r], "element": x,
                                     "decompositions": [[E.category.names[u], y] for u, y in d.all_decompositions]}
        details[name] = {"elements": count, "without_decomposition": missing, "not_essentially_unique": ambiguous}
        if missing or ambiguous:
            failures.append({"part": name, "without_decomposition": missing, "not_essentially_unique": ambiguous,
                             "witness": first})
    return CriterionResult(8, "standard decompositions exist and are essentially unique", not failures, details,
                           failures)


def criterion_skeleton_images(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed + 9)
    details, failures = {}, []
    for name, make in ez_corpus().items():
        E = EZStructure.from_reedy(make())
        degs = sorted(set(E.degree.tolist()))
        checked, bad, first = 0, 0, None
        for X in _corpus_presheaves(E, rng, cfg.ez_samples):
            for n in [-1] + degs:
                chk = skeleton_image_check(E, X, n)
                checked += 1
                if not chk.ok:
                    bad += 1
                    if first is None:
                        first = {"presheaf": X.name, "n": n, "injective": chk.injective,
                                 "image_matches": chk.image_matches, "mismatch": chk.mismatch}
        details[name] = {"checks": checked, "failures": bad}
        if bad:
            failures.append({"part": name, "failures": bad, "witness": first})
    return CriterionResult(9, "skeleton counit is injective with image the n-skeleton", not failures, details,
                           failures)


def criterion_normal_monos(cfg: SuiteConfig) -> CriterionResult:
    details, failures = {}, []
    for k, (name, make) in enumerate(ez_corpus().items()):
        S = make()
        E = EZStructure.from_reedy(S)
        C = S.category
        maps = [("boundary", r, boundary(E, r)[1]) for r in range(C.n_obj)]
        rng = np.random.default_rng(cfg.seed + 100 + k)
        maps += [("random", i, m) for i, m in enumerate(random_monos(C, rng, cfg.mono_samples, degree=S.degree,
                                                                       max_degree_obj=2))]
        tally = {"checked": 0, "normal": 0, "not_normal": 0, "disagreements": 0}
        first = None
        for kind, i, m in maps:
            v = is_normal_mono(E, m)
            tally["checked"] += 1
            if not v.agreement:
                tally["disagreements"] += 1
                if first is None:
                    first = {"map": f"{kind} {i}", **v.to_json()}
                continue
            tally["normal" if v.via_i else "not_normal"] += 1
            if kind == "boundary" and not v.via_i:
                failures.append({"part": f"{name} boundary inclusion at {C.objects[i]} not normal"})
        details[name] = tally
        if tally["disagreements"]:
            failures.append({"part": name, "disagreements": tally["disagreements"], "witness": first})
    # the quotient of C[1] by the swap in Fin is the standard non-example
    C, S = fin_trunc(2)
    E = EZStructure.from_reedy(S)
    swap = [int(a) for a in C.automorphisms(1) if not C.is_identity[a]][0]
    Q = orbit_quotient(C, 1, swap)
    v = is_normal_mono(E, DiagramMap.from_empty(Q))
    details["swap_quotient"] = v.to_json()
    if not v.agreement or v.via_i:
        failures.append({"part": "swap quotient should be non-normal by all three routes", **v.to_json()})
    return CriterionResult(10, "three characterizations of normal monomorphisms agree", not failures, details,
                           failures)


def criterion_pushout_product(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed + 11)
    C, S = simplex_trunc(3)
    E = EZStructure.from_reedy(S)
    P = CartesianProduct()
    failures = []
    tally = {"pairs": 0, "normal": 0, "monic": 0}
    while tally["pairs"] < cfg.pp_samples:
        a = int(rng.integers(0, 4))
        b = int(rng.integers(0, 4 - a))
        u = random_mono(C, rng, max_degree_obj=a, degree=S.degree)
        v = random_mono(C, rng, max_degree_obj=b, degree=S.degree)
        try:
            pp = pushout_product(P, E, u, v)
        except PreconditionError as e:        # pragma: no cover - sampled targets are always adequate
            failures.append({"part": "pair refused", "reason": str(e)})
            break
        tally["pairs"] += 1
        tally["monic"] += pp.monic
        if pp.verdict.agreement and pp.verdict.via_i:
            tally["normal"] += 1
        else:
            failures.append({"part": f"pair {tally['pairs']}", **pp.verdict.to_json()})
    pairs = [(r, s) for r in range(C.n_obj) for s in range(C.n_obj) if S.degree[r] + S.degree[s] <= 3]
    qm = quasi_monoidal_check(E, P, pairs)
    if not qm.ok:
        failures.append({"part": "quasi-monoidal check", "report": qm.to_json()})
    details = {"pushout_products": tally, "quasi_monoidal": qm.to_json()}
    return CriterionResult(11, "pushout-product of normal monos on Δ≤3 (cartesian)", not failures, details, failures)


def criterion_restriction(cfg: SuiteConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed + 12)
    details, failures = {}, []
    for name, S in (("simplex3", simplex_trunc(3)[1]), ("cyclic2", cyclic_trunc(2)[1])):
        X = random_presheaf(S.category.op, rng, max_pieces=2)
        checked = 0
        for n in S.degrees():
            cases = (("plus-fixed domain", plus_fixed_structure, ("latching",)),
                     ("minus-fixed codomain", minus_fixed_structure, ("matching",)),
                     ("truncation", truncated_structure, ("latching", "matching")))
            for label, make, sides in cases:
                T, F = make(S, n)
                for side in sides:
                    for k in T.degrees():
                        res = restriction_comparison(F, T, S, X, k, side)
                        checked += 1
                        if not res.ok:
                            failures.append({"part": f"{name} {label} {side} n={n} k={k}",
                                             "hypothesis": res.hypothesis, "per_object": res.per_object})
        details[name] = checked
    return CriterionResult(12, "latching/matching restriction comparisons", not failures, details, failures)


CRITERIA = (criterion_axioms, criterion_strictness, criterion_crossed, criterion_round_trip, criterion_kan,
            criterion_skeleta, criterion_ez, criterion_decompositions, criterion_skeleton_images,
            criterion_normal_monos, criterion_pushout_product, criterion_restriction)


def run_suite(cfg: SuiteConfig | None = None, only=None, progress=None) -> SuiteReport:
    """Run the criteria (all, or the numbers in ``only``); ``progress`` is called with each result."""
    cfg = cfg or SuiteConfig()
    results = []
    for number, check in enumerate(CRITERIA, start=1):
        if only and number not in only:
            continue
        res = check(cfg)
        results.append(res)
        if progress:
            progress(res)
    return SuiteReport(cfg, results)


__all__ = ["SuiteConfig", "CriterionResult", "SuiteReport", "run_suite", "CRITERIA", "ez_corpus"]
