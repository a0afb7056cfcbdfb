import numpy as np
import pytest
from hypothesis import given, strategies as st

from genreedy import generators as gen
from genreedy.diagram import DiagramMap, SetDiagram, representable
from genreedy.ez import boundary, ez_structure
from genreedy.fincat import FunctorData
from genreedy.reedy import (GeneralizedReedyStructure, check_degree_slice, coskeleton, degree_slice, factorize,
                            global_latching, global_matching, latching, latching_map, matching, matching_map,
                            minus_fixed_structure, plus_fixed_structure, relative_latching, relative_matching,
                            restriction_comparison, skeleton, skeleton_lemma_checks, truncated_structure,
                            validate_reedy)
from genreedy.sampling import random_presheaf

import oracles

CORPUS = gen.axiom_corpus()


def injective(a) -> bool:
    a = np.asarray(a)
    return len(np.unique(a)) == len(a)


# -- axioms -------------------------------------------------------------------------------------


def test_simplex3_is_strict_and_dualizable(simplex3):
    rep = validate_reedy(simplex3[1], check_dual=True)
    assert rep.ok and rep.strict
    assert not rep.nontrivial_automorphisms


def test_cyclic2_passes_every_axiom_but_is_not_strict(cyclic2):
    L, S, _ = cyclic2
    rep = validate_reedy(S, check_dual=True)
    assert rep.ok and not rep.strict
    assert all(rep.axioms[a].passed for a in ("i", "ii", "iii", "iv", "iv'"))
    assert len(L.automorphisms(1)) == 2


def test_swapped_structure_fails_axiom_i_at_the_first_coface(simplex2, smap):
    C, S = simplex2
    swapped = GeneralizedReedyStructure(C, S.degree, S.minus, S.plus)
    rep = validate_reedy(swapped)
    assert not rep.axioms["i"].passed
    first = rep.failures()["i"][0][0]
    assert first == smap(C, 0, 1, (1,)) and C.names[first] == "δ⁰"


def test_missing_degree_is_a_structural_error(simplex2):
    C, S = simplex2
    with pytest.raises(Exception, match="degree"):
        GeneralizedReedyStructure(C, [0, 1], S.plus, S.minus)


@pytest.mark.parametrize("name", ["simplex3", "cyclic3", "symmetric2", "gamma3", "orbit_S3_minus", "cog_triangle",
                                  "product_cyclic1_orbitZ2"])
def test_plus_and_minus_meet_in_the_isomorphisms(name):
    S = CORPUS[name]()
    C = S.category
    assert np.array_equal(S.plus & S.minus, C.isos)


# -- factorizations ------------------------------------------------------------------------------


def test_identity_factors_through_itself(simplex2):
    C, S = simplex2
    w = factorize(S, C.ident[1])
    assert (C.ident[1], C.ident[1]) in w.factorizations


def test_constant_endomap_factors_uniquely(simplex2, smap):
    C, S = simplex2
    f = smap(C, 1, 1, (1, 1))
    w = factorize(S, f)
    assert w.factorizations == [(smap(C, 0, 1, (1,)), smap(C, 1, 0, (0, 0)))]


def test_twisted_codegeneracy_factors_uniquely(cyclic2):
    L, S, G = cyclic2
    s0 = L.names.index("(σ⁰,10)")
    w = factorize(S, s0)
    # the middle object [0] has no automorphisms, so the factorization is rigid
    assert w.factorizations == [(L.ident[0], s0)] and w.unique_connecting


def test_cyclic_factorizations_are_linked_by_special_automorphisms(cyclic2):
    L, S, G = cyclic2
    s1 = L.names.index("σ¹")
    w = factorize(S, s1)
    assert len(w.factorizations) == 2 == len(L.automorphisms(1))
    assert w.unique_connecting
    assert sorted(w.connecting) == sorted(int(a) for a in L.automorphisms(1))
    g0, h0 = w.chosen
    for (g, h), t in zip(w.factorizations, w.connecting):
        assert L.compose(t, h0) == h and L.compose(g, t) == g0


@pytest.mark.parametrize("name", ["simplex3", "cyclic2", "symmetric2", "gamma3", "fin2", "orbit_S3_minus",
                                  "orbit_S3_plus", "cog_triangle"])
def test_every_morphism_factors_with_unique_connecting_isos(name):
    S = {"cyclic2": lambda: gen.cyclic_trunc(2)[1], "fin2": lambda: gen.fin_trunc(2)[1]}.get(name, CORPUS.get(name))()
    C = S.category
    for f in range(C.n_mor):
        w = factorize(S, f)
        assert w.factorizations, C.names[f]
        assert w.unique_connecting, C.names[f]
        for g, h in w.factorizations:
            assert S.plus[g] and S.minus[h] and C.compose(g, h) == f


# -- degree slices ---------------------------------------------------------------------------------


def test_degree_slice_above_every_degree_is_empty(simplex2):
    D = degree_slice(simplex2[1], 7)
    assert D.groupoid.n_obj == 0 and D.plus_wide.n_obj == 0 and D.minus_wide.n_obj == 0


def test_degree_one_slice_of_simplex2(simplex2, smap):
    C, S = simplex2
    D = degree_slice(S, 1)
    assert (D.groupoid.n_obj, D.groupoid.n_mor) == (1, 1)
    assert D.plus_fixed.n_obj == 2 and D.plus_fixed.n_mor == 2
    assert sorted(int(D.d.obj_map[o]) for o in range(D.plus_fixed.n_obj)) == [0, 0]
    assert check_degree_slice(S, D).ok


def test_degree_one_slice_of_cyclic2(cyclic2):
    D = degree_slice(cyclic2[1], 1)
    assert (D.groupoid.n_obj, D.groupoid.n_mor) == (1, 2)


@pytest.mark.parametrize("name", ["simplex3", "cyclic3", "symmetric2", "gamma3", "orbit_S3_minus", "cog_triangle"])
def test_slice_squares_are_pullbacks_with_cofibered_codomain(name):
    S = CORPUS[name]()
    for n in S.degrees():
        assert check_degree_slice(S, degree_slice(S, n)).ok


# -- latching and matching objects -------------------------------------------------------------------


def test_latching_in_degree_zero_is_empty(simplex2):
    C, S = simplex2
    X = random_presheaf(C.op, 0)
    assert latching(S, X, 0).size == 0
    assert matching(S, X, 0).size == 1


def test_presheaf_latching_of_the_2_simplex(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = representable(C, 2)
    L1 = latching(P, X, 1)
    assert L1.size == 3 == sum(1 for t in oracles.monotone_maps(1, 2) if len(set(t)) < 2)
    assert injective(L1.to_value) and X.sizes[1] == 6
    L2 = latching(P, X, 2)
    assert L2.size == 9 and X.sizes[2] == 10 and injective(L2.to_value)


def test_presheaf_matching_of_the_2_simplex(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = representable(C, 2)
    M = matching(P, X, 1)
    assert M.size == 9
    # an edge goes to its pair of endpoints, so the matching map is injective here
    assert injective(M.from_value)


def test_matching_of_the_terminal_presheaf(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = SetDiagram.terminal(C.op)
    for r in range(3):
        M = matching(P, X, r)
        assert M.size == 1 and len(M.from_value) == 1


@pytest.mark.parametrize("name", ["simplex3", "cyclic2", "symmetric2", "orbit_S3_minus"])
def test_latching_and_matching_maps_are_equivariant(name):
    S = gen.cyclic_trunc(2)[1] if name == "cyclic2" else CORPUS[name]()
    C = S.category
    for seed in range(2):
        X = random_presheaf(C.op, seed)
        for r in range(C.n_obj):
            assert latching_map(S, X, r).is_equivariant()
            assert matching_map(S, X, r).is_equivariant()
            assert latching(S, X, r).equivariant.validate().ok


@pytest.mark.parametrize("name", ["simplex3", "cyclic2", "gamma3", "product_cyclic1_orbitZ2"])
def test_global_and_pointwise_latching_agree(name):
    S = gen.cyclic_trunc(2)[1] if name == "cyclic2" else CORPUS[name]()
    X = random_presheaf(S.category.op, 5)
    for n in S.degrees():
        assert all(c.ok for c in global_latching(S, X, n))
        assert all(c.ok for c in global_matching(S, X, n))


# -- relative latching ------------------------------------------------------------------------------


def test_relative_latching_of_an_isomorphism(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = representable(C, 2)
    for r in range(3):
        assert relative_latching(P, DiagramMap.identity(X), r).is_bijective()
        assert relative_matching(P, DiagramMap.identity(X), r).is_bijective()


def test_relative_latching_of_the_boundary_inclusion(simplex2):
    C, S = simplex2
    E = ez_structure(S)
    B, inc = boundary(E, 2)
    f = relative_latching(S.opposite(), inc, 2)
    assert f.source.size == 9 and f.target.size == 10
    assert f.is_injective() and len(f.complement()) == 1


def test_relative_latching_from_the_empty_presheaf(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = random_presheaf(C, 11)
    f = relative_latching(P, DiagramMap.from_empty(X), 2)
    plain = latching_map(P, X, 2)
    assert f.source.size == plain.source.size
    assert sorted(f.mapping.tolist()) == sorted(plain.mapping.tolist())


# -- skeleta -------------------------------------------------------------------------------------------


def test_skeleton_above_top_degree_is_the_presheaf(simplex2):
    C, S = simplex2
    X = random_presheaf(C, 4)
    assert skeleton(S.opposite(), X, 2).counit.is_iso()
    assert coskeleton(S.opposite(), X, 2).counit.is_iso()


def test_zero_skeleton_and_coskeleton_of_the_1_simplex(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = representable(C, 1)
    assert list(skeleton(P, X, 0).diagram.sizes) == [2, 2, 2]
    assert coskeleton(P, X, 0).diagram.sizes[1] == 4


def test_minus_one_skeleton_is_initial_and_coskeleton_terminal(simplex2):
    C, S = simplex2
    X = random_presheaf(C, 2)
    assert sum(skeleton(S.opposite(), X, -1).diagram.sizes) == 0
    assert list(coskeleton(S.opposite(), X, -1).diagram.sizes) == [1, 1, 1]


def test_skeleton_lemmas_for_the_empty_presheaf(simplex2):
    C, S = simplex2
    assert skeleton_lemma_checks(S.opposite(), SetDiagram.empty(C.op)).ok


def test_skeleton_lemmas_for_the_2_simplex(simplex2):
    C, S = simplex2
    P = S.opposite()
    X = representable(C, 2)
    assert skeleton_lemma_checks(P, X).ok
    assert skeleton(P, X, 1).diagram.sizes[2] == latching(P, X, 2).size == 9


def test_skeleton_lemmas_for_the_cyclic_1_simplex(cyclic2):
    L, S, _ = cyclic2
    assert skeleton_lemma_checks(S.opposite(), representable(L, 1)).ok


@given(st.sampled_from(["simplex3", "cyclic3", "gamma3", "orbit_S3_minus", "cog_triangle"]), st.integers(0, 10_000))
def test_skeleton_lemmas_on_random_presheaves(name, seed):
    S = CORPUS[name]()
    X = random_presheaf(S.category, seed)
    rep = skeleton_lemma_checks(S.opposite(), X, idempotence=(name != "cyclic3"))
    assert rep.ok, rep.failures()


@given(st.sampled_from(["simplex3", "cyclic3", "gamma3"]), st.integers(0, 10_000))
def test_skeleton_tower_ends_at_the_presheaf(name, seed):
    S = CORPUS[name]()
    P = S.opposite()
    X = random_presheaf(S.category, seed)
    tower = [skeleton(P, X, n) for n in range(-1, P.max_degree + 1)]
    assert tower[-1].counit.is_iso()
    if name != "cyclic3":
        # with unique factorizations every skeleton sits inside X
        assert all(sk.counit.is_mono() for sk in tower)


def test_cyclic_skeleta_need_not_embed():
    # the 0-skeleton of the terminal cyclic set is the representable at [0], which has two 1-simplices
    L, S, _ = gen.cyclic_trunc(1)
    X = SetDiagram.terminal(L.op)
    sk = skeleton(S.opposite(), X, 0)
    assert list(sk.diagram.sizes) == list(representable(L, 0).sizes) == [1, 2]
    assert not sk.counit.is_mono()


# -- restriction comparisons --------------------------------------------------------------------------------


def test_restriction_along_the_identity(simplex3):
    C, S = simplex3
    X = random_presheaf(C.op, 1)
    idC = FunctorData.identity(C)
    for k in S.degrees():
        assert restriction_comparison(idC, S, S, X, k, "latching").ok
        assert restriction_comparison(idC, S, S, X, k, "matching").ok


def test_restriction_along_the_truncation_of_the_3_simplex(simplex3):
    C, S = simplex3
    T, F = truncated_structure(S, 2)
    X = representable(C, 3)
    res = restriction_comparison(F.op(), T.opposite(), S.opposite(), X, 1, "latching")
    assert res.hypothesis and res.ok


def test_restriction_along_the_plus_domain_functor(simplex3):
    C, S = simplex3
    T, F = plus_fixed_structure(S, 2)
    X = random_presheaf(C.op, 3)
    res = restriction_comparison(F, T, S, X, 1, "latching")
    assert res.hypothesis and res.ok


@pytest.mark.parametrize("make, side", [(plus_fixed_structure, "latching"), (minus_fixed_structure, "matching"),
                                        (truncated_structure, "latching"), (truncated_structure, "matching")])
def test_restriction_comparisons_on_the_cyclic_category(cyclic2, make, side):
    L, S, _ = cyclic2
    X = random_presheaf(L.op, 8)
    for n in S.degrees():
        T, F = make(S, n)
        for k in T.degrees():
            assert restriction_comparison(F, T, S, X, k, side).ok
