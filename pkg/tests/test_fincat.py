import numpy as np
import pytest
from hypothesis import given, strategies as st

from genreedy import generators as gen
from genreedy.fincat import (FinCategory, FunctorData, StructureError, WideSubcategory, classify_morphism,
                             comma_category, discrete_category, find_isomorphism, full_subcategory, grothendieck,
                             opposite, terminal_category, validate_category)
from genreedy.groups import FiniteGroup

import oracles

CORPUS = gen.axiom_corpus()
SMALL = ["simplex3", "symmetric2", "gamma3", "cog_edge", "cog_triangle", "group_S3", "groupoid_Z2_3",
         "coproduct_simplex1_Z2", "orbit_Z2_minus", "orbit_S3_plus"]


def parallel_pair(bad_unit=False):
    # objects a, b; morphisms 1_a, 1_b, f, g : a -> b
    ida, idb, f, g = 0, 1, 2, 3
    comp = [(ida, ida, ida), (idb, idb, idb), (f, ida, f), (g, ida, g), (idb, f, g if bad_unit else f), (idb, g, g)]
    return FinCategory(["a", "b"], [0, 1, 0, 0], [0, 1, 1, 1], [ida, idb], comp, names=["1a", "1b", "f", "g"])


# -- validation ----------------------------------------------------------------------


def test_terminal_category_is_valid():
    T = terminal_category()
    assert (T.n_obj, T.n_mor) == (1, 1)
    assert validate_category(T).ok


def test_unit_law_violation_cites_the_pair():
    assert validate_category(parallel_pair()).ok
    rep = validate_category(parallel_pair(bad_unit=True))
    assert not rep.ok
    assert any(v.kind == "unit" and v.witness == (1, 2) for v in rep.violations)


def test_malformed_indices_raise_structural_error():
    with pytest.raises(StructureError, match="comp"):
        FinCategory(["a"], [0], [0], [0], [(0, 0, 5)])
    with pytest.raises(StructureError):
        FinCategory(["a"], [0], [3], [0], [(0, 0, 0)])


def test_simplex2_morphism_count(simplex2):
    C, _ = simplex2
    assert validate_category(C).ok
    assert C.n_obj == 3
    assert C.n_mor == oracles.simplex_morphism_count(2) == 31


@pytest.mark.parametrize("name", SMALL)
def test_every_generator_category_is_valid(name):
    assert validate_category(CORPUS[name]().category).ok


def test_simplex_matches_independent_construction():
    C = gen.simplex_category(3)
    ref = oracles.simplex_by_maps(3)
    assert C.n_mor == ref.n_mor == oracles.simplex_morphism_count(3)
    assert find_isomorphism(C, ref) is not None


# -- classification ---------------------------------------------------------------------


def test_identity_has_every_flag(simplex2):
    C, _ = simplex2
    cls = classify_morphism(C, C.ident[1])
    assert all([cls.iso, cls.mono, cls.epi, cls.split_epi, cls.split_mono])


def test_coface_and_codegeneracy_flags(simplex2, smap):
    C, _ = simplex2
    d0 = smap(C, 0, 1, (1,))
    cls = classify_morphism(C, d0)
    assert cls.mono and cls.split_mono and not cls.epi and not cls.iso
    s0 = smap(C, 1, 0, (0, 0))
    cls = classify_morphism(C, s0)
    assert cls.split_epi and not cls.mono
    sections = {int(s) for s in C.hom(0, 1) if C.compose(s0, s) == C.ident[0]}
    assert sections == {smap(C, 0, 1, (0,)), smap(C, 0, 1, (1,))}


@pytest.mark.parametrize("name", ["simplex3", "symmetric2", "gamma3", "orbit_S3_minus", "cog_triangle"])
def test_classification_matches_brute_force(name):
    C = CORPUS[name]().category
    for f in range(C.n_mor):
        cls = classify_morphism(C, f)
        ref = oracles.classify(C, f)
        assert {k: getattr(cls, k) for k in ref} == ref, C.names[f]


@pytest.mark.parametrize("name", SMALL)
def test_classification_implications(name):
    C = CORPUS[name]().category
    for f in range(C.n_mor):
        c = classify_morphism(C, f)
        assert not c.split_epi or c.epi
        assert not c.split_mono or c.mono
        assert c.iso == (c.split_epi and c.mono) == (c.split_mono and c.epi)


# -- opposites -------------------------------------------------------------------------------


def test_opposite_is_an_involution(simplex2):
    C, _ = simplex2
    assert opposite(opposite(C)) == C
    assert opposite(terminal_category()) == terminal_category()
    assert opposite(C).n_mor == 31
    assert validate_category(opposite(C)).ok


@pytest.mark.parametrize("name", ["simplex3", "gamma3", "orbit_Z3_minus"])
def test_opposite_swaps_flags(name):
    C = CORPUS[name]().category
    D = opposite(C)
    for f in range(C.n_mor):
        a, b = classify_morphism(C, f), classify_morphism(D, f)
        assert (a.mono, a.epi, a.split_mono, a.split_epi, a.iso) == (b.epi, b.mono, b.split_epi, b.split_mono, b.iso)


# -- comma categories ----------------------------------------------------------------------------


def test_comma_of_identity_on_terminal_is_terminal():
    T = terminal_category()
    K, proj = comma_category(FunctorData.identity(T), 0, "over")
    assert (K.n_obj, K.n_mor) == (1, 1)


def test_comma_over_top_simplex(simplex2):
    C, _ = simplex2
    _, t1 = full_subcategory(C, [0, 1])
    K, proj = comma_category(t1, 2, "over")
    assert K.n_obj == oracles.monotone_count(0, 2) + oracles.monotone_count(1, 2) == 9
    assert validate_category(K).ok
    assert proj.validate().ok


def test_comma_under_is_morphisms_out_of_the_object(simplex2):
    C, _ = simplex2
    K, _ = comma_category(FunctorData.identity(C), 0, "under")
    assert K.n_obj == len(C.out_of(0)) == 6


@given(st.sampled_from(["simplex3", "cyclic2", "gamma3", "orbit_S3_minus", "product_simplex1_simplex1"]),
       st.data())
def test_comma_object_count_is_a_hom_sum(name, data):
    C = gen.cyclic_trunc(2)[0] if name == "cyclic2" else CORPUS[name]().category
    objs = data.draw(st.sets(st.integers(0, C.n_obj - 1), min_size=1))
    _, phi = full_subcategory(C, sorted(objs))
    c = data.draw(st.integers(0, C.n_obj - 1))
    side = data.draw(st.sampled_from(["over", "under"]))
    K, _ = comma_category(phi, c, side)
    if side == "over":
        want = sum(len(C.hom(int(phi.obj_map[d]), c)) for d in range(phi.source.n_obj))
    else:
        want = sum(len(C.hom(c, int(phi.obj_map[d]))) for d in range(phi.source.n_obj))
    assert K.n_obj == want


# -- Grothendieck construction ---------------------------------------------------------------------


def test_grothendieck_with_terminal_fibers_is_the_base(simplex2):
    C, _ = simplex2
    T = terminal_category()
    G = grothendieck(C, [T] * C.n_obj, lambda m: FunctorData.identity(T))
    assert validate_category(G).ok
    assert find_isomorphism(G, C) is not None


def test_grothendieck_of_a_constant_group_is_a_product():
    Z2 = FiniteGroup.cyclic(2).as_category()
    H = FiniteGroup.cyclic(3)
    Hc = H.as_category()
    G = grothendieck(Z2, [Hc], lambda m: FunctorData.identity(Hc))
    assert validate_category(G).ok
    product = FiniteGroup.product(FiniteGroup.cyclic(2), H).as_category()
    assert G.n_mor == 6
    assert find_isomorphism(G, product) is not None


def test_complex_of_groups_on_an_edge():
    C, S = gen.edge_complex()
    assert C.n_obj == 3
    assert validate_category(C).ok
    edge = C.objects.index("{0,1}")
    for v in ("{0}", "{1}"):
        assert len(C.hom(C.objects.index(v), edge)) == 2


def test_twisted_triangle_is_associative():
    C, _ = gen.twisted_triangle()
    assert validate_category(C).ok


# -- subcategories and isomorphism search --------------------------------------------------------------


def test_wide_subcategory_must_contain_identities(simplex2, smap):
    C, S = simplex2
    assert WideSubcategory(C, frozenset(np.flatnonzero(S.plus))).validate().ok
    assert not WideSubcategory(C, frozenset([smap(C, 0, 1, (0,))])).validate().ok


def test_isomorphism_search_rejects_different_shapes():
    assert find_isomorphism(discrete_category(["a", "b"]), terminal_category()) is None
    assert find_isomorphism(gen.simplex_category(1), discrete_category(["a", "b"])) is None


def test_functor_composition_and_opposite(simplex2):
    C, _ = simplex2
    _, t = full_subcategory(C, [0, 1])
    assert t.validate().ok
    assert t.op().op() is t
    assert t.then(FunctorData.identity(C)) == t
