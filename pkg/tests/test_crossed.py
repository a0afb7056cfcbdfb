import itertools
from math import factorial

import pytest
from hypothesis import given, strategies as st

from genreedy import generators as gen
from genreedy.crossed import (CrossedGroup, check_compatibility, compatibility_and_induced, crossed_from_wide,
                              crossed_isomorphic, cyclic_action, total_category, validate_crossed)
from genreedy.diagram import PreconditionError
from genreedy.fincat import FunctorData, find_isomorphism, validate_category
from genreedy.groups import FiniteGroup, cyclic_permutation
from genreedy.reedy import validate_reedy

import oracles

TAU = (1, 0)


def brute_cyclic_action(alpha, g):
    """Search every permutation of the source for the one making ``g alpha pi^-1`` monotone
    while preserving the order inside each fiber of ``alpha``."""
    m = len(alpha)
    hits = []
    for pi in itertools.permutations(range(m)):
        inv = [pi.index(j) for j in range(m)]
        moved = tuple(g[alpha[inv[j]]] for j in range(m))
        if any(a > b for a, b in zip(moved, moved[1:])):
            continue
        if all(pi[i] < pi[j] for i in range(m) for j in range(i + 1, m) if alpha[i] == alpha[j]):
            hits.append((tuple(pi), moved))
    return hits


# -- the cyclic action ----------------------------------------------------------------------


def test_cyclic_action_of_the_identity():
    assert cyclic_action((0, 1, 1), (0, 1)) == ((0, 1, 2), (0, 1, 1))


def test_cyclic_action_on_a_coface():
    assert cyclic_action((1,), TAU) == ((0,), (0,))


def test_cyclic_action_on_a_codegeneracy():
    restricted, moved = cyclic_action((0, 0, 1), TAU)
    assert restricted == (1, 2, 0)
    assert moved == (0, 1, 1)


@given(st.integers(0, 3), st.integers(0, 3), st.data())
def test_cyclic_action_is_the_unique_fiber_sorting(m, n, data):
    alpha = data.draw(st.sampled_from(oracles.monotone_maps(m, n)))
    g = data.draw(st.permutations(list(range(n + 1))))
    hits = brute_cyclic_action(alpha, tuple(g))
    assert len(hits) == 1
    assert cyclic_action(alpha, tuple(g)) == hits[0]


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.data())
def test_cyclic_elements_restrict_to_cyclic_elements(m, n, k, data):
    alpha = data.draw(st.sampled_from(oracles.monotone_maps(m, n)))
    cycle = cyclic_permutation(n + 1)
    g = tuple(range(n + 1))
    for _ in range(k):
        g = tuple(cycle[x] for x in g)
    restricted, _ = cyclic_action(alpha, g)
    rotations = {tuple((i + s) % (m + 1) for i in range(m + 1)) for s in range(m + 1)}
    assert restricted in rotations


# -- validation and total categories ----------------------------------------------------------------


def test_trivial_crossed_group_gives_the_base(simplex2):
    C, _ = simplex2
    G = CrossedGroup.trivial(C)
    assert validate_crossed(G).ok
    T = total_category(G)
    assert find_isomorphism(T.category, C) is not None


def test_constant_crossed_group_is_a_product(simplex2):
    C, _ = simplex2
    Z2 = FiniteGroup.cyclic(2)
    G = CrossedGroup.constant(C, Z2)
    assert validate_crossed(G).ok
    T = total_category(G).category
    _, product = gen.combine([gen.simplex_trunc(2)[1], gen.group_category(Z2)[1]], "product")
    assert find_isomorphism(T, product.category) is not None


@pytest.mark.parametrize("make", [gen.cyclic_crossed_group, gen.symmetric_crossed_group])
def test_cyclic_and_symmetric_identities_hold(make):
    assert validate_crossed(make(2)).ok


def test_broken_action_is_reported(simplex2):
    G = gen.cyclic_crossed_group(2)
    act = [a.copy() for a in G.act]
    C = G.base
    d0 = C.index((0, 1, (1,)))
    act[d0][1] = d0                       # tau should move delta^0 to delta^1
    bad = CrossedGroup(C, G.groups, G.restrict, act)
    rep = validate_crossed(bad)
    assert not rep.ok


@pytest.mark.parametrize("label, make, factor", [("cyclic", gen.cyclic_crossed_group, lambda m: m + 1),
                                                 ("symmetric", gen.symmetric_crossed_group,
                                                  lambda m: factorial(m + 1))])
def test_hom_count_law(label, make, factor):
    G = make(2)
    T = total_category(G).category
    assert validate_category(T).ok
    for m in range(3):
        for n in range(3):
            assert len(T.hom(m, n)) == factor(m) * oracles.monotone_count(m, n)
    if label == "cyclic":
        assert len(T.hom(1, 1)) == 6


def test_total_category_composition_spot_check():
    G = gen.cyclic_crossed_group(2)
    T = total_category(G)
    C = G.base
    tau = G.groups[1].index(TAU)
    e0, e1 = G.groups[0].unit, G.groups[1].unit
    d0, d1 = C.index((0, 1, (1,))), C.index((0, 1, (0,)))
    lhs = T.category.compose(T.index(C.ident[1], tau), T.index(d0, e0))
    assert lhs == T.index(d1, e0)
    assert G.groups[1].order == 2 and e1 != tau


def test_cyclic_total_category_matches_periodic_maps():
    for N in (1, 2):
        L = total_category(gen.cyclic_crossed_group(N)).category
        ref = gen.cyclic_category_periodic(N)
        assert L.n_mor == ref.n_mor
        assert find_isomorphism(L, ref) is not None


def test_symmetric_total_category_matches_fiber_orders():
    S = total_category(gen.symmetric_crossed_group(2)).category
    ref = oracles.symmetric_by_fiber_orders(2)
    assert S.n_mor == ref.n_mor == oracles.symmetric_morphism_count(2) == 116
    assert find_isomorphism(S, ref) is not None


@pytest.mark.parametrize("N", [1, 2, 3])
def test_every_automorphism_of_the_cyclic_category_is_special(N):
    L, S, G = gen.cyclic_trunc(N)
    T = total_category(G)
    for n in range(N + 1):
        assert sorted(int(a) for a in L.automorphisms(n)) == sorted(T.special[n])
        assert len(T.special[n]) == n + 1


# -- recovery from unique factorizations ------------------------------------------------------------


def _round_trip(G):
    T = total_category(G)
    members = [int(m) for m in T.embedding.mor_map]
    R = crossed_from_wide(T.category, members, T.special)
    back = {int(m): i for i, m in enumerate(R.base_inclusion.mor_map)}
    base_map = FunctorData(G.base, R.crossed.base, range(G.base.n_obj),
                           [back[int(T.embedding.mor_map[a])] for a in range(G.base.n_mor)])
    group_maps = [[R.special[r].index(T.special[r][g]) for g in range(G.groups[r].order)]
                  for r in range(G.base.n_obj)]
    return T, R, crossed_isomorphic(G, R.crossed, base_map, group_maps)


def test_round_trip_recovers_the_cyclic_crossed_group():
    T, R, iso = _round_trip(gen.cyclic_crossed_group(2))
    assert iso
    assert validate_crossed(R.crossed).ok
    assert R.comparison.is_isomorphism()
    assert find_isomorphism(total_category(R.crossed).category, gen.cyclic_category_periodic(2)) is not None


def test_round_trip_of_trivial_and_constant_groups(simplex2):
    C, _ = simplex2
    _, R, iso = _round_trip(CrossedGroup.trivial(C))
    assert iso and all(H.order == 1 for H in R.crossed.groups)
    _, R, iso = _round_trip(CrossedGroup.constant(C, FiniteGroup.cyclic(2)))
    assert iso and R.crossed.is_trivial_action()


def test_recovery_refuses_non_unique_factorizations():
    L, S, G = gen.cyclic_trunc(1)
    T = total_category(G)
    with pytest.raises(PreconditionError):
        crossed_from_wide(L, range(L.n_mor), T.special)


# -- compatibility with Reedy structures ----------------------------------------------------------------


@pytest.mark.parametrize("make", [gen.cyclic_crossed_group, gen.symmetric_crossed_group])
@pytest.mark.parametrize("N", [1, 2])
def test_crossed_simplicial_groups_are_compatible(make, N):
    _, S = gen.simplex_trunc(N)
    assert check_compatibility(make(N), S).ok


def test_induced_structure_on_the_cyclic_category(simplex2):
    _, S = simplex2
    res = compatibility_and_induced(gen.cyclic_crossed_group(2), S)
    rep = validate_reedy(res.structure, check_dual=True)
    assert rep.ok and not rep.strict
    assert res.structure.dualizable


def test_induced_structure_on_the_symmetric_category(simplex2):
    _, S = simplex2
    res = compatibility_and_induced(gen.symmetric_crossed_group(2), S)
    assert validate_reedy(res.structure, check_dual=True).ok


def test_trivial_group_induces_the_same_structure(simplex2):
    C, S = simplex2
    res = compatibility_and_induced(CrossedGroup.trivial(C), S)
    assert list(res.structure.degree) == list(S.degree)
    assert res.structure.plus.sum() == S.plus.sum() and res.structure.minus.sum() == S.minus.sum()


def test_induced_structure_refuses_a_non_strict_base(cyclic2):
    L, S, _ = cyclic2
    with pytest.raises(PreconditionError):
        compatibility_and_induced(CrossedGroup.constant(L, FiniteGroup.cyclic(2)), S)


def test_incompatible_action_is_reported(simplex2):
    C, S = simplex2
    G = gen.cyclic_crossed_group(2)
    # an action moving a face to a non-injective map breaks condition (i)
    act = [a.copy() for a in G.act]
    d0 = C.index((1, 2, (0, 2)))
    act[d0][1] = C.index((1, 2, (0, 0)))
    bad = CrossedGroup(C, G.groups, G.restrict, act)
    assert not check_compatibility(bad, S).ok
