import pytest
from hypothesis import given, strategies as st

from genreedy import generators as gen
from genreedy.diagram import DiagramMap, PreconditionError, representable
from genreedy.ez import EZStructure, boundary
from genreedy.monoidal import CartesianProduct, SmashProduct, pushout_product, quasi_monoidal_check
from genreedy.sampling import orbit_quotient, random_mono

import oracles

CART = CartesianProduct()


@pytest.fixture(scope="module")
def delta2():
    C, S = gen.simplex_trunc(2)
    return C, EZStructure.from_reedy(S)


@pytest.fixture(scope="module")
def delta3():
    C, S = gen.simplex_trunc(3)
    return C, EZStructure.from_reedy(S)


def square_boundary_size(k: int) -> int:
    """k-simplices of Δ[1]×Δ[1] with at least one constant coordinate."""
    maps = oracles.monotone_maps(k, 1)
    return sum(1 for a in maps for b in maps if len(set(a)) == 1 or len(set(b)) == 1)


def test_boundary_of_the_square(delta2):
    C, E = delta2
    _, i = boundary(E, 1)
    pp = pushout_product(CART, E, i, i)
    assert list(pp.map.target.sizes) == [oracles.monotone_count(k, 1) ** 2 for k in range(3)] == [4, 9, 16]
    assert list(pp.map.source.sizes) == [square_boundary_size(k) for k in range(3)] == [4, 8, 12]
    assert pp.monic and pp.normal


def test_identity_on_the_left_gives_an_isomorphism(delta2):
    C, E = delta2
    _, v = boundary(E, 1)
    pp = pushout_product(CART, E, DiagramMap.identity(representable(C, 1)), v)
    assert pp.map.is_iso()


def test_empty_into_the_point_reproduces_the_other_map(delta2):
    C, E = delta2
    u = DiagramMap.from_empty(representable(C, 0))
    _, v = boundary(E, 2)
    pp = pushout_product(CART, E, u, v)
    assert list(pp.map.source.sizes) == list(v.source.sizes)
    assert list(pp.map.target.sizes) == list(v.target.sizes)
    assert pp.normal


def test_pairs_beyond_the_truncation_are_refused(delta2):
    C, E = delta2
    _, top = boundary(E, 2)
    _, edge = boundary(E, 1)
    with pytest.raises(PreconditionError, match="truncation"):
        pushout_product(CART, E, top, edge)
    with pytest.raises(PreconditionError, match="truncation"):
        quasi_monoidal_check(E, CART, [(2, 1)])


def test_non_normal_inputs_are_refused():
    C, S = gen.fin_trunc(2)
    E = EZStructure.from_reedy(S)
    swap = [int(a) for a in C.automorphisms(1) if not C.is_identity[a]][0]
    bad = DiagramMap.from_empty(orbit_quotient(C, 1, swap))
    good = DiagramMap.from_empty(representable(C, 0))
    with pytest.raises(PreconditionError, match="normal"):
        pushout_product(CART, E, bad, good)


def test_simplex2_is_quasi_monoidal(delta2):
    C, E = delta2
    pairs = [(r, s) for r in range(3) for s in range(3) if r + s <= 2]
    rep = quasi_monoidal_check(E, CART, pairs)
    assert rep.ok and rep.unit_cofibrant
    assert len(rep.pairs) == len(pairs) and rep.colimit_samples > 0
    assert rep.to_json()["colimit_preservation"]["verdict"] == "sampled"


def test_simplex3_is_quasi_monoidal(delta3):
    C, E = delta3
    rep = quasi_monoidal_check(E, CART, [(1, 1), (1, 2), (0, 3)])
    assert rep.ok


def test_terminal_unit_is_cofibrant_for_finite_sets():
    C, S = gen.fin_trunc(2)
    E = EZStructure.from_reedy(S)
    assert quasi_monoidal_check(E, CART, [(0, 0)]).unit_cofibrant


def test_smash_product_is_an_unimplemented_extension_point(delta2):
    C, E = delta2
    X = representable(C, 0)
    P = SmashProduct()
    with pytest.raises(NotImplementedError):
        P.tensor(X, X)
    with pytest.raises(NotImplementedError):
        P.unit(E)


@given(st.integers(0, 10_000), st.integers(0, 3))
def test_pushout_products_of_monos_are_normal_monos(seed, a):
    C, S = gen.simplex_trunc(3)
    E = EZStructure.from_reedy(S)
    b = 3 - a
    u = random_mono(C, seed, max_degree_obj=a, degree=S.degree)
    v = random_mono(C, seed + 1, max_degree_obj=b, degree=S.degree)
    pp = pushout_product(CART, E, u, v)
    assert pp.monic
    assert pp.verdict.agreement and pp.normal
