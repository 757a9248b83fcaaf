import pytest
from hypothesis import given, strategies as st

from kleinforms.field import (
    Field,
    FieldError,
    canonical_modulus,
    is_irreducible_gf2,
    make_extension,
    poly_eval,
    poly_mul,
)

from conftest import GF2, GF4, GF8

FIELDS = [GF2, GF4, GF8, Field(4), Field(5)]


def elems(F):
    return st.integers(0, F.order - 1)


def test_canonical_moduli():
    assert [canonical_modulus(e) for e in (1, 2, 3, 4)] == [2, 7, 11, 19]
    assert GF4.header() == "field 2 2 7"


def test_reducible_modulus_rejected():
    with pytest.raises(FieldError):
        Field(2, 5)  # T^2 + 1 = (T + 1)^2
    with pytest.raises(FieldError):
        Field(3, 7)  # wrong degree


def test_small_products():
    assert GF2.add(1, 1) == 0
    w = 2
    assert GF4.mul(w, w) == 3
    assert GF4.inv(w) == 3
    with pytest.raises(ZeroDivisionError):
        GF4.inv(0)


def test_sqrt_examples():
    assert GF2.sqrt(1) == 1
    assert GF4.sqrt(2) == 3
    assert all(F.sqrt(0) == 0 for F in FIELDS)


@pytest.mark.parametrize("F", FIELDS, ids=lambda F: f"q{F.order}")
def test_field_axioms_exhaustive_small(F):
    if F.order > 16:
        pytest.skip("covered by the property tests")
    xs = list(F.elements())
    for a in xs:
        if a:
            assert F.mul(a, F.inv(a)) == 1
        for b in xs:
            assert F.mul(a, b) == F.mul(b, a)
            for c in xs:
                assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


@pytest.mark.parametrize("F", FIELDS, ids=lambda F: f"q{F.order}")
def test_square_root_is_inverse_of_frobenius(F):
    for a in F.elements():
        assert F.mul(F.sqrt(a), F.sqrt(a)) == a
        assert F.sqrt(F.mul(a, a)) == a


@given(st.sampled_from(FIELDS).flatmap(lambda F: st.tuples(st.just(F), elems(F), elems(F), elems(F))))
def test_associativity(args):
    F, a, b, c = args
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.pow(a, F.order) == a


def _image_of_as_map(F):
    return {F.add(F.mul(x, x), x) for x in F.elements()}


@pytest.mark.parametrize("F", FIELDS, ids=lambda F: f"q{F.order}")
def test_artin_schreier_reps(F):
    zero, c = F.artin_schreier_reps()
    image = _image_of_as_map(F)
    assert zero == 0 and c not in image
    # c is the smallest element outside {x^2 + x}
    assert c == min(x for x in F.elements() if x not in image)
    assert F.trace(c) == 1


def test_artin_schreier_examples():
    assert GF2.artin_schreier_reps() == (0, 1)
    assert GF4.artin_schreier_reps() == (0, 2)
    # over GF(8) = GF(2)[T]/(T^3+T+1), x^2 + x hits {0, 2, 4, 6}
    assert GF8.artin_schreier_reps() == (0, 1)


def test_coset_reduce_examples():
    assert GF2.coset_reduce(0) == (0, 0)
    assert GF2.coset_reduce(1) == (1, 0)
    rep, delta = GF4.coset_reduce(1)
    assert rep == 0 and GF4.add(GF4.mul(delta, delta), delta) == 1


@given(st.sampled_from(FIELDS).flatmap(lambda F: st.tuples(st.just(F), elems(F))))
def test_coset_reduce_property(args):
    F, a = args
    rep, delta = F.coset_reduce(a)
    assert rep in F.artin_schreier_reps()
    assert F.add(rep, F.add(F.mul(delta, delta), delta)) == a


def test_irreducibility_test_against_factor_search():
    for m in range(2, 1 << 7):
        deg = m.bit_length() - 1
        has_factor = False
        for d in range(2, 1 << (deg // 2 + 1)):
            # polynomial division over GF(2)
            r = m
            while r.bit_length() >= d.bit_length():
                r ^= d << (r.bit_length() - d.bit_length())
            if r == 0 and d.bit_length() - 1 >= 1:
                has_factor = True
                break
        assert is_irreducible_gf2(m) == (not has_factor), m


def test_extension_examples():
    e = make_extension(GF2, (0, 1))
    assert e.m == 1 and e.epsilon == 0 and e.ext.order == 2
    e = make_extension(GF2, (1, 1))
    assert e.m == 1 and e.epsilon == 1
    e = make_extension(GF2, (1, 1, 1))
    K = e.ext
    assert K.order == 4 and e.m == 2
    assert sorted(e.conjugates()) == [2, 3]
    assert e.sigma(2, e.epsilon) == K.mul(e.epsilon, e.epsilon)


def test_extension_rejects_reducible_or_non_monic():
    with pytest.raises(FieldError):
        make_extension(GF2, (1, 0, 1))
    with pytest.raises(FieldError):
        make_extension(GF4, (1, 2))


@pytest.mark.parametrize(
    "k,f",
    [(GF2, (1, 1, 1)), (GF2, (1, 1, 0, 1)), (GF2, (1, 0, 0, 1, 1)), (GF4, (2, 1, 1)), (GF4, (2, 1))],
)
def test_extension_invariants(k, f):
    e = make_extension(k, f)
    K = e.ext
    fe = e.embedded_f()
    assert poly_eval(K, fe, e.epsilon) == 0
    roots = e.conjugates()
    assert len(set(roots)) == e.m
    # f = prod (T - sigma_i(eps))
    prod = (1,)
    for r in roots:
        prod = poly_mul(K, prod, (r, 1))
    assert tuple(prod) == fe
    # sigma_i fixes the embedded copy of k
    for a in k.elements():
        for i in range(1, e.m + 1):
            assert e.sigma(i, e.embed(a)) == e.embed(a)
    # embedding is a ring map
    for a in k.elements():
        for b in k.elements():
            assert e.embed(k.mul(a, b)) == K.mul(e.embed(a), e.embed(b))
