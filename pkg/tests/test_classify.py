import numpy as np
import pytest
from hypothesis import given, strategies as st

from kleinforms.classify import (
    NONE,
    UNIQUE,
    ClassifyError,
    ClassLabel,
    QuadLabel,
    canonicalize,
    count_classes,
    count_formula,
    enumerate_classes,
    parse_label,
    quad_canonicalize,
    quad_classify,
    quad_exists,
    quad_representatives,
    representative,
)
from kleinforms.forms import BilinearForm, is_invariant, is_symplectic, quad_is_invariant, s_hat
from kleinforms.kgmodules import action, regular_hat
from kleinforms.matrix import Mat, anti_identity, block, identity, zeros

from conftest import GF2, GF4, SWEEP, T, T2_T_1, random_unit, spec

# specs small enough to canonicalize every label many times
FAST = [sp for sp in SWEEP if count_classes(sp) <= 64]


# counting


@pytest.mark.parametrize(
    "sp,count",
    [
        (spec("regular2"), 5),
        (spec("anbn", n=1), 4),
        (spec("cnf2", n=3, f=T), 5),
        (spec("cnf", n=2, f=T2_T_1), 4),
        (spec("regular"), 4),
        (spec("regular", GF4), 16),
        (spec("trivial2"), 1),
        (spec("cnf2", n=1, f=T), 1),
        (spec("cnf2", n=2, f=T), 2),
        (spec("cnf", n=1, f=T), 1),
        (spec("cnf", n=2, f=T), 2),
        (spec("anbn", n=2), 16),
    ],
    ids=str,
)
def test_class_counts(sp, count):
    assert count_classes(sp) == count


@pytest.mark.parametrize("sp", SWEEP, ids=str)
def test_enumeration_matches_count(sp):
    labels = enumerate_classes(sp)
    assert len(labels) == count_classes(sp)
    assert len({l.text() for l in labels}) == len(labels)


def test_count_formula_text():
    assert count_formula("regular2") == "2*|k|+1"
    assert count_formula("regular") == "|k|^2"
    assert count_formula("anbn", 2) == "|k|^3+|k|^2+|k|+2"
    assert count_formula("cnf", 4, None) == "|k|^(2m)"
    assert count_formula("cnf", 3, 1) == "|k|"
    assert count_formula("cnf2", 4, None) == "4*|k|^(m)"
    assert count_formula("cnf2", 5, None) == "3*|k|^(2m)+2*|k|^(m)"
    assert count_formula("cnf2", 3, 1) == "2*|k|+1"
    assert count_formula("cninf2", 1) == "1"


def test_enumeration_cap():
    with pytest.raises(ClassifyError):
        enumerate_classes(spec("anbn", GF4, 3), cap=100)


def test_enumeration_examples():
    assert [l.text() for l in enumerate_classes(spec("trivial2"))] == ["label trivial2"]
    assert [l.params for l in enumerate_classes(spec("cnf2", n=1, f=T))] == [(2, 0, (), ())]
    texts = {l.text() for l in enumerate_classes(spec("regular2"))}
    assert texts == {
        "label regular2 paired",
        "label regular2 alpha=0",
        "label regular2 alpha=1",
        "label regular2 mu=0",
        "label regular2 mu=1",
    }


# representatives and labels


def test_representative_examples():
    assert representative(ClassLabel(spec("trivial2"), ())).gram == anti_identity(GF2, 2)
    assert representative(ClassLabel(spec("regular"), (0, 0))).gram == regular_hat(GF2, (0, 0, 0, 1))
    S = representative(ClassLabel(spec("cnf", n=1, f=T), ())).gram
    assert S == anti_identity(GF2, 2)


@pytest.mark.parametrize("sp", SWEEP, ids=str)
def test_representatives_are_invariant_symplectic(sp):
    for lab in enumerate_classes(sp):
        B = representative(lab)
        assert is_invariant(B) and is_symplectic(B)


@pytest.mark.parametrize("sp", SWEEP, ids=str)
def test_label_text_round_trip(sp):
    for lab in enumerate_classes(sp):
        assert parse_label(sp, lab.text()) == lab


@pytest.mark.parametrize(
    "sp,text",
    [
        (spec("regular"), "label regular b=2 c=0"),
        (spec("regular"), "label anbn omega=0,0"),
        (spec("anbn", n=1), "label anbn omega=0,2"),
        (spec("anbn", n=1), "label anbn omega=0"),
        (spec("cnf2", n=3, f=T), "label cnf2 r=3 s=0 phi= psi=1"),
        (spec("cnf2", n=3, f=T), "label cnf2 r=1 s=0 phi= psi="),
        (spec("regular2"), "label regular2 nu=1"),
        (spec("cnf", n=2, f=T), "label cnf"),
    ],
)
def test_bad_labels_rejected(sp, text):
    with pytest.raises(ClassifyError):
        parse_label(sp, text)


# canonicalisation


@pytest.mark.parametrize("sp", SWEEP, ids=str)
def test_canonicalize_representative(sp):
    for lab in enumerate_classes(sp):
        got, M = canonicalize(sp, representative(lab).gram)
        assert got == lab
        assert M.T @ representative(lab).gram @ M == representative(lab).gram


def test_regular2_mu_example():
    sp = spec("regular2")
    h = lambda x: regular_hat(GF2, x)  # noqa: E731
    S = block([[h((0, 0, 1, 1)), h((1, 0, 0, 0))], [h((1, 0, 0, 0)), h((0, 1, 0, 1))]])
    assert canonicalize(sp, S)[0].text() == "label regular2 mu=1"


@given(st.sampled_from(FAST), st.integers(0, 2**31))
def test_label_stable_under_units(sp, seed):
    rng = np.random.default_rng(seed)
    labels = enumerate_classes(sp)
    lab = labels[int(rng.integers(len(labels)))]
    S = representative(lab).gram
    M = random_unit(sp, rng)
    S2 = M.T @ S @ M
    got, W = canonicalize(sp, S2)
    assert got == lab
    assert W.T @ S2 @ W == S


def test_anbn_nonzero_d_keeps_label():
    sp = spec("anbn", n=1)
    rng = np.random.default_rng(3)
    P = sp.swap
    for lab in enumerate_classes(sp):
        S = P @ representative(lab).gram @ P
        h = S.rows // 2
        for _ in range(10):
            U = np.triu(rng.integers(0, 2, (h, h)), 1)
            D = Mat.wrap(GF2, U ^ U.T)
            Sd = S + block([[zeros(GF2, h), zeros(GF2, h)], [zeros(GF2, h), D]])
            assert canonicalize(sp, P @ Sd @ P)[0] == lab


def test_canonicalize_rejects_bad_input():
    sp = spec("regular")
    with pytest.raises(ClassifyError, match="alternating"):
        canonicalize(sp, identity(GF2, 4))
    with pytest.raises(ClassifyError, match="degenerate"):
        canonicalize(sp, zeros(GF2, 4))
    S = Mat(GF2, [[0, 1, 1, 0], [1, 0, 0, 0], [1, 0, 0, 1], [0, 0, 1, 0]])
    assert S.is_invertible()
    with pytest.raises(ClassifyError, match="invariant"):
        canonicalize(sp, S)


def test_squared_family_rejects_decomposable():
    # kG + kG with an orthogonal sum of two regular forms: invariant, symplectic, decomposable
    sp = spec("regular2")
    zero = zeros(GF2, 4)
    B = regular_hat(GF2, (0, 1, 0, 0))
    S = block([[B, zero], [zero, B]])
    assert is_invariant(BilinearForm.on(sp, S)) and S.is_invertible()
    with pytest.raises(ClassifyError):
        canonicalize(sp, S)


# quadratic refinements


def test_quad_exists_examples():
    assert quad_exists(ClassLabel(spec("anbn", n=1), (0, 0)))
    assert quad_exists(ClassLabel(spec("cnf", n=1, f=T), ()))
    assert not quad_exists(ClassLabel(spec("cnf", n=1, f=T2_T_1), ()))


def test_quad_exists_cnf_even_degree_two():
    sp = spec("cnf", n=2, f=T2_T_1)
    K = sp.ext.ext
    e = sp.ext.epsilon
    want = K.inv(K.add(e, K.mul(e, e)))
    assert [l.params for l in enumerate_classes(sp) if quad_exists(l)] == [(want,)]


@pytest.mark.parametrize(
    "sp,counts",
    [
        (spec("trivial2"), {2}),
        (spec("trivial2", GF4), {2}),
        (spec("regular"), {1}),
        (spec("regular2"), {1}),
        (spec("cnf", n=1, f=T), {2}),
    ],
    ids=str,
)
def test_quad_class_counts(sp, counts):
    assert {len(quad_representatives(l).forms) for l in enumerate_classes(sp)} == counts


def test_anbn_quad_counts():
    sp = spec("anbn", n=1)
    got = {l.params: len(quad_representatives(l).forms) for l in enumerate_classes(sp) if quad_exists(l)}
    assert got[(0, 0)] == 1
    assert all(v == 2 for k, v in got.items() if any(k))


def test_quad_none_family():
    fam = quad_representatives(ClassLabel(spec("cnf", n=1, f=T2_T_1), ()))
    assert fam.forms == [] and fam.labels == [NONE]


@pytest.mark.parametrize("sp", [s for s in SWEEP if s.dim <= 12], ids=str)
def test_quad_representatives_round_trip(sp):
    for lab in enumerate_classes(sp):
        S = representative(lab).gram
        fam = quad_representatives(lab)
        for q, ql in zip(fam.forms, fam.labels):
            assert quad_is_invariant(q)
            assert q.rep + q.rep.T == S
            got, M = quad_canonicalize(lab, q.rep)
            assert got == ql


@given(st.sampled_from([s for s in FAST if s.dim <= 12]), st.integers(0, 2**31))
def test_quad_classify_under_units(sp, seed):
    rng = np.random.default_rng(seed)
    labels = [l for l in enumerate_classes(sp) if quad_exists(l)]
    if not labels:
        return
    lab = labels[int(rng.integers(len(labels)))]
    fam = quad_representatives(lab)
    i = int(rng.integers(len(fam.forms)))
    M = random_unit(sp, rng)
    Q = M.T @ fam.forms[i].rep @ M
    got_label, ql, W = quad_classify(sp, Q)
    assert got_label == lab and ql == fam.labels[i]


def test_quad_canonicalize_rejects_wrong_polar():
    lab = ClassLabel(spec("trivial2"), ())
    with pytest.raises(ClassifyError):
        quad_canonicalize(lab, identity(GF2, 2))


def test_quad_label_text():
    assert UNIQUE.text() == "quad unique"
    assert NONE.text() == "quad none"
    assert QuadLabel("arf", 2).text() == "quad arf=2"


def test_s_hat_of_regular_representative_is_the_quadratic_class():
    lab = ClassLabel(spec("regular"), (1, 0))
    fam = quad_representatives(lab)
    assert fam.forms[0].rep == s_hat(representative(lab).gram)
    assert fam.forms[0].act == action(lab.spec)
