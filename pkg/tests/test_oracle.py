import numpy as np
import pytest

from kleinforms.classify import canonicalize, enumerate_classes, quad_exists
from kleinforms.oracle import (
    Budget,
    OracleError,
    alternating_invariant_basis,
    default_restrict,
    dkill_samples,
    enumerate_invariant_symplectic,
    enumerations_agree,
    family_forms,
    orbit_partition,
    quad_exists_brute,
    quad_orbit_partition,
    triple_decomposition_holds,
    unit_group,
    verify,
)

from conftest import GF4, T, T2_T_1, spec

# sizes found by exhaustive enumeration, frozen here


@pytest.mark.parametrize(
    "sp,units",
    [
        (spec("regular"), 8),
        (spec("cnf", n=1, f=T), 2),
        (spec("trivial2"), 6),
        (spec("regular2"), 24576),
        (spec("anbn", n=1), 2048),
    ],
    ids=str,
)
def test_unit_counts(sp, units):
    U = unit_group(sp)
    assert U.complete and len(U) == units
    eye = np.eye(sp.dim, dtype=np.int64)
    assert any(np.array_equal(m, eye) for m in U.mats)


@pytest.mark.parametrize(
    "sp,restrict,forms",
    [
        (spec("regular2"), False, 128),
        (spec("regular"), False, 4),
        (spec("trivial2"), False, 1),
        (spec("anbn", n=1), False, 32),
        (spec("cnf", n=2, f=T), False, 4),
        (spec("regular", GF4), False, 48),
    ],
    ids=str,
)
def test_form_counts(sp, restrict, forms):
    got = enumerate_invariant_symplectic(sp, restrict)
    assert len(got) == forms
    assert enumerations_agree(sp, restrict)[0]


def test_restrict_default():
    assert not default_restrict(spec("regular2"))
    assert not default_restrict(spec("anbn", n=1))
    assert default_restrict(spec("anbn", n=2))
    assert default_restrict(spec("cnf2", n=3, f=T))


def test_restricted_basis_is_smaller():
    sp = spec("anbn", n=1)
    assert len(alternating_invariant_basis(sp, True)) < len(alternating_invariant_basis(sp, False))


@pytest.mark.parametrize(
    "sp,restrict,orbits",
    [
        (spec("regular2"), False, 5),
        (spec("anbn", n=1), False, 4),
        (spec("anbn", n=1), True, 4),
        (spec("cnf", n=2, f=T), False, 2),
        (spec("cnf", n=2, f=T2_T_1), None, 4),
        (spec("regular"), False, 4),
    ],
    ids=str,
)
def test_orbit_counts(sp, restrict, orbits):
    if restrict is None:
        restrict = default_restrict(sp)
    forms = family_forms(sp, restrict)
    units = unit_group(sp, levi_only=restrict)
    assert len(orbit_partition(forms, units)) == orbits


def test_orbits_match_labels():
    sp = spec("regular2")
    forms = family_forms(sp, False)
    parts = orbit_partition(forms, unit_group(sp))
    labels = [{canonicalize(sp, forms[i])[0].text() for i in orb} for orb in parts]
    assert all(len(s) == 1 for s in labels)
    assert len({next(iter(s)) for s in labels}) == len(parts)


def test_work_budget_enforced():
    with pytest.raises(OracleError):
        verify(spec("regular2"), budget=Budget(max_work=1000), quadratic=False)


def test_dkill_samples():
    sp = spec("cnf", n=3, f=T)
    forms = family_forms(sp, True)
    done, problems = dkill_samples(sp, forms, samples=100, seed=1)
    assert done == 100 and problems == []


@pytest.mark.parametrize(
    "sp",
    [spec("trivial2"), spec("regular"), spec("anbn", n=1), spec("cnf", n=1, f=T), spec("cnf", n=2, f=T2_T_1)],
    ids=str,
)
def test_quad_existence_brute_force(sp):
    for lab in enumerate_classes(sp):
        assert quad_exists_brute(lab) == quad_exists(lab)


@pytest.mark.parametrize(
    "sp,expected",
    [
        (spec("trivial2"), [2]),
        (spec("regular"), [1, 1, 1, 1]),
        (spec("cnf", n=1, f=T), [2]),
    ],
    ids=str,
)
def test_quad_orbits(sp, expected):
    reports = [quad_orbit_partition(lab) for lab in enumerate_classes(sp)]
    assert all(r.ok for r in reports)
    assert [len(r.orbits) for r in reports] == expected


def test_anbn_quad_orbits():
    sp = spec("anbn", n=1)
    for lab in enumerate_classes(sp):
        r = quad_orbit_partition(lab)
        assert r.ok
        if lab.params == (0, 0):
            assert len(r.orbits) == 1
        elif r.forms:
            assert len(r.orbits) == 2


def test_triple_decomposition():
    assert triple_decomposition_holds(spec("cnf", n=1, f=T))


@pytest.mark.parametrize(
    "sp",
    [spec("trivial2"), spec("regular"), spec("anbn", n=1), spec("cnf", n=2, f=T), spec("cninf", n=2), spec("cnf2", n=2, f=T)],
    ids=str,
)
def test_verify_small(sp):
    rep = verify(sp)
    assert rep.ok, rep.summary()
    assert len(rep.orbits) == len(enumerate_classes(sp))
    tsv = rep.tsv().splitlines()
    assert tsv[0] == "spec\tcheck\tresult\tdetail"
    assert all("FAIL" not in line for line in tsv)


def test_nonzero_d_form_in_same_orbit_as_reduct():
    # full enumeration of anbn(1) includes D != 0; each such form shares an orbit with a D = 0 form
    sp = spec("anbn", n=1)
    forms = family_forms(sp, False)
    parts = orbit_partition(forms, unit_group(sp))
    P = sp.swap
    h = sp.dim // 2
    for orb in parts:
        assert any((P @ forms[i] @ P)[h:, h:].is_zero() for i in orb)
    assert any(not (P @ S @ P)[h:, h:].is_zero() for S in forms)
