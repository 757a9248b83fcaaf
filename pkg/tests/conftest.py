import sys

import numpy as np
import pytest
from hypothesis import settings

from kleinforms.field import Field
from kleinforms.kgmodules import ModuleSpec, end_basis_closed
from kleinforms.matrix import Mat

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GF2 = Field(1)
GF4 = Field(2)
GF8 = Field(3)

T = (0, 1)
T_PLUS_1 = (1, 1)
T2_T_1 = (1, 1, 1)


def spec(family, F=GF2, n=0, f=()):
    return ModuleSpec(family, F, n, tuple(f))


# small specs that every classify-level test sweeps over
SWEEP = [
    spec("trivial2"),
    spec("trivial2", GF4),
    spec("regular"),
    spec("regular", GF4),
    spec("regular2"),
    spec("regular2", GF4),
    spec("anbn", n=1),
    spec("anbn", n=2),
    spec("anbn", GF4, 1),
    spec("cnf", n=1, f=T),
    spec("cnf", n=2, f=T),
    spec("cnf", n=3, f=T_PLUS_1),
    spec("cnf", n=1, f=T2_T_1),
    spec("cnf", n=2, f=T2_T_1),
    spec("cnf", GF4, 2, (2, 1, 1)),
    spec("cnf2", n=1, f=T),
    spec("cnf2", n=2, f=T),
    spec("cnf2", n=3, f=T),
    spec("cnf2", n=4, f=T_PLUS_1),
    spec("cnf2", n=5, f=T),
    spec("cnf2", n=2, f=T2_T_1),
    spec("cnf2", GF4, 3, T),
    spec("cninf", n=3),
    spec("cninf2", n=3),
    spec("cninf2", n=4),
]


def random_unit(sp, rng):
    """A random invertible endomorphism, from the closed-form End basis."""
    basis = end_basis_closed(sp)
    F = sp.field
    while True:
        coeffs = rng.integers(0, F.order, size=len(basis))
        acc = np.zeros((sp.dim, sp.dim), dtype=np.int64)
        for c, b in zip(coeffs, basis):
            acc ^= F.mul_arr(np.int64(c), b.a)
        M = Mat.wrap(F, acc)
        if M.is_invertible():
            return M


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in mod.RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
