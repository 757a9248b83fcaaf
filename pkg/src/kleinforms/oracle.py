"""Brute-force cross-checks for the classifier.

Forms are enumerated twice (per-family parametrisation and a generic solve of
g^T S g = S), partitioned into orbits under the unit group of End, and the
partition is compared with the labels returned by classify.

For the half-block families a form is (0 R; R^T D) after the basis change P.
Every unit is L N with L block diagonal ("Levi") and N = (I Y; 0 I), and the N
form a normal subgroup that only moves D.  So on the forms with D = 0 the orbit
relation is exactly the one induced by the Levi units, which is what the
restricted mode uses.  The reduction D -> 0 itself is witness-checked on
random samples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable

import numpy as np

from . import classify as C
from .field import Field
from .forms import (
    BilinearForm,
    bform_isometry_check,
    embedding_restrictions_degenerate,
    s_hat,
    triple_witness,
)
from .kgmodules import (
    HALF_BLOCK,
    ModuleSpec,
    action,
    commutant_system,
    end_basis_generic,
    field_kron,
    regular_hat,
    summand_coords,
    w_space,
)
from .matrix import (
    Mat,
    all_vectors,
    anti_identity,
    batch_invertible,
    block,
    combinations,
    identity,
    matmul_arr,
    nullspace_arr,
    zeros,
)


class OracleError(RuntimeError):
    """Budget exceeded or an internal consistency failure."""


@dataclass(frozen=True)
class Budget:
    max_end: int = 2**20  # largest End enumerated exhaustively
    max_forms: int = 2**17
    max_work: int = 10**8  # forms x units
    max_diag: int = 2**16  # diagonal corrections searched exhaustively


DEFAULT_BUDGET = Budget()


# small helpers


def _stack(mats: Iterable[Mat]) -> np.ndarray:
    return np.stack([m.a for m in mats])


def _wrap_all(F: Field, stack: np.ndarray) -> list[Mat]:
    return [Mat.wrap(F, a) for a in stack]


def _conj(F: Field, units: np.ndarray, S: np.ndarray) -> np.ndarray:
    """M^T S M for every M in the stack, S a single matrix or a matching stack."""
    return matmul_arr(F, np.swapaxes(units, -1, -2), matmul_arr(F, S, units))


def _half(spec: ModuleSpec) -> tuple[np.ndarray, int]:
    """Permutation p with (P S P)[i, j] = S[p[i], p[j]], and the half size h."""
    P = spec.swap.a
    return P.argmax(axis=1), spec.dim // 2


def _sym_hollow_basis(F: Field, h: int) -> list[np.ndarray]:
    out = []
    for i in range(h):
        for j in range(i + 1, h):
            E = np.zeros((h, h), dtype=np.int64)
            E[i, j] = E[j, i] = 1
            out.append(E)
    return out


def _chunks(total: int, size: int) -> Iterable[tuple[int, int]]:
    for lo in range(0, total, size):
        yield lo, min(total, lo + size)


def _span(F: Field, basis: list[np.ndarray], budget: int, what: str) -> np.ndarray:
    """Every F-combination of the basis matrices."""
    d = len(basis)
    if F.order**d > budget:
        raise OracleError(f"{what}: {F.order}^{d} elements exceed the budget {budget}")
    if not basis:
        raise OracleError(f"{what}: empty basis")
    return combinations(F, np.stack(basis), all_vectors(F, d))


def _invertible(F: Field, stack: np.ndarray) -> np.ndarray:
    if stack.shape[0] == 0:
        return stack
    keep = np.zeros(stack.shape[0], dtype=bool)
    for lo, hi in _chunks(stack.shape[0], 1 << 14):
        keep[lo:hi] = batch_invertible(F, stack[lo:hi])
    return stack[keep]


# enumeration of invariant symplectic forms


def default_restrict(spec: ModuleSpec, budget: Budget = DEFAULT_BUDGET) -> bool:
    """Fix D = 0 whenever the full enumeration would not fit the budget."""
    if spec.family not in HALF_BLOCK:
        return False
    F = spec.field
    h = spec.dim // 2
    try:
        units = F.order ** len(end_basis_generic(spec))
        forms = F.order ** len(alternating_invariant_basis(spec, False))
    except OracleError:
        return True
    return units > budget.max_end or forms > budget.max_forms or forms * units > budget.max_work or h > 6


def alternating_invariant_basis(spec: ModuleSpec, restrict_D: bool) -> list[np.ndarray]:
    """Basis of {S symmetric, hollow, g^T S g = S}, optionally with the D block zero."""
    F, d = spec.field, spec.dim
    act = action(spec)
    eye = np.eye(d * d, dtype=np.int64)
    rows = [field_kron(F, g.a.T, g.a.T) ^ eye for g in (act.g1, act.g2)]
    cond = []
    for i in range(d):
        r = np.zeros(d * d, dtype=np.int64)
        r[i * d + i] = 1
        cond.append(r)
        for j in range(i + 1, d):
            r = np.zeros(d * d, dtype=np.int64)
            r[i * d + j] = r[j * d + i] = 1
            cond.append(r)
    if restrict_D:
        if spec.family not in HALF_BLOCK:
            raise OracleError(f"{spec.family} has no free D block")
        p, h = _half(spec)
        for i in range(h, d):
            for j in range(h, d):
                r = np.zeros(d * d, dtype=np.int64)
                r[p[i] * d + p[j]] = 1
                cond.append(r)
    system = np.concatenate(rows + [np.stack(cond)], axis=0)
    return [v.reshape(d, d) for v in nullspace_arr(F, system)]


def _summands_degenerate(spec: ModuleSpec, stack: np.ndarray) -> np.ndarray:
    """On a squared module keep the forms whose restriction to each copy is degenerate.

    A non-degenerate restriction splits off an orthogonal summand, and the class
    lists only speak about the indecomposable forms.
    """
    if not spec.is_squared or stack.shape[0] == 0:
        return stack
    F = spec.field
    keep = np.ones(stack.shape[0], dtype=bool)
    for coords in summand_coords(spec):
        sub = stack[:, coords][:, :, coords]
        keep &= ~batch_invertible(F, sub)
    return stack[keep]


def _generic_forms(spec: ModuleSpec, restrict_D: bool, budget: Budget) -> np.ndarray:
    F = spec.field
    basis = alternating_invariant_basis(spec, restrict_D)
    forms = _invertible(F, _span(F, basis, budget.max_forms, "invariant alternating forms"))
    return _summands_degenerate(spec, forms)


def enumerate_invariant_symplectic(
    spec: ModuleSpec, restrict_D: bool | None = None, budget: Budget = DEFAULT_BUDGET
) -> list[BilinearForm]:
    """All invariant symplectic forms, by solving the invariance equations directly.

    On squared modules only forms with degenerate restrictions to both copies are kept.
    """
    if restrict_D is None:
        restrict_D = default_restrict(spec, budget)
    act = action(spec)
    return [BilinearForm(m, act, spec) for m in _wrap_all(spec.field, _generic_forms(spec, restrict_D, budget))]


def _family_grams(spec: ModuleSpec, restrict_D: bool, budget: Budget) -> np.ndarray:
    """The same set built from the per-family block shapes."""
    F, fam, n = spec.field, spec.family, spec.n
    if fam == "trivial2":
        return np.stack([anti_identity(F, 2).scale(a).a for a in range(1, F.order)])
    if fam == "regular":
        grams = [regular_hat(F, (0, b, c, d)).a for b, c, d in product(F.elements(), repeat=3)]
        return _invertible(F, np.stack(grams))
    if fam == "regular2":
        alt = [regular_hat(F, (0, b, c, b ^ c)) for b, c in product(F.elements(), repeat=2)]
        full = [regular_hat(F, x) for x in product(F.elements(), repeat=4)]
        if len(alt) ** 2 * len(full) > budget.max_forms:
            raise OracleError("regular2 parametrisation exceeds the budget")
        grams = [block([[a, b], [b.T, c]]).a for a in alt for b in full for c in alt]
        return _invertible(F, np.stack(grams))
    # half-block families: (0 R; R^T D) in the delegated basis, moved back by P
    dspec = spec.delegate
    if fam == "anbn":
        h = 2 * n + 1
        rs = [
            C._anbn_block(F, n, x, om).a
            for x in range(1, F.order)
            for om in product(F.elements(), repeat=2 * n)
        ]
    else:
        W = [B.a for B in w_space(ModuleSpec("cnf", F, n, dspec.f)).elements()]
        if dspec.family == "cnf":
            rs = W
        else:
            if len(W) ** 3 > budget.max_forms:
                raise OracleError("cnf2 parametrisation exceeds the budget")
            singular = [a for a in W if not Mat.wrap(F, a).is_invertible()]
            rs = [np.block([[a, b], [b.T, c]]) for a in singular for b in W for c in singular]
        h = rs[0].shape[0]
    R = _invertible(F, np.stack(rs))
    Ds = [np.zeros((h, h), dtype=np.int64)]
    if not restrict_D:
        Ds = list(_span(F, _sym_hollow_basis(F, h), budget.max_forms, "D blocks")) if h > 1 else Ds
    if R.shape[0] * len(Ds) > budget.max_forms:
        raise OracleError("half-block parametrisation exceeds the budget")
    Z = np.zeros((h, h), dtype=np.int64)
    P = spec.swap.a
    out = []
    for r in R:
        for D in Ds:
            S = np.block([[Z, r], [r.T, D]])
            out.append(P @ S @ P)
    return np.stack(out)


def family_forms(spec: ModuleSpec, restrict_D: bool | None = None, budget: Budget = DEFAULT_BUDGET) -> list[Mat]:
    if restrict_D is None:
        restrict_D = default_restrict(spec, budget)
    return _wrap_all(spec.field, _family_grams(spec, restrict_D, budget))


def enumerations_agree(spec: ModuleSpec, restrict_D: bool, budget: Budget = DEFAULT_BUDGET) -> tuple[bool, int, int]:
    a = {m.tobytes() for m in _generic_forms(spec, restrict_D, budget)}
    b = {m.tobytes() for m in _family_grams(spec, restrict_D, budget)}
    return a == b, len(a), len(b)


# units


@dataclass(frozen=True, eq=False)
class UnitSet:
    """Invertible End elements: the whole group, or a generating set of it."""

    field: Field
    mats: np.ndarray
    complete: bool

    def __len__(self) -> int:
        return self.mats.shape[0]

    def as_mats(self) -> list[Mat]:
        return _wrap_all(self.field, self.mats)


def _levi_basis(spec: ModuleSpec) -> list[np.ndarray]:
    """End elements with zero top-right block in the delegated basis."""
    F, d = spec.field, spec.dim
    p, h = _half(spec)
    act = action(spec)
    sys_ = commutant_system(act)
    extra = []
    for i in range(h):
        for j in range(h, d):
            r = np.zeros(d * d, dtype=np.int64)
            r[p[i] * d + p[j]] = 1
            extra.append(r)
    return [v.reshape(d, d) for v in nullspace_arr(F, np.concatenate([sys_, np.stack(extra)]))]


def _unipotent_generators(spec: ModuleSpec, Ys: Iterable[np.ndarray]) -> list[np.ndarray]:
    d = spec.dim
    h = d // 2
    P = spec.swap.a
    out = []
    for Y in Ys:
        N = np.eye(d, dtype=np.int64)
        N[:h, h:] = Y
        out.append(P @ N @ P)
    return out


def _field_additive_generators(F: Field) -> list[int]:
    return [1 << i for i in range(F.e)]


def unit_group(spec: ModuleSpec, budget: Budget = DEFAULT_BUDGET, levi_only: bool = False) -> UnitSet:
    """Units of End.  Exhaustive when small; otherwise Levi units plus unipotent generators.

    With levi_only the block-diagonal units alone are returned (a complete group).
    """
    F = spec.field
    if levi_only:
        units = _invertible(F, _span(F, _levi_basis(spec), budget.max_end, "Levi part of End"))
        return UnitSet(F, units, True)
    basis = [b.a for b in end_basis_generic(spec)]
    if F.order ** len(basis) <= budget.max_end:
        return UnitSet(F, _invertible(F, _span(F, basis, budget.max_end, "End")), True)
    if spec.family not in HALF_BLOCK:
        raise OracleError(f"End of {spec.header()} has {F.order}^{len(basis)} elements; over budget")
    levi = _invertible(F, _span(F, _levi_basis(spec), budget.max_end, "Levi part of End"))
    h = spec.dim // 2
    Ys = []
    for i in range(h):
        for j in range(h):
            for x in _field_additive_generators(F):
                Y = np.zeros((h, h), dtype=np.int64)
                Y[i, j] = x
                Ys.append(Y)
    return UnitSet(F, np.concatenate([levi, np.stack(_unipotent_generators(spec, Ys))]), False)


# orbit partition


@dataclass
class Orbit:
    members: list[int]
    labels: set[str] = field(default_factory=set)

    @property
    def size(self) -> int:
        return len(self.members)


def _orbits(
    F: Field,
    forms: np.ndarray,
    units: UnitSet,
    act_on: Callable[[np.ndarray, np.ndarray], np.ndarray],
    key: Callable[[np.ndarray], bytes],
) -> list[list[int]]:
    index = {key(f): i for i, f in enumerate(forms)}
    if len(index) != forms.shape[0]:
        raise OracleError("duplicate forms in the input")
    seen = np.zeros(forms.shape[0], dtype=bool)
    orbits = []
    for start in range(forms.shape[0]):
        if seen[start]:
            continue
        members = [start]
        seen[start] = True
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for lo, hi in _chunks(len(units), 1 << 12):
                for img in act_on(units.mats[lo:hi], forms[i]):
                    j = index.get(key(img))
                    if j is None:
                        raise OracleError("form set is not closed under the units")
                    if not seen[j]:
                        seen[j] = True
                        members.append(j)
                        if not units.complete:
                            queue.append(j)
            if units.complete:
                break
        orbits.append(sorted(members))
    return orbits


def orbit_partition(forms: list[Mat], units: UnitSet) -> list[list[int]]:
    """Orbits of S -> M^T S M, as sorted index lists in order of first member."""
    if not forms:
        return []
    F = forms[0].field
    stack = _stack(forms)
    return _orbits(F, stack, units, lambda U, S: _conj(F, U, S), lambda a: a.tobytes())


# quadratic forms


def _quad_key(Q: np.ndarray) -> bytes:
    return np.diagonal(Q).tobytes()


def _invariant_diagonals(spec: ModuleSpec, S: Mat, budget: Budget) -> np.ndarray:
    """All d with S^ + diag(d) invariant, by direct search (or a linear solve when too many)."""
    F, d = spec.field, spec.dim
    act = action(spec)
    base = s_hat(S).a
    gs = [g.a for g in (act.g1, act.g2)]
    if F.order**d <= budget.max_diag:
        cands = all_vectors(F, d)
        ok = np.ones(cands.shape[0], dtype=bool)
        Qs = np.repeat(base[None], cands.shape[0], axis=0)
        idx = np.arange(d)
        Qs[:, idx, idx] = cands
        for g in gs:
            diff = matmul_arr(F, g.T, matmul_arr(F, Qs, g)) ^ Qs
            sym = (diff == np.swapaxes(diff, 1, 2)).all(axis=(1, 2))
            hollow = ~np.diagonal(diff, axis1=1, axis2=2).any(axis=1)
            ok &= sym & hollow
        return cands[ok]
    # diag(g^T Q g) + diag(Q) = 0 is affine in d; the off-diagonal part only involves S
    rows, rhs = [], []
    sq = F.square_table
    for g in gs:
        gS = matmul_arr(F, g.T, matmul_arr(F, base, g))
        sym_part = gS ^ base
        if not np.array_equal(sym_part ^ sym_part.T, np.zeros_like(base)):
            return np.zeros((0, d), dtype=np.int64)
        A = sq[g].T.copy()
        A[np.arange(d), np.arange(d)] ^= 1
        rows.append(A)
        rhs.append(np.diagonal(gS).copy())
    A = np.concatenate(rows)
    b = np.concatenate(rhs)
    aug = np.concatenate([A, b[:, None]], axis=1)
    sols = nullspace_arr(F, aug)
    homog = [v[:d] for v in sols if v[d] == 0]
    part = [v for v in sols if v[d] != 0]
    if not part:
        return np.zeros((0, d), dtype=np.int64)
    v = part[0]
    p0 = F.mul_arr(v[:d], np.int64(F.inv(int(v[d]))))
    if not homog:
        return p0[None]
    span = combinations(F, np.stack(homog), all_vectors(F, len(homog)))
    return span ^ p0[None]


def quad_exists_brute(label: C.ClassLabel, budget: Budget = DEFAULT_BUDGET) -> bool:
    return _invariant_diagonals(label.spec, C.representative(label).gram, budget).shape[0] > 0


def _stabilizer(spec: ModuleSpec, S: Mat, budget: Budget) -> UnitSet:
    F = spec.field
    basis = end_basis_generic(spec)
    exhaustive = F.order ** len(basis) <= budget.max_end
    if exhaustive and (spec.family not in HALF_BLOCK or F.order ** len(basis) <= 2**16):
        units = unit_group(spec, budget)
        keep = (_conj(F, units.mats, S.a) == S.a[None]).all(axis=(1, 2))
        return UnitSet(F, units.mats[keep], True)
    if spec.family not in HALF_BLOCK:
        raise OracleError(f"stabilizer of a form on {spec.header()} is over budget")
    # Levi stabilizer times {(I R^-T Sigma; 0 I) : Sigma symmetric}
    levi = unit_group(spec, budget, levi_only=True).mats
    keep = (_conj(F, levi, S.a) == S.a[None]).all(axis=(1, 2))
    h = spec.dim // 2
    Sd = spec.swap @ S @ spec.swap
    RiT = Sd[:h, h:].inverse().T
    Ys = []
    for i in range(h):
        for j in range(i, h):
            for x in _field_additive_generators(F):
                Sig = np.zeros((h, h), dtype=np.int64)
                Sig[i, j] = Sig[j, i] = x
                Ys.append((RiT @ Mat.wrap(F, Sig)).a)
    gens = np.concatenate([levi[keep], np.stack(_unipotent_generators(spec, Ys))])
    return UnitSet(F, gens, False)


@dataclass
class QuadReport:
    label: C.ClassLabel
    forms: int
    orbits: list[list[int]]
    quad_labels: list[set[str]]
    expected: int

    @property
    def ok(self) -> bool:
        if not self.forms:
            return self.expected == 0
        seen = [next(iter(s)) for s in self.quad_labels if len(s) == 1]
        return (
            len(self.orbits) == self.expected
            and len(seen) == len(self.orbits)
            and len(set(seen)) == len(seen)
        )


def quad_orbit_partition(label: C.ClassLabel, budget: Budget = DEFAULT_BUDGET) -> QuadReport:
    """Orbits of invariant quadratic refinements of representative(label) under its stabilizer."""
    spec = label.spec
    F = spec.field
    S = C.representative(label).gram
    diags = _invariant_diagonals(spec, S, budget)
    exists = C.quad_exists(label)
    expected = len(C.quad_representatives(label).forms) if exists else 0
    if diags.shape[0] == 0:
        return QuadReport(label, 0, [], [], expected)
    base = s_hat(S).a
    Qs = np.repeat(base[None], diags.shape[0], axis=0)
    idx = np.arange(spec.dim)
    Qs[:, idx, idx] = diags
    units = _stabilizer(spec, S, budget)
    orbits = _orbits(F, Qs, units, lambda U, Q: _conj(F, U, Q), _quad_key)
    qlabels = []
    for orb in orbits:
        names = set()
        for i in orb:
            try:
                ql, _ = C.quad_canonicalize(label, Mat.wrap(F, Qs[i]))
                names.add(ql.text())
            except (C.ClassifyError, AssertionError) as exc:
                names.add(f"error: {exc}")
        qlabels.append(names)
    return QuadReport(label, int(diags.shape[0]), orbits, qlabels, expected)


# structural checks


def dkill_samples(spec: ModuleSpec, forms: list[Mat], samples: int = 100, seed: int = 0) -> tuple[int, list[str]]:
    """Random (0 R; R^T D) with D != 0: the unipotent witness reaches D = 0 and the label is unchanged."""
    if spec.family not in HALF_BLOCK or not forms:
        return 0, []
    F, d = spec.field, spec.dim
    h = d // 2
    if h < 2:
        return 0, []
    rng = np.random.default_rng(seed)
    P = spec.swap
    act = action(spec)
    problems = []
    done = 0
    while done < samples:
        S0 = P @ forms[int(rng.integers(len(forms)))] @ P
        R = S0[:h, h:]
        up = np.triu(rng.integers(0, F.order, size=(h, h)), 1)
        if not up.any():
            continue
        D = Mat.wrap(F, up ^ up.T)
        Sd = block([[zeros(F, h), R], [R.T, D]])
        Y = R.T.inverse() @ Mat.wrap(F, up)
        N = block([[identity(F, h), Y], [zeros(F, h), identity(F, h)]])
        target = block([[zeros(F, h), R], [R.T, zeros(F, h)]])
        S, T, Nm = P @ Sd @ P, P @ target @ P, P @ N @ P
        if not bform_isometry_check(BilinearForm(S, act, spec), BilinearForm(T, act, spec), Nm):
            problems.append("D-kill witness failed")
        elif C.canonicalize(spec, S)[0] != C.canonicalize(spec, T)[0]:
            problems.append("label changed under D-kill")
        done += 1
    return done, problems


def embedded_copies_degenerate(spec: ModuleSpec) -> tuple[int, int]:
    """Embeddings x -> (a1 x, a2 x) of M into the paired module, over every class representative.

    Returns (embeddings checked, embeddings with a non-degenerate restriction).
    """
    ends = list(_wrap_all(spec.field, _span(spec.field, [b.a for b in end_basis_generic(spec)], 2**12, "End")))
    checked = bad = 0
    for label in C.enumerate_classes(spec):
        c, b = embedding_restrictions_degenerate(C.representative(label), ends)
        checked += c
        bad += b
    return checked, bad


def triple_decomposition_holds(spec: ModuleSpec) -> bool:
    return all(triple_witness(C.representative(lab)) is not None for lab in C.enumerate_classes(spec))


# the full pipeline


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class OrbitReport:
    spec: ModuleSpec
    restrict_D: bool
    total: int = 0
    units: int = 0
    orbits: list[Orbit] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    discrepancies: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and not self.discrepancies

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, ok, detail))

    def tsv(self) -> str:
        head = self.spec.field.header() + " " + self.spec.header()
        lines = ["spec\tcheck\tresult\tdetail"]
        for c in self.checks:
            lines.append(f"{head}\t{c.name}\t{'PASS' if c.ok else 'FAIL'}\t{c.detail}")
        lines.append("spec\torbit\tsize\tlabel")
        for i, o in enumerate(self.orbits):
            lines.append(f"{head}\t{i}\t{o.size}\t{'|'.join(sorted(o.labels))}")
        return "\n".join(lines)

    def summary(self) -> str:
        mode = "D = 0" if self.restrict_D else "full"
        out = [
            f"{self.spec.field.header()} {self.spec.header()}: {self.total} forms ({mode}), "
            f"{self.units} units, {len(self.orbits)} orbits"
        ]
        for c in self.checks:
            out.append(f"  {'PASS' if c.ok else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else ""))
        for d in self.discrepancies[:20]:
            out.append(f"  ! {d}")
        return "\n".join(out)


def verify(
    spec: ModuleSpec,
    restrict_D: bool | None = None,
    budget: Budget = DEFAULT_BUDGET,
    samples: int = 100,
    seed: int = 0,
    quadratic: bool = True,
) -> OrbitReport:
    if restrict_D is None:
        restrict_D = default_restrict(spec, budget)
    rep = OrbitReport(spec, restrict_D)
    F = spec.field
    rng = np.random.default_rng(seed)

    same, na, nb = enumerations_agree(spec, restrict_D, budget)
    rep.add("generic and family enumerations agree", same, f"{na} vs {nb} forms")

    forms = [b.gram for b in enumerate_invariant_symplectic(spec, restrict_D, budget)]
    rep.total = len(forms)
    units = unit_group(spec, budget, levi_only=restrict_D)
    rep.units = len(units)
    if len(forms) * len(units) > budget.max_work:
        raise OracleError(f"{len(forms)} forms x {len(units)} units exceeds the work budget")
    parts = orbit_partition(forms, units)

    labels: list[C.ClassLabel] = []
    witness_bad = 0
    target_cache: dict[C.ClassLabel, BilinearForm] = {}
    act = action(spec)
    for S in forms:
        lab, M = C.canonicalize(spec, S)
        rep_form = target_cache.setdefault(lab, C.representative(lab))
        if not bform_isometry_check(BilinearForm(S, act, spec), rep_form, M):
            witness_bad += 1
            rep.discrepancies.append(f"witness failed for {lab.text()}")
        labels.append(lab)
    rep.add("witness soundness", witness_bad == 0, f"{len(forms)} witnesses")

    for orb in parts:
        rep.orbits.append(Orbit(orb, {labels[i].text() for i in orb}))
    multi = [o for o in rep.orbits if len(o.labels) != 1]
    for o in multi:
        rep.discrepancies.append(f"orbit of size {o.size} has labels {sorted(o.labels)}")
    seen = [next(iter(o.labels)) for o in rep.orbits if len(o.labels) == 1]
    clash = len(seen) != len(set(seen))
    if clash:
        rep.discrepancies.append("two orbits share a label")
    expected = {lab.text() for lab in C.enumerate_classes(spec)}
    rep.add(
        "label bijection",
        not multi and not clash and set(seen) == expected,
        f"{len(rep.orbits)} orbits, {len(expected)} labels",
    )
    n_classes = C.count_classes(spec)
    rep.add(
        "count identity",
        n_classes == len(expected) == len(rep.orbits),
        f"formula {n_classes}, enumerated {len(expected)}, orbits {len(rep.orbits)}",
    )

    if units.complete:
        unstable = 0
        for S, lab in zip(forms, labels):
            M = Mat.wrap(F, units.mats[int(rng.integers(len(units)))])
            if C.canonicalize(spec, M.T @ S @ M)[0] != lab:
                unstable += 1
        rep.add("label stability under random units", unstable == 0, f"{len(forms)} trials")

    if spec.family in HALF_BLOCK and restrict_D:
        done, problems = dkill_samples(spec, forms, samples, seed)
        rep.discrepancies += problems
        rep.add("D-kill reduction", not problems, f"{done} random D")

    if spec.is_infinite_type:
        P = spec.swap
        dforms = {(P @ S @ P).key() for S in forms}
        other = {b.gram.key() for b in enumerate_invariant_symplectic(spec.delegate, restrict_D, budget)}
        dlabels = all(
            C.canonicalize(spec.delegate, P @ S @ P)[0].params == lab.params for S, lab in zip(forms, labels)
        )
        rep.add("agrees with the finite-type family after the basis swap", dforms == other and dlabels)

    if quadratic:
        mism = []
        for lab in C.enumerate_classes(spec):
            if quad_exists_brute(lab, budget) != C.quad_exists(lab):
                mism.append(lab.text())
        rep.discrepancies += [f"quadratic existence differs at {m}" for m in mism]
        rep.add("quadratic existence", not mism, f"{len(C.enumerate_classes(spec))} labels")
    return rep
