"""The candidate modules for the Klein four group and their linear algebra.

Each family is realised in one fixed basis:

  trivial2   two copies of the trivial module
  regular    the group algebra kG in the basis 1, g1, g2, g1g2
  regular2   kG + kG in the basis (1,0), (g1,0), ..., (0,1), (0,g1), ...
  anbn       A_n + B_n in the reordered basis where g1 = (I T_2(1); 0 I)
  cnf        C_n(f) with g1 = (I I; 0 I), g2 = (I P; 0 I), P companion of f^n
  cnf2       C_n(f)^2 with the two copies interleaved blockwise
  cninf      C_n(inf) with g1 = (I T_2(1); 0 I), g2 = (I I; 0 I)
  cninf2     C_n(inf)^2, interleaved the same way

The cninf families are handled by conjugating with the reversal
diag(J, J) (resp. diag(J, J, J, J)), J the n x n anti-identity, which turns
them into cnf(n, T) (resp. cnf2(n, T)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .field import Extension, Field, make_extension, poly_pow
from .matrix import (
    Mat,
    MatrixError,
    all_vectors,
    anti_identity,
    block,
    block_diag,
    identity,
    lh_from_coeffs,
    matmul_arr,
    nullspace_arr,
    rref,
    single_entry,
    tau_transpose,
    toeplitz,
    ut_from_coeffs,
    zeros,
)

FAMILIES = ("trivial2", "regular", "regular2", "anbn", "cnf", "cnf2", "cninf", "cninf2")
_NEEDS_N = {"anbn", "cnf", "cnf2", "cninf", "cninf2"}
_NEEDS_F = {"cnf", "cnf2"}
SQUARED = {"trivial2", "regular2", "cnf2", "cninf2"}
# families whose forms are (0 R; R^T D) with a free symmetric hollow D
HALF_BLOCK = {"anbn", "cnf", "cnf2", "cninf", "cninf2"}

T_POLY = (0, 1)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class GroupAction:
    g1: Mat
    g2: Mat

    @property
    def dim(self) -> int:
        return self.g1.rows

    def elements(self) -> tuple[Mat, Mat, Mat]:
        return self.g1, self.g2, self.g1 @ self.g2

    def conjugate(self, P: Mat) -> "GroupAction":
        Pi = P.inverse()
        return GroupAction(Pi @ self.g1 @ P, Pi @ self.g2 @ P)

    def direct_sum(self, other: "GroupAction") -> "GroupAction":
        return GroupAction(block_diag(self.g1, other.g1), block_diag(self.g2, other.g2))

    def relations_hold(self) -> bool:
        F, n = self.g1.field, self.dim
        one = identity(F, n)
        return self.g1 @ self.g1 == one and self.g2 @ self.g2 == one and self.g1 @ self.g2 == self.g2 @ self.g1


@dataclass(frozen=True)
class ModuleSpec:
    family: str
    field: Field
    n: int = 0
    f: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.family in _NEEDS_N:
            if self.n < 1:
                raise SpecError(f"{self.family} needs n >= 1")
        elif self.n not in (0,):
            raise SpecError(f"{self.family} takes no n")
        if self.family in _NEEDS_F:
            if not self.f:
                raise SpecError(f"{self.family} needs a polynomial f")
            try:
                self.ext
            except ValueError as exc:
                raise SpecError(str(exc)) from exc
        elif self.f:
            raise SpecError(f"{self.family} takes no polynomial")

    def __str__(self) -> str:
        return self.header()

    def header(self) -> str:
        parts = ["module", self.family, str(self.n)]
        if self.f:
            parts.append(",".join(str(c) for c in self.f))
        return " ".join(parts)

    @property
    def is_squared(self) -> bool:
        return self.family in SQUARED

    @property
    def is_infinite_type(self) -> bool:
        return self.family in ("cninf", "cninf2")

    @cached_property
    def ext(self) -> Extension:
        if self.family in ("cnf", "cnf2"):
            return make_extension(self.field, self.f)
        if self.family in ("cninf", "cninf2"):
            return make_extension(self.field, T_POLY)
        raise SpecError(f"{self.family} has no extension data")

    @property
    def m(self) -> int:
        return self.ext.m

    @property
    def dim(self) -> int:
        fam, n = self.family, self.n
        return {
            "trivial2": 2,
            "regular": 4,
            "regular2": 8,
            "anbn": 4 * n + 2,
            "cninf": 2 * n,
            "cninf2": 4 * n,
        }.get(fam) or (2 if fam == "cnf" else 4) * self.m * n

    @cached_property
    def delegate(self) -> "ModuleSpec":
        """The cnf-type spec this one is computed through (itself for cnf, cnf2)."""
        if self.family == "cninf":
            return ModuleSpec("cnf", self.field, self.n, T_POLY)
        if self.family == "cninf2":
            return ModuleSpec("cnf2", self.field, self.n, T_POLY)
        return self

    @cached_property
    def swap(self) -> Mat:
        """Basis change P with P^-1 g P equal to the delegate's generators (up to order)."""
        F, n = self.field, self.n
        if self.family == "cninf":
            return block_diag(*[anti_identity(F, n)] * 2)
        if self.family == "cninf2":
            return block_diag(*[anti_identity(F, n)] * 4)
        return identity(F, self.dim)

    def is_f_linear(self) -> bool:
        """f in {T, T + 1}."""
        return self.delegate.f in ((0, 1), (1, 1))


def regular_hat(F: Field, x: tuple[int, int, int, int]) -> Mat:
    """4 x 4 matrix of multiplication by a + b g1 + c g2 + d g1g2 on kG."""
    a, b, c, d = x
    J2, I2, Z2 = anti_identity(F, 2), identity(F, 2), zeros(F, 2)
    parts = [
        identity(F, 4).scale(a),
        block_diag(J2, J2).scale(b),
        block([[Z2, I2], [I2, Z2]]).scale(c),
        block([[Z2, J2], [J2, Z2]]).scale(d),
    ]
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def regular_from_hat(M: Mat) -> tuple[int, int, int, int] | None:
    """Inverse of regular_hat, or None if M is not of that shape."""
    x = tuple(M.a[0].tolist())
    return x if regular_hat(M.field, x) == M else None  # type: ignore[return-value]


def _unipotent(top: Mat) -> Mat:
    F, n = top.field, top.rows
    return block([[identity(F, n), top], [zeros(F, n), identity(F, n)]])


def companion(F: Field, f: tuple[int, ...], n: int) -> Mat:
    """Companion matrix of f^n: ones below the diagonal, coefficients in the last column."""
    fn = poly_pow(F, f, n)
    d = len(fn) - 1
    a = np.zeros((d, d), dtype=np.int64)
    for i in range(1, d):
        a[i, i - 1] = 1
    a[:, d - 1] = fn[:d]
    return Mat.wrap(F, a)


def poly_of_matrix(f: tuple[int, ...], M: Mat) -> Mat:
    F = M.field
    out = zeros(F, M.rows)
    for c in reversed(f):
        out = out @ M + identity(F, M.rows).scale(c)
    return out


def anbn_summands(F: Field, n: int) -> tuple[GroupAction, GroupAction]:
    """The actions on A_n (dim 2n+1) and B_n (dim 2n+1) separately."""

    def two_block(p: int, q: int, top: Mat) -> Mat:
        return block([[identity(F, p), top], [zeros(F, q, p), identity(F, q)]])

    A = GroupAction(
        two_block(n, n + 1, toeplitz(F, n, n + 1, 2, 1)),
        two_block(n, n + 1, toeplitz(F, n, n + 1, 1, 1)),
    )
    B = GroupAction(
        two_block(n + 1, n, toeplitz(F, n + 1, n, 1, 1)),
        two_block(n + 1, n, toeplitz(F, n + 1, n, 0, 1)),
    )
    return A, B


def action(spec: ModuleSpec) -> GroupAction:
    return _action(spec)


_action_cache: dict[ModuleSpec, GroupAction] = {}


def _action(spec: ModuleSpec) -> GroupAction:
    if spec in _action_cache:
        return _action_cache[spec]
    F, n, fam = spec.field, spec.n, spec.family
    if fam == "trivial2":
        act = GroupAction(identity(F, 2), identity(F, 2))
    elif fam == "regular":
        act = GroupAction(regular_hat(F, (0, 1, 0, 0)), regular_hat(F, (0, 0, 1, 0)))
    elif fam == "regular2":
        h1, h2 = regular_hat(F, (0, 1, 0, 0)), regular_hat(F, (0, 0, 1, 0))
        act = GroupAction(block_diag(h1, h1), block_diag(h2, h2))
    elif fam == "anbn":
        d = 2 * n + 1
        act = GroupAction(
            _unipotent(toeplitz(F, d, d, 2, 1)),
            _unipotent(identity(F, d) + single_entry(F, d, d, n + 1, n + 1, 1)),
        )
    elif fam == "cnf":
        Pi = companion(F, spec.f, n)
        act = GroupAction(_unipotent(identity(F, Pi.rows)), _unipotent(Pi))
    elif fam == "cnf2":
        Pi = companion(F, spec.f, n)
        act = GroupAction(_unipotent(identity(F, 2 * Pi.rows)), _unipotent(block_diag(Pi, Pi)))
    elif fam == "cninf":
        act = GroupAction(_unipotent(toeplitz(F, n, n, 2, 1)), _unipotent(identity(F, n)))
    else:
        T2 = toeplitz(F, n, n, 2, 1)
        act = GroupAction(_unipotent(block_diag(T2, T2)), _unipotent(identity(F, 2 * n)))
    _action_cache[spec] = act
    return act


# index bookkeeping


def summand_coords(spec: ModuleSpec) -> tuple[list[int], list[int]]:
    """Coordinates of the two copies in a squared family."""
    d = spec.dim
    if spec.family == "trivial2":
        return [0], [1]
    if spec.family == "regular2":
        return list(range(4)), list(range(4, 8))
    if spec.family in ("cnf2", "cninf2"):
        q = d // 4
        first = list(range(q)) + list(range(2 * q, 3 * q))
        second = list(range(q, 2 * q)) + list(range(3 * q, 4 * q))
        return first, second
    raise SpecError(f"{spec.family} is not a squared family")


# Jordan data for C_n(f)


@dataclass(frozen=True, eq=False)
class JordanData:
    ext: Extension
    n: int
    Pi: Mat
    J: Mat
    V: Mat
    Vinv: Mat

    @property
    def K(self) -> Field:
        return self.ext.ext

    @property
    def k(self) -> Field:
        return self.ext.base

    @property
    def m(self) -> int:
        return self.ext.m

    def up(self, M: Mat) -> Mat:
        """Embed a matrix over k into K."""
        return M.map(self.ext.embed_table, self.K)

    def down(self, M: Mat) -> Mat:
        return Mat.wrap(self.k, self.ext.restrict_arr(M.a))

    def sigma(self, i: int, X: Mat) -> Mat:
        return Mat.wrap(self.K, self.ext.sigma_arr(i, X.a))

    def script_D(self, X: Mat) -> Mat:
        return block_diag(*[self.sigma(i, X) for i in range(1, self.m + 1)])

    def script_V(self, X: Mat) -> Mat:
        """V^T diag(X, sigma_2 X, ...) V, landing in k."""
        return self.down(self.V.T @ self.script_D(X) @ self.V)

    def script_V_inverse(self, B: Mat) -> Mat:
        D = self.Vinv.T @ self.up(B) @ self.Vinv
        X = D[: self.n, : self.n]
        if self.script_D(X) != D:
            raise MatrixError("matrix is not in the image of the Hankel parametrisation")
        return X

    def centralizer_elem(self, X: Mat) -> Mat:
        return self.down(self.Vinv @ self.script_D(X) @ self.V)

    def centralizer_param(self, A: Mat) -> Mat:
        D = self.V @ self.up(A) @ self.Vinv
        X = D[: self.n, : self.n]
        if self.script_D(X) != D:
            raise MatrixError("matrix does not commute with the companion matrix")
        return X


_jordan_cache: dict[ModuleSpec, JordanData] = {}


def jordan_data(spec: ModuleSpec) -> JordanData:
    spec = ModuleSpec("cnf", spec.field, spec.n, spec.delegate.f) if spec.family != "cnf" else spec
    if spec in _jordan_cache:
        return _jordan_cache[spec]
    ext, n, F = spec.ext, spec.n, spec.field
    K, m = ext.ext, ext.m
    Pi = companion(F, spec.f, n)
    J = block_diag(*[identity(K, n).scale(c) + toeplitz(K, n, n, 2, 1) for c in ext.conjugates()])
    col = np.zeros(m * n, dtype=np.int64)
    col[n - 1 :: n] = 1
    cols = [col]
    for _ in range(m * n - 1):
        cols.append(matmul_arr(K, J.a, cols[-1][:, None])[:, 0])
    V = Mat.wrap(K, np.stack(cols, axis=1))
    jd = JordanData(ext, n, Pi, J, V, V.inverse())
    _jordan_cache[spec] = jd
    return jd


def k_basis_of_K(ext: Extension) -> list[int]:
    """eps^0, ..., eps^(m-1): a basis of K over the embedded copy of k."""
    return [ext.ext.pow(ext.epsilon, j) for j in range(ext.m)]


class WSpace:
    """Matrices B over k with P^T B = B P (P the companion matrix), via Hankel X over K."""

    def __init__(self, spec: ModuleSpec):
        self.jd = jordan_data(spec)

    @property
    def dim(self) -> int:
        return self.jd.m * self.jd.n

    def to_matrix(self, X: Mat) -> Mat:
        return self.jd.script_V(X)

    def from_matrix(self, B: Mat) -> Mat:
        return self.jd.script_V_inverse(B)

    def contains(self, B: Mat) -> bool:
        Pi = self.jd.Pi
        return Pi.T @ B == B @ Pi

    def params(self) -> Iterator[Mat]:
        K, n = self.jd.K, self.jd.n
        for coeffs in all_vectors(K, n):
            yield lh_from_coeffs(K, n, coeffs.tolist())

    def elements(self) -> Iterator[Mat]:
        for X in self.params():
            yield self.to_matrix(X)


class Centralizer:
    """Matrices commuting with the companion matrix, via upper triangular Toeplitz X over K."""

    def __init__(self, spec: ModuleSpec):
        self.jd = jordan_data(spec)

    @property
    def dim(self) -> int:
        return self.jd.m * self.jd.n

    def to_matrix(self, X: Mat) -> Mat:
        return self.jd.centralizer_elem(X)

    def from_matrix(self, A: Mat) -> Mat:
        return self.jd.centralizer_param(A)

    def contains(self, A: Mat) -> bool:
        Pi = self.jd.Pi
        return A @ Pi == Pi @ A

    def basis(self) -> list[Mat]:
        K, n = self.jd.K, self.jd.n
        return [
            self.to_matrix(toeplitz(K, n, n, i, kappa))
            for i in range(1, n + 1)
            for kappa in k_basis_of_K(self.jd.ext)
        ]

    def params(self) -> Iterator[Mat]:
        K, n = self.jd.K, self.jd.n
        for coeffs in all_vectors(K, n):
            yield ut_from_coeffs(K, n, coeffs.tolist())


def w_space(spec: ModuleSpec) -> WSpace:
    return WSpace(spec)


def centralizer(spec: ModuleSpec) -> Centralizer:
    return Centralizer(spec)


# endomorphism rings


def field_kron(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    r1, c1 = A.shape
    r2, c2 = B.shape
    return F.mul_arr(A[:, None, :, None], B[None, :, None, :]).reshape(r1 * r2, c1 * c2)


def commutant_system(act: GroupAction) -> np.ndarray:
    """Rows of the linear conditions M g = g M on vec(M) (row-major)."""
    d = act.dim
    one = np.eye(d, dtype=np.int64)
    rows = [np.kron(one, g.a.T) ^ np.kron(g.a, one) for g in (act.g1, act.g2)]
    return np.concatenate(rows, axis=0)


def span_basis(F: Field, mats: list[np.ndarray]) -> np.ndarray:
    """Row-reduced basis (as flattened rows) of the span of some matrices."""
    if not mats:
        return np.zeros((0, 0), dtype=np.int64)
    red, piv = rref(F, np.stack([m.reshape(-1) for m in mats]))
    return red[: len(piv)]


def end_basis_generic(spec: ModuleSpec) -> list[Mat]:
    act = action(spec)
    d = act.dim
    return [Mat.wrap(spec.field, v.reshape(d, d)) for v in nullspace_arr(spec.field, commutant_system(act))]


def end_basis_closed(spec: ModuleSpec) -> list[Mat]:
    F, n, fam = spec.field, spec.n, spec.family
    d = spec.dim
    out: list[Mat] = []
    if fam == "trivial2":
        out = [single_entry(F, 2, 2, i, j, 1) for i in (1, 2) for j in (1, 2)]
    elif fam == "regular":
        out = [regular_hat(F, tuple(int(i == j) for j in range(4))) for i in range(4)]  # type: ignore[arg-type]
    elif fam == "regular2":
        Z = zeros(F, 4)
        for i in range(4):
            h = regular_hat(F, tuple(int(i == j) for j in range(4)))  # type: ignore[arg-type]
            out += [block([[h, Z], [Z, Z]]), block([[Z, h], [Z, Z]]), block([[Z, Z], [h, Z]]), block([[Z, Z], [Z, h]])]
    elif fam == "anbn":
        sizes = [n, n + 1, n + 1, n]
        off = np.cumsum([0] + sizes)

        def put(pieces: list[tuple[int, int, Mat]]) -> Mat:
            a = np.zeros((d, d), dtype=np.int64)
            for bi, bj, M in pieces:
                a[off[bi] : off[bi] + M.rows, off[bj] : off[bj] + M.cols] = M.a
            return Mat.wrap(F, a)

        out.append(put([(0, 0, identity(F, n)), (2, 2, identity(F, n + 1))]))
        out.append(put([(1, 1, identity(F, n + 1)), (3, 3, identity(F, n))]))
        for i in range(1 - n + 1, n + 2):
            S = toeplitz(F, n, n + 1, i, 1)
            out.append(put([(0, 1, S), (2, 3, tau_transpose(S))]))
        h = 2 * n + 1
        for i in range(h):
            for j in range(h):
                out.append(single_entry(F, d, d, i + 1, h + j + 1, 1))
    elif fam in ("cnf", "cnf2", "cninf", "cninf2"):
        dspec = spec.delegate
        cbasis = centralizer(dspec).basis()
        q = cbasis[0].rows
        Zq = zeros(F, q)
        if dspec.family == "cnf":
            for A in cbasis:
                out.append(block_diag(A, A))
            half = q
        else:
            for A in cbasis:
                for pos in range(4):
                    parts = [Zq] * 4
                    parts[pos] = A
                    u = block([[parts[0], parts[1]], [parts[2], parts[3]]])
                    out.append(block_diag(u, u))
            half = 2 * q
        for i in range(half):
            for j in range(half):
                out.append(single_entry(F, 2 * half, 2 * half, i + 1, half + j + 1, 1))
        if spec.is_infinite_type:
            P = spec.swap
            out = [P @ M @ P for M in out]
    return out


@dataclass(frozen=True, eq=False)
class EndBasis:
    generic: list[Mat]
    closed: list[Mat]

    @property
    def dim(self) -> int:
        return len(self.generic)

    def agree(self) -> bool:
        if len(self.generic) != len(self.closed):
            return False
        F = self.generic[0].field
        a = span_basis(F, [M.a for M in self.generic])
        b = span_basis(F, [M.a for M in self.closed])
        return a.shape == b.shape and bool(np.array_equal(a, b))


def end_basis(spec: ModuleSpec) -> EndBasis:
    return EndBasis(end_basis_generic(spec), end_basis_closed(spec))


def in_end(spec: ModuleSpec, M: Mat) -> bool:
    act = action(spec)
    return all(M @ g == g @ M for g in (act.g1, act.g2))


def residue_field_map(spec: ModuleSpec, M: Mat) -> int:
    """Image in K of an endomorphism of C_n(f) (or C_n(inf)): the corner entry of its X."""
    if spec.family not in ("cnf", "cninf"):
        raise SpecError("residue map is defined for cnf and cninf")
    if not in_end(spec, M):
        raise SpecError("matrix is not an endomorphism")
    if spec.is_infinite_type:
        P = spec.swap
        M = P @ M @ P
    q = M.rows // 2
    X = centralizer(spec.delegate).from_matrix(M[:q, :q])
    return X[0, 0]


def dual_check(spec: ModuleSpec) -> Mat:
    """W with W^-1 (g^-1)^T W equal to the dual partner's g, for both generators."""
    F, n = spec.field, spec.n
    if spec.family == "anbn":
        A, B = anbn_summands(F, n)
        W = anti_identity(F, 2 * n + 1)
        pairs = [(A.g1, B.g1), (A.g2, B.g2)]
    elif spec.family in ("cnf", "cninf"):
        d = spec.delegate
        Wd = w_space(d)
        R = Wd.to_matrix(anti_identity(Wd.jd.K, n))
        Z = zeros(F, R.rows)
        W = block([[Z, R], [R, Z]])
        if spec.is_infinite_type:
            W = spec.swap @ W @ spec.swap
        act = action(spec)
        pairs = [(act.g1, act.g1), (act.g2, act.g2)]
    else:
        raise SpecError("dual_check applies to anbn, cnf and cninf")
    Wi = W.inverse()
    for g, h in pairs:
        if Wi @ g.inverse().T @ W != h:
            raise AssertionError("duality witness failed")
    return W
