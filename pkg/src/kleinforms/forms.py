"""Bilinear and quadratic forms on kG-modules.

A bilinear form is stored by its Gram matrix.  A quadratic form q(x) = x^T Q x
is stored by the unique upper triangular Q representing it: two matrices give
the same q exactly when they differ by a symmetric hollow matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .field import Field
from .kgmodules import GroupAction, ModuleSpec, action
from .matrix import (
    Mat,
    block,
    block_diag,
    is_alternating_gram,
    strict_upper,
    zeros,
)


class FormError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BilinearForm:
    gram: Mat
    act: GroupAction
    spec: ModuleSpec | None = None

    @classmethod
    def on(cls, spec: ModuleSpec, gram: Mat) -> "BilinearForm":
        if gram.shape != (spec.dim, spec.dim):
            raise FormError(f"Gram matrix has shape {gram.shape}, module has dimension {spec.dim}")
        if gram.field != spec.field:
            raise FormError("Gram matrix is over a different field")
        return cls(gram, action(spec), spec)

    @property
    def field(self) -> Field:
        return self.gram.field

    @property
    def dim(self) -> int:
        return self.gram.rows

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BilinearForm) and self.gram == other.gram and self.act == other.act


def normalize_quadratic(Q: Mat) -> Mat:
    """Upper triangular representative of the quadratic form x^T Q x."""
    a = np.triu(Q.a ^ Q.a.T, 1)
    np.fill_diagonal(a, np.diagonal(Q.a))
    return Mat.wrap(Q.field, a)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    rep: Mat
    act: GroupAction
    spec: ModuleSpec | None = None

    @classmethod
    def on(cls, spec: ModuleSpec, Q: Mat) -> "QuadraticForm":
        if Q.shape != (spec.dim, spec.dim):
            raise FormError(f"matrix has shape {Q.shape}, module has dimension {spec.dim}")
        return cls(normalize_quadratic(Q), action(spec), spec)

    @classmethod
    def of(cls, Q: Mat, act: GroupAction, spec: ModuleSpec | None = None) -> "QuadraticForm":
        return cls(normalize_quadratic(Q), act, spec)

    @property
    def field(self) -> Field:
        return self.rep.field

    def value(self, x: Sequence[int]) -> int:
        v = Mat.wrap(self.field, np.asarray(x, dtype=np.int64).reshape(-1, 1))
        return (v.T @ self.rep @ v)[0, 0]

    def polar(self) -> BilinearForm:
        """The associated alternating form B(x, y) = q(x+y) - q(x) - q(y)."""
        return BilinearForm(self.rep + self.rep.T, self.act, self.spec)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuadraticForm) and self.rep == other.rep and self.act == other.act


# predicates


def is_invariant(B: BilinearForm) -> bool:
    S = B.gram
    return all(g.T @ S @ g == S for g in (B.act.g1, B.act.g2))


def is_symplectic(B: BilinearForm) -> bool:
    return is_alternating_gram(B.gram) and B.gram.is_invertible()


def radical(B: BilinearForm) -> list[Mat]:
    return B.gram.nullspace()


def quad_is_invariant(Q: QuadraticForm) -> bool:
    for g in (Q.act.g1, Q.act.g2):
        diff = g.T @ Q.rep @ g + Q.rep
        if not is_alternating_gram(diff):
            return False
    return True


def commutes_with(act: GroupAction, M: Mat) -> bool:
    return all(M @ g == g @ M for g in (act.g1, act.g2))


def bform_isometry_check(B: BilinearForm, B2: BilinearForm, M: Mat) -> bool:
    """M is an invertible module map with M^T B M = B2."""
    return commutes_with(B.act, M) and M.is_invertible() and M.T @ B.gram @ M == B2.gram


def quad_isometry_check(Q: QuadraticForm, Q2: QuadraticForm, M: Mat) -> bool:
    return (
        commutes_with(Q.act, M)
        and M.is_invertible()
        and normalize_quadratic(M.T @ Q.rep @ M) == Q2.rep
    )


# constructions


def paired_module(B: BilinearForm) -> BilinearForm:
    """The form (0 B; B^T 0) on M + M, the second copy standing in for the dual via B."""
    F, d = B.field, B.dim
    Z = zeros(F, d)
    gram = block([[Z, B.gram], [B.gram.T, Z]])
    return BilinearForm(gram, B.act.direct_sum(B.act))


def orthogonal_sum(B1: BilinearForm, B2: BilinearForm) -> BilinearForm:
    return BilinearForm(block_diag(B1.gram, B2.gram), B1.act.direct_sum(B2.act))


def s_hat(S: Mat) -> Mat:
    """Strict upper part of S, a quadratic refinement of S when S is alternating."""
    return strict_upper(S)


def paired_sum_permutation(F: Field, d1: int, d2: int) -> Mat:
    """Reorders (x1, x2, y1, y2) into (x1, y1, x2, y2)."""
    order = (
        list(range(d1))
        + list(range(d1 + d2, 2 * d1 + d2))
        + list(range(d1, d1 + d2))
        + list(range(2 * d1 + d2, 2 * d1 + 2 * d2))
    )
    n = 2 * (d1 + d2)
    a = np.zeros((n, n), dtype=np.int64)
    for new, old in enumerate(order):
        a[old, new] = 1
    return Mat.wrap(F, a)


def triple_witness(B: BilinearForm) -> Mat | None:
    """Search c in GL_3(GF(2)) with (c (x) I)^T diag(B,B,B) (c (x) I) = B + paired(B).

    Block-scalar maps commute with any action, so a hit is an isometry of modules.
    """
    F, d = B.field, B.dim
    target = orthogonal_sum(B, paired_module(B)).gram
    source = block_diag(B.gram, B.gram, B.gram)
    one = np.eye(d, dtype=np.int64)
    for bits in product((0, 1), repeat=9):
        c = np.array(bits, dtype=np.int64).reshape(3, 3)
        X = Mat.wrap(F, np.kron(c, one))
        if X.T @ source @ X == target and X.is_invertible():
            return X
    return None


def embedding_restrictions_degenerate(B: BilinearForm, end_elements: Iterable[Mat]) -> tuple[int, int]:
    """For each injective x -> (a1 x, a2 x) into M + M, check the pulled-back paired form.

    Returns (number of embeddings checked, number with a non-degenerate restriction).
    """
    P = paired_module(B).gram
    ends = list(end_elements)
    d = B.dim
    checked = bad = 0
    for a1 in ends:
        for a2 in ends:
            phi = Mat.wrap(B.field, np.concatenate([a1.a, a2.a], axis=0))
            if phi.rank() < d:
                continue
            checked += 1
            if (phi.T @ P @ phi).is_invertible():
                bad += 1
    return checked, bad


# symplectic bases and the Arf sum


def symplectic_basis(S: Mat) -> Mat:
    """P with P^T S P = diag(J2, ..., J2), J2 the 2 x 2 anti-identity."""
    if not S.is_square() or S.rows % 2:
        raise FormError("symplectic forms live on even-dimensional spaces")
    if not (is_alternating_gram(S) and S.is_invertible()):
        raise FormError("form is not symplectic")
    F = S.field
    n = S.rows
    pool = [np.eye(n, dtype=np.int64)[:, i] for i in range(n)]

    def pair(x: np.ndarray, y: np.ndarray) -> int:
        return int((Mat.wrap(F, x[None, :]) @ S @ Mat.wrap(F, y[:, None]))[0, 0])

    cols: list[np.ndarray] = []
    while pool:
        u = pool.pop(0)
        j = next(j for j, w in enumerate(pool) if pair(u, w))
        v = pool.pop(j)
        v = F.mul_arr(v, np.int64(F.inv(pair(u, v))))
        rest = []
        for w in pool:
            w = w ^ F.mul_arr(u, np.int64(pair(w, v))) ^ F.mul_arr(v, np.int64(pair(w, u)))
            rest.append(w)
        pool = rest
        cols += [u, v]
    P = Mat.wrap(F, np.stack(cols, axis=1))
    return P


def arf_sum(Q: QuadraticForm) -> int:
    """Sum of q(u_i) q(v_i) over a symplectic basis of the polar form."""
    P = symplectic_basis(Q.rep + Q.rep.T)
    F = Q.field
    total = 0
    for i in range(0, P.cols, 2):
        u, v = P.a[:, i], P.a[:, i + 1]
        total ^= F.mul(Q.value(u), Q.value(v))
    return total


def arf_class(Q: QuadraticForm) -> int:
    """Representative in {0, c} of the Arf sum modulo {x^2 + x}."""
    return Q.field.coset_reduce(arf_sum(Q))[0]
