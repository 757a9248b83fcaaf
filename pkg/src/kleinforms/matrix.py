"""Dense matrices over GF(2^e), structured constructors, and Hankel coset reduction.

Indices in the structured constructors are 1-based, matching the usual
notation: toeplitz(..., i, x) fills the entries (s, t) with t - s = i - 1 and
hankel(..., i, x) fills the entries with s + t = i.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .field import Field


class MatrixError(ValueError):
    pass


class Mat:
    """Immutable matrix over a Field; entries are int-encoded scalars."""

    __slots__ = ("field", "a")

    def __init__(self, field: Field, data) -> None:
        a = np.array(data, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise MatrixError(f"need a non-empty 2-d array, got shape {a.shape}")
        if a.min() < 0 or a.max() >= field.order:
            raise MatrixError("entry outside the field")
        a.flags.writeable = False
        self.field = field
        self.a = a

    @classmethod
    def wrap(cls, field: Field, a: np.ndarray) -> "Mat":
        """Trusted constructor: no copy, no range check."""
        m = object.__new__(cls)
        a = np.asarray(a, dtype=np.int64)
        if a.flags.writeable:
            a = a.copy()
            a.flags.writeable = False
        m.field = field
        m.a = a
        return m

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def _same(self, other: "Mat") -> None:
        if not isinstance(other, Mat):
            raise TypeError("expected a Mat")
        if other.field != self.field:
            raise MatrixError("matrices over different fields")

    def __getitem__(self, key):
        r = self.a[key]
        if np.ndim(r) == 0:
            return int(r)
        if np.ndim(r) == 1:
            raise MatrixError("use 2-d slices to extract sub-matrices")
        return Mat.wrap(self.field, r)

    def __add__(self, other: "Mat") -> "Mat":
        self._same(other)
        if self.shape != other.shape:
            raise MatrixError(f"shape mismatch {self.shape} + {other.shape}")
        return Mat.wrap(self.field, self.a ^ other.a)

    __sub__ = __add__

    def __matmul__(self, other: "Mat") -> "Mat":
        self._same(other)
        if self.cols != other.rows:
            raise MatrixError(f"shape mismatch {self.shape} @ {other.shape}")
        return Mat.wrap(self.field, matmul_arr(self.field, self.a, other.a))

    def scale(self, c: int) -> "Mat":
        return Mat.wrap(self.field, self.field.mul_arr(self.a, np.int64(c)))

    @property
    def T(self) -> "Mat":
        return Mat.wrap(self.field, self.a.T)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Mat)
            and self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self.a, other.a))
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.a.tobytes()))

    def __repr__(self) -> str:
        return f"Mat({self.a.tolist()})"

    def key(self) -> bytes:
        return self.a.tobytes()

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def diagonal(self) -> list[int]:
        return np.diagonal(self.a).tolist()

    def is_zero(self) -> bool:
        return not self.a.any()

    def is_square(self) -> bool:
        return self.rows == self.cols

    def map(self, table: np.ndarray, field: Field | None = None) -> "Mat":
        """Apply an entrywise lookup table, optionally landing in another field."""
        return Mat.wrap(field or self.field, np.asarray(table)[self.a])

    def rank(self) -> int:
        return len(rref(self.field, self.a)[1])

    def is_invertible(self) -> bool:
        return self.is_square() and self.rank() == self.rows

    def inverse(self) -> "Mat":
        if not self.is_square():
            raise MatrixError("inverse of a non-square matrix")
        n = self.rows
        aug = np.concatenate([self.a, np.eye(n, dtype=np.int64)], axis=1)
        red, piv = rref(self.field, aug)
        if piv[:n] != list(range(n)):
            raise MatrixError("matrix is singular")
        return Mat.wrap(self.field, red[:, n:])

    def nullspace(self) -> list["Mat"]:
        """Basis of {v : self @ v = 0}, as column vectors."""
        return [Mat.wrap(self.field, v.reshape(-1, 1)) for v in nullspace_arr(self.field, self.a)]

    def pow(self, k: int) -> "Mat":
        r = identity(self.field, self.rows)
        b = self
        while k:
            if k & 1:
                r = r @ b
            b = b @ b
            k >>= 1
        return r


# array-level kernels, shared with the batched oracle code


def matmul_arr(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product over F; works on stacks via broadcasting."""
    if F.e == 1:
        return np.matmul(A, B) & 1
    prod = F.mul_arr(A[..., :, :, None], B[..., None, :, :])
    return np.bitwise_xor.reduce(prod, axis=-2)


def rref(F: Field, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = np.array(a, dtype=np.int64)
    rows, cols = a.shape
    piv: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = F.mul_arr(a[r], np.int64(F.inv(int(a[r, c]))))
        f = a[:, c].copy()
        f[r] = 0
        if f.any():
            a ^= F.mul_arr(f[:, None], a[r][None, :])
        piv.append(c)
        r += 1
    return a, piv


def nullspace_arr(F: Field, a: np.ndarray) -> list[np.ndarray]:
    red, piv = rref(F, a)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in set(piv)]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fc] = 1
        for i, pc in enumerate(piv):
            v[pc] = red[i, fc]  # char 2: no sign
        basis.append(v)
    return basis


def batch_rank(F: Field, stack: np.ndarray) -> np.ndarray:
    """Ranks of a stack of matrices of shape (b, r, c)."""
    a = np.array(stack, dtype=np.int64)
    b, rows, cols = a.shape
    row = np.zeros(b, dtype=np.int64)
    idx = np.arange(rows)
    for c in range(cols):
        mask = (a[:, :, c] != 0) & (idx[None, :] >= row[:, None])
        has = np.flatnonzero(mask.any(axis=1))
        if has.size == 0:
            continue
        piv = mask[has].argmax(axis=1)
        rr = row[has]
        top = a[has, rr].copy()
        a[has, rr] = a[has, piv]
        a[has, piv] = top
        prow = a[has, rr]
        prow = F.mul_arr(prow, F.inv_arr(prow[:, c])[:, None])
        a[has, rr] = prow
        f = a[has, :, c].copy()
        f[np.arange(has.size), rr] = 0
        a[has] ^= F.mul_arr(f[:, :, None], prow[:, None, :])
        row[has] += 1
    return row


def batch_invertible(F: Field, stack: np.ndarray) -> np.ndarray:
    return batch_rank(F, stack) == stack.shape[1]


def combinations(F: Field, basis: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """All linear combinations coeffs @ basis over F; basis is (d, ...) and coeffs (b, d)."""
    flat = basis.reshape(basis.shape[0], -1)
    if F.e == 1:
        out = (coeffs @ flat) & 1
    else:
        out = np.zeros((coeffs.shape[0], flat.shape[1]), dtype=np.int64)
        for i in range(flat.shape[0]):
            out ^= F.mul_arr(coeffs[:, i : i + 1], flat[i][None, :])
    return out.reshape((coeffs.shape[0],) + basis.shape[1:])


def all_vectors(F: Field, d: int) -> np.ndarray:
    """Every vector of F^d, as rows, in lexicographic order."""
    q = F.order
    idx = np.arange(q**d, dtype=np.int64)
    out = np.zeros((q**d, d), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        out[:, i] = idx % q
        idx //= q
    return out


# constructors


def _dims(rows: int, cols: int) -> None:
    if rows <= 0 or cols <= 0:
        raise MatrixError("dimensions must be positive")


def zeros(F: Field, rows: int, cols: int | None = None) -> Mat:
    cols = rows if cols is None else cols
    _dims(rows, cols)
    return Mat.wrap(F, np.zeros((rows, cols), dtype=np.int64))


def identity(F: Field, n: int) -> Mat:
    _dims(n, n)
    return Mat.wrap(F, np.eye(n, dtype=np.int64))


def toeplitz(F: Field, rows: int, cols: int, i: int, x: int) -> Mat:
    """T_i(x): x on the entries (s, t) with t - s = i - 1."""
    _dims(rows, cols)
    F.check(x)
    a = np.zeros((rows, cols), dtype=np.int64)
    for s in range(1, rows + 1):
        t = s + i - 1
        if 1 <= t <= cols:
            a[s - 1, t - 1] = x
    return Mat.wrap(F, a)


def hankel(F: Field, rows: int, cols: int, i: int, x: int) -> Mat:
    """H_i(x): x on the entries (s, t) with s + t = i; zero when i is out of range."""
    _dims(rows, cols)
    F.check(x)
    a = np.zeros((rows, cols), dtype=np.int64)
    for s in range(1, rows + 1):
        t = i - s
        if 1 <= t <= cols:
            a[s - 1, t - 1] = x
    return Mat.wrap(F, a)


def anti_identity(F: Field, m: int) -> Mat:
    return hankel(F, m, m, m + 1, 1)


def single_entry(F: Field, rows: int, cols: int, s: int, t: int, x: int) -> Mat:
    _dims(rows, cols)
    if not (1 <= s <= rows and 1 <= t <= cols):
        raise MatrixError("entry index out of range")
    a = np.zeros((rows, cols), dtype=np.int64)
    a[s - 1, t - 1] = F.check(x)
    return Mat.wrap(F, a)


def from_rows(F: Field, rows: Sequence[Sequence[int]]) -> Mat:
    return Mat(F, rows)


def block(grid: Sequence[Sequence[Mat]]) -> Mat:
    F = grid[0][0].field
    return Mat.wrap(F, np.block([[m.a for m in row] for row in grid]))


def block_diag(*mats: Mat) -> Mat:
    F = mats[0].field
    n = sum(m.rows for m in mats)
    c = sum(m.cols for m in mats)
    a = np.zeros((n, c), dtype=np.int64)
    i = j = 0
    for m in mats:
        a[i : i + m.rows, j : j + m.cols] = m.a
        i += m.rows
        j += m.cols
    return Mat.wrap(F, a)


def diag(F: Field, entries: Sequence[int]) -> Mat:
    return Mat.wrap(F, np.diag(np.asarray(entries, dtype=np.int64)))


def ut_from_coeffs(F: Field, n: int, coeffs: Sequence[int]) -> Mat:
    """Upper triangular Toeplitz sum of T_i(c_i), i = 1.."""
    a = np.zeros((n, n), dtype=np.int64)
    for i, c in enumerate(coeffs[:n], start=1):
        for s in range(n - i + 1):
            a[s, s + i - 1] = c
    return Mat.wrap(F, a)


def lh_from_coeffs(F: Field, n: int, coeffs: Sequence[int]) -> Mat:
    """Lower triangular Hankel sum of H_{n+i}(c_i), i = 1.."""
    return Mat.wrap(F, anti_identity(F, n).a @ ut_from_coeffs(F, n, coeffs).a)


def ut_coeffs(X: Mat) -> list[int]:
    return X.a[0].tolist()


def lh_coeffs(A: Mat) -> list[int]:
    return A.a[-1].tolist()


def is_upper_toeplitz(X: Mat) -> bool:
    return X.is_square() and X == ut_from_coeffs(X.field, X.rows, ut_coeffs(X))


def is_lower_hankel(A: Mat) -> bool:
    return A.is_square() and A == lh_from_coeffs(A.field, A.rows, lh_coeffs(A))


def lh_index(A: Mat) -> int:
    """Index r of the leading anti-diagonal H_{n+r}; n+1 for the zero matrix."""
    c = lh_coeffs(A)
    return next((i for i, x in enumerate(c, start=1) if x), A.rows + 1)


# operations


def tau_transpose(A: Mat) -> Mat:
    F = A.field
    return anti_identity(F, A.cols) @ A.T @ anti_identity(F, A.rows)


def _square(A: Mat) -> None:
    if not A.is_square():
        raise MatrixError("square matrix required")


def is_hollow(A: Mat) -> bool:
    _square(A)
    return not np.diagonal(A.a).any()


def is_symmetric(A: Mat) -> bool:
    _square(A)
    return bool(np.array_equal(A.a, A.a.T))


def is_alternating_gram(A: Mat) -> bool:
    return is_hollow(A) and is_symmetric(A)


def diag_of_conjugation(A: Mat, X: Mat) -> list[int]:
    """Diagonal of X^T A X for symmetric A, using only the diagonal of A."""
    if not is_symmetric(A):
        raise MatrixError("A must be symmetric")
    if A.rows != X.rows:
        raise MatrixError("shape mismatch")
    F = A.field
    sq = F.square_table[X.a]
    d = np.diagonal(A.a)
    return np.bitwise_xor.reduce(F.mul_arr(d[:, None], sq), axis=0).tolist()


def strict_upper(A: Mat) -> Mat:
    return Mat.wrap(A.field, np.triu(A.a, 1))


def split_symmetric_hollow(D: Mat) -> Mat:
    """Z with Z + Z^T = D, taken as the strict upper triangle."""
    if not is_alternating_gram(D):
        raise MatrixError("D must be symmetric and hollow")
    return strict_upper(D)


def in_h_family(C: Mat, r: int) -> bool:
    """Membership in {H_{n+r}(1) + H_{n+r+1}(1) X^2 : X upper triangular Toeplitz}."""
    if not is_lower_hankel(C):
        return False
    n = C.rows
    c = lh_coeffs(C)
    if r > n:
        return not any(c)
    if any(c[: r - 1]) or c[r - 1] != 1:
        return False
    return not any(c[r - 1 + j] for j in range(2, n - r + 1, 2))


def h_family_root(C: Mat, r: int) -> Mat:
    """The X (entries past the matrix size set to 0) with C = H_{n+r}(1) + H_{n+r+1}(1) X^2."""
    F, n = C.field, C.rows
    c = lh_coeffs(C)
    xs = []
    for i in range(1, n + 1):
        j = r + 2 * i - 1  # coefficient index carrying x_i^2
        xs.append(F.sqrt(c[j - 1]) if j <= n else 0)
    return ut_from_coeffs(F, n, xs)


def lh_coset_reduce(A: Mat, s: int, allow_vanishing: bool = False) -> tuple[Mat, Mat]:
    """Find B upper triangular Toeplitz with A B^2 = C in the canonical Hankel family.

    A is a nonzero lower triangular Hankel matrix with leading index r.  The
    result C lies in the family indexed by r + 2s.  With allow_vanishing the
    boundary case r + 2s = n + 1 is accepted, where C is the zero matrix.
    """
    if not is_lower_hankel(A):
        raise MatrixError("A must be lower triangular Hankel")
    if A.is_zero():
        raise MatrixError("A must be nonzero")
    if s < 0:
        raise MatrixError("s must be non-negative")
    F, n = A.field, A.rows
    r = lh_index(A)
    limit = n + 1 if allow_vanishing else n
    if r + 2 * s > limit:
        raise MatrixError(f"r + 2s = {r + 2 * s} exceeds {limit}")
    x = lh_coeffs(A) + [0] * (2 * n + 2)
    ys = [F.sqrt(x[r + 2 * i - 3]) for i in range(1, n + 1)]
    a1 = ut_from_coeffs(F, n, ys)
    B = a1.inverse() @ toeplitz(F, n, n, s + 1, 1)
    C = A @ B @ B
    assert in_h_family(C, r + 2 * s)
    return C, B


def to_text(M: Mat) -> str:
    lines = [f"matrix {M.rows} {M.cols}"]
    lines += [" ".join(str(v) for v in row) for row in M.tolist()]
    return "\n".join(lines)


def parse_matrix_lines(F: Field, header: str, body: Iterable[str]) -> Mat:
    parts = header.split()
    if len(parts) != 3 or parts[0] != "matrix":
        raise MatrixError(f"bad matrix header: {header!r}")
    r, c = int(parts[1]), int(parts[2])
    rows = [[int(v) for v in line.split()] for line in body]
    if len(rows) != r or any(len(row) != c for row in rows):
        raise MatrixError("matrix body does not match its header")
    return Mat(F, rows)
