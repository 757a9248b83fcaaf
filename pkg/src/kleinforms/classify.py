"""Isometry classes of invariant symplectic and quadratic forms, family by family.

Every canonicalisation returns a label together with a witness M in Aut(M)
satisfying M^T S M = representative(label) exactly.  Witnesses are built up
step by step and checked before they are returned.

The cninf families are computed through cnf(n, T) (resp. cnf2(n, T)) after the
basis reversal P recorded on the module: forms move by S -> P S P and witnesses
by W -> P W P.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .field import Field
from .forms import (
    BilinearForm,
    QuadraticForm,
    bform_isometry_check,
    is_invariant,
    is_symplectic,
    normalize_quadratic,
    quad_is_invariant,
    quad_isometry_check,
    s_hat,
)
from .kgmodules import ModuleSpec, action, jordan_data, regular_from_hat, regular_hat
from .matrix import (
    Mat,
    MatrixError,
    anti_identity,
    block,
    block_diag,
    diag,
    h_family_root,
    identity,
    is_alternating_gram,
    lh_coeffs,
    lh_coset_reduce,
    lh_from_coeffs,
    lh_index,
    strict_upper,
    toeplitz,
    zeros,
)

ENUMERATION_CAP = 1_000_000


class ClassifyError(ValueError):
    """The input is outside what the classification speaks about."""


# labels


@dataclass(frozen=True)
class ClassLabel:
    """A class of invariant symplectic forms on one module.

    params by family:
      trivial2          ()
      regular           (b, c)                      phi = (0, b, c, 1+b+c)
      regular2          ("paired",) | ("alpha", l) | ("mu", m)
      anbn              (w_1, ..., w_2n)             anti-diagonals of Omega
      cnf, cninf        (a_2, a_4, ...)              over K
      cnf2, cninf2      (r, s, phi, psi)             phi in K^s, psi in K^t
    """

    spec: ModuleSpec
    params: tuple

    def text(self) -> str:
        fam, p = self.spec.family, self.params
        if fam == "trivial2":
            body = ""
        elif fam == "regular":
            body = f"b={p[0]} c={p[1]}"
        elif fam == "regular2":
            body = p[0] if p[0] == "paired" else f"{p[0]}={p[1]}"
        elif fam == "anbn":
            body = "omega=" + ",".join(map(str, p))
        elif fam in ("cnf", "cninf"):
            body = "a=" + ",".join(map(str, p))
        else:
            r, s, phi, psi = p
            body = f"r={r} s={s} phi={','.join(map(str, phi))} psi={','.join(map(str, psi))}"
        return f"label {fam} {body}".rstrip()

    def __str__(self) -> str:
        return self.text()


def parse_label(spec: ModuleSpec, text: str) -> ClassLabel:
    parts = text.split()
    if len(parts) < 2 or parts[0] != "label" or parts[1] != spec.family:
        raise ClassifyError(f"label line does not match module {spec.family}: {text!r}")
    kv: dict[str, str] = {}
    flags: list[str] = []
    for tok in parts[2:]:
        if "=" in tok:
            k, v = tok.split("=", 1)
            kv[k] = v
        else:
            flags.append(tok)

    def ints(s: str) -> tuple[int, ...]:
        return tuple(int(x) for x in s.split(",") if x != "")

    fam = spec.family
    try:
        if fam == "trivial2":
            params: tuple = ()
        elif fam == "regular":
            params = (int(kv["b"]), int(kv["c"]))
        elif fam == "regular2":
            if flags == ["paired"]:
                params = ("paired",)
            elif "alpha" in kv:
                params = ("alpha", int(kv["alpha"]))
            else:
                params = ("mu", int(kv["mu"]))
        elif fam == "anbn":
            params = ints(kv["omega"])
        elif fam in ("cnf", "cninf"):
            params = ints(kv.get("a", ""))
        else:
            params = (int(kv["r"]), int(kv["s"]), ints(kv.get("phi", "")), ints(kv.get("psi", "")))
    except (KeyError, ValueError) as exc:
        raise ClassifyError(f"malformed label {text!r}") from exc
    label = ClassLabel(spec, params)
    if not is_valid_label(label):
        raise ClassifyError(f"{text!r} is not a valid label for {spec.header()}")
    return label


def is_valid_label(label: ClassLabel) -> bool:
    spec, p = label.spec, label.params
    F, fam, n = spec.field, spec.family, spec.n

    def inside(field: Field, vals) -> bool:
        return all(isinstance(v, int) and 0 <= v < field.order for v in vals)

    if fam == "trivial2":
        return p == ()
    if fam == "regular":
        return len(p) == 2 and inside(F, p)
    if fam == "regular2":
        return p == ("paired",) or (len(p) == 2 and p[0] in ("alpha", "mu") and inside(F, p[1:]))
    if fam == "anbn":
        if len(p) != 2 * n or not inside(F, p):
            return False
        lead = next((w for w in p if w), None)
        return lead in (None, 1)
    K = _K(spec)
    if fam in ("cnf", "cninf"):
        return len(p) == n // 2 and inside(K, p)
    if len(p) != 4:
        return False
    r, s, phi, psi = p
    shapes = {(a, b): c for a, b, c in _cnf2_shapes(n)}
    if (r, s) not in shapes:
        return False
    t = shapes[(r, s)]
    return (
        len(phi) == s
        and len(psi) == t
        and inside(K, phi)
        and inside(K, psi)
        and not (t and psi[0] == 1)
    )


@dataclass(frozen=True)
class QuadLabel:
    """kind is 'unique' (one class), 'arf' (class of Arf representative x) or 'none'."""

    kind: str
    x: int = 0

    def text(self) -> str:
        return {"unique": "quad unique", "none": "quad none"}.get(self.kind, f"quad arf={self.x}")

    def __str__(self) -> str:
        return self.text()


UNIQUE = QuadLabel("unique")
NONE = QuadLabel("none")


@dataclass(frozen=True)
class QuadFamily:
    description: str
    forms: list[QuadraticForm]
    labels: list[QuadLabel]


# counting


def _power(exp: int | str) -> str:
    if exp == 0:
        return "1"
    if exp == 1:
        return "|k|"
    return f"|k|^{exp}" if isinstance(exp, int) else f"|k|^({exp})"


def _scaled(coef: int, exp: int | str) -> str:
    p = _power(exp)
    if coef == 1:
        return p
    return str(coef) if p == "1" else f"{coef}*{p}"


def _mexp(m: int | None, k: int) -> int | str:
    if m is not None:
        return m * k
    return 0 if k == 0 else ("m" if k == 1 else f"{k}m")


def count_formula(family: str, n: int = 0, m: int | None = 1) -> str:
    """Class count as a formula in |k|; m = None leaves the degree of f symbolic."""
    if family == "trivial2":
        return "1"
    if family == "regular":
        return "|k|^2"
    if family == "regular2":
        return "2*|k|+1"
    if family == "anbn":
        return "+".join([_power(i) for i in range(2 * n - 1, 0, -1)] + ["2"])
    if family in ("cninf", "cninf2"):
        m = 1
    if family in ("cnf", "cninf"):
        return _power(_mexp(m, n // 2))
    if n % 2 == 0:
        return _scaled(n, _mexp(m, (n - 2) // 2))
    if n == 1:
        return "1"
    return _scaled((n + 1) // 2, _mexp(m, (n - 1) // 2)) + "+" + _scaled((n - 1) // 2, _mexp(m, (n - 3) // 2))


def count_classes(spec: ModuleSpec) -> int:
    q, fam, n = spec.field.order, spec.family, spec.n
    if fam == "trivial2":
        return 1
    if fam == "regular":
        return q * q
    if fam == "regular2":
        return 2 * q + 1
    if fam == "anbn":
        return sum(q**i for i in range(2 * n)) + 1
    Q = q**spec.m
    if fam in ("cnf", "cninf"):
        return Q ** (n // 2)
    if n % 2 == 0:
        return n * Q ** ((n - 2) // 2)
    return (n + 1) // 2 * Q ** ((n - 1) // 2) + (n - 1) // 2 * (Q ** ((n - 3) // 2) if n >= 3 else 0)


# enumeration


def _K(spec: ModuleSpec) -> Field:
    return spec.ext.ext


def _cnf2_shapes(n: int) -> Iterator[tuple[int, int, int]]:
    for r in range(2, n + 2):
        for s in range((n - r + 1) // 2 + 1):
            yield r, s, (n - r - 2 * s + 1) // 2


def _label_iter(spec: ModuleSpec) -> Iterator[ClassLabel]:
    F, fam, n = spec.field, spec.family, spec.n
    if fam == "trivial2":
        yield ClassLabel(spec, ())
    elif fam == "regular":
        for b in F.elements():
            for c in F.elements():
                yield ClassLabel(spec, (b, c))
    elif fam == "regular2":
        yield ClassLabel(spec, ("paired",))
        for lam in F.elements():
            yield ClassLabel(spec, ("alpha", lam))
        for mu in F.elements():
            yield ClassLabel(spec, ("mu", mu))
    elif fam == "anbn":
        yield ClassLabel(spec, (0,) * (2 * n))
        for lead in range(2 * n):
            for tail in product(F.elements(), repeat=2 * n - lead - 1):
                yield ClassLabel(spec, (0,) * lead + (1,) + tail)
    elif fam in ("cnf", "cninf"):
        K = _K(spec)
        for a in product(K.elements(), repeat=n // 2):
            yield ClassLabel(spec, a)
    else:
        K = _K(spec)
        for r, s, t in _cnf2_shapes(n):
            for phi in product(K.elements(), repeat=s):
                for psi in product(K.elements(), repeat=t):
                    if t and psi[0] == 1:
                        continue
                    yield ClassLabel(spec, (r, s, phi, psi))


def enumerate_classes(spec: ModuleSpec, cap: int = ENUMERATION_CAP) -> list[ClassLabel]:
    total = count_classes(spec)
    if total > cap:
        raise ClassifyError(f"{total} classes exceed the enumeration cap {cap}")
    return list(_label_iter(spec))


# representatives


def _anbn_block(F: Field, n: int, x: int, omega: Sequence[int]) -> Mat:
    """A(x, Omega) with Omega the (n+1) x n Hankel matrix of the given anti-diagonals."""
    d = 2 * n + 1
    a = np.zeros((d, d), dtype=np.int64)
    a[:n, n + 1 :] = anti_identity(F, n).scale(x).a
    a[n:, : n + 1] = anti_identity(F, n + 1).scale(x).a
    for s in range(n + 1):
        for t in range(n):
            a[n + s, n + 1 + t] = omega[s + t]
    return Mat.wrap(F, a)


def _antiblock(R: Mat) -> Mat:
    Z = zeros(R.field, R.rows)
    return block([[Z, R], [R.T, Z]])


def _cnf_A(K: Field, n: int, a: Sequence[int]) -> Mat:
    coeffs = [0] * n
    coeffs[0] = 1
    for idx, v in enumerate(a):
        coeffs[2 * idx + 1] = v
    return lh_from_coeffs(K, n, coeffs)


def _cnf2_triple(K: Field, n: int, params: tuple) -> tuple[Mat, Mat, Mat]:
    r, s, phi, psi = params
    pc = [0] * n
    if r <= n:
        pc[r - 1] = 1
        for idx, v in enumerate(phi):
            pc[r + 2 * idx] = v
    qc = [0] * n
    qc[0] = 1
    for idx, v in enumerate(psi):
        qc[idx] ^= v
    mc = [0] * n
    j = r + 2 * s + 1
    if j <= n:
        mc[j - 1] = 1
    return lh_from_coeffs(K, n, pc), lh_from_coeffs(K, n, qc), lh_from_coeffs(K, n, mc)


def _sigma(jd, trip: tuple[Mat, Mat, Mat]) -> Mat:
    phi, psi, mu = (jd.script_V(x) for x in trip)
    return block([[phi, psi], [psi, mu]])


def _regular2_gram(F: Field, alpha, beta, gamma) -> Mat:
    return block([[regular_hat(F, alpha), regular_hat(F, beta)], [regular_hat(F, beta), regular_hat(F, gamma)]])


def _rep_gram(label: ClassLabel) -> Mat:
    spec, p = label.spec, label.params
    F, fam, n = spec.field, spec.family, spec.n
    if fam == "trivial2":
        return anti_identity(F, 2)
    if fam == "regular":
        b, c = p
        return regular_hat(F, (0, b, c, 1 ^ b ^ c))
    if fam == "regular2":
        one = (1, 0, 0, 0)
        if p[0] == "paired":
            return _regular2_gram(F, (0,) * 4, one, (0,) * 4)
        if p[0] == "alpha":
            lam = p[1]
            return _regular2_gram(F, (0, 1, lam, 1 ^ lam), one, (0,) * 4)
        mu = p[1]
        return _regular2_gram(F, (0, 0, 1, 1), one, (0, mu, 0, mu))
    if fam == "anbn":
        return _antiblock(_anbn_block(F, n, 1, p))
    P = spec.swap
    jd = jordan_data(spec.delegate)
    if fam in ("cnf", "cninf"):
        R = jd.script_V(_cnf_A(jd.K, n, p))
    else:
        R = _sigma(jd, _cnf2_triple(jd.K, n, p))
    S = _antiblock(R)
    return P @ S @ P


def representative(label: ClassLabel) -> BilinearForm:
    S = BilinearForm.on(label.spec, _rep_gram(label))
    assert is_invariant(S) and is_symplectic(S), label.text()
    return S


# canonicalisation


def _check_input(spec: ModuleSpec, S: Mat) -> BilinearForm:
    B = BilinearForm.on(spec, S)
    if not is_alternating_gram(S):
        raise ClassifyError("form is not alternating (Gram matrix must be symmetric and hollow)")
    if not S.is_invertible():
        raise ClassifyError("form is degenerate (Gram matrix is singular)")
    if not is_invariant(B):
        raise ClassifyError("form is not G-invariant")
    return B


def canonicalize(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    """Label of the class of S and a witness M with M^T S M = representative."""
    B = _check_input(spec, S)
    fam = spec.family
    if fam in ("cninf", "cninf2"):
        P = spec.swap
        inner, W = canonicalize(spec.delegate, P @ S @ P)
        label, M = ClassLabel(spec, inner.params), P @ W @ P
    else:
        label, M = _CANON[fam](spec, S)
    if not bform_isometry_check(B, representative(label), M):
        raise AssertionError(f"witness check failed for {label.text()}")
    return label, M


def _canon_trivial2(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    F = spec.field
    return ClassLabel(spec, ()), diag(F, [1, F.inv(S[0, 1])])


def _canon_regular(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    F = spec.field
    phi = regular_from_hat(S)
    if phi is None or phi[0]:
        raise ClassifyError("form is not of the shape B_phi with phi = (0, b, c, d)")
    lam = phi[1] ^ phi[2] ^ phi[3]
    inv = F.inv(lam)
    M = identity(F, 4).scale(F.sqrt(inv))
    return ClassLabel(spec, (F.mul(phi[1], inv), F.mul(phi[2], inv))), M


def _regular2_parts(S: Mat) -> tuple[tuple, tuple, tuple]:
    parts = (regular_from_hat(S[:4, :4]), regular_from_hat(S[:4, 4:]), regular_from_hat(S[4:, 4:]))
    if any(p is None for p in parts) or S[4:, :4] != S[:4, 4:]:
        raise ClassifyError("form is not built from kG-blocks")
    return parts  # type: ignore[return-value]


def _scalar_block(F: Field, a: int, b: int, c: int, d: int) -> Mat:
    I = identity(F, 4)
    return block([[I.scale(a), I.scale(b)], [I.scale(c), I.scale(d)]])


def _canon_regular2(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    F = spec.field
    alpha, beta, gamma = _regular2_parts(S)
    for x in (alpha, gamma):
        if x[0] or (x[1] ^ x[2] ^ x[3]):
            raise ClassifyError("diagonal kG-blocks must be alternating and degenerate (else decomposable)")
    M = identity(F, 8)

    def apply(step: Mat) -> None:
        nonlocal M, S, alpha, beta, gamma
        M = M @ step
        S = step.T @ S @ step
        alpha, beta, gamma = _regular2_parts(S)

    def normalize_beta() -> None:
        Z = zeros(F, 4)
        apply(block([[identity(F, 4), Z], [Z, regular_hat(F, beta).inverse()]]))

    if not any(alpha) and not any(gamma):
        normalize_beta()
        return ClassLabel(spec, ("paired",)), M
    delta = F.mul(alpha[1], gamma[2]) ^ F.mul(alpha[2], gamma[1])
    if delta:
        N = Mat(F, [[alpha[1], gamma[1]], [alpha[2], gamma[2]]]).inverse() @ Mat(F, [[0, 1], [1, 0]])
        apply(_scalar_block(F, *(F.sqrt(v) for v in (N[0, 0], N[0, 1], N[1, 0], N[1, 1]))))
        assert alpha == (0, 0, 1, 1) and gamma == (0, 1, 0, 1)
        normalize_beta()
        return ClassLabel(spec, ("mu", gamma[1])), M
    if not any(alpha):
        apply(_scalar_block(F, 0, 1, 1, 0))
    if alpha[1]:
        x, y = F.inv(alpha[1]), F.div(gamma[1], alpha[1])
    else:
        x, y = F.inv(alpha[2]), F.div(gamma[2], alpha[2])
    apply(_scalar_block(F, F.sqrt(x), F.sqrt(y), 0, 1))
    assert not any(gamma)
    normalize_beta()
    if alpha[1]:
        return ClassLabel(spec, ("alpha", alpha[2])), M
    return ClassLabel(spec, ("mu", 0)), M


def _anbn_antidiagonals(Om: Mat) -> tuple[int, ...]:
    rows, cols = Om.shape
    out = []
    for d in range(rows + cols - 1):
        vals = {Om[s, d - s] for s in range(rows) if 0 <= d - s < cols}
        if len(vals) != 1:
            raise ClassifyError("lower-right block of A is not Hankel")
        out.append(vals.pop())
    return tuple(out)


def _dkill(R: Mat, D: Mat) -> Mat:
    """(I Y; 0 I) clearing the symmetric hollow block D of (0 R; R^T D)."""
    F, h = R.field, R.rows
    Y = R.T.inverse() @ strict_upper(D)
    return block([[identity(F, h), Y], [zeros(F, h), identity(F, h)]])


def _canon_anbn(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    F, n = spec.field, spec.n
    h = 2 * n + 1
    A = S[:h, h:]
    M = _dkill(A, S[h:, h:])
    x = A[0, h - 1]
    omega = _anbn_antidiagonals(A[n:, n + 1 :])
    if A != _anbn_block(F, n, x, omega):
        raise ClassifyError("form does not have the invariant block shape")
    lead = next((w for w in omega if w), 0)
    beta = F.sqrt(F.inv(lead)) if lead else 1
    alpha = F.inv(F.mul(beta, x))
    scale = diag(F, [alpha] * n + [beta] * (n + 1) + [alpha] * (n + 1) + [beta] * n)
    b2 = F.mul(beta, beta)
    return ClassLabel(spec, tuple(F.mul(b2, w) for w in omega)), M @ scale


def _canon_cnf(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    jd = jordan_data(spec)
    q, n = S.rows // 2, spec.n
    R = S[:q, q:]
    M = _dkill(R, S[q:, q:])
    try:
        Bp = jd.script_V_inverse(R)
    except MatrixError as exc:
        raise ClassifyError("off-diagonal block is not in the invariant family") from exc
    C, Xp = lh_coset_reduce(Bp, 0)
    X = jd.centralizer_elem(Xp)
    c = lh_coeffs(C)
    return ClassLabel(spec, tuple(c[i - 1] for i in range(2, n + 1, 2))), M @ block_diag(X, X)


class _Triple:
    """(phi, psi, mu) over K together with the accumulated k-witness."""

    def __init__(self, jd, phi: Mat, psi: Mat, mu: Mat, M: Mat):
        self.jd, self.phi, self.psi, self.mu, self.M = jd, phi, psi, mu, M

    @property
    def n(self) -> int:
        return self.jd.n

    def apply(self, a: Mat, b: Mat, c: Mat, d: Mat) -> None:
        phi, psi, mu = self.phi, self.psi, self.mu
        self.phi = phi @ a @ a + mu @ c @ c
        self.mu = phi @ b @ b + mu @ d @ d
        self.psi = phi @ a @ b + psi @ a @ d + psi @ c @ b + mu @ c @ d
        ce = self.jd.centralizer_elem
        u = block([[ce(a), ce(b)], [ce(c), ce(d)]])
        self.M = self.M @ block_diag(u, u)

    def I(self) -> Mat:
        return identity(self.jd.K, self.n)

    def O(self) -> Mat:
        return zeros(self.jd.K, self.n)

    def swap(self) -> None:
        self.apply(self.O(), self.I(), self.I(), self.O())

    def r(self) -> int:
        return lh_index(self.phi)

    def j(self) -> int:
        return lh_index(self.mu)


def _canon_cnf2(spec: ModuleSpec, S: Mat) -> tuple[ClassLabel, Mat]:
    jd = jordan_data(spec)
    K, n = jd.K, spec.n
    h = S.rows // 2
    q = h // 2
    om = S[:h, h:]
    M = _dkill(om, S[h:, h:])
    try:
        phi, psi, mu = (jd.script_V_inverse(om[sl]) for sl in (np.s_[:q, :q], np.s_[:q, q:], np.s_[q:, q:]))
    except MatrixError as exc:
        raise ClassifyError("blocks are not in the invariant family") from exc
    if om[q:, :q] != om[:q, q:]:
        raise ClassifyError("off-diagonal blocks differ")
    if lh_index(phi) == 1 or lh_index(mu) == 1:
        raise ClassifyError("diagonal summand blocks must be degenerate (else decomposable)")
    T = _Triple(jd, phi, psi, mu, M)
    I, O = T.I(), T.O()

    def finish_paired_or_single() -> tuple[int, int]:
        # mu = 0 from here on
        if T.phi.is_zero():
            T.apply(T.psi.inverse() @ anti_identity(K, n), O, O, I)
            return n + 1, 0
        C, A = lh_coset_reduce(T.phi, 0)
        T.apply(A, O, O, A.inverse() @ T.psi.inverse() @ anti_identity(K, n))
        r = T.r()
        return r, (n - r + 1) // 2

    if T.phi.is_zero() and T.mu.is_zero():
        r, s = finish_paired_or_single()
    elif T.phi.is_zero() or T.mu.is_zero():
        if T.phi.is_zero():
            T.swap()
        r, s = finish_paired_or_single()
    else:
        if T.j() < T.r():
            T.swap()
        while not T.mu.is_zero() and (T.j() - T.r()) % 2 == 0:
            r, j = T.r(), T.j()
            i = (j - r) // 2
            x = K.sqrt(K.div(lh_coeffs(T.mu)[j - 1], lh_coeffs(T.phi)[r - 1]))
            T.apply(I, toeplitz(K, n, n, i + 1, x), O, I)
        if T.mu.is_zero():
            r, s = finish_paired_or_single()
        else:
            r, j = T.r(), T.j()
            s = (j - r - 1) // 2
            _, A = lh_coset_reduce(T.phi, 0)
            _, D = lh_coset_reduce(T.mu, 0)
            T.apply(A, O, O, D)
            # bring mu to H_{n+j}(1)
            phiB, B = lh_coset_reduce(T.phi, s + 1, allow_vanishing=True)
            X1 = h_family_root(phiB, j + 1)
            X3 = h_family_root(T.mu, j)
            beta = B @ X3
            delta = I + toeplitz(K, n, n, 2, 1) @ X1 @ X3
            dinv = delta.inverse()
            T.apply(I, beta @ dinv, O, dinv)
            assert T.mu == lh_from_coeffs(K, n, [int(i == j - 1) for i in range(n)])
            # clear the odd tail of phi beyond r + 2s
            pc = lh_coeffs(T.phi)
            cs = [K.sqrt(pc[j + 2 * i - 3]) if j + 2 * i - 2 <= n else 0 for i in range(1, n + 1)]
            C = Mat.wrap(K, np.array([[cs[b - a] if b >= a else 0 for b in range(n)] for a in range(n)]))
            T.apply(I, O, C, I)
            # truncate psi
            t = (n - j + 2) // 2
            qc = lh_coeffs(T.psi)
            tail = lh_from_coeffs(K, n, [v if i >= t else 0 for i, v in enumerate(qc)])
            T.apply(I, O, O, I + T.psi.inverse() @ tail)
    pc, qc = lh_coeffs(T.phi), lh_coeffs(T.psi)
    t = (n - r - 2 * s + 1) // 2
    phi_l = tuple(pc[r + 2 * i] for i in range(s))
    psi_l = tuple(qc[i] ^ (1 if i == 0 else 0) for i in range(t))
    label = ClassLabel(spec, (r, s, phi_l, psi_l))
    want = _cnf2_triple(K, n, label.params)
    if (T.phi, T.psi, T.mu) != want:
        raise AssertionError(f"reduction did not reach the normal form for {label.text()}")
    return label, T.M


_CANON = {
    "trivial2": _canon_trivial2,
    "regular": _canon_regular,
    "regular2": _canon_regular2,
    "anbn": _canon_anbn,
    "cnf": _canon_cnf,
    "cnf2": _canon_cnf2,
}


# quadratic refinements


def _eps_power(spec: ModuleSpec, k: int) -> int:
    """(eps + eps^2)^(-k) in K."""
    K, e = _K(spec), spec.ext.epsilon
    base = K.add(e, K.mul(e, e))
    return K.pow(K.inv(base), k)


def quad_exists(label: ClassLabel) -> bool:
    spec, p = label.spec, label.params
    fam, n = spec.family, spec.n
    if fam in ("trivial2", "regular", "regular2"):
        return True
    if fam == "anbn":
        return all(p[d - 1] == p[d] for d in range(2, 2 * n - 1, 2))
    linear = spec.is_f_linear()
    if fam in ("cnf", "cninf"):
        if n % 2:
            return linear and all(a == (1 if i == 0 else 0) for i, a in enumerate(p))
        return not linear and all(a == _eps_power(spec, i + 1) for i, a in enumerate(p))
    r, s, phi, _ = p
    if r + 2 * s + 1 <= n:
        return False
    if r == n + 1:
        return True
    if (n + r) % 2 == 0:
        return linear and all(v == (1 if i == 0 else 0) for i, v in enumerate(phi))
    return not linear and all(v == _eps_power(spec, i + 1) for i, v in enumerate(phi))


def _forced_diagonal(label: ClassLabel, R: Mat) -> list[int]:
    """Diagonal D1 making (D1 R; 0 D2) invariant, in the delegated basis."""
    spec, p = label.spec, label.params
    n = spec.n
    if spec.family == "anbn":
        return [0] * n + [p[2 * i] for i in range(n)] + [p[2 * n - 1]]
    return R.diagonal()


@dataclass(frozen=True)
class _Reduction:
    label: QuadLabel
    Y: Mat
    t: int = 0
    eta_tt: int = 0


def _diagonal_reduce(R: Mat, D1: list[int], D2: list[int]) -> _Reduction:
    """(I Y; 0 I) taking (D1 R; 0 D2) to the chosen representative."""
    F, h = R.field, R.rows
    Ri_T = R.inverse().T
    if not any(D1):
        return _Reduction(UNIQUE, Ri_T @ diag(F, D2))
    eta = R.inverse() @ diag(F, D1) @ Ri_T
    ed = eta.diagonal()
    t = next(i for i, v in enumerate(ed) if v)
    et = ed[t]
    L = np.zeros((h, h), dtype=np.int64)
    for i in range(h):
        if i != t:
            L[t, i] = L[i, t] = F.sqrt(F.div(D2[i], et))
    c = D2[t]
    for s_ in range(h):
        if s_ != t:
            c ^= F.mul(ed[s_], F.mul(int(L[s_, t]), int(L[s_, t])))
    x, dlt = F.coset_reduce(F.mul(et, c))
    L[t, t] = F.div(dlt, et)
    return _Reduction(QuadLabel("arf", x), Ri_T @ Mat.wrap(F, L), t + 1, et)


def _unipotent(Y: Mat) -> Mat:
    F, h = Y.field, Y.rows
    return block([[identity(F, h), Y], [zeros(F, h), identity(F, h)]])


def _half_block_setup(label: ClassLabel) -> tuple[Mat, Mat, list[int]]:
    """(S, R, D1) for the representative in the delegated basis."""
    spec = label.spec
    dlabel = ClassLabel(spec.delegate, label.params)
    S = _rep_gram(dlabel)
    h = S.rows // 2
    R = S[:h, h:]
    return S, R, _forced_diagonal(dlabel, R)


def _hyperbolic_rep(F: Field, x: int) -> Mat:
    return Mat(F, [[1, 1], [0, x]])


def quad_representatives(label: ClassLabel) -> QuadFamily:
    spec = label.spec
    F, fam = spec.field, spec.family
    act = action(spec)
    reps = F.artin_schreier_reps()
    if not quad_exists(label):
        return QuadFamily("no invariant quadratic form", [], [NONE])
    S = _rep_gram(label)
    if fam == "trivial2":
        forms = [QuadraticForm.of(_hyperbolic_rep(F, x), act, spec) for x in reps]
        return QuadFamily("q_x(a e1 + b e2) = a^2 + ab + x b^2", forms, [QuadLabel("arf", x) for x in reps])
    if fam in ("regular", "regular2"):
        return QuadFamily("S^ (single class)", [QuadraticForm.of(s_hat(S), act, spec)], [UNIQUE])
    _, R, D1 = _half_block_setup(label)
    h = R.rows
    P = spec.swap
    if not any(D1):
        Q = block_diag(diag(F, D1), zeros(F, h)) + s_hat(_antiblock(R))
        return QuadFamily("(D1 R; 0 0) with D1 = 0 (single class)", [QuadraticForm.of(P @ Q @ P, act, spec)], [UNIQUE])
    red = _diagonal_reduce(R, D1, [0] * h)
    if fam == "anbn" and red.t > spec.n + 1:
        raise AssertionError(f"minimal index t = {red.t} exceeds n + 1")
    forms, labels = [], []
    for x in reps:
        D2 = [0] * h
        D2[red.t - 1] = F.div(x, red.eta_tt)
        Q = block_diag(diag(F, D1), diag(F, D2)) + s_hat(_antiblock(R))
        forms.append(QuadraticForm.of(P @ Q @ P, act, spec))
        labels.append(QuadLabel("arf", x))
    return QuadFamily(f"(D1 R; 0 E_tt(x / eta_tt)) with t = {red.t}", forms, labels)


def _quad_rep_for(label: ClassLabel, ql: QuadLabel) -> QuadraticForm:
    fam = quad_representatives(label)
    return fam.forms[fam.labels.index(ql)]


def quad_canonicalize(label: ClassLabel, Q: Mat) -> tuple[QuadLabel, Mat]:
    """Class of an invariant quadratic form whose polar form is representative(label)."""
    spec = label.spec
    F, fam = spec.field, spec.family
    act = action(spec)
    q = QuadraticForm.of(Q, act, spec)
    S = _rep_gram(label)
    if q.rep + q.rep.T != S:
        raise ClassifyError("associated bilinear form is not the class representative")
    if not quad_is_invariant(q):
        raise ClassifyError("quadratic form is not G-invariant")
    if not quad_exists(label):
        raise AssertionError("invariant quadratic form found where none should exist")
    U = q.rep
    d = U.diagonal()
    if fam == "trivial2":
        c, dd = d
        x, y = F.coset_reduce(F.mul(c, dd))
        if c:
            b = F.sqrt(c)
            u, v = [F.inv(b), 0], [F.mul(F.div(b, c), y), b]
        elif dd:
            b = F.sqrt(dd)
            u, v = [0, F.inv(b)], [b, F.mul(F.div(b, dd), y)]
        else:
            u, v = [1, 1], [0, 1]
        ql, M = QuadLabel("arf", x), Mat(F, [[u[0], v[0]], [u[1], v[1]]])
    elif fam == "regular":
        phi = regular_from_hat(S)
        lam = phi[1] ^ phi[2] ^ phi[3]
        zeta = regular_hat(F, (1, 1, 1, 1))
        ql, M = UNIQUE, identity(F, 4) + zeta.scale(F.div(d[0], lam))
    elif fam == "regular2":
        zeta = regular_hat(F, (1, 1, 1, 1))
        nb = regular_from_hat(S[:4, 4:])
        lam = nb[0] ^ nb[1] ^ nb[2] ^ nb[3]
        x, y = F.div(d[0], lam), F.div(d[4], lam)
        I = identity(F, 4)
        ql, M = UNIQUE, block([[I, zeta.scale(y)], [zeta.scale(x), I]])
    else:
        P = spec.swap
        Ud = normalize_quadratic(P @ U @ P)
        _, R, D1 = _half_block_setup(label)
        h = R.rows
        dd = Ud.diagonal()
        if dd[:h] != D1:
            raise AssertionError("invariant form with an unexpected forced diagonal")
        red = _diagonal_reduce(R, D1, dd[h:])
        ql, M = red.label, P @ _unipotent(red.Y) @ P
    target = _quad_rep_for(label, ql)
    if not quad_isometry_check(q, target, M):
        raise AssertionError(f"quadratic witness check failed for {label.text()}")
    return ql, M


def quad_classify(spec: ModuleSpec, Q: Mat) -> tuple[ClassLabel, QuadLabel, Mat]:
    """Full classification of an invariant quadratic form with symplectic polar form."""
    q = QuadraticForm.on(spec, Q)
    if not quad_is_invariant(q):
        raise ClassifyError("quadratic form is not G-invariant")
    label, W = canonicalize(spec, q.rep + q.rep.T)
    ql, M = quad_canonicalize(label, W.T @ q.rep @ W)
    return label, ql, W @ M
