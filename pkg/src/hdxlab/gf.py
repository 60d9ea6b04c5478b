"""Exact linear algebra over prime fields GF(p).

Matrices are numpy int64 arrays with entries reduced mod p; the modulus
travels alongside as a plain int.  Subspaces are canonicalized to their
reduced row-echelon basis, so two equal subspaces compare (and hash)
byte-equal.  All randomness flows through an explicit numpy Generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "rref",
    "nullspace",
    "inverse",
    "Subspace",
    "subspace_sum",
    "subspace_intersect",
    "symplectic_gram",
    "symplectic_form",
    "symplectic_complement",
    "is_isotropic",
    "random_gl",
    "random_sp",
    "apply",
]


def _modp(a, p: int) -> np.ndarray:
    return np.asarray(np.asarray(a, dtype=np.int64) % p, dtype=np.int64)


def _inv_scalar(a: int, p: int) -> int:
    # Fermat inverse; p is prime by module contract.
    return pow(int(a) % p, p - 2, p)


def rref(m: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """Reduced row-echelon form over GF(p).

    Returns (R, rank) where R is the unique RREF of the row space of m
    (same shape as m, zero rows pushed to the bottom).
    """
    a = _modp(m, p).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i, c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * _inv_scalar(a[r, c], p)) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        r += 1
        if r == rows:
            break
    return a, r


def nullspace(m: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right nullspace of m over GF(p), one vector per row."""
    a, rank = rref(m, p)
    rows, cols = a.shape
    pivots = []
    for i in range(rank):
        pivots.append(int(np.nonzero(a[i])[0][0]))
    free = [j for j in range(cols) if j not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for bi, j in enumerate(free):
        basis[bi, j] = 1
        for i, pc in enumerate(pivots):
            basis[bi, pc] = (-a[i, j]) % p
    return basis


def inverse(m: np.ndarray, p: int) -> np.ndarray:
    """Matrix inverse over GF(p); raises ValueError if singular."""
    n = m.shape[0]
    aug = np.concatenate([_modp(m, p), np.eye(n, dtype=np.int64)], axis=1)
    r, rank = rref(aug, p)
    if rank < n or not np.array_equal(r[:, :n], np.eye(n, dtype=np.int64)):
        raise ValueError("matrix not invertible mod %d" % p)
    return r[:, n:]


@dataclass(frozen=True)
class Subspace:
    """A subspace of GF(p)^ambient, stored as its canonical RREF basis.

    The basis array has exactly dim rows (rank rows only) and is
    read-only; equality and hashing go through the byte encoding, so
    Subspaces are usable as dict keys everywhere downstream.
    """

    p: int
    ambient: int
    basis: np.ndarray
    _key: bytes = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = self.basis.tobytes()
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash((self.p, self.ambient, key)))

    @staticmethod
    def from_rows(rows, ambient: int, p: int) -> "Subspace":
        a = _modp(rows, p)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.size == 0:
            a = a.reshape(0, ambient)
        if a.shape[1] != ambient:
            raise ValueError("row length %d != ambient %d" % (a.shape[1], ambient))
        r, rank = rref(a, p)
        b = r[:rank].copy()
        b.flags.writeable = False
        return Subspace(p, ambient, b)

    @staticmethod
    def zero(ambient: int, p: int) -> "Subspace":
        return Subspace.from_rows(np.zeros((0, ambient), dtype=np.int64), ambient, p)

    @staticmethod
    def full(ambient: int, p: int) -> "Subspace":
        return Subspace.from_rows(np.eye(ambient, dtype=np.int64), ambient, p)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def key(self) -> tuple:
        return (self.p, self.ambient, self.dim, self._key)

    def contains_vector(self, v) -> bool:
        stacked = np.concatenate([self.basis, _modp(v, self.p).reshape(1, -1)])
        _, rank = rref(stacked, self.p)
        return rank == self.dim

    def contains(self, other: "Subspace") -> bool:
        if other.dim > self.dim:
            return False
        stacked = np.concatenate([self.basis, other.basis])
        _, rank = rref(stacked, self.p)
        return rank == self.dim

    def vectors(self):
        """Iterate all p^dim vectors of the subspace (small dims only)."""
        coeffs = np.zeros(self.dim, dtype=np.int64)
        while True:
            yield _modp(coeffs @ self.basis, self.p)
            i = 0
            while i < self.dim:
                coeffs[i] += 1
                if coeffs[i] < self.p:
                    break
                coeffs[i] = 0
                i += 1
            else:
                return
            if self.dim == 0:
                return

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.p == other.p
            and self.ambient == other.ambient
            and self._key == other._key
        )

    def __lt__(self, other):
        return self.key() < other.key()

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Subspace(p=%d, ambient=%d, dim=%d)" % (self.p, self.ambient, self.dim)


def _check_compatible(a: Subspace, b: Subspace):
    if a.p != b.p or a.ambient != b.ambient:
        raise ValueError("subspace ambient/field mismatch")


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    """Canonical span of the union of bases, the subspace A + B."""
    _check_compatible(a, b)
    return Subspace.from_rows(np.concatenate([a.basis, b.basis]), a.ambient, a.p)


def subspace_intersect(a: Subspace, b: Subspace) -> Subspace:
    """Canonical A ∩ B via the kernel of the stacked-basis system."""
    _check_compatible(a, b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient, a.p)
    # x in A∩B iff x = la·A = mu·B; (la, mu) solves [A^T | -B^T] = 0.
    stacked = np.concatenate([a.basis.T, (-(b.basis.T)) % a.p], axis=1)
    null = nullspace(stacked, a.p)
    if null.shape[0] == 0:
        return Subspace.zero(a.ambient, a.p)
    vecs = _modp(null[:, : a.dim] @ a.basis, a.p)
    return Subspace.from_rows(vecs, a.ambient, a.p)


def symplectic_gram(n: int, p: int) -> np.ndarray:
    """The fixed 2n x 2n form matrix [[0, I], [-I, 0]] mod p."""
    omega = np.zeros((2 * n, 2 * n), dtype=np.int64)
    omega[:n, n:] = np.eye(n, dtype=np.int64)
    omega[n:, :n] = (-np.eye(n, dtype=np.int64)) % p
    return omega


def symplectic_form(u, v, p: int) -> int:
    """omega(u, v) = sum_i u_i v_{n+i} - v_i u_{n+i} over GF(p)."""
    u = _modp(u, p)
    v = _modp(v, p)
    if u.shape[0] % 2:
        raise ValueError("symplectic form needs even dimension")
    n = u.shape[0] // 2
    return int((int(u[:n] @ v[n:]) - int(v[:n] @ u[n:])) % p)


def symplectic_complement(u: Subspace) -> Subspace:
    """Symp(U): all w with omega(w, x) = 0 for every x in U."""
    if u.ambient % 2:
        raise ValueError("ambient dimension must be even")
    p = u.p
    if u.dim == 0:
        return Subspace.full(u.ambient, p)
    omega = symplectic_gram(u.ambient // 2, p)
    # omega(w, x) = w @ omega @ x; rows of (basis @ omega^T) give the
    # linear conditions on w.
    cond = _modp(u.basis @ omega.T, p)
    return Subspace.from_rows(nullspace(cond, p), u.ambient, p)


def is_isotropic(u: Subspace) -> bool:
    """True iff omega vanishes on every pair of basis vectors of U."""
    if u.ambient % 2:
        raise ValueError("ambient dimension must be even")
    p = u.p
    omega = symplectic_gram(u.ambient // 2, p)
    gram = _modp(u.basis @ omega @ u.basis.T, p)
    return not gram.any()


def random_gl(d: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random invertible d x d matrix (rejection sampling)."""
    while True:
        m = rng.integers(0, p, size=(d, d), dtype=np.int64)
        _, rank = rref(m, p)
        if rank == d:
            return m


def random_sp(n: int, p: int, rng: np.random.Generator, word_len: int = 64) -> np.ndarray:
    """Random element of Sp_2n(F_p) as a word in the standard generators.

    Generators: unipotent blocks [[I, A], [0, I]] with A symmetric,
    GL blocks [[C, 0], [0, (C^T)^-1]], and the swap w = [[0, I], [-I, 0]].
    The output satisfies M^T omega M = omega exactly.
    """
    m = np.eye(2 * n, dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    for _ in range(word_len):
        kind = rng.integers(0, 3)
        g = np.zeros((2 * n, 2 * n), dtype=np.int64)
        if kind == 0:
            a = rng.integers(0, p, size=(n, n), dtype=np.int64)
            a = (a + a.T) % p
            g[:n, :n] = eye
            g[n:, n:] = eye
            g[:n, n:] = a
        elif kind == 1:
            c = random_gl(n, p, rng)
            g[:n, :n] = c
            g[n:, n:] = inverse(c.T, p)
        else:
            g[:n, n:] = eye
            g[n:, :n] = (-eye) % p
        m = (m @ g) % p
    return m


def apply(m: np.ndarray, u: Subspace) -> Subspace:
    """Image subspace span(M v : v in U), canonicalized."""
    if m.shape[1] != u.ambient:
        raise ValueError("matrix/subspace dimension mismatch")
    if u.dim == 0:
        return Subspace.zero(u.ambient, u.p)
    return Subspace.from_rows(_modp(u.basis @ m.T, u.p), u.ambient, u.p)
