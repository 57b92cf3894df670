"""Indefinite inner products on R^{d+3}_2 (Lie) and R^{d+2}_1 (Moebius).

Documentation indices are 1-based (e_1 ... e_{d+3}); storage is 0-based, so
e_1 is index 0 and e_{d+3} is index -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidInput, InvalidMap

ORTHOGONALITY_TOL = 1e-8
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class Signature:
    """Either ``Lie(d)``: weights (-1, +1, ..., +1, -1) of length d+3, or
    ``Mobius(d)``: weights (-1, +1, ..., +1) of length d+2."""

    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in ("lie", "mobius"):
            raise InvalidInput(f"unknown signature kind {self.kind!r}")
        if self.d < 1:
            raise InvalidInput("sphere dimension d must be >= 1")

    @classmethod
    def lie(cls, d):
        return cls("lie", d)

    @classmethod
    def mobius(cls, d):
        return cls("mobius", d)

    @property
    def dim(self):
        return self.d + 3 if self.kind == "lie" else self.d + 2

    @property
    def weights(self):
        w = np.ones(self.dim)
        w[0] = -1.0
        if self.kind == "lie":
            w[-1] = -1.0
        return w

    @property
    def gram(self):
        return np.diag(self.weights)

    def __str__(self):
        return f"{'Lie' if self.kind == 'lie' else 'Mobius'}({self.d})"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SignedVector:
    coords: np.ndarray
    signature: Signature

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen(self.coords))
        if self.coords.shape != (self.signature.dim,):
            raise InvalidInput(
                f"coords of shape {self.coords.shape} do not match {self.signature} "
                f"(expected length {self.signature.dim})"
            )

    def __add__(self, other):
        _check_same(self, other)
        return SignedVector(self.coords + other.coords, self.signature)

    def __mul__(self, scalar):
        return SignedVector(float(scalar) * self.coords, self.signature)

    __rmul__ = __mul__

    def __neg__(self):
        return SignedVector(-self.coords, self.signature)


def _check_same(u, v):
    if u.signature != v.signature:
        raise ContractViolation(f"signature mismatch: {u.signature} vs {v.signature}")


def inner(u, v, weights):
    """Raw signed inner product on arrays; broadcasts over leading axes."""
    return np.sum(np.asarray(weights) * np.asarray(u) * np.asarray(v), axis=-1)


def signed_inner(u: SignedVector, v: SignedVector) -> float:
    _check_same(u, v)
    return float(inner(u.coords, v.coords, u.signature.weights))


@dataclass(frozen=True)
class ProjectivePoint:
    representative: SignedVector

    def __post_init__(self):
        if not np.any(self.representative.coords):
            raise InvalidInput("projective point needs a nonzero representative")

    @property
    def signature(self):
        return self.representative.signature

    def normalized(self):
        c = self.representative.coords
        return c / np.linalg.norm(c)


def rank_one_residual(a, b):
    """Second singular value of the stacked unit representatives of a and b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidInput("zero representative")
    s = np.linalg.svd(np.vstack([a / na, b / nb]), compute_uv=False)
    return float(s[1])


def projective_equal(p: ProjectivePoint, q: ProjectivePoint, tol: float = 1e-8) -> bool:
    if p.signature != q.signature:
        raise ContractViolation(f"signature mismatch: {p.signature} vs {q.signature}")
    return rank_one_residual(p.representative.coords, q.representative.coords) <= tol


def orthogonality_residual(matrix, weights):
    J = np.diag(weights)
    return float(np.max(np.abs(matrix.T @ J @ matrix - J)))


@dataclass(frozen=True)
class OrthogonalMap:
    """A matrix preserving the signed inner product, validated on construction."""

    matrix: np.ndarray
    signature: Signature
    residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        n = self.signature.dim
        if m.shape != (n, n):
            raise InvalidMap(f"matrix shape {m.shape} does not match {self.signature}")
        res = orthogonality_residual(m, self.signature.weights)
        if not np.isfinite(res) or res > ORTHOGONALITY_TOL:
            raise InvalidMap(
                f"matrix is not orthogonal for {self.signature}: residual {res:.3e}", res
            )
        object.__setattr__(self, "residual", res)

    def inverse(self):
        J = self.signature.gram
        return OrthogonalMap(J @ self.matrix.T @ J, self.signature)

    def __matmul__(self, other):
        if isinstance(other, OrthogonalMap):
            if other.signature != self.signature:
                raise ContractViolation("signature mismatch in composition")
            return OrthogonalMap(self.matrix @ other.matrix, self.signature)
        return NotImplemented

    @classmethod
    def identity(cls, signature):
        return cls(np.eye(signature.dim), signature)


def apply_map(L: OrthogonalMap, v: SignedVector) -> SignedVector:
    if L.signature != v.signature:
        raise ContractViolation(f"signature mismatch: {L.signature} vs {v.signature}")
    return SignedVector(L.matrix @ v.coords, v.signature)


def _project_out(v, basis, weights):
    for b in basis:
        v = v - inner(v, b, weights) / inner(b, b, weights) * b
    return v


def complete_orthonormal(weights, fixed=None, rng=None, spread=0.0, max_tries=1000):
    """Indefinite Gram-Schmidt.

    Returns a matrix whose columns form an orthonormal basis for the signed
    inner product with the given weights (column i has square weights[i]).
    ``fixed`` maps slot index -> prescribed column, which must already be
    mutually orthonormal. Remaining slots are filled timelike first. Without
    ``rng`` the candidates are the standard basis vectors (deterministic);
    with ``rng`` they are e_slot + spread * N(0, 1) samples. Pivots with
    |<v, v>| < 1e-10 or the wrong sign are rejected.
    """
    weights = np.asarray(weights, dtype=float)
    n = len(weights)
    fixed = dict(fixed or {})
    cols = {k: np.asarray(v, dtype=float) for k, v in fixed.items()}
    basis = list(cols.values())
    order = sorted((i for i in range(n) if i not in cols), key=lambda i: (weights[i] > 0, i))
    for slot in order:
        want = weights[slot]
        if rng is None:
            best, best_q = None, 0.0
            for j in range(n):
                cand = _project_out(np.eye(n)[j], basis, weights)
                q = inner(cand, cand, weights)
                if np.sign(q) == np.sign(want) and abs(q) > max(best_q, PIVOT_TOL):
                    best, best_q = cand, abs(q)
            if best is None:
                # standard basis exhausted for this sign: fall back to combinations
                best = _search_pivot(basis, weights, want)
            v = best
        else:
            for _ in range(max_tries):
                cand = np.eye(n)[slot] + spread * rng.standard_normal(n)
                cand = _project_out(cand, basis, weights)
                q = inner(cand, cand, weights)
                if np.sign(q) == np.sign(want) and abs(q) > PIVOT_TOL:
                    v = cand
                    break
            else:
                raise InvalidInput("indefinite Gram-Schmidt could not find a pivot")
        v = v / np.sqrt(abs(inner(v, v, weights)))
        cols[slot] = v
        basis.append(v)
    return np.column_stack([cols[i] for i in range(n)])


def _search_pivot(basis, weights, want):
    n = len(weights)
    for i in range(n):
        for j in range(n):
            for s in (1.0, -1.0):
                cand = np.eye(n)[i] + s * np.eye(n)[j]
                cand = _project_out(cand, basis, weights)
                q = inner(cand, cand, weights)
                if np.sign(q) == np.sign(want) and abs(q) > 1e-6:
                    return cand
    raise InvalidInput("no pivot of the required sign exists")


def random_orthogonal(signature: Signature, rng, spread=0.5) -> OrthogonalMap:
    """Random element of O(p, q) built by indefinite Gram-Schmidt on perturbed
    standard basis vectors; ``spread`` controls how far from the identity."""
    return OrthogonalMap(complete_orthonormal(signature.weights, rng=rng, spread=spread), signature)
