"""Normed division algebras R, C, H, O via Cayley-Dickson doubling, and 3x3
Hermitian matrices over them.

Doubling convention: (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c)).
With it the quaternion basis (1, i, j, k) is the coordinate basis e_0..e_3 and
i j = k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolation, InvalidInput, UnsupportedChart

ALGEBRA_DIMS = {"R": 1, "C": 2, "H": 4, "O": 8}
MU = {"R": 1, "C": 2, "H": 3, "O": 4}


def _conj(x):
    y = -np.asarray(x, dtype=float)
    y[..., 0] *= -1
    return y


def _cd_mul(x, y):
    n = x.shape[-1]
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[..., :h], x[..., h:]
    c, d = y[..., :h], y[..., h:]
    return np.concatenate(
        [_cd_mul(a, c) - _cd_mul(_conj(d), b), _cd_mul(d, a) + _cd_mul(b, _conj(c))], axis=-1
    )


@lru_cache(maxsize=None)
def structure_constants(dim):
    """Tensor C with (x y)_k = sum_ij C[i, j, k] x_i y_j."""
    eye = np.eye(dim)
    C = _cd_mul(eye[:, None, :], eye[None, :, :])
    C.setflags(write=False)
    return C


def mul(x, y):
    """Product of coordinate arrays (broadcasting over leading axes)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    C = structure_constants(x.shape[-1])
    return np.einsum("...i,...j,ijk->...k", x, y, C)


conj = _conj


def _algebra_of(name):
    if name not in ALGEBRA_DIMS:
        raise InvalidInput(f"unknown algebra {name!r}; expected one of R, C, H, O")
    return name


@dataclass(frozen=True)
class AlgebraElement:
    algebra: str
    coords: np.ndarray

    def __post_init__(self):
        _algebra_of(self.algebra)
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape != (ALGEBRA_DIMS[self.algebra],):
            raise InvalidInput(
                f"{self.algebra} elements have {ALGEBRA_DIMS[self.algebra]} coordinates, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def basis(cls, algebra, i):
        return cls(algebra, np.eye(ALGEBRA_DIMS[algebra])[i])

    def conj(self):
        return AlgebraElement(self.algebra, _conj(self.coords))

    def __mul__(self, other):
        return multiply(self, other)

    def __add__(self, other):
        _same(self, other)
        return AlgebraElement(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        _same(self, other)
        return AlgebraElement(self.algebra, self.coords - other.coords)

    def scale(self, s):
        return AlgebraElement(self.algebra, s * self.coords)

    @property
    def real(self):
        return float(self.coords[0])


def _same(a, b):
    if a.algebra != b.algebra:
        raise ContractViolation(f"algebra mismatch: {a.algebra} vs {b.algebra}")


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _same(a, b)
    return AlgebraElement(a.algebra, mul(a.coords, b.coords))


def norm(a: AlgebraElement) -> float:
    return float(np.linalg.norm(a.coords))


@dataclass(frozen=True)
class HermitianMatrix3:
    """3x3 Hermitian matrix: real diagonal and the (1,2), (1,3), (2,3) entries."""

    algebra: str
    diagonal: np.ndarray
    off_diagonal: np.ndarray  # shape (3, dim): entries (1,2), (1,3), (2,3)

    _OFF = {(0, 1): 0, (0, 2): 1, (1, 2): 2}

    def __post_init__(self):
        _algebra_of(self.algebra)
        d = np.array(self.diagonal, dtype=float).reshape(3)
        o = np.array(self.off_diagonal, dtype=float).reshape(3, ALGEBRA_DIMS[self.algebra])
        d.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", o)

    @property
    def dim(self):
        return ALGEBRA_DIMS[self.algebra]

    def entry(self, i, j) -> np.ndarray:
        if i == j:
            e = np.zeros(self.dim)
            e[0] = self.diagonal[i]
            return e
        if i < j:
            return self.off_diagonal[self._OFF[(i, j)]].copy()
        return _conj(self.off_diagonal[self._OFF[(j, i)]])

    def full(self):
        """(3, 3, dim) array of all entries."""
        return np.array([[self.entry(i, j) for j in range(3)] for i in range(3)])

    @property
    def trace(self):
        return float(np.sum(self.diagonal))

    def traceless_coords(self):
        return hermitian_to_traceless(self.diagonal, self.off_diagonal)

    def jordan_square_residual(self):
        """max |1/2 (M M + M M) - M| over all entry coordinates."""
        F = self.full()
        MM = np.einsum("ika,kjb,abc->ijc", F, F, structure_constants(self.dim))
        return float(np.max(np.abs(MM - F)))


def hermitian_to_traceless(diagonal, off_diagonal):
    """Isometric coordinates of the traceless part of a Hermitian matrix under
    <A, B> = Re tr(A B), as a vector of length 3*dim + 2."""
    d = np.asarray(diagonal, dtype=float)
    o = np.asarray(off_diagonal, dtype=float)
    t1 = (d[..., 0] - d[..., 1]) / np.sqrt(2.0)
    t2 = (d[..., 0] + d[..., 1] - 2.0 * d[..., 2]) / np.sqrt(6.0)
    rest = np.sqrt(2.0) * o.reshape(o.shape[:-2] + (-1,))
    return np.concatenate([t1[..., None], t2[..., None], rest], axis=-1)


def _as_coords(v, algebra=None):
    if isinstance(v, (list, tuple)) and v and isinstance(v[0], AlgebraElement):
        algebra = v[0].algebra
        for x in v:
            if x.algebra != algebra:
                raise ContractViolation("mixed algebras in vector")
        return algebra, np.array([x.coords for x in v])
    arr = np.asarray(v, dtype=float)
    if algebra is None:
        raise InvalidInput("algebra must be given for raw coordinate arrays")
    return algebra, arr.reshape(3, ALGEBRA_DIMS[algebra])


def in_affine_chart(coords, tol=1e-12):
    """True if some entry is real and nonzero, so every entry product of v v*
    involves at most two octonions."""
    coords = np.asarray(coords)
    for x in coords:
        if abs(x[0]) > tol and np.all(np.abs(x[1:]) <= tol):
            return True
    return False


def hermitian_projector(v, algebra=None, tol=1e-10) -> HermitianMatrix3:
    """M = v v* with M_ij = v_i conj(v_j) for a unit 3-vector over the algebra."""
    algebra, c = _as_coords(v, algebra)
    total = float(np.sum(c * c))
    if abs(total - 1.0) > tol:
        raise InvalidInput(f"vector is not unit: sum |v_i|^2 = {total:.12g}")
    if algebra == "O" and not in_affine_chart(c):
        raise UnsupportedChart(
            "octonionic points must be given in an affine chart (one real coordinate)"
        )
    diag = np.sum(c * c, axis=1)
    off = np.array([mul(c[0], _conj(c[1])), mul(c[0], _conj(c[2])), mul(c[1], _conj(c[2]))])
    return HermitianMatrix3(algebra, diag, off)
