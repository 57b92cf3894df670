"""Oriented spheres on the Lie quadric, Lie and Moebius transformations,
parallel transformations, the factorization g = Phi1 P_t Phi2, and the
conformal maps between space forms and the unit sphere."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DecompositionFailed, InvalidInput, InvalidMap
from .minkowski import (
    OrthogonalMap,
    ProjectivePoint,
    Signature,
    SignedVector,
    complete_orthonormal,
    inner,
    rank_one_residual,
)

TWO_PI = 2 * np.pi
CONTACT_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-8
KINDS = ("mobius", "spherical", "euclidean", "hyperbolic", "general")


# ---------------------------------------------------------------------------
# oriented spheres
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientedSphere:
    """Sphere of S^d with centre x and signed radius r; r = 0 is a point
    sphere, r = pi/2 (mod pi) a great sphere. S(x, r) and S(-x, r + pi) are
    the same oriented sphere."""

    center: np.ndarray
    signed_radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        if c.size < 2:
            raise InvalidInput("centre must lie on S^d with d >= 1")
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise InvalidInput(f"centre is not a unit vector: |x| = {np.linalg.norm(c):.15g}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "signed_radius", float(self.signed_radius))

    @property
    def d(self):
        return self.center.size - 1

    def wrapped(self):
        """(radius mod 2 pi, winding count)."""
        return wrap_radius(self.signed_radius)


def wrap_radius(r):
    w = int(np.floor(r / TWO_PI))
    return r - w * TWO_PI, w


def sphere_vector(s: OrientedSphere) -> np.ndarray:
    r = s.signed_radius
    return np.concatenate([[np.cos(r)], s.center, [np.sin(r)]])


def sphere_to_quadric(s: OrientedSphere) -> ProjectivePoint:
    """S(x, r) -> [(cos r, x, sin r)]."""
    return ProjectivePoint(SignedVector(sphere_vector(s), Signature.lie(s.d)))


def quadric_to_sphere(p) -> OrientedSphere:
    """Inverse of ``sphere_to_quadric``: the representative is rescaled by a
    positive factor so its middle block is a unit vector; r is returned in
    [0, 2 pi)."""
    v = p.representative.coords if isinstance(p, ProjectivePoint) else np.asarray(p, float)
    scale = np.linalg.norm(v)
    if scale == 0:
        raise InvalidInput("zero representative")
    v = v / scale
    w = np.ones(v.size)
    w[0] = w[-1] = -1.0
    q = float(inner(v, v, w))
    if abs(q) > 1e-9:
        raise InvalidInput(f"representative is off the Lie quadric (self-inner {q:.3e})")
    mid = v[1:-1]
    nm = np.linalg.norm(mid)
    if nm < 1e-12:
        raise InvalidInput("representative has no sphere centre")
    v = v / nm
    r = float(np.arctan2(v[-1], v[0])) % TWO_PI
    return OrientedSphere(v[1:-1] / np.linalg.norm(v[1:-1]), r)


def oriented_contact(s1: OrientedSphere, s2: OrientedSphere, tol=CONTACT_TOL) -> bool:
    """Algebraic test <k1, k2> = 0 on the unit-scale representatives."""
    if s1.d != s2.d:
        raise InvalidInput("spheres live in different dimensions")
    return abs(contact_value(sphere_vector(s1), sphere_vector(s2))) <= tol


def contact_value(k1, k2):
    k1 = np.asarray(k1, float) / np.linalg.norm(k1)
    k2 = np.asarray(k2, float) / np.linalg.norm(k2)
    w = np.ones(k1.size)
    w[0] = w[-1] = -1.0
    return float(inner(k1, k2, w))


def geometric_contact(s1: OrientedSphere, s2: OrientedSphere, tol=1e-7) -> bool:
    """Tangency oracle on S^d: the spherical distance of the centres equals
    the difference of signed radii modulo 2 pi (either sense)."""
    dist = float(np.arccos(np.clip(s1.center @ s2.center, -1.0, 1.0)))
    delta = (s1.signed_radius - s2.signed_radius) % TWO_PI
    return min(abs(dist - delta), abs(dist - (TWO_PI - delta))) <= tol


# ---------------------------------------------------------------------------
# transformations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LieTransformation:
    map: OrthogonalMap
    kind_hint: str = "general"
    t: Optional[float] = None

    def __post_init__(self):
        if self.map.signature.kind != "lie":
            raise InvalidMap("Lie transformations need the Lie signature")
        if self.kind_hint not in KINDS:
            raise InvalidInput(f"unknown kind hint {self.kind_hint!r}")

    @classmethod
    def from_matrix(cls, matrix, kind_hint="general", t=None):
        matrix = np.asarray(matrix, dtype=float)
        return cls(OrthogonalMap(matrix, Signature.lie(matrix.shape[0] - 3)), kind_hint, t)

    @property
    def matrix(self):
        return self.map.matrix

    @property
    def d(self):
        return self.map.signature.d

    def __matmul__(self, other):
        if isinstance(other, LieTransformation):
            return LieTransformation(self.map @ other.map)
        return NotImplemented

    def inverse(self):
        return LieTransformation(self.map.inverse(), self.kind_hint, None if self.t is None else -self.t)

    def apply_vector(self, v):
        return self.matrix @ np.asarray(v, dtype=float)

    def apply_sphere(self, s: OrientedSphere) -> OrientedSphere:
        return quadric_to_sphere(self.apply_vector(sphere_vector(s)))

    def is_mobius(self, tol=1e-9):
        """True if [e_{d+3}] is fixed, i.e. point spheres go to point spheres."""
        col = self.matrix[:, -1]
        e = np.zeros_like(col)
        e[-1] = 1.0
        return rank_one_residual(col, e) <= tol

    def to_dict(self):
        return {
            "signature": str(self.map.signature),
            "d": self.d,
            "kind_hint": self.kind_hint,
            "t": self.t,
            "rows": int(self.matrix.shape[0]),
            "matrix": [float(x) for x in self.matrix.reshape(-1)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        """Row-major ``matrix`` (flat list or nested rows), ``signature`` tag
        "Lie(d)", optional ``kind_hint`` and ``t``."""
        try:
            m = np.asarray(data["matrix"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"matrix JSON needs a numeric 'matrix' field: {exc}") from exc
        if m.ndim == 1:
            k = int(round(np.sqrt(m.size)))
            if k * k != m.size:
                raise InvalidInput("flat matrix length is not a square")
            m = m.reshape(k, k)
        tag = data.get("signature")
        if tag is not None and tag != f"Lie({m.shape[0] - 3})":
            raise InvalidInput(f"signature tag {tag!r} does not match a {m.shape[0]}x{m.shape[0]} matrix")
        return cls.from_matrix(m, data.get("kind_hint", "general"), data.get("t"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def mobius_extend(L: OrthogonalMap, sign: int = 1) -> LieTransformation:
    """Block extension of a Moebius map: L on the first d+2 coordinates and
    e_{d+3} -> sign e_{d+3}."""
    if L.signature.kind != "mobius":
        raise InvalidMap("mobius_extend needs a map with Moebius signature")
    if sign not in (1, -1):
        raise InvalidInput("sign must be +1 or -1")
    k = L.matrix.shape[0]
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = L.matrix
    M[k, k] = sign
    return LieTransformation(OrthogonalMap(M, Signature.lie(L.signature.d)), "mobius")


def parallel_transformation(kind: str, t: float, d: int) -> LieTransformation:
    """P_t: spherical rotates (e_1, e_{d+3}); hyperbolic boosts (e_2, e_{d+3});
    Euclidean is the unipotent matrix with t^2/2 entries."""
    n = d + 3
    M = np.eye(n)
    if kind == "spherical":
        c, s = np.cos(t), np.sin(t)
        M[0, 0], M[-1, 0] = c, s
        M[0, -1], M[-1, -1] = -s, c
    elif kind == "hyperbolic":
        c, s = np.cosh(t), np.sinh(t)
        M[1, 1], M[-1, 1] = c, s
        M[1, -1], M[-1, -1] = s, c
    elif kind == "euclidean":
        h = t * t / 2
        M[0, 0], M[0, 1], M[0, -1] = 1 - h, -h, -t
        M[1, 0], M[1, 1], M[1, -1] = h, 1 + h, t
        M[-1, 0], M[-1, 1], M[-1, -1] = t, t, 1.0
    else:
        raise InvalidInput(f"unknown parallel transformation kind {kind!r}")
    return LieTransformation(OrthogonalMap(M, Signature.lie(d)), kind, float(t))


def random_mobius_lie(d, rng, spread=0.5, sign=None):
    from .minkowski import random_orthogonal

    L = random_orthogonal(Signature.mobius(d), rng, spread)
    s = sign if sign is not None else int(rng.choice([-1, 1]))
    return mobius_extend(L, s)


# ---------------------------------------------------------------------------
# factorization g = Phi1 P_t Phi2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    phi1: LieTransformation
    kind: str
    t: float
    phi2: LieTransformation
    residual: float

    def product(self):
        return self.phi1.matrix @ parallel_transformation(self.kind, self.t, self.phi1.d).matrix @ self.phi2.matrix

    def to_dict(self):
        return {
            "kind": self.kind,
            "t": self.t,
            "residual": self.residual,
            "phi1": self.phi1.to_dict(),
            "phi2": self.phi2.to_dict(),
        }

    def __iter__(self):
        return iter((self.phi1, self.kind, self.t, self.phi2))


def _mobius_from_columns(d, fixed):
    """Complete fixed Moebius columns (slot -> vector in R^{d+2}_1) to a full
    Lie matrix fixing e_{d+3}."""
    wm = Signature.mobius(d).weights
    B = complete_orthonormal(wm, fixed=fixed)
    M = np.eye(d + 3)
    M[: d + 2, : d + 2] = B
    return M


def _finish(G, d, kind, t, Phi1):
    """Phi2 = P_t^{-1} Phi1^{-1} G, cleaned to block form, with its residual."""
    P = parallel_transformation(kind, t, d).matrix
    # a linear solve is more accurate than the J-transpose inverse when Phi1
    # is only orthogonal to rounding and G has large entries
    Phi2 = np.linalg.solve(Phi1 @ P, G)
    off = max(np.max(np.abs(Phi2[:-1, -1])), np.max(np.abs(Phi2[-1, :-1])))
    Phi2c = Phi2.copy()
    Phi2c[:-1, -1] = 0.0
    Phi2c[-1, :-1] = 0.0
    Phi2c[-1, -1] = np.sign(Phi2[-1, -1]) or 1.0
    residual = float(np.max(np.abs(G - Phi1 @ P @ Phi2c)))
    return Phi2c, max(residual, 0.0), off


def cecil_chern_decompose(g: LieTransformation, tol=RECONSTRUCTION_TOL) -> Decomposition:
    """Factor g = Phi1 P_t Phi2 with Moebius Phi1, Phi2 and a parallel
    transformation P_t.

    With w = g e_{d+3} = a e_{d+3} + u: |a| < 1 gives the spherical branch
    (t = arccos a, Phi1 e_1 = -u / sin t); |a| > 1 the hyperbolic one
    (t = arccosh |a|, Phi1 e_2 = u / sinh t, after replacing g by -g when
    a < 0, absorbed into Phi2); |a| = 1 with u != 0 the Euclidean one
    (Phi1 maps e_2 - e_1 to u / t); u = 0 means g is already Moebius.
    Every applicable branch is tried and the best reconstruction kept.
    """
    G = np.asarray(g.matrix, dtype=float)
    d = g.d
    wm = Signature.mobius(d).weights
    col = G[:, -1]
    a = float(col[-1])
    u = col[:-1].copy()
    unorm = float(np.linalg.norm(u))
    attempts = []

    def attempt(kind, t, Phi1, sign):
        try:
            Phi2, res, off = _finish(sign * G, d, kind, t, Phi1)
            Phi2 = sign * Phi2
            res = float(np.max(np.abs(G - Phi1 @ parallel_transformation(kind, t, d).matrix @ Phi2)))
            attempts.append((res, kind, t, Phi1, Phi2))
        except (InvalidInput, InvalidMap, np.linalg.LinAlgError, FloatingPointError):
            pass

    if unorm <= 1e-9:
        attempt("spherical", 0.0, np.eye(d + 3), 1.0)
    if abs(a) < 1 and unorm > 1e-12:
        t = float(np.arccos(np.clip(a, -1.0, 1.0)))
        st = np.sin(t)
        if st > 1e-12:
            e1 = -u / st
            try:
                attempt("spherical", t, _mobius_from_columns(d, {0: e1}), 1.0)
            except (InvalidInput, InvalidMap):
                pass
    if abs(a) > 1:
        sign = 1.0 if a > 0 else -1.0
        t = float(np.arccosh(abs(a)))
        e2 = sign * u / np.sinh(t)
        try:
            attempt("hyperbolic", t, _mobius_from_columns(d, {1: e2}), sign)
        except (InvalidInput, InvalidMap):
            pass
    if abs(abs(a) - 1) <= 1e-6 and unorm > 1e-12:
        sign = 1.0 if a > 0 else -1.0
        us = sign * u
        t = unorm / np.sqrt(2.0)
        nvec = us / t
        mvec = 2 * (wm * nvec) / float(nvec @ nvec)
        e1 = (mvec - nvec) / 2
        e2 = (mvec + nvec) / 2
        try:
            attempt("euclidean", t, _mobius_from_columns(d, {0: e1, 1: e2}), sign)
        except (InvalidInput, InvalidMap):
            pass
    if not attempts:
        raise DecompositionFailed("no branch of the factorization applies", best_residual=np.inf)
    attempts.sort(key=lambda x: x[0])
    res, kind, t, Phi1, Phi2 = attempts[0]
    if not np.isfinite(res) or res > tol:
        raise DecompositionFailed(
            f"best reconstruction residual {res:.3e} exceeds {tol:.1e}", best_residual=res
        )
    sig = Signature.lie(d)
    try:
        phi1 = LieTransformation(OrthogonalMap(Phi1, sig), "mobius")
        phi2 = LieTransformation(OrthogonalMap(Phi2, sig), "mobius")
    except InvalidMap as exc:
        raise DecompositionFailed(f"factor failed validation: {exc}", best_residual=res) from exc
    return Decomposition(phi1, kind, float(t), phi2, res)


# ---------------------------------------------------------------------------
# conformal maps to the unit sphere
# ---------------------------------------------------------------------------

def stereographic(x, kind="euclidean", c=None):
    """pi_0: R^m -> S^m, or pi_c: H^m_c -> S^m for c < 0 with
    H^m_c = {-x_1^2 + x_2^2 + ... = 1/c, x_1 > 0}; pole (-1, 0, ..., 0)."""
    x = np.asarray(x, dtype=float)
    if kind == "euclidean":
        y = x
    elif kind == "hyperbolic":
        if c is None or c >= 0:
            raise InvalidInput("hyperbolic stereographic projection needs c < 0")
        R = 1.0 / np.sqrt(-c)
        res = abs(-x[0] ** 2 + x[1:] @ x[1:] - 1.0 / c)
        if res > 1e-8 * max(1.0, x @ x) or x[0] <= 0:
            raise InvalidInput(f"point is off the hyperboloid (residual {res:.3e})")
        y = x[1:] / (x[0] + R)
    else:
        raise InvalidInput(f"unknown stereographic kind {kind!r}")
    s = y @ y
    return np.concatenate([[(1 - s) / (1 + s)], 2 * y / (1 + s)])


def inverse_stereographic(z, kind="euclidean", c=None):
    z = np.asarray(z, dtype=float)
    if abs(z @ z - 1.0) > 1e-8:
        raise InvalidInput("point is not on the unit sphere")
    if 1 + z[0] <= 1e-12:
        raise InvalidInput("the pole has no preimage")
    y = z[1:] / (1 + z[0])
    if kind == "euclidean":
        return y
    if kind == "hyperbolic":
        if c is None or c >= 0:
            raise InvalidInput("hyperbolic stereographic projection needs c < 0")
        s = y @ y
        if s >= 1:
            raise InvalidInput("point is outside the image hemisphere")
        R = 1.0 / np.sqrt(-c)
        return np.concatenate([[R * (1 + s) / (1 - s)], 2 * R * y / (1 - s)])
    raise InvalidInput(f"unknown stereographic kind {kind!r}")


def similarity(c, x):
    """theta_c(x) = sqrt(c) x from S^m_c (|x|^2 = 1/c) to the unit sphere."""
    if c <= 0:
        raise InvalidInput("similarity needs c > 0")
    x = np.asarray(x, dtype=float)
    if abs(x @ x - 1.0 / c) > 1e-10 * max(1.0, 1.0 / c):
        raise InvalidInput("point is not on the sphere of curvature c")
    return np.sqrt(c) * x


def inverse_similarity(c, y):
    if c <= 0:
        raise InvalidInput("similarity needs c > 0")
    y = np.asarray(y, dtype=float)
    if abs(y @ y - 1.0) > 1e-10:
        raise InvalidInput("point is not on the unit sphere")
    return y / np.sqrt(c)
