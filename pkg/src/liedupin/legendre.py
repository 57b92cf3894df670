"""Legendre lifts of submanifolds of the unit sphere, curvature spheres,
tubes and focal sets, Lie-transformed lifts and a reducibility rank test."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.stats import qmc

from .charts import hyperspherical
from .errors import InsufficientSamples, InvalidInput
from .immersion import (
    ImmersionChart,
    fundamental_forms,
    normal_frame,
)
from .minkowski import ProjectivePoint, Signature, SignedVector

RANK_TOL_ANALYTIC = 1e-8
RANK_TOL_FD = 1e-5
DEGENERACY_TOL = 1e-6
PENCIL_ANGLE_TOL = 1e-6


class _Infinite:
    """Tag for the principal value of the point-sphere family."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __str__(self):
        return "inf"


INFINITE = _Infinite()


@dataclass(frozen=True)
class CurvatureSphere:
    representative: ProjectivePoint
    principal_value: object  # float or INFINITE
    multiplicity: int
    principal_space_basis: np.ndarray  # columns: tangent vectors of UN in the (X, eta) basis
    degeneracy: float = 0.0  # largest of the `multiplicity` smallest singular values of dK
    flagged: bool = False

    @property
    def is_infinite(self):
        return self.principal_value is INFINITE

    @property
    def vector(self):
        return self.representative.representative.coords


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendreLift:
    """Y1(x) = (1, f(x), 0) and Y_end(x, xi) = (0, xi, 1) in R^{d+3}_2 with d = m."""

    base: ImmersionChart
    reference: Optional[np.ndarray] = None

    @property
    def p(self):
        return self.base.p

    @property
    def d(self):
        return self.base.m

    @property
    def signature(self):
        return Signature.lie(self.d)

    def forms(self, u):
        return fundamental_forms(self.base, u, reference=self.reference)

    def normal(self, u, xi, ff=None):
        ff = ff or self.forms(u)
        xi = np.asarray(xi, dtype=float)
        return ff.normal_vector(xi)

    def Y1(self, u):
        return np.concatenate([[1.0], self.base(u), [0.0]])

    def Yend(self, u, xi, ff=None):
        return np.concatenate([[0.0], self.normal(u, xi, ff), [1.0]])

    def pair(self, u, xi, ff=None):
        ff = ff or self.forms(u)
        return np.concatenate([[1.0], ff.f, [0.0]]), self.Yend(u, xi, ff)

    def invariant_residual(self, u, xi):
        """max of |<Y1,Y1>|, |<Yend,Yend>|, |<Y1,Yend>|."""
        w = self.signature.weights
        a, b = self.pair(u, xi)
        return float(max(abs(np.sum(w * a * a)), abs(np.sum(w * b * b)), abs(np.sum(w * a * b))))

    def tangent_basis(self, u, xi, ff=None):
        """Differentials of Y1 and Y_end on a basis of T_(x,xi) UN.

        Basis: (E_i, -f_* A E_i) for a metric-orthonormal tangent basis E,
        then (0, eta_j) for an orthonormal basis of the normal space
        orthogonal to xi. Returns (dY1, dYend, E, etas).
        """
        ff = ff or self.forms(u)
        xi = np.asarray(xi, dtype=float)
        A = ff.shape_operator(xi)
        E = ff.orthonormal_tangent()
        N = ff.normal_frame
        # eta: orthonormal complement of xi inside the normal frame coordinates
        if self.p > 1:
            Q, _ = np.linalg.qr(np.column_stack([xi, np.eye(self.p)]))
            etas = N @ Q[:, 1 : self.p]
        else:
            etas = np.zeros((N.shape[0], 0))
        M = ff.f.size
        X = ff.Df @ E
        AX = ff.Df @ (A @ E)
        z = np.zeros((1, self.base.n + self.p - 1))
        dY1 = np.vstack([z, np.hstack([X, np.zeros((M, self.p - 1))]), z])
        dYend = np.vstack([z, np.hstack([-AX, etas]), z])
        return dY1, dYend, E, etas


def legendre_lift(chart: ImmersionChart, smooth_frames=True) -> LegendreLift:
    if chart.c != 1:
        raise InvalidInput(
            "Legendre lifts need an immersion into the unit sphere; compose with the "
            "similarity (c > 0) or a stereographic projection (c <= 0) first"
        )
    ref = normal_frame(chart, chart.center) if smooth_frames else None
    return LegendreLift(chart, ref)


# ---------------------------------------------------------------------------
# curvature spheres
# ---------------------------------------------------------------------------

def _quotient_basis(W1, Wend):
    """Columns B spanning the Euclidean complement of {W1, Wend, J W1, J Wend}:
    B^T restricted to span(W)^perp_J has kernel exactly span(W)."""
    n = W1.size
    w = np.ones(n)
    w[0] = w[-1] = -1.0
    C = np.vstack([w * W1, w * Wend, W1, Wend])
    return scipy.linalg.null_space(C)


def pencil_spheres(W1, Wend, dW1, dWend, angle_tol=PENCIL_ANGLE_TOL):
    """Curvature spheres of a Legendre map from its two sections and their
    differentials: the pencil beta P + alpha Q with P = B^T dW1, Q = B^T dWend
    is singular exactly at K = beta W1 + alpha Wend.

    Returns a list of (beta, alpha, multiplicity, kernel basis, degeneracy).
    """
    B = _quotient_basis(W1, Wend)
    P = B.T @ dW1
    Q = B.T @ dWend
    vals, vecs = scipy.linalg.eig(P, -Q, homogeneous_eigvals=True)
    a_h, b_h = vals  # b_h P x = a_h (-Q) x
    pairs = []
    for ah, bh in zip(a_h, b_h):
        beta, alpha = np.real(bh), np.real(ah)
        nrm = np.hypot(beta, alpha)
        beta, alpha = beta / nrm, alpha / nrm
        ang = np.arctan2(alpha, beta) % np.pi
        pairs.append(ang)
    pairs = np.array(pairs)
    order = np.argsort(pairs)
    groups = []
    for idx in order:
        a = pairs[idx]
        if groups:
            last = pairs[groups[-1][-1]]
            diff = min(abs(a - last), np.pi - abs(a - last))
            if diff <= angle_tol:
                groups[-1].append(idx)
                continue
        groups.append([idx])
    # wrap-around merge (angles near 0 and near pi describe the same point)
    if len(groups) > 1:
        a0, a1 = pairs[groups[0][0]], pairs[groups[-1][-1]]
        if np.pi - a1 + a0 <= angle_tol:
            groups[0] = groups[-1] + groups[0]
            groups.pop()
    out = []
    for grp in groups:
        # circular mean of angles mod pi
        a2 = 2.0 * pairs[grp]
        ang = 0.5 * float(np.arctan2(np.sin(a2).sum(), np.cos(a2).sum()))
        beta, alpha = np.cos(ang), np.sin(ang)
        dK = beta * P + alpha * Q
        U, s, Vt = np.linalg.svd(dK)
        m = len(grp)
        kernel = Vt[-m:].T
        out.append((beta, alpha, m, kernel, float(s[-m])))
    return out


def curvature_spheres(lift: LegendreLift, u, xi, method="pencil", cluster_tol=None):
    """Curvature spheres at (x, xi): one per principal-curvature cluster,
    [kappa Y1 + Y_end], plus [Y1] with multiplicity p - 1 when p >= 2.

    ``method="pencil"`` finds them from the singular pencil of the lifted
    differential; ``method="formula"`` builds them from the shape-operator
    spectrum. Both report the degeneracy of dK (its smallest singular values
    over the principal space).
    """
    ff = lift.forms(u)
    xi = np.asarray(xi, dtype=float)
    Y1, Yend = np.concatenate([[1.0], ff.f, [0.0]]), lift.Yend(u, xi, ff)
    dY1, dYend, _, _ = lift.tangent_basis(u, xi, ff)
    sig = lift.signature
    if cluster_tol is None:
        cluster_tol = lift.base.default_cluster_tol()
    out = []
    if method == "formula":
        sp = ff.spectrum(xi, cluster_tol)
        B = _quotient_basis(Y1, Yend)
        P, Q = B.T @ dY1, B.T @ dYend
        specs = [(kappa, 1.0, m) for kappa, m in zip(sp.eigenvalues, sp.multiplicities)]
        if lift.p >= 2:
            specs.append((1.0, 0.0, lift.p - 1))
        for beta, alpha, m in specs:
            U, s, Vt = np.linalg.svd(beta * P + alpha * Q)
            out.append((beta, alpha, m, Vt[-m:].T, float(s[-m])))
    elif method == "pencil":
        out = pencil_spheres(Y1, Yend, dY1, dYend)
    else:
        raise InvalidInput(f"unknown method {method!r}")
    spheres = []
    for beta, alpha, m, kernel, deg in out:
        K = beta * Y1 + alpha * Yend
        if abs(alpha) <= 1e-10 * max(1.0, abs(beta)):
            value = INFINITE
        else:
            value = float(beta / alpha)
        spheres.append(
            CurvatureSphere(
                ProjectivePoint(SignedVector(K, sig)), value, int(m), kernel, deg,
                flagged=deg > DEGENERACY_TOL,
            )
        )
    return _sorted_spheres(spheres)


def _sorted_spheres(spheres):
    finite = sorted([s for s in spheres if not s.is_infinite], key=lambda s: s.principal_value)
    return finite + [s for s in spheres if s.is_infinite]


# ---------------------------------------------------------------------------
# tubes and focal points
# ---------------------------------------------------------------------------

def tube_chart(chart: ImmersionChart, t: float, angle_domain=None):
    """f_t(x, xi) = cos t f(x) + sin t xi over the unit normal bundle.

    For hypersurfaces the domain is the base domain and xi the oriented unit
    normal. For p >= 2 the extra p - 1 coordinates are hyperspherical angles
    of xi in a smooth normal frame. The tube's own normal is
    -sin t f + cos t xi, so its principal curvatures are cot(theta_i - t)
    where kappa_i = cot theta_i (and theta = 0 for the point-sphere family).
    """
    if chart.c != 1:
        raise InvalidInput("tubes are built in the unit sphere")
    ref = normal_frame(chart, chart.center)
    n, p = chart.n, chart.p
    ct, st = np.cos(t), np.sin(t)

    def parts(x):
        x = np.asarray(x, float)
        u = x[:n]
        f, Df, _ = chart.jet_at(u)
        N = normal_frame(chart, u, f, Df, reference=ref)
        xi = N[:, 0] if p == 1 else N @ hyperspherical(x[n:])
        return f, xi

    def evalf(x):
        f, xi = parts(x)
        return ct * f + st * xi

    def hint(x):
        f, xi = parts(x)
        return -st * f + ct * xi

    lo, hi = chart.domain
    if p > 1:
        if angle_domain is None:
            alo = np.full(p - 1, 0.3)
            ahi = np.full(p - 1, np.pi - 0.3)
            ahi[-1] = np.pi - 0.3
            alo[-1] = -np.pi + 0.3 if p == 2 else 0.3
        else:
            alo, ahi = (np.asarray(a, float) for a in angle_domain)
        lo, hi = np.concatenate([lo, alo]), np.concatenate([hi, ahi])
    return ImmersionChart(
        n=n + p - 1, m=chart.m, c=1.0, eval=evalf, domain=(lo, hi),
        normal_hint=hint, name=f"tube-{chart.name}", params={"t": t, "base": chart.name},
    )


def tube_differential(lift_or_chart, u, xi, t):
    """Matrix of f_t* on the basis (X_i, -f_* A X_i) and (0, eta_j):
    columns f_*(cos t X - sin t A X) and sin t eta."""
    lift = lift_or_chart if isinstance(lift_or_chart, LegendreLift) else legendre_lift(lift_or_chart)
    dY1, dYend, _, _ = lift.tangent_basis(u, xi)
    return np.cos(t) * dY1[1:-1] + np.sin(t) * dYend[1:-1]


@dataclass
class FocalSample:
    u: list
    xi: list
    singular_values: list
    rank: int
    rank_drop: int
    expected_drop: int

    @property
    def consistent(self):
        return self.rank_drop == self.expected_drop


def focal_detect(chart, t, samples, rank_tol=None, cluster_tol=None):
    """Numerical rank of the tube differential at each (u, xi) sample and the
    drop predicted by the focal criterion: the multiplicity of the cluster
    equal to cot t, plus p - 1 when sin t = 0."""
    lift = legendre_lift(chart)
    if rank_tol is None:
        rank_tol = RANK_TOL_ANALYTIC if chart.has_jet else RANK_TOL_FD
    if cluster_tol is None:
        cluster_tol = chart.default_cluster_tol()
    out = []
    full = chart.n + chart.p - 1
    for u, xi in samples:
        ff = lift.forms(u)
        dY1, dYend, _, _ = lift.tangent_basis(u, xi, ff)
        M = np.cos(t) * dY1[1:-1] + np.sin(t) * dYend[1:-1]
        s = np.linalg.svd(M, compute_uv=False)
        rank = int(np.sum(s > rank_tol))
        sp = ff.spectrum(xi, cluster_tol)
        expected = 0
        if abs(np.sin(t)) > 1e-12:
            cot = np.cos(t) / np.sin(t)
            for val, m in zip(sp.eigenvalues, sp.multiplicities):
                if abs(val - cot) <= max(cluster_tol, 1e-9):
                    expected += m
        else:
            expected = chart.p - 1
        out.append(FocalSample(list(map(float, u)), list(map(float, xi)), [float(x) for x in s],
                               rank, full - rank, expected))
    return out


# ---------------------------------------------------------------------------
# Lie-transformed lifts
# ---------------------------------------------------------------------------

@dataclass
class TransformedSample:
    W1: np.ndarray
    Wend: np.ndarray
    Z1: Optional[np.ndarray]
    Zend: Optional[np.ndarray]
    flagged: bool

    @property
    def point(self):
        """Spherical projection: centre of the point sphere [Z1]."""
        return None if self.Z1 is None else self.Z1[1:-1]

    @property
    def normal(self):
        return None if self.Zend is None else self.Zend[1:-1]


@dataclass(frozen=True)
class TransformedLift:
    lift: LegendreLift
    g: object  # LieTransformation

    @property
    def matrix(self):
        return self.g.matrix

    def at(self, u, xi) -> TransformedSample:
        Y1, Yend = self.lift.pair(u, xi)
        G = self.matrix
        W1, Wend = G @ Y1, G @ Yend
        M = np.array([[W1[0], Wend[0]], [W1[-1], Wend[-1]]])
        if abs(np.linalg.det(M)) <= 1e-12 * max(1.0, np.max(np.abs(M)) ** 2):
            return TransformedSample(W1, Wend, None, None, True)
        a = np.linalg.solve(M, [1.0, 0.0])
        b = np.linalg.solve(M, [0.0, 1.0])
        return TransformedSample(W1, Wend, a[0] * W1 + a[1] * Wend, b[0] * W1 + b[1] * Wend, False)

    def curvature_spheres(self, u, xi):
        """Curvature spheres of the transformed Legendre map via the pencil."""
        ff = self.lift.forms(u)
        Y1, Yend = np.concatenate([[1.0], ff.f, [0.0]]), self.lift.Yend(u, xi, ff)
        dY1, dYend, _, _ = self.lift.tangent_basis(u, xi, ff)
        G = self.matrix
        sig = self.lift.signature
        res = pencil_spheres(G @ Y1, G @ Yend, G @ dY1, G @ dYend)
        samp = self.at(u, xi)
        spheres = []
        for beta, alpha, m, kernel, deg in res:
            K = beta * (G @ Y1) + alpha * (G @ Yend)
            value = INFINITE
            if not samp.flagged:
                # express K in the extracted gauge K = a Z1 + b Zend
                coef, *_ = np.linalg.lstsq(np.column_stack([samp.Z1, samp.Zend]), K, rcond=None)
                if abs(coef[1]) > 1e-10 * max(1.0, abs(coef[0])):
                    value = float(coef[0] / coef[1])
            spheres.append(CurvatureSphere(ProjectivePoint(SignedVector(K, sig)), value, int(m),
                                           kernel, deg, flagged=deg > DEGENERACY_TOL))
        return _sorted_spheres(spheres)


def apply_lie_to_lift(g, lift: LegendreLift) -> TransformedLift:
    if g.d != lift.d:
        raise InvalidInput(f"transformation acts on S^{g.d}, lift lives in S^{lift.d}")
    return TransformedLift(lift, g)


# ---------------------------------------------------------------------------
# reducibility
# ---------------------------------------------------------------------------

@dataclass
class ReducibilityResult:
    rank: int
    singular_values: list
    samples: int
    d: int
    reducible_candidate: bool

    def to_dict(self):
        return {
            "rank": self.rank,
            "samples": self.samples,
            "d": self.d,
            "reducible_candidate": self.reducible_candidate,
            "singular_values": self.singular_values,
        }


def _sobol_box(lo, hi, count, seed):
    m = int(np.ceil(np.log2(max(count, 1))))
    pts = qmc.Sobol(d=lo.size, scramble=True, seed=seed).random_base2(m)[:count]
    return lo + (hi - lo) * pts


def unit_normal_samples(lift, count, seed=0, normals_per_point=None):
    """(u, xi) pairs: Sobol points, and for p >= 2 a few random unit normals each."""
    ch = lift.base
    lo, hi = ch.domain
    rng = np.random.default_rng(seed)
    if lift.p == 1:
        return [(u, np.array([1.0])) for u in _sobol_box(lo, hi, count, seed)]
    k = normals_per_point or 2
    pts = _sobol_box(lo, hi, int(np.ceil(count / k)), seed)
    out = []
    for u in pts:
        for _ in range(k):
            xi = rng.standard_normal(lift.p)
            out.append((u, xi / np.linalg.norm(xi)))
    return out[:count]


def reducibility_rank(lift, sphere_index, samples, rank_tol=None, method="pencil"):
    """Numerical rank of the span of one curvature-sphere family.

    ``samples`` is a list of (u, xi) or an integer count. The lift is a
    reducible candidate iff the rank is at most d + 1.
    """
    if isinstance(samples, (int, np.integer)):
        samples = unit_normal_samples(lift, int(samples))
    d = lift.d
    if len(samples) < d + 3:
        raise InsufficientSamples(f"need at least {d + 3} samples, got {len(samples)}")
    if rank_tol is None:
        rank_tol = RANK_TOL_ANALYTIC if lift.base.has_jet else RANK_TOL_FD
    rows = []
    for u, xi in samples:
        sph = curvature_spheres(lift, u, xi, method=method)
        if sphere_index >= len(sph):
            raise InvalidInput(f"sample has only {len(sph)} curvature spheres")
        v = sph[sphere_index].vector
        rows.append(v / np.linalg.norm(v))
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    rank = int(np.sum(s > rank_tol))
    return ReducibilityResult(rank, [float(x) for x in s], len(rows), d, rank <= d + 1)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

SPHERE_CSV_COLUMNS = ("sample", "u", "xi", "index", "value", "multiplicity", "degeneracy", "representative")


def sphere_sweep_rows(lift, samples, method="pencil"):
    rows = []
    for i, (u, xi) in enumerate(samples):
        for j, s in enumerate(curvature_spheres(lift, u, xi, method=method)):
            v = s.vector / np.linalg.norm(s.vector)
            rows.append({
                "sample": i,
                "u": " ".join(f"{x:.12g}" for x in u),
                "xi": " ".join(f"{x:.12g}" for x in xi),
                "index": j,
                "value": "inf" if s.is_infinite else f"{s.principal_value:.12g}",
                "multiplicity": s.multiplicity,
                "degeneracy": f"{s.degeneracy:.3e}",
                "representative": " ".join(f"{x:.12g}" for x in v),
            })
    return rows


def export_spheres_csv(rows, fh=None):
    """Write sweep rows as CSV; returns the text when ``fh`` is None."""
    buf = fh or io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=SPHERE_CSV_COLUMNS, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue() if fh is None else None
