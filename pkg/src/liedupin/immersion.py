"""Parametrized immersions into space forms: fundamental forms, shape
operators and principal spectra.

Space form conventions (``c`` is the ambient curvature):

* ``c > 0``: the sphere |x|^2 = 1/c in Euclidean R^{m+1};
* ``c = 0``: Euclidean R^m;
* ``c < 0``: the hyperboloid <x, x> = 1/c in Lorentzian L^{m+1}, weights (-1, +1, ..., +1).

Sign convention: the second fundamental form is the normal part of the
ambient second derivative, so <A_xi X, Y> = <alpha(X, Y), xi> and the
Weingarten formula reads d xi = -f_* A_xi + (normal part). With it a round
sphere has A = +I for the unit normal pointing toward its centre.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import DegenerateChart, InvalidInput

RANK_TOL = 1e-8
UNIT_TOL = 1e-8
CLUSTER_TOL_ANALYTIC = 1e-6
CLUSTER_TOL_FD = 1e-4


# ---------------------------------------------------------------------------
# jets: (f, Df, D2f) with Df of shape (M, n) and D2f of shape (M, n, n)
# ---------------------------------------------------------------------------

def fd_jet(fun, u, h1=1e-5, h2=1e-4, richardson=False):
    """Central-difference jet of ``fun`` at ``u``.

    First derivatives use step ``h1``; second derivatives use nested central
    differences with step ``h2``. With ``richardson`` both are combined with
    their half-step versions as (4 D(h/2) - D(h)) / 3.
    """
    u = np.asarray(u, dtype=float)
    f0 = np.asarray(fun(u), dtype=float)
    if richardson:
        _, D1a, D2a = fd_jet(fun, u, h1, h2)
        _, D1b, D2b = fd_jet(fun, u, h1 / 2, h2 / 2)
        return f0, (4 * D1b - D1a) / 3, (4 * D2b - D2a) / 3
    n = u.size
    M = f0.size
    D1 = np.empty((M, n))
    D2 = np.empty((M, n, n))
    eye = np.eye(n)
    for i in range(n):
        D1[:, i] = (fun(u + h1 * eye[i]) - fun(u - h1 * eye[i])) / (2 * h1)
    for i in range(n):
        for j in range(i, n):
            ei, ej = h2 * eye[i], h2 * eye[j]
            val = (fun(u + ei + ej) - fun(u + ei - ej) - fun(u - ei + ej) + fun(u - ei - ej)) / (
                4 * h2 * h2
            )
            D2[:, i, j] = val
            D2[:, j, i] = val
    return f0, D1, D2


def quotient_jet(A, b):
    """Jet of A / b for a vector jet A and a scalar jet b (both (value, D, D2))."""
    a0, a1, a2 = A
    b0, b1, b2 = b
    F = a0 / b0
    dF = (a1 - np.outer(F, b1)) / b0
    d2F = (
        a2
        - np.einsum("mi,j->mij", dF, b1)
        - np.einsum("mj,i->mij", dF, b1)
        - np.einsum("m,ij->mij", F, b2)
    ) / b0
    return F, dF, d2F


def compose_jet(outer_jet, inner):
    """Chain rule: jet of phi o g from phi's (value, D, D2) at g(u) and g's jet."""
    p0, p1, p2 = outer_jet
    _, g1, g2 = inner
    D = p1 @ g1
    D2 = np.einsum("mab,ai,bj->mij", p2, g1, g1) + np.einsum("ma,aij->mij", p1, g2)
    return p0, D, D2


def linear_jet(L, inner):
    f, D, D2 = inner
    return L @ f, L @ D, np.einsum("ma,aij->mij", L, D2)


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImmersionChart:
    """A parametrized immersion u in a box of R^n -> space form Q^m_c.

    ``jet`` is an optional analytic oracle u -> (f, Df, D2f); without it the
    chart differentiates ``eval`` numerically. ``normal_frame_fn`` may supply
    a smooth orthonormal normal frame, ``normal_hint`` a vector field used to
    orient hypersurface normals.
    """

    n: int
    m: int
    c: float
    eval: Callable[[np.ndarray], np.ndarray]
    jet: Optional[Callable] = None
    domain: tuple = None
    fd_step: float = 1e-5
    fd_step2: float = 1e-4
    richardson: bool = False
    normal_frame_fn: Optional[Callable] = None
    normal_hint: Optional[Callable] = None
    name: str = "chart"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0 or self.m <= self.n:
            raise InvalidInput(f"need 0 <= n < m, got n={self.n}, m={self.m}")
        if self.domain is None:
            lo, hi = -np.ones(self.n), np.ones(self.n)
        else:
            lo, hi = (np.asarray(x, dtype=float).reshape(self.n) for x in self.domain)
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def p(self):
        return self.m - self.n

    @property
    def ambient_dim(self):
        """Dimension of the linear space holding the coordinates."""
        return self.m if self.c == 0 else self.m + 1

    @property
    def weights(self):
        w = np.ones(self.ambient_dim)
        if self.c < 0:
            w[0] = -1.0
        return w

    @property
    def has_jet(self):
        return self.jet is not None

    @property
    def center(self):
        lo, hi = self.domain
        return 0.5 * (lo + hi)

    def default_cluster_tol(self):
        return CLUSTER_TOL_ANALYTIC if self.has_jet else CLUSTER_TOL_FD

    def __call__(self, u):
        return np.asarray(self.eval(np.asarray(u, dtype=float)), dtype=float)

    def jet_at(self, u):
        u = np.asarray(u, dtype=float)
        if self.jet is not None:
            f, D, D2 = self.jet(u)
            return np.asarray(f, float), np.asarray(D, float), np.asarray(D2, float)
        return fd_jet(self, u, self.fd_step, self.fd_step2, self.richardson)

    def with_fd(self, **kw):
        """Same chart with the analytic jet dropped (for cross-checks)."""
        from dataclasses import replace

        return replace(self, jet=None, **kw)

    def sample_points(self, rng, count):
        lo, hi = self.domain
        return lo + (hi - lo) * rng.random((count, self.n))

    def space_form_residual(self, u):
        if self.c == 0:
            return 0.0
        x = self(u)
        return abs(float(np.sum(self.weights * x * x)) - 1.0 / self.c)


# ---------------------------------------------------------------------------
# normal frames
# ---------------------------------------------------------------------------

def normal_projector(f, Df, c, weights):
    """Matrix of the G-orthogonal projection onto the normal space."""
    T = Df if c == 0 else np.hstack([Df, f[:, None]])
    WT = weights[:, None] * T
    K = T.T @ WT
    return np.eye(len(weights)) - T @ np.linalg.solve(K, WT.T)


def _g_gram_schmidt(vectors, weights):
    out = []
    for v in vectors:
        for b in out:
            v = v - np.sum(weights * v * b) * b
        q = np.sum(weights * v * v)
        if q <= 1e-20:
            return None
        out.append(v / np.sqrt(q))
    return np.column_stack(out) if out else np.zeros((len(weights), 0))


def normal_frame(chart, u, f=None, Df=None, reference=None):
    """Orthonormal basis (columns) of the normal space at ``u``.

    Priority: the chart's own ``normal_frame_fn``; else the projection of the
    ``reference`` frame (smooth near the point where the reference was
    taken); else the deterministic pivoted Gram-Schmidt seeded by the
    ambient coordinate basis. Hypersurface frames are oriented by
    ``normal_hint`` when the chart has one.
    """
    if f is None or Df is None:
        f, Df, _ = chart.jet_at(u)
    w = chart.weights
    p = chart.p
    if chart.normal_frame_fn is not None:
        N = np.asarray(chart.normal_frame_fn(np.asarray(u, float)), dtype=float).reshape(-1, p)
    else:
        P = normal_projector(f, Df, chart.c, w)
        N = None
        if reference is not None:
            N = _g_gram_schmidt(list((P @ np.asarray(reference)).T), w)
        if N is None:
            cand = P.copy()  # columns: projected ambient basis vectors
            chosen = []
            for _ in range(p):
                q = np.sum(w[:, None] * cand * cand, axis=0)
                j = int(np.argmax(q))
                if q[j] <= 1e-20:
                    raise DegenerateChart("normal space collapsed", point=np.asarray(u))
                b = cand[:, j] / np.sqrt(q[j])
                chosen.append(b)
                cand = cand - np.outer(b, (w * b) @ cand)
            N = np.column_stack(chosen)
    if p == 1 and chart.normal_frame_fn is None:
        if chart.normal_hint is not None:
            hint = np.asarray(chart.normal_hint(np.asarray(u, float)), dtype=float)
            flip = np.sum(w * hint * N[:, 0]) < 0
        else:
            # det[f?, Df, xi] never vanishes, so its sign is a continuous orientation
            cols = [Df, N] if chart.c == 0 else [f[:, None], Df, N]
            flip = np.linalg.det(np.hstack(cols)) < 0
        if flip:
            N = -N
    return N


# ---------------------------------------------------------------------------
# fundamental forms, shape operators and spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeSpectrum:
    eigenvalues: np.ndarray  # distinct cluster values, ascending
    multiplicities: tuple
    eigenbasis: np.ndarray  # metric-orthonormal columns grouped by cluster
    cluster_tol: float
    all_values: np.ndarray

    @property
    def k(self):
        return len(self.multiplicities)

    def cluster_slices(self):
        out, start = [], 0
        for m in self.multiplicities:
            out.append(slice(start, start + m))
            start += m
        return out

    def basis_of(self, i):
        return self.eigenbasis[:, self.cluster_slices()[i]]

    def nearest_cluster(self, value):
        return int(np.argmin(np.abs(self.eigenvalues - value)))

    def min_gap(self):
        if self.k < 2:
            return np.inf
        return float(np.min(np.diff(self.eigenvalues)))


def cluster_values(values, cluster_tol):
    """Group sorted values by single linkage at ``cluster_tol``."""
    values = np.sort(np.asarray(values, dtype=float))
    groups = [[values[0]]] if values.size else []
    for v in values[1:]:
        if v - groups[-1][-1] <= cluster_tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return np.array([np.mean(g) for g in groups]), tuple(len(g) for g in groups)


@dataclass(frozen=True)
class FundamentalForms:
    u: np.ndarray
    f: np.ndarray
    Df: np.ndarray
    D2f: np.ndarray
    metric: np.ndarray
    normal_frame: np.ndarray
    second_form: np.ndarray  # (p, n, n)
    mean_curvature: np.ndarray  # (p,)
    weights: np.ndarray
    c: float

    @property
    def n(self):
        return self.metric.shape[0]

    @property
    def p(self):
        return self.normal_frame.shape[1]

    def normal_vector(self, xi):
        return self.normal_frame @ np.asarray(xi, dtype=float)

    def normal_coords(self, vec):
        """Frame coordinates of an ambient normal vector."""
        return self.normal_frame.T @ (self.weights * vec)

    def shape_matrix(self, xi):
        """Symmetric matrix S_xi with S_ij = <alpha(d_i, d_j), xi>."""
        S = np.tensordot(np.asarray(xi, dtype=float), self.second_form, axes=1)
        return 0.5 * (S + S.T)

    def shape_operator(self, xi, check_unit=True):
        xi = np.asarray(xi, dtype=float)
        if check_unit and abs(1.0 - np.linalg.norm(xi)) > UNIT_TOL:
            raise InvalidInput(f"normal is not unit: |xi| = {np.linalg.norm(xi):.12g}")
        return np.linalg.solve(self.metric, self.shape_matrix(xi))

    def spectrum(self, xi, cluster_tol):
        xi = np.asarray(xi, dtype=float)
        if abs(1.0 - np.linalg.norm(xi)) > UNIT_TOL:
            raise InvalidInput(f"normal is not unit: |xi| = {np.linalg.norm(xi):.12g}")
        vals, vecs = scipy.linalg.eigh(self.shape_matrix(xi), self.metric)
        ev, mult = cluster_values(vals, cluster_tol)
        return ShapeSpectrum(ev, mult, vecs, cluster_tol, vals)

    def orthonormal_tangent(self):
        """Columns E (coordinate vectors) with E^T g E = I."""
        L = np.linalg.cholesky(self.metric)
        return np.linalg.inv(L).T

    def shape_matrices_orthonormal(self):
        E = self.orthonormal_tangent()
        return np.array([E.T @ (0.5 * (H + H.T)) @ E for H in self.second_form])


def fundamental_forms(chart: ImmersionChart, u, reference=None) -> FundamentalForms:
    u = np.asarray(u, dtype=float)
    f, Df, D2f = chart.jet_at(u)
    w = chart.weights
    if chart.n:
        smin = np.linalg.svd(Df, compute_uv=False)[-1]
        if smin <= RANK_TOL:
            raise DegenerateChart(
                f"differential is rank deficient at u={u} (sigma_min={smin:.3e})",
                point=u,
                sigma_min=smin,
            )
    metric = Df.T @ (w[:, None] * Df)
    metric = 0.5 * (metric + metric.T)
    N = normal_frame(chart, u, f, Df, reference=reference)
    second = np.einsum("mij,ma->aij", D2f, w[:, None] * N)
    second = 0.5 * (second + np.swapaxes(second, 1, 2))
    if chart.n:
        ginv = np.linalg.inv(metric)
        H = np.einsum("ij,aji->a", ginv, second) / chart.n
    else:
        H = np.zeros(N.shape[1])
    return FundamentalForms(u, f, Df, D2f, metric, N, second, H, w, chart.c)


def shape_operator(chart, u, xi, reference=None):
    return fundamental_forms(chart, u, reference).shape_operator(xi)


def principal_spectrum(chart, u, xi, cluster_tol=None, reference=None) -> ShapeSpectrum:
    if cluster_tol is None:
        cluster_tol = chart.default_cluster_tol()
    return fundamental_forms(chart, u, reference).spectrum(xi, cluster_tol)


def normal_curvature_norm(chart, u) -> float:
    """Frobenius norm of the normal curvature tensor at ``u``.

    Uses the Ricci equation <R^perp(X, Y) xi_a, xi_b> = <[A_a, A_b] X, Y> over
    orthonormal tangent and normal frames, summed over all ordered pairs.
    """
    ff = fundamental_forms(chart, u)
    A = ff.shape_matrices_orthonormal()
    total = 0.0
    for a in range(len(A)):
        for b in range(len(A)):
            C = A[a] @ A[b] - A[b] @ A[a]
            total += float(np.sum(C * C))
    return float(np.sqrt(total))


def gaussian_curvature(chart, u, h=1e-4):
    """Intrinsic curvature of a surface chart from its metric (Brioschi formula).

    Metric coefficients come from the chart's first derivatives; their own
    derivatives are taken by central differences with step ``h``.
    """
    if chart.n != 2:
        raise InvalidInput("gaussian_curvature needs a surface chart")
    w = chart.weights
    u = np.asarray(u, dtype=float)

    def g(x):
        _, D, _ = chart.jet_at(x)
        G = D.T @ (w[:, None] * D)
        return np.array([G[0, 0], G[0, 1], G[1, 1]])

    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    g0 = g(u)
    gu = (g(u + e1) - g(u - e1)) / (2 * h)
    gv = (g(u + e2) - g(u - e2)) / (2 * h)
    guu = (g(u + e1) - 2 * g0 + g(u - e1)) / h**2
    gvv = (g(u + e2) - 2 * g0 + g(u - e2)) / h**2
    guv = (g(u + e1 + e2) - g(u + e1 - e2) - g(u - e1 + e2) + g(u - e1 - e2)) / (4 * h * h)
    E, F, G = g0
    Eu, Fu, Gu = gu
    Ev, Fv, Gv = gv
    Evv = gvv[0]
    Guu = guu[2]
    Fuv = guv[1]
    M1 = np.array(
        [
            [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
            [Fv - 0.5 * Gu, E, F],
            [0.5 * Gv, F, G],
        ]
    )
    M2 = np.array([[0.0, 0.5 * Ev, 0.5 * Gu], [0.5 * Ev, E, F], [0.5 * Gu, F, G]])
    return float((np.linalg.det(M1) - np.linalg.det(M2)) / (E * G - F * F) ** 2)
