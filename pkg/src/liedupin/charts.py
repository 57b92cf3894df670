"""Built-in charts, conformal deformations, generalized cylinders and
envelopes of sphere families."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .algebras import ALGEBRA_DIMS, mul, conj, hermitian_to_traceless
from .errors import EnvelopeDegenerate, InvalidInput
from .immersion import (
    ImmersionChart,
    compose_jet,
    fundamental_forms,
    linear_jet,
    normal_frame,
    quotient_jet,
)
from .minkowski import Signature, random_orthogonal

VERONESE_NAMES = {"veronese-R": "R", "veronese-C": "C", "veronese-H": "H", "veronese-O": "O"}


# ---------------------------------------------------------------------------
# small analytic building blocks
# ---------------------------------------------------------------------------

def _inv_stereo_jet(x):
    """Jet of x -> ((1 - |x|^2), 2x) / (1 + |x|^2), a chart of the unit sphere."""
    x = np.asarray(x, dtype=float)
    d = x.size
    s2 = float(x @ x)
    A0 = np.concatenate([[1.0 - s2], 2 * x])
    A1 = np.vstack([-2 * x[None, :], 2 * np.eye(d)])
    A2 = np.zeros((d + 1, d, d))
    A2[0] = -2 * np.eye(d)
    b = (1.0 + s2, 2 * x, 2 * np.eye(d))
    return quotient_jet((A0, A1, A2), b)


def _circle_jet(u):
    c, s = np.cos(u), np.sin(u)
    return np.array([c, s]), np.array([[-s], [c]]), np.array([[[-c]], [[-s]]])


def _unit_sphere_jet(x):
    """Angle chart for the circle, stereographic-type chart for higher spheres."""
    return _circle_jet(x[0]) if x.size == 1 else _inv_stereo_jet(x)


def _block_jet(parts, dims):
    """Concatenate jets of functions of disjoint variable blocks."""
    n = sum(dims)
    fs, D1s, D2s = [], [], []
    start = 0
    for (f, D1, D2), d in zip(parts, dims):
        M = f.size
        D1f = np.zeros((M, n))
        D2f = np.zeros((M, n, n))
        D1f[:, start : start + d] = D1
        D2f[:, start : start + d, start : start + d] = D2
        fs.append(f)
        D1s.append(D1f)
        D2s.append(D2f)
        start += d
    return np.concatenate(fs), np.vstack(D1s), np.concatenate(D2s)


def _chart(n, m, c, jet, name, **kw):
    return ImmersionChart(n=n, m=m, c=c, eval=lambda u: jet(u)[0], jet=jet, name=name, **kw)


# ---------------------------------------------------------------------------
# standard embeddings of projective planes
# ---------------------------------------------------------------------------

def _veronese_quadratic(algebra, chart_index):
    """q(u) = traceless coordinates of w w* for w = (1, x, y) placed so that
    the real entry sits at ``chart_index``; q is exactly quadratic in u."""
    a = ALGEBRA_DIMS[algebra]
    order = [chart_index] + [i for i in range(3) if i != chart_index]

    def q(u):
        w = np.zeros((3, a))
        w[order[0], 0] = 1.0
        w[order[1]] = u[:a]
        w[order[2]] = u[a:]
        diag = np.sum(w * w, axis=1)
        off = np.array([mul(w[0], conj(w[1])), mul(w[0], conj(w[2])), mul(w[1], conj(w[2]))])
        return hermitian_to_traceless(diag, off)

    n = 2 * a
    q0 = q(np.zeros(n))
    eye = np.eye(n)
    qp = np.array([q(e) for e in eye])
    qm = np.array([q(-e) for e in eye])
    L = (qp - qm).T / 2  # (M, n)
    Q = np.zeros((q0.size, n, n))
    for i in range(n):
        Q[:, i, i] = (qp[i] + qm[i]) / 2 - q0
    for i in range(n):
        for j in range(i + 1, n):
            val = (q(eye[i] + eye[j]) - q0 - L[:, i] - L[:, j] - Q[:, i, i] - Q[:, j, j]) / 2
            Q[:, i, j] = Q[:, j, i] = val
    return q0, L, Q


def veronese(algebra="R", chart_index=0, radius=1.0):
    """Standard embedding of the projective plane over R, C, H or O into the
    unit sphere of the traceless Hermitian 3x3 matrices.

    Affine chart u = (x, y) in F^2 -> [(1, x, y)]; the point is the traceless
    part of the projector, rescaled to unit length. Jets are exact: the
    projector numerator is quadratic in u and the denominator is 1 + |u|^2.
    """
    if algebra not in ALGEBRA_DIMS:
        raise InvalidInput(f"unknown algebra {algebra!r}")
    if chart_index not in (0, 1, 2):
        raise InvalidInput("chart_index must be 0, 1 or 2")
    a = ALGEBRA_DIMS[algebra]
    n = 2 * a
    q0, L, Q = _veronese_quadratic(algebra, chart_index)
    scale = np.sqrt(1.5)

    def jet(u):
        u = np.asarray(u, dtype=float)
        A0 = scale * (q0 + L @ u + np.einsum("mij,i,j->m", Q, u, u))
        A1 = scale * (L + 2 * np.einsum("mij,j->mi", Q, u))
        A2 = scale * 2 * Q
        return quotient_jet((A0, A1, A2), (1.0 + u @ u, 2 * u, 2 * np.eye(n)))

    return _chart(
        n,
        3 * a + 1,
        1.0,
        jet,
        f"veronese-{algebra}",
        domain=(-radius * np.ones(n), radius * np.ones(n)),
        params={"algebra": algebra, "chart_index": chart_index},
    )


# ---------------------------------------------------------------------------
# spheres, products, tori
# ---------------------------------------------------------------------------

def sphere_product(d1=1, d2=1, c1=2.0, c2=2.0, angle_range=1.0):
    """S^{d1}(1/sqrt c1) x S^{d2}(1/sqrt c2) in the unit sphere S^{d1+d2+1};
    requires 1/c1 + 1/c2 = 1. Normal (r2 p1, -r1 p2) gives curvatures
    -r2/r1 (first factor) and r1/r2 (second factor)."""
    if d1 < 1 or d2 < 1 or c1 <= 0 or c2 <= 0:
        raise InvalidInput("sphere_product needs positive dimensions and curvatures")
    if abs(1.0 / c1 + 1.0 / c2 - 1.0) > 1e-12:
        raise InvalidInput(f"need 1/c1 + 1/c2 = 1, got {1.0 / c1 + 1.0 / c2:.15g}")
    r1, r2 = 1 / np.sqrt(c1), 1 / np.sqrt(c2)

    def jet(u):
        u = np.asarray(u, dtype=float)
        j1 = [r1 * x for x in _unit_sphere_jet(u[:d1])]
        j2 = [r2 * x for x in _unit_sphere_jet(u[d1:])]
        return _block_jet([j1, j2], [d1, d2])

    def hint(u):
        p1 = _unit_sphere_jet(u[:d1])[0]
        p2 = _unit_sphere_jet(u[d1:])[0]
        return np.concatenate([r2 * p1, -r1 * p2])

    n = d1 + d2
    return _chart(
        n,
        n + 1,
        1.0,
        jet,
        "sphere-product",
        domain=(-angle_range * np.ones(n), angle_range * np.ones(n)),
        normal_hint=hint,
        params={"d1": d1, "d2": d2, "c1": c1, "c2": c2},
    )


def clifford_torus():
    """(cos u, sin u, cos v, sin v) / sqrt 2 in S^3."""
    ch = sphere_product(1, 1, 2.0, 2.0, angle_range=np.pi)
    return replace(ch, name="clifford-torus")


def round_sphere(n=2, r=1.0, c=0.0):
    """Round n-sphere with the unit normal pointing to its centre.

    c = 0: radius r in R^{n+1}, A = I / r.
    c = 1: geodesic sphere of spherical radius r about e_0 in S^{n+1}, A = cot(r) I.
    """
    if r <= 0:
        raise InvalidInput("radius must be positive")
    if c == 0:

        def jet(x):
            return tuple(r * a for a in _inv_stereo_jet(np.asarray(x, float)))

        def hint(x):
            return -_inv_stereo_jet(np.asarray(x, float))[0]

        return _chart(n, n + 1, 0.0, jet, "round-sphere", normal_hint=hint, params={"n": n, "r": r, "c": c})
    if c == 1:
        if r >= np.pi:
            raise InvalidInput("spherical radius must lie in (0, pi)")
        cr, sr = np.cos(r), np.sin(r)

        def jet(x):
            s0, s1, s2 = _inv_stereo_jet(np.asarray(x, float))
            return (
                np.concatenate([[cr], sr * s0]),
                np.vstack([np.zeros((1, n)), sr * s1]),
                np.concatenate([np.zeros((1, n, n)), sr * s2]),
            )

        def hint(x):
            return np.concatenate([[1.0], np.zeros(n + 1)])

        return _chart(n, n + 1, 1.0, jet, "hypersphere", normal_hint=hint, params={"n": n, "r": r, "c": c})
    raise InvalidInput("round_sphere supports c = 0 or c = 1")


def flat_plane(n=2, m=3):
    if m <= n:
        raise InvalidInput("flat_plane needs m > n")
    E = np.eye(m)[:, :n]

    def jet(u):
        return E @ np.asarray(u, float), E.copy(), np.zeros((m, n, n))

    return _chart(n, m, 0.0, jet, "flat-plane", params={"n": n, "m": m})


def torus_of_revolution(R=2.0, r=1.0):
    """((R + r cos v) cos u, (R + r cos v) sin u, r sin v); normal toward the
    core circle, so the meridian curvature is +1/r."""
    if not R > r > 0:
        raise InvalidInput("need R > r > 0")

    def jet(w):
        u, v = w
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        rho = R + r * cv
        f = np.array([rho * cu, rho * su, r * sv])
        D = np.array([[-rho * su, -r * sv * cu], [rho * cu, -r * sv * su], [0.0, r * cv]])
        D2 = np.zeros((3, 2, 2))
        D2[:, 0, 0] = [-rho * cu, -rho * su, 0.0]
        D2[:, 0, 1] = D2[:, 1, 0] = [r * sv * su, -r * sv * cu, 0.0]
        D2[:, 1, 1] = [-r * cv * cu, -r * cv * su, -r * sv]
        return f, D, D2

    def hint(w):
        u, v = w
        return -np.array([np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v)])

    return _chart(
        2, 3, 0.0, jet, "torus", domain=(-np.pi * np.ones(2), np.pi * np.ones(2)),
        normal_hint=hint, params={"R": R, "r": r},
    )


def inversion(chart, center, radius=1.0, name=None):
    """Post-compose a Euclidean chart with x -> center + radius^2 (x - center)/|x - center|^2."""
    if chart.c != 0:
        raise InvalidInput("inversion acts on Euclidean charts")
    center = np.asarray(center, dtype=float)
    m = chart.m
    rho2 = radius * radius

    def jet(u):
        f, D, D2 = chart.jet_at(u)
        y = f - center
        inv = quotient_jet((y, np.eye(m), np.zeros((m, m, m))), (y @ y, 2 * y, 2 * np.eye(m)))
        phi = (center + rho2 * inv[0], rho2 * inv[1], rho2 * inv[2])
        return compose_jet(phi, (f, D, D2))

    return replace(
        chart,
        eval=lambda u: jet(u)[0],
        jet=jet,
        normal_hint=None,
        normal_frame_fn=None,
        name=name or f"inverted-{chart.name}",
        params={**chart.params, "inversion_center": center.tolist(), "inversion_radius": radius},
    )


def cyclide(R=2.0, r=1.0, center=(0.5, 0.3, 3.0), radius=2.0):
    """Dupin cyclide: the image of a torus of revolution under an inversion."""
    ch = inversion(torus_of_revolution(R, r), center, radius, name="cyclide")
    return replace(ch, params={**ch.params, "R": R, "r": r})


def ellipsoid_patch(a=3.0, b=2.0, c=1.0, half_width=0.4):
    """Graph chart x = a sqrt(1 - y^2/b^2 - z^2/c^2) of a triaxial ellipsoid
    (a > b > c) centred at the umbilic with y = 0, z > 0.

    The umbilic sits at the domain centre; it is recorded in
    ``params['special_points']`` so sample plans can include it.
    """
    if not a > b > c > 0:
        raise InvalidInput("need a > b > c > 0")
    z_u = c * np.sqrt((b * b - c * c) / (a * a - c * c))
    center = np.array([0.0, z_u])

    def jet(w):
        y, z = w
        h = 1.0 - y * y / (b * b) - z * z / (c * c)
        if h <= 0:
            raise InvalidInput("point outside the ellipsoid patch")
        dh = np.array([-2 * y / (b * b), -2 * z / (c * c)])
        d2h = np.diag([-2 / (b * b), -2 / (c * c)])
        sh = np.sqrt(h)
        x = a * sh
        dx = a * dh / (2 * sh)
        d2x = a * (d2h / (2 * sh) - np.outer(dh, dh) / (4 * h * sh))
        f = np.array([x, y, z])
        D = np.vstack([dx, [1.0, 0.0], [0.0, 1.0]])
        D2 = np.zeros((3, 2, 2))
        D2[0] = d2x
        return f, D, D2

    def hint(w):
        return -np.array([1.0, 0.0, 0.0])

    hw = min(half_width, 0.9 * (c - z_u))
    return _chart(
        2, 3, 0.0, jet, "ellipsoid",
        domain=(center - hw, center + hw),
        normal_hint=hint,
        params={"a": a, "b": b, "c": c, "special_points": [center.tolist()]},
    )


def circle(radius=1.0, m=3):
    """Circle of the given radius in the first coordinate plane of R^m."""

    def jet(u):
        f2, D2_, DD = _circle_jet(float(np.asarray(u).reshape(-1)[0]))
        f = np.zeros(m)
        D = np.zeros((m, 1))
        H = np.zeros((m, 1, 1))
        f[:2], D[:2], H[:2] = radius * f2, radius * D2_, radius * DD
        return f, D, H

    return _chart(1, m, 0.0, jet, "circle", domain=(-np.pi * np.ones(1), np.pi * np.ones(1)),
                  params={"radius": radius})


def small_circle(rho=np.pi / 4, m=3):
    """(cos rho, sin rho cos u, sin rho sin u, 0, ...) in S^m."""

    def jet(u):
        f2, D2_, DD = _circle_jet(float(np.asarray(u).reshape(-1)[0]))
        f = np.zeros(m + 1)
        D = np.zeros((m + 1, 1))
        H = np.zeros((m + 1, 1, 1))
        f[0] = np.cos(rho)
        f[1:3], D[1:3], H[1:3] = np.sin(rho) * f2, np.sin(rho) * D2_, np.sin(rho) * DD
        return f, D, H

    return _chart(1, m, 1.0, jet, "small-circle", domain=(-np.pi * np.ones(1), np.pi * np.ones(1)),
                  params={"rho": rho})


def line(m=3):
    e = np.zeros(m)
    e[0] = 1.0

    def jet(u):
        return e * float(np.asarray(u).reshape(-1)[0]), e[:, None].copy(), np.zeros((m, 1, 1))

    return _chart(1, m, 0.0, jet, "line", params={"m": m})


# ---------------------------------------------------------------------------
# conformal deformation
# ---------------------------------------------------------------------------

def random_mobius(m, rng, spread=0.5):
    """Random element of O(m+1, 1) preserving the future light cone."""
    L = random_orthogonal(Signature.mobius(m), rng, spread=spread).matrix
    return L if L[0, 0] > 0 else -L


def mobius_deform(chart, L=None, seed=7, spread=0.5):
    """Post-compose a unit-sphere chart with the conformal map of S^m induced
    by L in O(m+1, 1): y -> (L (1, y))_rest / (L (1, y))_0."""
    if chart.c != 1:
        raise InvalidInput("mobius_deform acts on charts into the unit sphere")
    m = chart.m
    if L is None:
        L = random_mobius(m, np.random.default_rng(seed), spread)
    L = np.asarray(L, dtype=float)

    def jet(u):
        f, D, D2 = chart.jet_at(u)
        lifted = (np.concatenate([[1.0], f]), np.vstack([np.zeros((1, D.shape[1])), D]),
                  np.concatenate([np.zeros((1,) + D2.shape[1:]), D2]))
        z, dz, d2z = linear_jet(L, lifted)
        return quotient_jet((z[1:], dz[1:], d2z[1:]), (z[0], dz[0], d2z[0]))

    if chart.jet is None:
        base = chart

        def evalf(u):
            z = L @ np.concatenate([[1.0], base(u)])
            return z[1:] / z[0]

        return replace(chart, eval=evalf, normal_hint=None, normal_frame_fn=None,
                       name=f"mobius-{chart.name}", params={**chart.params, "mobius": L.tolist()})
    return replace(
        chart,
        eval=lambda u: jet(u)[0],
        jet=jet,
        normal_hint=None,
        normal_frame_fn=None,
        name=f"mobius-{chart.name}",
        params={**chart.params, "mobius": L.tolist(), "mobius_seed": seed},
    )


# ---------------------------------------------------------------------------
# generalized cylinders
# ---------------------------------------------------------------------------

def _sinhc(x):
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(xs) / xs)


def space_form_exp(c, p, v):
    """Exponential map of Q_c at p applied to the tangent vector v."""
    if c == 0:
        return p + v
    w = np.ones(len(p))
    if c < 0:
        w[0] = -1.0
    nv = np.sqrt(max(float(np.sum(w * v * v)), 0.0))
    a = np.sqrt(abs(c)) * nv
    if c > 0:
        return np.cos(a) * p + np.sinc(a / np.pi) * v
    return np.cosh(a) * p + _sinhc(a) * v


def _holonomy_residual(V, lo, hi, steps=200):
    """Transport coefficients around the boundary of the coordinate square
    spanned by each pair of directions; return the worst mismatch."""
    k = lo.size
    r = V(0.5 * (lo + hi)).shape[1]
    worst = 0.0
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    for i, j in pairs:
        corners = []
        for a, b in [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]:
            x = 0.5 * (lo + hi)
            x[i] = lo[i] + 0.25 * (hi[i] - lo[i]) * (1 + 2 * a)
            x[j] = lo[j] + 0.25 * (hi[j] - lo[j]) * (1 + 2 * b)
            corners.append(x)
        for a0 in np.eye(r):
            a = a0.copy()
            for p0, p1 in zip(corners[:-1], corners[1:]):
                h = 1.0 / steps

                def rhs(tau, a):
                    x = p0 + tau * (p1 - p0)
                    e = 1e-6
                    Vx = V(x)
                    dV = (V(x + e * (p1 - p0)) - V(x - e * (p1 - p0))) / (2 * e)
                    return -(Vx.T @ dV) @ a

                for s in range(steps):
                    tau = s * h
                    k1 = rhs(tau, a)
                    k2 = rhs(tau + h / 2, a + h / 2 * k1)
                    k3 = rhs(tau + h / 2, a + h / 2 * k2)
                    k4 = rhs(tau + h, a + h * k3)
                    a = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            worst = max(worst, float(np.linalg.norm(a - a0)))
    return worst


def _parallel_residual(g, V, points):
    """max |(I - V V^T) P_N dV/du_i|: the part of the normal derivative of V
    leaving span V."""
    worst = 0.0
    w = g.weights
    for u in points:
        f, Df, _ = g.jet_at(u)
        N = normal_frame(g, u, f, Df)
        Vu = V(u)
        for i in range(g.n):
            e = np.zeros(g.n)
            e[i] = 1e-6
            dV = (V(u + e) - V(u - e)) / 2e-6
            dVn = N @ (N.T @ (w[:, None] * dV))
            rest = dVn - Vu @ (Vu.T @ (w[:, None] * dVn))
            worst = max(worst, float(np.max(np.abs(rest))))
    return worst


def generalized_cylinder_chart(g, V, fiber_range=1.0, tol=1e-6):
    """Chart (u, s) -> exp_{g(u)}(V(u) s) for a parallel flat orthonormal
    normal frame V (ambient matrix with r columns).

    ``g`` may be None for a point; then ``V`` is a constant matrix and the
    base point is ``fiber_base`` (the origin). Raises InvalidInput when the
    frame is not parallel or not flat, with the measured residual.
    """
    if g is None:
        V0 = np.asarray(V, dtype=float)
        m, r = V0.shape

        def jet(s):
            s = np.asarray(s, float)
            return V0 @ s, V0.copy(), np.zeros((m, r, r))

        ch = _chart(r, m, 0.0, jet, "affine-subspace",
                    domain=(-fiber_range * np.ones(r), fiber_range * np.ones(r)))
        return replace(ch, params={"parallel_residual": 0.0, "holonomy_residual": 0.0,
                                   "nullity_residual": nullity_residual(ch, 0)})
    Vf = V if callable(V) else (lambda u, V0=np.asarray(V, float): V0)
    k = g.n
    r = Vf(g.center).shape[1]
    lo, hi = g.domain
    rng = np.random.default_rng(0)
    pts = [g.center] + list(g.sample_points(rng, 8))
    par = _parallel_residual(g, Vf, pts)
    hol = _holonomy_residual(Vf, lo, hi) if k >= 2 else 0.0
    if par > tol or hol > tol:
        raise InvalidInput(
            f"normal subbundle is not parallel and flat: parallel residual {par:.3e}, "
            f"holonomy residual {hol:.3e}"
        )

    def evalf(x):
        x = np.asarray(x, float)
        u, s = x[:k], x[k:]
        return space_form_exp(g.c, g(u), Vf(u) @ s)

    ch = ImmersionChart(
        n=k + r, m=g.m, c=g.c, eval=evalf, name=f"cylinder-{g.name}",
        domain=(np.concatenate([lo, -fiber_range * np.ones(r)]),
                np.concatenate([hi, fiber_range * np.ones(r)])),
    )
    nres = nullity_residual(ch, k)
    return replace(ch, params={"parallel_residual": par, "holonomy_residual": hol,
                               "nullity_residual": nres, "base": g.name})


def nullity_residual(chart, k, samples=6, seed=0):
    """max |alpha(d/ds_a, X)| over fibre directions s_a (coordinates k..n-1)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in [chart.center] + list(chart.sample_points(rng, samples)):
        ff = fundamental_forms(chart, u)
        E = ff.orthonormal_tangent()
        # tangent-normalized second form: alpha(e_a, e_b) in coordinate vectors
        for H in ff.second_form:
            worst = max(worst, float(np.max(np.abs(H[k:, :]))) if k < chart.n else 0.0)
        del E
    return worst


# ---------------------------------------------------------------------------
# envelopes of sphere families in Euclidean space
# ---------------------------------------------------------------------------

def hyperspherical(t):
    """Unit vector of S^q from q angles: (cos t1, sin t1 cos t2, ..., sin t1...sin tq)."""
    t = np.asarray(t, dtype=float)
    q = t.size
    out = np.empty(q + 1)
    s = 1.0
    for i in range(q):
        out[i] = s * np.cos(t[i])
        s *= np.sin(t[i])
    out[q] = s
    return out


def _grad_r(g, r_fn, r_grad, u):
    if r_grad is not None:
        return np.asarray(r_grad(u), dtype=float)
    e = 1e-6
    return np.array([(r_fn(u + e * d) - r_fn(u - e * d)) / (2 * e) for d in np.eye(g.n)])


def envelope_chart(g, r, r_grad=None, angle_domain=None, check_points=64):
    """Envelope of the spheres S(g(u), r(u)) in R^{n+1}:
    f = g - r grad r - r sqrt(1 - |grad r|^2) phi with phi sweeping the unit
    sphere of the normal space of g (hyperspherical angles t).

    ``r`` is a callable (or a constant); ``r_grad`` optionally gives dr/du.
    Nonflat ambient spaces are not supported.
    """
    if g.c != 0:
        raise InvalidInput("envelopes are implemented in Euclidean space only")
    r_fn = r if callable(r) else (lambda u, r0=float(r): r0)
    if r_grad is None and not callable(r):
        r_grad = lambda u, k=g.n: np.zeros(k)  # noqa: E731
    k, M = g.n, g.m
    q = M - 1 - k
    if q < 1:
        raise InvalidInput("envelope needs codimension of g at least 2")
    ref = normal_frame(g, g.center)

    def pieces(u):
        gu, Dg, _ = g.jet_at(u)
        G = Dg.T @ Dg
        dr = _grad_r(g, r_fn, r_grad, u)
        grad = Dg @ np.linalg.solve(G, dr)
        N = normal_frame(g, u, gu, Dg, reference=ref)
        return gu, Dg, float(r_fn(u)), dr, grad, N

    def evalf(x):
        x = np.asarray(x, float)
        u, t = x[:k], x[k:]
        gu, _, ru, _, grad, N = pieces(u)
        s2 = 1.0 - grad @ grad
        if s2 <= 0:
            raise EnvelopeDegenerate(f"|grad r| >= 1 at u={u}")
        return gu - ru * grad - ru * np.sqrt(s2) * (N @ hyperspherical(t))

    lo, hi = g.domain
    if angle_domain is None:
        alo = np.full(q, 0.3)
        alo[-1] = -np.pi + 0.3 if q == 1 else 0.3
        ahi = np.full(q, np.pi - 0.3)
        ahi[-1] = np.pi - 0.3
    else:
        alo, ahi = (np.asarray(a, float) for a in angle_domain)
    rng = np.random.default_rng(0)
    for u in [g.center] + list(g.sample_points(rng, check_points)):
        gu, Dg, ru, dr, grad, _ = pieces(u)
        if ru <= 0:
            raise EnvelopeDegenerate(f"radius must be positive, got r={ru} at u={u}")
        if grad @ grad >= 1.0:
            raise EnvelopeDegenerate(f"|grad r| = {np.sqrt(grad @ grad):.6g} >= 1 at u={u}")

    def hint(x):
        x = np.asarray(x, float)
        return g(x[:k]) - evalf(x)

    return ImmersionChart(
        n=M - 1, m=M, c=0.0, eval=evalf, name=f"envelope-{g.name}",
        domain=(np.concatenate([lo, alo]), np.concatenate([hi, ahi])),
        normal_hint=hint,
        params={"k": k, "envelope": {"g": g, "r": r_fn, "r_grad": r_grad, "pieces": pieces}},
    )


def envelope_residuals(chart, grid=5):
    """max |‖f - g‖^2 - r^2| and max |<f - g, dg/du_i> + r dr/du_i| on a grid."""
    env = chart.params.get("envelope")
    if env is None:
        raise InvalidInput("chart was not produced by envelope_chart")
    k = chart.params["k"]
    lo, hi = chart.domain
    axes = [np.linspace(a, b, grid) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, chart.n)
    ra = rb = 0.0
    for x in mesh:
        gu, Dg, ru, dr, _, _ = env["pieces"](x[:k])
        f = chart(x)
        d = f - gu
        ra = max(ra, abs(float(d @ d) - ru * ru))
        rb = max(rb, float(np.max(np.abs(Dg.T @ d + ru * dr))))
    return ra, rb


def builtin_chart(name, **params):
    """Construct a named chart; see ``CHART_NAMES``."""
    if name in VERONESE_NAMES:
        return veronese(VERONESE_NAMES[name], **params)
    factories = {
        "veronese": veronese,
        "sphere-product": sphere_product,
        "clifford-torus": clifford_torus,
        "round-sphere": round_sphere,
        "hypersphere": lambda **p: round_sphere(**{"c": 1.0, **p}),
        "flat-plane": flat_plane,
        "torus": torus_of_revolution,
        "cyclide": cyclide,
        "ellipsoid": ellipsoid_patch,
        "circle": circle,
        "small-circle": small_circle,
        "line": line,
    }
    if name not in factories:
        raise InvalidInput(f"unknown chart {name!r}; known: {', '.join(CHART_NAMES)}")
    try:
        return factories[name](**params)
    except TypeError as exc:
        raise InvalidInput(f"bad parameters for {name}: {exc}") from exc


CHART_NAMES = sorted(list(VERONESE_NAMES) + [
    "sphere-product", "clifford-torus", "round-sphere", "hypersphere", "flat-plane",
    "torus", "cyclide", "ellipsoid", "circle", "small-circle", "line",
])
