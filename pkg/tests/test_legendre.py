import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from liedupin.charts import clifford_torus, round_sphere, small_circle, torus_of_revolution, veronese
from liedupin.errors import InsufficientSamples, InvalidInput
from liedupin.immersion import principal_spectrum
from liedupin.legendre import (
    INFINITE,
    SPHERE_CSV_COLUMNS,
    apply_lie_to_lift,
    curvature_spheres,
    export_spheres_csv,
    focal_detect,
    legendre_lift,
    reducibility_rank,
    sphere_sweep_rows,
    tube_chart,
    tube_differential,
    unit_normal_samples,
)
from liedupin.liesphere import mobius_extend, parallel_transformation, random_mobius_lie
from liedupin.minkowski import OrthogonalMap, Signature, inner, rank_one_residual

seeds = st.integers(0, 2**32 - 1)
C = 1 / np.sqrt(3)


def _unit(r, p):
    x = r.standard_normal(p)
    return x / np.linalg.norm(x)


def test_lift_needs_unit_sphere():
    with pytest.raises(InvalidInput):
        legendre_lift(torus_of_revolution())


@given(seeds, st.floats(0, 2 * np.pi))
def test_lift_lines_on_quadric(seed, s):
    r = np.random.default_rng(seed)
    lift = legendre_lift(veronese("R"))
    u, xi = lift.base.sample_points(r, 1)[0], _unit(r, 2)
    Y1, Yend = lift.pair(u, xi)
    v = np.cos(s) * Y1 + np.sin(s) * Yend
    assert abs(inner(v, v, lift.signature.weights)) <= 1e-10
    assert lift.invariant_residual(u, xi) <= 1e-12


def test_umbilical_hypersurface_single_sphere():
    lift = legendre_lift(round_sphere(3, 0.5, c=1.0))
    sph = curvature_spheres(lift, [0.1, 0.2, 0.3], [1.0])
    assert len(sph) == 1 and sph[0].multiplicity == 3
    assert abs(sph[0].principal_value - 1 / np.tan(0.5)) <= 1e-9


def test_clifford_torus_two_spheres():
    sph = curvature_spheres(legendre_lift(clifford_torus()), [0.3, 0.4], [1.0])
    assert [s.multiplicity for s in sph] == [1, 1]
    assert np.allclose([s.principal_value for s in sph], [-1, 1], atol=1e-9)


@pytest.mark.parametrize("alg,m", [("R", 1), ("C", 2)])
def test_veronese_curvature_spheres(alg, m, rng):
    lift = legendre_lift(veronese(alg))
    u, xi = lift.base.sample_points(rng, 1)[0], _unit(rng, lift.p)
    sph = curvature_spheres(lift, u, xi)
    assert [s.multiplicity for s in sph] == [m, m, lift.p - 1]
    assert np.allclose([s.principal_value for s in sph[:2]], [-C, C], atol=1e-9)
    assert sph[2].principal_value is INFINITE
    assert sum(s.multiplicity for s in sph) == lift.base.n + lift.p - 1
    assert all(s.degeneracy <= 1e-6 and not s.flagged for s in sph)


@given(seeds)
def test_pencil_agrees_with_formula(seed):
    r = np.random.default_rng(seed)
    lift = legendre_lift(veronese("C"))
    u, xi = lift.base.sample_points(r, 1)[0], _unit(r, 3)
    a = curvature_spheres(lift, u, xi, method="pencil")
    b = curvature_spheres(lift, u, xi, method="formula")
    for x, y in zip(a, b):
        assert x.multiplicity == y.multiplicity
        assert rank_one_residual(x.vector, y.vector) <= 1e-8


def test_curvature_sphere_count_matches_umbilicity(rng):
    # k clusters + the point-sphere family when p >= 2
    for ch in (veronese("R"), veronese("C"), clifford_torus(), small_circle(0.6)):
        lift = legendre_lift(ch)
        u, xi = ch.sample_points(rng, 1)[0], _unit(rng, ch.p)
        k = principal_spectrum(ch, u, xi).k
        assert len(curvature_spheres(lift, u, xi)) == k + (1 if ch.p >= 2 else 0)


def test_unknown_method():
    with pytest.raises(InvalidInput):
        curvature_spheres(legendre_lift(clifford_torus()), [0.1, 0.1], [1.0], method="magic")


def test_tube_zero_and_pi():
    ch = clifford_torus()
    u = np.array([0.3, 0.2])
    assert np.allclose(tube_chart(ch, 0.0)(u), ch(u))
    assert np.allclose(tube_chart(ch, np.pi)(u), -ch(u))


def test_tube_spectrum_is_cot_shift():
    t = 0.3
    tube = tube_chart(veronese("R"), t)
    assert (tube.n, tube.m) == (3, 4)
    sp = principal_spectrum(tube, [0.1, 0.2, 0.5], [1.0])
    thetas = [np.arctan2(1, k) for k in (C, -C)] + [0.0]
    expected = sorted(1 / np.tan(th - t) for th in thetas)
    assert np.allclose(sp.all_values, expected, atol=1e-5)


def test_tube_differential_matches_finite_differences():
    ch, t = clifford_torus(), 0.4
    u = np.array([0.3, 0.2])
    D = tube_differential(ch, u, [1.0], t)
    lift = legendre_lift(ch)
    E = lift.forms(u).orthonormal_tangent()
    _, Dfd, _ = tube_chart(ch, t).jet_at(u)
    assert np.allclose(D, Dfd @ E, atol=1e-6)


@pytest.mark.parametrize("alg", ["R", "C"])
def test_veronese_focal_drop(alg, rng):
    ch = veronese(alg)
    mult = 1 if alg == "R" else 2
    samples = [(u, _unit(rng, ch.p)) for u in ch.sample_points(rng, 5)]
    focal = focal_detect(ch, np.arctan(np.sqrt(3)), samples)
    assert all(s.rank_drop == mult and s.consistent for s in focal)
    generic = focal_detect(ch, 0.3, samples)
    assert all(s.rank_drop == 0 for s in generic)


def test_hypersphere_collapses_at_centre():
    ch = round_sphere(3, 0.5, c=1.0)
    res = focal_detect(ch, 0.5, [(np.array([0.1, 0.2, 0.3]), np.array([1.0]))])
    assert res[0].rank_drop == 3 and res[0].consistent


def test_point_sphere_focal_at_zero():
    ch = veronese("C")
    res = focal_detect(ch, 0.0, [(ch.center + 0.1, np.array([1.0, 0, 0]))])
    assert res[0].rank_drop == ch.p - 1


def test_identity_transformation_keeps_lift():
    lift = legendre_lift(clifford_torus())
    T = apply_lie_to_lift(parallel_transformation("spherical", 0.0, 3), lift)
    s = T.at([0.2, 0.3], [1.0])
    assert np.allclose(s.point, lift.base([0.2, 0.3]))


@given(st.floats(-1.4, 1.4))
def test_parallel_projection_is_parallel_surface(t):
    lift = legendre_lift(clifford_torus())
    T = apply_lie_to_lift(parallel_transformation("spherical", t, 3), lift)
    u = np.array([0.2, 0.3])
    ff = lift.forms(u)
    s = T.at(u, [1.0])
    assert np.max(np.abs(s.point - (np.cos(t) * ff.f - np.sin(t) * ff.normal_frame[:, 0]))) <= 1e-10


def test_rotation_projection():
    rot = np.eye(5)
    c, s = np.cos(0.7), np.sin(0.7)
    rot[1:3, 1:3] = [[c, -s], [s, c]]
    g = mobius_extend(OrthogonalMap(rot, Signature.mobius(3)))
    lift = legendre_lift(clifford_torus())
    out = apply_lie_to_lift(g, lift).at([0.2, 0.3], [1.0]).point
    assert np.allclose(out, rot[1:, 1:] @ lift.base([0.2, 0.3]))


@given(seeds, st.floats(-3, 3))
def test_gauge_extraction_never_degenerates(seed, t):
    # a line on the quadric always meets {x_1 = 1, x_end = 0} and {x_1 = 0, x_end = 1}
    r = np.random.default_rng(seed)
    lift = legendre_lift(clifford_torus())
    g = random_mobius_lie(3, r) @ parallel_transformation("euclidean", t, 3) @ random_mobius_lie(3, r)
    s = apply_lie_to_lift(g, lift).at(lift.base.sample_points(r, 1)[0], [1.0])
    assert not s.flagged
    assert abs(s.Z1[0] - 1) <= 1e-9 and abs(s.Z1[-1]) <= 1e-9
    assert abs(s.Zend[0]) <= 1e-9 and abs(s.Zend[-1] - 1) <= 1e-9
    assert abs(s.point @ s.point - 1) <= 1e-8


def test_dimension_mismatch():
    with pytest.raises(InvalidInput):
        apply_lie_to_lift(parallel_transformation("spherical", 0.1, 4), legendre_lift(clifford_torus()))


@given(seeds)
def test_lie_invariance_of_curvature_spheres(seed):
    r = np.random.default_rng(seed)
    lift = legendre_lift(veronese("R"))
    g = random_mobius_lie(4, r) @ parallel_transformation("spherical", r.uniform(0.1, 1.0), 4)
    u, xi = lift.base.sample_points(r, 1)[0], _unit(r, 2)
    before = curvature_spheres(lift, u, xi)
    after = apply_lie_to_lift(g, lift).curvature_spheres(u, xi)
    assert len(before) == len(after)
    for s in after:
        assert min(rank_one_residual(s.vector, g.matrix @ b.vector) for b in before) <= 1e-8


def test_reducibility_ranks():
    lift = legendre_lift(veronese("R"))
    for i in range(3):
        res = reducibility_rank(lift, i, 50)
        assert res.rank >= 6 and not res.reducible_candidate
    assert reducibility_rank(legendre_lift(round_sphere(2, 0.5, c=1.0)), 0, 10).rank == 1


def test_circle_point_family_is_reducible():
    lift = legendre_lift(small_circle(0.6))
    res = reducibility_rank(lift, 1, 12)
    assert res.rank == 3 and res.reducible_candidate


def test_reducibility_needs_samples():
    with pytest.raises(InsufficientSamples):
        reducibility_rank(legendre_lift(veronese("R")), 0, 4)


def test_csv_export():
    lift = legendre_lift(veronese("R"))
    rows = sphere_sweep_rows(lift, unit_normal_samples(lift, 3))
    text = export_spheres_csv(rows)
    header = text.splitlines()[0].split(",")
    assert tuple(header) == SPHERE_CSV_COLUMNS
    assert len(text.splitlines()) == 1 + 3 * 3
    assert "inf" in text
    buf = io.StringIO()
    export_spheres_csv(rows, buf)
    assert buf.getvalue() == text
