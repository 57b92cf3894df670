import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from liedupin.errors import InvalidInput, InvalidMap
from liedupin.liesphere import (
    LieTransformation,
    OrientedSphere,
    cecil_chern_decompose,
    contact_value,
    geometric_contact,
    inverse_similarity,
    inverse_stereographic,
    mobius_extend,
    oriented_contact,
    parallel_transformation,
    quadric_to_sphere,
    random_mobius_lie,
    similarity,
    sphere_to_quadric,
    sphere_vector,
    stereographic,
)
from liedupin.minkowski import OrthogonalMap, Signature, inner, projective_equal

seeds = st.integers(0, 2**32 - 1)
KINDS = ("spherical", "euclidean", "hyperbolic")


def _unit(r, n):
    x = r.standard_normal(n)
    return x / np.linalg.norm(x)


@given(seeds, st.floats(-10, 10))
def test_sphere_vectors_are_null(seed, r):
    s = OrientedSphere(_unit(np.random.default_rng(seed), 4), r)
    v = sphere_vector(s)
    assert abs(inner(v, v, Signature.lie(3).weights)) <= 1e-14


@given(seeds, st.floats(0, 6.2))
def test_quadric_round_trip(seed, r):
    s = OrientedSphere(_unit(np.random.default_rng(seed), 4), r)
    back = quadric_to_sphere(sphere_to_quadric(s))
    assert np.allclose(back.center, s.center) and abs(back.signed_radius - r) <= 1e-12


def test_orientation_identification():
    x = np.array([0.0, 0.6, 0.8])
    a = sphere_to_quadric(OrientedSphere(x, 0.4))
    b = sphere_to_quadric(OrientedSphere(-x, 0.4 + np.pi))
    assert projective_equal(a, b)


def test_sphere_validation():
    with pytest.raises(InvalidInput):
        OrientedSphere([1.0, 1.0], 0.2)
    with pytest.raises(InvalidInput):
        quadric_to_sphere(np.array([1.0, 1.0, 1.0, 0.0]))


def test_point_sphere_in_contact_with_spheres_through_it():
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([np.cos(0.5), np.sin(0.5), 0.0])
    assert oriented_contact(OrientedSphere(x, 0.0), OrientedSphere(y, 0.5))
    assert not oriented_contact(OrientedSphere(x, 0.0), OrientedSphere(y, 0.4))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [2, 3, 7])
def test_parallel_is_orthogonal_and_additive(kind, d):
    a = parallel_transformation(kind, 0.3, d).matrix
    b = parallel_transformation(kind, 0.5, d).matrix
    c = parallel_transformation(kind, 0.8, d).matrix
    assert np.allclose(a @ b, c, atol=1e-14)
    assert np.allclose(parallel_transformation(kind, 0.0, d).matrix, np.eye(d + 3))


def test_euclidean_parallel_matrix():
    t = 0.7
    P = parallel_transformation("euclidean", t, 2).matrix
    expected = np.array([
        [1 - t * t / 2, -t * t / 2, 0, 0, -t],
        [t * t / 2, 1 + t * t / 2, 0, 0, t],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 1, 0],
        [t, t, 0, 0, 1],
    ])
    assert np.allclose(P, expected)


def test_unknown_parallel_kind():
    with pytest.raises(InvalidInput):
        parallel_transformation("elliptic", 0.1, 3)


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_parallel_adds_to_radius(seed, r, t):
    x = _unit(np.random.default_rng(seed), 4)
    P = parallel_transformation("spherical", t, 3)
    out = P.apply_vector(sphere_vector(OrientedSphere(x, r)))
    assert np.allclose(out, sphere_vector(OrientedSphere(x, r + t)), atol=1e-12)


@given(seeds)
def test_lie_maps_preserve_contact(seed):
    r = np.random.default_rng(seed)
    g = random_mobius_lie(3, r) @ parallel_transformation("spherical", r.uniform(-2, 2), 3)
    x1, r1 = _unit(r, 4), r.uniform(0, 3)
    x2 = _unit(r, 4)
    dist = np.arccos(np.clip(x1 @ x2, -1, 1))
    k1 = sphere_vector(OrientedSphere(x1, r1))
    k2 = sphere_vector(OrientedSphere(x2, r1 - dist))
    assert abs(contact_value(k1, k2)) <= 1e-12
    assert abs(contact_value(g.apply_vector(k1), g.apply_vector(k2))) <= 1e-9


def test_mobius_fixes_last_axis():
    g = random_mobius_lie(3, np.random.default_rng(0))
    assert g.is_mobius()
    assert not parallel_transformation("spherical", 0.3, 3).is_mobius()


def test_serialization_round_trip():
    g = random_mobius_lie(3, np.random.default_rng(1)) @ parallel_transformation("hyperbolic", 0.4, 3)
    h = LieTransformation.from_json(g.to_json())
    assert np.array_equal(g.matrix, h.matrix)
    nested = json.loads(g.to_json())
    nested["matrix"] = g.matrix.tolist()
    assert np.array_equal(LieTransformation.from_dict(nested).matrix, g.matrix)


def test_serialization_errors():
    with pytest.raises(InvalidInput):
        LieTransformation.from_dict({"matrix": [1.0, 2.0, 3.0]})
    with pytest.raises(InvalidInput):
        LieTransformation.from_dict({"signature": "Lie(4)", "matrix": np.eye(6).tolist()})
    bad = np.eye(6)
    bad[0, 1] = 0.2
    with pytest.raises(InvalidMap):
        LieTransformation.from_matrix(bad)


@pytest.mark.parametrize("kind", KINDS)
def test_decompose_parallel(kind):
    dec = cecil_chern_decompose(parallel_transformation(kind, 0.3, 3))
    assert dec.kind == kind and abs(dec.t - 0.3) <= 1e-10
    assert dec.residual <= 1e-10


def test_decompose_mobius_has_zero_t():
    dec = cecil_chern_decompose(random_mobius_lie(4, np.random.default_rng(3)))
    assert dec.t == 0.0 and dec.residual <= 1e-10


@given(seeds, st.sampled_from(KINDS), st.sampled_from([3, 5, 7]))
def test_decompose_reconstructs(seed, kind, d):
    r = np.random.default_rng(seed)
    g = random_mobius_lie(d, r) @ parallel_transformation(kind, r.uniform(0.05, 2.0), d) @ random_mobius_lie(d, r)
    dec = cecil_chern_decompose(g)
    assert np.max(np.abs(dec.product() - g.matrix)) <= 1e-8
    assert dec.phi1.is_mobius() and dec.phi2.is_mobius()


@given(seeds)
def test_stereographic_round_trips(seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal(3)
    z = stereographic(x)
    assert abs(z @ z - 1) <= 1e-12
    assert np.allclose(inverse_stereographic(z), x)
    c = -r.uniform(0.2, 3)
    y = r.standard_normal(3)
    h = np.concatenate([[np.sqrt(y @ y - 1 / c)], y])
    assert np.allclose(inverse_stereographic(stereographic(h, "hyperbolic", c), "hyperbolic", c), h)


def test_similarity():
    y = similarity(4.0, np.array([0.5, 0.0]))
    assert np.allclose(y, [1, 0]) and np.allclose(inverse_similarity(4.0, y), [0.5, 0])
    with pytest.raises(InvalidInput):
        similarity(-1.0, np.array([1.0, 0.0]))


def test_geometric_contact_wraps_radius():
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([np.cos(0.5), np.sin(0.5), 0.0])
    assert geometric_contact(OrientedSphere(x, 0.2 + 2 * np.pi), OrientedSphere(y, 0.7))
    assert geometric_contact(OrientedSphere(x, 0.7), OrientedSphere(y, 0.2))


def test_mobius_extend_sign():
    L = OrthogonalMap(np.eye(5), Signature.mobius(3))
    assert np.array_equal(mobius_extend(L, -1).matrix[-1, -1:], [-1.0])
