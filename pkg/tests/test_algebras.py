import numpy as np
import pytest
from hypothesis import given, strategies as st

from liedupin.algebras import (
    AlgebraElement,
    hermitian_projector,
    hermitian_to_traceless,
    in_affine_chart,
    mul,
    multiply,
    norm,
)
from liedupin.errors import ContractViolation, InvalidInput, UnsupportedChart

seeds = st.integers(0, 2**32 - 1)
DIMS = {"R": 1, "C": 2, "H": 4, "O": 8}


def test_complex_matches_builtin():
    a, b = 1.5 - 2j, -0.25 + 3j
    z = mul([a.real, a.imag], [b.real, b.imag])
    assert np.allclose(z, [(a * b).real, (a * b).imag])


def test_quaternion_units():
    i, j, k = np.eye(4)[1:]
    assert np.allclose(np.abs(mul(i, j)), np.abs(k))
    assert np.allclose(mul(i, i), [-1, 0, 0, 0])
    assert np.allclose(mul(i, j), -mul(j, i))


@given(seeds, st.sampled_from("RCHO"))
def test_norm_multiplicative(seed, alg):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal((2, DIMS[alg]))
    assert np.isclose(np.linalg.norm(mul(x, y)), np.linalg.norm(x) * np.linalg.norm(y))


@given(seeds)
def test_octonions_alternative_not_associative(seed):
    r = np.random.default_rng(seed)
    x, y, z = r.standard_normal((3, 8))
    assert np.allclose(mul(mul(x, x), y), mul(x, mul(x, y)), atol=1e-10)
    assert np.allclose(mul(mul(y, x), x), mul(y, mul(x, x)), atol=1e-10)
    assert not np.allclose(mul(mul(x, y), z), mul(x, mul(y, z)), atol=1e-6)


@given(seeds)
def test_quaternions_associative(seed):
    x, y, z = np.random.default_rng(seed).standard_normal((3, 4))
    assert np.allclose(mul(mul(x, y), z), mul(x, mul(y, z)))


@given(seeds, st.sampled_from("CHO"))
def test_conjugation_reverses_products(seed, alg):
    r = np.random.default_rng(seed)
    a = AlgebraElement(alg, r.standard_normal(DIMS[alg]))
    b = AlgebraElement(alg, r.standard_normal(DIMS[alg]))
    assert np.allclose((a * b).conj().coords, (b.conj() * a.conj()).coords)
    assert np.isclose((a * a.conj()).real, norm(a) ** 2)


def test_element_validation():
    with pytest.raises(InvalidInput):
        AlgebraElement("H", [1, 2, 3])
    with pytest.raises(InvalidInput):
        AlgebraElement("S", [1])
    with pytest.raises(ContractViolation):
        multiply(AlgebraElement("C", [1, 0]), AlgebraElement("H", [1, 0, 0, 0]))


def _unit_affine(r, alg):
    v = r.standard_normal((3, DIMS[alg]))
    v[0, 1:] = 0.0
    v[0, 0] = abs(v[0, 0]) + 0.1
    return v / np.sqrt(np.sum(v * v))


@given(seeds, st.sampled_from("RCHO"))
def test_projector_is_idempotent_rank_one(seed, alg):
    M = hermitian_projector(_unit_affine(np.random.default_rng(seed), alg), alg)
    assert np.isclose(M.trace, 1.0)
    assert M.jordan_square_residual() <= 1e-12
    # traceless part has squared norm tr(M^2) - tr(M)^2 / 3 = 2/3
    assert np.isclose(np.sum(M.traceless_coords() ** 2), 2.0 / 3.0)


def test_traceless_coords_are_isometric():
    d = np.array([0.5, 0.3, -0.8])
    o = np.zeros((3, 1))
    o[0, 0] = 0.4
    t = hermitian_to_traceless(d, o)
    full = np.array([[0.5, 0.4, 0], [0.4, 0.3, 0], [0, 0, -0.8]])
    tl = full - np.trace(full) / 3 * np.eye(3)
    assert np.isclose(t @ t, np.trace(tl @ tl))


def test_projector_input_errors():
    with pytest.raises(InvalidInput):
        hermitian_projector(np.ones((3, 1)), "R")
    v = np.zeros((3, 8))
    v[:, 1] = 1 / np.sqrt(3)
    assert not in_affine_chart(v)
    with pytest.raises(UnsupportedChart):
        hermitian_projector(v, "O")
