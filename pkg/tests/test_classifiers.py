import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from liedupin.charts import (
    clifford_torus,
    cyclide,
    ellipsoid_patch,
    mobius_deform,
    round_sphere,
    torus_of_revolution,
    veronese,
)
from liedupin.classifiers import (
    SamplePlan,
    antipodal_symmetry_check,
    classify,
    cpc_check,
    dupin_check,
    make_plan,
    nesting_consistent,
    sphere_covering,
    tri_state,
    umbilicity_class,
    unipotent_check,
)
from liedupin.errors import InvalidInput, NotApplicable


@given(st.integers(2, 9), st.integers(1, 50), st.integers(0, 100))
def test_sphere_covering(p, count, seed):
    cov = sphere_covering(p, count, seed)
    assert len(cov) >= 2 * p * p
    assert np.allclose(np.linalg.norm(cov, axis=1), 1)
    assert np.allclose(cov[0::2], -cov[1::2])


def test_sphere_covering_codim_one():
    assert np.array_equal(sphere_covering(1, 10), [[1.0]])


@pytest.mark.parametrize("res,state", [(1e-7, "pass"), (1e-6, "pass"), (5e-6, "inconclusive"),
                                       (1e-4, "fail"), (float("nan"), "fail"), (None, "fail")])
def test_tri_state(res, state):
    assert tri_state(res, 1e-6) == state


def test_plan_validation():
    with pytest.raises(InvalidInput):
        SamplePlan(points=np.zeros((0, 2)), normals=())
    with pytest.raises(InvalidInput):
        SamplePlan(points=np.zeros((1, 2)), normals=(np.array([[2.0, 0.0]]),))
    with pytest.raises(InvalidInput):
        SamplePlan(points=np.zeros((1, 2)), normals=(np.array([[1.0, 0.0]]),), tol=-1)


def test_plan_is_deterministic():
    a = make_plan(veronese("R"), seed=4)
    b = make_plan(veronese("R"), seed=4)
    assert np.array_equal(a.points, b.points)
    assert a.echo() == b.echo()


def test_plan_includes_special_points():
    ch = ellipsoid_patch()
    plan = make_plan(ch, points=4)
    assert np.allclose(plan.points[0], ch.params["special_points"][0])


def test_round_sphere_is_one_umbilical():
    rep = umbilicity_class(round_sphere(2, 1.5), make_plan(round_sphere(2, 1.5), points=8))
    assert rep.k_observed == 1


def test_ellipsoid_varies():
    ch = ellipsoid_patch()
    rep = classify(ch, make_plan(ch, points=8))
    assert rep.k_observed == "varies"
    assert not rep.passed("k-umbilical")
    assert rep.verdicts["Dupin"].state == "fail"


def test_ellipsoid_without_umbilic_is_not_dupin():
    ch = replace(ellipsoid_patch(), params={})
    plan = make_plan(ch, points=np.array([[0.25, 0.25], [-0.3, 0.2]]), curve_length=0.15)
    assert dupin_check(ch, plan).verdicts["Dupin"].state == "fail"


def test_clifford_torus_passes_everything():
    ch = clifford_torus()
    rep = classify(ch, make_plan(ch, points=6))
    for name in ("k-umbilical", "unipotent", "CPC", "Dupin"):
        assert rep.passed(name), name
    assert rep.k_observed == 2
    assert nesting_consistent(rep)


@pytest.mark.parametrize("chart", [torus_of_revolution(), cyclide()], ids=["torus", "cyclide"])
def test_dupin_but_not_isoparametric(chart):
    rep = classify(chart, make_plan(chart, points=6))
    assert rep.passed("Dupin")
    assert not rep.passed("unipotent")
    assert not rep.passed("CPC")
    assert nesting_consistent(rep)


def test_veronese_r_report():
    ch = veronese("R")
    rep = classify(ch, make_plan(ch, points=6, curve_count=2))
    assert all(v.passed for v in rep.verdicts.values())
    assert np.allclose(rep.extras["cluster_values"], [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-9)
    d = rep.to_dict()
    assert d["schema_version"] == "1.0"
    json.dumps(d)


def test_shared_curvature_on_veronese():
    ch = veronese("R")
    rep = unipotent_check(ch, make_plan(ch, points=4))
    sc = rep.extras["shared_curvature"]
    assert sc["applies"] and sc["residual"] <= 1e-9


def test_deformed_veronese_cpc_fails():
    ch = mobius_deform(veronese("R"), seed=7)
    rep = cpc_check(ch, make_plan(ch, points=4, curve_count=2))
    assert rep.verdicts["CPC"].state == "fail"
    assert rep.verdicts["CPC"].witness is not None


def test_antipodal_needs_codim_two():
    with pytest.raises(NotApplicable):
        antipodal_symmetry_check(clifford_torus(), make_plan(clifford_torus(), points=2))


def test_antipodal_on_veronese_c():
    ch = veronese("C")
    res = antipodal_symmetry_check(ch, make_plan(ch, points=3))
    assert res.residual <= 1e-9 and res.multiplicities_equal and res.n_even
