import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import euclidean
from gcurv.classical import curvature
from gcurv.fields import MetricField, exterior_derivative_3form
from gcurv.flatness import (
    QTensor,
    conformal_factor_residual,
    flatness_report,
    neutral_flat_example,
    orthogonal_pairs,
    q_vs_h2_residual,
    triviality_check,
)
from gcurv.gencurv import geometry_at


def neutral_points(m: int) -> list[list[float]]:
    rng = np.random.default_rng(m)
    return [[u, *rng.uniform(-1, 1, 2 * m - 1)] for u in (0.5, 0.8, 1.0, 1.5, 2.0)]


def origin(m: int) -> list[float]:
    return [1.0] + [0.0] * (2 * m - 1)


# ------------------------------------------------------------- the example
def test_neutral_components():
    amb = neutral_flat_example(2)
    f = amb.fields_at(origin(2))
    assert f.g.value[0, 1] == pytest.approx(0.5)
    assert f.H.value[0, 2, 3] == pytest.approx(1.0)
    G = geometry_at(amb, origin(2))
    np.testing.assert_allclose(G.P0(1), [0, 2 * math.sqrt(3), 0, 0], atol=1e-14)
    np.testing.assert_allclose(G.P0(-1), G.P0(1), atol=1e-14)
    assert G.classical.Rc.value[0, 0] == pytest.approx(-0.5, abs=1e-12)


def test_neutral_epsilon_minus_matches_plus_band():
    G = geometry_at(neutral_flat_example(2, epsilon=-1), origin(2))
    np.testing.assert_allclose(G.P0(1), [0, 2 * math.sqrt(3), 0, 0], atol=1e-13)
    np.testing.assert_allclose(G.P0(-1), -G.P0(1), atol=1e-13)


def test_neutral_domain_and_closedness():
    amb = neutral_flat_example(3)
    assert not amb.chart.contains([0.0] * 6)
    assert amb.chart.contains(origin(3))
    for p in neutral_points(3)[:2]:
        assert np.max(np.abs(exterior_derivative_3form(amb.fields_at(p, 1).H))) < 1e-12


def test_neutral_needs_m_at_least_two():
    with pytest.raises(ValueError):
        neutral_flat_example(1)


def test_sample_point_guard():
    with pytest.raises(ValueError, match="u >"):
        flatness_report(neutral_flat_example(2), [1e-4, 0, 0, 0])


@pytest.mark.parametrize("m", [2, 3])
@pytest.mark.parametrize("epsilon", [1, -1])
def test_neutral_example_is_flat(m, epsilon):
    amb = neutral_flat_example(m, epsilon)
    for p in neutral_points(m):
        report = flatness_report(amb, p)
        for name, value in report.as_dict().items():
            assert value >= 0.0
            assert value < 1e-8, (name, value, p)
        assert report.dilaton_eom < 1e-9
        assert report.div_antisymmetry < 1e-9


@pytest.mark.parametrize("m", [2, 3])
def test_neutral_q_tensor(m):
    amb = neutral_flat_example(m)
    for p in neutral_points(m)[:3]:
        assert q_vs_h2_residual(amb, p) < 1e-8


@pytest.mark.parametrize("sigma", [1, -1])
@pytest.mark.parametrize("m", [2, 3])
def test_neutral_conformal_factor(m, sigma):
    amb = neutral_flat_example(m)
    for p in neutral_points(m)[:3]:
        assert conformal_factor_residual(amb, p, sigma) < 1e-8


@pytest.mark.parametrize("power", [1, -1])
def test_rescaled_metric_is_flat(power):
    """e^{2φ±} g with φ± = ±log(u)/2 has vanishing Riemann tensor."""
    m = 2
    amb = neutral_flat_example(m)
    d = 2 * m
    rows = [["0"] * d for _ in range(d)]
    rows[0][1] = rows[1][0] = "1/(2*u)"
    rows[2][2], rows[3][3] = "1/u", "-1/u"
    scaled = [[f"({e})*u^{power}" if e != "0" else "0" for e in row] for row in rows]
    g = MetricField.from_strings(amb.chart, scaled, (m, m))
    for p in neutral_points(m)[:3]:
        assert np.max(np.abs(curvature(g, p).Rm)) < 1e-10


def test_neutral_triviality_counterexample():
    amb = neutral_flat_example(2)
    report = triviality_check(amb, [1.3, 0.2, -0.4, 0.1])
    assert report.passed(), report.failures()
    assert "H_components" not in report
    assert np.max(np.abs(amb.fields_at([1.3, 0.2, -0.4, 0.1]).H.value)) > 0.1


# --------------------------------------------------------------- non-flat
def test_flat_trivial_all_zero():
    report = flatness_report(euclidean(3), [0.1, 0.2, 0.3])
    assert all(v == 0.0 for v in report.as_dict().values())
    assert conformal_factor_residual(euclidean(3), [0.1, 0.2, 0.3]) == 0.0
    assert triviality_check(euclidean(3), [0.0, 0.0, 0.0]).worst() == 0.0


def test_torus_not_flat():
    amb = euclidean(3, {"x,y,z": "2"})
    report = flatness_report(amb, [0.0, 0.0, 0.0])
    assert report.max_rm > 0.1
    assert report.nabla_h == 0.0


def test_torus_q_residual():
    amb = euclidean(3, {"x,y,z": "2"})
    G = geometry_at(amb, [0.0, 0.0, 0.0])
    expected = max(abs(np.einsum("abcd,a,b,c,d->", G.H2, A, B, A, B)) / 6.0 for A, B in orthogonal_pairs(G.g0))
    assert q_vs_h2_residual(amb, [0.0, 0.0, 0.0]) == pytest.approx(expected)
    assert expected > 0


def test_riemannian_flux_not_trivial():
    report = triviality_check(euclidean(3, {"x,y,z": "1.5"}), [0.0, 0.0, 0.0])
    assert report["h_norm2"] == pytest.approx(6 * 1.5**2)
    assert report["H_components"] == pytest.approx(1.5)
    assert not report.passed()


def test_conformal_sigma_validated():
    with pytest.raises(ValueError):
        conformal_factor_residual(euclidean(3), [0, 0, 0], sigma=0)


# ------------------------------------------------------------- Q-tensor
vectors = st.lists(st.floats(-2, 2), min_size=4, max_size=4).map(np.array)


@given(vectors, vectors, vectors)
@settings(max_examples=50, deadline=None)
def test_q_symmetric(A, B, P):
    g = np.diag([1.0, 2.0, 0.5, 1.5])
    Q = QTensor(g, P)
    assert Q(A, B) == pytest.approx(Q(B, A), abs=1e-9)


@given(vectors, st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_q_vanishes_along_e(A, c):
    g = np.diag([1.0, -1.0, 2.0, 1.0])
    assert QTensor(g, c * A)(A, A) == pytest.approx(0.0, abs=1e-9)


def test_orthogonal_pairs_are_orthogonal():
    g = neutral_flat_example(2).fields_at([0.7, 0, 0, 0]).g.value
    for A, B in orthogonal_pairs(g, seed=3):
        assert abs(A @ g @ B) < 1e-12
