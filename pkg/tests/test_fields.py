import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import euclidean, random_ambient, sample_point
from gcurv.fields import (
    Chart,
    DilatonField,
    MetricError,
    MetricField,
    ThreeFormField,
    dilaton_split,
    h_contractions,
    metric_at,
    sigma_pairing,
)
from gcurv.flatness import neutral_flat_example


def test_euclidean_metric_at():
    g, ginv, dg, d2g = metric_at(euclidean(3).g, [0.3, -1.0, 2.0])
    np.testing.assert_array_equal(g, np.eye(3))
    np.testing.assert_array_equal(ginv, np.eye(3))
    assert not dg.any() and not d2g.any()


def test_example_metric_components():
    g, ginv, _, _ = metric_at(neutral_flat_example(2).g, [1.0, 0.0, 0.0, 0.0])
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = 0.5
    expected[2, 2], expected[3, 3] = 1.0, -1.0
    np.testing.assert_array_equal(g, expected)
    np.testing.assert_allclose(ginv @ g, np.eye(4), atol=1e-12)


def test_degenerate_metric_reports_determinant():
    chart = Chart("c", ("u", "v"))
    g = MetricField.from_strings(chart, [["u", "0"], ["0", "1"]], (2, 0))
    with pytest.raises(MetricError, match="det g"):
        metric_at(g, [0.0, 0.0])


def test_signature_mismatch():
    chart = Chart("c", ("u", "v"))
    g = MetricField.from_strings(chart, [["-1", "0"], ["0", "1"]], (2, 0))
    with pytest.raises(MetricError, match="signature"):
        metric_at(g, [0.0, 0.0])


def test_chart_rejects_duplicate_coordinates():
    with pytest.raises(ValueError):
        Chart("c", ("u", "u"))


def test_chart_domain():
    chart = Chart("c", ("u", "v"), {"u": (0.0, np.inf)})
    assert chart.contains([1.0, -5.0])
    assert not chart.contains([0.0, 1.0])


def test_three_form_antisymmetry():
    chart = Chart("c", ("x", "y", "z"))
    H = ThreeFormField.from_strings(chart, {"x,y,z": "2*x"})
    val = H.evaluate([1.5, 0.0, 0.0]).value
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        assert val[perm] == pytest.approx(3.0 * sign)


def test_zero_three_form():
    c = h_contractions(euclidean(3), [0.1, 0.2, 0.3])
    assert c.normH2 == 0.0
    assert not np.any(c.Hsq) and not np.any(c.H2form)


@pytest.mark.parametrize("c", [1.0, 2.0, -0.7])
def test_constant_three_form_contractions(c):
    out = h_contractions(euclidean(3, {"x,y,z": repr(c)}), [0.0, 0.0, 0.0])
    brute = sum(out.H[i, j, k] ** 2 for i, j, k in itertools.product(range(3), repeat=3))
    assert out.normH2 == pytest.approx(6 * c**2)
    assert out.normH2 == pytest.approx(brute)
    np.testing.assert_allclose(out.Hsq, 2 * c**2 * np.eye(3))


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
@settings(max_examples=15, deadline=None)
def test_h_squared_two_ways(seed, d):
    amb = random_ambient(seed, d)
    out = h_contractions(amb, sample_point(seed, d))
    ginv = np.linalg.inv(amb.fields_at(sample_point(seed, d)).g.value)
    np.testing.assert_allclose(np.einsum("acbd,cd->ab", out.H2form, ginv), out.Hsq, atol=1e-12)
    np.testing.assert_allclose(out.Hsq, out.Hsq.T, atol=1e-12)
    np.testing.assert_allclose(out.H2form, out.H2form.transpose(2, 3, 0, 1), atol=1e-12)


def test_trivial_dilaton_split():
    s = dilaton_split(euclidean(3), [0.0, 0.0, 0.0])
    assert not s.pi_e_plus.any() and not s.pi_e_minus.any() and s.e_norm2 == 0.0


def test_vector_dilaton_split():
    s = dilaton_split(euclidean(3, X=["1", "x", "0"]), [2.0, 0.0, 0.0])
    np.testing.assert_array_equal(s.pi_e_plus, [1.0, 2.0, 0.0])
    np.testing.assert_array_equal(s.pi_e_plus, s.pi_e_minus)


def test_covector_dilaton_split():
    s = dilaton_split(euclidean(3, xi=["0", "3", "0"]), [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(s.pi_e_plus, [0.0, 3.0, 0.0])
    np.testing.assert_array_equal(s.pi_e_minus, -s.pi_e_plus)
    assert s.e_norm2 == pytest.approx(2 * 9.0)


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_sigma_isometry_uses_g(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4))
    g = g + g.T
    A, B = rng.normal(size=4), rng.normal(size=4)
    for band in (1, -1):
        assert sigma_pairing(g, A, B, band) == A @ g @ B


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("d", [3, 4])
def test_random_scenarios_are_closed(seed, d):
    amb = random_ambient(seed, d)
    for k in range(3):
        assert np.max(np.abs(h_contractions(amb, sample_point(seed + k, d)).dH)) < 1e-9


def test_nonclosed_form_detected():
    chart = Chart("c", ("x", "y", "z", "w"))
    H = ThreeFormField.from_strings(chart, {"x,y,z": "w"})
    g = MetricField.from_strings(chart, [["1" if i == j else "0" for j in range(4)] for i in range(4)], (4, 0))
    from gcurv.fields import AmbientStructure

    amb = AmbientStructure(chart, g, H, DilatonField.zero(chart))
    assert np.max(np.abs(h_contractions(amb, [0, 0, 0, 0]).dH)) == pytest.approx(1.0)
