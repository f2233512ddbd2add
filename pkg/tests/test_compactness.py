import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from resonantcl.compactness import (build_fields, div_curl_product_test, w_neg1_2_proxy,
                                    window_l2)
from resonantcl.fields import Grid2D, ScalarField2D
from resonantcl.flux import make_flux

LINEAR = make_flux("linear")
RESONANT = make_flux("resonant")
GRID = Grid2D.square(0.0, 1.0, 16)


def oscillation_members(model, amp=0.4, levels=(2, 3, 4), n0=32):
    """``u_j = 0.5 + amp sin(2^j π x)`` on nested grids: no strong limit."""
    out = []
    for j, lev in enumerate(levels):
        g = Grid2D.square(0.0, 1.0, n0 * 2 ** j)
        X, _ = g.mesh()
        u = ScalarField2D(g, 0.5 + amp * np.sin(2.0 ** lev * np.pi * X))
        one = ScalarField2D.constant(g, 1.0)
        out.append(build_fields(u, one, one, model, epsilon=0.1 / 2 ** j, delta=0.2 / 2 ** j))
    return out


def test_build_fields_on_a_linear_state():
    # linear flux, k = l = 1: F = G = H = u, so div D = curl E = u_x + u_y exactly
    X, Y = GRID.mesh()
    u = ScalarField2D(GRID, 0.1 + 0.3 * X + 0.2 * Y)
    one = ScalarField2D.constant(GRID, 1.0)
    cf = build_fields(u, one, one, LINEAR)
    np.testing.assert_allclose(cf.H_field.values, u.values, rtol=1e-12)
    np.testing.assert_allclose(cf.div_D.values, 0.5, rtol=1e-10)
    np.testing.assert_allclose(cf.curl_E.values, 0.5, rtol=1e-10)


def test_build_fields_grid_mismatch():
    u = ScalarField2D.constant(GRID, 0.5)
    other = ScalarField2D.constant(GRID.refined(), 1.0)
    with pytest.raises(ValueError):
        build_fields(u, other, other, LINEAR)


@settings(max_examples=50, deadline=None)
@given(v=arrays(np.float64, (16, 16), elements=st.floats(-5, 5)), c=st.floats(-3, 3))
def test_proxy_is_dominated_by_l2_and_homogeneous(v, c):
    f = ScalarField2D(GRID, v)
    p = w_neg1_2_proxy(f)
    assert p <= window_l2(f) * (1 + 1e-12) + 1e-15
    assert w_neg1_2_proxy(ScalarField2D(GRID, c * v)) == pytest.approx(abs(c) * p, rel=1e-9, abs=1e-12)


def test_proxy_of_oscillations_decays_like_one_over_n():
    g = Grid2D.square(0.0, 1.0, 256)
    X, _ = g.mesh()
    ns = np.array([4, 8, 16, 32])
    ratios = []
    for n in ns:
        f = ScalarField2D(g, np.sin(n * np.pi * X))
        ratios.append(w_neg1_2_proxy(f) / window_l2(f))
    slope = np.polyfit(np.log(ns), np.log(ratios), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.15)


def test_proxy_of_zero():
    assert w_neg1_2_proxy(ScalarField2D.constant(GRID, 0.0)) == 0.0


def test_window_l2():
    f = ScalarField2D.constant(GRID, 1.0)
    assert window_l2(f, window=(0.0, 0.5, 0.0, 0.5)) == pytest.approx(0.5)
    assert window_l2(f, f) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ValueError):
        window_l2(f, window=(2.0, 3.0, 2.0, 3.0))


def test_oscillation_with_linear_flux_is_inconclusive():
    rep = div_curl_product_test(oscillation_members(LINEAR), LINEAR)
    assert rep.verdict == "inconclusive"
    assert max(abs(a) for a in rep.A) <= 1e-12


def test_oscillation_gap_does_not_close():
    # the product defect of a persistent oscillation stays put across members
    rep = div_curl_product_test(oscillation_members(RESONANT), RESONANT)
    assert rep.gaps[-1] > 0.9 * rep.gaps[0] > 0


def test_constant_state_has_zero_gap():
    members = []
    for n in (32, 64, 128):
        g = Grid2D.square(0.0, 1.0, n)
        one = ScalarField2D.constant(g, 1.0)
        members.append(build_fields(ScalarField2D.constant(g, 0.3), one, one, RESONANT))
    rep = div_curl_product_test(members, RESONANT)
    assert all(a == pytest.approx(rep.B, abs=1e-18) for a in rep.A)
    assert rep.verdict == "pass"


def test_product_test_needs_three_nested_members():
    members = oscillation_members(LINEAR)
    with pytest.raises(ValueError):
        div_curl_product_test(members[:2], LINEAR)


def test_report_csv(tmp_path):
    rep = div_curl_product_test(oscillation_members(RESONANT), RESONANT, window=(0.25, 0.75, 0.25, 0.75))
    text = rep.to_csv(tmp_path / "dc.csv").read_text().splitlines()
    assert text[0].startswith("epsilon,delta,A,gap")
    assert len(text) == 1 + 3 + 1
    assert text[-1].startswith(f"verdict={rep.verdict}")
