import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cknlab.errors import DomainError, OriginError, OriginOnBoundaryError
from cknlab.geometry import (OffsetBall, OriginBall, RadialGraph, angles_to_direction,
                             ball_criterion, ball_margin_exact, christoffel, condition_margin,
                             conformal_ii, example_domains, is_convex, is_g_convex, map_T,
                             map_T_inverse, mapped_surface_ii, metric_at, surface_data)

points = st.lists(st.floats(-3, 3), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3)


def test_map_T_examples():
    np.testing.assert_allclose(map_T([4.0, 0, 0], 0.5), [2.0, 0, 0])
    w = np.array([0.6, 0.0, 0.8])
    np.testing.assert_allclose(map_T(w, 0.37), w)
    np.testing.assert_array_equal(map_T(np.zeros(3), 0.5), np.zeros(3))


@given(points, st.floats(0.1, 3.0))
def test_map_T_roundtrip(x, alpha):
    x = np.array(x)
    np.testing.assert_allclose(map_T_inverse(map_T(x, alpha), alpha), x, rtol=1e-12, atol=1e-12)
    assert np.linalg.norm(map_T(x, alpha)) == pytest.approx(np.linalg.norm(x) ** alpha)


def test_metric_examples():
    np.testing.assert_allclose(metric_at([0.3, -1, 2], 1.0).g, np.eye(3))
    np.testing.assert_allclose(metric_at([1.0, 0, 0], 0.5).g, np.diag([4.0, 1, 1]))
    with pytest.raises(OriginError):
        metric_at(np.zeros(3), 0.5)


@given(points, st.floats(0.1, 3.0))
def test_metric_spectrum_and_determinant(x, alpha):
    m = metric_at(x, alpha)
    np.testing.assert_allclose(m.g @ m.g_inv, np.eye(3), atol=1e-12)
    ev = np.sort(np.linalg.eigvalsh(m.g))
    np.testing.assert_allclose(ev, np.sort([1 / alpha**2, 1.0, 1.0]), rtol=1e-12)
    assert m.sqrt_det == pytest.approx(1 / alpha, rel=1e-12)


def test_christoffel_matches_metric_derivatives(rng):
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), derivatives by central differences
    h = 1e-5
    for _ in range(5):
        x = rng.normal(size=3)
        x *= max(1.0, 0.5 / np.linalg.norm(x))
        alpha = rng.uniform(0.2, 1.5)
        dg = np.array([(metric_at(x + h * e, alpha).g - metric_at(x - h * e, alpha).g) / (2 * h)
                       for e in np.eye(3)])  # dg[l, i, j] = d_l g_ij
        gi = metric_at(x, alpha).g_inv
        fd = np.zeros((3, 3, 3))
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    fd[k, i, j] = 0.5 * sum(gi[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                                            for l in range(3))
        np.testing.assert_allclose(christoffel(x, alpha), fd, atol=1e-7)


def test_ball_surface_data():
    s = surface_data(OriginBall(2.0), [0.3, 0.1, 0.9])
    np.testing.assert_allclose(s.ii, 0.5 * np.eye(2))
    s = surface_data(OffsetBall((0, 0, 0.5), 1.0), [0, 0, 1.0])
    np.testing.assert_allclose(s.x, [0, 0, 1.5])
    np.testing.assert_allclose(s.nu, [0, 0, 1])
    np.testing.assert_allclose(s.ii, np.eye(2))
    np.testing.assert_allclose(s.frame @ s.frame.T, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(s.frame @ s.nu, 0, atol=1e-14)


def test_constant_radial_graph_matches_ball(rng):
    g = RadialGraph.from_function(lambda w: np.full(w.shape[:-1], 1.3), n_theta=16)
    for _ in range(10):
        w = rng.normal(size=3)
        s = surface_data(g, w)
        np.testing.assert_allclose(s.ii, np.eye(2) / 1.3, atol=1e-8)
        np.testing.assert_allclose(s.nu, w / np.linalg.norm(w), atol=1e-10)
    # near a pole the great-circle derivatives take over
    s = surface_data(g, [1e-4, 0, 1.0])
    np.testing.assert_allclose(s.ii, np.eye(2) / 1.3, atol=1e-6)


def test_radial_graph_two_dimensional():
    g = RadialGraph.from_function(lambda w: np.full(w.shape[:-1], 2.0), d=2, n_theta=32)
    s = surface_data(g, [1.0, 1.0])
    np.testing.assert_allclose(s.ii, [[0.5]], atol=1e-10)


def test_radial_graph_csv_roundtrip(tmp_path):
    g = example_domains("perturbed", eps=0.1, n_theta=12)
    g.to_csv(tmp_path / "b.csv")
    h = RadialGraph.from_csv(tmp_path / "b.csv")
    np.testing.assert_array_equal(g.rho, h.rho)
    np.testing.assert_array_equal(g.center, h.center)


@pytest.mark.parametrize("R,alpha", [(1.0, 0.5), (2.0, 0.9), (0.5, 0.1)])
def test_origin_ball_margin(R, alpha):
    rep = condition_margin(OriginBall(R), alpha, sampling=12)
    assert rep.min_margin == pytest.approx(alpha / R, rel=1e-10)
    assert ball_margin_exact(0.0, R, alpha) == pytest.approx(alpha / R)


def test_offset_ball_margin_negative():
    b = OffsetBall((0, 0, 0.7), 1.0)
    rep = condition_margin(b, 0.5, sampling=16)
    assert rep.min_margin < 0 and not rep.holds
    assert rep.min_margin == pytest.approx(ball_margin_exact(0.7, 1.0, 0.5), abs=1e-8)


def test_convex_boundary_at_alpha_one(rng):
    for _ in range(3):
        c = rng.uniform(-0.5, 0.5, 3)
        assert condition_margin(OffsetBall(c, 1.0), 1.0, sampling=12).holds


def test_origin_on_boundary():
    with pytest.raises(OriginOnBoundaryError):
        condition_margin(OffsetBall((0, 0, 1.0), 1.0), 0.5)


def test_ball_criterion_examples():
    assert ball_criterion(0.4, 1, 0.5)
    assert not ball_criterion(0.7, 1, 0.5)
    assert ball_criterion(1.5, 1, 0.5)
    assert ball_criterion(0.0, 2.0, 0.3)
    with pytest.raises(DomainError):
        ball_criterion(1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        ball_criterion(0.5, 1.0, 1.5)


def test_ball_criterion_matches_sampling(rng):
    for _ in range(40):
        R = rng.uniform(0.5, 2.0)
        alpha = rng.uniform(0.05, 1.0)
        x0 = rng.uniform(0, 2.5 * R)
        if abs(x0 - R) < 1e-6 or abs(x0 - alpha * R) < 1e-6:
            continue
        direction = rng.normal(size=3)
        b = OffsetBall(x0 * direction / np.linalg.norm(direction), R)
        assert (condition_margin(b, alpha, sampling=10).min_margin >= -1e-9) == \
            ball_criterion(x0, R, alpha)


def test_conformal_ii_examples(rng):
    for _ in range(5):
        R, alpha = rng.uniform(0.3, 3), rng.uniform(0.1, 1.0)
        s = surface_data(OriginBall(R), rng.normal(size=3))
        np.testing.assert_allclose(conformal_ii(s.ii, s.x, s.nu, alpha),
                                   alpha * R ** (alpha - 2) * np.eye(2), rtol=1e-12)
    ii = np.array([[1.0, 0.2], [0.2, 3.0]])
    np.testing.assert_array_equal(conformal_ii(ii, [1.0, 2, 0], [0, 0, 1.0], 1.0), ii)
    # tangent point: x . nu = 0
    x = np.array([1.0, 0, 0])
    np.testing.assert_allclose(conformal_ii(ii, x * 2, [0, 0, 1.0], 0.4), 2 ** -0.6 * ii)
    with pytest.raises(OriginError):
        conformal_ii(ii, np.zeros(3), [0, 0, 1.0], 0.5)


def test_conformal_ii_matches_mapped_surface(rng):
    for b in (OriginBall(1.3), OffsetBall((0.2, -0.1, 0.4), 1.0),
              example_domains("perturbed", eps=0.08, n_theta=24)):
        for _ in range(3):
            w = rng.normal(size=3)
            alpha = rng.uniform(0.3, 1.0)
            s = surface_data(b, w)
            np.testing.assert_allclose(mapped_surface_ii(b, w, alpha),
                                       conformal_ii(s.ii, s.x, s.nu, alpha), atol=1e-6)


def test_g_convexity_examples():
    assert is_g_convex(OriginBall(1.0), 0.5, sampling=8)
    assert not is_g_convex(OffsetBall((0, 0, 0.7), 1.0), 0.5, sampling=12)
    peanut = RadialGraph.from_function(lambda w: 0.7 + 0.6 * (2 * w[..., 2] ** 2 - 1) ** 2,
                                       n_theta=24)
    assert not is_convex(peanut, sampling=16)
    assert not is_g_convex(peanut, 1.0, sampling=16)


def test_g_convexity_equals_margin_sign(rng):
    for _ in range(6):
        x0 = rng.uniform(0, 2.0)
        if abs(x0 - 1.0) < 1e-3:
            continue
        alpha = rng.uniform(0.1, 1.0)
        b = OffsetBall((0, 0, x0), 1.0)
        assert is_g_convex(b, alpha, sampling=10) == condition_margin(b, alpha, sampling=10).holds


def test_example_domains():
    flat = example_domains("flattened", alpha=0.5, n_theta=32)
    assert condition_margin(flat, 0.5, sampling=24).holds
    assert is_convex(flat, sampling=24)
    dimpled = example_domains("dimpled", alpha=0.5, n_theta=32)
    assert condition_margin(dimpled, 0.5, sampling=24).holds
    assert not is_convex(dimpled, sampling=32)
    margins = [condition_margin(example_domains("perturbed", eps=e, n_theta=16), 0.5,
                                sampling=12).min_margin for e in (0.04, 0.02, 0.01)]
    errs = np.abs(np.array(margins) - 0.5)
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.1
    with pytest.raises(DomainError):
        example_domains("torus")


def test_margin_implies_sampled_convexity(rng):
    # for 0 < alpha <= 1 the curvature condition forces II >= 0
    for _ in range(4):
        eps = rng.uniform(-0.2, 0.2)
        k = rng.integers(1, 4)
        b = RadialGraph.from_function(
            lambda w: 1.0 + eps * np.cos(k * np.arccos(np.clip(w[..., 2], -1, 1))), n_theta=16)
        alpha = rng.uniform(0.2, 1.0)
        if condition_margin(b, alpha, sampling=12).holds:
            assert is_convex(b, sampling=12)


def test_angles_to_direction_unit():
    w = angles_to_direction(np.array([[0.3, 1.2], [2.0, -0.4]]))
    np.testing.assert_allclose(np.linalg.norm(w, axis=-1), 1.0)
    assert math.isclose(angles_to_direction(np.array([0.0, 0.0]))[2], 1.0)
