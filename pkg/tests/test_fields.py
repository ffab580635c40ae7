import numpy as np
import pytest

from cknlab._exact import exact_quantities
from cknlab.errors import DomainError, PositivityError, StencilOutOfRange
from cknlab.fields import (AnnulusGrid, AxiPolarGrid, QuadraticField, ScalarField,
                           curvature_terms, export_binary, export_csv, fd_weights, grad_g,
                           hessian_g, k_functional, norm_sq, norm_sq_g, op_L, random_axi_field,
                           random_trig_field)
from cknlab.params import derive_parameters

P = derive_parameters(3, 0.25, 0.3)
P_FLAT = derive_parameters(3, 0.0, 0.0)


def annulus(h=0.1, order=4):
    return AnnulusGrid(3, 0.5, 1.0, h, order=order)


def field(grid, func, positive=True):
    return ScalarField.from_function(grid, func, positive=positive)


def test_fd_weights_exact_on_polynomials():
    w = fd_weights(np.arange(-2, 3), 2)
    x = np.arange(-2, 3.0)
    for k in range(5):
        assert w @ x**k == pytest.approx(2.0 if k == 2 else 0.0, abs=1e-12)


def test_gradient_examples():
    g = annulus()
    v = field(g, lambda x: np.full(x.shape[:-1], 3.0))
    assert np.max(np.abs(grad_g(v, P))) == 0.0
    assert np.max(np.abs(norm_sq_g(v, P))) == 0.0
    p = derive_parameters(3, 0.0, 0.0)
    half = p.__class__(**{**p.__dict__, "alpha": 0.5})
    v = field(g, lambda x: np.sum(x * x, axis=-1), positive=False)
    pts = g.points()
    np.testing.assert_allclose(grad_g(v, half), 0.5 * pts, atol=1e-12)
    np.testing.assert_allclose(norm_sq_g(v, half), np.sum(pts**2, axis=-1), atol=1e-12)
    k = np.array([0.3, -1.2, 0.5])
    v = field(g, lambda x: 2.0 + x @ k, positive=False)
    np.testing.assert_allclose(grad_g(v, P_FLAT), np.broadcast_to(k, pts.shape), atol=1e-12)


@pytest.mark.parametrize("grid", [AnnulusGrid(3, 0.5, 1.0, 0.1),
                                  AxiPolarGrid(0.0, 1.0, 21, 17)])
def test_L_of_quadratic(grid):
    q = QuadraticField(1.0, 2.0, P.alpha)
    v = field(grid, q if isinstance(grid, AnnulusGrid) else q.polar)
    L = op_L(v, P).values
    if isinstance(grid, AnnulusGrid):
        L = L[grid.mask]
    L = L[np.isfinite(L)]
    np.testing.assert_allclose(L, 2 * P.n / 2.0, rtol=1e-10)


def test_L_constant_and_unweighted_laplacian(rng):
    g = annulus(0.05)
    v = field(g, lambda x: np.full(x.shape[:-1], 2.0))
    assert np.max(np.abs(op_L(v, P).values[g.mask])) <= 1e-12
    f = random_trig_field(rng, 3)
    lap = sum(-a * np.dot(k, k) * np.cos(g.points() @ np.array(k) + ph)
              for a, k, ph in zip(f.amplitudes, f.wavevectors, f.phases))
    L = op_L(field(g, f), P_FLAT).values[g.mask]
    assert np.max(np.abs(L - lap)) < 1e-4


def test_cartesian_and_divergence_forms_agree(rng):
    errs = []
    f = random_trig_field(rng, 3)
    for h in (0.1, 0.05):
        g = annulus(h)
        v = field(g, f)
        a = op_L(v, P, route="cartesian").values[g.mask]
        b = op_L(v, P, route="divergence").values[g.mask]
        errs.append(np.max(np.abs(a - b)))
    assert errs[1] < 2e-3
    assert errs[0] / errs[1] > 12  # fourth order


def test_polar_route_against_exact_derivatives(rng):
    for _ in range(10):
        f = random_axi_field(rng)
        g = AxiPolarGrid(0.5, 1.0, 41, 33)
        v = field(g, f.polar)
        L = op_L(v, P).values
        x = g.cartesian().reshape(-1, 3)
        exact = exact_quantities(f, x, P).Lv.reshape(g.shape)
        assert np.max(np.abs(L - exact)) < 1e-2 * max(1.0, np.max(np.abs(exact)))
    errs = []
    for n_r, n_t in ((41, 33), (81, 65)):
        g = AxiPolarGrid(0.5, 1.0, n_r, n_t)
        exact = exact_quantities(f, g.cartesian().reshape(-1, 3), P).Lv.reshape(g.shape)
        errs.append(np.max(np.abs(op_L(field(g, f.polar), P).values - exact)))
    assert errs[0] / errs[1] > 12


def test_polar_and_tensor_gradient_norms_agree(rng):
    f = random_axi_field(rng)
    g = AxiPolarGrid(0.2, 1.0, 41, 33)
    v = field(g, f.polar)
    a = norm_sq_g(v, P, route="tensor")
    b = norm_sq_g(v, P, route="polar")
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_hessian_reduces_to_euclidean(rng):
    f = random_trig_field(rng, 3)
    g = annulus(0.1)
    v = field(g, f)
    H = hessian_g(v, P_FLAT)
    x = g.points()
    exact = np.zeros(H.shape)
    for a, k, ph in zip(f.amplitudes, f.wavevectors, f.phases):
        k = np.array(k)
        exact -= a * np.cos(x @ k + ph)[:, None, None] * np.outer(k, k)
    assert np.max(np.abs(H - exact)) < 1e-3


def test_metric_trace_of_hessian_for_quadratic():
    q = QuadraticField(0.5, 3.0, P.alpha)
    g = annulus(0.1)
    v = field(g, q)
    idx = tuple(np.argwhere(g.mask)[7])
    H = hessian_g(v, P, node=idx)
    x = g.x[idx]
    gi = np.eye(3) + (P.alpha**2 - 1) * np.outer(x, x) / (x @ x)
    assert np.trace(gi @ H) == pytest.approx(2 * 3 / 3.0, rel=1e-10)
    assert norm_sq(H, x, P.alpha) == pytest.approx(np.trace(gi @ H @ gi @ H))


def test_curvature_terms_examples():
    x = np.array([0.3, -0.4, 0.5])
    c = 1.7
    radial = curvature_terms(x, c * x, P)
    pair = c * (x @ x)
    assert radial.ric == pytest.approx(0.0, abs=1e-14)
    # derived sign (default) and the opposite sign
    assert radial.h_weight == pytest.approx((P.n - P.d) * pair**2 / (x @ x) ** 2)
    assert curvature_terms(x, c * x, P, weight_sign=1.0).h_weight == pytest.approx(
        -(P.n - P.d) * pair**2 / (x @ x) ** 2)
    flat = curvature_terms(x, np.array([1.0, 2.0, -0.3]), P_FLAT)
    assert flat.ric == 0.0 and flat.h_weight == 0.0
    t = np.array([0.4, 0.3, 0.0])  # orthogonal to x
    ang = curvature_terms(x, t, P)
    r2 = x @ x
    assert ang.ric == pytest.approx((1 - P.alpha**2) * (P.d - 2) * (t @ t) / r2)
    assert ang.h_weight == pytest.approx(-P.alpha**2 * (P.n - P.d) * (t @ t) / r2)


def test_k_of_quadratic_vanishes_and_pins_convention():
    q = QuadraticField(1.0, 2.0, P.alpha)
    g = annulus(0.1)
    v = field(g, q)
    k = k_functional(v, P).values[g.mask]
    scale = (2 * P.n / 2.0) ** 2
    assert np.max(np.abs(k)) <= 1e-10 * scale
    k_euclid = k_functional(v, P, pairing="euclidean").values[g.mask]
    assert np.max(np.abs(k_euclid)) > 1e-3 * scale
    k_flip = k_functional(v, P, weight_sign=1.0).values[g.mask]
    assert np.max(np.abs(k_flip)) > 1e-3 * scale


def test_k_of_constant_is_zero():
    g = annulus(0.1)
    v = field(g, lambda x: np.full(x.shape[:-1], 2.5))
    assert np.max(np.abs(k_functional(v, P).values[g.mask])) <= 1e-20


def test_positivity_flag():
    g = annulus(0.1)
    with pytest.raises(PositivityError):
        field(g, lambda x: x[..., 0])
    v = field(g, lambda x: x[..., 0], positive=False)
    with pytest.raises(PositivityError):
        v.require_positive()


def test_stencil_out_of_range():
    g = annulus(0.1)
    v = field(g, lambda x: 1.0 + 0.1 * x[..., 0])
    with pytest.raises(StencilOutOfRange):
        grad_g(v, P, node=(0, 0, 0))


def test_grid_validation():
    with pytest.raises(DomainError):
        AnnulusGrid(3, 0.1, 1.0, 0.1)
    with pytest.raises(DomainError):
        AnnulusGrid(5, 0.5, 1.0, 0.1)
    with pytest.raises(DomainError):
        AxiPolarGrid(0.5, 0.2, 21, 17)


def test_exports(tmp_path):
    g = annulus(0.1)
    v = field(g, lambda x: 1.0 + x[..., 2] ** 2)
    export_csv(v, tmp_path / "v.csv")
    data = np.loadtxt(tmp_path / "v.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 3], v.values[g.mask])
    export_binary(v, tmp_path / "v.bin")
    raw = np.fromfile(tmp_path / "v.bin", dtype="<f8").reshape(-1, 4)
    np.testing.assert_array_equal(raw, data)
