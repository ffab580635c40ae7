import csv
import json

import numpy as np
import pytest

from cknlab.errors import (DomainError, PositivityError, RegimeError, SolverResidualTooLarge,
                           SupportError)
from cknlab.fields import (AnnulusGrid, AxiPolarGrid, QuadraticField, ScalarField,
                           random_axi_field, random_trig_field)
from cknlab.geometry import OriginBall
from cknlab.identities import (Bump, append_csv, boundary_layer_J, energy_identity,
                               pointwise_k_bound, verify_boundary_split,
                               verify_decomposition, verify_lemma22, verify_lemma23,
                               verify_prop21)
from cknlab.params import (GeneralizedPolynomial, OneMinusPower, PowerMinusLinear,
                           derive_parameters)
from cknlab.radial import scan_solutions, shoot

P = derive_parameters(3, 0.25, 0.3)
P2 = derive_parameters(3, 0.2, 0.2)
P_BIG = derive_parameters(3, -0.5, -0.5)  # alpha = 2
F5 = OneMinusPower(5)
NEG = GeneralizedPolynomial([(-1.0, 0.0), (-1.0, 1.0)])


@pytest.fixture(scope="module")
def annulus():
    return AnnulusGrid(3, 0.5, 1.0, 0.05, order=2)


@pytest.fixture(scope="module")
def polar():
    return AxiPolarGrid(0.0, 1.0, 81, 41)


@pytest.fixture(scope="module")
def lin_ni():
    spec = PowerMinusLinear(5, 2.0)
    rep = scan_solutions(P2, spec, 1.0, (0.05, 20.0), grid=200)
    return spec, rep.nonconstant[0]


def field(grid, func):
    return ScalarField.from_function(grid, func, positive=True)


# differential identity ------------------------------------------------------


def test_divergence_identity_constant_is_exact(annulus):
    r = verify_lemma22(field(annulus, lambda x: np.full(x.shape[:-1], 1.0)), P)
    assert r.max_residual == 0.0 and r.passed


@pytest.mark.parametrize("kind", ["quadratic", "random"])
def test_divergence_identity_second_order(annulus, rng, kind):
    f = QuadraticField(1.0, 2.0, P.alpha) if kind == "quadratic" else random_trig_field(rng, 3)
    r = verify_lemma22(field(annulus, f), P)
    assert r.passed
    assert r.convergence_order >= 1.68
    assert r.details["ratio"] > 3.2


def test_divergence_identity_exact_route(rng):
    pts = AnnulusGrid(3, 0.5, 1.0, 0.1).points()
    r = verify_lemma22(random_trig_field(rng, 3), P, route="exact", points=pts)
    assert r.passed and r.max_residual <= 1e-12 * r.details["scale"]


def test_divergence_identity_rejects_nonpositive(annulus):
    v = ScalarField.from_function(annulus, lambda x: x[..., 0], positive=False)
    with pytest.raises(PositivityError):
        verify_lemma22(v, P)


# weak form ------------------------------------------------------------------


def test_weak_form_trivial_bump(annulus, rng):
    v = field(annulus, random_trig_field(rng, 3))
    assert verify_lemma23(v, None, P).passed
    assert verify_lemma23(v, Bump((0, 0.4, 0.6), 0.22, amplitude=0.0), P).max_residual == 0.0


def test_weak_form_support_checked(annulus, rng):
    v = field(annulus, random_trig_field(rng, 3))
    with pytest.raises(SupportError):
        verify_lemma23(v, Bump((0, 0, 0.6), 0.3), P)


def test_weak_form_random_field(annulus, rng):
    v = field(annulus, random_trig_field(rng, 3))
    r = verify_lemma23(v, Bump((0, 0.4, 0.6), 0.22), P)
    assert r.passed
    assert r.details["residual_fine"] < r.max_residual
    assert r.max_residual <= 1e-2 * r.details["scale"]


def test_weak_form_needs_annulus(polar):
    with pytest.raises(DomainError):
        verify_lemma23(field(polar, lambda r, t: 1.0 + 0 * r), Bump((0, 0, 0.5), 0.1), P)


# boundary splitting ---------------------------------------------------------


def test_boundary_split_radial_field(polar):
    v = field(polar, QuadraticField(1.0, 2.0, P.alpha).polar)
    r = verify_boundary_split(v, OriginBall(1.0), P)
    assert r.passed and r.max_residual <= 1e-10
    # the split holds only with the normal term for a non-Neumann field
    assert r.details["normal_term_max"] > 1.0
    assert r.details["split_only_max"] > 1.0


def test_boundary_split_random_field(polar, rng):
    v = field(polar, random_axi_field(rng).polar)
    r = verify_boundary_split(v, OriginBall(1.0), P)
    assert r.passed
    assert r.convergence_order >= 1.68 or r.max_residual <= 1e-10


# excised integral identity --------------------------------------------------


def test_excised_identity_constant_solution():
    r = verify_prop21(shoot(P2, F5, 1.0, 1.0), None, F5)
    assert r.passed and r.lhs == 0.0 and r.rhs == 0.0


def test_excised_identity_lin_ni(lin_ni):
    spec, sol = lin_ni
    r = verify_prop21(sol, None, spec, eps_list=[1e-2, 1e-3])
    assert r.passed and r.residual <= r.tolerance
    # Phi is not non-increasing, and the identity shows a positive k integral
    assert r.bulk_k > 1e3 * r.tolerance
    for rec in r.eps_sensitivity.values():
        assert rec["residual"] <= 1e-6 * abs(r.lhs)
    json.loads(r.to_json())


def test_excised_identity_requires_neumann():
    with pytest.raises(SolverResidualTooLarge):
        verify_prop21(shoot(P2, F5, 1.0, 0.5), None, F5)


# radial / angular decomposition ---------------------------------------------


def test_decomposition_radial_equality(polar):
    v = field(polar, lambda r, t: 1.0 + 0.3 * r**4 + 0 * t)
    r = verify_decomposition(v, P2)
    assert r.passed and abs(r.min_slack) <= 1e-10
    # the alpha^2 coefficient overestimates the radial term
    alt = verify_decomposition(v, P2, first_coefficient="alpha2")
    assert not alt.passed


def test_decomposition_quadratic(polar):
    v = field(polar, QuadraticField(1.0, 2.0, P2.alpha).polar)
    r = verify_decomposition(v, P2)
    assert r.passed and abs(r.details["k_integral"]) <= 1e-12


def test_decomposition_random(polar, rng):
    for _ in range(3):
        r = verify_decomposition(field(polar, random_axi_field(rng).polar), P2)
        assert r.passed
        assert set(r.details["variants"]) == {"alpha4/weighted", "alpha4/plain",
                                              "alpha2/weighted", "alpha2/plain"}


def test_decomposition_regime(polar):
    with pytest.raises(RegimeError):
        verify_decomposition(field(polar, lambda r, t: 1.0 + 0 * r), P_BIG)


# pointwise bound ------------------------------------------------------------


def test_k_bound_quadratic(polar):
    r = pointwise_k_bound(field(polar, QuadraticField(1.0, 2.0, P2.alpha).polar), P2)
    assert r.passed and abs(r.min_slack) <= 1e-12


def test_k_bound_random_exact(rng):
    pts = AnnulusGrid(3, 0.5, 1.0, 0.1).points()
    for _ in range(3):
        r = pointwise_k_bound(random_trig_field(rng, 3), P2, points=pts)
        assert r.passed and r.details["nodes"] == len(pts)


def test_k_bound_regime(polar):
    with pytest.raises(RegimeError):
        pointwise_k_bound(field(polar, lambda r, t: 1.0 + 0 * r), P_BIG)


# boundary layer and energy --------------------------------------------------


def test_J_decay(lin_ni):
    _, sol = lin_ni
    rec = boundary_layer_J(sol)
    assert rec.passed and rec.monotone
    assert rec.beta >= P2.n - 2.0 - 0.3
    assert np.all(np.diff(np.abs(rec.J)) > 0)


def test_J_constant_vanishes():
    rec = boundary_layer_J(shoot(P2, F5, 1.0, 1.0))
    assert rec.passed and rec.beta == np.inf


def test_energy_identity_neumann(lin_ni):
    spec, sol = lin_ni
    e = energy_identity(sol)
    assert e.passed and e.residual <= 1e-8 and e.finite


def test_energy_identity_constant():
    e = energy_identity(shoot(P2, F5, 1.0, 1.0), require_neumann=False)
    assert e.passed and e.bulk == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("u0", [0.5, 0.9])
def test_energy_identity_with_flux(u0):
    sol = shoot(P2, NEG, 1.0, u0)
    e = energy_identity(sol, require_neumann=False)
    assert e.passed and e.residual <= 1e-8
    assert e.boundary > 0
    with pytest.raises(SolverResidualTooLarge):
        energy_identity(sol)


def test_report_serialisation(tmp_path, annulus):
    r = verify_lemma22(field(annulus, QuadraticField(1.0, 2.0, P.alpha)), P)
    data = json.loads(r.to_json())
    assert data["verdict"] == "pass" and data["grid_h"] == 0.05
    path = tmp_path / "log.csv"
    append_csv(r, path, "a")
    append_csv(r, path, "b")
    rows = list(csv.DictReader(open(path)))
    assert [row["label"] for row in rows] == ["a", "b"]
    assert float(rows[0]["max_residual"]) == r.max_residual
