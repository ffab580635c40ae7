"""Radial Neumann problem on origin balls: shooting, solution scans, the
Emden--Fowler cylinder picture and small-radius asymptotics.

The radial equation is::

    r^{1-d} (r^{d-1-2a} u')' + r^{-bq} f(u) = 0,   0 < r < R,   u'(R) = 0

with regularity at the origin. Shots start at ``eps0 = 1e-6 R`` from a
series in ``t = r^alpha``, where the equation becomes the constant
coefficient ODE ``alpha^2 (w'' + (n-1) w'/t) + f(w) = 0``.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BlowupError, DomainError, PositivityError, StiffnessError
from .fields import AxiPolarGrid, ScalarField, _polar_partials, jet_quantities
from .params import CknParameters, classify_regime, hat_f, phi_monotonicity

if os.environ.get("CKNLAB_PURE_PYTHON"):
    from ._kernels_py import integrate_radial
    BACKEND = "python"
else:
    try:
        from ._kernels import integrate_radial
        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import integrate_radial
        BACKEND = "python"

__all__ = [
    "BACKEND",
    "RadialSolution",
    "EmdenFowlerProfile",
    "ScanReport",
    "AsymptoticsReport",
    "shoot",
    "scan_solutions",
    "flux_check",
    "ef_transform",
    "ef_inverse",
    "ef_residual",
    "v_jet",
    "transform_residual",
    "probe_field",
    "check_asymptotics",
    "fit_exponent",
    "export_solution_csv",
    "export_scan_csv",
]

EPS0_FACTOR = 1e-6
CONSTANT_RTOL = 1e-6


def _u_max(spec) -> float:
    zeros = spec.zeros()
    return 1e3 * max([1.0] + zeros)


def _series_start(p: CknParameters, spec, u0: float, eps0: float):
    """``(u, F)`` at ``r = eps0`` from ``w = u0 + A t^2 + B t^4``."""
    al, n = p.alpha, p.n
    f0 = float(spec.f(u0))
    fp0 = float(spec.f_prime(u0))
    A = -f0 / (2.0 * n * al**2)
    B = -fp0 * A / (4.0 * al**2 * (n + 2.0))
    t = eps0**al
    w = u0 + A * t**2 + B * t**4
    dw = 2.0 * A * t + 4.0 * B * t**3
    F = eps0 ** (p.d - 2.0 - 2.0 * p.a) * al * t * dw
    return w, F


def _integrate(p, spec, u0, r_out, eps0, rtol, u_max):
    coefs, exps = spec.coefficients()
    u_s, F_s = _series_start(p, spec, u0, eps0)
    s_out = np.log(np.asarray(r_out, dtype=float))
    Y, status, s_exit, steps = integrate_radial(
        math.log(eps0), u_s, F_s, s_out, coefs, exps, p.a, p.bq, float(p.d),
        rtol=rtol, atol=1e-14 * max(1.0, u0), u_max=u_max)
    if status == 1:
        raise BlowupError(f"u exceeded u_max={u_max:g}", r_exit=math.exp(s_exit), direction=1)
    if status == 2:
        raise BlowupError("u reached zero", r_exit=math.exp(s_exit), direction=-1)
    if status in (3, 4):
        raise StiffnessError(f"integration stalled at r={math.exp(s_exit):.3e} "
                             f"(status {status})")
    return Y[:, 0], Y[:, 1], steps


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """A shot from ``u(0+) = u0`` to ``r = R``.

    ``F = r^{d-1-2a} u'`` is the weighted flux; ``du_R`` is ``u'(R)``,
    which vanishes for solutions of the Neumann problem.
    """

    params: CknParameters
    spec: object
    R: float
    u0: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    F: np.ndarray
    du_R: float
    n_steps: int
    eps0: float
    rtol: float = 1e-10
    backend: str = BACKEND
    u_max: float = field(default=1e3, repr=False)

    def evaluate(self, r):
        """``(u, u', F)`` at radii ``r`` in ``[eps0, R]`` by re-integration."""
        r = np.asarray(r, dtype=float)
        if np.any(r < self.eps0 * (1 - 1e-12)) or np.any(r > self.R * (1 + 1e-12)):
            raise DomainError("radii must lie in [eps0, R]")
        r = np.clip(r, self.eps0, self.R)
        order = np.argsort(r, kind="stable")
        rs = r[order]
        u, F, _ = _integrate(self.params, self.spec, self.u0, rs, self.eps0, self.rtol, self.u_max)
        p = self.params
        du = F * rs ** (1.0 + 2.0 * p.a - p.d)
        out = [np.empty_like(rs) for _ in range(3)]
        for o, val in zip(out, (u, du, F)):
            o[order] = val
        return tuple(o.reshape(r.shape) for o in out)

    def second_derivative(self, r, u, du):
        """``u''`` from the equation."""
        p = self.params
        return -r ** (2.0 * p.a - p.bq) * self.spec.f(u) - (p.d - 1.0 - 2.0 * p.a) * du / r

    @property
    def oscillation(self) -> float:
        return float(np.max(self.u) - np.min(self.u))

    @property
    def is_constant(self) -> bool:
        return self.oscillation <= CONSTANT_RTOL * float(np.mean(np.abs(self.u)))

    @property
    def classification(self) -> str:
        return "constant" if self.is_constant else "nonconstant"

    def summary(self) -> dict:
        return {"u0": self.u0, "R": self.R, "du_R": self.du_R, "u_R": float(self.u[-1]),
                "oscillation": self.oscillation, "classification": self.classification,
                "n_steps": self.n_steps, "backend": self.backend}


def shoot(p: CknParameters, spec, R: float, u0: float, r_eval=None,
          eps0: float | None = None, rtol: float = 1e-10, n_samples: int = 401,
          u_max: float | None = None) -> RadialSolution:
    """Integrate the radial equation outward from ``u(0+) = u0``.

    Parameters
    ----------
    r_eval : array, optional
        Radii in ``[eps0, R]`` at which to sample; ``R`` is always added.
        Defaults to a mixed geometric/uniform grid of ``n_samples`` points.
    eps0 : float, optional
        Start radius, ``1e-6 R`` by default.

    Raises
    ------
    BlowupError
        ``u`` left ``(0, u_max]``; ``direction`` is +1 above, -1 at zero.
    StiffnessError
        Step size collapse or step budget exhausted.
    """
    if not u0 > 0:
        raise PositivityError("shooting value u0 must be positive")
    R = float(R)
    eps0 = EPS0_FACTOR * R if eps0 is None else float(eps0)
    u_max = _u_max(spec) if u_max is None else float(u_max)
    if r_eval is None:
        half = n_samples // 2
        r_eval = np.concatenate([np.geomspace(eps0, R, half), np.linspace(eps0, R, n_samples - half)])
    r = np.unique(np.append(np.clip(np.asarray(r_eval, dtype=float), eps0, R), R))
    u, F, steps = _integrate(p, spec, float(u0), r, eps0, rtol, u_max)
    du = F * r ** (1.0 + 2.0 * p.a - p.d)
    return RadialSolution(p, spec, R, float(u0), r, u, du, F, float(du[-1]), int(steps),
                          eps0, rtol, BACKEND, u_max)


# ---------------------------------------------------------------------------
# flux oracle


def _gl_panels(lo: float, hi: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def flux_check(sol: RadialSolution, radii=None, panels: int = 16, order: int = 16) -> float:
    """Max difference between the integrated ``F(r)`` and the quadrature
    ``-int_0^r t^{d-1-bq} f(u(t)) dt`` (Gauss--Legendre in ``log t``, series
    tail below ``eps0``)."""
    p = sol.params
    radii = np.geomspace(10 * sol.eps0, sol.R, 6) if radii is None else np.asarray(radii, float)
    e = p.d - p.bq
    tail = float(sol.spec.f(sol.u0)) * sol.eps0**e / e
    worst = 0.0
    for rk in radii:
        s, w = _gl_panels(math.log(sol.eps0), math.log(rk), panels, order)
        u, _, _ = sol.evaluate(np.exp(s))
        quad = -(np.sum(w * np.exp(e * s) * sol.spec.f(np.maximum(u, 0.0))) + tail)
        F = sol.evaluate(np.array([rk]))[2][0]
        worst = max(worst, abs(F - quad))
    return worst


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanReport:
    """Roots of ``u0 -> u'(R; u0)`` with the hypothesis gates recorded."""

    solutions: list
    u0_grid: np.ndarray
    signs: np.ndarray
    phi_gate: str
    regime: dict
    discarded: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    @property
    def nonconstant(self) -> list:
        return [s for s in self.solutions if not s.is_constant]


def _boundary_slope(p, spec, R, u0, rtol):
    """``u'(R; u0)``, or ``+-inf`` when the shot leaves ``(0, u_max]``."""
    try:
        return shoot(p, spec, R, u0, r_eval=[R], rtol=rtol).du_R
    except BlowupError as exc:
        return math.inf if exc.direction > 0 else -math.inf


def scan_solutions(p: CknParameters, spec, R: float, u0_range=(0.05, 20.0),
                   grid: int = 400, spacing: str = "geometric", tol: float = 1e-10,
                   rtol: float = 1e-10) -> ScanReport:
    """Locate every sign change of ``u0 -> u'(R; u0)`` on a grid and refine
    each to ``|u'(R)| <= tol``.

    Brackets whose ends are both finite use Brent's method; a bracket
    through an exit (``+-inf``) is bisected and dropped if the limit is an
    exit jump rather than a root. Constant solutions are those with
    oscillation ``<= 1e-6`` times the mean.
    """
    lo, hi = map(float, u0_range)
    if spacing == "geometric":
        grid_u = np.geomspace(lo, hi, int(grid))
    else:
        grid_u = np.linspace(lo, hi, int(grid))
    vals = np.array([_boundary_slope(p, spec, R, u, rtol) for u in grid_u])
    signs = np.sign(vals)
    mono = phi_monotonicity(spec, p)
    found, discarded = [], []

    def g(u):
        return _boundary_slope(p, spec, R, u, rtol)

    candidates = [float(grid_u[i]) for i in np.nonzero(vals == 0.0)[0]]
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        a, b = float(grid_u[i]), float(grid_u[i + 1])
        ga, gb = vals[i], vals[i + 1]
        if np.isfinite(ga) and np.isfinite(gb):
            try:
                candidates.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
                continue
            except ValueError:  # an exit appeared inside the bracket
                pass
        # bisection on the sign
        for _ in range(200):
            m = 0.5 * (a + b)
            gm = g(m)
            if gm == 0 or b - a <= 4e-16 * b:
                break
            if np.sign(gm) == np.sign(ga):
                a, ga = m, gm
            else:
                b, gb = m, gm
            if np.isfinite(ga) and np.isfinite(gb):
                m = brentq(g, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
                break
        candidates.append(m)
    for u0 in sorted(candidates):
        try:
            sol = shoot(p, spec, R, u0, rtol=rtol)
        except BlowupError:
            discarded.append(u0)
            continue
        if abs(sol.du_R) > tol and not sol.is_constant:
            discarded.append(u0)
            continue
        if found and abs(found[-1].u0 - u0) <= 1e-9 * u0:
            continue
        found.append(sol)
    return ScanReport(found, grid_u, signs, mono.label(), classify_regime(p).as_dict(), discarded)


# ---------------------------------------------------------------------------
# Emden--Fowler picture


@dataclass(frozen=True)
class EmdenFowlerProfile:
    """``phi(s) = r^{a_c - a} u(r)`` with ``r = e^{-s}`` on a uniform
    ``s`` grid. ``dphi`` and ``d2phi`` are present when the profile comes
    from a solution (exact in ``s`` through the equation)."""

    s: np.ndarray
    phi: np.ndarray
    lambda_ef: float
    params: CknParameters
    dphi: np.ndarray | None = None
    d2phi: np.ndarray | None = None

    def __post_init__(self):
        if np.any(~(self.phi > 0)):
            raise PositivityError("profile must be positive")

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])

    def scaled(self, factor: float) -> "EmdenFowlerProfile":
        sc = lambda a: None if a is None else factor * a  # noqa: E731
        return EmdenFowlerProfile(self.s, factor * self.phi, self.lambda_ef, self.params,
                                  sc(self.dphi), sc(self.d2phi))

    def decay_rate(self, fraction: float = 0.5) -> float:
        """Least-squares slope of ``-log phi`` over the last ``fraction`` of
        the grid."""
        k = int(len(self.s) * (1 - fraction))
        slope = np.polyfit(self.s[k:], np.log(self.phi[k:]), 1)[0]
        return float(-slope)


def ef_transform(u, s_max: float | None = None, n_s: int = 801) -> EmdenFowlerProfile:
    """Emden--Fowler transform of a :class:`RadialSolution`.

    ``s`` runs uniformly over ``[-log R, s_max]``; ``s_max`` defaults to
    ``-log(10 eps0)``.
    """
    p = u.params
    c = p.a_c - p.a
    s_lo = -math.log(u.R)
    s_max = -math.log(10 * u.eps0) if s_max is None else float(s_max)
    s = np.linspace(s_lo, s_max, int(n_s))
    r = np.exp(-s)
    uu, du, _ = u.evaluate(r)
    if np.any(~(uu > 0)):
        raise PositivityError("u must be positive on (0, R]")
    d2u = u.second_derivative(r, uu, du)
    # psi(s) = u(e^{-s}): psi' = -r u', psi'' = r u' + r^2 u''
    psi1 = -r * du
    psi2 = r * du + r * r * d2u
    e = np.exp(-c * s)
    phi = e * uu
    dphi = e * (psi1 - c * uu)
    d2phi = e * (psi2 - 2 * c * psi1 + c * c * uu)
    return EmdenFowlerProfile(s, phi, p.lambda_ef, p, dphi, d2phi)


def ef_from_constant(p: CknParameters, value: float, R: float = 1.0, s_max: float = 12.0,
                     n_s: int = 801) -> EmdenFowlerProfile:
    """Profile of ``u = value`` (exact)."""
    c = p.a_c - p.a
    s = np.linspace(-math.log(R), s_max, n_s)
    phi = value * np.exp(-c * s)
    return EmdenFowlerProfile(s, phi, p.lambda_ef, p, -c * phi, c * c * phi)


def ef_inverse(profile: EmdenFowlerProfile):
    """``(r, u)`` with ``u(r) = r^{a - a_c} phi(-log r)``, ``r`` ascending."""
    p = profile.params
    r = np.exp(-profile.s[::-1])
    u = r ** (p.a - p.a_c) * profile.phi[::-1]
    return r, u


def ef_residual(profile: EmdenFowlerProfile, p: CknParameters, spec,
                route: str = "auto") -> np.ndarray:
    """Nodewise ``-phi'' + Lambda phi - Phi(e^{(a_c-a)s} phi) phi^{(n+2)/(n-2)}``.

    ``route="exact"`` uses the stored second derivative, ``"fd"`` fourth
    order differences on the uniform grid (one-sided at the ends); ``"auto"``
    prefers the stored derivative.
    """
    from .fields import diff_uniform

    if route == "auto":
        route = "exact" if profile.d2phi is not None else "fd"
    if route == "exact":
        d2 = profile.d2phi
    else:
        d2 = diff_uniform(profile.phi, 0, profile.ds, 2, 4, one_sided=True)
    c = p.a_c - p.a
    gamma = p.critical_exponent
    u = np.exp(c * profile.s) * profile.phi
    # Phi(u) phi^gamma = f(u) u^{-gamma} phi^gamma = f(u) e^{-c gamma s}
    rhs = spec.f(u) * np.exp(-c * gamma * profile.s)
    return -d2 + profile.lambda_ef * profile.phi - rhs


# ---------------------------------------------------------------------------
# transform chain u -> w -> v


def v_jet(sol: RadialSolution, rho):
    """``(v, v', v'')`` in the variable ``rho = r^alpha`` where
    ``w(rho) = u(rho^{1/alpha})`` and ``v = w^{-2/(n-2)}``.

    ``w''`` is assembled from ``u''`` (the equation in ``r``), so the
    equation in ``rho`` is an independent consequence.
    """
    p = sol.params
    al, n = p.alpha, p.n
    rho = np.asarray(rho, dtype=float)
    r = rho ** (1.0 / al)
    u, du, _ = sol.evaluate(r)
    d2u = sol.second_derivative(r, u, du)
    j = r / (al * rho)  # dr/drho
    w, dw = u, du * j
    d2w = d2u * j * j + du * (1.0 - al) * r / (al * al * rho * rho)
    m = 2.0 / (n - 2.0)
    v = w ** (-m)
    dv = -m * w ** (-m - 1.0) * dw
    d2v = -m * w ** (-m - 1.0) * d2w + m * (m + 1.0) * w ** (-m - 2.0) * dw * dw
    return v, dv, d2v


def radial_cartesian_jet(rho, v1, v2, d: int):
    """``(x, Dv, D^2 v)`` for a radial function on the ``x_d`` axis."""
    rho = np.asarray(rho, dtype=float)
    e = np.zeros(rho.shape + (d,))
    e[..., -1] = 1.0
    x = rho[..., None] * e
    eye = np.eye(d)
    P = eye - e[..., :, None] * e[..., None, :]
    Dv = v1[..., None] * e
    D2v = v2[..., None, None] * (eye - P) + (v1 / rho)[..., None, None] * P
    return x, Dv, D2v


def transform_residual(sol: RadialSolution, rho=None) -> float:
    """Max of ``|Lv - hat f(v) - (n/2)|grad v|_g^2 / v|`` along the radius,
    with ``L`` and ``|grad v|_g`` from the pointwise algebra of
    :mod:`cknlab.fields`."""
    p = sol.params
    if rho is None:
        rho = np.geomspace((10 * sol.eps0) ** p.alpha, sol.R**p.alpha, 200)
    v, v1, v2 = v_jet(sol, rho)
    x, Dv, D2v = radial_cartesian_jet(rho, v1, v2, p.d)
    q = jet_quantities(x, Dv, D2v, p.alpha, p.n)
    res = q.Lv - hat_f(sol.spec, p, v) - 0.5 * p.n * q.grad_sq / v
    return float(np.max(np.abs(res)))


def probe_field(sol: RadialSolution, eps: float, ell: int = 1):
    """Axisymmetric test field ``v(rho, theta)`` (``d = 3``) built from
    ``w = w_sol(rho) + eps rho^gamma P_ell(cos theta)``, where ``gamma > 0``
    solves ``alpha^2 gamma (gamma + n - 2) = ell (ell + 1)`` so the added
    mode is annihilated by the linearised operator."""
    p = sol.params
    al, n = p.alpha, p.n
    lam = ell * (ell + 1.0)
    gam = 0.5 * (-(n - 2.0) + math.sqrt((n - 2.0) ** 2 + 4.0 * lam / al**2))
    leg = np.polynomial.legendre.Legendre.basis(ell)

    def func(rho, theta):
        rho = np.asarray(rho, dtype=float)
        flat = np.unique(rho.ravel())
        r = np.clip(flat ** (1.0 / al), sol.eps0, sol.R)
        u, _, _ = sol.evaluate(r)
        w = np.interp(rho, flat, u) + eps * rho**gam * leg(np.cos(theta))
        return w ** (-2.0 / (n - 2.0))

    func.exponent = gam
    return func


# ---------------------------------------------------------------------------
# asymptotics


def fit_exponent(radii, values, floor: float = 1e-280) -> float:
    """Slope of ``log values`` against ``log radii``; ``+inf`` for an
    identically vanishing quantity."""
    radii = np.asarray(radii, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.all(values <= floor):
        return math.inf
    keep = values > floor
    return float(np.polyfit(np.log(radii[keep]), np.log(values[keep]), 1)[0])


@dataclass
class AsymptoticsReport:
    radii: np.ndarray
    quantities: dict
    exponents: dict
    decay_rate: float
    sqrt_lambda: float
    slack: float
    rate_tolerance: float

    @property
    def items_pass(self) -> dict:
        need = {"item1": 0.0, "item2": 2.0, "item3": 0.0, "item4": 0.0}
        return {k: self.exponents[k] >= need[k] - self.slack for k in need}

    @property
    def decay_pass(self) -> bool:
        return abs(self.decay_rate - self.sqrt_lambda) <= self.rate_tolerance * self.sqrt_lambda

    @property
    def passed(self) -> bool:
        return all(self.items_pass.values()) and self.decay_pass

    def as_dict(self) -> dict:
        return {"radii": self.radii.tolist(),
                "quantities": {k: np.asarray(v).tolist() for k, v in self.quantities.items()},
                "exponents": self.exponents, "decay_rate": self.decay_rate,
                "sqrt_lambda": self.sqrt_lambda, "items_pass": self.items_pass,
                "decay_pass": self.decay_pass, "passed": self.passed}


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def check_asymptotics(obj, p: CknParameters | None = None, radii=None, slack: float = 0.3,
                      rate_tolerance: float = 0.05, rows: slice | None = None) -> AsymptoticsReport:
    """Sphere integrals of ``|v'|^2``, ``|grad_omega v|^2``,
    ``|grad_omega v'|^2`` and ``|grad_omega v' - grad_omega v / rho|^2`` on
    shrinking spheres, their fitted growth exponents, and the decay rate of
    the Emden--Fowler profile against ``sqrt(Lambda)``.

    ``obj`` is a :class:`RadialSolution` or a positive :class:`ScalarField`
    on an :class:`AxiPolarGrid` with ``r_min = 0`` holding ``v`` as a
    function of ``(rho, theta)``.
    """
    if isinstance(obj, RadialSolution):
        p = obj.params if p is None else p
        if radii is None:
            lo = (100 * obj.eps0) ** p.alpha
            radii = np.geomspace(obj.R**p.alpha / 8, lo, 9)
        radii = np.asarray(radii, dtype=float)
        _, v1, _ = v_jet(obj, radii)
        area = _sphere_area(p.d)
        zero = np.zeros_like(radii)
        quantities = {"item1": area * v1**2, "item2": zero, "item3": zero, "item4": zero}
        prof = ef_transform(obj)
        rate = prof.decay_rate()
    else:
        if not isinstance(obj, ScalarField) or not isinstance(obj.grid, AxiPolarGrid):
            raise TypeError("expected a RadialSolution or a polar ScalarField")
        if p is None:
            raise TypeError("parameters are required for grid fields")
        obj.require_positive()
        g = obj.grid
        vr, _, vt, _, vrt = _polar_partials(obj)
        rows = slice(g.order + 1, max(g.order + 4, g.n_r // 4)) if rows is None else rows
        radii = g.r[rows]
        wt = g.sphere_weights()
        quantities = {
            "item1": (vr[rows] ** 2) @ wt,
            "item2": (vt[rows] ** 2) @ wt,
            "item3": (vrt[rows] ** 2) @ wt,
            "item4": ((vrt[rows] - vt[rows] / radii[:, None]) ** 2) @ wt,
        }
        # phi from the sphere mean of u = v^{-(n-2)/2} at r = rho^{1/alpha}
        sel = g.r > 0
        u_mean = (obj.values[sel] ** (-(p.n - 2.0) / 2.0)) @ wt / wt.sum()
        s = -np.log(g.r[sel]) / p.alpha
        phi = np.exp(-(p.a_c - p.a) * s) * u_mean
        k = max(3, len(s) // 4)
        rate = float(-np.polyfit(s[:k], np.log(phi[:k]), 1)[0])
    exps = {k: fit_exponent(radii, q) for k, q in quantities.items()}
    return AsymptoticsReport(np.asarray(radii), quantities, exps, rate, p.sqrt_lambda,
                             slack, rate_tolerance)


# ---------------------------------------------------------------------------
# export


def export_solution_csv(sol: RadialSolution, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "du", "F"])
        for row in zip(sol.r, sol.u, sol.du, sol.F):
            w.writerow([repr(float(x)) for x in row])


def export_scan_csv(report: ScanReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u0_root", "classification", "oscillation"])
        for sol in report:
            w.writerow([repr(sol.u0), sol.classification, repr(sol.oscillation)])
