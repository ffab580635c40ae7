"""The map ``T(x) = |x|^{alpha-1} x``, the pulled-back metric ``g`` and the
boundary-curvature checks built on them.

Boundaries come in three flavours: balls centred at the origin, balls centred
elsewhere, and radial graphs ``x = c + rho(omega) omega`` about an interior
reference point ``c``. Second fundamental forms are positive on spheres.

Radial graphs are stored as samples on a uniform angular grid:

* ``d = 2``: ``theta_k = 2 pi k / N``, ``k = 0..N-1``;
* ``d = 3``: ``theta_j = (j + 1/2) pi / N_theta`` (polar angle, cell centred so
  the poles are never sampled) and ``phi_k = 2 pi k / N_phi``.

Between samples ``rho`` is the trigonometric interpolant (a double Fourier
series on the sphere when ``d = 3``), differentiated exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ConstructionError,
    DegenerateFrameError,
    DomainError,
    OriginError,
    OriginOnBoundaryError,
)

__all__ = [
    "map_T",
    "map_T_inverse",
    "jacobian_T",
    "Metric",
    "metric_at",
    "christoffel",
    "SurfacePointData",
    "OriginBall",
    "OffsetBall",
    "RadialGraph",
    "surface_data",
    "MarginReport",
    "condition_margin",
    "ball_criterion",
    "ball_margin_exact",
    "conformal_ii",
    "mapped_surface_ii",
    "is_g_convex",
    "is_convex",
    "example_domains",
    "psd_tolerance",
]

PSD_RTOL = 1e-8


def psd_tolerance(ii) -> float:
    """Semidefiniteness slack ``1e-8 (1 + ||ii||)``."""
    return PSD_RTOL * (1.0 + float(np.linalg.norm(ii, 2)))


# ---------------------------------------------------------------------------
# the map and the metric


def map_T(x, alpha: float):
    """``T(x) = |x|^{alpha-1} x``; the origin is a fixed point. Accepts a point
    or an array of points along the last axis."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    scale = np.where(r > 0, np.power(np.where(r > 0, r, 1.0), alpha - 1.0), 0.0)
    return scale * x


def map_T_inverse(y, alpha: float):
    """``T^{-1}(y) = |y|^{1/alpha - 1} y``."""
    return map_T(y, 1.0 / alpha)


def jacobian_T(x, alpha: float) -> np.ndarray:
    """``DT(x) = |x|^{alpha-1} (I + (alpha-1) xhat xhat^T)``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0:
        raise OriginError("T is not differentiable at the origin")
    xh = x / r
    return r ** (alpha - 1.0) * (np.eye(x.size) + (alpha - 1.0) * np.outer(xh, xh))


class Metric(NamedTuple):
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det: float


def metric_at(x, alpha: float) -> Metric:
    """``g = I + (1/alpha^2 - 1) xhat xhat^T`` and its inverse at ``x``.

    ``sqrt_det`` is computed from the assembled matrix rather than taken
    from the closed form ``1/alpha``.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0:
        raise OriginError("the metric is singular at the origin")
    P = np.outer(x, x) / (r * r)
    eye = np.eye(x.size)
    g = eye + (1.0 / alpha**2 - 1.0) * P
    g_inv = eye + (alpha**2 - 1.0) * P
    return Metric(g, g_inv, float(math.sqrt(np.linalg.det(g))))


def christoffel(x, alpha: float) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, i, j] = (1 - alpha^2) P_ij x_k / |x|^2``
    with ``P = I - xhat xhat^T``."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 == 0:
        raise OriginError("Christoffel symbols are singular at the origin")
    P = np.eye(x.size) - np.outer(x, x) / r2
    return (1.0 - alpha**2) * x[:, None, None] * P[None, :, :] / r2


# ---------------------------------------------------------------------------
# boundaries


@dataclass(frozen=True)
class SurfacePointData:
    x: np.ndarray
    nu: np.ndarray
    ii: np.ndarray
    frame: np.ndarray  # rows are orthonormal tangent vectors


def _tangent_basis(omega: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the complement of ``omega``."""
    d = omega.size
    if d == 2:
        return np.array([[-omega[1], omega[0]]])
    if d == 3 and math.hypot(omega[0], omega[1]) > 1e-2:
        # spherical-coordinate frame (e_theta, e_phi)
        st = math.hypot(omega[0], omega[1])
        cp, sp = omega[0] / st, omega[1] / st
        return np.array([[omega[2] * cp, omega[2] * sp, -st], [-sp, cp, 0.0]])
    q, _ = np.linalg.qr(np.column_stack([omega, np.eye(d)]))
    basis = q[:, 1:d].T
    return basis - np.outer(basis @ omega, omega)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class _Boundary:
    d: int
    center: np.ndarray

    def _as_direction(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float).ravel()
        if omega.size == self.d:
            nrm = np.linalg.norm(omega)
            if nrm == 0:
                raise DomainError("direction must be nonzero")
            return omega / nrm
        if omega.size == self.d - 1 and self.d in (2, 3):
            return angles_to_direction(omega)
        raise DomainError(f"parameter point must have {self.d} or {self.d - 1} entries")

    def point(self, omega) -> np.ndarray:
        omega = _unit(omega)
        return self.center + self.radius_at(omega)[..., None] * omega

    def contains_origin(self) -> bool:
        c = np.linalg.norm(self.center)
        if c == 0:
            return True
        return bool(c < self.radius_at(-self.center / c))

    def check_origin(self, rtol: float = 1e-12):
        c = np.linalg.norm(self.center)
        if c == 0:
            return
        rho = float(self.radius_at(-self.center / c))
        if abs(rho - c) <= rtol * max(rho, c):
            raise OriginOnBoundaryError("the origin lies on the boundary")


def angles_to_direction(angles) -> np.ndarray:
    """``theta`` (d=2) or ``(theta, phi)`` (d=3, theta polar) to a unit vector."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape[-1] == 1:
        t = angles[..., 0]
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    t, p = angles[..., 0], angles[..., 1]
    st = np.sin(t)
    return np.stack([st * np.cos(p), st * np.sin(p), np.cos(t)], axis=-1)


class OriginBall(_Boundary):
    def __init__(self, R: float, d: int = 3):
        if not R > 0:
            raise DomainError("R must be positive")
        self.R = float(R)
        self.d = int(d)
        self.center = np.zeros(self.d)

    def radius_at(self, omega):
        return np.full(np.shape(omega)[:-1], self.R)

    def __repr__(self):
        return f"OriginBall(R={self.R}, d={self.d})"


class OffsetBall(_Boundary):
    def __init__(self, center, R: float):
        if not R > 0:
            raise DomainError("R must be positive")
        self.center = np.asarray(center, dtype=float).ravel()
        self.R = float(R)
        self.d = self.center.size

    def radius_at(self, omega):
        return np.full(np.shape(omega)[:-1], self.R)

    def __repr__(self):
        return f"OffsetBall(center={self.center.tolist()}, R={self.R})"


class RadialGraph(_Boundary):
    """Star-shaped boundary ``x = center + rho(omega) omega`` (d = 2 or 3).

    Parameters
    ----------
    rho : ndarray
        Samples on the grid documented in the module docstring: shape
        ``(N,)`` for ``d = 2`` and ``(N_theta, N_phi)`` for ``d = 3``
        (``N_phi`` even).
    center : array_like, optional
        Interior reference point; defaults to the origin.
    """

    pole_guard = 1e-2  # sin(theta) below which derivatives switch to great-circle FD
    fd_step = 1e-3

    def __init__(self, rho, center=None):
        rho = np.asarray(rho, dtype=float)
        if rho.ndim not in (1, 2):
            raise DomainError("rho must be 1-D (d=2) or 2-D (d=3)")
        if np.any(~(rho > 0)):
            raise DomainError("rho must be positive")
        self.rho = rho
        self.d = rho.ndim + 1
        self.center = np.zeros(self.d) if center is None else np.asarray(center, float).ravel()
        if self.center.size != self.d:
            raise DomainError("center dimension does not match rho")
        if self.d == 2:
            n = rho.size
            self._coef = np.fft.fft(rho) / n
            self._m = np.fft.fftfreq(n, 1.0 / n)
        else:
            nt, nphi = rho.shape
            if nphi % 2:
                raise DomainError("N_phi must be even")
            # double Fourier sphere: theta in (pi, 2pi) maps to (2pi - theta, phi + pi)
            ext = np.concatenate([rho, np.roll(rho[::-1], nphi // 2, axis=1)], axis=0)
            self._coef = np.fft.fft2(ext) / ext.size
            self._m = np.fft.fftfreq(2 * nt, 1.0 / (2 * nt))
            self._k = np.fft.fftfreq(nphi, 1.0 / nphi)
            self._theta0 = 0.5 * np.pi / nt

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def grid(d: int, n_theta: int, n_phi: int | None = None):
        """Grid angles: ``theta`` for d=2, ``(theta, phi)`` meshes for d=3."""
        if d == 2:
            return (2.0 * np.pi * np.arange(n_theta) / n_theta,)
        n_phi = 2 * n_theta if n_phi is None else n_phi
        t = (np.arange(n_theta) + 0.5) * np.pi / n_theta
        p = 2.0 * np.pi * np.arange(n_phi) / n_phi
        return tuple(np.meshgrid(t, p, indexing="ij"))

    @classmethod
    def from_function(cls, func, d: int = 3, center=None, n_theta: int = 64,
                      n_phi: int | None = None) -> "RadialGraph":
        """Sample ``func(omega)`` (unit vectors along the last axis)."""
        angles = np.stack(cls.grid(d, n_theta, n_phi), axis=-1)
        return cls(func(angles_to_direction(angles)), center)

    # -- interpolation -------------------------------------------------------
    def _series(self, theta, phi=None, orders=((0, 0),)):
        """Derivatives ``d^a/dtheta^a d^b/dphi^b`` of the interpolant."""
        theta = np.atleast_1d(theta)
        if self.d == 2:
            E = np.exp(1j * np.outer(theta, self._m))
            return [np.real(E @ (self._coef * (1j * self._m) ** a)) for a, _ in orders]
        phi = np.atleast_1d(phi)
        Et = np.exp(1j * np.outer(theta - self._theta0, self._m))
        Ep = np.exp(1j * np.outer(phi, self._k))
        out = []
        cache = {}
        for a, b in orders:
            if b not in cache:
                cache[b] = (Ep * (1j * self._k) ** b) @ self._coef.T  # (P, M)
            out.append(np.real(np.sum(Et * (1j * self._m) ** a * cache[b], axis=1)))
        return out

    def _angles(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.d == 2:
            return np.arctan2(omega[..., 1], omega[..., 0]), None
        theta = np.arctan2(np.hypot(omega[..., 0], omega[..., 1]), omega[..., 2])
        phi = np.arctan2(omega[..., 1], omega[..., 0])
        return theta, phi

    def radius_at(self, omega):
        omega = np.asarray(omega, dtype=float)
        shape = omega.shape[:-1]
        flat = omega.reshape(-1, self.d)
        t, p = self._angles(flat)
        return self._series(t, p)[0].reshape(shape)

    def sphere_derivatives(self, omega, basis):
        """Value, covariant gradient and Hessian of ``rho`` on the unit sphere
        at ``omega`` in the orthonormal tangent basis ``basis`` (rows)."""
        t, p = self._angles(omega[None, :])
        if self.d == 2:
            r, rt, rtt = self._series(t, None, ((0, 0), (1, 0), (2, 0)))
            # basis row is +/- e_theta
            s = float(basis[0] @ np.array([-math.sin(t[0]), math.cos(t[0])]))
            return float(r[0]), np.array([s * rt[0]]), np.array([[rtt[0]]])
        st = math.sin(t[0])
        if st < self.pole_guard:
            return self._great_circle_derivatives(omega, basis)
        r, rt, rp, rtt, rtp, rpp = (float(v[0]) for v in self._series(
            t, p, ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))))
        ct = math.cos(t[0]) / st
        grad_sph = np.array([rt, rp / st])
        hess_sph = np.array([[rtt, (rtp - ct * rp) / st],
                             [(rtp - ct * rp) / st, rpp / st**2 + ct * rt]])
        sph = _spherical_frame(omega)
        A = basis @ sph.T  # change of orthonormal frame
        return r, A @ grad_sph, A @ hess_sph @ A.T

    def _great_circle_derivatives(self, omega, basis):
        h = self.fd_step
        steps = np.array([-2, -1, 0, 1, 2], dtype=float) * h
        w1 = np.array([1, -8, 0, 8, -1]) / (12 * h)
        w2 = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
        k = basis.shape[0]
        dirs = [basis[i] for i in range(k)]
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        for i, j in pairs:
            dirs.append((basis[i] + basis[j]) / math.sqrt(2))
            dirs.append((basis[i] - basis[j]) / math.sqrt(2))
        pts = np.array([np.cos(s) * omega + np.sin(s) * u for u in dirs for s in steps])
        vals = self.radius_at(pts).reshape(len(dirs), steps.size)
        d1 = vals @ w1
        d2 = vals @ w2
        hess = np.diag(d2[:k])
        for m, (i, j) in enumerate(pairs):
            hess[i, j] = hess[j, i] = 0.5 * (d2[k + 2 * m] - d2[k + 2 * m + 1])
        return float(vals[0, 2]), d1[:k], hess

    # -- io -----------------------------------------------------------------------
    def to_csv(self, path):
        angles = self.grid(self.d, *self.rho.shape)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "rho"] if self.d == 2 else ["theta", "phi", "rho"])
            w.writerow(["#center"] + [repr(float(c)) for c in self.center])
            cols = [a.ravel() for a in angles] + [self.rho.ravel()]
            for row in zip(*cols):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "RadialGraph":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        center = None
        if body and body[0][0] == "#center":
            center = [float(v) for v in body[0][1:]]
            body = body[1:]
        data = np.array(body, dtype=float)
        if header == ["theta", "rho"]:
            return cls(data[:, 1], center)
        if header == ["theta", "phi", "rho"]:
            nt = np.unique(data[:, 0]).size
            return cls(data[:, 2].reshape(nt, -1), center)
        raise DomainError(f"unrecognised header {header}")

    def __repr__(self):
        return f"RadialGraph(d={self.d}, shape={self.rho.shape}, center={self.center.tolist()})"


def _spherical_frame(omega):
    st = math.hypot(omega[0], omega[1])
    cp, sp = omega[0] / st, omega[1] / st
    return np.array([[omega[2] * cp, omega[2] * sp, -st], [-sp, cp, 0.0]])


DomainBoundary = (OriginBall, OffsetBall, RadialGraph)


# ---------------------------------------------------------------------------
# surface data


def surface_data(b, omega) -> SurfacePointData:
    """Point, outward unit normal and second fundamental form at the boundary
    point in direction ``omega`` from the reference point.

    ``omega`` is a unit vector, or the angles ``theta`` / ``(theta, phi)``.
    """
    omega = b._as_direction(omega)
    basis = _tangent_basis(omega)
    if isinstance(b, (OriginBall, OffsetBall)):
        return SurfacePointData(b.center + b.R * omega, omega.copy(),
                                np.eye(b.d - 1) / b.R, basis)
    rho, grad, hess = b.sphere_derivatives(omega, basis)
    W = math.sqrt(rho * rho + grad @ grad)
    E = grad[:, None] * omega[None, :] + rho * basis       # tangent vectors
    first = E @ E.T
    second = (rho * rho * np.eye(b.d - 1) + 2.0 * np.outer(grad, grad) - rho * hess) / W
    try:
        L = np.linalg.cholesky(first)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFrameError("tangent vectors are dependent") from exc
    if np.linalg.cond(first) > 1e12:
        raise DegenerateFrameError("tangent vectors are nearly dependent")
    Li = np.linalg.inv(L)
    frame = Li @ E
    ii = Li @ second @ Li.T
    nu = (rho * omega - grad @ basis) / W
    return SurfacePointData(b.center + rho * omega, nu, 0.5 * (ii + ii.T), frame)


def _sample_directions(b, sampling: int) -> np.ndarray:
    sampling = max(int(sampling), 4)
    d = b.d
    if d == 2:
        t = 2.0 * np.pi * np.arange(sampling) / sampling
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    # great circle through the direction of the origin, where ball minima lie
    c = np.linalg.norm(b.center)
    axis = -b.center / c if c > 0 else np.eye(d)[-1]
    perp = _tangent_basis(axis)[0]
    t = 2.0 * np.pi * np.arange(sampling) / sampling
    circle = np.cos(t)[:, None] * axis + np.sin(t)[:, None] * perp
    if d == 3:
        th, ph = RadialGraph.grid(3, sampling, 2 * sampling)
        grid = angles_to_direction(np.stack([th.ravel(), ph.ravel()], axis=-1))
        return np.concatenate([circle, grid, axis[None, :]])
    return np.concatenate([circle, np.eye(d), -np.eye(d)])


def _margin_at(b, omega, alpha) -> tuple[float, SurfacePointData]:
    s = surface_data(b, omega)
    lam = float(np.linalg.eigvalsh(s.ii)[0])
    return lam - (1.0 - alpha) * float(s.x @ s.nu) / float(s.x @ s.x), s


@dataclass(frozen=True)
class MarginReport:
    min_margin: float
    argmin: np.ndarray
    direction: np.ndarray
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.min_margin >= -self.tolerance


def _refine(fun, omega0, d):
    basis = _tangent_basis(omega0)

    def chart(s):
        return _unit(omega0 + s @ basis)

    res = minimize(lambda s: fun(chart(s)), np.zeros(d - 1), method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "initial_simplex":
                            1e-2 * np.vstack([np.zeros(d - 1), np.eye(d - 1)])})
    return chart(res.x), float(res.fun)


def condition_margin(b, alpha: float, sampling: int = 64) -> MarginReport:
    """Minimum over the boundary of ``lambda_min(II) - (1-alpha)(x.nu)/|x|^2``.

    Dense sampling (``sampling`` points per angular direction) followed by a
    Nelder--Mead refinement from the best sample.
    """
    b.check_origin()
    dirs = _sample_directions(b, sampling)
    vals = np.array([_margin_at(b, w, alpha)[0] for w in dirs])
    i = int(np.argmin(vals))
    best_dir, best = dirs[i], float(vals[i])
    w, val = _refine(lambda u: _margin_at(b, u, alpha)[0], best_dir, b.d)
    if val < best:
        best_dir, best = w, val
    s = surface_data(b, best_dir)
    return MarginReport(best, s.x, best_dir, psd_tolerance(s.ii))


def ball_margin_exact(x0_norm: float, R: float, alpha: float) -> float:
    """Closed-form minimum of the ball margin over the sphere."""
    c = R / x0_norm if x0_norm > 0 else math.inf
    if x0_norm == 0:
        return alpha / R
    t = -1.0 if x0_norm < R else 1.0
    return 1.0 / R - (1.0 - alpha) / x0_norm * (c + t) / (1.0 + c * c + 2.0 * c * t)


def ball_criterion(x0_norm: float, R: float, alpha: float) -> bool:
    """Whether a ball of radius ``R`` centred at distance ``x0_norm`` from the
    origin satisfies the curvature condition: ``x0_norm <= alpha R`` or
    ``x0_norm > R``."""
    if not R > 0 or not 0 < alpha <= 1 or x0_norm < 0:
        raise DomainError("need R > 0, 0 < alpha <= 1, x0_norm >= 0")
    if x0_norm == R:
        raise DomainError("the origin lies on the sphere")
    return bool(x0_norm <= alpha * R or x0_norm > R)


def conformal_ii(ii, x, nu, alpha: float) -> np.ndarray:
    """Second fundamental form of ``T(boundary)`` in the metric ``g`` at
    ``T(x)``, evaluated on ``T_* e_i`` for the orthonormal frame of ``ii``."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 == 0:
        raise OriginError("x must differ from the origin")
    ii = np.asarray(ii, dtype=float)
    return r2 ** ((alpha - 1.0) / 2.0) * (
        ii + (alpha - 1.0) * float(x @ np.asarray(nu, float)) / r2 * np.eye(ii.shape[0]))


def mapped_surface_ii(b, omega, alpha: float, h: float = 1e-3) -> np.ndarray:
    """Independent route to :func:`conformal_ii`: differentiate ``Y = T(X(s))``
    numerically in a local chart and evaluate
    ``II^g(Y_i, Y_j) = -g(nu_g, Y_ij + Gamma(Y_i, Y_j))``.

    The result is expressed on ``T_* e_i`` for the frame of
    ``surface_data(b, omega)``.
    """
    omega = b._as_direction(omega)
    s0 = surface_data(b, omega)
    k = b.d - 1
    basis = _tangent_basis(omega)

    def Y(s):
        return map_T(b.point(_unit(omega + s @ basis)), alpha)

    def X(s):
        return b.point(_unit(omega + s @ basis))

    w1 = {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}
    w2 = {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12}
    eye = np.eye(k)
    Yi = np.array([sum(w * Y(m * h * eye[i]) for m, w in w1.items()) / h for i in range(k)])
    Xi = np.array([sum(w * X(m * h * eye[i]) for m, w in w1.items()) / h for i in range(k)])
    Yij = np.empty((k, k, b.d))
    for i in range(k):
        Yij[i, i] = sum(w * Y(m * h * eye[i]) for m, w in w2.items()) / h**2
        for j in range(i + 1, k):
            acc = 0.0
            for mi, wi in w1.items():
                for mj, wj in w1.items():
                    acc = acc + wi * wj * Y(h * (mi * eye[i] + mj * eye[j]))
            Yij[i, j] = Yij[j, i] = acc / h**2
    y = map_T(s0.x, alpha)
    met = metric_at(y, alpha)
    gam = christoffel(y, alpha)
    # Euclidean normal of the image surface, oriented like DT(nu)
    _, _, vt = np.linalg.svd(Yi)
    n_e = vt[-1]
    if n_e @ (jacobian_T(s0.x, alpha) @ s0.nu) < 0:
        n_e = -n_e
    norm_g = math.sqrt(n_e @ met.g_inv @ n_e)
    acc = Yij + np.einsum("kab,ia,jb->ijk", gam, Yi, Yi)
    ii_chart = -(acc @ n_e) / norm_g
    # chart tangents X_i expressed in the orthonormal frame
    A = Xi @ s0.frame.T
    Ai = np.linalg.inv(A)
    out = Ai @ ii_chart @ Ai.T
    return 0.5 * (out + out.T)


def _min_eig_conformal(b, omega, alpha):
    s = surface_data(b, omega)
    c = conformal_ii(s.ii, s.x, s.nu, alpha)
    return float(np.linalg.eigvalsh(c)[0]), c


def is_g_convex(b, alpha: float, sampling: int = 64) -> bool:
    """Whether ``T(boundary)`` is convex in ``g``: the conformal second
    fundamental form is positive semidefinite at every sample (and at the
    refined minimiser)."""
    b.check_origin()
    dirs = _sample_directions(b, sampling)
    vals, tols = [], []
    for w in dirs:
        lam, c = _min_eig_conformal(b, w, alpha)
        vals.append(lam)
        tols.append(psd_tolerance(c))
    vals = np.array(vals)
    i = int(np.argmin(vals))
    if vals[i] < -tols[i]:
        return False
    w, val = _refine(lambda u: _min_eig_conformal(b, u, alpha)[0], dirs[i], b.d)
    return bool(val >= -psd_tolerance(_min_eig_conformal(b, w, alpha)[1]))


def is_convex(b, sampling: int = 64) -> bool:
    """Euclidean convexity of the sampled boundary (``II >= 0``)."""
    dirs = _sample_directions(b, sampling)
    worst = math.inf
    worst_dir = dirs[0]
    for w in dirs:
        s = surface_data(b, w)
        lam = float(np.linalg.eigvalsh(s.ii)[0]) + psd_tolerance(s.ii)
        if lam < worst:
            worst, worst_dir = lam, w
    if worst < 0:
        return False

    def fun(u):
        s = surface_data(b, u)
        return float(np.linalg.eigvalsh(s.ii)[0]) + psd_tolerance(s.ii)

    return bool(_refine(fun, worst_dir, b.d)[1] >= 0)


# ---------------------------------------------------------------------------
# example domains


EXAMPLE_KINDS = ("flattened", "dimpled", "perturbed")


def _flattened_rho(cos_t, R, depth, p):
    """Gauge of the intersection of the ball of radius ``R`` with the half
    space ``z - z_c >= -depth``, smoothed by an l^p sum of gauges."""
    below = np.maximum(0.0, -cos_t)
    return 1.0 / ((1.0 / R) ** p + (below / depth) ** p) ** (1.0 / p)


def example_domains(kind: str, alpha: float = 0.5, eps: float = 0.05,
                    R: float = 1.0, offset: float = 1.5, depth: float = 0.9,
                    smoothing: float = 8.0, dimple_depth: float = 0.004,
                    dimple_width: float = 0.15, n_theta: int = 48):
    """Example boundaries, all radial graphs in ``d = 3``.

    ``flattened``
        Ball of radius ``R`` centred at ``(0, 0, offset)`` (origin outside)
        whose cap facing the origin is cut flat at distance ``depth`` below
        the centre. Convex; satisfies the curvature condition.
    ``dimpled``
        The flattened ball with a shallow Gaussian dent of the given depth and
        width pushed into the flat face. Not convex, yet satisfies the
        condition because ``x.nu`` is bounded away from zero there.
    ``perturbed``
        Origin-centred ball with ``rho = R (1 + eps cos(2 theta))``.
    """
    if kind == "perturbed":
        return RadialGraph.from_function(
            lambda w: R * (1.0 + eps * (2.0 * w[..., 2] ** 2 - 1.0)),
            d=3, n_theta=n_theta)
    if kind not in ("flattened", "dimpled"):
        raise DomainError(f"unknown example kind {kind!r}; expected {EXAMPLE_KINDS}")
    if not offset > R:
        raise ConstructionError("the ball must not contain the origin")
    center = np.array([0.0, 0.0, offset])

    def rho(w):
        out = _flattened_rho(w[..., 2], R, depth, smoothing)
        if kind == "dimpled":
            # polar angle from the downward axis
            beta = np.arctan2(np.hypot(w[..., 0], w[..., 1]), -w[..., 2])
            out = out - dimple_depth * np.exp(-(np.tan(beta) * depth / dimple_width) ** 2)
        return out

    b = RadialGraph.from_function(rho, d=3, center=center, n_theta=n_theta)
    if kind == "dimpled":
        # the dent must sit where x.nu stays negative
        reach = math.atan(3.0 * dimple_width / depth)
        th, ph = RadialGraph.grid(3, n_theta, 2 * n_theta)
        sel = th.ravel() > np.pi - reach
        dirs = angles_to_direction(np.stack([th.ravel()[sel], ph.ravel()[sel]], axis=-1))
        worst = max(float(surface_data(b, w).x @ surface_data(b, w).nu) for w in dirs)
        if not worst < 0:
            raise ConstructionError(f"x.nu reaches {worst:.3g} >= 0 on the dented cap")
        if condition_margin(b, alpha, sampling=n_theta).min_margin < -psd_tolerance(np.eye(2)):
            raise ConstructionError("dent too deep: curvature condition fails")
        if is_convex(b, sampling=n_theta):
            raise ConstructionError("dent too shallow: the domain is still convex")
    return b
