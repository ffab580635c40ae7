"""Grid-sampled scalar fields and the differential operators of the metric
``g``: gradient, weighted Laplacian ``L``, Hessian, curvature terms and the
functional ``k[v]``.

Two grids are supported.

``AnnulusGrid``
    Cartesian lattice ``h Z^d`` restricted to ``r_min <= |x| <= r_max``. Field
    values are also stored on a ghost shell around the annulus so centred
    stencils never need one-sided closures.
``AxiPolarGrid``
    Axisymmetric ``(r, theta)`` grid in ``d = 3`` with ``theta`` in
    ``[0, pi]`` (both poles are nodes, handled by reflection).

All pointwise formulas live in :func:`jet_quantities`, which only needs the
position, the Euclidean gradient and the Euclidean Hessian of ``v``; every
grid reduces to it.

Snapshot files: CSV with columns ``x1..xd, value`` (or ``r, theta, value``)
and a binary file of little-endian float64 with one row per node
``(coords..., value)`` in row-major node order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, OriginError, PositivityError, StencilOutOfRange
from .params import CknParameters

__all__ = [
    "fd_weights",
    "AnnulusGrid",
    "AxiPolarGrid",
    "ScalarField",
    "JetQuantities",
    "jet_quantities",
    "CurvatureTerms",
    "curvature_terms",
    "cartesian_jet",
    "polar_jet",
    "grad_g",
    "norm_sq_g",
    "op_L",
    "hessian_g",
    "norm_sq",
    "k_functional",
    "export_csv",
    "export_binary",
    "QuadraticField",
    "TrigField",
    "AxiTrigField",
    "random_trig_field",
    "random_axi_field",
]


# ---------------------------------------------------------------------------
# finite differences


def fd_weights(offsets, m: int) -> np.ndarray:
    """Weights of the ``m``-th derivative at 0 from samples at ``offsets``
    (Fornberg's recursion)."""
    z = np.asarray(offsets, dtype=float)
    n = z.size
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, z[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5 = 1.0, c4
        c4 = z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def diff_uniform(a, axis: int, h: float, m: int, order: int, one_sided: bool = False):
    """``m``-th derivative along ``axis`` on a uniform grid.

    Centred stencils of the requested even ``order``. Near the ends the
    result is NaN, or with ``one_sided`` a shifted stencil of the same order.
    """
    a = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    n = a.shape[0]
    half = order // 2 if m == 1 else (order + 1) // 2
    w = fd_weights(np.arange(-half, half + 1), m) / h**m
    out = np.full_like(a, np.nan)
    if n > 2 * half:
        acc = np.zeros_like(a[half:n - half])
        for k, wk in enumerate(w):
            acc = acc + wk * a[k:n - 2 * half + k]
        out[half:n - half] = acc
    if one_sided:
        size = order + m
        if n < size:
            raise StencilOutOfRange(f"need at least {size} nodes along the axis")
        for i in list(range(min(half, n))) + list(range(max(n - half, half), n)):
            start = min(max(i - size // 2, 0), n - size)
            wi = fd_weights(np.arange(start, start + size) - i, m) / h**m
            out[i] = np.tensordot(wi, a[start:start + size], axes=(0, 0))
    return np.moveaxis(out, 0, axis)


# ---------------------------------------------------------------------------
# pointwise algebra


class JetQuantities(NamedTuple):
    G: object          # g-gradient vector g^{-1} Dv
    grad_sq: object    # |grad v|_g^2
    H: object          # coordinate Hessian v_{;ij}
    hess_sq: object    # |H|_g^2
    lap_g: object      # Delta_g v
    Lv: object
    ang: object        # |grad_omega v|^2 / r^2
    ric: object
    h_weight: object
    k: object


def jet_quantities(x, Dv, D2v, alpha: float, n: float, xp=np,
                   weight_sign: float = -1.0, pairing: str = "g") -> JetQuantities:
    """All pointwise quantities of ``v`` from ``x``, ``Dv`` and ``D^2 v``.

    Shapes ``(..., d)``, ``(..., d)``, ``(..., d, d)``. ``xp`` is the array
    module (numpy or jax.numpy).

    ``weight_sign = -1`` takes the weight term as the g-Hessian of
    ``-(n-d) log|x|``, which is what makes ``L`` the drift Laplacian of the
    weight; ``+1`` reproduces the opposite sign. ``pairing`` selects how
    ``(grad v . x)`` is read: ``"g"`` pairs the g-gradient with ``x``,
    ``"euclidean"`` uses ``Dv``.
    """
    d = x.shape[-1]
    r2 = xp.sum(x * x, axis=-1)
    xD = xp.sum(x * Dv, axis=-1)
    a2 = alpha * alpha
    G = Dv + (a2 - 1.0) * x * (xD / r2)[..., None]
    grad_sq = xp.sum(Dv * G, axis=-1)
    eye = xp.eye(d)
    P = eye - x[..., :, None] * x[..., None, :] / r2[..., None, None]
    H = D2v - (1.0 - a2) * P * (xD / r2)[..., None, None]
    xH = xp.einsum("...i,...ij->...j", x, H)
    A = H + (a2 - 1.0) * x[..., :, None] * xH[..., None, :] / r2[..., None, None]
    hess_sq = xp.einsum("...ij,...ji->...", A, A)
    lap_g = xp.einsum("...ii->...", A)
    xG = a2 * xD
    Lv = lap_g + (n - d) * xG / r2
    pair = xG if pairing == "g" else xD
    vec = G if pairing == "g" else Dv
    ang = xp.sum(vec * vec, axis=-1) - pair * pair / r2
    ric = (1.0 - a2) * (d - 2.0) * ang / r2
    hw = weight_sign * (a2 * (n - d) * ang / r2 - (n - d) * pair * pair / (r2 * r2))
    k = hess_sq + ric + hw - Lv * Lv / n
    return JetQuantities(G, grad_sq, H, hess_sq, lap_g, Lv, ang, ric, hw, k)


class CurvatureTerms(NamedTuple):
    ric: float
    h_weight: float


def curvature_terms(x, grad, p: CknParameters, weight_sign: float = -1.0) -> CurvatureTerms:
    """``Ric_g(grad, grad)`` and the weight-Hessian term for a g-gradient
    vector ``grad`` at ``x``.

    ``(grad . x)`` is the Euclidean pairing of the g-gradient with ``x``;
    the angular part is ``|grad|^2 - (grad . x)^2/|x|^2`` with the Euclidean
    length of ``grad``, which equals ``|grad_omega v|^2 / |x|^2``.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    r2 = float(x @ x)
    if r2 == 0:
        raise OriginError("curvature terms are singular at the origin")
    a2 = p.alpha**2
    pair = float(grad @ x)
    ang = float(grad @ grad) - pair * pair / r2
    ric = (1.0 - a2) * (p.d - 2.0) * ang / r2
    hw = weight_sign * (a2 * (p.n - p.d) * ang / r2 - (p.n - p.d) * pair * pair / r2**2)
    return CurvatureTerms(ric, hw)


# ---------------------------------------------------------------------------
# grids


class AnnulusGrid:
    """Cartesian lattice on ``r_min <= |x| <= r_max`` with a ghost shell.

    Parameters
    ----------
    d : int
        3 or 4.
    r_min, r_max, h : float
        Annulus radii and lattice spacing; ``r_min >= 4 h``.
    order : int
        Stencil order, 2 or 4.
    levels : int
        Number of nested derivative applications the ghost shell must
        support.
    """

    def __init__(self, d: int, r_min: float, r_max: float, h: float,
                 order: int = 4, levels: int = 3):
        if d not in (3, 4):
            raise DomainError("annulus grids support d = 3 or 4")
        if not 0 < r_min < r_max:
            raise DomainError("need 0 < r_min < r_max")
        if r_min < 4 * h * (1 - 1e-12):
            raise DomainError("r_min must be at least 4h")
        if order not in (2, 4):
            raise DomainError("order must be 2 or 4")
        self.d, self.r_min, self.r_max, self.h = d, float(r_min), float(r_max), float(h)
        self.order, self.levels = order, levels
        self.ghost = levels * (order // 2) * h * math.sqrt(d)
        m = int(math.ceil((r_max + self.ghost) / h)) + 1
        self.axis = h * np.arange(-m, m + 1)
        mesh = np.meshgrid(*([self.axis] * d), indexing="ij")
        self.x = np.stack(mesh, axis=-1)
        self.r = np.linalg.norm(self.x, axis=-1)
        self.mask = (self.r >= self.r_min) & (self.r <= self.r_max)
        self.support = ((self.r >= self.r_min - self.ghost) & (self.r <= self.r_max + self.ghost)
                        & (self.r > 0))

    @property
    def shape(self):
        return self.r.shape

    def points(self) -> np.ndarray:
        return self.x[self.mask]

    def refined(self, factor: int = 2) -> "AnnulusGrid":
        return AnnulusGrid(self.d, self.r_min, self.r_max, self.h / factor,
                           self.order, self.levels)

    def volume_weights(self, subsamples: int = 4) -> np.ndarray:
        """Lattice-sum weights over the box: ``h^d`` times the fraction of
        each node's cell inside the annulus (estimated by midpoint
        subsampling on cells cut by the boundary)."""
        h, d = self.h, self.d
        w = np.where(self.mask, h**d, 0.0)
        cut = np.abs(self.r - self.r_min) <= h * math.sqrt(d) / 2
        cut |= np.abs(self.r - self.r_max) <= h * math.sqrt(d) / 2
        idx = np.argwhere(cut)
        s = (np.arange(subsamples) + 0.5) / subsamples - 0.5
        sub = np.stack(np.meshgrid(*([s] * d), indexing="ij"), axis=-1).reshape(-1, d) * h
        for i in idx:
            pts = self.x[tuple(i)] + sub
            rr = np.linalg.norm(pts, axis=-1)
            frac = np.mean((rr >= self.r_min) & (rr <= self.r_max))
            w[tuple(i)] = frac * h**d
        return w

    def __repr__(self):
        return (f"AnnulusGrid(d={self.d}, r_min={self.r_min}, r_max={self.r_max}, "
                f"h={self.h}, order={self.order})")


class AxiPolarGrid:
    """Axisymmetric grid ``r_i = r_min + i dr`` (``i < n_r``, last node
    ``r_max``), ``theta_j = j pi / (n_theta - 1)`` in ``d = 3``.

    ``ghost`` extra radial rows beyond each end are stored when fields are
    sampled from functions; with ``r_min = 0`` the inner ghost rows come from
    reflection through the origin instead.
    """

    d = 3

    def __init__(self, r_min: float, r_max: float, n_r: int, n_theta: int,
                 order: int = 4, ghost: int = 4):
        if not 0 <= r_min < r_max:
            raise DomainError("need 0 <= r_min < r_max")
        if n_r < order + 3 or n_theta < 5:
            raise DomainError("grid too coarse")
        self.r_min, self.r_max = float(r_min), float(r_max)
        self.n_r, self.n_theta, self.order, self.ghost = n_r, n_theta, order, ghost
        self.r = np.linspace(r_min, r_max, n_r)
        self.dr = self.r[1] - self.r[0]
        self.theta = np.linspace(0.0, np.pi, n_theta)
        self.dtheta = self.theta[1] - self.theta[0]
        self.R, self.TH = np.meshgrid(self.r, self.theta, indexing="ij")

    @property
    def shape(self):
        return (self.n_r, self.n_theta)

    def refined(self, factor: int = 2) -> "AxiPolarGrid":
        return AxiPolarGrid(self.r_min, self.r_max, (self.n_r - 1) * factor + 1,
                            (self.n_theta - 1) * factor + 1, self.order, self.ghost)

    def cartesian(self) -> np.ndarray:
        """Node positions ``(r sin theta, 0, r cos theta)``."""
        return np.stack([self.R * np.sin(self.TH), np.zeros_like(self.R),
                         self.R * np.cos(self.TH)], axis=-1)

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights for ``int f dx`` over the shell in ``R^3``
        (``2 pi r^2 sin theta dr dtheta``)."""
        wr = np.full(self.n_r, self.dr)
        wr[[0, -1]] *= 0.5
        wt = np.full(self.n_theta, self.dtheta)
        wt[[0, -1]] *= 0.5
        return 2.0 * np.pi * np.outer(wr * self.r**2, wt * np.sin(self.theta))

    def sphere_weights(self) -> np.ndarray:
        """Trapezoid weights for ``int f d sigma`` over the unit sphere."""
        wt = np.full(self.n_theta, self.dtheta)
        wt[[0, -1]] *= 0.5
        return 2.0 * np.pi * wt * np.sin(self.theta)

    def __repr__(self):
        return (f"AxiPolarGrid(r=[{self.r_min}, {self.r_max}], n_r={self.n_r}, "
                f"n_theta={self.n_theta})")


@dataclass(frozen=True)
class ScalarField:
    """Values of a function on a grid.

    For an :class:`AnnulusGrid` ``values`` covers the whole lattice box with
    NaN away from the annulus and its ghost shell. For an
    :class:`AxiPolarGrid` ``values`` has shape ``(n_r, n_theta)`` and the
    optional ``ghost_lo`` / ``ghost_hi`` rows extend it radially.
    """

    grid: object
    values: np.ndarray
    positive: bool = False
    ghost_lo: np.ndarray | None = None
    ghost_hi: np.ndarray | None = None
    source: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.positive:
            vals = self.values[np.isfinite(self.values)]
            if np.any(vals <= 0):
                raise PositivityError("field flagged positive has non-positive values")

    @classmethod
    def from_function(cls, grid, func, positive: bool = False) -> "ScalarField":
        """Sample ``func``: ``func(x)`` with ``x`` of shape ``(..., d)`` on an
        annulus, ``func(r, theta)`` on a polar grid."""
        if isinstance(grid, AnnulusGrid):
            vals = np.full(grid.shape, np.nan)
            vals[grid.support] = func(grid.x[grid.support])
            return cls(grid, vals, positive, source=func)
        g = grid.ghost
        dr = grid.dr
        hi_r = grid.r_max + dr * np.arange(1, g + 1)
        ghost_hi = func(*np.meshgrid(hi_r, grid.theta, indexing="ij"))
        ghost_lo = None
        if grid.r_min > 0:
            lo_r = grid.r_min - dr * np.arange(g, 0, -1)
            if lo_r[0] > 0:
                ghost_lo = func(*np.meshgrid(lo_r, grid.theta, indexing="ij"))
        return cls(grid, func(grid.R, grid.TH), positive, ghost_lo, ghost_hi, source=func)

    def interior(self) -> np.ndarray:
        if isinstance(self.grid, AnnulusGrid):
            return self.values[self.grid.mask]
        return self.values

    def map(self, fn, positive: bool = False) -> "ScalarField":
        lo = None if self.ghost_lo is None else fn(self.ghost_lo)
        hi = None if self.ghost_hi is None else fn(self.ghost_hi)
        return ScalarField(self.grid, fn(self.values), positive, lo, hi)

    def require_positive(self):
        vals = self.interior()
        if np.any(~(vals > 0)):
            raise PositivityError("field must be positive on the grid")


# ---------------------------------------------------------------------------
# jets on grids


def cartesian_jet(v: ScalarField):
    """Box arrays ``(x, Dv, D2v)`` on an annulus grid (NaN where the stencil
    leaves the stored region)."""
    g = v.grid
    h, o, d = g.h, g.order, g.d
    a = v.values
    Dv = np.stack([diff_uniform(a, i, h, 1, o) for i in range(d)], axis=-1)
    D2v = np.empty(a.shape + (d, d))
    for i in range(d):
        D2v[..., i, i] = diff_uniform(a, i, h, 2, o)
        for j in range(i + 1, d):
            D2v[..., i, j] = D2v[..., j, i] = diff_uniform(Dv[..., i], j, h, 1, o)
    return g.x, Dv, D2v


def _padded_r(v: ScalarField):
    """Values with radial ghost rows and the number of rows prepended."""
    g = v.grid
    rows = [v.values]
    lo = 0
    if g.r_min == 0:
        k = min(g.ghost, g.n_r - 1)
        # reflection through the origin: v(-r, theta) = v(r, pi - theta)
        rows.insert(0, v.values[k:0:-1, ::-1])
        lo = k
    elif v.ghost_lo is not None:
        rows.insert(0, v.ghost_lo)
        lo = v.ghost_lo.shape[0]
    if v.ghost_hi is not None:
        rows.append(v.ghost_hi)
    return np.concatenate(rows, axis=0), lo


def _polar_partials(v: ScalarField):
    g = v.grid
    o = g.order
    a, lo = _padded_r(v)
    k = o // 2 + 1
    # even reflection across both poles
    ext = np.concatenate([a[:, k:0:-1], a, a[:, -2:-k - 2:-1]], axis=1)
    sl = (slice(lo, lo + g.n_r), slice(k, k + g.n_theta))
    vt_ext = diff_uniform(ext, 1, g.dtheta, 1, o)
    vr = diff_uniform(ext, 0, g.dr, 1, o, one_sided=True)[sl]
    vrr = diff_uniform(ext, 0, g.dr, 2, o, one_sided=True)[sl]
    vt = vt_ext[sl]
    vtt = diff_uniform(ext, 1, g.dtheta, 2, o)[sl]
    vt_ext[:, k] = 0.0  # exact zero on the axis
    vt_ext[:, k + g.n_theta - 1] = 0.0
    vrt = diff_uniform(vt_ext, 0, g.dr, 1, o, one_sided=True)[sl]
    vt[:, [0, -1]] = 0.0
    vrt[:, [0, -1]] = 0.0
    return vr, vrr, vt, vtt, vrt


def polar_jet(v: ScalarField):
    """Cartesian ``(x, Dv, D2v)`` at the nodes ``(r sin t, 0, r cos t)`` of an
    axisymmetric polar grid, assembled from polar partial derivatives.

    Nodes at ``r = 0`` get NaN.
    """
    g = v.grid
    vr, vrr, vt, vtt, vrt = _polar_partials(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _polar_to_cartesian(g.R, g.TH, vr, vrr, vt, vtt, vrt)


def _polar_to_cartesian(R, TH, vr, vrr, vt, vtt, vrt):
    st, ct = np.sin(TH), np.cos(TH)
    on_axis = np.isclose(st, 0.0, atol=1e-14)
    cot_vt = np.where(on_axis, vtt, ct * vt / np.where(on_axis, 1.0, st))
    er = np.stack([st, np.zeros_like(st), ct], axis=-1)
    et = np.stack([ct, np.zeros_like(st), -st], axis=-1)
    ep = np.zeros_like(er)
    ep[..., 1] = 1.0
    Rs = np.where(R > 0, R, np.nan)
    Dv = vr[..., None] * er + (vt / Rs)[..., None] * et
    Hrr = vrr
    Hrt = vrt / Rs - vt / Rs**2
    Htt = vtt / Rs**2 + vr / Rs
    Hpp = vr / Rs + cot_vt / Rs**2

    def outer(a, b):
        return a[..., :, None] * b[..., None, :]

    D2v = (Hrr[..., None, None] * outer(er, er)
           + Hrt[..., None, None] * (outer(er, et) + outer(et, er))
           + Htt[..., None, None] * outer(et, et)
           + Hpp[..., None, None] * outer(ep, ep))
    x = Rs[..., None] * er
    return x, Dv, D2v


def _jet(v: ScalarField, p: CknParameters, **kw) -> JetQuantities:
    x, Dv, D2v = cartesian_jet(v) if isinstance(v.grid, AnnulusGrid) else polar_jet(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        return jet_quantities(x, Dv, D2v, p.alpha, p.n, **kw)


def _node_index(v: ScalarField, node):
    if node is None:
        return None
    node = tuple(int(i) for i in node)
    return node


def _pick(arr, v: ScalarField, node):
    if node is None:
        if isinstance(v.grid, AnnulusGrid):
            out = arr[v.grid.mask]
            if np.any(~np.isfinite(out)):
                raise StencilOutOfRange("stencil leaves the stored region")
            return out
        return arr
    out = arr[node]
    if np.any(~np.isfinite(out)):
        raise StencilOutOfRange(f"node {node} lacks stencil support")
    return out


def grad_g(v: ScalarField, p: CknParameters, node=None):
    """``g^{-1} Dv`` at ``node`` (a grid index tuple), or at every node of
    the annulus / polar grid when ``node`` is None."""
    return _pick(_jet(v, p).G, v, _node_index(v, node))


def norm_sq_g(v: ScalarField, p: CknParameters, node=None, route: str = "tensor"):
    """``|grad v|_g^2``. On polar grids ``route="polar"`` evaluates
    ``alpha^2 v_r^2 + v_theta^2 / r^2`` directly."""
    node = _node_index(v, node)
    if route == "polar":
        vr, _, vt, _, _ = _polar_partials(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            arr = p.alpha**2 * vr**2 + vt**2 / v.grid.R**2
        return _pick(arr, v, node)
    return _pick(_jet(v, p).grad_sq, v, node)


def op_L(v: ScalarField, p: CknParameters, route: str = "auto") -> ScalarField:
    """Weighted Laplacian ``L v``.

    Routes: ``"cartesian"`` (``Delta_g v + (n-d) g(grad log|x|, grad v)``),
    ``"divergence"`` (``|x|^{d-n} div(|x|^{n-d} grad v)`` by nested
    differences; annulus only), ``"polar"``
    (``alpha^2 (v_rr + (n-1) v_r / r) + Delta_omega v / r^2``; polar only).
    ``"auto"`` picks cartesian on annuli and polar on polar grids.
    """
    g = v.grid
    if route == "auto":
        route = "cartesian" if isinstance(g, AnnulusGrid) else "polar"
    if route == "cartesian":
        return ScalarField(g, _jet(v, p).Lv)
    if route == "divergence":
        if not isinstance(g, AnnulusGrid):
            raise DomainError("divergence route needs an annulus grid")
        G = _jet(v, p).G
        with np.errstate(divide="ignore", invalid="ignore"):
            wgt = g.r ** (p.n - p.d)
            div = sum(diff_uniform(wgt * G[..., i], i, g.h, 1, g.order) for i in range(g.d))
            return ScalarField(g, div / wgt)
    if route == "polar":
        if not isinstance(g, AxiPolarGrid):
            raise DomainError("polar route needs a polar grid")
        vr, vrr, vt, vtt, _ = _polar_partials(v)
        st = np.sin(g.TH)
        on_axis = np.isclose(st, 0.0, atol=1e-14)
        cot_vt = np.where(on_axis, vtt, np.cos(g.TH) * vt / np.where(on_axis, 1.0, st))
        with np.errstate(divide="ignore", invalid="ignore"):
            Rs = np.where(g.R > 0, g.R, np.nan)
            L = p.alpha**2 * (vrr + (p.n - 1.0) * vr / Rs) + (vtt + cot_vt) / Rs**2
        return ScalarField(g, L)
    raise DomainError(f"unknown route {route!r}")


def hessian_g(v: ScalarField, p: CknParameters, node=None):
    """Coordinate Hessian ``v_{;ij} = D_i D_j v - Gamma^k_ij D_k v``."""
    return _pick(_jet(v, p).H, v, _node_index(v, node))


def norm_sq(H, x, alpha: float) -> float:
    """``|H|_g^2 = tr((g^{-1} H)^2)`` for a coordinate Hessian at ``x``."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 == 0:
        raise OriginError("metric singular at the origin")
    g_inv = np.eye(x.size) + (alpha**2 - 1.0) * np.outer(x, x) / r2
    A = g_inv @ np.asarray(H, dtype=float)
    return float(np.trace(A @ A))


def k_functional(v: ScalarField, p: CknParameters, **kw) -> ScalarField:
    """``k[v] = |H_v|^2 + Ric_g(grad v, grad v) + H(grad v, grad v) - (Lv)^2/n``."""
    return ScalarField(v.grid, _jet(v, p, **kw).k)


# ---------------------------------------------------------------------------
# export


def _rows(v: ScalarField):
    g = v.grid
    if isinstance(g, AnnulusGrid):
        return g.points(), v.values[g.mask]
    return np.stack([g.R.ravel(), g.TH.ravel()], axis=-1), v.values.ravel()


def export_csv(v: ScalarField, path):
    coords, vals = _rows(v)
    g = v.grid
    names = ([f"x{i + 1}" for i in range(g.d)] if isinstance(g, AnnulusGrid)
             else ["r", "theta"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["value"])
        for c, val in zip(coords, vals):
            w.writerow([repr(float(t)) for t in c] + [repr(float(val))])


def export_binary(v: ScalarField, path):
    coords, vals = _rows(v)
    np.column_stack([coords, vals]).astype("<f8").tofile(path)


# ---------------------------------------------------------------------------
# manufactured fields (callable with numpy or jax.numpy)


@dataclass(frozen=True)
class QuadraticField:
    """``v = c + |x|^2 / (alpha^2 lam)``, for which ``L v = 2n/lam`` and
    ``k[v] = 0``."""

    c: float
    lam: float
    alpha: float

    def __call__(self, x, xp=np):
        return self.c + xp.sum(x * x, axis=-1) / (self.alpha**2 * self.lam)

    def polar(self, r, theta):
        return self.c + r * r / (self.alpha**2 * self.lam)


@dataclass(frozen=True)
class TrigField:
    """Positive trigonometric polynomial
    ``offset + sum_k a_k cos(kvec_k . x + phase_k)`` with
    ``offset > sum |a_k|``."""

    offset: float
    amplitudes: tuple
    wavevectors: tuple
    phases: tuple

    def __call__(self, x, xp=np):
        out = self.offset
        for a, k, ph in zip(self.amplitudes, self.wavevectors, self.phases):
            out = out + a * xp.cos(xp.sum(x * xp.asarray(k), axis=-1) + ph)
        return out

    def polar(self, r, theta):
        x = np.stack([r * np.sin(theta), np.zeros_like(r), r * np.cos(theta)], axis=-1)
        return self(x)

    @property
    def lower_bound(self) -> float:
        return self.offset - float(np.sum(np.abs(self.amplitudes)))


@dataclass(frozen=True)
class AxiTrigField:
    """Axisymmetric positive field
    ``offset + sum_k a_k cos(b_k z + c_k rho^2 + phase_k)``, ``rho^2 = x^2+y^2``
    (smooth in Cartesian coordinates)."""

    offset: float
    amplitudes: tuple
    bz: tuple
    c2: tuple
    phases: tuple

    def __call__(self, x, xp=np):
        z = x[..., 2]
        rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
        out = self.offset
        for a, b, c, ph in zip(self.amplitudes, self.bz, self.c2, self.phases):
            out = out + a * xp.cos(b * z + c * rho2 + ph)
        return out

    def polar(self, r, theta):
        z = r * np.cos(theta)
        rho2 = (r * np.sin(theta)) ** 2
        out = self.offset
        for a, b, c, ph in zip(self.amplitudes, self.bz, self.c2, self.phases):
            out = out + a * np.cos(b * z + c * rho2 + ph)
        return out


def random_trig_field(rng, d: int, terms: int = 3, max_wave: float = 2.0,
                      margin: float = 0.5) -> TrigField:
    """Random positive trigonometric polynomial in ``d`` variables."""
    amps = rng.uniform(-1.0, 1.0, terms) / terms
    waves = rng.uniform(-max_wave, max_wave, (terms, d))
    phases = rng.uniform(0, 2 * np.pi, terms)
    offset = float(np.sum(np.abs(amps))) + margin + rng.uniform(0, 1)
    return TrigField(offset, tuple(amps), tuple(map(tuple, waves)), tuple(phases))


def random_axi_field(rng, terms: int = 3, max_wave: float = 2.0,
                     margin: float = 0.5) -> AxiTrigField:
    amps = rng.uniform(-1.0, 1.0, terms) / terms
    offset = float(np.sum(np.abs(amps))) + margin + rng.uniform(0, 1)
    return AxiTrigField(offset, tuple(amps), tuple(rng.uniform(-max_wave, max_wave, terms)),
                        tuple(rng.uniform(-max_wave, max_wave, terms)),
                        tuple(rng.uniform(0, 2 * np.pi, terms)))
