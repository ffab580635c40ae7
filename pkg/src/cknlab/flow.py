"""Parabolic flow ``|x|^{-bq} u_t = div(|x|^{-2a} Du) + |x|^{-bq} f(u)`` with
zero Neumann flux, used to hunt for stable steady patterns.

Axisymmetric finite volumes in spherical coordinates ``(rho, theta)`` about
the domain centre on the ``x_3`` axis, which also carries the origin. The
diffusion is implicit and the reaction explicit::

    (M + dt K) u^{k+1} = M (u^k + dt f(u^k))

with ``M`` the lumped weighted cell masses and ``K`` the conductance
Laplacian. Since ``1^T K = 0`` the weighted mass balance
``sum M (u^{k+1} - u^k) / dt = sum M f(u^k)`` holds to rounding.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DomainError, PositivityLoss
from .geometry import OffsetBall, OriginBall, ball_margin_exact
from .params import CknParameters, classify_regime, derive_parameters, nonlinearity_from_dict, \
    phi_monotonicity

__all__ = [
    "Annulus",
    "FlowGrid",
    "FlowResult",
    "GateRecord",
    "evolve",
    "gate_record",
    "random_init",
    "sweep",
    "default_sweep_config",
    "config_hash",
    "append_jsonl",
    "read_jsonl",
    "consistency_violations",
]

CONSTANT_RTOL = 1e-6
PATTERN_RTOL = 1e-3


class Annulus:
    """Origin-centred shell ``r_in < |x| < R``."""

    def __init__(self, r_in: float, R: float, d: int = 3):
        if not 0 < r_in < R:
            raise DomainError("need 0 < r_in < R")
        self.r_in, self.R, self.d = float(r_in), float(R), d
        self.center = np.zeros(d)

    def __repr__(self):
        return f"Annulus(r_in={self.r_in}, R={self.R})"


def _axis_offset(domain) -> float:
    """Signed offset of the centre along ``x_3``; the centre must lie on that
    axis."""
    c = np.asarray(domain.center, dtype=float)
    if c.size != 3:
        raise DomainError("the flow runs in d = 3")
    if np.hypot(c[0], c[1]) > 1e-12:
        raise DomainError("centre must lie on the x_3 axis (axisymmetric setting)")
    return float(c[2])


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class GateRecord:
    """Hypothesis checks attached to every run."""

    phi_gate: str
    fs_symmetric: bool
    strong: bool
    margin: float
    origin_ball: bool
    f_at_zero: float

    @property
    def ball_theorem(self) -> bool:
        """Origin ball, ``alpha <= alpha_FS``, ``Phi`` non-increasing."""
        return self.origin_ball and self.fs_symmetric and self.phi_gate == "NonIncreasing"

    @property
    def domain_theorem(self) -> bool:
        """Strong regime, curvature margin ``>= 0``, ``Phi`` non-increasing."""
        return self.strong and self.margin >= 0 and self.phi_gate == "NonIncreasing"

    @property
    def trivial(self) -> bool:
        """``f <= 0`` at zero: every positive solution is constant."""
        return self.f_at_zero <= 0

    @property
    def all_satisfied(self) -> bool:
        return self.ball_theorem or self.domain_theorem

    def as_dict(self) -> dict:
        return {"phi_gate": self.phi_gate, "fs_symmetric": self.fs_symmetric,
                "strong": self.strong, "margin": self.margin, "origin_ball": self.origin_ball,
                "f_at_zero": self.f_at_zero, "ball_theorem": self.ball_theorem,
                "domain_theorem": self.domain_theorem, "all_satisfied": self.all_satisfied}


def domain_margin(domain, alpha: float) -> float:
    """Minimum of ``II - (1 - alpha)(x . nu)/|x|^2`` over the boundary."""
    if isinstance(domain, Annulus):
        # outer sphere: alpha/R; inner sphere (normal towards the origin): -alpha/r_in
        return min(alpha / domain.R, -alpha / domain.r_in)
    z0 = abs(_axis_offset(domain))
    if z0 == domain.R:
        return -math.inf
    return ball_margin_exact(z0, domain.R, alpha)


def gate_record(p: CknParameters, spec, domain) -> GateRecord:
    reg = classify_regime(p)
    origin_ball = isinstance(domain, OriginBall) or (
        isinstance(domain, OffsetBall) and np.allclose(domain.center, 0.0))
    return GateRecord(phi_monotonicity(spec, p).label(), reg.fs_symmetric, reg.strong,
                      float(domain_margin(domain, p.alpha)), bool(origin_ball),
                      float(spec.f_at_zero()))


# ---------------------------------------------------------------------------
# discretisation


class FlowGrid:
    """Finite-volume cells ``[rho_i, rho_{i+1}] x [theta_j, theta_{j+1}]``
    about the domain centre.

    Attributes
    ----------
    mass : (n,) cell integrals of ``|x|^{-bq}``
    K : sparse conductance Laplacian (``K 1 = 0``)
    x : (n, 3) cell centroids
    """

    def __init__(self, p: CknParameters, domain, n_r: int = 24, n_theta: int = 24,
                 quad: int = 3):
        self.p, self.domain = p, domain
        z0 = _axis_offset(domain)
        r_lo = domain.r_in if isinstance(domain, Annulus) else 0.0
        self.z0 = z0
        self.rho_f = np.linspace(r_lo, domain.R, n_r + 1)
        self.th_f = np.linspace(0.0, math.pi, n_theta + 1)
        self.n_r, self.n_theta = n_r, n_theta
        rc = 0.5 * (self.rho_f[1:] + self.rho_f[:-1])
        tc = 0.5 * (self.th_f[1:] + self.th_f[:-1])
        self.RC, self.TC = np.meshgrid(rc, tc, indexing="ij")
        self.x = self._pos(self.RC, self.TC).reshape(-1, 3)
        self.mass = self._mass(quad).ravel()
        self.volume = self._volume().ravel()
        self.K = self._stiffness()

    @property
    def size(self) -> int:
        return self.n_r * self.n_theta

    def _pos(self, rho, th):
        return np.stack([rho * np.sin(th), np.zeros_like(rho), self.z0 + rho * np.cos(th)], -1)

    def _absx(self, rho, th):
        return np.sqrt(np.maximum(rho * rho + self.z0**2 + 2 * self.z0 * rho * np.cos(th), 0.0))

    def _volume(self):
        dr3 = np.diff(self.rho_f**3) / 3.0
        dc = -np.diff(np.cos(self.th_f))
        return 2 * math.pi * np.outer(dr3, dc)

    def _mass(self, quad):
        bq = self.p.bq
        dc = -np.diff(np.cos(self.th_f))
        if self.z0 == 0:
            e = 3.0 - bq
            radial = np.diff(self.rho_f**e) / e
            return 2 * math.pi * np.outer(radial, dc)
        # tensor Gauss-Legendre per cell in (rho, cos theta)
        xg, wg = np.polynomial.legendre.leggauss(quad)
        r0, r1 = self.rho_f[:-1], self.rho_f[1:]
        c0, c1 = np.cos(self.th_f[:-1]), np.cos(self.th_f[1:])
        rr = 0.5 * (r0 + r1)[:, None] + 0.5 * (r1 - r0)[:, None] * xg[None, :]
        wr = 0.5 * (r1 - r0)[:, None] * wg[None, :]
        cc = 0.5 * (c0 + c1)[:, None] + 0.5 * (c0 - c1)[:, None] * xg[None, :]
        wc = 0.5 * (c0 - c1)[:, None] * wg[None, :]
        R4 = rr[:, None, :, None]
        C4 = cc[None, :, None, :]
        absx = np.sqrt(np.maximum(R4**2 + self.z0**2 + 2 * self.z0 * R4 * C4, 1e-300))
        integrand = absx ** (-bq) * R4**2
        return 2 * math.pi * np.einsum("ik,jl,ijkl->ij", wr, wc, integrand)

    def _stiffness(self):
        p = self.p
        nr, nt = self.n_r, self.n_theta
        idx = np.arange(nr * nt).reshape(nr, nt)
        rf, tf = self.rho_f, self.th_f
        rc = 0.5 * (rf[1:] + rf[:-1])
        tc = 0.5 * (tf[1:] + tf[:-1])
        dc = -np.diff(np.cos(tf))
        rows, cols, vals = [], [], []
        # radial faces between cells (i, j) and (i+1, j)
        for i in range(nr - 1):
            rface = rf[i + 1]
            area = 2 * math.pi * rface**2 * dc
            k = self._absx(rface, tc) ** (-2 * p.a)
            T = area * k / (rc[i + 1] - rc[i])
            rows += [idx[i], idx[i + 1]]
            cols += [idx[i + 1], idx[i]]
            vals += [T, T]
        # angular faces between (i, j) and (i, j+1)
        dth = tc[1:] - tc[:-1]
        for j in range(nt - 1):
            tface = tf[j + 1]
            area = 2 * math.pi * math.sin(tface) * 0.5 * np.diff(rf**2)
            k = self._absx(rc, tface) ** (-2 * p.a)
            T = area * k / (rc * dth[j])
            rows += [idx[:, j], idx[:, j + 1]]
            cols += [idx[:, j + 1], idx[:, j]]
            vals += [T, T]
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        off = sp.csr_matrix((vals, (rows, cols)), shape=(nr * nt, nr * nt))
        diag = np.asarray(off.sum(axis=1)).ravel()
        return (sp.diags(diag) - off).tocsc()

    def sample(self, func) -> np.ndarray:
        """Cell values of ``func(x)`` at the centroids."""
        return np.asarray(func(self.x), dtype=float).reshape(-1)


def random_init(grid: FlowGrid, rng, mean: float = 1.0, amplitude: float = 0.5,
                modes: int = 4) -> np.ndarray:
    """Smooth positive random field ``mean (1 + amplitude * s(x))`` with
    ``|s| <= 1`` built from a few random cosines."""
    amps = rng.uniform(-1, 1, modes)
    amps /= max(1.0, np.sum(np.abs(amps)))
    waves = rng.uniform(-3, 3, (modes, 3))
    phases = rng.uniform(0, 2 * np.pi, modes)
    s = sum(a * np.cos(grid.x @ k + ph) for a, k, ph in zip(amps, waves, phases))
    return mean * (1.0 + amplitude * s)


# ---------------------------------------------------------------------------
# evolution


@dataclass
class FlowResult:
    final: np.ndarray
    time: float
    classification: str
    oscillation: float
    mean: float
    dudt_norm: float
    gates: GateRecord
    steps: int
    rejected: int
    mass_defect: float
    elliptic_residual: float
    max_principle_ok: bool | None
    note: str = ""
    exit_tol: float = 0.0
    config: dict = field(default_factory=dict)

    def record(self) -> dict:
        """JSON-serialisable row for the run database (final field omitted)."""
        return {"classification": self.classification, "time": self.time,
                "oscillation": self.oscillation, "mean": self.mean,
                "dudt_norm": self.dudt_norm, "steps": self.steps, "rejected": self.rejected,
                "mass_defect": self.mass_defect, "elliptic_residual": self.elliptic_residual,
                "max_principle_ok": self.max_principle_ok, "note": self.note,
                "exit_tol": self.exit_tol,
                "gates": self.gates.as_dict(), "config": self.config}


def _classify(osc, mean, dudt, exit_tol):
    if dudt > exit_tol:
        return "NotConverged"
    if osc <= CONSTANT_RTOL * abs(mean):
        return "Constant"
    if osc > PATTERN_RTOL * abs(mean):
        return "Pattern"
    return "NotConverged"


def evolve(p: CknParameters, spec, domain, init, t_max: float = 200.0, dt0: float = 1e-3,
           dt_max: float | None = None, exit_tol: float = 1e-9, n_r: int = 24,
           n_theta: int = 24, u_max: float | None = None, max_halvings: int = 40,
           grid: FlowGrid | None = None) -> FlowResult:
    """Run the flow to a steady state or ``t_max``.

    ``init`` is an array of cell values, a callable ``init(x)`` or a
    positive scalar. ``dt`` grows by 1.5 per accepted step up to ``dt_max``
    (default ``0.5 / max|f'|`` on the current range, the explicit reaction
    limit); a step producing a non-positive value is rejected and ``dt``
    halved. Runs ending in positivity loss or blow-up are NotConverged.
    """
    grid = FlowGrid(p, domain, n_r, n_theta) if grid is None else grid
    gates = gate_record(p, spec, domain)
    if callable(init):
        u = grid.sample(init)
    else:
        u = np.broadcast_to(np.asarray(init, dtype=float), (grid.size,)).copy()
    if np.any(~(u > 0)):
        raise PositivityLoss("initial field must be positive")
    M, K = grid.mass, grid.K
    u_max = 1e3 * max(1.0, float(np.max(u)), *spec.zeros()) if u_max is None else u_max
    lo, hi = float(np.min(u)), float(np.max(u))
    u0_mean = float(np.sum(M * u) / np.sum(M))
    ts = np.linspace(lo, hi, 64)
    f_nonpos = bool(np.all(spec.f(ts) <= 0))
    max_hist_ok = True
    t, dt, steps, rejected = 0.0, float(dt0), 0, 0
    lu_cache = {}
    mass_defect = 0.0
    dudt = math.inf
    note = ""

    def solver(dt_):
        key = round(math.log2(dt_) * 64)
        if key not in lu_cache:
            if len(lu_cache) > 16:
                lu_cache.clear()
            lu_cache[key] = splu((sp.diags(M) + dt_ * K).tocsc())
        return lu_cache[key]

    # dt values are quantised to powers of 2^(1/64) so factorizations can be reused
    def quant(dt_):
        return 2.0 ** (round(math.log2(dt_) * 64) / 64)

    # K u / M cannot be resolved below rounding of its largest row; cells with
    # vanishing weighted mass set that floor
    total = float(np.sum(M))

    def rate(v):
        # mass-weighted RMS of u_t
        ut = -(K @ v) / M + spec.f(v)
        return float(np.sqrt(np.sum(M * ut * ut) / total))

    floor = 64 * np.finfo(float).eps * float(np.sqrt(np.sum(K.diagonal() ** 2 / M) / total))
    base_tol = exit_tol
    exit_tol = max(base_tol, floor * float(np.max(u)))
    dudt = rate(u)
    if dudt <= exit_tol:
        osc = float(np.max(u) - np.min(u))
        cls = _classify(osc, float(np.mean(u)), dudt, exit_tol)
        return FlowResult(u, 0.0, cls, osc, float(np.mean(u)), dudt, gates, 0, 0, 0.0, dudt,
                          True if f_nonpos else None, "steady at start", exit_tol)
    halvings = 0
    while t < t_max:
        fu = spec.f(u)
        fp = np.max(np.abs(spec.f_prime(u)))
        cap = 0.5 / max(fp, 1e-12) if dt_max is None else dt_max
        dt = quant(min(dt, cap, t_max - t + 1e-15))
        rhs = M * (u + dt * fu)
        u_new = solver(dt).solve(rhs)
        if np.any(~(u_new > 0)) or not np.all(np.isfinite(u_new)):
            rejected += 1
            halvings += 1
            dt *= 0.5
            if halvings > max_halvings or dt < 1e-12 * max(1.0, t):
                note = "positivity lost"
                break
            continue
        if dt < 1e-12 * max(1.0, t):
            # the reaction cap drives dt to zero only as u blows up
            note = "blow-up" if np.max(u_new) > 10 * hi else "positivity lost"
            break
        halvings = 0
        mass_defect = max(mass_defect, abs(np.sum(M * (u_new - u)) / dt - np.sum(M * fu))
                          / max(1.0, np.sum(M * np.abs(fu))))
        if f_nonpos and np.max(u_new) > np.max(u) * (1 + 1e-12):
            max_hist_ok = False
        u = u_new
        # u_t from the semi-discrete equation; differences u_new - u lose all
        # digits once dt is tiny
        dudt = rate(u)
        exit_tol = max(base_tol, floor * float(np.max(u)))
        t += dt
        steps += 1
        if np.max(u) > u_max:
            note = "blow-up"
            break
        if dudt <= exit_tol:
            break
        dt *= 1.5
    osc = float(np.max(u) - np.min(u))
    mean = float(np.sum(M * u) / np.sum(M))
    resid = float(np.max(np.abs(-(K @ u) / M + spec.f(u))))
    if not note and mean < 1e-8 * u0_mean:
        note = "decayed to zero"
    cls = "NotConverged" if note else _classify(osc, mean, dudt, exit_tol)
    return FlowResult(u, t, cls, osc, mean, dudt, gates, steps, rejected, float(mass_defect),
                      resid, max_hist_ok if f_nonpos else None, note, exit_tol)


# ---------------------------------------------------------------------------
# sweeps and the run database


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def append_jsonl(path, rows):
    with open(path, "a") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def read_jsonl(path) -> list:
    if not os.path.exists(path):
        return []
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def default_sweep_config() -> dict:
    """Four weight pairs, offsets crossing ``|x0| = alpha R`` and ``R``,
    four nonlinearities, three seeds: 240 runs."""
    return {
        "d": 3,
        "weights": [[0.0, 0.0], [0.2, 0.2], [0.25, 0.3], [-0.5, -0.5]],
        "R": 1.0,
        "offsets": [0.0, 0.3, 0.5, 0.7, 1.5],
        "nonlinearities": [
            {"kind": "one_minus_power", "p": 5.0},
            {"kind": "power_minus_linear", "p": 5.0, "mu": 2.0},
            {"kind": "power_minus_linear", "p": 5.0, "mu": 8.0},
            {"kind": "generalized_polynomial", "terms": [[-1.0, 0.0], [-1.0, 1.0]]},
        ],
        "seeds": [0, 1, 2],
        "init_mean": "auto",
        "init_amplitude": 0.5,
        "n_r": 16,
        "n_theta": 16,
        "t_max": 100.0,
        "exit_tol": 1e-9,
    }


def _domain(offset: float, R: float):
    if offset == 0:
        return OriginBall(R)
    return OffsetBall((0.0, 0.0, offset), R)


def _cells(config: dict):
    for a, b in config.get("weights", []):
        for off in config.get("offsets", []):
            for spec_d in config.get("nonlinearities", []):
                for seed in config.get("seeds", [0]):
                    yield float(a), float(b), float(off), spec_d, int(seed)


def sweep(config: dict, db_path=None) -> list:
    """One flow run per grid cell of ``config``; returns the run records and
    appends them to ``db_path`` (JSON lines) when given. Every record carries
    the hash of the full sweep configuration."""
    h = config_hash(config)
    R = float(config.get("R", 1.0))
    d = int(config.get("d", 3))
    rows = []
    grids = {}
    for a, b, off, spec_d, seed in _cells(config):
        p = derive_parameters(d, a, b)
        spec = nonlinearity_from_dict(spec_d)
        dom = _domain(off * R, R)
        key = (a, b, off)
        if key not in grids:
            grids[key] = FlowGrid(p, dom, int(config.get("n_r", 16)), int(config.get("n_theta", 16)))
        grid = grids[key]
        rng = np.random.default_rng(seed)
        mean = config.get("init_mean", "auto")
        if mean == "auto":
            # around the positive constant steady state when there is one
            mean = max([1.0] if not spec.zeros() else spec.zeros())
        init = random_init(grid, rng, float(mean),
                           float(config.get("init_amplitude", 0.5)))
        cell = {"a": a, "b": b, "offset": off * R, "R": R, "nonlinearity": spec_d, "seed": seed}
        try:
            res = evolve(p, spec, dom, init, t_max=float(config.get("t_max", 100.0)),
                         exit_tol=float(config.get("exit_tol", 1e-9)), grid=grid)
            row = res.record()
        except PositivityLoss as exc:
            row = {"classification": "NotConverged", "note": f"error: {exc}",
                   "gates": gate_record(p, spec, dom).as_dict()}
        row["config"] = cell
        row["config_hash"] = h
        row["alpha"] = p.alpha
        rows.append(row)
    if db_path is not None:
        append_jsonl(db_path, rows)
    return rows


def consistency_violations(rows) -> list:
    """Rows classified Pattern although a nonexistence theorem applies."""
    return [r for r in rows if r.get("classification") == "Pattern"
            and r["gates"]["all_satisfied"]]
