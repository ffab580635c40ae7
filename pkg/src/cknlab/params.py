"""Parameter algebra for the weight family ``|x|^{-2a}``, ``|x|^{-bq}`` and the
nonlinearity ``f`` driving the Neumann problem.

All objects here are immutable; every function is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import AdmissibilityError, DomainError

__all__ = [
    "CknParameters",
    "RegimeReport",
    "OneMinusPower",
    "PowerMinusLinear",
    "GeneralizedPolynomial",
    "NonlinearityValues",
    "MonotonicityReport",
    "derive_parameters",
    "classify_regime",
    "eval_nonlinearity",
    "phi_monotonicity",
    "hat_f",
    "nonlinearity_from_dict",
]


@dataclass(frozen=True)
class CknParameters:
    """Dimension, weight exponents and every quantity derived from them.

    Build through :func:`derive_parameters`; the constructor does not check
    admissibility.
    """

    d: int
    a: float
    b: float
    a_c: float
    q: float
    n: float
    alpha: float
    alpha_fs: float
    lambda_ef: float

    @property
    def critical_exponent(self) -> float:
        """``(n+2)/(n-2)``, the exponent dividing ``f`` in ``Phi``."""
        return (self.n + 2.0) / (self.n - 2.0)

    @property
    def strong_threshold(self) -> float:
        return math.sqrt((self.d - 2.0) / (self.n - 2.0))

    @property
    def bq(self) -> float:
        return self.b * self.q

    @property
    def sqrt_lambda(self) -> float:
        return abs(self.a - self.a_c)

    def as_dict(self) -> dict:
        return {
            "d": self.d, "a": self.a, "b": self.b, "a_c": self.a_c,
            "q": self.q, "n": self.n, "alpha": self.alpha,
            "alpha_fs": self.alpha_fs, "lambda_ef": self.lambda_ef,
        }


def derive_parameters(d: int, a: float, b: float) -> CknParameters:
    """Derive ``a_c, q, n, alpha, alpha_fs, Lambda`` from ``(d, a, b)``.

    Raises
    ------
    AdmissibilityError
        If ``d < 3``, or ``a <= b < a + 1`` or ``a < a_c`` fails. The
        offending clause is stored on the exception.
    """
    if int(d) != d or d < 3:
        raise AdmissibilityError("d >= 3", f"got d={d}")
    d = int(d)
    a = float(a)
    b = float(b)
    a_c = d / 2.0 - 1.0
    if not a <= b:
        raise AdmissibilityError("a <= b", f"a={a} > b={b}")
    if not b < a + 1.0:
        raise AdmissibilityError("b < a+1", f"b={b} >= a+1={a + 1.0}")
    if not a < a_c:
        raise AdmissibilityError("a < a_c", f"a={a} >= a_c={a_c}")
    theta = 1.0 + (a - b)  # exact when a == b
    q = 2.0 * d / (d - 2.0 * theta)
    n = d / theta
    alpha = theta * (a_c - a) / (a_c - a + b)
    alpha_fs = math.sqrt((d - 1.0) / (n - 1.0))
    lambda_ef = (a - a_c) ** 2
    return CknParameters(d, a, b, a_c, q, n, alpha, alpha_fs, lambda_ef)


@dataclass(frozen=True)
class RegimeReport:
    alpha: float
    alpha_fs: float
    strong_threshold: float
    fs_symmetric: bool
    strong: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classify_regime(p: CknParameters) -> RegimeReport:
    """Compare ``alpha`` with the radial-symmetry threshold ``alpha_fs`` and
    with the stronger pointwise threshold ``sqrt((d-2)/(n-2))``."""
    strong_threshold = p.strong_threshold
    return RegimeReport(
        alpha=p.alpha,
        alpha_fs=p.alpha_fs,
        strong_threshold=strong_threshold,
        fs_symmetric=p.alpha <= p.alpha_fs,
        strong=p.alpha < strong_threshold,
    )


# ---------------------------------------------------------------------------
# nonlinearities


class _PolynomialFamily:
    """Shared evaluation for sums of real powers ``sum_i c_i t^{e_i}``."""

    def terms(self) -> tuple[tuple[float, float], ...]:
        raise NotImplementedError

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        t = self.terms()
        return (np.array([c for c, _ in t], dtype=float),
                np.array([e for _, e in t], dtype=float))

    def f(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, e in self.terms():
            out = out + (c if e == 0 else c * t ** e)
        return out

    def f_prime(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, e in self.terms():
            if e != 0:
                out = out + c * e * t ** (e - 1.0)
        return out

    def f_at_zero(self) -> float:
        """Limit of ``f`` at ``0+`` (finite since every exponent is >= 0)."""
        return float(sum(c for c, e in self.terms() if e == 0))

    def zeros(self, t_max: float = 1e3, samples: int = 4000) -> list[float]:
        """Positive zeros of ``f`` on ``(0, t_max]`` located by sign scan."""
        from scipy.optimize import brentq

        ts = np.geomspace(1e-6, t_max, samples)
        vals = self.f(ts)
        roots = [float(t) for t, v in zip(ts, vals) if v == 0.0]
        for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
            roots.append(brentq(lambda s: float(self.f(s)), ts[i], ts[i + 1],
                                xtol=1e-15, rtol=4 * np.finfo(float).eps))
        return sorted(roots)

    def as_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class OneMinusPower(_PolynomialFamily):
    """``f(t) = 1 - t^p``."""

    p: float

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"exponent must exceed 1, got p={self.p}")

    def terms(self):
        return ((1.0, 0.0), (-1.0, float(self.p)))

    def as_dict(self):
        return {"kind": "one_minus_power", "p": self.p}


@dataclass(frozen=True)
class PowerMinusLinear(_PolynomialFamily):
    """``f(t) = t^p - mu t`` (the Lin--Ni family when ``mu > 0``)."""

    p: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"exponent must exceed 1, got p={self.p}")

    def terms(self):
        return ((1.0, float(self.p)), (-float(self.mu), 1.0))

    def as_dict(self):
        return {"kind": "power_minus_linear", "p": self.p, "mu": self.mu}


@dataclass(frozen=True)
class GeneralizedPolynomial(_PolynomialFamily):
    """``f(t) = sum_i c_i t^{e_i}`` with real exponents ``e_i >= 0``.

    Exponent zero gives a constant term, so ``f = 1`` is
    ``GeneralizedPolynomial(((1.0, 0.0),))``.
    """

    coeffs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        cleaned = tuple((float(c), float(e)) for c, e in self.coeffs)
        if any(e < 0 for _, e in cleaned):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "coeffs", cleaned)

    def terms(self):
        return self.coeffs

    def as_dict(self):
        return {"kind": "generalized_polynomial",
                "terms": [list(t) for t in self.coeffs]}


NonlinearitySpec = Union[OneMinusPower, PowerMinusLinear, GeneralizedPolynomial]


def nonlinearity_from_dict(data: dict) -> NonlinearitySpec:
    kind = data.get("kind")
    if kind == "one_minus_power":
        return OneMinusPower(float(data["p"]))
    if kind == "power_minus_linear":
        return PowerMinusLinear(float(data["p"]), float(data.get("mu", 0.0)))
    if kind == "generalized_polynomial":
        return GeneralizedPolynomial(tuple(tuple(t) for t in data["terms"]))
    raise ValueError(f"unknown nonlinearity kind {kind!r}")


class NonlinearityValues(NamedTuple):
    f: np.ndarray
    f_prime: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray


def _check_positive(t, what="t"):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError(f"{what} must be positive")
    return t


def eval_nonlinearity(spec: NonlinearitySpec, p: CknParameters, t) -> NonlinearityValues:
    """Evaluate ``f``, ``f'``, ``Phi = f t^{-gamma}`` and ``Phi'`` where
    ``gamma = (n+2)/(n-2)``. Works elementwise on arrays."""
    t = _check_positive(t)
    gamma = p.critical_exponent
    f = spec.f(t)
    fp = spec.f_prime(t)
    # Phi' = sum c (e - gamma) t^(e - gamma - 1); avoids cancellation of
    # f' t^-g - g f t^-g-1 when f is a pure critical power
    phi = np.zeros_like(t)
    phi_p = np.zeros_like(t)
    for c, e in spec.terms():
        phi = phi + c * t ** (e - gamma)
        phi_p = phi_p + c * (e - gamma) * t ** (e - gamma - 1.0)
    return NonlinearityValues(f, fp, phi, phi_p)


@dataclass(frozen=True)
class MonotonicityReport:
    non_increasing: bool
    violated_at: float | None = None
    max_phi_prime: float = -math.inf

    def __bool__(self):
        return self.non_increasing

    def label(self) -> str:
        return "NonIncreasing" if self.non_increasing else "Violated"


def phi_monotonicity(spec: NonlinearitySpec, p: CknParameters,
                     interval: Sequence[float] = (1e-3, 1e3), samples: int = 2001,
                     tolerance: float = 1e-12) -> MonotonicityReport:
    """Sample the analytic ``Phi'`` on a geometric grid over ``interval`` and
    report the first sample where it exceeds ``tolerance``."""
    t_lo, t_hi = map(float, interval)
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    ts = np.geomspace(t_lo, t_hi, int(samples))
    phi_p = eval_nonlinearity(spec, p, ts).phi_prime
    bad = np.nonzero(phi_p > tolerance)[0]
    peak = float(np.max(phi_p))
    if bad.size:
        return MonotonicityReport(False, float(ts[bad[0]]), peak)
    return MonotonicityReport(True, None, peak)


def hat_f(spec: NonlinearitySpec, p: CknParameters, v):
    """Nonlinearity of the equation satisfied by ``v = w^{-2/(n-2)}``:
    ``2/(n-2) f(v^{-(n-2)/2}) v^{n/2}``."""
    v = _check_positive(v, "v")
    n = p.n
    return 2.0 / (n - 2.0) * spec.f(v ** (-(n - 2.0) / 2.0)) * v ** (n / 2.0)
