"""Exact derivatives of analytic test fields through jax automatic
differentiation (float64). Serves as the oracle route for the
finite-difference operators."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .fields import JetQuantities, jet_quantities
from .params import CknParameters


@lru_cache(maxsize=1)
def _jax():
    import jax

    jax.config.update("jax_enable_x64", True)
    import jax.numpy as jnp

    return jax, jnp


def _jet_fns(func):
    jax, jnp = _jax()

    def f(x):
        return func(x, jnp)

    return f, jax.grad(f), jax.hessian(f)


def exact_jet(func, points):
    """``(x, Dv, D2v)`` at ``points`` (shape ``(P, d)``)."""
    jax, jnp = _jax()
    f, df, d2f = _jet_fns(func)
    x = jnp.asarray(points, dtype=jnp.float64)
    return (np.asarray(points, float), np.asarray(jax.vmap(df)(x)),
            np.asarray(jax.vmap(d2f)(x)))


def exact_quantities(func, points, p: CknParameters, **kw) -> JetQuantities:
    x, Dv, D2v = exact_jet(func, points)
    return jet_quantities(x, Dv, D2v, p.alpha, p.n, **kw)


def _flux_and_rhs(func, p: CknParameters):
    jax, jnp = _jax()
    n, d, a2 = p.n, p.d, p.alpha**2
    f, df, d2f = _jet_fns(func)

    def quantities(x, fn, dfn, d2fn):
        return jet_quantities(x, dfn(x), d2fn(x), p.alpha, n, xp=jnp)

    def grad_sq(x):
        return quantities(x, f, df, d2f).grad_sq

    dgrad_sq = jax.grad(grad_sq)

    def flux(x):
        q = quantities(x, f, df, d2f)
        v = f(x)
        r2 = x @ x
        ds = dgrad_sq(x)
        ginv_ds = ds + (a2 - 1.0) * x * (x @ ds) / r2
        W = v ** (1 - n) * (q.Lv * q.G + (1 - n) / 2 * q.grad_sq / v * q.G
                            - 0.5 * ginv_ds + 2 * (1 - n) / (n * (n - 2)) * q.G / v)
        return r2 ** ((n - d) / 2) * W

    def lhs(x):
        r2 = x @ x
        return r2 ** ((d - n) / 2) * jnp.trace(jax.jacfwd(flux)(x))

    def u(x):
        return f(x) ** (1 - n)

    du, d2u = jax.grad(u), jax.hessian(u)

    def rhs(x):
        q = quantities(x, f, df, d2f)
        v = f(x)
        Lu = jet_quantities(x, du(x), d2u(x), p.alpha, n, xp=jnp).Lv
        return (-(v / n) * (q.Lv - n / 2 * q.grad_sq / v - 2 / ((n - 2) * v)) * Lu
                - v ** (1 - n) * q.k)

    return flux, lhs, rhs


def lemma22_sides(func, points, p: CknParameters):
    """Both sides of the divergence identity at ``points``."""
    jax, jnp = _jax()
    _, lhs, rhs = _flux_and_rhs(func, p)
    x = jnp.asarray(points, dtype=jnp.float64)
    return np.asarray(jax.vmap(lhs)(x)), np.asarray(jax.vmap(rhs)(x))


def lemma22_flux(func, points, p: CknParameters):
    """The weighted flux ``|x|^{n-d} W`` at ``points``."""
    jax, jnp = _jax()
    flux, _, _ = _flux_and_rhs(func, p)
    return np.asarray(jax.vmap(flux)(jnp.asarray(points, dtype=jnp.float64)))
