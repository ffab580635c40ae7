"""Pure-Python shooting kernel; the reference implementation of
``_kernels.pyx`` and the fallback when the extension is not built.

Integrates the radial system in ``s = log r``::

    du/ds = F exp((2 + 2a - d) s)
    dF/ds = -exp((d - bq) s) f(u)

with the Dormand--Prince 5(4) pair, landing exactly on every requested
output abscissa. ``f(u) = sum_i c_i max(u, 0)^{e_i}`` (constant terms for
``e_i = 0``), so the right-hand side stays defined after ``u`` crosses zero.

Status codes: 0 finished, 1 ``u`` exceeded ``u_max``, 2 ``u`` reached zero,
3 step size collapsed, 4 step budget exhausted.
"""
import math

import numpy as np

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _f(u, coefs, exps):
    up = u if u > 0.0 else 0.0
    acc = 0.0
    for c, e in zip(coefs, exps):
        acc += c if e == 0.0 else c * up ** e
    return acc


def integrate_radial(s0, u0, F0, s_out, coefs, exps, a, bq, d,
                     rtol=1e-10, atol=1e-14, u_max=1e3, h0=1e-2, max_steps=200000):
    """Integrate from ``s0`` through the sorted abscissae ``s_out``.

    Returns ``(Y, status, s_exit, n_steps)`` where ``Y[k] = (u, F)`` at
    ``s_out[k]`` (NaN beyond an early exit).
    """
    s_out = np.asarray(s_out, dtype=float)
    coefs = [float(c) for c in np.asarray(coefs, float)]
    exps = [float(e) for e in np.asarray(exps, float)]
    p_u = 2.0 + 2.0 * a - d
    p_f = d - bq
    out = np.full((s_out.size, 2), np.nan)

    def rhs(s, u, F):
        return F * math.exp(p_u * s), -math.exp(p_f * s) * _f(u, coefs, exps)

    s, u, F = float(s0), float(u0), float(F0)
    h = float(h0)
    ku, kF = rhs(s, u, F)
    steps = 0
    j = 0
    while j < s_out.size and s_out[j] <= s:
        out[j] = (u, F)
        j += 1
    while j < s_out.size:
        if steps >= max_steps:
            return out, 4, s, steps
        target = s_out[j]
        last = False
        if s + h >= target:
            h = target - s
            last = True
        KU = [ku] + [0.0] * 6
        KF = [kF] + [0.0] * 6
        for i in range(1, 7):
            uu = u + h * sum(A * k for A, k in zip(_A[i], KU))
            ff = F + h * sum(A * k for A, k in zip(_A[i], KF))
            KU[i], KF[i] = rhs(s + _C[i] * h, uu, ff)
        un, Fn = uu, ff  # stage 7 evaluates at the 5th-order solution
        eu = h * sum(E * k for E, k in zip(_E, KU))
        eF = h * sum(E * k for E, k in zip(_E, KF))
        su = atol + rtol * max(abs(u), abs(un))
        sF = atol + rtol * max(abs(F), abs(Fn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (eF / sF) ** 2))
        steps += 1
        if err <= 1.0 and math.isfinite(err):
            s = target if last else s + h
            u, F = un, Fn
            ku, kF = KU[6], KF[6]
            if u > u_max:
                return out, 1, s, steps
            if u <= 0.0:
                return out, 2, s, steps
            while j < s_out.size and s_out[j] <= s:
                out[j] = (u, F)
                j += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if not last:
                h *= fac
            else:
                h = max(h, h0 * 1e-3) * fac
        else:
            fac = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
        if h < 1e-14 * max(1.0, abs(s)):
            return out, 3, s, steps
    return out, 0, s, steps
