# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shooting kernel; same algorithm and interface as
``_kernels_py.integrate_radial``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow, sqrt, fabs, isfinite

cnp.import_array()

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784
cdef double A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double f_eval(double u, double[::1] c, double[::1] e, Py_ssize_t m) nogil:
    cdef double up = u if u > 0.0 else 0.0
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        if e[i] == 0.0:
            acc += c[i]
        else:
            acc += c[i] * pow(up, e[i])
    return acc


def integrate_radial(double s0, double u0, double F0, s_out, coefs, exps,
                     double a, double bq, double d, double rtol=1e-10,
                     double atol=1e-14, double u_max=1e3, double h0=1e-2,
                     long max_steps=200000):
    cdef double[::1] so = np.ascontiguousarray(s_out, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef double[::1] e = np.ascontiguousarray(exps, dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0], nout = so.shape[0], j = 0
    out_arr = np.full((nout, 2), np.nan)
    cdef double[:, ::1] out = out_arr
    cdef double p_u = 2.0 + 2.0 * a - d, p_f = d - bq
    cdef double s = s0, u = u0, F = F0, h = h0, target, err, su, sF, fac
    cdef double k1u, k1F, k2u, k2F, k3u, k3F, k4u, k4F, k5u, k5F, k6u, k6F, k7u, k7F
    cdef double uu, ff, eu, eF
    cdef long steps = 0
    cdef bint last

    k1u = F * exp(p_u * s)
    k1F = -exp(p_f * s) * f_eval(u, c, e, m)
    while j < nout and so[j] <= s:
        out[j, 0] = u
        out[j, 1] = F
        j += 1
    while j < nout:
        if steps >= max_steps:
            return out_arr, 4, s, steps
        target = so[j]
        last = False
        if s + h >= target:
            h = target - s
            last = True
        uu = u + h * A21 * k1u
        ff = F + h * A21 * k1F
        k2u = ff * exp(p_u * (s + C2 * h))
        k2F = -exp(p_f * (s + C2 * h)) * f_eval(uu, c, e, m)
        uu = u + h * (A31 * k1u + A32 * k2u)
        ff = F + h * (A31 * k1F + A32 * k2F)
        k3u = ff * exp(p_u * (s + C3 * h))
        k3F = -exp(p_f * (s + C3 * h)) * f_eval(uu, c, e, m)
        uu = u + h * (A41 * k1u + A42 * k2u + A43 * k3u)
        ff = F + h * (A41 * k1F + A42 * k2F + A43 * k3F)
        k4u = ff * exp(p_u * (s + C4 * h))
        k4F = -exp(p_f * (s + C4 * h)) * f_eval(uu, c, e, m)
        uu = u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
        ff = F + h * (A51 * k1F + A52 * k2F + A53 * k3F + A54 * k4F)
        k5u = ff * exp(p_u * (s + C5 * h))
        k5F = -exp(p_f * (s + C5 * h)) * f_eval(uu, c, e, m)
        uu = u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
        ff = F + h * (A61 * k1F + A62 * k2F + A63 * k3F + A64 * k4F + A65 * k5F)
        k6u = ff * exp(p_u * (s + h))
        k6F = -exp(p_f * (s + h)) * f_eval(uu, c, e, m)
        uu = u + h * (A71 * k1u + A73 * k3u + A74 * k4u + A75 * k5u + A76 * k6u)
        ff = F + h * (A71 * k1F + A73 * k3F + A74 * k4F + A75 * k5F + A76 * k6F)
        k7u = ff * exp(p_u * (s + h))
        k7F = -exp(p_f * (s + h)) * f_eval(uu, c, e, m)
        eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        eF = h * (E1 * k1F + E3 * k3F + E4 * k4F + E5 * k5F + E6 * k6F + E7 * k7F)
        su = atol + rtol * (fabs(u) if fabs(u) > fabs(uu) else fabs(uu))
        sF = atol + rtol * (fabs(F) if fabs(F) > fabs(ff) else fabs(ff))
        err = sqrt(0.5 * ((eu / su) * (eu / su) + (eF / sF) * (eF / sF)))
        steps += 1
        if err <= 1.0 and isfinite(err):
            if last:
                s = target
            else:
                s = s + h
            u = uu
            F = ff
            k1u = k7u
            k1F = k7F
            if u > u_max:
                return out_arr, 1, s, steps
            if u <= 0.0:
                return out_arr, 2, s, steps
            while j < nout and so[j] <= s:
                out[j, 0] = u
                out[j, 1] = F
                j += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                fac = 5.0 if fac > 5.0 else (0.2 if fac < 0.2 else fac)
            if not last:
                h *= fac
            else:
                h = (h if h > h0 * 1e-3 else h0 * 1e-3) * fac
        else:
            if not isfinite(err):
                fac = 0.2
            else:
                fac = 0.9 * pow(err, -0.2)
                fac = 0.2 if fac < 0.2 else fac
            h *= fac
        if h < 1e-14 * (fabs(s) if fabs(s) > 1.0 else 1.0):
            return out_arr, 3, s, steps
    return out_arr, 0, s, steps
