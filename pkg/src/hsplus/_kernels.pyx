# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gibbs sweeps and batch kappa quadrature.

Mirrors ``hsplus._fallback`` exactly, including the order in which the
pre-drawn random numbers are consumed.
"""

from libc.math cimport exp, sqrt

NAME = "cython"

cdef double SCALE_FLOOR = 1e-300
cdef int POLICY_HALF_CAUCHY = 1


cdef inline double _floor(double x, double* clamps) noexcept nogil:
    if x < SCALE_FLOOR:
        clamps[0] += 1.0
        return SCALE_FLOOR
    return x


def gibbs_sweeps(const double[::1] y, double[::1] theta, double[::1] lam2, double[::1] nu,
                 double[::1] eta2, double[::1] xi, double[::1] scal, bint plus, int policy,
                 const double[:, ::1] normals, const double[:, ::1] exps,
                 const double[::1] gammas, double shape, double[:, ::1] theta_out,
                 double[:, ::1] kappa_out, double[::1] tau_out, double[::1] kappa_sum,
                 Py_ssize_t first_iter, Py_ssize_t burn):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t nb = gammas.shape[0]
    cdef Py_ssize_t last = exps.shape[1] - 1
    cdef bint store_kappa = kappa_out.shape[0] > 0
    cdef Py_ssize_t b, i, r, it
    cdef double tau2, shrink, rate, kappa, clamps
    with nogil:
        clamps = scal[3]
        for b in range(nb):
            tau2 = scal[0]
            rate = 0.0
            for i in range(n):
                shrink = lam2[i] / (1.0 + lam2[i])
                theta[i] = y[i] * shrink + sqrt(shrink) * normals[b, i]
            for i in range(n):
                lam2[i] = _floor((1.0 / nu[i] + 0.5 * theta[i] * theta[i]) / exps[b, i], &clamps)
            if plus:
                for i in range(n):
                    nu[i] = _floor((1.0 / lam2[i] + 1.0 / (tau2 * eta2[i])) / exps[b, n + i], &clamps)
                for i in range(n):
                    eta2[i] = _floor((1.0 / (nu[i] * tau2) + 1.0 / xi[i]) / exps[b, 2 * n + i], &clamps)
                for i in range(n):
                    xi[i] = _floor((1.0 + 1.0 / eta2[i]) / exps[b, 3 * n + i], &clamps)
                for i in range(n):
                    rate += 1.0 / (nu[i] * eta2[i])
            else:
                for i in range(n):
                    nu[i] = _floor((1.0 / lam2[i] + 1.0 / tau2) / exps[b, n + i], &clamps)
                for i in range(n):
                    rate += 1.0 / nu[i]
            if policy == POLICY_HALF_CAUCHY:
                tau2 = _floor((rate + 1.0 / scal[1]) / gammas[b], &clamps)
                scal[0] = tau2
                scal[1] = (1.0 / tau2 + 1.0 / scal[2]) / exps[b, last]
            it = first_iter + b
            if it >= burn:
                r = it - burn
                for i in range(n):
                    kappa = 1.0 / (1.0 + lam2[i])
                    theta_out[r, i] = theta[i]
                    if store_kappa:
                        kappa_out[r, i] = kappa
                    kappa_sum[i] += kappa
                tau_out[r] = sqrt(scal[0])
        scal[3] = clamps


def batch_kappa_mean(const double[::1] y, const double[::1] nodes_k, const double[::1] weights):
    import numpy as np
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t q = nodes_k.shape[0]
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, l
    cdef double h, a, e, num, den
    with nogil:
        for j in range(m):
            h = 0.5 * y[j] * y[j]
            num = 0.0
            den = 0.0
            for l in range(q):
                a = h * nodes_k[l]
                if a > 745.2:  # exp(-a) is exactly 0.0 in double precision
                    continue
                e = weights[l] * exp(-a)
                den += e
                num += e * nodes_k[l]
            out[j] = num / den
    return out_arr
