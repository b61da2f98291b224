"""Pure numpy implementations of the hot kernels.

The compiled module ``hsplus._kernels`` exposes the same functions with the
same signatures and consumes random draws in the same order, so both backends
produce the same chains up to floating-point rounding.
"""

import numpy as np

SCALE_FLOOR = 1e-300

# Layout of the scalar state vector shared with the compiled kernel.
TAU2, A_TAU, SCALE2, CLAMPS = 0, 1, 2, 3

POLICY_FIXED, POLICY_HALF_CAUCHY, POLICY_EXTERNAL = 0, 1, 2

NAME = "numpy"


def _floor(x, scal):
    low = x < SCALE_FLOOR
    if low.any():
        scal[CLAMPS] += low.sum()
        x[low] = SCALE_FLOOR
    return x


def gibbs_sweeps(y, theta, lam2, nu, eta2, xi, scal, plus, policy, normals, exps, gammas,
                 shape, theta_out, kappa_out, tau_out, kappa_sum, first_iter, burn):
    """Run ``len(gammas)`` Gibbs iterations in place.

    Parameters
    ----------
    y, theta, lam2, nu, eta2, xi : ndarray, shape (n,)
        Data and chain state; ``eta2`` and ``xi`` are ignored unless ``plus``.
    scal : ndarray, shape (4,)
        ``tau^2``, the half-Cauchy auxiliary, the squared half-Cauchy scale and
        the running clamp count.
    normals : ndarray, shape (B, n)
    exps : ndarray, shape (B, 2n + 1) or (B, 4n + 1)
        Unit exponentials in the order lambda^2, nu, [eta^2, xi], auxiliary.
    gammas : ndarray, shape (B,)
        Standard gamma draws with shape ``(n + 1)/2`` for the tau^2 update.
    theta_out, kappa_out : ndarray, shape (R, n)
        Retained draws; ``kappa_out`` may have zero rows to skip storage.
    tau_out : ndarray, shape (R,)
    kappa_sum : ndarray, shape (n,)
        Running sum of retained ``1/(1 + lambda^2)``.
    first_iter, burn : int
        Global index of the first iteration in this block and the burn-in.
    """
    n = y.shape[0]
    store_kappa = kappa_out.shape[0] > 0
    for b in range(gammas.shape[0]):
        tau2 = scal[TAU2]
        e = exps[b]
        shrink = lam2 / (1.0 + lam2)
        theta[:] = y * shrink + np.sqrt(shrink) * normals[b]
        lam2[:] = (1.0 / nu + 0.5 * theta * theta) / e[:n]
        _floor(lam2, scal)
        if plus:
            nu[:] = (1.0 / lam2 + 1.0 / (tau2 * eta2)) / e[n:2 * n]
            _floor(nu, scal)
            eta2[:] = (1.0 / (nu * tau2) + 1.0 / xi) / e[2 * n:3 * n]
            _floor(eta2, scal)
            xi[:] = (1.0 + 1.0 / eta2) / e[3 * n:4 * n]
            _floor(xi, scal)
            rate = np.sum(1.0 / (nu * eta2))
        else:
            nu[:] = (1.0 / lam2 + 1.0 / tau2) / e[n:2 * n]
            _floor(nu, scal)
            rate = np.sum(1.0 / nu)
        if policy == POLICY_HALF_CAUCHY:
            tau2 = (rate + 1.0 / scal[A_TAU]) / gammas[b]
            if tau2 < SCALE_FLOOR:
                tau2 = SCALE_FLOOR
                scal[CLAMPS] += 1
            scal[TAU2] = tau2
            scal[A_TAU] = (1.0 / tau2 + 1.0 / scal[SCALE2]) / e[-1]
        it = first_iter + b
        if it >= burn:
            r = it - burn
            kappa = 1.0 / (1.0 + lam2)
            theta_out[r] = theta
            if store_kappa:
                kappa_out[r] = kappa
            tau_out[r] = np.sqrt(scal[TAU2])
            kappa_sum += kappa


def batch_kappa_mean(y, nodes_k, weights):
    """Weighted-rule posterior mean of kappa for each entry of ``y``."""
    out = np.empty(y.shape[0])
    chunk = max(1, 2_000_000 // max(1, nodes_k.shape[0]))
    wk = weights * nodes_k
    for start in range(0, y.shape[0], chunk):
        yy = y[start:start + chunk]
        e = np.exp(-0.5 * np.outer(yy * yy, nodes_k))
        out[start:start + chunk] = (e @ wk) / (e @ weights)
    return out
