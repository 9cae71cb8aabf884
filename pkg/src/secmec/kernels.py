"""Hot numeric kernels with twin implementations.

Every kernel ships as a pure-numpy function and, when numba is importable,
an @njit twin. The module-level names dispatch to the active lane; set the
environment variable SECMEC_DISABLE_NUMBA to any nonempty value before
import to force the numpy lane. Both lanes of outage_counts use only
+ * / min and comparisons, so their counts are bit-identical; the
integrand/delay kernels involve libm calls and agree to rounding error.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not os.environ.get("SECMEC_DISABLE_NUMBA")


def outage_flags_numpy(
    x_ba, x_aa, x_ab, x_be, x_ae, leak,
    z, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an,
):
    """Per-trial secrecy outage indicators (alpha, beta) over a block.

    Inputs are squared channel magnitudes (and the summed AN leakage gain);
    the c_* scalars fold powers and path losses so the per-trial math stays
    in the four basic operations.
    """
    den_e = c_an * leak + sigma2
    r_ab = c_ab * x_ab / sigma2
    r_ae = c_ae * x_ae / den_e
    out_a = (1.0 + r_ab) < z * (1.0 + r_ae)

    r_ba = c_ba * x_ba / (p_si * x_aa + sigma2)
    r_bb = c_bb1 * x_ab / (c_bb2 * x_ab + sigma2)
    r_be = (c_be1 * x_be + c_be2 * x_ae) / (c_be3 * x_ae + den_e)
    out_b = (1.0 + np.minimum(r_ba, r_bb)) < z * (1.0 + r_be)
    return out_a, out_b


def outage_counts_numpy(
    x_ba, x_aa, x_ab, x_be, x_ae, leak,
    z, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an,
):
    """Count secrecy outage events over a block of channel draws.

    Returns (alpha outages, beta outages, joint outages).
    """
    out_a, out_b = outage_flags_numpy(
        x_ba, x_aa, x_ab, x_be, x_ae, leak,
        z, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an,
    )
    n_a = int(np.count_nonzero(out_a))
    n_b = int(np.count_nonzero(out_b))
    n_j = int(np.count_nonzero(out_a | out_b))
    return n_a, n_b, n_j


def beta_integrand_numpy(
    y, lam, theta2, theta3, theta4, k_antennas,
    z, c_phi, si_coeff, k_phi, kappa, tau1,
    simplified, include_bs,
):
    """Density of the eavesdropper SINR times the legitimate-leg survival
    probability, evaluated on quadrature nodes y in (0, tau2).

    The density formula is the direct one and loses precision in the
    removable-singularity zone |1 - r| < 1e-3; callers must recompute
    those nodes with the stable fallback. theta3 = inf encodes disabled
    artificial noise.
    """
    y = np.asarray(y, dtype=float)
    one_minus_k = 1.0 - k_antennas
    u = 1.0 - lam - lam * y
    r = theta4 * u / theta2
    rho = 1.0 - r
    t = theta4 * y
    phi_t = np.exp(-t) * (1.0 + t / theta3) ** one_minus_k
    m_t = -1.0 + one_minus_k / (theta3 + t)
    w = rho * t / r
    dpsi = -w + one_minus_k * np.log1p(w / (theta3 + t))
    growth = np.expm1(dpsi)
    delta = phi_t * growth
    phi_tr = phi_t * (1.0 + growth)
    tr = t / r
    m_tr = -1.0 + one_minus_k / (theta3 + tr)
    r_prime = -lam * theta4 / theta2
    tau_prime = theta2 * (1.0 - lam) / (u * u)
    e1p = phi_t * m_t * theta4
    e2p = phi_tr * m_tr * tau_prime
    f = (r_prime / (rho * rho)) * delta + (r / rho) * e2p - e1p / rho

    x = z * y + z - 1.0
    if simplified:
        amp = c_phi / (c_phi + si_coeff)
    else:
        amp = c_phi / (c_phi + si_coeff * x)
    phat = amp * np.exp(-k_phi * x)
    if include_bs:
        inside = x < tau1
        bs_term = np.where(
            inside, np.exp(-kappa * x / np.where(inside, tau1 - x, 1.0)), 0.0
        )
        phat = phat * bs_term
    return phat * f


# The per-node variant: identical math, but lam/theta2/kappa/tau1 vary per
# node so a whole grid of power splits evaluates in one call. The numpy
# implementation broadcasts, so it is the same function.
beta_integrand_nodes_numpy = beta_integrand_numpy


def delay_partials_numpy(t_loc, t_off, n_tasks):
    """Completion-delay matrix D[i, m] = max(m*t_loc, (n_tasks-m)*t_off[i]).

    A zero remaining-task count yields zero offload delay even when the
    per-task offload time is infinite.
    """
    t_off = np.asarray(t_off, dtype=float)
    m = np.arange(n_tasks + 1, dtype=float)
    rem = n_tasks - m
    with np.errstate(invalid="ignore"):
        off = rem[None, :] * t_off[:, None]
    off = np.where(rem[None, :] == 0.0, 0.0, off)
    return np.maximum(m[None, :] * t_loc, off)


if HAVE_NUMBA:

    @njit(cache=True)
    def outage_counts_numba(
        x_ba, x_aa, x_ab, x_be, x_ae, leak,
        z, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an,
    ):
        n_a = 0
        n_b = 0
        n_j = 0
        for i in range(x_ba.shape[0]):
            den_e = c_an * leak[i] + sigma2
            r_ab = c_ab * x_ab[i] / sigma2
            r_ae = c_ae * x_ae[i] / den_e
            out_a = (1.0 + r_ab) < z * (1.0 + r_ae)

            r_ba = c_ba * x_ba[i] / (p_si * x_aa[i] + sigma2)
            r_bb = c_bb1 * x_ab[i] / (c_bb2 * x_ab[i] + sigma2)
            r_be = (c_be1 * x_be[i] + c_be2 * x_ae[i]) / (c_be3 * x_ae[i] + den_e)
            out_b = (1.0 + min(r_ba, r_bb)) < z * (1.0 + r_be)

            if out_a:
                n_a += 1
            if out_b:
                n_b += 1
            if out_a or out_b:
                n_j += 1
        return n_a, n_b, n_j

    @njit(cache=True)
    def _beta_point(
        yi, lam, theta2, theta3, theta4, one_minus_k,
        z, c_phi, si_coeff, k_phi, kappa, tau1,
        simplified, include_bs,
    ):
        u = 1.0 - lam - lam * yi
        r = theta4 * u / theta2
        rho = 1.0 - r
        t = theta4 * yi
        phi_t = math.exp(-t) * (1.0 + t / theta3) ** one_minus_k
        m_t = -1.0 + one_minus_k / (theta3 + t)
        w = rho * t / r
        dpsi = -w + one_minus_k * math.log1p(w / (theta3 + t))
        growth = math.expm1(dpsi)
        delta = phi_t * growth
        phi_tr = phi_t * (1.0 + growth)
        tr = t / r
        m_tr = -1.0 + one_minus_k / (theta3 + tr)
        r_prime = -lam * theta4 / theta2
        tau_prime = theta2 * (1.0 - lam) / (u * u)
        e1p = phi_t * m_t * theta4
        e2p = phi_tr * m_tr * tau_prime
        f = (r_prime / (rho * rho)) * delta + (r / rho) * e2p - e1p / rho

        x = z * yi + z - 1.0
        if simplified:
            amp = c_phi / (c_phi + si_coeff)
        else:
            amp = c_phi / (c_phi + si_coeff * x)
        phat = amp * math.exp(-k_phi * x)
        if include_bs:
            if x < tau1:
                phat = phat * math.exp(-kappa * x / (tau1 - x))
            else:
                phat = 0.0
        return phat * f

    @njit(cache=True)
    def beta_integrand_numba(
        y, lam, theta2, theta3, theta4, k_antennas,
        z, c_phi, si_coeff, k_phi, kappa, tau1,
        simplified, include_bs,
    ):
        one_minus_k = 1.0 - k_antennas
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _beta_point(
                y[i], lam, theta2, theta3, theta4, one_minus_k,
                z, c_phi, si_coeff, k_phi, kappa, tau1,
                simplified, include_bs,
            )
        return out

    @njit(cache=True)
    def beta_integrand_nodes_numba(
        y, lam, theta2, theta3, theta4, k_antennas,
        z, c_phi, si_coeff, k_phi, kappa, tau1,
        simplified, include_bs,
    ):
        one_minus_k = 1.0 - k_antennas
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _beta_point(
                y[i], lam[i], theta2[i], theta3, theta4, one_minus_k,
                z, c_phi, si_coeff, k_phi, kappa[i], tau1[i],
                simplified, include_bs,
            )
        return out

    @njit(cache=True)
    def delay_partials_numba(t_loc, t_off, n_tasks):
        n = t_off.shape[0]
        out = np.empty((n, n_tasks + 1))
        for i in range(n):
            for m in range(n_tasks + 1):
                rem = n_tasks - m
                if rem == 0:
                    off = 0.0
                else:
                    off = rem * t_off[i]
                local = m * t_loc
                out[i, m] = local if local > off else off
        return out

else:  # pragma: no cover - exercised only without numba
    outage_counts_numba = None
    beta_integrand_numba = None
    beta_integrand_nodes_numba = None
    delay_partials_numba = None


if USE_NUMBA:
    ACTIVE = "numba"
    outage_counts = outage_counts_numba
    beta_integrand = beta_integrand_numba
    beta_integrand_nodes = beta_integrand_nodes_numba
    delay_partials = delay_partials_numba
else:
    ACTIVE = "numpy"
    outage_counts = outage_counts_numpy
    beta_integrand = beta_integrand_numpy
    beta_integrand_nodes = beta_integrand_nodes_numpy
    delay_partials = delay_partials_numpy
