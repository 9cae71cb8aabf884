import math
import os
import subprocess
import sys

import numpy as np
import pytest

from secmec import kernels


def _random_block(seed, n=4096):
    rng = np.random.default_rng(seed)
    arrays = tuple(np.ascontiguousarray(rng.exponential(size=n)) for _ in range(6))
    coeffs = (
        2.0**0.1,       # z
        3.9811e-15,     # sigma2
        1e-9,           # p_si
        6.4e-10,        # c_ba
        3.1e-9,         # c_bb1
        1.3e-9,         # c_bb2
        1.3e-9,         # c_ab
        2.4e-8,         # c_ae
        3.7e-10,        # c_be1
        5.6e-8,         # c_be2
        2.4e-8,         # c_be3
        1.1e-6,         # c_an
    )
    return arrays, coeffs


def test_outage_flags_match_direct_formula():
    arrays, coeffs = _random_block(0)
    x_ba, x_aa, x_ab, x_be, x_ae, leak = arrays
    z, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an = coeffs
    out_a, out_b = kernels.outage_flags_numpy(*arrays, *coeffs)

    den_e = c_an * leak + sigma2
    expect_a = (1 + c_ab * x_ab / sigma2) < z * (1 + c_ae * x_ae / den_e)
    r_legit = np.minimum(
        c_ba * x_ba / (p_si * x_aa + sigma2),
        c_bb1 * x_ab / (c_bb2 * x_ab + sigma2),
    )
    r_eve = (c_be1 * x_be + c_be2 * x_ae) / (c_be3 * x_ae + den_e)
    expect_b = (1 + r_legit) < z * (1 + r_eve)
    assert np.array_equal(out_a, expect_a)
    assert np.array_equal(out_b, expect_b)


def test_outage_counts_lanes_agree_exactly():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    for seed in range(10):
        arrays, coeffs = _random_block(seed)
        assert kernels.outage_counts_numpy(*arrays, *coeffs) == (
            kernels.outage_counts_numba(*arrays, *coeffs)
        )


def test_outage_counts_match_flag_sums():
    arrays, coeffs = _random_block(3)
    out_a, out_b = kernels.outage_flags_numpy(*arrays, *coeffs)
    n_a, n_b, n_j = kernels.outage_counts_numpy(*arrays, *coeffs)
    assert n_a == int(np.sum(out_a))
    assert n_b == int(np.sum(out_b))
    assert n_j == int(np.sum(out_a | out_b))
    assert max(n_a, n_b) <= n_j <= n_a + n_b


_INTEGRAND_ARGS = dict(
    lam=0.25,
    theta2=1.1e-4,
    theta3=2.0,
    theta4=0.5,
    k_antennas=10.0,
    z=2.0**0.1,
    c_phi=3.0,
    si_coeff=0.1,
    k_phi=0.2,
    kappa=1e-4,
    tau1=3.0,
    simplified=False,
    include_bs=False,
)


def _integrand_y():
    # stay strictly inside (0, tau2): tau2 = (1 - z*lam)/(z*lam) ~ 2.73
    return np.ascontiguousarray(np.linspace(1e-4, 2.7, 20_000))


def test_beta_integrand_lanes_agree():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    y = _integrand_y()
    args = list(_INTEGRAND_ARGS.values())
    a = kernels.beta_integrand_numpy(y, *args)
    b = kernels.beta_integrand_numba(y, *args)
    np.testing.assert_allclose(a, b, rtol=5e-13, atol=0.0)


def test_beta_integrand_nodes_matches_scalar_params():
    """The per-node-parameter variant with constant rows must reproduce the
    scalar-parameter kernel exactly."""
    y = _integrand_y()
    args = dict(_INTEGRAND_ARGS)
    n = len(y)
    nodes_args = [
        np.full(n, args["lam"]),
        np.full(n, args["theta2"]),
        args["theta3"],
        args["theta4"],
        args["k_antennas"],
        args["z"],
        args["c_phi"],
        args["si_coeff"],
        args["k_phi"],
        np.full(n, args["kappa"]),
        np.full(n, args["tau1"]),
        args["simplified"],
        args["include_bs"],
    ]
    ref = kernels.beta_integrand_numpy(y, *args.values())
    np.testing.assert_allclose(
        kernels.beta_integrand_nodes_numpy(y, *nodes_args), ref, rtol=5e-13
    )
    if kernels.HAVE_NUMBA:
        np.testing.assert_allclose(
            kernels.beta_integrand_nodes_numba(y, *nodes_args), ref, rtol=5e-13
        )


def test_beta_integrand_nonnegative_and_finite():
    y = _integrand_y()
    for simplified in (False, True):
        args = dict(_INTEGRAND_ARGS, simplified=simplified)
        vals = kernels.beta_integrand(y, *args.values())
        assert np.all(np.isfinite(vals))
        assert np.all(vals >= -1e-12)


def test_delay_partials_matches_python_loop():
    rng = np.random.default_rng(1)
    t_off = np.ascontiguousarray(rng.uniform(0.01, 0.5, 40))
    t_loc = 0.2
    n_tasks = 10
    got = kernels.delay_partials_numpy(t_loc, t_off, n_tasks)
    assert got.shape == (40, 11)
    for i in range(len(t_off)):
        for m in range(n_tasks + 1):
            rem = n_tasks - m
            off = 0.0 if rem == 0 else rem * t_off[i]
            assert got[i, m] == pytest.approx(max(m * t_loc, off), rel=1e-15)


def test_delay_partials_lanes_agree_exactly():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(2)
    t_off = np.ascontiguousarray(rng.uniform(0.0, 1.0, 64))
    a = kernels.delay_partials_numpy(0.2, t_off, 10)
    b = kernels.delay_partials_numba(0.2, t_off, 10)
    np.testing.assert_array_equal(a, b)


def test_delay_partials_infinite_rate_tasks():
    """Infinite offload time must still give zero cost for the all-local
    column (0 * inf guard)."""
    t_off = np.array([math.inf])
    got = kernels.delay_partials(0.2, t_off, 3)
    assert got[0, 3] == pytest.approx(0.6)
    assert math.isinf(got[0, 0])


def test_dispatch_names_consistent():
    assert kernels.ACTIVE in ("numba", "numpy")
    if kernels.USE_NUMBA:
        assert kernels.outage_counts is kernels.outage_counts_numba
    else:
        assert kernels.outage_counts is kernels.outage_counts_numpy


def test_disable_flag_selects_numpy_lane():
    """SECMEC_DISABLE_NUMBA forces the plain lane in a fresh interpreter."""
    env = dict(os.environ, SECMEC_DISABLE_NUMBA="1")
    code = "import secmec.kernels as k; print(k.ACTIVE)"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"
