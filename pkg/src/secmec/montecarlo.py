"""Monte Carlo ground truth for outage probabilities and delays.

Trials are organized in fixed 4096-trial blocks. Each block owns an
independent generator spawned from the master seed and the block index, and
per-block partial results are reduced in block order with exact (integer or
fsum) accumulation, so estimates are bit-identical however the blocks are
executed or grouped: serial, parallel, or any batch size.

Within a block the draw order is fixed: the five squared channel gains
(relay leg, self-interference, center-to-BS, edge-to-eavesdropper,
center-to-eavesdropper), then the artificial-noise leakage gain. "off" mode
still draws the leakage variate and discards it, so AN-on and AN-off runs
of the same seed see identical signal channels (common random numbers).
"geometric" mode instead draws the BS-side vectors and nulls the jamming
beam exactly, which costs three complex matrices per block.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.random import SeedSequence, default_rng

from . import kernels
from .channel import LinkGeometry
from .link import AN_MODES, OffloadPlan
from .params import SystemParams

BLOCK_TRIALS = 4096
TRACE_ROW_CAP = 10_000


@dataclass(frozen=True)
class McConfig:
    """Size, seeding, and AN handling of one Monte Carlo run."""

    trials: int = 10_000
    seed: int = 0
    an_mode: str = "model"
    batch_size: int = BLOCK_TRIALS

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.an_mode not in AN_MODES:
            raise ValueError(f"an_mode must be one of {AN_MODES}, got {self.an_mode!r}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials_used: int


def _block_rng(seed: int, block: int):
    return default_rng(SeedSequence(entropy=seed, spawn_key=(block,)))


def _complex_matrix(rng, variance: float, rows: int, cols: int) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) * scale


def _geometric_leakage(rng, params: SystemParams, n: int) -> np.ndarray:
    """Exact leakage |w^H h_be|^2 of the nulled jamming beam, per trial.

    The unit beam w is the normalized projection of the eavesdropper vector
    onto the null space of the two protected directions, so the leakage is
    the squared residual of h_be against their span; a 2x2 Gram solve gives
    it without per-trial SVDs.
    """
    k1 = params.bs_antennas - 1
    var = params.channel_variances
    c1 = _complex_matrix(rng, var["b_alpha"], n, k1)
    c2 = _complex_matrix(rng, var["bb"], n, k1)
    h = _complex_matrix(rng, var["b_e"], n, k1)
    g11 = np.einsum("ij,ij->i", c1.conj(), c1).real
    g22 = np.einsum("ij,ij->i", c2.conj(), c2).real
    g12 = np.einsum("ij,ij->i", c1.conj(), c2)
    b1 = np.einsum("ij,ij->i", c1.conj(), h)
    b2 = np.einsum("ij,ij->i", c2.conj(), h)
    det = g11 * g22 - np.abs(g12) ** 2
    quad = (
        g22 * np.abs(b1) ** 2
        + g11 * np.abs(b2) ** 2
        - 2.0 * (g12 * b1.conj() * b2).real
    ) / det
    total = np.einsum("ij,ij->i", h.conj(), h).real
    return np.maximum(total - quad, 0.0)


def _draw_block(rng, params: SystemParams, n: int, an_mode: str):
    var = params.channel_variances
    x_ba = rng.exponential(var["beta_alpha"], n)
    x_aa = rng.exponential(var["alpha_alpha"], n)
    x_ab = rng.exponential(var["alpha_b"], n)
    x_be = rng.exponential(var["beta_e"], n)
    x_ae = rng.exponential(var["alpha_e"], n)
    if an_mode == "geometric":
        leak = _geometric_leakage(rng, params, n)
    else:
        leak = rng.gamma(params.bs_antennas - 1, var["b_e"], n)
    return x_ba, x_aa, x_ab, x_be, x_ae, leak


def _sop_coeffs(
    geometry: LinkGeometry, plan: OffloadPlan, params: SystemParams
) -> tuple:
    """Scalar coefficients folding powers and path losses into the per-trial
    SINR arithmetic, in the argument order of the outage kernels."""
    v = params.path_loss_exp
    lam = plan.lam
    pl_ab = params.p_center_w * geometry.d_alpha_b ** (-v)
    pl_ae = params.p_center_w * geometry.d_alpha_e ** (-v)
    if plan.an_mode == "off":
        c_an = 0.0
    elif plan.an_mode == "geometric":
        c_an = params.p_an_w * geometry.d_b_e ** (-v)
    else:
        c_an = params.p_an_antenna_w * geometry.d_b_e ** (-v)
    return (
        2.0**params.secrecy_rate_target,
        params.noise_w,
        params.p_si_w,
        params.p_edge_w * geometry.d_beta_alpha ** (-v),
        (1.0 - lam) * pl_ab,
        lam * pl_ab,
        lam * pl_ab,
        lam * pl_ae,
        params.p_edge_w * geometry.d_beta_e ** (-v),
        (1.0 - lam) * pl_ae,
        lam * pl_ae,
        c_an,
    )


def _resolve_an_mode(plan: OffloadPlan, mc: McConfig) -> str:
    if plan.an_mode != mc.an_mode:
        raise ValueError(
            f"plan an_mode {plan.an_mode!r} conflicts with config an_mode {mc.an_mode!r}"
        )
    return mc.an_mode


def _bernoulli_estimate(count: int, trials: int) -> McEstimate:
    p = count / trials
    se = math.sqrt(p * (1.0 - p) / (trials - 1)) if trials > 1 else math.nan
    return McEstimate(mean=p, std_error=se, trials_used=trials)


def _block_sizes(trials: int):
    for block in range(0, (trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS):
        start = block * BLOCK_TRIALS
        yield block, min(BLOCK_TRIALS, trials - start)


def mc_sop(
    geometry: LinkGeometry,
    plan: OffloadPlan,
    params: SystemParams,
    mc: McConfig,
    trace_path: str | Path | None = None,
) -> tuple[McEstimate, McEstimate, McEstimate]:
    """Estimate the two per-vehicle secrecy outage probabilities and the
    system outage probability.

    The system estimate counts the joint event (center outage OR edge
    outage) directly rather than combining the marginals, so independence
    of the two events is itself checkable against the combination rule.
    Returns (center, edge, system) estimates.
    """
    an_mode = _resolve_an_mode(plan, mc)
    coeffs = _sop_coeffs(geometry, plan, params)
    n_a = n_b = n_j = 0
    writer = rows_left = handle = None
    if trace_path is not None:
        handle = open(trace_path, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(["trial", "outage_alpha", "outage_beta", "outage_joint"])
        rows_left = TRACE_ROW_CAP
    try:
        for block, size in _block_sizes(mc.trials):
            arrays = _draw_block(_block_rng(mc.seed, block), params, size, an_mode)
            # batch_size chunks the kernel calls, never the RNG stream, so
            # the integer counts are identical for every chunking choice.
            for start in range(0, size, mc.batch_size):
                chunk = slice(start, min(start + mc.batch_size, size))
                da, db, dj = kernels.outage_counts(
                    *(np.ascontiguousarray(a[chunk]) for a in arrays), *coeffs
                )
                n_a += da
                n_b += db
                n_j += dj
            if writer is not None and rows_left > 0:
                out_a, out_b = kernels.outage_flags_numpy(*arrays, *coeffs)
                take = min(rows_left, size)
                base = block * BLOCK_TRIALS
                for i in range(take):
                    writer.writerow(
                        [base + i, int(out_a[i]), int(out_b[i]), int(out_a[i] or out_b[i])]
                    )
                rows_left -= take
    finally:
        if handle is not None:
            handle.close()
    return (
        _bernoulli_estimate(n_a, mc.trials),
        _bernoulli_estimate(n_b, mc.trials),
        _bernoulli_estimate(n_j, mc.trials),
    )


def _moment_estimate(total: float, total_sq: float, n: int) -> McEstimate:
    if n == 0:
        return McEstimate(mean=math.nan, std_error=math.nan, trials_used=0)
    mean = total / n
    if n == 1:
        return McEstimate(mean=mean, std_error=math.nan, trials_used=1)
    var = max((total_sq - n * mean * mean) / (n - 1), 0.0)
    return McEstimate(mean=mean, std_error=math.sqrt(var / n), trials_used=n)


def mc_delay(
    geometry: LinkGeometry,
    plan: OffloadPlan,
    params: SystemParams,
    mc: McConfig,
    trace_path: str | Path | None = None,
) -> tuple[McEstimate, McEstimate, float]:
    """Estimate the completion delays of the edge and center vehicles.

    Uses the same per-block channel stream as mc_sop. A trial whose secure
    rate on a needed offload leg is zero has infinite delay; such trials are
    excluded from the means and reported via the returned infeasibility
    fraction (fraction of trials where either vehicle's delay is infinite).
    Returns (edge estimate, center estimate, infeasible fraction).
    """
    an_mode = _resolve_an_mode(plan, mc)
    (_, sigma2, p_si, c_ba, c_bb1, c_bb2, c_ab, c_ae, c_be1, c_be2, c_be3, c_an) = (
        _sop_coeffs(geometry, plan, params)
    )
    cs = params.cycles_per_bit * params.task_bits
    t_local = cs / params.f_local_hz
    rem_a = params.m_tasks - plan.m_alpha
    rem_b = params.m_tasks - plan.m_beta
    d_local_a = plan.m_alpha * t_local
    d_local_b = plan.m_beta * t_local
    d_exe_a = rem_a * cs / params.f_mec_hz
    d_exe_b = rem_b * cs / params.f_mec_hz
    bits_a = rem_a * params.task_bits / params.bandwidth_hz
    bits_b = rem_b * params.task_bits / params.bandwidth_hz

    sums_b: list[float] = []
    sums_b_sq: list[float] = []
    sums_a: list[float] = []
    sums_a_sq: list[float] = []
    n_fin_a = n_fin_b = n_bad = 0
    writer = rows_left = handle = None
    if trace_path is not None:
        handle = open(trace_path, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(["trial", "d_beta", "d_alpha"])
        rows_left = TRACE_ROW_CAP
    try:
        for block, size in _block_sizes(mc.trials):
            x_ba, x_aa, x_ab, x_be, x_ae, leak = _draw_block(
                _block_rng(mc.seed, block), params, size, an_mode
            )
            den_e = c_an * leak + sigma2
            rate_ab = np.log2(1.0 + c_ab * x_ab / sigma2)
            rate_ae = np.log2(1.0 + c_ae * x_ae / den_e)
            rate_ba = np.log2(1.0 + c_ba * x_ba / (p_si * x_aa + sigma2))
            rate_bb = np.log2(1.0 + c_bb1 * x_ab / (c_bb2 * x_ab + sigma2))
            rate_be = np.log2(
                1.0 + (c_be1 * x_be + c_be2 * x_ae) / (c_be3 * x_ae + den_e)
            )
            sec_a = np.maximum(rate_ab - rate_ae, 0.0)
            sec_ba = np.maximum(rate_ba - rate_be, 0.0)
            sec_bb = np.maximum(rate_bb - rate_be, 0.0)

            with np.errstate(divide="ignore", invalid="ignore"):
                d_alpha = np.maximum(d_local_a, bits_a / sec_a + d_exe_a)
                d_beta = np.maximum(
                    d_local_b,
                    np.maximum(bits_b / sec_ba, bits_b / sec_bb) + d_exe_b,
                )
            if rem_a == 0:
                d_alpha = np.full(size, d_local_a)
            if rem_b == 0:
                d_beta = np.full(size, d_local_b)

            fin_a = np.isfinite(d_alpha)
            fin_b = np.isfinite(d_beta)
            n_fin_a += int(np.count_nonzero(fin_a))
            n_fin_b += int(np.count_nonzero(fin_b))
            n_bad += int(np.count_nonzero(~(fin_a & fin_b)))
            da = d_alpha[fin_a]
            db = d_beta[fin_b]
            sums_a.append(float(np.sum(da)))
            sums_a_sq.append(float(np.sum(da * da)))
            sums_b.append(float(np.sum(db)))
            sums_b_sq.append(float(np.sum(db * db)))
            if writer is not None and rows_left > 0:
                take = min(rows_left, size)
                base = block * BLOCK_TRIALS
                for i in range(take):
                    writer.writerow([base + i, repr(float(d_beta[i])), repr(float(d_alpha[i]))])
                rows_left -= take
    finally:
        if handle is not None:
            handle.close()
    est_b = _moment_estimate(math.fsum(sums_b), math.fsum(sums_b_sq), n_fin_b)
    est_a = _moment_estimate(math.fsum(sums_a), math.fsum(sums_a_sq), n_fin_a)
    return est_b, est_a, n_bad / mc.trials
