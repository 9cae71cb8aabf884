"""Per-realization SINRs, secure rates, and the offloading delay model.

The edge vehicle's data reaches the MEC server both through the NOMA
superposition decoded at the base station and through the full-duplex
decode-and-forward relay at the center vehicle, so its secure rate is
limited by the weaker of the two legs minus what the eavesdropper attains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .beamforming import an_leakage
from .channel import ChannelDraw, LinkGeometry
from .params import SystemParams

AN_MODES = ("model", "geometric", "off")


@dataclass(frozen=True)
class OffloadPlan:
    """Decision variables: power allocation ratio, local task splits, and
    the artificial-noise mode."""

    lam: float
    m_alpha: int
    m_beta: int
    an_mode: str = "model"

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 0.5:
            raise ValueError(f"lam must lie in (0, 0.5), got {self.lam}")
        for name in ("m_alpha", "m_beta"):
            m = getattr(self, name)
            if m < 0 or int(m) != m:
                raise ValueError(f"{name} must be a nonnegative integer, got {m}")
        if self.an_mode not in AN_MODES:
            raise ValueError(f"an_mode must be one of {AN_MODES}, got {self.an_mode!r}")


@dataclass(frozen=True)
class LinkReport:
    """SINRs, achievable rates, and secure rates for one channel draw."""

    r_beta_alpha: float
    r_beta_b: float
    r_alpha_b: float
    r_beta_e: float
    r_alpha_e: float
    rate_beta_alpha: float = 0.0
    rate_beta_b: float = 0.0
    rate_alpha_b: float = 0.0
    rate_beta_e: float = 0.0
    rate_alpha_e: float = 0.0
    c_alpha: float = 0.0
    c_beta: float = 0.0
    c_beta_alpha: float = 0.0
    c_beta_b: float = 0.0


@dataclass(frozen=True)
class DelayReport:
    """Local, offload, execution, and end-to-end delays in seconds.

    d_off and d_exe are the edge vehicle's transmission and MEC execution
    components, with d_off taken over its slower offload leg so that
    d_off + d_exe = max(d_mec_beta_alpha, d_mec_beta_b).
    """

    d_local_alpha: float
    d_local_beta: float
    d_off: float
    d_exe: float
    d_mec_alpha: float
    d_mec_beta_alpha: float
    d_mec_beta_b: float
    d_beta: float
    d_alpha: float


def compute_sinrs(
    draw: ChannelDraw,
    geometry: LinkGeometry,
    plan: OffloadPlan,
    params: SystemParams,
) -> LinkReport:
    """Evaluate the five receive SINRs for one realization.

    The relay leg sees residual self-interference; the base-station legs
    share the superposed center-vehicle transmission split by lam; both
    eavesdropper legs are degraded by the AN leakage term.
    """
    v = params.path_loss_exp
    noise = params.noise_w
    lam = plan.lam
    p_alpha = params.p_center_w
    p_beta = params.p_edge_w

    g_beta_alpha = abs(draw.h_beta_alpha) ** 2 * geometry.d_beta_alpha ** (-v)
    g_alpha_b = abs(draw.h_alpha_b) ** 2 * geometry.d_alpha_b ** (-v)
    g_beta_e = abs(draw.h_beta_e) ** 2 * geometry.d_beta_e ** (-v)
    g_alpha_e = abs(draw.h_alpha_e) ** 2 * geometry.d_alpha_e ** (-v)
    g_self = abs(draw.h_alpha_alpha) ** 2

    leakage = an_leakage(draw, params, plan.an_mode)
    an_term = params.p_an_w * geometry.d_b_e ** (-v) * leakage

    return LinkReport(
        r_beta_alpha=p_beta * g_beta_alpha / (params.p_si_w * g_self + noise),
        r_beta_b=(1.0 - lam) * p_alpha * g_alpha_b / (lam * p_alpha * g_alpha_b + noise),
        r_alpha_b=lam * p_alpha * g_alpha_b / noise,
        r_beta_e=(p_beta * g_beta_e + (1.0 - lam) * p_alpha * g_alpha_e)
        / (lam * p_alpha * g_alpha_e + an_term + noise),
        r_alpha_e=lam * p_alpha * g_alpha_e / (an_term + noise),
    )


def _with_rates(report: LinkReport, scale: float) -> LinkReport:
    rate_beta_alpha = scale * math.log2(1.0 + report.r_beta_alpha)
    rate_beta_b = scale * math.log2(1.0 + report.r_beta_b)
    rate_alpha_b = scale * math.log2(1.0 + report.r_alpha_b)
    rate_beta_e = scale * math.log2(1.0 + report.r_beta_e)
    rate_alpha_e = scale * math.log2(1.0 + report.r_alpha_e)
    return replace(
        report,
        rate_beta_alpha=rate_beta_alpha,
        rate_beta_b=rate_beta_b,
        rate_alpha_b=rate_alpha_b,
        rate_beta_e=rate_beta_e,
        rate_alpha_e=rate_alpha_e,
        c_alpha=max(rate_alpha_b - rate_alpha_e, 0.0),
        c_beta=max(min(rate_beta_alpha, rate_beta_b) - rate_beta_e, 0.0),
        c_beta_alpha=max(rate_beta_alpha - rate_beta_e, 0.0),
        c_beta_b=max(rate_beta_b - rate_beta_e, 0.0),
    )


def secure_rates(report: LinkReport) -> LinkReport:
    """Fill achievable rates log2(1+r) and zero-clamped secure rates."""
    return _with_rates(report, 1.0)


def oma_secure_rates(report: LinkReport) -> LinkReport:
    """Orthogonal-access baseline: the two streams occupy equal-duration
    slots, so every achievable rate is halved; intended for SINRs computed
    at the fixed ratio lam = 0.5 - eps."""
    return _with_rates(report, 0.5)


def _offload_delay(n_tasks: int, rate: float, params: SystemParams) -> float:
    if n_tasks == 0:
        return 0.0
    if rate <= 0.0:
        return math.inf
    return n_tasks * params.task_bits / (params.bandwidth_hz * rate)


def delays(plan: OffloadPlan, report: LinkReport, params: SystemParams) -> DelayReport:
    """Delay model for one pair under a given plan.

    Local computation runs at f_local, the MEC at f_mec; offload
    transmission uses the secure rate of each leg. A leg with zero secure
    rate and tasks left to offload yields an infinite delay.
    """
    cs = params.cycles_per_bit * params.task_bits
    rem_alpha = params.m_tasks - plan.m_alpha
    rem_beta = params.m_tasks - plan.m_beta
    if rem_alpha < 0 or rem_beta < 0:
        raise ValueError("local task count exceeds total tasks")

    d_local_alpha = plan.m_alpha * cs / params.f_local_hz
    d_local_beta = plan.m_beta * cs / params.f_local_hz
    d_exe_alpha = rem_alpha * cs / params.f_mec_hz
    d_exe_beta = rem_beta * cs / params.f_mec_hz

    d_mec_alpha = _offload_delay(rem_alpha, report.c_alpha, params) + d_exe_alpha
    d_off_ba = _offload_delay(rem_beta, report.c_beta_alpha, params)
    d_off_bb = _offload_delay(rem_beta, report.c_beta_b, params)
    d_mec_beta_alpha = d_off_ba + d_exe_beta
    d_mec_beta_b = d_off_bb + d_exe_beta

    return DelayReport(
        d_local_alpha=d_local_alpha,
        d_local_beta=d_local_beta,
        d_off=max(d_off_ba, d_off_bb),
        d_exe=d_exe_beta,
        d_mec_alpha=d_mec_alpha,
        d_mec_beta_alpha=d_mec_beta_alpha,
        d_mec_beta_b=d_mec_beta_b,
        d_beta=max(d_local_beta, d_mec_beta_alpha, d_mec_beta_b),
        d_alpha=max(d_local_alpha, d_mec_alpha),
    )
