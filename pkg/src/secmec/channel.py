"""Rayleigh channel draws, link geometry, and gain distributions.

Channels are quasi-static circularly-symmetric complex Gaussian, so squared
magnitudes are exponential with rate gamma_j = 1/sigma^2_j, and the summed
artificial-noise leakage across K-1 antennas is Erlang(K-1, gamma_be).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .params import SystemParams

# Vehicle-to-vehicle distances are clamped to this floor so that path loss
# stays finite when two sampled positions (or a vehicle and the eavesdropper)
# coincide on the road axis.
MIN_SEPARATION_M = 1.0


@dataclass(frozen=True)
class LinkGeometry:
    """Straight-line distances (meters) between the five node pairs of one
    relay pair: edge vehicle (beta), center vehicle (alpha), base station (b)
    and eavesdropper (e)."""

    d_beta_alpha: float
    d_alpha_b: float
    d_beta_e: float
    d_alpha_e: float
    d_b_e: float

    def __post_init__(self) -> None:
        for name in ("d_beta_alpha", "d_alpha_b", "d_beta_e", "d_alpha_e", "d_b_e"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name}: distance must be positive")


@dataclass(frozen=True)
class ChannelDraw:
    """One realization of every channel coefficient involving a pair.

    Scalars are single complex coefficients; ``h_b_alpha`` and ``h_b_e`` are
    the K-1 transmit-antenna vectors toward the center vehicle and the
    eavesdropper, ``h_bb`` the (K-1)x(K-1) base-station self-interference
    matrix.
    """

    h_beta_alpha: complex
    h_alpha_b: complex
    h_beta_e: complex
    h_alpha_e: complex
    h_alpha_alpha: complex
    h_b_alpha: np.ndarray
    h_b_e: np.ndarray
    h_bb: np.ndarray


def vehicle_bs_distance(l_m: float, bs_height_m: float) -> float:
    """Distance from a road position to the elevated base station antenna."""
    return math.hypot(l_m, bs_height_m)


def vehicle_distance(l_a: float, l_b: float) -> float:
    """Along-road distance between two positions, floored at 1 m."""
    return max(abs(l_a - l_b), MIN_SEPARATION_M)


def pair_geometry(
    edge_l_m: float, center_l_m: float, eve_l_m: float, params: SystemParams
) -> LinkGeometry:
    """Geometry of one (edge, center) pair with the eavesdropper placed at
    ``eve_l_m`` on the same road."""
    height = params.bs_height_m
    return LinkGeometry(
        d_beta_alpha=vehicle_distance(edge_l_m, center_l_m),
        d_alpha_b=vehicle_bs_distance(center_l_m, height),
        d_beta_e=vehicle_distance(edge_l_m, eve_l_m),
        d_alpha_e=vehicle_distance(center_l_m, eve_l_m),
        d_b_e=vehicle_bs_distance(eve_l_m, height),
    )


def effective_gain(h: complex, d: float, v: float):
    """Effective channel gain |h|^2 d^-v."""
    if not d > 0.0:
        raise ValueError(f"distance must be positive, got {d}")
    return (h * np.conj(h)).real * d ** (-v)


def gain_cdf_exponential(x, rate: float):
    """CDF of an exponential squared-magnitude gain: 1 - exp(-rate*x)."""
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate}")
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, -np.expm1(-rate * np.maximum(x, 0.0)), 0.0)
    return out if out.ndim else float(out)


def erlang_pdf(x, shape: int, rate: float):
    """Erlang density with integer shape k and rate gamma.

    This is the distribution of the summed AN leakage H_be over K-1
    antennas (shape = K-1, rate = gamma_be).
    """
    if shape < 1 or int(shape) != shape:
        raise ValueError(f"shape must be a positive integer, got {shape}")
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("erlang_pdf is defined for x >= 0")
    k = int(shape)
    out = rate**k * x ** (k - 1) * np.exp(-rate * x) / math.factorial(k - 1)
    return out if out.ndim else float(out)


def erlang_cdf(x, shape: int, rate: float):
    """Erlang CDF via the regularized lower incomplete gamma function."""
    if shape < 1 or int(shape) != shape:
        raise ValueError(f"shape must be a positive integer, got {shape}")
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate}")
    x = np.asarray(x, dtype=float)
    out = special.gammainc(int(shape), rate * np.maximum(x, 0.0))
    out = np.where(x >= 0.0, out, 0.0)
    return out if out.ndim else float(out)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, variance: float, size=None) -> np.ndarray:
    """CN(0, variance) samples: E[|h|^2] = variance."""
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) * scale


def draw_channels(params: SystemParams, seed) -> ChannelDraw:
    """Draw one full channel realization, deterministic per seed.

    The draw order is fixed (scalar links first, then the antenna vectors)
    so that a given seed always maps to the same coefficients.
    """
    rng = _as_rng(seed)
    var = params.channel_variances
    k1 = params.bs_antennas - 1
    return ChannelDraw(
        h_beta_alpha=complex(complex_gaussian(rng, var["beta_alpha"])),
        h_alpha_b=complex(complex_gaussian(rng, var["alpha_b"])),
        h_beta_e=complex(complex_gaussian(rng, var["beta_e"])),
        h_alpha_e=complex(complex_gaussian(rng, var["alpha_e"])),
        h_alpha_alpha=complex(complex_gaussian(rng, var["alpha_alpha"])),
        h_b_alpha=complex_gaussian(rng, var["b_alpha"], size=k1),
        h_b_e=complex_gaussian(rng, var["b_e"], size=k1),
        h_bb=complex_gaussian(rng, var["bb"], size=(k1, k1)),
    )


def sample_gains(rng: np.random.Generator, variance: float, size=None):
    """Exponential |h|^2 samples with mean ``variance``."""
    return rng.exponential(variance, size)


def sample_erlang(rng: np.random.Generator, shape: int, rate: float, size=None):
    """Erlang(shape, rate) samples (sum of ``shape`` exponentials)."""
    return rng.gamma(int(shape), 1.0 / rate, size)
