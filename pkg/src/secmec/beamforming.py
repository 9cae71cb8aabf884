"""Artificial-noise beamforming: null-steering weights and leakage models.

Two leakage modes exist. The "model" mode uses the statistical value
H_be/(K-1) that all analytic secrecy expressions assume. The "geometric"
mode actually projects h_be onto the null space of the nulled links and
measures |w^H h_be|^2, which quantifies how optimistic the model is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelDraw
from .params import SystemParams

# Relative rank tolerance for the null-space factorization and the absolute
# residual allowed when checking that a weight vector nulls a constraint.
RANK_RTOL = 1e-12
NULLING_ATOL = 1e-10


@dataclass(frozen=True)
class AnWeights:
    """AN weight vector for the K-1 transmit antennas and its leakage toward
    the eavesdropper."""

    w: np.ndarray = field(repr=False)
    leakage: float
    mode: str
    degenerate: bool = False


def _null_space_projector(constraints: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the space orthogonal to the given columns."""
    u, s, _ = np.linalg.svd(constraints, full_matrices=False)
    tol = RANK_RTOL * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    basis = u[:, :rank]
    k = constraints.shape[0]
    return np.eye(k, dtype=complex) - basis @ basis.conj().T


def solve_an_weights(draw: ChannelDraw) -> AnWeights:
    """Project h_be onto the null space of the links that must receive no AN.

    The nulled links are the BS-to-center vector h_b_alpha and the
    self-interference column toward the BS receive antenna (first column of
    h_bb); nulling the full h_bb matrix would generically leave an empty
    null space.
    """
    constraints = np.column_stack([draw.h_b_alpha, draw.h_bb[:, 0]])
    projector = _null_space_projector(constraints)
    projected = projector @ draw.h_b_e
    norm = float(np.linalg.norm(projected))
    scale = float(np.linalg.norm(draw.h_b_e))
    if norm <= RANK_RTOL * max(scale, 1.0):
        zero = np.zeros_like(draw.h_b_e)
        return AnWeights(w=zero, leakage=0.0, mode="geometric", degenerate=True)
    w = projected / norm
    leakage = abs(np.vdot(w, draw.h_b_e)) ** 2
    return AnWeights(w=w, leakage=float(leakage), mode="geometric")


def an_leakage_model(draw: ChannelDraw, k_antennas: int) -> float:
    """Statistical leakage value |w^H h_be|^2 = H_be/(K-1) with H_be the
    summed squared magnitude over the K-1 AN antennas."""
    if k_antennas < 2:
        raise ValueError(f"k_antennas must be >= 2, got {k_antennas}")
    h_sum = float(np.sum(np.abs(draw.h_b_e) ** 2))
    return h_sum / (k_antennas - 1)


def an_weights_model(draw: ChannelDraw, k_antennas: int) -> AnWeights:
    """Model-mode AnWeights carrying the statistical leakage (no vector)."""
    leakage = an_leakage_model(draw, k_antennas)
    k1 = k_antennas - 1
    w = np.full(k1, 1.0 / np.sqrt(k1), dtype=complex)
    return AnWeights(w=w, leakage=leakage, mode="model")


def an_leakage(draw: ChannelDraw, params: SystemParams, mode: str = "model") -> float:
    """Leakage |w^H h_be|^2 under the requested mode."""
    if mode == "model":
        return an_leakage_model(draw, params.bs_antennas)
    if mode == "geometric":
        return solve_an_weights(draw).leakage
    if mode == "off":
        return 0.0
    raise ValueError(f"unknown AN mode: {mode!r}")


def sample_an_leakage(
    rng: np.random.Generator, params: SystemParams, size=None
):
    """Model-mode leakage samples: Erlang(K-1, gamma_be)/(K-1)."""
    k1 = params.bs_antennas - 1
    variance = params.channel_variances["b_e"]
    h_sum = rng.gamma(k1, variance, size)
    return h_sum / k1
