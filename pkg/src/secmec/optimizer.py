"""Delay-minimizing task-split search for one vehicle pair.

The decision variables are the power split lam and the locally-computed
task counts (m_alpha, m_beta); the objective is the edge vehicle's
completion delay subject to per-vehicle deadline and secrecy-outage
constraints. One optimizer run sees a single channel realization: the
deadline constraints use that realization's secure rates, while the outage
constraint uses the statistical (analytic) outage probabilities, which
depend on lam but not on the fading draw.

exhaustive_search exploits the structure of the grid: for a given lam the
delay and deadline constraints separate per vehicle and the outage
constraint does not involve the task counts at all, so the best cell per
lam is found vectorized, candidates are walked in delay order, and the
outage probabilities (the expensive part) are only evaluated until the
first candidate passes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.random import SeedSequence, default_rng

from . import kernels
from .beamforming import an_leakage
from .channel import ChannelDraw, LinkGeometry, effective_gain
from .params import SystemParams
from .secrecy_analytic import (
    SopInputs,
    sop_alpha_closed,
    sop_alpha_grid,
    sop_beta_grid,
    sop_beta_quadrature,
)

PENALTY_CAP = 1e3
FITNESS_EPS = 1e-9
LAMBDA_MIN = 0.005
LAMBDA_MAX = 0.495
EARLY_STOP_STREAK = 10


@dataclass(frozen=True)
class GaConfig:
    """Genetic-search hyperparameters."""

    population: int = 50
    iterations: int = 200
    crossover_prob: float = 0.8
    mutation_prob: float = 0.05
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 2 or self.population % 2:
            raise ValueError(f"population must be an even integer >= 2, got {self.population}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class Chromosome:
    """One candidate solution: power split plus both local-task counts.

    lam = 0.5 is reserved for the orthogonal baseline's even split; the
    non-orthogonal search space is the open interval below it.
    """

    lam: float
    m_alpha: int
    m_beta: int

    def __post_init__(self) -> None:
        if not 0.0 < self.lam <= 0.5:
            raise ValueError(f"lam must lie in (0, 0.5], got {self.lam}")
        for name in ("m_alpha", "m_beta"):
            m = getattr(self, name)
            if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {m!r}")


@dataclass(frozen=True)
class OptResult:
    best: Chromosome
    d_beta: float
    d_alpha: float
    feasible: bool
    history: tuple[float, ...]
    evaluations: int


@dataclass
class OptContext:
    """Folded per-realization channel state shared by all evaluations.

    sig_* are received signal powers (transmit power x squared gain x path
    loss) before the power split; den_relay is the relay's full-duplex
    noise-plus-self-interference floor; an_rx_w is the jamming power
    reaching the eavesdropper. Outage probabilities are cached per lam
    since they are independent of the task counts; the center vehicle's
    cache can be shared across contexts that differ only in edge power.
    """

    params: SystemParams
    geometry: LinkGeometry
    sig_alpha_b: float
    sig_alpha_e: float
    sig_beta_alpha: float
    sig_beta_e: float
    den_relay_w: float
    an_rx_w: float
    an: bool = True
    oma: bool = False
    sop_override: Callable[[float], tuple[float, float]] | None = None
    alpha_cache: dict[float, float] = field(default_factory=dict)
    beta_cache: dict[float, float] = field(default_factory=dict)

    @classmethod
    def from_draw(
        cls,
        params: SystemParams,
        geometry: LinkGeometry,
        draw: ChannelDraw,
        an_mode: str = "model",
        oma: bool = False,
        alpha_cache: dict[float, float] | None = None,
        beta_cache: dict[float, float] | None = None,
    ) -> "OptContext":
        v = params.path_loss_exp
        leakage = an_leakage(draw, params, an_mode)
        return cls(
            params=params,
            geometry=geometry,
            sig_alpha_b=params.p_center_w
            * effective_gain(draw.h_alpha_b, geometry.d_alpha_b, v),
            sig_alpha_e=params.p_center_w
            * effective_gain(draw.h_alpha_e, geometry.d_alpha_e, v),
            sig_beta_alpha=params.p_edge_w
            * effective_gain(draw.h_beta_alpha, geometry.d_beta_alpha, v),
            sig_beta_e=params.p_edge_w
            * effective_gain(draw.h_beta_e, geometry.d_beta_e, v),
            den_relay_w=params.p_si_w * (draw.h_alpha_alpha * draw.h_alpha_alpha.conjugate()).real
            + params.noise_w,
            an_rx_w=params.p_an_w * geometry.d_b_e ** (-v) * leakage,
            an=an_mode != "off",
            oma=oma,
            alpha_cache=alpha_cache if alpha_cache is not None else {},
            beta_cache=beta_cache if beta_cache is not None else {},
        )

    def secure_rates(self, lam):
        """Secure rates (center, edge-relay leg, edge-BS leg) at one or
        many power splits."""
        lam = np.asarray(lam, dtype=float)
        noise = self.params.noise_w
        den_e = self.an_rx_w + noise
        r_ab = lam * self.sig_alpha_b / noise
        r_ae = lam * self.sig_alpha_e / den_e
        r_ba = self.sig_beta_alpha / self.den_relay_w
        r_bb = (1.0 - lam) * self.sig_alpha_b / (lam * self.sig_alpha_b + noise)
        r_be = (self.sig_beta_e + (1.0 - lam) * self.sig_alpha_e) / (
            lam * self.sig_alpha_e + den_e
        )
        scale = 0.5 if self.oma else 1.0
        rate_ab = scale * np.log2(1.0 + r_ab)
        rate_ae = scale * np.log2(1.0 + r_ae)
        rate_ba = scale * np.log2(1.0 + r_ba)
        rate_bb = scale * np.log2(1.0 + r_bb)
        rate_be = scale * np.log2(1.0 + r_be)
        c_alpha = np.maximum(rate_ab - rate_ae, 0.0)
        c_beta_alpha = np.maximum(rate_ba - rate_be, 0.0)
        c_beta_b = np.maximum(rate_bb - rate_be, 0.0)
        if lam.ndim:
            return c_alpha, c_beta_alpha + np.zeros_like(c_alpha), c_beta_b
        return float(c_alpha), float(c_beta_alpha), float(c_beta_b)

    def sop_alpha(self, lam: float) -> float:
        """Analytic outage probability of the center vehicle at a split."""
        if self.sop_override is not None:
            return self.sop_override(lam)[0]
        p = self.alpha_cache.get(lam)
        if p is None:
            inputs = SopInputs.from_params(self.params, self.geometry, lam, an=self.an)
            p = sop_alpha_closed(inputs)
            self.alpha_cache[lam] = p
        return p

    def sop_beta(self, lam: float) -> float:
        """Analytic outage probability of the edge vehicle at a split."""
        if self.sop_override is not None:
            return self.sop_override(lam)[1]
        p = self.beta_cache.get(lam)
        if p is None:
            inputs = SopInputs.from_params(self.params, self.geometry, lam, an=self.an)
            p = sop_beta_quadrature(inputs)
            self.beta_cache[lam] = p
        return p

    def sop(self, lam: float) -> tuple[float, float]:
        """Analytic outage probabilities (center, edge) at a power split."""
        if self.sop_override is not None:
            return self.sop_override(lam)
        return self.sop_alpha(lam), self.sop_beta(lam)

    def fill_alpha_grid(self, lams: np.ndarray) -> None:
        """Bulk-populate the center-side cache for a whole split grid."""
        if self.sop_override is not None:
            return
        missing = [lam for lam in map(float, lams) if lam not in self.alpha_cache]
        if missing:
            vals = sop_alpha_grid(self.params, self.geometry, np.array(missing), an=self.an)
            self.alpha_cache.update(zip(missing, map(float, vals)))

    def fill_beta_grid(self, lams: np.ndarray) -> None:
        """Bulk-populate the edge-side cache for a whole split grid."""
        if self.sop_override is not None:
            return
        missing = [lam for lam in map(float, lams) if lam not in self.beta_cache]
        if missing:
            vals = sop_beta_grid(self.params, self.geometry, np.array(missing), an=self.an)
            self.beta_cache.update(zip(missing, map(float, vals)))


def _delay_terms(params: SystemParams) -> tuple[float, float]:
    cs = params.cycles_per_bit * params.task_bits
    return cs / params.f_local_hz, cs / params.f_mec_hz


def _offload_seconds(rate, params: SystemParams):
    """Per-task transmit seconds at a secure rate; inf when the link is dead."""
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        out = params.task_bits / (params.bandwidth_hz * rate)
    return out if out.ndim else float(out)


def evaluate_fitness(
    ch: Chromosome, context: OptContext
) -> tuple[float, float, float]:
    """Objective, penalty, and fitness of one chromosome.

    The penalty sums a normalized violation for each broken constraint
    (deadline constraints scaled by the deadline and capped, outage
    constraints scaled by the tolerance), weighted by mu = 10x deadline;
    fitness is the inverse of delay plus penalty.
    """
    params = context.params
    m_max = params.m_tasks
    if ch.m_alpha > m_max or ch.m_beta > m_max:
        raise ValueError(f"task counts exceed {m_max}: {ch}")
    t_local, t_exe = _delay_terms(params)
    c_alpha, c_ba, c_bb = context.secure_rates(ch.lam)
    rem_a = m_max - ch.m_alpha
    rem_b = m_max - ch.m_beta
    d_loc_a = ch.m_alpha * t_local
    d_loc_b = ch.m_beta * t_local
    d_mec_a = rem_a * (_offload_seconds(c_alpha, params) + t_exe) if rem_a else 0.0
    d_mec_ba = rem_b * (_offload_seconds(c_ba, params) + t_exe) if rem_b else 0.0
    d_mec_bb = rem_b * (_offload_seconds(c_bb, params) + t_exe) if rem_b else 0.0
    d_beta = max(d_loc_b, d_mec_ba, d_mec_bb)
    deadline = params.max_delay_s
    mu = 10.0 * deadline

    def over(delay: float) -> float:
        if delay <= deadline:
            return 0.0
        return min((delay - deadline) / deadline, PENALTY_CAP)

    violation = over(d_loc_a) + over(d_loc_b) + over(d_mec_a) + over(d_mec_ba) + over(d_mec_bb)
    if not context.oma:
        zeta = params.sop_tolerance
        p_alpha, p_beta = context.sop(ch.lam)
        if p_alpha > zeta:
            violation += (p_alpha - zeta) / zeta
        if p_beta > zeta:
            violation += (p_beta - zeta) / zeta
    penalty = mu * violation
    fitness = 1.0 / (d_beta + penalty + FITNESS_EPS)
    return d_beta, penalty, fitness


def _lambda_values(step: float) -> np.ndarray:
    if not step > 0.0:
        raise ValueError(f"lambda grid step must be positive, got {step}")
    count = int(round(0.5 / step)) - 1
    if count < 1:
        raise ValueError(f"lambda grid step {step} leaves no interior points")
    return step * np.arange(1, count + 1)


def _best_cells(context: OptContext, lams: np.ndarray):
    """Vectorized per-lam optimum over the task-count grid.

    Returns (d_beta per lam, m_beta per lam, m_alpha per lam, ok mask) where
    ok marks lams whose best cell meets every deadline constraint; m_alpha
    is the smallest deadline-feasible count. A cell delay <= deadline is
    equivalent to both its legs being <= deadline because the cell value is
    their max.
    """
    params = context.params
    t_local, t_exe = _delay_terms(params)
    m_max = params.m_tasks
    deadline = params.max_delay_s
    c_alpha, c_ba, c_bb = context.secure_rates(lams)
    t_off_a = _offload_seconds(c_alpha, params) + t_exe
    t_off_b = _offload_seconds(np.minimum(c_ba, c_bb), params) + t_exe
    cells_b = kernels.delay_partials(t_local, np.ascontiguousarray(t_off_b), m_max)
    cells_a = kernels.delay_partials(t_local, np.ascontiguousarray(t_off_a), m_max)
    feas_b = cells_b <= deadline
    feas_a = cells_a <= deadline
    d_masked = np.where(feas_b, cells_b, np.inf)
    m_beta = np.argmin(d_masked, axis=1)
    rows = np.arange(len(lams))
    d_beta = d_masked[rows, m_beta]
    m_alpha = np.argmax(feas_a, axis=1)
    ok = np.isfinite(d_beta) & feas_a.any(axis=1)
    return d_beta, m_beta, m_alpha, ok


def exhaustive_search(context: OptContext, lambda_grid: float = 0.005) -> OptResult:
    """Exact grid optimum of the edge delay.

    Walks lams in order of their best deadline-feasible cell delay and stops
    at the first whose outage probabilities clear the tolerance; that cell
    is the grid optimum because the outage constraint ignores task counts.
    Ties break toward smaller lam, then smaller m_beta, then smaller
    m_alpha. With no feasible cell anywhere, the best deadline-only cell is
    returned flagged infeasible (outage checks skipped for the flag only).
    """
    lams = _lambda_values(lambda_grid)
    d_beta, m_beta, m_alpha, ok = _best_cells(context, lams)
    evaluations = len(lams) * (context.params.m_tasks + 1) ** 2
    order = np.lexsort((lams, d_beta))
    zeta = context.params.sop_tolerance
    fallback = None
    alpha_misses = beta_misses = 0
    for idx in order:
        if not ok[idx]:
            continue
        if fallback is None:
            fallback = idx
        if context.oma:
            break
        lam = float(lams[idx])
        if context.sop_alpha(lam) > zeta:
            alpha_misses += 1
            if alpha_misses == 3:
                context.fill_alpha_grid(lams)
            continue
        if context.sop_beta(lam) > zeta:
            beta_misses += 1
            if beta_misses == 3:
                context.fill_beta_grid(lams)
            continue
        break
    else:
        idx = fallback if fallback is not None else int(order[0])
        ch = Chromosome(lam=float(lams[idx]), m_alpha=int(m_alpha[idx]), m_beta=int(m_beta[idx]))
        d_a = _alpha_delay(context, ch)
        return OptResult(
            best=ch,
            d_beta=float(d_beta[idx]),
            d_alpha=d_a,
            feasible=False,
            history=(),
            evaluations=evaluations,
        )
    ch = Chromosome(lam=float(lams[idx]), m_alpha=int(m_alpha[idx]), m_beta=int(m_beta[idx]))
    return OptResult(
        best=ch,
        d_beta=float(d_beta[idx]),
        d_alpha=_alpha_delay(context, ch),
        feasible=True,
        history=(),
        evaluations=evaluations,
    )


def _alpha_delay(context: OptContext, ch: Chromosome) -> float:
    params = context.params
    t_local, t_exe = _delay_terms(params)
    c_alpha, _, _ = context.secure_rates(ch.lam)
    rem = params.m_tasks - ch.m_alpha
    d_mec = rem * (_offload_seconds(c_alpha, params) + t_exe) if rem else 0.0
    return max(ch.m_alpha * t_local, d_mec)


def oma_baseline(context: OptContext, params: SystemParams | None = None) -> OptResult:
    """Orthogonal-access baseline: even power split, halved spectral
    efficiency, task counts optimized on the same grid.

    The outage constraint is not applied; the orthogonal scheme is the
    latency reference, not a secrecy design.
    """
    if params is not None and params is not context.params and params != context.params:
        raise ValueError("params disagrees with the context's parameter set")
    base = context.params
    if context.oma:
        oma_ctx = context
    else:
        oma_ctx = OptContext(
            params=base,
            geometry=context.geometry,
            sig_alpha_b=context.sig_alpha_b,
            sig_alpha_e=context.sig_alpha_e,
            sig_beta_alpha=context.sig_beta_alpha,
            sig_beta_e=context.sig_beta_e,
            den_relay_w=context.den_relay_w,
            an_rx_w=context.an_rx_w,
            an=context.an,
            oma=True,
        )
    lams = np.array([0.5])
    d_beta, m_beta, m_alpha, ok = _best_cells(oma_ctx, lams)
    evaluations = (base.m_tasks + 1) ** 2
    ch = Chromosome(lam=0.5, m_alpha=int(m_alpha[0]), m_beta=int(m_beta[0]))
    return OptResult(
        best=ch,
        d_beta=float(d_beta[0]),
        d_alpha=_alpha_delay(oma_ctx, ch),
        feasible=bool(ok[0]),
        history=(),
        evaluations=evaluations,
    )


def _snap(lam: float, step: float | None) -> float:
    if step is None:
        return float(min(max(lam, LAMBDA_MIN), LAMBDA_MAX))
    hi = (int(round(0.5 / step)) - 1) * step
    snapped = round(lam / step) * step
    return float(min(max(snapped, step), hi))


def ga_pats(
    context: OptContext,
    ga: GaConfig,
    lambda_grid: float | None = None,
    trace_path: str | Path | None = None,
) -> OptResult:
    """Genetic search with penalty fitness, adjacent-pair crossover,
    roulette selection, and single-slot elitism.

    The power-split gene is a real number; lambda_grid snaps it to the same
    grid exhaustive_search uses, which makes the two directly comparable.
    Stops early once the best delay has moved by at most the tolerance for
    ten consecutive generations. The returned history is the best-ever
    fitness after each generation.
    """
    params = context.params
    m_max = params.m_tasks
    rng = default_rng(SeedSequence(entropy=ga.seed))
    size = ga.population

    def random_chromosome() -> Chromosome:
        lam = _snap(rng.uniform(LAMBDA_MIN, LAMBDA_MAX), lambda_grid)
        return Chromosome(
            lam=lam,
            m_alpha=int(rng.integers(0, m_max + 1)),
            m_beta=int(rng.integers(0, m_max + 1)),
        )

    population = [random_chromosome() for _ in range(size)]
    best_ch = None
    best_fitness = -1.0
    best_d = math.inf
    best_penalty = math.inf
    history: list[float] = []
    evaluations = 0
    streak = 0
    prev_best_d = None
    writer = handle = None
    if trace_path is not None:
        handle = open(trace_path, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(["generation", "best_d_beta", "mean_fitness"])
    try:
        for generation in range(ga.iterations):
            scored = []
            for ch in population:
                assert 0.0 < ch.lam < 0.5 and 0 <= ch.m_alpha <= m_max and 0 <= ch.m_beta <= m_max
                d_beta, penalty, fitness = evaluate_fitness(ch, context)
                evaluations += 1
                scored.append((ch, d_beta, penalty, fitness))
                if fitness > best_fitness:
                    best_ch, best_d, best_penalty, best_fitness = ch, d_beta, penalty, fitness
            history.append(best_fitness)
            if writer is not None:
                mean_fit = math.fsum(s[3] for s in scored) / size
                writer.writerow([generation, repr(best_d), repr(mean_fit)])
            if prev_best_d is not None and abs(best_d - prev_best_d) <= ga.tolerance:
                streak += 1
                if streak >= EARLY_STOP_STREAK:
                    break
            else:
                streak = 0
            prev_best_d = best_d

            fitnesses = np.array([s[3] for s in scored])
            total = float(fitnesses.sum())
            if total > 0.0:
                probs = fitnesses / total
            else:
                probs = np.full(size, 1.0 / size)
            parents = [scored[i][0] for i in rng.choice(size, size=size, p=probs)]

            children: list[Chromosome] = []
            for i in range(0, size, 2):
                p1, p2 = parents[i], parents[i + 1]
                if rng.random() < ga.crossover_prob:
                    a = rng.random()
                    lam1 = _snap(a * p1.lam + (1.0 - a) * p2.lam, lambda_grid)
                    lam2 = _snap(a * p2.lam + (1.0 - a) * p1.lam, lambda_grid)
                    cut = int(rng.integers(1, 3))
                    if cut == 1:
                        c1 = Chromosome(lam1, p2.m_alpha, p2.m_beta)
                        c2 = Chromosome(lam2, p1.m_alpha, p1.m_beta)
                    else:
                        c1 = Chromosome(lam1, p1.m_alpha, p2.m_beta)
                        c2 = Chromosome(lam2, p2.m_alpha, p1.m_beta)
                else:
                    c1, c2 = p1, p2
                children.extend((c1, c2))

            mutated: list[Chromosome] = []
            for ch in children:
                lam, m_a, m_b = ch.lam, ch.m_alpha, ch.m_beta
                if rng.random() < ga.mutation_prob:
                    lam = _snap(lam + rng.normal(0.0, 0.05), lambda_grid)
                if rng.random() < ga.mutation_prob:
                    m_a = int(rng.integers(0, m_max + 1))
                if rng.random() < ga.mutation_prob:
                    m_b = int(rng.integers(0, m_max + 1))
                mutated.append(Chromosome(lam, m_a, m_b))

            mutated[0] = best_ch
            population = mutated
    finally:
        if handle is not None:
            handle.close()
    return OptResult(
        best=best_ch,
        d_beta=best_d,
        d_alpha=_alpha_delay(context, best_ch),
        feasible=best_penalty == 0.0,
        history=tuple(history),
        evaluations=evaluations,
    )
