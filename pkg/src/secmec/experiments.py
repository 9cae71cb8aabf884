"""Sweep, validation, and aggregation machinery behind the CLI.

A sweep runs the full pipeline per replication: draw a road scenario, group
and pair the vehicles, draw channels, optimize every pair under each
scheme, and pool per-pair metrics into one row per (scheme, sweep value).
Replications are paired across schemes and sweep values: the scenario seed
depends only on the replication index, and channel draws are keyed by the
edge vehicle, so scheme comparisons see identical randomness.

Scheme names are hyphenated: pairing (gpm or rpm), access (noma or oma),
then optional suffixes -nan (jamming disabled) and -ga (genetic search
instead of the exhaustive grid).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np
from numpy.random import SeedSequence

from . import __version__
from .channel import LinkGeometry, draw_channels, vehicle_bs_distance
from .link import OffloadPlan
from .montecarlo import McConfig, mc_sop
from .optimizer import GaConfig, OptContext, exhaustive_search, ga_pats, oma_baseline
from .params import SystemParams
from .scenario import assign_groups, generate_scenario, pair_gpm, pair_link_geometry, pair_rpm
from .secrecy_analytic import (
    SopInputs,
    pair_secrecy,
    sop_alpha_semianalytic,
    sop_alpha_series,
    sop_beta_quadrature,
    sops,
)

SWEEP_VARIABLES = ("p_beta_dbm", "d_alpha_beta_m", "rs", "zeta")
METRICS = (
    "sops",
    "sop_alpha",
    "sop_beta",
    "d_beta",
    "d_alpha",
    "lambda_star",
    "offloaded_tasks",
    "rate_beta",
)
DEFAULT_SCHEMES = ("gpm-noma", "gpm-noma-nan", "rpm-noma", "gpm-oma")
DEFAULT_P_BETA_GRID = tuple(float(v) for v in range(0, 32, 2))
GATE_LAMBDAS = (0.1, 0.3, 0.45)
GATE_P_BETA_DBM = (0.0, 10.0, 20.0, 30.0)


@dataclass(frozen=True)
class SchemeSpec:
    """Parsed scheme name: who pairs, how spectrum is shared, whether the
    base station jams, and which optimizer picks the schedule."""

    name: str
    pairing: str
    access: str
    an: bool
    optimizer: str


def parse_scheme(name: str) -> SchemeSpec:
    parts = name.lower().split("-")
    if len(parts) < 2 or parts[0] not in ("gpm", "rpm") or parts[1] not in ("noma", "oma"):
        raise ValueError(
            f"scheme {name!r} must start with (gpm|rpm)-(noma|oma), e.g. gpm-noma"
        )
    an = True
    optimizer = "eg"
    for extra in parts[2:]:
        if extra == "nan":
            an = False
        elif extra in ("ga", "eg"):
            optimizer = extra
        else:
            raise ValueError(f"scheme {name!r}: unknown suffix {extra!r}")
    if parts[1] == "oma" and optimizer == "ga":
        raise ValueError(f"scheme {name!r}: the orthogonal baseline has no -ga mode")
    return SchemeSpec(name=name, pairing=parts[0], access=parts[1], an=an, optimizer=optimizer)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: which knob to move, over which values, for which
    schemes, and how many paired replications."""

    variable: str
    values: tuple[float, ...]
    schemes: tuple[str, ...] = DEFAULT_SCHEMES
    replications: int = 1000
    master_seed: int = 42
    rep_start: int = 0
    lambda_grid: float = 0.005
    outputs: str | Path | None = None

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if not self.schemes:
            raise ValueError("schemes must be non-empty")
        for s in self.schemes:
            parse_scheme(s)
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if self.rep_start < 0:
            raise ValueError(f"rep_start must be >= 0, got {self.rep_start}")
        if not self.lambda_grid > 0.0:
            raise ValueError("lambda_grid must be positive")


@dataclass(frozen=True)
class RepRecord:
    """Per-(scheme, value, replication) partial sums, kept separate so that
    pooling across split invocations reproduces single-run results exactly."""

    scheme: str
    value: float
    rep: int
    n_pairs: int
    n_infeasible: int
    partials: Mapping[str, tuple[float, float, int]]


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    value: float
    n_pairs: int
    infeasible_fraction: float
    means: Mapping[str, float]
    stderrs: Mapping[str, float]
    counts: Mapping[str, int]


def _apply_variable(params: SystemParams, variable: str, value: float) -> SystemParams:
    if variable == "p_beta_dbm":
        return params.with_updates(p_edge_dbm=float(value))
    if variable == "rs":
        return params.with_updates(secrecy_rate_target=float(value))
    if variable == "zeta":
        return params.with_updates(sop_tolerance=float(value))
    return params  # d_alpha_beta_m overrides the pair geometry instead


def _scenario_seed(master: int, rep: int) -> SeedSequence:
    return SeedSequence(entropy=master, spawn_key=(rep, 0))


def _rpm_seed(master: int, rep: int) -> SeedSequence:
    return SeedSequence(entropy=master, spawn_key=(rep, 1))


def _channel_seed(master: int, rep: int, edge_id: int) -> SeedSequence:
    return SeedSequence(entropy=master, spawn_key=(rep, 2, edge_id))


def _ga_seed(master: int, rep: int, pair_idx: int) -> int:
    return int(SeedSequence(entropy=master, spawn_key=(rep, 3, pair_idx)).generate_state(1)[0])


def _accumulate(acc, scheme: SchemeSpec, ctx: OptContext, res, m_tasks: int) -> None:
    def add(metric: str, x: float) -> None:
        slot = acc[metric]
        slot[0] += x
        slot[1] += x * x
        slot[2] += 1

    offloaded = float(m_tasks - res.best.m_beta) if res.feasible else 0.0
    add("offloaded_tasks", offloaded)
    if scheme.access == "noma":
        p_alpha, p_beta = ctx.sop(res.best.lam)
        add("sop_alpha", p_alpha)
        add("sop_beta", p_beta)
        add("sops", sops(p_alpha, p_beta))
    if res.feasible:
        add("d_beta", res.d_beta)
        add("d_alpha", res.d_alpha)
        _, c_ba, c_bb = ctx.secure_rates(res.best.lam)
        add("rate_beta", min(c_ba, c_bb))
        if res.best.m_beta < m_tasks:
            add("lambda_star", res.best.lam)


def sweep_cells(spec: SweepSpec, params: SystemParams) -> list[RepRecord]:
    """Run every (scheme, value, replication) cell and return per-cell
    partial sums in deterministic order."""
    schemes = [parse_scheme(s) for s in spec.schemes]
    params_by_value = {v: _apply_variable(params, spec.variable, v) for v in spec.values}
    share_alpha = spec.variable in ("p_beta_dbm", "d_alpha_beta_m", "zeta")
    share_beta = spec.variable == "zeta"
    master = spec.master_seed
    records: list[RepRecord] = []
    for rep in range(spec.rep_start, spec.rep_start + spec.replications):
        vehicles, eve = generate_scenario(params, _scenario_seed(master, rep))
        groups = assign_groups(vehicles, params)
        pairings = {"gpm": pair_gpm(groups, vehicles)}
        if any(s.pairing == "rpm" for s in schemes):
            pairings["rpm"] = pair_rpm(groups, vehicles, _rpm_seed(master, rep))
        draws = {
            edge_id: draw_channels(params, _channel_seed(master, rep, edge_id))
            for edge_id in groups.edge_ids
        }
        for scheme in schemes:
            pairing = pairings[scheme.pairing]
            caches_a = {p: {} for p in pairing.pairs} if share_alpha else None
            caches_b = {p: {} for p in pairing.pairs} if share_beta else None
            an_mode = "model" if scheme.an else "off"
            for value in spec.values:
                p_v = params_by_value[value]
                acc = {m: [0.0, 0.0, 0] for m in METRICS}
                n_infeasible = 0
                for pair_idx, pair in enumerate(pairing.pairs):
                    geometry = pair_link_geometry(pair, vehicles, eve, p_v)
                    if spec.variable == "d_alpha_beta_m":
                        geometry = replace(geometry, d_beta_alpha=float(value))
                    ctx = OptContext.from_draw(
                        p_v,
                        geometry,
                        draws[pair[1]],
                        an_mode=an_mode,
                        oma=scheme.access == "oma",
                        alpha_cache=caches_a[pair] if caches_a is not None else None,
                        beta_cache=caches_b[pair] if caches_b is not None else None,
                    )
                    if scheme.access == "oma":
                        res = oma_baseline(ctx)
                    elif scheme.optimizer == "ga":
                        res = ga_pats(ctx, GaConfig(seed=_ga_seed(master, rep, pair_idx)))
                    else:
                        res = exhaustive_search(ctx, spec.lambda_grid)
                    _accumulate(acc, scheme, ctx, res, p_v.m_tasks)
                    if not res.feasible:
                        n_infeasible += 1
                records.append(
                    RepRecord(
                        scheme=scheme.name,
                        value=float(value),
                        rep=rep,
                        n_pairs=len(pairing.pairs),
                        n_infeasible=n_infeasible,
                        partials=MappingProxyType(
                            {m: (s[0], s[1], s[2]) for m, s in acc.items()}
                        ),
                    )
                )
    return records


def aggregate_rows(spec: SweepSpec, records: list[RepRecord]) -> list[SweepRow]:
    """Pool per-replication partials into one row per (scheme, value).

    Sums are reduced with math.fsum over the per-replication partials, so
    pooling the records of split invocations gives bit-identical rows.
    """
    rows: list[SweepRow] = []
    for scheme in spec.schemes:
        for value in spec.values:
            cell = [r for r in records if r.scheme == scheme and r.value == float(value)]
            n_pairs = sum(r.n_pairs for r in cell)
            n_inf = sum(r.n_infeasible for r in cell)
            means: dict[str, float] = {}
            stderrs: dict[str, float] = {}
            counts: dict[str, int] = {}
            for m in METRICS:
                total = math.fsum(r.partials[m][0] for r in cell)
                total_sq = math.fsum(r.partials[m][1] for r in cell)
                n = sum(r.partials[m][2] for r in cell)
                counts[m] = n
                if n == 0:
                    means[m] = math.nan
                    stderrs[m] = math.nan
                    continue
                mean = total / n
                means[m] = mean
                if n == 1:
                    stderrs[m] = math.nan
                else:
                    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
                    stderrs[m] = math.sqrt(var / n)
            rows.append(
                SweepRow(
                    scheme=scheme,
                    value=float(value),
                    n_pairs=n_pairs,
                    infeasible_fraction=n_inf / n_pairs if n_pairs else math.nan,
                    means=MappingProxyType(means),
                    stderrs=MappingProxyType(stderrs),
                    counts=MappingProxyType(counts),
                )
            )
    return rows


def _metadata_lines(spec: SweepSpec, params: SystemParams) -> list[str]:
    meta = {
        "version": __version__,
        "variable": spec.variable,
        "schemes": ",".join(spec.schemes),
        "replications": spec.replications,
        "rep_start": spec.rep_start,
        "master_seed": spec.master_seed,
        "lambda_grid": repr(spec.lambda_grid),
    }
    for key, val in params.header_items():
        meta[f"params.{key}"] = val
    return [f"# {k} = {v}" for k, v in meta.items()]


def write_sweep_csv(path, spec: SweepSpec, params: SystemParams, rows: list[SweepRow]) -> None:
    """Write sweep rows with a commented metadata header (audit trail)."""
    with open(path, "w", newline="") as fh:
        for line in _metadata_lines(spec, params):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        header = ["scheme", "value", "n_pairs", "infeasible_fraction"]
        for m in METRICS:
            header.extend([f"{m}_mean", f"{m}_stderr", f"{m}_n"])
        writer.writerow(header)
        for row in rows:
            out = [row.scheme, repr(row.value), row.n_pairs, repr(row.infeasible_fraction)]
            for m in METRICS:
                out.extend([repr(row.means[m]), repr(row.stderrs[m]), row.counts[m]])
            writer.writerow(out)


def read_sweep_csv(path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Read a sweep CSV back as (metadata, data rows)."""
    meta: dict[str, str] = {}
    data_lines: list[str] = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            else:
                data_lines.append(line)
    rows = list(csv.DictReader(data_lines))
    return meta, rows


def run_sweep(spec: SweepSpec, params: SystemParams | None = None) -> list[SweepRow]:
    """Execute a sweep and optionally write its CSV."""
    params = params if params is not None else SystemParams()
    records = sweep_cells(spec, params)
    rows = aggregate_rows(spec, records)
    if spec.outputs is not None:
        write_sweep_csv(spec.outputs, spec, params, rows)
    return rows


def gate_geometry(params: SystemParams | None = None) -> LinkGeometry:
    """Canonical fixed pair layout used by validation and microbenchmarks:
    edge vehicle at 400 m, center vehicle at 150 m, eavesdropper at 100 m,
    all on the same side of the base station."""
    height = params.bs_height_m if params is not None else SystemParams().bs_height_m
    return LinkGeometry(
        d_beta_alpha=250.0,
        d_alpha_b=vehicle_bs_distance(150.0, height),
        d_beta_e=300.0,
        d_alpha_e=50.0,
        d_b_e=vehicle_bs_distance(100.0, height),
    )


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    text: str
    worst_gate_margin: float
    worst_semi_mc: float


def validate_analytics(
    params: SystemParams | None = None,
    grid: str = "default",
) -> ValidationReport:
    """Check the shipped outage formulas against Monte Carlo and report
    the deviations of the legacy formula variants.

    The enforced gate: at every (P_beta, lambda) point, closed-form and
    quadrature outage probabilities must match a Monte-Carlo estimate
    within max(0.02 absolute, 5% relative), and the semi-analytic center
    form must stay within 0.02 absolute of Monte Carlo. The legacy
    variant table is informational; those forms are kept for comparison
    only and are known to deviate.
    """
    if grid not in ("default", "quick"):
        raise ValueError(f"grid must be 'default' or 'quick', got {grid!r}")
    params = params if params is not None else SystemParams()
    trials = 1_000_000 if grid == "default" else 100_000
    geometry = gate_geometry(params)
    lines = [
        f"analytic-vs-monte-carlo gate (version {__version__})",
        f"trials per point: {trials}; master seed: {params.rng_seed}",
        "geometry: d_ba=250 d_ab=%.4f d_be=300 d_ae=50 d_bse=%.4f"
        % (geometry.d_alpha_b, geometry.d_b_e),
        "",
        "point                closed_a  mc_a      quad_b    mc_b      margin  status",
    ]
    passed = True
    worst_margin = 0.0
    worst_semi = 0.0
    idx = 0
    for p_beta in GATE_P_BETA_DBM:
        p_v = params.with_updates(p_edge_dbm=p_beta)
        for lam in GATE_LAMBDAS:
            inputs = SopInputs.from_params(p_v, geometry, lam)
            report = pair_secrecy(inputs)
            semi = sop_alpha_semianalytic(inputs)
            seed = int(
                SeedSequence(entropy=params.rng_seed, spawn_key=(9, idx)).generate_state(1)[0]
            )
            mc = McConfig(trials=trials, seed=seed)
            plan = OffloadPlan(lam=lam, m_alpha=0, m_beta=0)
            est_a, est_b, _ = mc_sop(geometry, plan, p_v, mc)
            margin = 0.0
            for analytic, est in ((report.p_sop_alpha, est_a), (report.p_sop_beta, est_b)):
                tol = max(0.02, 0.05 * est.mean)
                margin = max(margin, abs(analytic - est.mean) / tol)
            worst_margin = max(worst_margin, margin)
            worst_semi = max(worst_semi, abs(semi - est_a.mean))
            ok = margin <= 1.0 and abs(semi - est_a.mean) <= 0.02
            passed = passed and ok
            lines.append(
                "P=%4.1fdBm lam=%.2f   %.6f  %.6f  %.6f  %.6f  %.4f  %s"
                % (
                    p_beta,
                    lam,
                    report.p_sop_alpha,
                    est_a.mean,
                    report.p_sop_beta,
                    est_b.mean,
                    margin,
                    "ok" if ok else "FAIL",
                )
            )
            idx += 1
    lines.append("")
    lines.append("legacy variant deviations (informational, no tolerance):")
    lines.append("point                series_e1_psi1  series_expi_psi1  series_e1_psi3  phi_simplified")
    for p_beta in (0.0, 10.0, 30.0):
        p_v = params.with_updates(p_edge_dbm=p_beta)
        for lam in (0.1, 0.45):
            inputs = SopInputs.from_params(p_v, geometry, lam)
            ref_a = sop_alpha_semianalytic(inputs)
            ref_b = sop_beta_quadrature(inputs)
            variants = []
            for branch, prefactor in (("e1", "psi1"), ("expi", "psi1"), ("e1", "psi3")):
                try:
                    val = sop_alpha_series(inputs, ei_branch=branch, prefactor=prefactor)
                    variants.append(f"{val - ref_a:+.3e}")
                except (ValueError, OverflowError):
                    variants.append("     n/a")
            simplified = sop_beta_quadrature(inputs, phi_variant="simplified")
            variants.append(f"{simplified - ref_b:+.3e}")
            lines.append(
                "P=%4.1fdBm lam=%.2f   %s" % (p_beta, lam, "  ".join(v.rjust(14) for v in variants))
            )
    lines.append("")
    lines.append(
        "RESULT: %s (worst gate margin %.4f of tolerance, worst semi-vs-mc %.6f)"
        % ("PASS" if passed else "FAIL", worst_margin, worst_semi)
    )
    return ValidationReport(
        passed=passed,
        text="\n".join(lines) + "\n",
        worst_gate_margin=worst_margin,
        worst_semi_mc=worst_semi,
    )
