"""End-to-end acceptance gates.

One test per shipped guarantee, each printing a single [PASS]/[FAIL] line
with its headline numbers. The sweep-driven trend gates share one 1000
replication paired-seed sweep of the edge transmit power, which dominates
this module's runtime (about 25 minutes single-core); everything else is
seconds.
"""

import time

import numpy as np
import pytest
from numpy.random import SeedSequence
from scipy import integrate

from secmec.beamforming import solve_an_weights
from secmec.channel import draw_channels, erlang_pdf
from secmec.experiments import (
    DEFAULT_P_BETA_GRID,
    DEFAULT_SCHEMES,
    GATE_LAMBDAS,
    GATE_P_BETA_DBM,
    SweepSpec,
    gate_geometry,
    run_sweep,
    validate_analytics,
)
from secmec.montecarlo import McConfig, mc_sop
from secmec.link import OffloadPlan
from secmec.optimizer import GaConfig, OptContext, exhaustive_search, ga_pats
from secmec.params import SystemParams
from secmec.scenario import (
    Vehicle,
    assign_groups,
    generate_scenario,
    pair_gpm,
    pair_link_geometry,
)
from secmec.secrecy_analytic import (
    SopInputs,
    cdf_y_beta,
    gauss_legendre,
    pdf_y_beta,
    sop_beta_quadrature,
)

REPLICATIONS = 1000


def _report(capsys, name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f"  ({detail})"
    with capsys.disabled():
        print(line)
    assert ok, line


@pytest.fixture(scope="session")
def power_sweep():
    """Paired-seed sweep of edge power for all four schemes, shared by the
    figure-trend gates."""
    spec = SweepSpec(
        variable="p_beta_dbm",
        values=DEFAULT_P_BETA_GRID,
        schemes=DEFAULT_SCHEMES,
        replications=REPLICATIONS,
        master_seed=42,
    )
    rows = run_sweep(spec)
    return {(r.scheme, r.value): r for r in rows}


def _series(sweep, scheme: str, metric: str) -> list[float]:
    return [sweep[(scheme, v)].means[metric] for v in DEFAULT_P_BETA_GRID]


def test_criterion_1_analytic_matches_monte_carlo(capsys):
    t0 = time.perf_counter()
    report = validate_analytics(grid="default")
    elapsed = time.perf_counter() - t0
    ok = report.passed and elapsed < 300.0
    _report(
        capsys,
        "1 analytic vs 1e6-trial MC within max(0.02, 5%) at all 12 gate points",
        ok,
        f"worst margin {report.worst_gate_margin:.3f}x tol, "
        f"worst semi-analytic gap {report.worst_semi_mc:.4f}, {elapsed:.0f}s",
    )


def test_criterion_2_quadrature_self_convergence(capsys):
    params = SystemParams()
    geometry = gate_geometry(params)
    worst = 0.0
    for p_beta in GATE_P_BETA_DBM:
        p_v = params.with_updates(p_edge_dbm=p_beta)
        for lam in GATE_LAMBDAS:
            full = sop_beta_quadrature(SopInputs.from_params(p_v, geometry, lam))
            half = sop_beta_quadrature(
                SopInputs.from_params(p_v.with_updates(quad_nodes=250), geometry, lam)
            )
            worst = max(worst, abs(full - half))
    ok = worst <= 1e-6
    _report(
        capsys,
        "2 edge-outage quadrature 500 vs 250 nodes within 1e-6 at all gate points",
        ok,
        f"worst delta {worst:.2e}",
    )


def test_criterion_3_ga_tracks_exhaustive(capsys):
    """Twenty random pair contexts drawn the same way production draws
    them: a generated scenario's first matched pair with its own fading
    realization."""
    params = SystemParams()
    t0 = time.perf_counter()
    hits = 0
    done = 0
    rep = 0
    while done < 20:
        vehicles, eve = generate_scenario(params, SeedSequence(entropy=777, spawn_key=(rep, 0)))
        groups = assign_groups(vehicles, params)
        pairing = pair_gpm(groups, vehicles)
        rep += 1
        if not pairing.pairs:
            continue
        pair = pairing.pairs[0]
        geometry = pair_link_geometry(pair, vehicles, eve, params)
        draw = draw_channels(params, SeedSequence(entropy=777, spawn_key=(rep, 2, pair[1])))
        ctx = OptContext.from_draw(params, geometry, draw)
        eg = exhaustive_search(ctx, lambda_grid=0.005)
        ga = ga_pats(ctx, GaConfig(seed=done), lambda_grid=0.005)
        if eg.feasible and ga.feasible:
            hits += ga.d_beta <= 1.01 * eg.d_beta
        else:
            # no optimum exists; the searches must agree it does not
            hits += eg.feasible == ga.feasible
        done += 1
    elapsed = time.perf_counter() - t0
    ok = hits >= 19 and elapsed < 120.0
    _report(
        capsys,
        "3 grid-snapped genetic search within 1% of exhaustive in >=19/20 contexts",
        ok,
        f"{hits}/20 within 1%, {elapsed:.0f}s",
    )


def test_criterion_4_jamming_cuts_system_outage(capsys, power_sweep):
    with_an = _series(power_sweep, "gpm-noma", "sops")
    without = _series(power_sweep, "gpm-noma-nan", "sops")
    monotone = all(b <= a for a, b in zip(with_an, with_an[1:]))
    dominated = all(n > w for n, w in zip(without, with_an))
    ok = monotone and dominated
    _report(
        capsys,
        "4 mean system outage non-increasing in edge power and jamming-off above jamming-on",
        ok,
        f"monotone={monotone}, no-jamming dominated everywhere={dominated}, "
        f"range {with_an[0]:.3f}->{with_an[-1]:.3f} vs {without[0]:.3f}->{without[-1]:.3f}",
    )


def test_criterion_5_distance_pairing_beats_random(capsys, power_sweep):
    gpm_b = _series(power_sweep, "gpm-noma", "sop_beta")
    rpm_b = _series(power_sweep, "rpm-noma", "sop_beta")
    gpm_a = _series(power_sweep, "gpm-noma", "sop_alpha")
    rpm_a = _series(power_sweep, "rpm-noma", "sop_alpha")
    edge_better = all(g < r for g, r in zip(gpm_b, rpm_b))
    alpha_gap = max(g - r for g, r in zip(gpm_a, rpm_a))
    ok = edge_better and alpha_gap <= 0.05
    _report(
        capsys,
        "5 distance pairing beats random pairing on edge outage at every point",
        ok,
        f"edge outage lower everywhere={edge_better}, center gap {alpha_gap:+.4f} <= 0.05",
    )


def test_criterion_6_superposed_access_is_faster(capsys, power_sweep):
    noma = _series(power_sweep, "gpm-noma", "d_beta")
    oma = _series(power_sweep, "gpm-oma", "d_beta")
    ok = all(n <= o for n, o in zip(noma, oma))
    d_alpha_gap = max(
        abs(n - o)
        for n, o in zip(
            _series(power_sweep, "gpm-noma", "d_alpha"),
            _series(power_sweep, "gpm-oma", "d_alpha"),
        )
    )
    _report(
        capsys,
        "6 mean edge delay under superposed access <= orthogonal at every point",
        ok,
        f"edge delay {noma[0]:.3f}->{noma[-1]:.3f}s vs {oma[0]:.3f}->{oma[-1]:.3f}s, "
        f"center-delay gap <= {d_alpha_gap:.3f}s (report only)",
    )


def test_criterion_7_power_split_declines(capsys, power_sweep):
    lam = _series(power_sweep, "gpm-noma", "lambda_star")
    ok = all(b <= a for a, b in zip(lam, lam[1:]))
    _report(
        capsys,
        "7 mean optimized power split non-increasing in edge power",
        ok,
        "series " + " ".join(f"{x:.3f}" for x in lam),
    )


def test_criterion_8_superposed_access_offloads_more(capsys, power_sweep):
    noma = _series(power_sweep, "gpm-noma", "offloaded_tasks")
    oma = _series(power_sweep, "gpm-oma", "offloaded_tasks")
    ok = all(n >= o for n, o in zip(noma, oma))
    _report(
        capsys,
        "8 mean offloaded tasks under superposed access >= orthogonal at every point",
        ok,
        f"{noma[0]:.2f}->{noma[-1]:.2f} vs {oma[0]:.2f}->{oma[-1]:.2f} of 10",
    )


def test_criterion_9_property_suite(capsys):
    params = SystemParams()
    failures = []

    # quadrature rule integrates polynomials of degree 2n-1 exactly
    worst_gl = 0.0
    for n in range(2, 21):
        nodes, weights = gauss_legendre(n)
        for k in range(2 * n):
            want = 0.0 if k % 2 else 2.0 / (k + 1)
            worst_gl = max(worst_gl, abs(float(np.sum(weights * nodes**k)) - want))
    if worst_gl > 1e-12:
        failures.append(f"quadrature exactness {worst_gl:.2e}")

    # leakage-gain density normalizes
    total, _ = integrate.quad(
        lambda x: erlang_pdf(x, params.bs_antennas - 1, 1.0), 0.0, np.inf, limit=200
    )
    if abs(total - 1.0) > 1e-8:
        failures.append(f"erlang normalization {total - 1.0:.2e}")

    # edge-SINR density agrees with its distribution function where the
    # finite difference is resolvable in double precision (the far tail of
    # F saturates at 1, so points are kept only while 1 - F > 1e-7)
    inputs = SopInputs.from_params(params, gate_geometry(params), 0.3)
    worst_fd = 0.0
    kept = 0
    for y in np.geomspace(1e-4, 0.2, 12) * inputs.tau2:
        c = cdf_y_beta(y, inputs)
        if not (c > 1e-10 and 1.0 - c > 1e-7):
            continue
        kept += 1
        h = 3e-4 * y
        fd = (cdf_y_beta(y + h, inputs) - cdf_y_beta(y - h, inputs)) / (2 * h)
        worst_fd = max(worst_fd, abs(pdf_y_beta(y, inputs) - fd) / abs(fd))
    if kept < 8 or worst_fd > 1e-5:
        failures.append(f"density-vs-cdf relative error {worst_fd:.2e} over {kept} points")

    # jamming beam nulls the protected links
    worst_null = max(
        max(
            abs(np.vdot(an.w, draw.h_b_alpha)),
            abs(np.vdot(an.w, draw.h_bb[:, 0])),
        )
        for draw in (draw_channels(params, s) for s in range(50))
        for an in (solve_an_weights(draw),)
    )
    if worst_null > 1e-10:
        failures.append(f"nulling residual {worst_null:.2e}")

    # Monte Carlo counts are invariant to kernel batching
    geometry = gate_geometry(params)
    plan = OffloadPlan(lam=0.3, m_alpha=0, m_beta=0)
    runs = [
        mc_sop(geometry, plan, params, McConfig(trials=10_000, seed=0, batch_size=b))
        for b in (1, 1024, 4096, 10_000)
    ]
    if any(r != runs[0] for r in runs[1:]):
        failures.append("batched Monte Carlo runs disagree")

    # elitism keeps the incumbent, so best fitness never decreases
    ctx = OptContext.from_draw(params, geometry, draw_channels(params, 1))
    hist = ga_pats(ctx, GaConfig(population=20, iterations=50, seed=3)).history
    if any(b < a for a, b in zip(hist, hist[1:])):
        failures.append("genetic best fitness decreased")

    # pairing ignores list order and speed magnitudes
    vehicles, _ = generate_scenario(params, 23)
    baseline = set(pair_gpm(assign_groups(vehicles, params), vehicles).pairs)
    rng = np.random.default_rng(0)
    for _ in range(5):
        perm = list(vehicles)
        rng.shuffle(perm)
        scaled = [
            Vehicle(id=v.id, horiz_dist_m=v.horiz_dist_m,
                    speed_mps=v.speed_mps * float(rng.uniform(0.2, 4.0)))
            for v in perm
        ]
        if set(pair_gpm(assign_groups(scaled, params), scaled).pairs) != baseline:
            failures.append("pairing changed under permutation/speed scaling")
            break

    ok = not failures
    _report(
        capsys,
        "9 property suite: quadrature, densities, nulling, MC batching, elitism, pairing",
        ok,
        "all 7 properties hold" if ok else "; ".join(failures),
    )
