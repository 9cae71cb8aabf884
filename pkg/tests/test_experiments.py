import math

import pytest

from secmec.channel import LinkGeometry
from secmec.experiments import (
    DEFAULT_SCHEMES,
    METRICS,
    RepRecord,
    SweepSpec,
    aggregate_rows,
    gate_geometry,
    parse_scheme,
    read_sweep_csv,
    run_sweep,
    sweep_cells,
    validate_analytics,
    write_sweep_csv,
)
from secmec.params import SystemParams


def _same(a: float, b: float) -> bool:
    return (math.isnan(a) and math.isnan(b)) or a == b


TINY = dict(
    variable="p_beta_dbm",
    values=(0.0, 30.0),
    schemes=("gpm-noma", "gpm-noma-nan", "gpm-oma"),
    replications=2,
    master_seed=1,
    lambda_grid=0.05,
)


def test_parse_scheme_grammar():
    s = parse_scheme("gpm-noma")
    assert (s.pairing, s.access, s.an, s.optimizer) == ("gpm", "noma", True, "eg")
    assert parse_scheme("gpm-noma-nan").an is False
    assert parse_scheme("rpm-noma-ga").optimizer == "ga"
    assert parse_scheme("RPM-NOMA").pairing == "rpm"
    assert parse_scheme("gpm-oma").access == "oma"
    for bad in ("xpm-noma", "gpm", "gpm-noma-xx", "gpm-oma-ga", ""):
        with pytest.raises(ValueError):
            parse_scheme(bad)


def test_sweep_spec_validation():
    good = dict(variable="p_beta_dbm", values=(0.0,))
    SweepSpec(**good)
    for bad in (
        dict(variable="p_gamma"),
        dict(values=()),
        dict(schemes=()),
        dict(schemes=("gpm-oma-ga",)),
        dict(replications=0),
        dict(rep_start=-1),
        dict(lambda_grid=0.0),
    ):
        with pytest.raises(ValueError):
            SweepSpec(**{**good, **bad})


def test_default_scheme_names_parse():
    for name in DEFAULT_SCHEMES:
        parse_scheme(name)


def test_tiny_sweep_row_shape(params):
    rows = run_sweep(SweepSpec(**TINY), params)
    assert len(rows) == len(TINY["schemes"]) * len(TINY["values"])
    by_key = {(r.scheme, r.value): r for r in rows}
    for row in rows:
        assert set(row.means) == set(METRICS)
        n_inf = round(row.infeasible_fraction * row.n_pairs)
        assert row.counts["d_beta"] == row.n_pairs - n_inf
        assert row.counts["offloaded_tasks"] == row.n_pairs

    oma = by_key[("gpm-oma", 30.0)]
    assert math.isnan(oma.means["sops"])
    assert math.isnan(oma.means["sop_beta"])
    assert oma.counts["sops"] == 0
    assert oma.means["lambda_star"] == 0.5
    assert oma.infeasible_fraction == 0.0

    noma = by_key[("gpm-noma", 30.0)]
    assert noma.counts["sops"] == noma.n_pairs
    assert 0.0 <= noma.means["sops"] <= 1.0

    # without jamming the outage constraint is hopeless at these geometries
    nan30 = by_key[("gpm-noma-nan", 30.0)]
    assert nan30.infeasible_fraction > 0.5
    assert nan30.means["offloaded_tasks"] <= noma.means["offloaded_tasks"]


def test_more_edge_power_helps(params):
    rows = run_sweep(
        SweepSpec(variable="p_beta_dbm", values=(0.0, 30.0), schemes=("gpm-noma",),
                  replications=3, master_seed=2, lambda_grid=0.05),
        params,
    )
    low, high = rows[0], rows[1]
    assert low.value == 0.0 and high.value == 30.0
    assert high.means["sops"] < low.means["sops"]
    assert high.means["offloaded_tasks"] >= low.means["offloaded_tasks"]


def test_split_replications_pool_bit_exactly(params):
    """Running 0..3 in one go or as two halves must aggregate identically,
    metric by metric, including the stderr floats."""
    base = dict(variable="p_beta_dbm", values=(10.0,), schemes=("gpm-noma", "gpm-oma"),
                master_seed=3, lambda_grid=0.05)
    whole_spec = SweepSpec(replications=4, **base)
    first = sweep_cells(SweepSpec(replications=2, **base), params)
    second = sweep_cells(SweepSpec(replications=2, rep_start=2, **base), params)
    pooled = aggregate_rows(whole_spec, first + second)
    whole = aggregate_rows(whole_spec, sweep_cells(whole_spec, params))
    assert len(pooled) == len(whole)
    for a, b in zip(pooled, whole):
        assert a.scheme == b.scheme and a.value == b.value
        assert a.n_pairs == b.n_pairs
        assert _same(a.infeasible_fraction, b.infeasible_fraction)
        for m in METRICS:
            assert _same(a.means[m], b.means[m]), m
            assert _same(a.stderrs[m], b.stderrs[m]), m
            assert a.counts[m] == b.counts[m]


def test_aggregate_handles_empty_and_single_counts():
    spec = SweepSpec(variable="p_beta_dbm", values=(5.0,), schemes=("gpm-noma",),
                     replications=1)
    empty = {m: (0.0, 0.0, 0) for m in METRICS}
    single = {**empty, "d_beta": (1.5, 2.25, 1)}
    records = [
        RepRecord(scheme="gpm-noma", value=5.0, rep=0, n_pairs=3, n_infeasible=3,
                  partials=single),
    ]
    row = aggregate_rows(spec, records)[0]
    assert math.isnan(row.means["sops"])
    assert row.means["d_beta"] == 1.5
    assert math.isnan(row.stderrs["d_beta"])
    assert row.infeasible_fraction == 1.0


def test_csv_round_trip(params, tmp_path):
    spec = SweepSpec(**{**TINY, "schemes": ("gpm-noma",)})
    rows = sweep_cells(spec, params)
    agg = aggregate_rows(spec, rows)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, spec, params, agg)
    meta, data = read_sweep_csv(path)
    assert meta["variable"] == "p_beta_dbm"
    assert meta["master_seed"] == "1"
    assert meta["params.p_center_dbm"] == repr(params.p_center_dbm)
    assert len(data) == len(agg)
    for want, got in zip(agg, data):
        assert got["scheme"] == want.scheme
        assert float(got["value"]) == want.value
        for m in METRICS:
            assert _same(float(got[f"{m}_mean"]), want.means[m])
            assert int(got[f"{m}_n"]) == want.counts[m]


def test_csv_bytes_are_reproducible(params, tmp_path):
    spec = SweepSpec(**{**TINY, "schemes": ("gpm-noma",), "values": (10.0,)})
    agg = aggregate_rows(spec, sweep_cells(spec, params))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(p1, spec, params, agg)
    write_sweep_csv(p2, spec, params, agg)
    assert p1.read_bytes() == p2.read_bytes()


def test_run_sweep_writes_outputs(params, tmp_path):
    path = tmp_path / "out.csv"
    spec = SweepSpec(**{**TINY, "schemes": ("gpm-oma",), "values": (10.0,),
                        "outputs": path})
    rows = run_sweep(spec, params)
    assert path.exists()
    _, data = read_sweep_csv(path)
    assert len(data) == len(rows) == 1


def test_gate_geometry_layout(params):
    geo = gate_geometry(params)
    assert geo == LinkGeometry(
        d_beta_alpha=250.0,
        d_alpha_b=math.hypot(150.0, params.bs_height_m),
        d_beta_e=300.0,
        d_alpha_e=50.0,
        d_b_e=math.hypot(100.0, params.bs_height_m),
    )


def test_validate_analytics_quick(params):
    report = validate_analytics(params, grid="quick")
    assert report.passed
    assert "RESULT: PASS" in report.text
    assert report.worst_gate_margin <= 1.0
    assert report.worst_semi_mc <= 0.02
    again = validate_analytics(params, grid="quick")
    assert again.text == report.text


def test_validate_analytics_rejects_unknown_grid():
    with pytest.raises(ValueError):
        validate_analytics(grid="huge")


def test_d_alpha_beta_variable_overrides_geometry(params):
    rows = run_sweep(
        SweepSpec(variable="d_alpha_beta_m", values=(50.0, 400.0), schemes=("gpm-noma",),
                  replications=2, master_seed=4, lambda_grid=0.05),
        params,
    )
    near, far = rows[0], rows[1]
    # a longer relay hop weakens the edge link and raises its outage
    assert far.means["sop_beta"] > near.means["sop_beta"]


def test_rs_and_zeta_variables_apply(params):
    rows = run_sweep(
        SweepSpec(variable="rs", values=(0.1, 1.0), schemes=("gpm-noma",),
                  replications=2, master_seed=5, lambda_grid=0.05),
        params,
    )
    assert rows[1].means["sops"] > rows[0].means["sops"]
    rows = run_sweep(
        SweepSpec(variable="zeta", values=(0.1, 0.9), schemes=("gpm-noma",),
                  replications=2, master_seed=5, lambda_grid=0.05),
        params,
    )
    # a looser outage tolerance can only widen the feasible schedule set
    assert rows[1].infeasible_fraction <= rows[0].infeasible_fraction
    assert rows[1].means["offloaded_tasks"] >= rows[0].means["offloaded_tasks"]
