"""System configuration and unit conventions.

All configuration lives in one immutable ``SystemParams`` value. Powers are
stored in dBm (the unit used at the config boundary) and exposed in linear
watts through accessors; every other quantity is plain SI. Noise power is
derived exactly once from the spectral density and the bandwidth.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

ENV_CONFIG_VAR = "SECMEC_CONFIG"

# Channel labels: b = base station, e = eavesdropper, alpha = center vehicle
# (relay), beta = edge vehicle.  "alpha_alpha" is the relay self-interference
# loop, "bb" the base-station self-interference matrix entries.
CHANNEL_LABELS = (
    "bb",
    "b_alpha",
    "b_e",
    "beta_alpha",
    "alpha_b",
    "alpha_e",
    "beta_e",
    "alpha_alpha",
)


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm level to linear watts."""
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    """Convert linear watts to dBm. Requires a strictly positive power."""
    if watts <= 0.0:
        raise ValueError("power must be strictly positive to express in dBm")
    return 10.0 * math.log10(watts * 1e3)


def _default_variances() -> dict[str, float]:
    return {label: 1.0 for label in CHANNEL_LABELS}


@dataclass(frozen=True)
class SystemParams:
    """Validated system configuration.

    Defaults follow the standard simulation setup: 40 vehicles on a
    1000 m road segment, a 10-antenna base station co-located with the MEC
    server, 1 MHz bandwidth and unit-variance Rayleigh links.
    """

    n_vehicles: int = 40
    m_tasks: int = 10
    quad_nodes: int = 500
    cell_radius_m: float = 500.0
    center_radius_m: float = 300.0
    bs_antennas: int = 10
    bandwidth_hz: float = 1e6
    p_an_dbm: float = 40.0
    p_center_dbm: float = 10.0
    p_edge_dbm: float = 10.0
    noise_density_dbm_hz: float = -174.0
    f_mec_hz: float = 5e10
    f_local_hz: float = 5e8
    cycles_per_bit: float = 1000.0
    task_bits: float = 1e5
    path_loss_exp: float = 3.0
    secrecy_rate_target: float = 0.1
    sop_tolerance: float = 0.5
    max_delay_s: float = 3.0
    bs_height_m: float = 10.0
    max_speed_mps: float = 20.0
    p_si_dbm: float = -60.0
    channel_variances: dict[str, float] = field(default_factory=_default_variances)
    rng_seed: int = 42

    def __post_init__(self) -> None:
        merged = _default_variances()
        unknown = set(self.channel_variances) - set(CHANNEL_LABELS)
        if unknown:
            raise ValueError(
                f"channel_variances: unknown channel labels {sorted(unknown)}"
            )
        merged.update(self.channel_variances)
        object.__setattr__(self, "channel_variances", merged)

        for name in ("n_vehicles", "quad_nodes", "bs_antennas"):
            value = getattr(self, name)
            if not isinstance(value, int):
                raise ValueError(f"{name}: expected an integer, got {value!r}")
        if not isinstance(self.m_tasks, int) or self.m_tasks < 0:
            raise ValueError(f"m_tasks: expected a nonnegative integer, got {self.m_tasks!r}")
        if self.n_vehicles < 1:
            raise ValueError(f"n_vehicles: must be >= 1, got {self.n_vehicles}")
        if self.quad_nodes < 2:
            raise ValueError(f"quad_nodes: must be >= 2, got {self.quad_nodes}")
        if self.bs_antennas < 2:
            raise ValueError(f"bs_antennas: must be >= 2, got {self.bs_antennas}")

        positive = (
            "cell_radius_m",
            "center_radius_m",
            "bandwidth_hz",
            "f_mec_hz",
            "f_local_hz",
            "cycles_per_bit",
            "task_bits",
            "path_loss_exp",
            "secrecy_rate_target",
            "max_delay_s",
            "bs_height_m",
            "max_speed_mps",
        )
        for name in positive:
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name}: must be strictly positive, got {value}")
        if not 0.0 < self.sop_tolerance <= 1.0:
            raise ValueError(
                f"sop_tolerance: must lie in (0, 1], got {self.sop_tolerance}"
            )
        if not self.center_radius_m < self.cell_radius_m:
            raise ValueError(
                "center_radius_m: must be smaller than cell_radius_m "
                f"({self.center_radius_m} >= {self.cell_radius_m})"
            )
        for label, variance in self.channel_variances.items():
            if not variance > 0.0:
                raise ValueError(
                    f"channel_variances[{label}]: must be strictly positive, got {variance}"
                )

    # -- linear-unit accessors -------------------------------------------

    @property
    def p_an_w(self) -> float:
        """Total artificial-noise budget of the base station, watts."""
        return dbm_to_watts(self.p_an_dbm)

    @property
    def p_an_antenna_w(self) -> float:
        """Per-antenna artificial-noise power P_B/(K-1), watts."""
        return self.p_an_w / (self.bs_antennas - 1)

    @property
    def p_center_w(self) -> float:
        return dbm_to_watts(self.p_center_dbm)

    @property
    def p_edge_w(self) -> float:
        return dbm_to_watts(self.p_edge_dbm)

    @property
    def p_si_w(self) -> float:
        """Residual self-interference power at the full-duplex relay, watts."""
        return dbm_to_watts(self.p_si_dbm)

    @property
    def noise_w(self) -> float:
        """AWGN power over the full band: N_0 (linear W/Hz) times B."""
        return noise_power(self)

    def gamma(self, label: str) -> float:
        """Exponential rate of |h|^2 for one channel: gamma_j = 1/sigma^2_j."""
        return 1.0 / self.channel_variances[label]

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["channel_variances"] = dict(self.channel_variances)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_updates(self, **updates: Any) -> "SystemParams":
        """Return a copy with the given fields replaced (revalidates)."""
        return dataclasses.replace(self, **updates)

    def header_items(self) -> list[tuple[str, str]]:
        """Flat, sorted (key, value) pairs for report and CSV headers."""
        items: list[tuple[str, str]] = []
        for key, value in sorted(self.to_dict().items()):
            if isinstance(value, Mapping):
                for sub, subval in sorted(value.items()):
                    items.append((f"{key}.{sub}", repr(subval)))
            else:
                items.append((key, repr(value)))
        return items


def noise_power(params: SystemParams) -> float:
    """Noise power in watts: 10^(N_0/10) * 1e-3 * B."""
    return dbm_to_watts(params.noise_density_dbm_hz) * params.bandwidth_hz


_FIELD_NAMES = {f.name for f in dataclasses.fields(SystemParams)}


def load_params(path: str | os.PathLike[str] | None = None) -> SystemParams:
    """Load configuration from a flat JSON file.

    With no argument, the path is taken from the ``SECMEC_CONFIG``
    environment variable; if that is unset too, defaults are returned.
    Unknown keys are rejected so typos cannot silently fall back to
    defaults.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR) or None
    if path is None:
        return SystemParams()
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return params_from_dict(raw)


def params_from_dict(raw: Mapping[str, Any]) -> SystemParams:
    """Build SystemParams from a parsed mapping, rejecting unknown keys."""
    if not isinstance(raw, Mapping):
        raise ValueError(f"config root must be an object, got {type(raw).__name__}")
    unknown = set(raw) - _FIELD_NAMES
    if unknown:
        raise ValueError(f"config: unknown keys {sorted(unknown)}")
    kwargs = dict(raw)
    if "channel_variances" in kwargs:
        variances = kwargs["channel_variances"]
        if not isinstance(variances, Mapping):
            raise ValueError("channel_variances: must be an object of label -> variance")
        kwargs["channel_variances"] = {k: float(v) for k, v in variances.items()}
    for int_key in ("n_vehicles", "m_tasks", "quad_nodes", "bs_antennas", "rng_seed"):
        if int_key in kwargs:
            kwargs[int_key] = int(kwargs[int_key])
    return SystemParams(**kwargs)
