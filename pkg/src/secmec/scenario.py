"""Road scenario generation, vehicle grouping, and pairing policies.

Vehicles live on a one-dimensional road through the base station at the
origin. The sign of ``horiz_dist_m`` selects the road side, the sign of
``speed_mps`` the travel direction (positive means toward the station).
Pairing never crosses road sides.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import LinkGeometry, pair_geometry
from .params import SystemParams

EVE_ID = -1


@dataclass(frozen=True)
class Vehicle:
    id: int
    horiz_dist_m: float
    speed_mps: float

    @property
    def toward_bs(self) -> bool:
        return self.speed_mps >= 0.0

    @property
    def side(self) -> int:
        """+1 for nonnegative positions, -1 otherwise."""
        return 1 if self.horiz_dist_m >= 0.0 else -1


@dataclass(frozen=True)
class EavesdropperPlacement:
    horiz_dist_m: float


@dataclass(frozen=True)
class GroupAssignment:
    center_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple[tuple[int, int], ...]
    unpaired: tuple[int, ...]


def generate_scenario(
    params: SystemParams, seed
) -> tuple[list[Vehicle], EavesdropperPlacement]:
    """Draw vehicle positions/speeds and one eavesdropper position.

    Positions are uniform on [-R, R], speeds uniform on [-v_max, v_max].
    The eavesdropper distance is uniform on [0, R] with a uniformly chosen
    road side. Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    radius = params.cell_radius_m
    positions = rng.uniform(-radius, radius, params.n_vehicles)
    speeds = rng.uniform(-params.max_speed_mps, params.max_speed_mps, params.n_vehicles)
    vehicles = [
        Vehicle(id=i, horiz_dist_m=float(positions[i]), speed_mps=float(speeds[i]))
        for i in range(params.n_vehicles)
    ]
    eve_dist = float(rng.uniform(0.0, radius))
    eve_side = 1.0 if int(rng.integers(0, 2)) == 0 else -1.0
    return vehicles, EavesdropperPlacement(horiz_dist_m=eve_side * eve_dist)


def assign_groups(vehicles: list[Vehicle], params: SystemParams) -> GroupAssignment:
    """Center group = vehicles within the closed ball |l| <= R_MC."""
    centers = [v.id for v in vehicles if abs(v.horiz_dist_m) <= params.center_radius_m]
    edges = [v.id for v in vehicles if abs(v.horiz_dist_m) > params.center_radius_m]
    return GroupAssignment(center_ids=tuple(centers), edge_ids=tuple(edges))


def _edge_processing_order(edges: list[Vehicle]) -> list[Vehicle]:
    """Farthest edge vehicle first; ties broken by lower id."""
    return sorted(edges, key=lambda v: (-abs(v.horiz_dist_m), v.id))


def _pick_center(edge: Vehicle, pool: list[Vehicle]) -> Vehicle | None:
    """Choose the relay partner for one edge vehicle from the remaining
    same-side centers.

    A partner traveling the same direction is preferred at the nearest
    distance when the edge vehicle approaches the station and at the
    farthest distance when it departs; with no same-direction candidate the
    preference flips to the opposite-direction set with the opposite
    distance rule. Distances are measured between the two vehicles.
    """
    if not pool:
        return None
    same = [c for c in pool if c.toward_bs == edge.toward_bs]
    if edge.toward_bs:
        candidates, want_nearest = (same, True) if same else (pool, False)
    else:
        candidates, want_nearest = (same, False) if same else (pool, True)
    sign = 1.0 if want_nearest else -1.0
    return min(
        candidates,
        key=lambda c: (sign * abs(c.horiz_dist_m - edge.horiz_dist_m), c.id),
    )


def pair_gpm(groups: GroupAssignment, vehicles: list[Vehicle]) -> PairingResult:
    """Greedy direction-aware pairing, one road side at a time.

    Edge vehicles are served farthest-first; every chosen center vehicle
    leaves the pool, and anything left over on either side is reported
    unpaired. The output depends only on positions and travel directions,
    never on the input ordering or speed magnitudes.
    """
    by_id = {v.id: v for v in vehicles}
    edges = _edge_processing_order([by_id[i] for i in groups.edge_ids])
    pools = {
        1: [by_id[i] for i in groups.center_ids if by_id[i].side == 1],
        -1: [by_id[i] for i in groups.center_ids if by_id[i].side == -1],
    }
    for side in pools:
        pools[side].sort(key=lambda v: v.id)
    pairs: list[tuple[int, int]] = []
    for edge in edges:
        pool = pools[edge.side]
        center = _pick_center(edge, pool)
        if center is None:
            continue
        pool.remove(center)
        pairs.append((center.id, edge.id))
    paired = {i for pair in pairs for i in pair}
    unpaired = tuple(v.id for v in vehicles if v.id not in paired)
    return PairingResult(pairs=tuple(pairs), unpaired=unpaired)


def pair_rpm(
    groups: GroupAssignment, vehicles: list[Vehicle], seed
) -> PairingResult:
    """Random pairing baseline: each edge vehicle, taken in the same
    canonical farthest-first order as pair_gpm, draws a uniformly random
    partner from the remaining same-side centers."""
    rng = np.random.default_rng(seed)
    by_id = {v.id: v for v in vehicles}
    edges = _edge_processing_order([by_id[i] for i in groups.edge_ids])
    pools = {
        1: sorted(
            (by_id[i] for i in groups.center_ids if by_id[i].side == 1),
            key=lambda v: v.id,
        ),
        -1: sorted(
            (by_id[i] for i in groups.center_ids if by_id[i].side == -1),
            key=lambda v: v.id,
        ),
    }
    pairs: list[tuple[int, int]] = []
    for edge in edges:
        pool = pools[edge.side]
        if not pool:
            continue
        center = pool.pop(int(rng.integers(0, len(pool))))
        pairs.append((center.id, edge.id))
    paired = {i for pair in pairs for i in pair}
    unpaired = tuple(v.id for v in vehicles if v.id not in paired)
    return PairingResult(pairs=tuple(pairs), unpaired=unpaired)


def pair_link_geometry(
    pair: tuple[int, int],
    vehicles: list[Vehicle],
    eve: EavesdropperPlacement,
    params: SystemParams,
) -> LinkGeometry:
    """Distances for one (center, edge) pair against the eavesdropper."""
    by_id = {v.id: v for v in vehicles}
    center = by_id[pair[0]]
    edge = by_id[pair[1]]
    return pair_geometry(
        edge_l_m=edge.horiz_dist_m,
        center_l_m=center.horiz_dist_m,
        eve_l_m=eve.horiz_dist_m,
        params=params,
    )


def dump_scenario_csv(
    path,
    vehicles: list[Vehicle],
    eve: EavesdropperPlacement,
    groups: GroupAssignment,
    pairing: PairingResult,
) -> None:
    """Write one scenario to CSV (columns id, l_m, speed_mps, group, pair_id).

    The eavesdropper appears as a pseudo-row with id -1 and group "eve".
    """
    pair_of: dict[int, int] = {}
    for idx, (center_id, edge_id) in enumerate(pairing.pairs):
        pair_of[center_id] = idx
        pair_of[edge_id] = idx
    center_set = set(groups.center_ids)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "l_m", "speed_mps", "group", "pair_id"])
        for v in vehicles:
            group = "center" if v.id in center_set else "edge"
            pid = pair_of.get(v.id, "")
            writer.writerow([v.id, repr(v.horiz_dist_m), repr(v.speed_mps), group, pid])
        writer.writerow([EVE_ID, repr(eve.horiz_dist_m), repr(0.0), "eve", ""])


def load_scenario_csv(
    path,
) -> tuple[list[Vehicle], EavesdropperPlacement, GroupAssignment, PairingResult]:
    """Inverse of dump_scenario_csv."""
    vehicles: list[Vehicle] = []
    centers: list[int] = []
    edges: list[int] = []
    eve: EavesdropperPlacement | None = None
    pair_members: dict[int, dict[str, int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            vid = int(row["id"])
            l_m = float(row["l_m"])
            if row["group"] == "eve":
                eve = EavesdropperPlacement(horiz_dist_m=l_m)
                continue
            vehicles.append(
                Vehicle(id=vid, horiz_dist_m=l_m, speed_mps=float(row["speed_mps"]))
            )
            if row["group"] == "center":
                centers.append(vid)
            else:
                edges.append(vid)
            if row["pair_id"] != "":
                slot = pair_members.setdefault(int(row["pair_id"]), {})
                slot["center" if row["group"] == "center" else "edge"] = vid
    if eve is None:
        raise ValueError(f"{path}: missing eavesdropper row")
    pairs = tuple(
        (pair_members[k]["center"], pair_members[k]["edge"])
        for k in sorted(pair_members)
    )
    paired = {i for pair in pairs for i in pair}
    unpaired = tuple(v.id for v in vehicles if v.id not in paired)
    groups = GroupAssignment(center_ids=tuple(centers), edge_ids=tuple(edges))
    return vehicles, eve, groups, PairingResult(pairs=pairs, unpaired=unpaired)
