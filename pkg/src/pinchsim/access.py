"""Multiple access on top of the channel/beamforming stack: TDMA and NOMA.

TDMA serves one user per slot, re-placing the pinching antennas between
slots. NOMA superposes users on one beam and separates them in the power
domain with successive interference cancellation; messages of weaker users
are decoded (and cancelled) first at stronger users, and each message's
rate is pinned by the worst SINR among the users that must decode it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import RateReport, _gains
from .channel import build_channel
from .placement import (
    PlacementSolution,
    _argmax_tie_smallest,
    default_grid_res,
    place_single_for_group,
)
from .scenario import PinchingLayout, Scenario


@dataclass(frozen=True, eq=False)
class TdmaSchedule:
    """Ordered service slots: (user index, layout) plus time shares."""

    slots: tuple[tuple[int, PinchingLayout], ...]
    slot_fractions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots",
                           tuple((int(u), lay) for u, lay in self.slots))
        object.__setattr__(self, "slot_fractions",
                           tuple(float(f) for f in self.slot_fractions))

    def validate(self, n_users: int) -> None:
        if len(self.slots) != len(self.slot_fractions):
            raise ValueError("one slot fraction is needed per slot")
        if not self.slots:
            raise ValueError("schedule has no slots")
        if any(f <= 0 or f > 1 for f in self.slot_fractions):
            raise ValueError("slot fractions must lie in (0, 1]")
        if abs(sum(self.slot_fractions) - 1.0) > 1e-12:
            raise ValueError(f"slot fractions sum to {sum(self.slot_fractions)!r}, not 1")
        served = {u for u, _ in self.slots}
        unknown = [u for u in served if u < 0 or u >= n_users]
        if unknown:
            raise ValueError(f"schedule references unknown users {sorted(unknown)}")
        missing = set(range(n_users)) - served
        if missing:
            raise ValueError(f"users {sorted(missing)} appear in no slot")


def tdma_rates(s: Scenario, schedule: TdmaSchedule, *,
               los_states=True, seed=None) -> RateReport:
    """Per-user TDMA rates: time-weighted single-user rates over the slots.

    Links are taken as LoS by default (slot layouts place antennas next to
    their users); pass ``los_states=None`` with a seed to sample instead.
    """
    n_users = len(s.users)
    schedule.validate(n_users)
    rho = s.transmit_snr
    rates = np.zeros(n_users)
    for (user, layout), fraction in zip(schedule.slots, schedule.slot_fractions):
        H = build_channel(s, layout, los_states=los_states, seed=seed)
        gain2 = float(np.linalg.norm(H.gains[user]) ** 2)
        rates[user] += fraction * np.log2(1.0 + rho * gain2)
    sinr = np.exp2(rates) - 1.0
    return RateReport(sinr, rates, float(rates.sum()), "tdma")


@dataclass(frozen=True, eq=False)
class NomaCluster:
    """Users sharing one beam, their power split, and the SIC decode order.

    ``sic_order`` lists cluster users in message-decode order: the first
    entry is decoded (and cancelled) by everyone, the last only by its own
    user. Consistency with the effective gains is checked at evaluation.
    """

    users: tuple[int, ...]
    power_split: tuple[float, ...]
    sic_order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(int(u) for u in self.users))
        object.__setattr__(self, "power_split", tuple(float(p) for p in self.power_split))
        object.__setattr__(self, "sic_order", tuple(int(u) for u in self.sic_order))

    def validate(self) -> None:
        if not self.users:
            raise ValueError("cluster has no users")
        if len(self.power_split) != len(self.users):
            raise ValueError("one power fraction is needed per cluster user")
        if any(p <= 0 or p >= 1 for p in self.power_split) and len(self.users) > 1:
            raise ValueError("power fractions must lie in (0, 1)")
        if abs(sum(self.power_split) - 1.0) > 1e-12:
            raise ValueError(f"power split sums to {sum(self.power_split)!r}, not 1")
        if sorted(self.sic_order) != sorted(self.users):
            raise ValueError("sic_order must be a permutation of the cluster users")


def noma_rates(s: Scenario, H, cluster: NomaCluster, beam,
               transmit_snr: float | None = None,
               other_beams: tuple[tuple[np.ndarray, float], ...] = ()) -> RateReport:
    """Superposition-coding rates for one cluster sharing a single beam.

    The message decoded at stage t sees interference from the power of all
    later-decoded messages; its rate is the minimum over the SINRs at every
    user that must decode it (its own receiver and all later-stage users).
    ``other_beams`` optionally adds inter-cluster interference terms as
    (unit vector, power fraction) pairs.
    """
    cluster.validate()
    rho = s.transmit_snr if transmit_snr is None else float(transmit_snr)
    G = _gains(H)
    beam = np.asarray(beam, dtype=complex).reshape(-1)
    if beam.shape[0] != G.shape[1]:
        raise ValueError(f"beam length {beam.shape[0]} does not match feeds {G.shape[1]}")
    if abs(np.linalg.norm(beam) - 1.0) > 1e-9:
        raise ValueError("beam must have unit norm")

    gains = {u: float(np.abs(np.conj(G[u]) @ beam) ** 2) for u in cluster.users}
    inter = {u: sum(float(np.abs(np.conj(G[u]) @ np.asarray(b, complex)) ** 2) * float(p)
                    for b, p in other_beams)
             for u in cluster.users}
    power = dict(zip(cluster.users, cluster.power_split))

    n = len(cluster.sic_order)
    rate_by_user: dict[int, float] = {}
    sinr_by_user: dict[int, float] = {}
    for t, msg_user in enumerate(cluster.sic_order):
        p_t = power[msg_user]
        later = sum(power[v] for v in cluster.sic_order[t + 1:])
        decoders = cluster.sic_order[t:]
        sinr = min(
            gains[u] * p_t * rho / (1.0 + rho * (gains[u] * later + inter[u]))
            for u in decoders
        )
        sinr_by_user[msg_user] = sinr
        rate_by_user[msg_user] = float(np.log2(1.0 + sinr))

    sinr = np.array([sinr_by_user[u] for u in cluster.users])
    rates = np.array([rate_by_user[u] for u in cluster.users])
    return RateReport(sinr, rates, float(rates.sum()), "noma")


def _kendall_distance(order_a: tuple[int, ...], order_b: tuple[int, ...]) -> int:
    """Number of user pairs ranked oppositely by the two orders."""
    pos = {u: i for i, u in enumerate(order_b)}
    a = [pos[u] for u in order_a]
    return sum(1 for i in range(len(a)) for j in range(i + 1, len(a)) if a[i] > a[j])


def noma_gain_reorder(s: Scenario, cluster_users, target_order,
                      grid_res: float | None = None) -> PlacementSolution:
    """Find a single-antenna offset realizing a desired channel-gain ranking.

    Only meaningful for a single waveguide serving the cluster: moving the
    antenna along the guide reorders the users' effective gains. Among grid
    offsets achieving the requested ranking (strongest first), the one with
    the best sum rate wins; if no offset achieves it, the closest ranking by
    pairwise inversions is returned with ``converged=False``.
    """
    if len(s.waveguides) != 1:
        raise ValueError("gain reordering assumes a single waveguide")
    w = s.waveguides[0]
    cluster_users = tuple(int(u) for u in cluster_users)
    target_order = tuple(int(u) for u in target_order)
    if sorted(target_order) != sorted(cluster_users):
        raise ValueError("target_order must be a permutation of the cluster users")
    res = default_grid_res(s) if grid_res is None else grid_res
    rho = s.transmit_snr
    users = s.users.positions[list(cluster_users)]

    lam0 = s.carrier.free_space_wavelength_m
    n = max(2, int(np.ceil(w.length_m / res)) + 1)
    grid = np.linspace(0.0, w.length_m, n)
    pos = w.feed_point[None, :] + grid[:, None] * w.axis_direction[None, :]
    dist = np.linalg.norm(users[None, :, :] - pos[:, None, :], axis=2)
    amp = lam0 / (4.0 * np.pi * dist) * np.exp(-w.guide_attenuation_np_per_m * grid)[:, None]
    gains = amp ** 2                      # (offsets, cluster users), LoS assumed
    rates = np.log2(1.0 + rho * gains)
    objective = rates.sum(axis=1)

    def ranking(row) -> tuple[int, ...]:
        order = np.argsort(-row, kind="stable")
        return tuple(cluster_users[i] for i in order)

    # No-op fast path: if the group-optimal offset already ranks as requested,
    # return it untouched.
    group = place_single_for_group(w, users, "sum_rate", s, grid_res=res)
    opt_x = group.layout.offsets_per_guide[0][0]
    d_opt = np.linalg.norm(users - w.point_at(opt_x)[None, :], axis=1)
    g_opt = (lam0 / (4.0 * np.pi * d_opt) * np.exp(-w.guide_attenuation_np_per_m * opt_x)) ** 2
    if ranking(g_opt) == target_order:
        return PlacementSolution(group.layout, group.objective_value, "sum_rate",
                                 n, True, (group.objective_value,))

    ranks = [ranking(gains[i]) for i in range(n)]
    matches = np.array([r == target_order for r in ranks])
    if np.any(matches):
        masked = np.where(matches, objective, -np.inf)
        i = _argmax_tie_smallest(masked)
        converged = True
    else:
        distances = np.array([_kendall_distance(r, target_order) for r in ranks])
        best_d = distances.min()
        masked = np.where(distances == best_d, objective, -np.inf)
        i = _argmax_tie_smallest(masked)
        converged = False

    layout = PinchingLayout(((float(grid[i]),),), ((1.0,),))
    return PlacementSolution(layout, float(objective[i]), "sum_rate", n,
                             converged, (float(objective[i]),))
