"""Spatial side of the simulator: Poisson fields in a disk window, the
jammer activation rules, nearest-receiver queries, and the lazily sampled
per-link channel state of one network realization.

Randomness discipline: a realization draws all point locations and all
per-potential-jammer / per-node link variates in a fixed order that does
not depend on the activation parameters.  Activation masks are pure
functions of those draws, so runs that share a seed are coupled: raising
rho only ever adds active jammers (common random numbers)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    LinkState,
    SystemParams,
    eavesdropper_gain_distribution,
    receiver_gain_distribution,
)

TWO_PI = 2.0 * math.pi

# vectorized nearest-neighbor queries fall back to a flat distance matrix
# below this receiver count; above it a uniform grid with cell size D wins
GRID_THRESHOLD = 64


def sample_ppp(density: float, window_radius: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson field in a disk around the origin.

    Returns an (n, 2) array; n is Poisson with mean density*pi*R^2 and
    points are uniform in the disk (radial CDF (r/R)^2).
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    if window_radius <= 0:
        raise ValueError("window_radius must be > 0")
    n = rng.poisson(density * math.pi * window_radius ** 2)
    r = window_radius * np.sqrt(rng.random(n))
    theta = TWO_PI * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _sample_annulus(density, r_in, r_out, rng):
    n = rng.poisson(density * math.pi * (r_out ** 2 - r_in ** 2))
    r = np.sqrt(r_in ** 2 + (r_out ** 2 - r_in ** 2) * rng.random(n))
    theta = TWO_PI * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


class GridIndex:
    """Uniform spatial hash over 2-D points with a fixed cell size.

    Exact nearest queries by ring expansion: after scanning Chebyshev
    ring k, any unscanned point is at least k*cell away.
    """

    def __init__(self, points: np.ndarray, cell: float):
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.points = np.asarray(points, float)
        self.cell = cell
        self.buckets: dict[tuple[int, int], list[int]] = {}
        keys = np.floor(self.points / cell).astype(np.int64)
        for i, (cx, cy) in enumerate(keys):
            self.buckets.setdefault((int(cx), int(cy)), []).append(i)

    def nearest(self, point) -> tuple[int, float]:
        if self.points.shape[0] == 0:
            raise ValueError("nearest query on an empty point set")
        px, py = float(point[0]), float(point[1])
        cx, cy = int(math.floor(px / self.cell)), int(math.floor(py / self.cell))
        best_i, best_d2 = -1, math.inf
        k = 0
        while True:
            for bx in range(cx - k, cx + k + 1):
                for by in range(cy - k, cy + k + 1):
                    if max(abs(bx - cx), abs(by - cy)) != k:
                        continue
                    for i in self.buckets.get((bx, by), ()):
                        dx = self.points[i, 0] - px
                        dy = self.points[i, 1] - py
                        d2 = dx * dx + dy * dy
                        if d2 < best_d2 or (d2 == best_d2 and i < best_i):
                            best_i, best_d2 = i, d2
            if best_i >= 0 and best_d2 <= (k * self.cell) ** 2:
                break
            k += 1
        return best_i, math.sqrt(best_d2)


def nearest_receiver(point, receivers) -> tuple[int, float]:
    """Index and distance of the receiver closest to ``point``; ties break
    toward the lowest index."""
    receivers = np.asarray(receivers, float)
    if receivers.size == 0:
        raise ValueError("realization has no receivers")
    if receivers.shape[0] < GRID_THRESHOLD:
        d2 = np.sum((receivers - np.asarray(point, float)) ** 2, axis=1)
        i = int(np.argmin(d2))  # argmin returns the first (lowest) index on ties
        return i, float(math.sqrt(d2[i]))
    # cell size: one LoS ball; desk-scale counts make ring scans O(1)
    return GridIndex(receivers, cell=_default_cell(receivers)).nearest(point)


def _default_cell(receivers):
    # receivers span the window; a 200 m class cell matches the ball radius
    span = float(np.max(np.abs(receivers))) if receivers.size else 1.0
    return max(span / max(int(math.sqrt(receivers.shape[0])), 1), 1e-9)


def nearest_receiver_bulk(points: np.ndarray, receivers: np.ndarray,
                          cell: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized nearest-receiver indices and distances for many points.

    A flat distance matrix wins while it fits comfortably in cache; the
    cell grid takes over for very large receiver sets.
    """
    n = points.shape[0]
    if receivers.shape[0] == 0:
        raise ValueError("realization has no receivers")
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if n * receivers.shape[0] <= 4_000_000:
        d2 = ((points[:, None, :] - receivers[None, :, :]) ** 2).sum(axis=2)
        idx = np.argmin(d2, axis=1)
        return idx, np.sqrt(d2[np.arange(n), idx])
    grid = GridIndex(receivers, cell=cell)
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i, pt in enumerate(points):
        idx[i], dist[i] = grid.nearest(pt)
    return idx, dist


def place_typical_pair(realization: "NetworkRealization",
                       params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Put the tagged receiver at the origin and its transmitter r0 away
    at a uniform bearing; the pair link is LoS by assumption."""
    ang = TWO_PI * realization.rng.random()
    realization.y0 = np.zeros(2)
    realization.x0 = params.r0 * np.array([math.cos(ang), math.sin(ang)])
    realization.pair_state = LinkState.LOS
    return realization.x0, realization.y0


@dataclass
class NetworkRealization:
    """One sampled network: node positions plus memoized per-link channel
    draws.  Confined to a single trial; not thread-safe."""

    params: SystemParams
    window_radius: float
    rng: np.random.Generator
    with_eavesdroppers: bool = True

    x0: np.ndarray = None
    y0: np.ndarray = None
    pair_state: LinkState = LinkState.LOS
    pair_fading: float = 1.0
    transmitters: np.ndarray = None     # (T, 2), tagged pair excluded
    receivers: np.ndarray = None        # (1 + T, 2), row 0 is the tagged receiver
    potential_jammers: np.ndarray = None
    eavesdroppers: np.ndarray = None
    jammer_flags: np.ndarray = None     # set by a selection rule

    # selection draws (fixed order, activation independent)
    nearest_idx: np.ndarray = None
    nearest_dist: np.ndarray = None
    _sel_u_state: np.ndarray = None
    _sel_u_act: np.ndarray = None
    nearest_los: np.ndarray = None      # memoized state of jammer -> nearest receiver

    # memoized link draws toward the tagged receiver
    _jam_y0: dict = field(default_factory=dict)
    _tx_y0: dict = field(default_factory=dict)
    _eve_sig: dict = field(default_factory=dict)
    _eve_rows: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.params
        rng = self.rng
        place_typical_pair(self, p)
        self.pair_fading = float(rng.standard_gamma(p.N_L) / p.N_L)
        self.transmitters = sample_ppp(p.lambda_T, self.window_radius, rng)
        angles = TWO_PI * rng.random(self.transmitters.shape[0])
        offsets = p.r0 * np.column_stack([np.cos(angles), np.sin(angles)])
        self.receivers = np.vstack([self.y0[None, :], self.transmitters + offsets])
        self.potential_jammers = sample_ppp(p.lambda_P, self.window_radius, rng)
        if self.with_eavesdroppers:
            self.eavesdroppers = sample_ppp(p.lambda_E, self.window_radius, rng)
        else:
            self.eavesdroppers = np.zeros((0, 2))
        nj = self.potential_jammers.shape[0]
        self._sel_u_state = rng.random(nj)
        self._sel_u_act = rng.random(nj)
        self.nearest_idx, self.nearest_dist = nearest_receiver_bulk(
            self.potential_jammers, self.receivers, cell=p.D)
        self.nearest_los = (self.nearest_dist <= p.D) & (self._sel_u_state < p.p_L)
        self.jammer_flags = np.zeros(nj, dtype=bool)
        # tagged-receiver link draws for every potential jammer and every
        # concurrent transmitter, drawn up front so activation masks and
        # schemes never shift the stream
        self._jam_y0_draws = (rng.random(nj), rng.random(nj))
        self._tx_y0_draws = (rng.random(self.transmitters.shape[0]),
                             rng.random(self.transmitters.shape[0]))
        ne = self.eavesdroppers.shape[0]
        self._eve_sig_draws = (rng.random(ne), rng.random(ne))
        self._gamma_budget_done = False

    # --- link channels toward the tagged receiver --------------------------

    def jam_to_y0(self):
        """(los, gain, fading, d2) arrays for every potential jammer's link
        to the tagged receiver; the nearest-receiver blockage draw is
        reused when the tagged receiver is that nearest receiver."""
        if "arr" not in self._jam_y0:
            p = self.params
            d2 = np.sum(self.potential_jammers ** 2, axis=1)
            u_state, u_gain = self._jam_y0_draws
            fresh = (d2 <= p.D * p.D) & (u_state < p.p_L)
            los = np.where(self.nearest_idx == 0, self.nearest_los, fresh)
            gain = receiver_gain_distribution(p).sample_from(u_gain)
            shape = np.where(los, float(p.N_L), float(p.N_N))
            fading = self.rng.standard_gamma(shape) / shape
            self._jam_y0["arr"] = (los, gain, fading, d2)
        return self._jam_y0["arr"]

    def tx_to_y0(self):
        if "arr" not in self._tx_y0:
            p = self.params
            d2 = np.sum(self.transmitters ** 2, axis=1)
            u_state, u_gain = self._tx_y0_draws
            los = (d2 <= p.D * p.D) & (u_state < p.p_L)
            gain = receiver_gain_distribution(p).sample_from(u_gain)
            shape = np.where(los, float(p.N_L), float(p.N_N))
            fading = self.rng.standard_gamma(shape) / shape
            self._tx_y0["arr"] = (los, gain, fading, d2)
        return self._tx_y0["arr"]

    def eve_signal(self):
        """(los, gain, fading, d2) of the tagged transmitter's link to
        every eavesdropper."""
        if "arr" not in self._eve_sig:
            p = self.params
            d2 = np.sum((self.eavesdroppers - self.x0) ** 2, axis=1)
            u_state, u_gain = self._eve_sig_draws
            los = (d2 <= p.D * p.D) & (u_state < p.p_L)
            gain = eavesdropper_gain_distribution(p).sample_from(u_gain)
            shape = np.where(los, float(p.N_L), float(p.N_N))
            fading = self.rng.standard_gamma(shape) / shape
            self._eve_sig["arr"] = (los, gain, fading, d2)
        return self._eve_sig["arr"]

    def eve_row(self, k: int):
        """(los, gain, fading, d2) of every interferer column (potential
        jammers then concurrent transmitters) toward eavesdropper k.
        Sampled once per eavesdropper and memoized."""
        if k not in self._eve_rows:
            p = self.params
            z = self.eavesdroppers[k]
            pts = (np.vstack([self.potential_jammers, self.transmitters])
                   if self.transmitters.size else self.potential_jammers)
            d2 = np.sum((pts - z) ** 2, axis=1)
            u_state = self.rng.random(d2.shape[0])
            u_gain = self.rng.random(d2.shape[0])
            los = (d2 <= p.D * p.D) & (u_state < p.p_L)
            gain = eavesdropper_gain_distribution(p).sample_from(u_gain)
            shape = np.where(los, float(p.N_L), float(p.N_N))
            fading = self.rng.standard_gamma(shape) / shape
            self._eve_rows[k] = (los, gain, fading, d2)
        return self._eve_rows[k]

    def link_state(self, kind: str, index: int, victim: str = "y0") -> LinkState:
        """Memoized blockage state of one ordered link (test/query API)."""
        if kind == "pair":
            return self.pair_state
        if victim == "y0":
            los = self.jam_to_y0()[0] if kind == "jam" else self.tx_to_y0()[0]
            return LinkState.LOS if los[index] else LinkState.NLOS
        raise ValueError(f"unsupported link query {kind!r} -> {victim!r}")


def scj_select(realization: NetworkRealization, params: SystemParams,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """Sight-based activation: potential jammers beyond every receiver's
    ball always transmit; in-ball ones transmit with probability rho when
    their nearest-receiver link is blocked; LoS ones stay silent."""
    del rng  # draws are pre-committed on the realization
    r = realization
    inball = r.nearest_dist <= params.D
    active = ~inball | (inball & ~r.nearest_los & (r._sel_u_act < params.rho))
    r.jammer_flags = active
    return active


def scjq_select(realization: NetworkRealization, params: SystemParams,
                rng: np.random.Generator | None = None) -> np.ndarray:
    """Quiet variant: only in-ball blocked jammers transmit (rho-thinned);
    everything beyond the covered region stays silent."""
    del rng
    r = realization
    inball = r.nearest_dist <= params.D
    active = inball & ~r.nearest_los & (r._sel_u_act < params.rho)
    r.jammer_flags = active
    return active


def pj_select(realization: NetworkRealization, varrho: float,
              rng: np.random.Generator | None = None) -> np.ndarray:
    """Partial jamming baseline: independent activation with probability
    varrho, blind to sight conditions."""
    del rng
    active = realization._sel_u_act < varrho
    realization.jammer_flags = active
    return active


def select(realization: NetworkRealization, scheme: str) -> np.ndarray:
    p = realization.params
    if scheme == "scj":
        return scj_select(realization, p)
    if scheme == "scjq":
        return scjq_select(realization, p)
    if scheme == "pj":
        return pj_select(realization, p.varrho)
    if scheme == "none":
        realization.jammer_flags = np.zeros(realization.potential_jammers.shape[0],
                                            dtype=bool)
        return realization.jammer_flags
    raise ValueError(f"unknown scheme {scheme!r}")
