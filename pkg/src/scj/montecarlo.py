"""Monte Carlo engine: estimates the connection probability, secrecy
probability and secrecy capacity by simulating network realizations, and
provides an empirical Laplace-transform oracle for every interference
population the closed-form engine models.

Reproducibility: trial t draws from a generator seeded by
SeedSequence(seed, spawn_key=(t,)), so results are a pure function of
(parameters, trials, seed), independent of worker count and scheduling.
Indicator estimates accumulate in integer counts; transform estimates
reduce per fixed-size chunk in chunk order."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    SystemParams,
    eavesdropper_gain_distribution,
    receiver_gain_distribution,
    sinr_threshold_connection,
    sinr_threshold_secrecy,
)
from .pointprocess import (
    NetworkRealization,
    nearest_receiver_bulk,
    sample_ppp,
    _sample_annulus,
    select,
)

CHUNK_TRIALS = 256  # fixed chunking keeps reductions thread-count invariant

SCHEMES = ("scj", "pj", "scjq", "none")


@dataclass(frozen=True)
class Estimate:
    """Indicator-mean estimate with a binomial 95% half width."""

    mean: float
    half_width_95: float
    trials: int

    @classmethod
    def from_count(cls, count: int, trials: int) -> "Estimate":
        mean = count / trials
        hw = 1.96 * math.sqrt(mean * (1.0 - mean) / trials)
        return cls(mean=mean, half_width_95=hw, trials=trials)


@dataclass(frozen=True)
class TrialOutcome:
    connected: bool
    secret: bool


@dataclass(frozen=True)
class LaplaceEstimate:
    """Sample mean of exp(-s I) with its standard error."""

    mean: np.ndarray
    se: np.ndarray
    trials: int


def resolve_threads(threads=None) -> int:
    if threads is None:
        env = os.environ.get("SCJ_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(int(threads), 1)


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))))


def _amplitude(d2, los, params):
    """g-free propagation factor d^{-alpha_b} from squared distances."""
    with np.errstate(divide="ignore"):
        if params.alpha_L == 2.0:
            al = 1.0 / d2
        else:
            al = np.power(d2, -0.5 * params.alpha_L)
        if params.alpha_N == 4.0:
            an = 1.0 / (d2 * d2)
        else:
            an = np.power(d2, -0.5 * params.alpha_N)
    return np.where(los, al, an)


# ---------------------------------------------------------------------------
# single-trial physics
# ---------------------------------------------------------------------------

def interference_at_y0(r: NetworkRealization) -> float:
    """Total interference power (normalized by P) at the tagged receiver
    from active jammers and concurrent transmitters."""
    p = r.params
    los, gain, fading, d2 = r.jam_to_y0()
    total = float(np.sum((gain * fading * _amplitude(d2, los, p))[r.jammer_flags]))
    if r.transmitters.shape[0]:
        los, gain, fading, d2 = r.tx_to_y0()
        total += float(np.sum(gain * fading * _amplitude(d2, los, p)))
    return total


def pair_sinr(r: NetworkRealization) -> float:
    p = r.params
    signal = p.G_T * p.G_R * r.pair_fading * p.r0 ** (-p.alpha_L)
    return signal / (interference_at_y0(r) + p.noise_ratio)


def eavesdropper_interference(r: NetworkRealization, k: int) -> float:
    p = r.params
    los, gain, fading, d2 = r.eve_row(k)
    mask = np.concatenate([r.jammer_flags,
                           np.ones(r.transmitters.shape[0], dtype=bool)])
    return float(np.sum((gain * fading * _amplitude(d2, los, p))[mask]))


def sinr_at(r: NetworkRealization, victim, source) -> float:
    """SINR of one link in a realization.

    victim: "y0" or ("eve", k); source: "x0", ("jam", i) or ("tx", i).
    The tagged pair link uses the aligned-beam gain; every other link uses
    its memoized random gain, blockage state and fading.
    """
    p = r.params
    if victim == "y0":
        total = interference_at_y0(r)
        if source == "x0":
            num = p.G_T * p.G_R * r.pair_fading * p.r0 ** (-p.alpha_L)
            return num / (total + p.noise_ratio)
        kind, i = source
        los, gain, fading, d2 = r.jam_to_y0() if kind == "jam" else r.tx_to_y0()
        if d2[i] == 0.0:
            raise ValueError("coincident victim and source")
        contrib = float(gain[i] * fading[i] * _amplitude(d2[i:i + 1], los[i:i + 1], p)[0])
        active = (kind == "tx") or bool(r.jammer_flags[i])
        denom = total - (contrib if active else 0.0)
        return contrib / (denom + p.noise_ratio)
    kind, k = victim
    if kind != "eve":
        raise ValueError(f"unsupported victim {victim!r}")
    if source != "x0":
        raise ValueError("eavesdroppers are evaluated against the tagged transmitter")
    los, gain, fading, d2 = r.eve_signal()
    if d2[k] == 0.0:
        raise ValueError("coincident victim and source")
    num = float(gain[k] * fading[k] * _amplitude(d2[k:k + 1], los[k:k + 1], p)[0])
    return num / (eavesdropper_interference(r, k) + p.noise_ratio)


def run_trial(params: SystemParams, scheme: str, window_radius: float,
              rng: np.random.Generator, want_ps: bool = True) -> TrialOutcome:
    """One network realization: connection and secrecy indicators of the
    tagged pair."""
    r = NetworkRealization(params, window_radius, rng, with_eavesdroppers=want_ps)
    select(r, scheme)
    tau_c = sinr_threshold_connection(params)
    connected = pair_sinr(r) >= tau_c
    if not want_ps:
        return TrialOutcome(connected=bool(connected), secret=True)

    tau_e = sinr_threshold_secrecy(params)
    los, gain, fading, d2 = r.eve_signal()
    sig = gain * fading * _amplitude(d2, los, params)
    # an eavesdropper whose noise-only SINR misses the threshold can never
    # decode; pruning it is exact and removes almost every row
    cand = np.nonzero(sig >= tau_e * params.noise_ratio)[0]
    secret = True
    for k in cand[np.argsort(-sig[cand], kind="stable")]:
        interf = eavesdropper_interference(r, int(k))
        if sig[k] > tau_e * (interf + params.noise_ratio):
            secret = False
            break
    return TrialOutcome(connected=bool(connected), secret=secret)


# ---------------------------------------------------------------------------
# chunked estimators
# ---------------------------------------------------------------------------

def _indicator_chunk(args):
    params, scheme, window_radius, seed, lo, hi, want_ps = args
    n_conn = n_secret = 0
    for t in range(lo, hi):
        out = run_trial(params, scheme, window_radius, _trial_rng(seed, t), want_ps)
        n_conn += out.connected
        n_secret += out.secret
    return n_conn, n_secret


def _map_chunks(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def _chunk_bounds(trials):
    return [(lo, min(lo + CHUNK_TRIALS, trials)) for lo in range(0, trials, CHUNK_TRIALS)]


def _run_indicators(params, scheme, trials, window_radius, seed, threads, want_ps):
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threads = resolve_threads(threads)
    jobs = [(params, scheme, window_radius, seed, lo, hi, want_ps)
            for lo, hi in _chunk_bounds(trials)]
    results = _map_chunks(_indicator_chunk, jobs, threads)
    n_conn = sum(r[0] for r in results)
    n_secret = sum(r[1] for r in results)
    return n_conn, n_secret


def estimate_pc(params: SystemParams, scheme: str = "scj", trials: int = 10_000,
                window_radius: float = 500.0, seed: int = 42,
                threads: int | None = None) -> Estimate:
    """Fraction of realizations in which the tagged receiver decodes."""
    n_conn, _ = _run_indicators(params, scheme, trials, window_radius, seed,
                                threads, want_ps=False)
    return Estimate.from_count(n_conn, trials)


def estimate_ps(params: SystemParams, scheme: str = "scj", trials: int = 100_000,
                window_radius: float = 500.0, seed: int = 42,
                threads: int | None = None) -> Estimate:
    """Fraction of realizations in which no eavesdropper decodes."""
    _, n_secret = _run_indicators(params, scheme, trials, window_radius, seed,
                                  threads, want_ps=True)
    return Estimate.from_count(n_secret, trials)


def estimate_pc_ps(params: SystemParams, scheme: str = "scj", trials: int = 10_000,
                   window_radius: float = 500.0, seed: int = 42,
                   threads: int | None = None) -> tuple[Estimate, Estimate]:
    """Both indicators from one set of realizations."""
    n_conn, n_secret = _run_indicators(params, scheme, trials, window_radius,
                                       seed, threads, want_ps=True)
    return Estimate.from_count(n_conn, trials), Estimate.from_count(n_secret, trials)


def estimate_stc(params: SystemParams, scheme: str = "scj", trials: int = 10_000,
                 window_radius: float = 500.0, seed: int = 42,
                 threads: int | None = None) -> float:
    """Secrecy transmission capacity from jointly estimated indicators."""
    pc, ps = estimate_pc_ps(params, scheme, trials, window_radius, seed, threads)
    return pc.mean * ps.mean * (params.R_t - params.R_e) * params.lambda_T


# ---------------------------------------------------------------------------
# empirical Laplace transforms
# ---------------------------------------------------------------------------

KINDS = ("nlos_disk", "nlos_annulus", "ball_disk",
         "pair_hole", "scj_homogeneous", "residual_all_holes")


@dataclass(frozen=True)
class InterfererConfig:
    """One interference population whose transform the oracle estimates.

    kind:
      nlos_disk           homogeneous field, every link to the victim NLoS
      nlos_annulus        homogeneous field beyond the victim's ball, NLoS
      ball_disk           homogeneous field, ball blockage at the victim
      pair_hole           residual baseline minus the tagged receiver ball,
                          victim r_e from the transmitter
      scj_homogeneous     active-component field with nearest-receiver
                          conditioned blockage at the tagged receiver
      residual_all_holes  residual baseline minus every receiver ball,
                          victim r_e from the transmitter
    density: overrides the kind's default; gains: 'rx' or 'eve'.
    """

    kind: str
    params: SystemParams
    density: float | None = None
    gains: str = "rx"
    r_e: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interferer kind {self.kind!r}")
        if self.kind in ("pair_hole", "residual_all_holes") and not self.r_e:
            raise ValueError(f"{self.kind} requires r_e")
        if self.gains not in ("rx", "eve"):
            raise ValueError("gains must be 'rx' or 'eve'")

    def base_density(self) -> float:
        if self.density is not None:
            return self.density
        p = self.params
        return {"nlos_disk": p.lambda_J, "nlos_annulus": p.lambda_J_bar,
                "ball_disk": p.lambda_J, "pair_hole": p.lambda_J_bar,
                "scj_homogeneous": p.lambda_J, "residual_all_holes": p.lambda_J_bar,
                }[self.kind]


def _field_interference(rng, d2, params, gain_dist, mode):
    """Summed interference of one field at the victim; mode 'ball' draws
    per-link blockage inside the ball, 'nlos' forces blocked links."""
    n = d2.shape[0]
    if n == 0:
        return 0.0
    if mode == "ball":
        los = (d2 <= params.D ** 2) & (rng.random(n) < params.p_L)
    else:
        los = np.zeros(n, dtype=bool)
    gain = gain_dist.sample(rng, n)
    shape = np.where(los, float(params.N_L), float(params.N_N))
    fading = rng.standard_gamma(shape) / shape
    return float(np.sum(gain * fading * _amplitude(d2, los, params)))


def _laplace_trial(cfg: InterfererConfig, window_radius: float,
                   rng: np.random.Generator) -> float:
    p = cfg.params
    lam = cfg.base_density()
    gains = (receiver_gain_distribution(p) if cfg.gains == "rx"
             else eavesdropper_gain_distribution(p))
    R = window_radius

    if cfg.kind == "nlos_disk":
        pts = sample_ppp(lam, R, rng)
        return _field_interference(rng, np.sum(pts ** 2, axis=1), p, gains, "nlos")

    if cfg.kind == "nlos_annulus":
        pts = _sample_annulus(lam, p.D, R, rng)
        return _field_interference(rng, np.sum(pts ** 2, axis=1), p, gains, "nlos")

    if cfg.kind == "ball_disk":
        pts = sample_ppp(lam, R, rng)
        return _field_interference(rng, np.sum(pts ** 2, axis=1), p, gains, "ball")

    if cfg.kind == "pair_hole":
        ang = 2.0 * math.pi * rng.random(2)
        x0 = cfg.r_e * np.array([math.cos(ang[0]), math.sin(ang[0])])
        y0 = x0 + p.r0 * np.array([math.cos(ang[1]), math.sin(ang[1])])
        pts = sample_ppp(lam, R, rng)
        keep = np.sum((pts - y0) ** 2, axis=1) > p.D ** 2
        return _field_interference(rng, np.sum(pts[keep] ** 2, axis=1), p, gains, "ball")

    if cfg.kind == "scj_homogeneous":
        pts = sample_ppp(lam, R, rng)
        others = sample_ppp(p.lambda_R, R + 2.0 * p.D, rng)
        receivers = np.vstack([np.zeros((1, 2)), others])
        idx, dist = nearest_receiver_bulk(pts, receivers, cell=p.D)
        d2 = np.sum(pts ** 2, axis=1)
        n = pts.shape[0]
        fresh = (d2 <= p.D ** 2) & (rng.random(n) < p.p_L)
        # a jammer whose nearest receiver is the victim transmits only when
        # that link is blocked, so its blockage state is not a fresh draw
        los = np.where(idx == 0, False, fresh)
        gain = gains.sample(rng, n)
        shape = np.where(los, float(p.N_L), float(p.N_N))
        fading = rng.standard_gamma(shape) / shape
        return float(np.sum(gain * fading * _amplitude(d2, los, p)))

    if cfg.kind == "residual_all_holes":
        ang = 2.0 * math.pi * rng.random(2)
        x0 = cfg.r_e * np.array([math.cos(ang[0]), math.sin(ang[0])])
        y0 = x0 + p.r0 * np.array([math.cos(ang[1]), math.sin(ang[1])])
        others = sample_ppp(p.lambda_R, R + 2.0 * p.D, rng)
        receivers = np.vstack([y0[None, :], others])
        pts = sample_ppp(lam, R, rng)
        if pts.shape[0]:
            _, dist = nearest_receiver_bulk(pts, receivers, cell=p.D)
            pts = pts[dist > p.D]
        return _field_interference(rng, np.sum(pts ** 2, axis=1), p, gains, "ball")

    raise AssertionError(cfg.kind)


def _laplace_chunk(args):
    cfg, window_radius, seed, lo, hi, s = args
    acc = np.zeros(s.shape)
    acc2 = np.zeros(s.shape)
    for t in range(lo, hi):
        I = _laplace_trial(cfg, window_radius, _trial_rng(seed, t))
        v = np.exp(-s * I)
        acc += v
        acc2 += v * v
    return acc, acc2


def empirical_laplace(config: InterfererConfig, s, trials: int = 100_000,
                      seed: int = 42, window_radius: float = 500.0,
                      threads: int | None = None) -> LaplaceEstimate:
    """Sample mean of exp(-s I) over realizations of one interferer
    process; the brute-force oracle for every transform expression.
    Accepts a scalar or vector of transform arguments (one set of
    realizations serves all of them)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("transform arguments must be >= 0")
    threads = resolve_threads(threads)
    jobs = [(config, window_radius, seed, lo, hi, s_arr)
            for lo, hi in _chunk_bounds(trials)]
    results = _map_chunks(_laplace_chunk, jobs, threads)
    total = np.sum([r[0] for r in results], axis=0)
    total2 = np.sum([r[1] for r in results], axis=0)
    mean = total / trials
    var = np.maximum(total2 / trials - mean ** 2, 0.0)
    se = np.sqrt(var / trials)
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return LaplaceEstimate(mean=float(mean[0]), se=float(se[0]), trials=trials)
    return LaplaceEstimate(mean=mean, se=se, trials=trials)
