"""Physical-layer model shared by the closed-form and Monte Carlo engines.

Antenna model: sectored flat-top pattern (main lobe of width ``theta`` and
gain ``G``, back lobe gain ``g`` elsewhere).  Blockage model: LoS ball of
radius ``D`` -- a link of length ``r <= D`` is line-of-sight with
probability ``p_L`` and never beyond.  Small-scale fading: Nakagami-m,
i.e. the channel power gain of a LoS (NLoS) link is Gamma(N_L, N_L)
(Gamma(N_N, N_N)) with unit mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    """Raised when a system parameter violates a model constraint."""


class LinkState(enum.Enum):
    LOS = "L"
    NLOS = "N"


@dataclass(frozen=True)
class SystemParams:
    """All scalar inputs of the network model; the single source of truth
    for both engines.

    Densities are in nodes/m^2, distances in m, powers in W, beam widths
    in rad, antenna gains linear, rates in bps/Hz.
    """

    # node densities (receivers track transmitters one-to-one)
    lambda_T: float = 7e-5
    lambda_P: float = 1e-3
    lambda_E: float = 1e-4
    # jamming parameters: in-ball activation probability (sight-based
    # scheme) and unconditional activation fraction (partial jamming)
    rho: float = 0.5
    varrho: float = 0.1
    # geometry
    r0: float = 100.0
    D: float = 200.0
    # blockage and propagation
    p_L: float = 0.2
    alpha_L: float = 2.0
    alpha_N: float = 4.0
    N_L: int = 3
    N_N: int = 2
    # radio
    P: float = 1.0
    sigma2: float = 10.0 ** (-11.4)  # -174 dBm/Hz over 1 GHz
    theta_T: float = math.pi / 6
    theta_R: float = math.pi / 6
    theta_E: float = math.pi / 6
    G_T: float = 10.0
    g_T: float = 0.1
    G_R: float = 10.0
    g_R: float = 0.1
    G_E: float = 10.0
    g_E: float = 0.1
    # wiretap code rates
    R_t: float = 8.0
    R_e: float = 4.0
    # hole-approximation blend factor for the residual jammer process
    beta: float = 0.8

    def __post_init__(self):
        def bad(msg):
            raise ParameterError(msg)

        for name in ("lambda_T", "lambda_P", "lambda_E"):
            if getattr(self, name) < 0:
                bad(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("rho", "varrho", "p_L", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                bad(f"{name} must be in [0, 1], got {v}")
        if not 0.0 < self.r0 <= self.D:
            bad(f"require 0 < r0 <= D (pair links are in-ball LoS), got r0={self.r0}, D={self.D}")
        for big, small in (("G_T", "g_T"), ("G_R", "g_R"), ("G_E", "g_E")):
            if not getattr(self, big) > getattr(self, small) > 0:
                bad(f"require {big} > {small} > 0")
        for name in ("theta_T", "theta_R", "theta_E"):
            v = getattr(self, name)
            if not 0.0 < v <= TWO_PI:
                bad(f"{name} must be in (0, 2*pi], got {v}")
        if not self.R_t > self.R_e >= 0.0:
            bad(f"require R_t > R_e >= 0, got R_t={self.R_t}, R_e={self.R_e}")
        for name in ("N_L", "N_N"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                bad(f"{name} must be a positive integer, got {v}")
        if self.P <= 0 or self.sigma2 <= 0:
            bad("P and sigma2 must be positive")
        if self.alpha_L <= 0:
            bad("alpha_L must be positive")
        if self.alpha_N <= 2.0:
            bad("alpha_N must exceed 2 for the interference field to be finite")

    # --- derived quantities -------------------------------------------------

    @property
    def lambda_R(self) -> float:
        """Receiver density (one receiver per transmitter)."""
        return self.lambda_T

    @property
    def p_N(self) -> float:
        return 1.0 - self.p_L

    @property
    def lambda_J(self) -> float:
        """Density of the homogeneous active-jammer component (in-ball
        activation thinned by NLoS probability and the activation factor)."""
        return self.rho * self.p_N * self.lambda_P

    @property
    def lambda_J_bar(self) -> float:
        """Baseline density of the residual jammer process (active only
        outside the union of receiver LoS balls)."""
        return (1.0 - self.rho * self.p_N) * self.lambda_P

    @property
    def noise_ratio(self) -> float:
        """sigma^2 / P; the only way noise and transmit power enter."""
        return self.sigma2 / self.P

    def replace(self, **kw) -> "SystemParams":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return SystemParams(**vals)


@dataclass(frozen=True)
class GainDistribution:
    """Discrete distribution of the effective antenna gain of a random
    link (transmitting node to receiving node with independent uniform
    boresights)."""

    entries: tuple  # ((gain, prob), ...) exactly four entries

    def __post_init__(self):
        if len(self.entries) != 4:
            raise ParameterError("effective-gain distribution has exactly 4 entries")
        probs = [p for _, p in self.entries]
        if any(p < 0 for p in probs):
            raise ParameterError("gain probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ParameterError(f"gain probabilities must sum to 1, got {sum(probs)}")
        if any(g <= 0 for g, _ in self.entries):
            raise ParameterError("gains must be positive")

    @property
    def gains(self) -> np.ndarray:
        return np.array([g for g, _ in self.entries])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    @property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw effective gains; accepts pre-drawn uniforms via sample_from."""
        return self.sample_from(rng.random(size))

    def sample_from(self, u) -> np.ndarray:
        idx = np.searchsorted(self.cdf, u, side="right")
        return self.gains[np.minimum(idx, 3)]

    def mean(self) -> float:
        return float(np.dot(self.gains, self.probs))


def _sectored_gain_distribution(theta_a, G_a, g_a, theta_b, G_b, g_b) -> GainDistribution:
    qa = theta_a / TWO_PI
    qb = theta_b / TWO_PI
    return GainDistribution(entries=(
        (G_a * G_b, qa * qb),
        (G_a * g_b, qa * (1.0 - qb)),
        (g_a * G_b, (1.0 - qa) * qb),
        (g_a * g_b, (1.0 - qa) * (1.0 - qb)),
    ))


def receiver_gain_distribution(params: SystemParams) -> GainDistribution:
    """Effective gain between a transmitting node (transmitter or jammer)
    and a legitimate receiver, for independently oriented beams."""
    return _sectored_gain_distribution(params.theta_T, params.G_T, params.g_T,
                                       params.theta_R, params.G_R, params.g_R)


def eavesdropper_gain_distribution(params: SystemParams) -> GainDistribution:
    """Effective gain between a transmitting node and an eavesdropper."""
    return _sectored_gain_distribution(params.theta_T, params.G_T, params.g_T,
                                       params.theta_E, params.G_E, params.g_E)


def sample_link_state(r: float, p_L: float, D: float, rng: np.random.Generator) -> LinkState:
    """Blockage draw for a single link of length ``r``."""
    if r < 0:
        raise ParameterError(f"link length must be >= 0, got {r}")
    if r > D:
        return LinkState.NLOS
    return LinkState.LOS if rng.random() < p_L else LinkState.NLOS


def sample_los_mask(r: np.ndarray, p_L: float, D: float, u: np.ndarray) -> np.ndarray:
    """Vectorized blockage: LoS iff within the ball and the uniform draw
    falls below p_L.  ``u`` carries the pre-drawn uniforms so callers can
    reuse draws across coupled runs."""
    return (r <= D) & (u < p_L)


def nakagami_shape(state: LinkState, params: SystemParams) -> int:
    return params.N_L if state is LinkState.LOS else params.N_N


def sample_fading(state: LinkState, params: SystemParams, rng: np.random.Generator, size=None):
    """Channel power gain draw(s): Gamma(N_b, N_b), unit mean."""
    n = nakagami_shape(state, params)
    return rng.standard_gamma(n, size=size) / n


def sample_fading_mixed(los_mask: np.ndarray, params: SystemParams, rng: np.random.Generator) -> np.ndarray:
    """Per-link fading draws with the shape chosen by each link's state."""
    shape = np.where(los_mask, float(params.N_L), float(params.N_N))
    return rng.standard_gamma(shape) / shape


def sinr_threshold_connection(params: SystemParams) -> float:
    """SINR a receiver needs to decode the full-rate codeword."""
    return 2.0 ** params.R_t - 1.0


def sinr_threshold_secrecy(params: SystemParams) -> float:
    """SINR above which an eavesdropper extracts the confidential message."""
    return 2.0 ** params.R_e - 1.0
