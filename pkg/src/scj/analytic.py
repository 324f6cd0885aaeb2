"""Closed-form engine: interference Laplace transforms, connection and
secrecy probabilities, and the area metrics built from them.

Every expression here is an exact transform or a controlled approximation
of the interference seen by a victim (legitimate receiver or
eavesdropper) from three interferer populations: concurrent transmitters,
the homogeneous active-jammer component, and the residual jammer process
that lives outside the union of receiver LoS balls (a Poisson hole
process).  All integrals are evaluated by Gauss-Legendre rules; improper
upper limits are handled by the substitution r = c/t on t in (0, 1],
never by hard truncation.  Hot paths evaluate on cached tensor grids so
that density sweeps (rho, lambda_P, lambda_E, beta) cost almost nothing
after the first call at a given geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_genlaguerre

from .core import (
    GainDistribution,
    LinkState,
    SystemParams,
    eavesdropper_gain_distribution,
    receiver_gain_distribution,
    sinr_threshold_connection,
    sinr_threshold_secrecy,
)

__all__ = [
    "QuadratureConfig", "QuadratureError", "LaplaceValue", "DEFAULT_QUADRATURE",
    "F", "tau_factor", "mu_threshold",
    "lt_jam_rx_simplified", "lt_php_rx_simplified", "lt_ppp_eve", "lt_tx_rx",
    "T1", "T2", "pair_distance_pdf", "lt_php_eve_simplified",
    "connection_prob_simplified", "secrecy_prob_simplified",
    "hole_area", "partial_fraction", "Q1", "Q2", "nn2_pdf",
    "lt_jam_rx_general", "connection_prob_general", "connection_prob_pj",
    "connection_prob_scjq", "blended_php_density", "lt_php_eve_general",
    "secrecy_prob_general", "secrecy_prob_pj", "secrecy_prob_scjq",
    "connection_probability", "secrecy_probability", "stc", "nsee",
]

_TINY = np.finfo(float).tiny


class QuadratureError(ArithmeticError):
    """Quadrature failed to certify the requested tolerance.

    Carries the best available estimate in ``partial``.
    """

    def __init__(self, message, partial=None, est_error=None):
        super().__init__(message)
        self.partial = partial
        self.est_error = est_error


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and rule orders for the numerical integration layer."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-6
    max_depth: int = 60
    tail_cutoff_radius: float = 2000.0  # pivot of the r = c/t tail substitution
    gauss_order: int = 64        # 1-D radial rules
    expectation_order: int = 64  # hole-distance expectations (angle x neighbor)
    radial_order: int = 32       # eavesdropper-distance grid of the secrecy outer integral

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def validate_for(self, params: SystemParams):
        if self.tail_cutoff_radius <= params.D:
            raise ValueError("tail_cutoff_radius must exceed the LoS ball radius")

    def reduced(self) -> "QuadratureConfig":
        """Coarser companion rule used for embedded error estimates."""
        return QuadratureConfig(
            abs_tol=self.abs_tol, rel_tol=self.rel_tol, max_depth=self.max_depth,
            tail_cutoff_radius=self.tail_cutoff_radius,
            gauss_order=max(16, (3 * self.gauss_order) // 4),
            expectation_order=max(16, (3 * self.expectation_order) // 4),
            radial_order=max(12, (3 * self.radial_order) // 4),
        )


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class LaplaceValue:
    """A transform evaluation with an embedded-rule error estimate."""

    value: float
    est_error: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise ValueError(f"Laplace transform value must lie in (0, 1], got {self.value}")

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def tau_factor(N: int) -> float:
    """Shape-dependent constant N * (N!)^(-1/N) of the gamma CDF bound."""
    return N * math.factorial(N) ** (-1.0 / N)


def mu_threshold(params: SystemParams) -> float:
    """Scaled decoding threshold of the intended link; the argument fed to
    the receiver-side transforms."""
    return (tau_factor(params.N_L) * params.r0 ** params.alpha_L
            * sinr_threshold_connection(params) / (params.G_T * params.G_R))


def _rpow(r, alpha):
    if alpha == 2.0:
        return r * r
    if alpha == 4.0:
        r2 = r * r
        return r2 * r2
    return np.power(r, alpha)


def _F_kernel(x, r, N, alpha):
    """1 - (1 + x / (N r^alpha))^(-N), vectorized; F(x, 0) -> 1 by limit."""
    with np.errstate(divide="ignore", invalid="ignore"):
        z = x / (N * _rpow(r, alpha))
    z = np.where(np.isnan(z), np.inf, z)
    base = 1.0 / (1.0 + z)
    n = int(N)
    if n == 1:
        p = base
    elif n == 2:
        p = base * base
    elif n == 3:
        p = base * base * base
    elif n == 4:
        b2 = base * base
        p = b2 * b2
    else:
        p = base ** n
    return 1.0 - p


def F(b, x: float, r: float, params: SystemParams) -> float:
    """Fading-MGF kernel of a link with blockage state ``b``.

    Increasing in x, decreasing in r; 0 at x = 0, tends to 1 as r -> 0.
    """
    if isinstance(b, LinkState):
        b = b.value
    if b == "L":
        N, alpha = params.N_L, params.alpha_L
    elif b == "N":
        N, alpha = params.N_N, params.alpha_N
    else:
        raise ValueError(f"link state must be 'L' or 'N', got {b!r}")
    if r < 0 or x < 0:
        raise ValueError("require x >= 0 and r >= 0")
    return float(_F_kernel(np.float64(x), np.float64(r), N, alpha))


@lru_cache(maxsize=None)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _laguerre1(n: int):
    """Nodes/weights for int_0^inf w e^{-w} f(w) dw, weights summing to 1."""
    x, w = roots_genlaguerre(n, 1)
    return x, w


def _shoulder(x, N, alpha):
    """Radius where the fading kernel transitions (its argument hits 1);
    panel boundaries placed here keep Gauss rules spectrally accurate."""
    with np.errstate(divide="ignore"):
        return np.power(x / N, 1.0 / alpha)


def _int_F_r(x, a, b, N, alpha, n):
    """int_a^b F(x, r) r dr on mutually broadcastable arrays.

    Two Gauss panels split at the kernel shoulder (clipped into [a, b]).
    """
    x, a, b = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float),
                                  np.asarray(b, float))
    m = np.clip(_shoulder(x, N, alpha), a, b)
    g, w = _gl(n)
    total = np.zeros(x.shape)
    for lo, hi in ((a, m), (m, b)):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        r = mid[..., None] + half[..., None] * g
        vals = _F_kernel(x[..., None], r, N, alpha) * r
        total += np.where(half > 0.0, (vals @ w) * half, 0.0)
    return total


def _int_F_r_tail(x, a, N, alpha, n, cut):
    """int_a^inf F(x, r) r dr: finite piece up to the cutoff pivot, then
    r = c/t maps the remainder onto t in (0, 1], split at the shoulder."""
    x, a = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float))
    c = np.maximum(a, cut)
    head = _int_F_r(x, a, c, N, alpha, n)
    g, w = _gl(n)
    tstar = np.clip(c / np.maximum(_shoulder(x, N, alpha), c), 0.0, 1.0)
    tail = np.zeros(x.shape)
    for lo, hi in ((np.zeros_like(tstar), tstar), (tstar, np.ones_like(tstar))):
        half = 0.5 * (hi - lo)
        t = 0.5 * (hi + lo)[..., None] + half[..., None] * g
        with np.errstate(divide="ignore"):
            r = c[..., None] / t
        vals = _F_kernel(x[..., None], r, N, alpha) / (t * t * t)
        tail += np.where(half > 0.0, (vals @ w) * half, 0.0)
    return head + (c * c) * tail


def _arccos_clipped(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = num / den
    arg = np.where(np.isnan(arg), 1.0, arg)
    return np.arccos(np.clip(arg, -1.0, 1.0))


def _int_arc_deficit(x, w, a, b, N, alpha, D, n):
    """int_a^b F(x, r) arccos((w^2 + r^2 - D^2) / (2 w r)) r dr.

    The arccos factor vanishes like a square root where its argument hits
    +-1 (always at a panel end), so each panel is cosine-mapped to
    cluster nodes at both ends; panels split at the kernel shoulder.
    """
    m = np.clip(_shoulder(x, N, alpha), a, b)
    g, gw = _gl(n)
    tau = 0.5 * (g + 1.0)
    base = 0.5 * (1.0 - np.cos(math.pi * tau))
    dbase = 0.25 * math.pi * np.sin(math.pi * tau)
    total = np.zeros(x.shape)
    for lo, hi in ((a, m), (m, b)):
        width = hi - lo
        r = lo[..., None] + width[..., None] * base
        ang = _arccos_clipped(w[..., None] ** 2 + r * r - D * D, 2.0 * w[..., None] * r)
        vals = _F_kernel(x[..., None], r, N, alpha) * ang * r * dbase
        total += np.where(width[..., None] > 0.0, vals, 0.0) @ gw * width
    return total


def _T1_raw(x, w, N, alpha, D, n):
    """Hole-corrected in-ball exponent integral for one (state, gain)."""
    x, w = np.broadcast_arrays(np.asarray(x, float), np.asarray(w, float))
    c1 = np.minimum(D, np.maximum(0.0, D - w))
    term1 = 2.0 * math.pi * _int_F_r(x, c1, D, N, alpha, n)
    c2 = np.minimum(D, np.maximum(w - D, D - w))
    term2 = 2.0 * _int_arc_deficit(x, w, c2, np.full(x.shape, float(D)), N, alpha, D, n)
    return term1 - term2


def _T2_deficit(x, w, N, alpha, D, n):
    """Arc carved out of the out-of-ball annulus by the hole: the part of
    the full NLoS tail that the hole removes."""
    x, w = np.broadcast_arrays(np.asarray(x, float), np.asarray(w, float))
    c3 = np.maximum(D, w - D)
    return 2.0 * _int_arc_deficit(x, w, c3, w + D, N, alpha, D, n)


def _chunked_rows(fn, *arrs, chunk=128):
    """Apply fn over row blocks of equally-long leading axes."""
    n = arrs[0].shape[0]
    if n <= chunk:
        return fn(*arrs)
    parts = [fn(*(a[i:i + chunk] for a in arrs)) for i in range(0, n, chunk)]
    return tuple(np.concatenate(p, axis=0) for p in zip(*parts))


def _T_mix(s, w, params: SystemParams, gains: GainDistribution, n, cut):
    """Gain- and blockage-mixed hole exponents.

    s: (S,) transform arguments; w: (S, W) hole-center distances paired
    per row.  Returns (Tmix1, Tmix2) of shape (S, W): the in-ball mixture
    sum_b sum_g p_b q_g T1 and the out-ball sum_g q_g T2.
    """
    D = params.D
    s = np.asarray(s, float)
    w = np.asarray(w, float)

    def block(sb, wb):
        t1 = np.zeros((sb.shape[0], wb.shape[1]))
        t2 = np.zeros_like(t1)
        for gain, q in gains.entries:
            if q == 0.0:
                continue
            x = sb * gain
            xb = x[:, None]
            t1 += q * (params.p_L * _T1_raw(xb, wb, params.N_L, params.alpha_L, D, n)
                       + params.p_N * _T1_raw(xb, wb, params.N_N, params.alpha_N, D, n))
            full = 2.0 * math.pi * _int_F_r_tail(x, D, params.N_N, params.alpha_N, n, cut)
            t2 += q * (full[:, None] - _T2_deficit(xb, wb, params.N_N, params.alpha_N, D, n))
        return t1, t2

    return _chunked_rows(block, s, w)


def _ppp_exponent(s, params: SystemParams, gains: GainDistribution, n, cut):
    """Per-unit-density exponent of a homogeneous interferer field with
    ball blockage at the victim: 2*pi*(in-ball LoS/NLoS mixture + NLoS
    tail).  Vectorized over s."""
    s = np.asarray(s, float)
    acc = np.zeros(s.shape)
    for gain, q in gains.entries:
        if q == 0.0:
            continue
        x = s * gain
        inball = (params.p_L * _int_F_r(x, 0.0, params.D, params.N_L, params.alpha_L, n)
                  + params.p_N * _int_F_r(x, 0.0, params.D, params.N_N, params.alpha_N, n))
        tail = _int_F_r_tail(x, params.D, params.N_N, params.alpha_N, n, cut)
        acc += q * (inball + tail)
    return 2.0 * math.pi * acc


def _nlos_exponent(s, params: SystemParams, gains: GainDistribution, n, cut, lower=0.0):
    """Per-unit-density exponent of an all-NLoS interferer field from
    radius ``lower`` outward.  Split at the ball radius so the sharp
    near-origin variation of the kernel gets its own panel."""
    s = np.asarray(s, float)
    acc = np.zeros(s.shape)
    for gain, q in gains.entries:
        if q == 0.0:
            continue
        x = s * gain
        head = 0.0
        if lower < params.D:
            head = _int_F_r(x, float(lower), params.D, params.N_N, params.alpha_N, n)
        acc += q * (head + _int_F_r_tail(x, max(float(lower), params.D),
                                         params.N_N, params.alpha_N, n, cut))
    return 2.0 * math.pi * acc


# ---------------------------------------------------------------------------
# geometry of the non-associated region
# ---------------------------------------------------------------------------

def hole_area(r: float, D: float) -> float:
    """Area of the circular segment of a radius-D ball cut off by the
    perpendicular bisector to a point at distance r (0 beyond 2D)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r >= 2.0 * D:
        return 0.0
    half = 0.5 * r
    return D * D * math.acos(min(1.0, half / D)) - half * math.sqrt(max(0.0, D * D - half * half))


def partial_fraction(v2: float, params: SystemParams) -> float:
    """Probability that a jammer in the partially associated ring falls in
    some other receiver's territory, clamped to 1."""
    D = params.D
    if v2 <= 0.0:
        raise ValueError("v2 must be positive")
    if v2 >= 2.0 * D:
        return 0.0
    area, _ = integrate.quad(lambda r: hole_area(r, D) * r, v2, 2.0 * D,
                             epsabs=DEFAULT_QUADRATURE.abs_tol,
                             epsrel=DEFAULT_QUADRATURE.rel_tol,
                             limit=DEFAULT_QUADRATURE.max_depth)
    denom = D * D - (0.5 * v2) ** 2
    if denom <= 0.0:
        return 0.0
    return min(2.0 * params.lambda_R * area / denom, 1.0)


def pair_distance_pdf(u: float, r_e: float, r0: float) -> float:
    """Density of the distance between an eavesdropper r_e from the
    transmitter and the tagged receiver (uniform pair bearing).
    Supported on (|r_e - r0|, r_e + r0)."""
    lo, hi = abs(r_e - r0), r_e + r0
    if not lo < u < hi:
        return 0.0
    disc = 4.0 * r0 * r0 * r_e * r_e - (r0 * r0 + r_e * r_e - u * u) ** 2
    if disc <= 0.0:
        return 0.0
    return 2.0 * u / (math.pi * math.sqrt(disc))


def nn2_pdf(v1: float, v2: float, lambda_R: float) -> float:
    """Joint density of the distances to the nearest and second-nearest
    points of a homogeneous field of receivers."""
    if not 0.0 < v1 < v2:
        return 0.0
    return (2.0 * math.pi * lambda_R) ** 2 * v1 * v2 * math.exp(-lambda_R * math.pi * v2 * v2)


def _Q_raw(x, v1, lo, params: SystemParams, n, use_pi_minus):
    """Shared kernel of the LoS-minus-NLoS correction integrals.

    Cosine-mapped panels: the arccos weight vanishes like a square root
    at r = v1/2 when that is the lower limit.
    """
    x, v1, lo = np.broadcast_arrays(np.asarray(x, float), np.asarray(v1, float),
                                    np.asarray(lo, float))
    D = params.D
    g, gw = _gl(n)
    tau = 0.5 * (g + 1.0)
    base = 0.5 * (1.0 - np.cos(math.pi * tau))
    dbase = 0.25 * math.pi * np.sin(math.pi * tau)
    width = D - lo
    r = lo[..., None] + width[..., None] * base
    ang = _arccos_clipped(np.broadcast_to(v1[..., None], r.shape), 2.0 * r)
    if use_pi_minus:
        ang = math.pi - ang
    diff = (_F_kernel(x[..., None], r, params.N_L, params.alpha_L)
            - _F_kernel(x[..., None], r, params.N_N, params.alpha_N))
    out = (diff * ang * r * dbase) @ gw * width
    return np.where(width > 0.0, out, 0.0)


def Q1(s: float, v1: float, gain: float, params: SystemParams,
       qc: QuadratureConfig | None = None) -> float:
    """Correction integral over the region owned by the nearest other
    receiver; zero once v1 >= 2D."""
    qc = qc or DEFAULT_QUADRATURE
    lo = min(0.5 * v1, params.D)
    return float(_Q_raw(s * gain, v1, lo, params, qc.gauss_order, use_pi_minus=False))


def Q2(s: float, v1: float, v2: float, gain: float, params: SystemParams,
       qc: QuadratureConfig | None = None) -> float:
    """Correction integral over the partially associated ring between the
    nearest and second-nearest receiver distances."""
    if v2 < v1:
        raise ValueError("require v1 <= v2")
    qc = qc or DEFAULT_QUADRATURE
    lo = min(0.5 * v2, params.D)
    return float(_Q_raw(s * gain, v1, lo, params, qc.gauss_order, use_pi_minus=True))


def blended_php_density(params: SystemParams) -> float:
    """Effective density of the residual jammer field: blend between
    keeping every baseline point and keeping only the fraction that
    escapes all receiver balls."""
    keep = math.exp(-params.lambda_R * math.pi * params.D ** 2)
    return (params.beta * keep + (1.0 - params.beta)) * params.lambda_J_bar


# ---------------------------------------------------------------------------
# hole-distance expectation grids
# ---------------------------------------------------------------------------

def _phi_nodes(r_e, r0, n, split_at=()):
    """Tagged-receiver distance nodes u(phi) = sqrt(r0^2 + r_e^2 -
    2 r0 r_e cos phi) for phi ~ U[0, pi]; the angular substitution removes
    the inverse-sqrt endpoint singularities of the raw distance density.

    ``split_at`` lists distances (typically D and 2D, where the hole
    geometry switches branch) at which to break the angular panel.
    """
    g, w = _gl(n)
    cuts = [0.0]
    for ucut in sorted(split_at):
        c = (r0 * r0 + r_e * r_e - ucut * ucut) / (2.0 * r0 * r_e)
        if -1.0 < c < 1.0:
            cuts.append(math.acos(c))
    cuts.append(math.pi)
    us, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        phi = 0.5 * (b + a) + 0.5 * (b - a) * g
        us.append(np.sqrt(np.maximum(
            r0 * r0 + r_e * r_e - 2.0 * r0 * r_e * np.cos(phi), 0.0)))
        ws.append(w * (0.5 * (b - a) / math.pi))
    return np.concatenate(us), np.concatenate(ws)  # weights sum to 1


def _v_nodes(lambda_R, n):
    """Nearest-other-receiver distance nodes via the exact CDF inverse
    v(t) = sqrt(-ln t / (lambda_R pi)), t ~ U(0, 1); cosine-mapped so the
    square-root behavior of v near t = 1 is clustered."""
    g, w = _gl(n)
    tau = 0.5 * (g + 1.0)
    t = 0.5 * (1.0 - np.cos(math.pi * tau))
    wt = 0.25 * math.pi * np.sin(math.pi * tau) * w
    v = np.sqrt(-np.log(t) / (lambda_R * math.pi))
    return v, wt  # weights sum to 1


# ---------------------------------------------------------------------------
# scalar transform operations
# ---------------------------------------------------------------------------

def _scaled_orders(qc: QuadratureConfig, factor: float) -> QuadratureConfig:
    return QuadratureConfig(
        abs_tol=qc.abs_tol, rel_tol=qc.rel_tol, max_depth=qc.max_depth,
        tail_cutoff_radius=qc.tail_cutoff_radius,
        gauss_order=int(qc.gauss_order * factor),
        expectation_order=int(qc.expectation_order * factor),
        radial_order=int(qc.radial_order * factor))


def _converged_laplace(val_fn, qc, what) -> LaplaceValue:
    """Evaluate with an embedded coarse/fine pair; escalate the rule
    orders until the error estimate meets the configured tolerance."""
    prev = val_fn(qc.reduced())
    cur = val_fn(qc)
    err = abs(cur - prev)
    factor, rounds = 1.0, 0
    while err > max(qc.abs_tol, qc.rel_tol * abs(cur)) and rounds < 4:
        factor *= 1.6
        prev, cur = cur, val_fn(_scaled_orders(qc, factor))
        err = abs(cur - prev)
        rounds += 1
    if err > max(qc.abs_tol, qc.rel_tol * abs(cur)):
        raise QuadratureError(f"{what} did not converge (est. error {err:.3e})",
                              partial=cur, est_error=err)
    return LaplaceValue(value=min(max(cur, _TINY), 1.0), est_error=err)


def T1(s: float, u: float, gain: float, b, params: SystemParams,
       qc: QuadratureConfig | None = None) -> float:
    """In-ball hole exponent integral for one interferer class."""
    qc = qc or DEFAULT_QUADRATURE
    if isinstance(b, LinkState):
        b = b.value
    N, alpha = (params.N_L, params.alpha_L) if b == "L" else (params.N_N, params.alpha_N)
    return float(_T1_raw(s * gain, u, N, alpha, params.D, qc.gauss_order))


def T2(s: float, u: float, gain: float, params: SystemParams,
       qc: QuadratureConfig | None = None) -> float:
    """Out-of-ball hole exponent integral for one effective gain."""
    qc = qc or DEFAULT_QUADRATURE
    x = s * gain
    full = 2.0 * math.pi * float(_int_F_r_tail(x, params.D, params.N_N, params.alpha_N,
                                               qc.gauss_order, qc.tail_cutoff_radius))
    return full - float(_T2_deficit(x, u, params.N_N, params.alpha_N, params.D, qc.gauss_order))


def lt_jam_rx_simplified(s: float, params: SystemParams,
                         qc: QuadratureConfig | None = None) -> LaplaceValue:
    """Transform of the homogeneous jammer interference at the tagged
    receiver when every jammer link to it is NLoS."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0:
        raise ValueError("s must be >= 0")
    gains = receiver_gain_distribution(params)

    def val(q):
        e = _nlos_exponent(np.array([s]), params, gains, q.gauss_order,
                           q.tail_cutoff_radius, lower=0.0)
        return float(np.exp(-params.lambda_J * e[0]))

    return _converged_laplace(val, qc, "jammer transform at receiver")


def lt_php_rx_simplified(s: float, params: SystemParams,
                         qc: QuadratureConfig | None = None) -> LaplaceValue:
    """Transform of the residual-jammer interference at the tagged
    receiver (all of it beyond the receiver's own LoS ball)."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0:
        raise ValueError("s must be >= 0")
    gains = receiver_gain_distribution(params)

    def val(q):
        e = _nlos_exponent(np.array([s]), params, gains, q.gauss_order,
                           q.tail_cutoff_radius, lower=params.D)
        return float(np.exp(-params.lambda_J_bar * e[0]))

    return _converged_laplace(val, qc, "residual-jammer transform at receiver")


def lt_ppp_eve(lam: float, s: float, params: SystemParams,
               qc: QuadratureConfig | None = None, gains: str = "eve") -> LaplaceValue:
    """Transform of a homogeneous interferer field with ball blockage at
    the victim; gain set selectable ('eve' at an eavesdropper, 'rx' at a
    receiver)."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0 or lam < 0:
        raise ValueError("require s >= 0 and lam >= 0")
    dist = eavesdropper_gain_distribution(params) if gains == "eve" else receiver_gain_distribution(params)

    def val(q):
        e = _ppp_exponent(np.array([s]), params, dist, q.gauss_order, q.tail_cutoff_radius)
        return float(np.exp(-lam * e[0]))

    return _converged_laplace(val, qc, "homogeneous-field transform")


def lt_tx_rx(lambda_T: float, s: float, params: SystemParams,
             qc: QuadratureConfig | None = None) -> LaplaceValue:
    """Transform of concurrent-transmitter interference at the tagged
    receiver (same kernel as at an eavesdropper, receiver gain set)."""
    return lt_ppp_eve(lambda_T, s, params, qc, gains="rx")


def lt_php_eve_simplified(s: float, r_e: float, params: SystemParams,
                          qc: QuadratureConfig | None = None) -> LaplaceValue:
    """Transform of the residual-jammer interference at an eavesdropper
    r_e from the transmitter, with the tagged receiver's ball carved out."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0 or r_e <= 0:
        raise ValueError("require s >= 0 and r_e > 0")
    gains = eavesdropper_gain_distribution(params)

    def val(q):
        u, w = _phi_nodes(r_e, params.r0, q.expectation_order,
                          split_at=(params.D, 2.0 * params.D))
        t1, t2 = _T_mix(np.array([s]), u[None, :], params, gains,
                        q.gauss_order, q.tail_cutoff_radius)
        return float(np.exp(-params.lambda_J_bar * (t1[0] + t2[0])) @ w)

    return _converged_laplace(val, qc, "residual-jammer transform at eavesdropper")


def lt_php_eve_general(s: float, r_e: float, params: SystemParams,
                       qc: QuadratureConfig | None = None) -> LaplaceValue:
    """As the simplified version, but on the blended residual field with
    only the closest receiver ball (tagged or nearest other) carved out."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0 or r_e <= 0:
        raise ValueError("require s >= 0 and r_e > 0")
    if params.lambda_R == 0.0:
        # no other receivers: blend collapses and the tagged hole is the only one
        return lt_php_eve_simplified(s, r_e, params, qc)
    lam_tilde = blended_php_density(params)
    gains = eavesdropper_gain_distribution(params)
    a = params.lambda_R * math.pi

    def val(q):
        # split the neighbor expectation exactly at v = u: the far branch
        # (v >= u, hole at the tagged receiver) has closed-form weight;
        # panel breaks at v = D and v = 2D where the hole geometry kinks
        m = q.expectation_order
        u, wu = _phi_nodes(r_e, params.r0, m, split_at=(params.D, 2.0 * params.D))
        t_u = np.exp(-a * u * u)                         # P(nearest other >= u)
        g, gw = _gl(m)
        tau = 0.5 * (g + 1.0)
        base = 0.5 * (1.0 - np.cos(math.pi * tau))
        dbase = 0.25 * math.pi * np.sin(math.pi * tau) * gw
        marks = [math.exp(-a * (2.0 * params.D) ** 2), math.exp(-a * params.D ** 2), 1.0]
        panels = []
        lo = t_u
        for b in marks:
            hi = np.maximum(t_u, np.minimum(b, 1.0))
            panels.append((lo, hi))
            lo = hi
        near = np.zeros(u.shape)
        v_blocks, widths = [], []
        for lo, hi in panels:
            width = hi - lo
            t = lo[:, None] + width[:, None] * base      # (mu, m)
            v = np.sqrt(-np.log(np.maximum(t, 1e-300)) / a)
            v_blocks.append(v)
            widths.append(width)
        vgrid = np.concatenate([vb.reshape(1, -1) for vb in v_blocks], axis=1)
        grid = np.concatenate([u[None, :], vgrid], axis=1)
        t1, t2 = _T_mix(np.array([s]), grid, params, gains,
                        q.gauss_order, q.tail_cutoff_radius)
        tsum = (t1 + t2)[0]
        tu_mix = tsum[:u.size]
        off = u.size
        for vb, width in zip(v_blocks, widths):
            tv_mix = tsum[off:off + vb.size].reshape(vb.shape)
            near += (np.exp(-lam_tilde * tv_mix) @ dbase) * width
            off += vb.size
        far = np.exp(-lam_tilde * tu_mix) * t_u
        return float(wu @ (near + far))

    return _converged_laplace(val, qc, "nearest-hole residual transform")


def lt_jam_rx_general(s: float, params: SystemParams,
                      qc: QuadratureConfig | None = None) -> LaplaceValue:
    """Transform of the homogeneous jammer interference at the tagged
    receiver when jammers associated with other receivers may be LoS."""
    qc = qc or DEFAULT_QUADRATURE
    if s < 0:
        raise ValueError("s must be >= 0")
    gains = receiver_gain_distribution(params)

    def val(q):
        base = float(np.exp(-params.lambda_J * _nlos_exponent(
            np.array([s]), params, gains, q.gauss_order, q.tail_cutoff_radius)[0]))
        if params.lambda_R == 0.0 or params.lambda_J == 0.0:
            return base
        corr = _nonassoc_correction(np.array([s]), params, q)
        return base * float(corr[0](2.0 * params.p_L * params.lambda_J))

    return _converged_laplace(val, qc, "jammer transform with LoS corrections")


def _xi_clamp_point(params: SystemParams) -> float | None:
    """Second-neighbor distance below which the ring-correction fraction
    saturates at 1, or None when it never does."""
    D = params.D

    def zeta(v):
        area, _ = integrate.quad(lambda r: hole_area(r, D) * r, v, 2.0 * D,
                                 epsabs=1e-3, epsrel=1e-10, limit=100)
        return 2.0 * params.lambda_R * area / (D * D - 0.25 * v * v)

    eps = 1e-9 * D
    if zeta(eps) <= 1.0:
        return None
    lo, hi = eps, 2.0 * D - eps
    if zeta(hi) >= 1.0:
        return 2.0 * D
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if zeta(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _nonassoc_correction(s, params: SystemParams, qc: QuadratureConfig):
    """Expected LoS-correction factor of the homogeneous jammer field at
    the tagged receiver, as a list (per s) of callables of the exponent
    scale 2 p_L lambda_J.

    The second-neighbor distance is integrated against its exact density
    (w = lambda_R pi v2^2 is Erlang-2) on panels that break where the
    geometry kinks: the saturation point of the ring fraction and 2D;
    the nearest-neighbor ratio integral breaks where v1 crosses 2D.
    """
    a = params.lambda_R * math.pi
    m = max(16, qc.expectation_order // 2)
    D2 = 2.0 * params.D
    w_cap = 45.0  # Erlang-2 mass beyond this is ~1e-18
    bounds = {0.0, 4.0, w_cap}  # 4.0 anchors a panel on the density peak
    vstar = _xi_clamp_point(params)
    if vstar is not None and vstar < D2:
        bounds.add(a * vstar * vstar)
    bounds.add(a * D2 * D2)
    bounds = sorted(b for b in bounds if b <= w_cap)
    if bounds[-1] < w_cap:
        bounds.append(w_cap)

    g, gw = _gl(m)
    half_t = 0.5 * (g + 1.0)
    w_nodes, w_wgts = [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        w = lo + (hi - lo) * half_t
        w_nodes.append(w)
        w_wgts.append(0.5 * (hi - lo) * gw * w * np.exp(-w))
    w_nodes = np.concatenate(w_nodes)
    w_wgts = np.concatenate(w_wgts)
    v2 = np.sqrt(w_nodes / a)
    xi = np.array([partial_fraction(v, params) if 0.0 < v < D2 else 0.0 for v in v2])

    # inner ratio variable t = (v1/v2)^2 is uniform; break panels at v1 = 2D
    tstar = np.clip((D2 / v2) ** 2, 0.0, 1.0)
    t_nodes = np.concatenate([tstar[:, None] * half_t,
                              tstar[:, None] + (1.0 - tstar)[:, None] * half_t], axis=1)
    t_wgts = np.concatenate([0.5 * tstar[:, None] * gw[None, :],
                             0.5 * (1.0 - tstar)[:, None] * gw[None, :]], axis=1)
    v1 = v2[:, None] * np.sqrt(t_nodes)                       # (W, 2m)

    gains = receiver_gain_distribution(params)
    lo1 = np.minimum(0.5 * v1, params.D)
    lo2 = np.broadcast_to(np.minimum(0.5 * v2, params.D)[:, None], v1.shape)
    q1 = np.zeros((s.size,) + v1.shape)
    q2 = np.zeros_like(q1)
    for gain, qg in gains.entries:
        if qg == 0.0:
            continue
        x = s[:, None, None] * gain
        q1 += qg * _Q_raw(x, v1[None], lo1[None], params, qc.gauss_order,
                          use_pi_minus=False)
        q2 += qg * _Q_raw(x, v1[None], lo2[None], params, qc.gauss_order,
                          use_pi_minus=True)
    mix = q1 + xi[None, :, None] * q2                         # (S, W, 2m)
    weights = w_wgts[:, None] * t_wgts                        # (W, 2m)

    def make(i):
        return lambda scale: float(np.sum(np.exp(-scale * mix[i]) * weights))

    return [make(i) for i in range(s.size)]


# ---------------------------------------------------------------------------
# connection probability
# ---------------------------------------------------------------------------

class _ConnKernel:
    """Connection-side exponents at s_k = k * mu for one geometry.

    Densities multiply the exponents linearly, so one instance serves all
    rho / lambda_P sweeps at fixed geometry, rates, and lambda_T.
    """

    def __init__(self, params: SystemParams, qc: QuadratureConfig):
        qc.validate_for(params)
        self.qc = qc
        self.mu = mu_threshold(params)
        self.s = np.arange(1, params.N_L + 1, dtype=float) * self.mu
        k = np.arange(1, params.N_L + 1)
        self.coef = np.array([math.comb(params.N_L, int(i)) for i in k]) * (-1.0) ** (k + 1)
        gains = receiver_gain_distribution(params)
        n, cut = qc.gauss_order, qc.tail_cutoff_radius
        self.exp_jam = _nlos_exponent(self.s, params, gains, n, cut, lower=0.0)
        self.exp_php = _nlos_exponent(self.s, params, gains, n, cut, lower=params.D)
        self.exp_tx = _ppp_exponent(self.s, params, gains, n, cut)
        if params.lambda_R > 0.0:
            self.corr = _nonassoc_correction(self.s, params, qc)
        else:
            self.corr = None

    def jam_factor(self, p: SystemParams):
        base = np.exp(-p.lambda_J * self.exp_jam)
        if self.corr is None or p.lambda_J == 0.0:
            return base
        scale = 2.0 * p.p_L * p.lambda_J
        return base * np.array([c(scale) for c in self.corr])

    def pc(self, p: SystemParams, variant: str) -> float:
        noise = np.exp(-self.s * p.noise_ratio)
        if variant == "simplified":
            lt = np.exp(-p.lambda_J * self.exp_jam - p.lambda_J_bar * self.exp_php)
        elif variant == "scj":
            lt = (np.exp(-p.lambda_T * self.exp_tx - p.lambda_J_bar * self.exp_php)
                  * self.jam_factor(p))
        elif variant == "scjq":
            lt = np.exp(-p.lambda_T * self.exp_tx) * self.jam_factor(p)
        elif variant == "pj":
            lt = np.exp(-(p.lambda_T + p.varrho * p.lambda_P) * self.exp_tx)
        else:
            raise ValueError(f"unknown connection variant {variant!r}")
        terms = self.coef * noise * lt
        total = math.fsum(sorted(terms.tolist(), key=abs, reverse=True))
        return float(min(max(total, 0.0), 1.0))


@lru_cache(maxsize=64)
def _conn_kernel(key: SystemParams, qc: QuadratureConfig) -> _ConnKernel:
    return _ConnKernel(key, qc)


def _kernel_key(params: SystemParams) -> SystemParams:
    # densities, activation factors, power scale and blend enter linearly
    # at evaluation time; strip them so sweeps share one kernel
    return params.replace(lambda_P=0.0, lambda_E=0.0, rho=0.0, varrho=0.0,
                          P=1.0, sigma2=1.0, beta=0.0)


def connection_prob_simplified(params: SystemParams,
                               qc: QuadratureConfig | None = None) -> float:
    """Upper bound on the tagged pair's connection probability with a
    single transmission pair in the network."""
    qc = qc or DEFAULT_QUADRATURE
    key = _kernel_key(params).replace(lambda_T=0.0)
    return _conn_kernel(key, qc).pc(params, "simplified")


def connection_prob_general(params: SystemParams,
                            qc: QuadratureConfig | None = None) -> float:
    """Connection probability with concurrent transmitters and sight-based
    jammer selection; collapses to the single-pair bound at lambda_T = 0."""
    qc = qc or DEFAULT_QUADRATURE
    if params.lambda_T == 0.0:
        return connection_prob_simplified(params, qc)
    return _conn_kernel(_kernel_key(params), qc).pc(params, "scj")


def connection_prob_pj(params: SystemParams,
                       qc: QuadratureConfig | None = None) -> float:
    """Connection probability when a fraction varrho of potential jammers
    transmits regardless of sight conditions."""
    qc = qc or DEFAULT_QUADRATURE
    return _conn_kernel(_kernel_key(params), qc).pc(params, "pj")


def connection_prob_scjq(params: SystemParams,
                         qc: QuadratureConfig | None = None) -> float:
    """Variant with the residual (outside-ball) jammers kept quiet."""
    qc = qc or DEFAULT_QUADRATURE
    return _conn_kernel(_kernel_key(params), qc).pc(params, "scjq")


# ---------------------------------------------------------------------------
# secrecy probability
# ---------------------------------------------------------------------------

class _SecrecyBase:
    """Density-free tensors of the secrecy integrals for one geometry/rate
    set.

    The eavesdropper-distance grid splits at the ball radius; on each
    branch every signal class (state b, effective gain, gamma index k)
    fans its transform argument s = k nu r^alpha over the grid.
    Interferer densities multiply in afterwards, so rho / lambda_P /
    lambda_E / beta sweeps reuse one instance.
    """

    def __init__(self, params: SystemParams, qc: QuadratureConfig):
        qc.validate_for(params)
        self.qc = qc
        p = params
        tau_e = sinr_threshold_secrecy(p)
        eve = eavesdropper_gain_distribution(p)
        n_r, n_e = qc.gauss_order, qc.radial_order
        cut = qc.tail_cutoff_radius

        g, w = _gl(n_e)
        re_in = 0.5 * p.D * (g + 1.0)
        w_in = 0.5 * p.D * w * re_in                      # includes r dr
        t = 0.5 * (g + 1.0)
        re_out = p.D / t
        w_out = 0.5 * w * p.D * p.D / (t * t * t)         # includes r dr

        rows = []  # (branch, coefficient, s over the branch grid)
        for ghat, qhat in eve.entries:
            if qhat == 0.0:
                continue
            for b, Nb, alpha, pb in (("L", p.N_L, p.alpha_L, p.p_L),
                                     ("N", p.N_N, p.alpha_N, p.p_N)):
                if pb == 0.0:
                    continue
                nu = tau_factor(Nb) * tau_e / ghat
                for k in range(1, Nb + 1):
                    coef = math.comb(Nb, k) * (-1.0) ** (k + 1) * pb * qhat
                    rows.append(("in", coef, k * nu * _rpow(re_in, alpha)))
            nu_n = tau_factor(p.N_N) * tau_e / ghat
            for k in range(1, p.N_N + 1):
                coef = math.comb(p.N_N, k) * (-1.0) ** (k + 1) * qhat
                rows.append(("out", coef, k * nu_n * _rpow(re_out, p.alpha_N)))

        self.row_branch = [r[0] for r in rows]
        self.row_coef = np.array([r[1] for r in rows])
        self.s = np.stack([r[2] for r in rows])            # (R, n_e)
        self.w_in, self.w_out = w_in, w_out
        self.re_in, self.re_out = re_in, re_out
        flat = self.s.reshape(-1)
        self.exp_phi = _ppp_exponent(flat, p, eve, n_r, cut).reshape(self.s.shape)


class _SecrecyTaggedHole:
    """Hole exponents at tagged-receiver distance nodes (lambda_R free)."""

    def __init__(self, params: SystemParams, base: _SecrecyBase, qc: QuadratureConfig):
        p = params
        m = qc.expectation_order
        _, wphi = _gl(m)
        self.wu = 0.5 * wphi
        eve = eavesdropper_gain_distribution(p)
        u_in = np.stack([_phi_nodes(r, p.r0, m)[0] for r in base.re_in])   # (n_e, m)
        u_out = np.stack([_phi_nodes(r, p.r0, m)[0] for r in base.re_out])
        by_branch = {"in": u_in, "out": u_out}
        u_grid = np.concatenate([by_branch[br] for br in base.row_branch])  # (R*n_e, m)
        flat = base.s.reshape(-1)
        t1u, t2u = _T_mix(flat, u_grid, p, eve, qc.gauss_order, qc.tail_cutoff_radius)
        self.tu = (t1u + t2u).reshape(base.s.shape + (m,))
        self.u_grid = u_grid.reshape(base.s.shape + (m,))


class _SecrecyNearestHole:
    """Hole exponents at nearest-other-receiver nodes (needs lambda_R)."""

    def __init__(self, params: SystemParams, lambda_R: float,
                 base: _SecrecyBase, qc: QuadratureConfig):
        m = qc.expectation_order
        v, wv = _v_nodes(lambda_R, m)
        self.v, self.wv = v, wv
        eve = eavesdropper_gain_distribution(params)
        flat = base.s.reshape(-1)
        t1v, t2v = _T_mix(flat, np.broadcast_to(v, (flat.size, m)), params, eve,
                          qc.gauss_order, qc.tail_cutoff_radius)
        self.tv = (t1v + t2v).reshape(base.s.shape + (m,))


@lru_cache(maxsize=32)
def _sec_base(key: SystemParams, qc: QuadratureConfig) -> _SecrecyBase:
    return _SecrecyBase(key, qc)


@lru_cache(maxsize=32)
def _sec_tagged(key: SystemParams, qc: QuadratureConfig) -> _SecrecyTaggedHole:
    return _SecrecyTaggedHole(key, _sec_base(key, qc), qc)


@lru_cache(maxsize=32)
def _sec_nearest(key: SystemParams, lambda_R: float,
                 qc: QuadratureConfig) -> _SecrecyNearestHole:
    return _SecrecyNearestHole(key, lambda_R, _sec_base(key, qc), qc)


def _psi_factor(base, tagged, nearest, lam_psi, psi_kind):
    if psi_kind == "none" or lam_psi == 0.0:
        return 1.0
    if psi_kind == "pair":
        return np.exp(-lam_psi * tagged.tu) @ tagged.wu
    cond = tagged.u_grid[..., :, None] <= nearest.v
    pick = np.where(cond, tagged.tu[..., :, None], nearest.tv[..., None, :])
    return np.einsum("reuv,u,v->re", np.exp(-lam_psi * pick), tagged.wu, nearest.wv)


def _secrecy_eval(params: SystemParams, qc: QuadratureConfig, psi_kind: str,
                  lam_phi: float, lam_psi: float) -> float:
    # every tensor except the nearest-receiver nodes is lambda_T free
    key = _kernel_key(params).replace(lambda_T=0.0)
    base = _sec_base(key, qc)
    tagged = _sec_tagged(key, qc) if psi_kind != "none" and lam_psi > 0.0 else None
    nearest = (_sec_nearest(key, params.lambda_R, qc)
               if psi_kind == "nearest" and lam_psi > 0.0 else None)
    noise = np.exp(-base.s * params.noise_ratio)
    phi = np.exp(-lam_phi * base.exp_phi)
    integrand = noise * phi * _psi_factor(base, tagged, nearest, lam_psi, psi_kind)
    total = 0.0
    for i, branch in enumerate(base.row_branch):
        wgt = base.w_in if branch == "in" else base.w_out
        total += base.row_coef[i] * float(integrand[i] @ wgt)
    with np.errstate(over="ignore"):
        val = float(np.exp(-2.0 * math.pi * params.lambda_E * total))
    return min(max(val, 0.0), 1.0)


def secrecy_prob_simplified(params: SystemParams,
                            qc: QuadratureConfig | None = None) -> float:
    """Lower bound on the secrecy probability with a single transmission
    pair: homogeneous jammers plus the residual field with the tagged
    receiver's hole carved out."""
    qc = qc or DEFAULT_QUADRATURE
    return _secrecy_eval(params, qc, "pair",
                         lam_phi=params.lambda_J, lam_psi=params.lambda_J_bar)


def secrecy_prob_general(params: SystemParams,
                         qc: QuadratureConfig | None = None) -> float:
    """Secrecy probability with concurrent transmitters: the homogeneous
    field carries density lambda_T + lambda_J; the residual field is
    blended and loses the receiver ball closest to the eavesdropper."""
    qc = qc or DEFAULT_QUADRATURE
    if params.lambda_R == 0.0:
        return secrecy_prob_simplified(params, qc)
    return _secrecy_eval(params, qc, "nearest",
                         lam_phi=params.lambda_T + params.lambda_J,
                         lam_psi=blended_php_density(params))


def secrecy_prob_pj(params: SystemParams,
                    qc: QuadratureConfig | None = None) -> float:
    """Secrecy probability under partial jamming: one homogeneous field of
    density lambda_T + varrho * lambda_P, no residual component."""
    qc = qc or DEFAULT_QUADRATURE
    return _secrecy_eval(params, qc, "none",
                         lam_phi=params.lambda_T + params.varrho * params.lambda_P,
                         lam_psi=0.0)


def secrecy_prob_scjq(params: SystemParams,
                      qc: QuadratureConfig | None = None) -> float:
    """Quiet-residual variant: only the homogeneous jammer component and
    concurrent transmitters interfere at eavesdroppers."""
    qc = qc or DEFAULT_QUADRATURE
    return _secrecy_eval(params, qc, "none",
                         lam_phi=params.lambda_T + params.lambda_J, lam_psi=0.0)


# ---------------------------------------------------------------------------
# area metrics and dispatch
# ---------------------------------------------------------------------------

def stc(p_c: float, p_s: float, params: SystemParams) -> float:
    """Secrecy transmission capacity: perfectly secret rate per unit area."""
    return p_c * p_s * (params.R_t - params.R_e) * params.lambda_T


def nsee(stc_value: float, params: SystemParams, scheme: str = "scj") -> float:
    """Network-wide secrecy energy efficiency: capacity per radiated watt
    per unit area.  Residual jammers count at their retained density."""
    p = params
    if scheme == "scj":
        dens = (p.lambda_T + p.lambda_J
                + math.exp(-p.lambda_R * math.pi * p.D ** 2) * p.lambda_J_bar)
    elif scheme == "scjq":
        dens = p.lambda_T + p.lambda_J
    elif scheme == "pj":
        dens = p.lambda_T + p.varrho * p.lambda_P
    elif scheme == "none":
        dens = p.lambda_T
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if dens == 0.0:
        return 0.0
    return stc_value / (dens * p.P)


def connection_probability(params: SystemParams, scheme: str = "scj",
                           qc: QuadratureConfig | None = None) -> float:
    if scheme == "scj":
        return connection_prob_general(params, qc)
    if scheme == "pj":
        return connection_prob_pj(params, qc)
    if scheme == "scjq":
        return connection_prob_scjq(params, qc)
    if scheme == "none":
        return connection_prob_pj(params.replace(varrho=0.0), qc)
    raise ValueError(f"unknown scheme {scheme!r}")


def secrecy_probability(params: SystemParams, scheme: str = "scj",
                        qc: QuadratureConfig | None = None) -> float:
    if params.lambda_E == 0.0:
        return 1.0
    if scheme == "scj":
        return secrecy_prob_general(params, qc)
    if scheme == "pj":
        return secrecy_prob_pj(params, qc)
    if scheme == "scjq":
        return secrecy_prob_scjq(params, qc)
    if scheme == "none":
        return secrecy_prob_pj(params.replace(varrho=0.0), qc)
    raise ValueError(f"unknown scheme {scheme!r}")
