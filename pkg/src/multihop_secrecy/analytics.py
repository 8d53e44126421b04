"""Closed-form secrecy outage, rate design and throughput for both schemes.

All probabilities that involve products over hops or over the eavesdropper
point process are evaluated through their exponents, so that very large hop
counts or transmit SNRs do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from .model import NetworkConfig, RateDesign, SchemeKind, _check_hops, hop_layout
from .quadrature import QuadratureError, adaptive_cubature
from .specfun import gamma, lambert_w0, lambert_w0_exp

LN2 = math.log(2.0)

__all__ = [
    "HighSnrLimit",
    "PerformanceReport",
    "QuadratureError",
    "beta_e_for_epsilon",
    "connection_prob_noft",
    "high_snr_limit",
    "k1",
    "optimal_rates",
    "performance",
    "rate_redundancy",
    "sop_end_to_end",
    "sop_fixed_eavesdroppers",
    "sop_per_hop",
    "throughput",
    "transmission_prob_oft",
]


@dataclass(frozen=True)
class PerformanceReport:
    scheme: SchemeKind
    n_hops: int
    rates: RateDesign
    p_t_hop: float
    p_c_hop: float
    p_c_path: float
    p_so_hop: float
    p_so_path: float
    throughput: float


@dataclass(frozen=True)
class HighSnrLimit:
    """Limits of the optimal secrecy rate and throughput as p grows without bound.

    ``k_constant`` is the scheme constant the limits depend on; the NOFT
    constant is N times the OFT one.
    """

    r_s_limit: float
    throughput_limit: float
    k_constant: float


def k1(config: NetworkConfig) -> float:
    """pi * lambda_e * Gamma(2/alpha + 1)."""
    return math.pi * config.lambda_e * gamma(2.0 / config.alpha + 1.0)


def _leak_exponent(config: NetworkConfig, n_hops: int, beta_e: float) -> float:
    # N K1 (beta_e/p)^(-2/alpha) exp(-beta_e/p), i.e. -log(1 - P_so)
    s = beta_e / config.p
    log_term = math.log(n_hops) + math.log(k1(config)) - (2.0 / config.alpha) * math.log(s) - s
    return math.exp(log_term)


def sop_per_hop(config: NetworkConfig, beta_e: float) -> float:
    """Secrecy outage probability of one hop at eavesdropper threshold beta_e.

    ``beta_e = 0`` (no redundancy) gives outage 1 whenever eavesdroppers exist.
    """
    return sop_end_to_end(config, 1, beta_e)


def sop_end_to_end(config: NetworkConfig, n_hops: int, beta_e: float) -> float:
    n = _check_hops(n_hops)
    if beta_e < 0:
        raise ValueError(f"beta_e must be >= 0 (got {beta_e})")
    if config.lambda_e == 0:
        return 0.0
    if beta_e == 0:
        return 1.0
    return -math.expm1(-_leak_exponent(config, n, beta_e))


def _secrecy_w(config: NetworkConfig, n_hops: int) -> float:
    # W0((alpha/2) [ln(1/(1-eps)) / (N K1)]^(-alpha/2)), argument kept in log form
    c = -math.log1p(-config.epsilon)
    a = config.alpha
    log_arg = math.log(a / 2.0) - (a / 2.0) * (math.log(c) - math.log(n_hops) - math.log(k1(config)))
    return lambert_w0_exp(log_arg)


def beta_e_for_epsilon(config: NetworkConfig, n_hops: int) -> Optional[float]:
    """Eavesdropper SNR threshold at which the end-to-end outage equals epsilon.

    Returns ``None`` when ``lambda_e == 0``: there is no eavesdropper, the
    constraint holds for every threshold and no redundancy is needed.
    """
    n = _check_hops(n_hops)
    if config.lambda_e == 0:
        return None
    return (2.0 * config.p / config.alpha) * _secrecy_w(config, n)


def rate_redundancy(config: NetworkConfig, n_hops: int) -> float:
    beta_e = beta_e_for_epsilon(config, n_hops)
    if beta_e is None:
        return 0.0
    return math.log1p(beta_e) / LN2


def _per_hop_decay(config: NetworkConfig, n_hops: int) -> float:
    # K2 = ((L/N)^alpha + 1) / p
    n = _check_hops(n_hops)
    return ((config.L / n) ** config.alpha + 1.0) / config.p


def scheme_constant(config: NetworkConfig, scheme: SchemeKind, n_hops: int) -> float:
    """K2 for OFT, K4 = N K2 for NOFT."""
    k2 = _per_hop_decay(config, n_hops)
    return k2 if SchemeKind.parse(scheme) is SchemeKind.OFT else n_hops * k2


def transmission_prob_oft(config: NetworkConfig, n_hops: int, beta_t: float) -> float:
    if beta_t < 0:
        raise ValueError(f"beta_t must be >= 0 (got {beta_t})")
    return math.exp(-beta_t * _per_hop_decay(config, n_hops))


def connection_prob_noft(config: NetworkConfig, n_hops: int, beta_t: float) -> float:
    if beta_t < 0:
        raise ValueError(f"beta_t must be >= 0 (got {beta_t})")
    return math.exp(-n_hops * beta_t * _per_hop_decay(config, n_hops))


def optimal_rates(config: NetworkConfig, scheme: SchemeKind, n_hops: int) -> RateDesign:
    """Throughput-maximizing wiretap rates at a fixed hop count.

    The redundancy rate is pinned by making the secrecy constraint bind; the
    secret rate then solves the first-order condition
    ``ln2 K 2^R_t (R_t - R_e) = 1`` in closed form through Lambert W.
    """
    n = _check_hops(n_hops)
    beta_e = beta_e_for_epsilon(config, n)
    if beta_e is None:
        beta_e = 0.0
    r_e = math.log1p(beta_e) / LN2
    k = scheme_constant(config, scheme, n)
    # 2^-R_e / K without forming 2^R_e explicitly
    r_s = lambert_w0(1.0 / ((beta_e + 1.0) * k)) / LN2
    r_t = r_e + r_s
    return RateDesign(r_t=r_t, r_s=r_s, r_e=r_e, beta_t=math.expm1(r_t * LN2), beta_e=beta_e)


def throughput(config: NetworkConfig, scheme: SchemeKind, n_hops: int, rates: RateDesign) -> float:
    """Secure throughput P_t' P_c R_s / N [bits/channel use]."""
    n = _check_hops(n_hops)
    k = scheme_constant(config, scheme, n)
    return rates.r_s * math.exp(-k * rates.beta_t) / n


def log_throughput(config: NetworkConfig, scheme: SchemeKind, n_hops: int, rates: RateDesign) -> float:
    """Natural log of :func:`throughput`, finite even when the throughput underflows."""
    n = _check_hops(n_hops)
    if not rates.r_s > 0:
        return -math.inf
    return math.log(rates.r_s) - scheme_constant(config, scheme, n) * rates.beta_t - math.log(n)


def throughput_objective(config: NetworkConfig, scheme: SchemeKind, n_hops: int, r_t, r_e: float):
    """Throughput as a function of R_t once R_e is fixed; accepts arrays."""
    k = scheme_constant(config, scheme, n_hops)
    r_t = np.asarray(r_t, dtype=float)
    return (r_t - r_e) * np.exp(-k * np.expm1(r_t * LN2)) / n_hops


def performance(config: NetworkConfig, scheme: SchemeKind, n_hops: int, rates: Optional[RateDesign] = None) -> PerformanceReport:
    scheme = SchemeKind.parse(scheme)
    n = _check_hops(n_hops)
    if rates is None:
        rates = optimal_rates(config, scheme, n)
    if scheme is SchemeKind.OFT:
        p_t, p_c_hop, p_c_path = transmission_prob_oft(config, n, rates.beta_t), 1.0, 1.0
    else:
        p_t = 1.0
        p_c_hop = transmission_prob_oft(config, n, rates.beta_t)
        p_c_path = connection_prob_noft(config, n, rates.beta_t)
    return PerformanceReport(
        scheme=scheme,
        n_hops=n,
        rates=rates,
        p_t_hop=p_t,
        p_c_hop=p_c_hop,
        p_c_path=p_c_path,
        p_so_hop=sop_per_hop(config, rates.beta_e),
        p_so_path=sop_end_to_end(config, n, rates.beta_e),
        throughput=throughput(config, scheme, n, rates),
    )


def high_snr_limit(config: NetworkConfig, scheme: SchemeKind, n_hops: int) -> HighSnrLimit:
    n = _check_hops(n_hops)
    if config.lambda_e == 0:
        raise ValueError("high-SNR limits are finite only when lambda_e > 0")
    k3 = (2.0 / config.alpha) * ((config.L / n) ** config.alpha + 1.0) * _secrecy_w(config, n)
    k = k3 if SchemeKind.parse(scheme) is SchemeKind.OFT else n * k3
    w = lambert_w0(1.0 / k)
    return HighSnrLimit(
        r_s_limit=w / LN2,
        throughput_limit=w * math.exp(-k * math.exp(w)) / (n * LN2),
        k_constant=k,
    )


def _tail_integral(s: float, alpha: float, rho: float) -> float:
    # integral over |x| > rho of exp(-s(|x|^alpha + 1)) dx in the plane
    a = 2.0 / alpha
    return (2.0 * math.pi / alpha) * s ** (-a) * math.exp(-s) * math.gamma(a) * float(gammaincc(a, s * rho ** alpha))


def sop_fixed_eavesdroppers(
    config: NetworkConfig,
    n_hops: int,
    beta_e: float,
    truncation_radius: Optional[float] = None,
    tolerance: float = 1e-7,
    max_regions: int = 200_000,
    full_output: bool = False,
):
    """End-to-end secrecy outage when one eavesdropper pattern persists over all hops.

    Evaluates ``1 - exp(-lambda_e * I)`` with
    ``I = int (1 - prod_n (1 - exp(-beta_e (|x - a_n|^alpha + 1) / p))) dx``
    by adaptive cubature in polar coordinates about the path midpoint. The
    plane outside ``truncation_radius`` is dropped; an analytic bound on the
    dropped mass is added to the error estimate. With ``full_output`` the
    pair ``(probability, error_bound)`` is returned.

    Raises :class:`QuadratureError` when ``tolerance`` cannot be met.
    """
    n = _check_hops(n_hops)
    if beta_e < 0:
        raise ValueError(f"beta_e must be >= 0 (got {beta_e})")
    if config.lambda_e == 0 or beta_e == 0:
        value = sop_end_to_end(config, n, beta_e)
        return (value, 0.0) if full_output else value

    lam = config.lambda_e
    alpha = config.alpha
    s = beta_e / config.p
    half = config.L / 2.0
    tx = np.array([x for x, _ in hop_layout(config, n).transmitters])
    integral_tol = tolerance / lam

    def dropped(radius):
        inner = max(radius - half, 0.0)
        return n * _tail_integral(s, alpha, inner)

    if truncation_radius is None:
        radius = 3.0 * config.L
        if dropped(radius) > 0.1 * integral_tol:
            while dropped(radius) > 0.1 * integral_tol:
                radius *= 1.5
            lo, hi = radius / 1.5, radius
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if dropped(mid) > 0.1 * integral_tol else (lo, mid)
            radius = hi
    else:
        radius = float(truncation_radius)
        if radius <= half:
            raise ValueError("truncation_radius must exceed L/2 so the disk covers every node")
    tail = dropped(radius)

    def integrand(r, theta):
        x = half + r * np.cos(theta)
        y = r * np.sin(theta)
        log_keep = np.zeros(np.broadcast(r, theta).shape)
        for a in tx:
            d_alpha = ((x - a) ** 2 + y * y) ** (alpha / 2.0)
            log_keep = log_keep + np.log1p(-np.exp(-s * (d_alpha + 1.0)))
        # upper half-plane only; the pattern is symmetric about the path
        return -2.0 * np.expm1(log_keep) * r

    decay = s ** (-1.0 / alpha)
    r_breaks = sorted({0.0, half, min(half + decay, radius), min(half + 3.0 * decay, radius), radius})
    theta_breaks = list(np.linspace(0.0, math.pi, 5))
    quad_tol = max(integral_tol - tail, 0.5 * integral_tol)
    try:
        res = adaptive_cubature(integrand, r_breaks, theta_breaks, quad_tol, max_regions=max_regions)
    except QuadratureError as exc:
        estimate = -math.expm1(-lam * exc.estimate)
        raise QuadratureError(
            "fixed-eavesdropper cubature did not reach tolerance", estimate, lam * (exc.error + tail)
        ) from None
    value = -math.expm1(-lam * res.value)
    error = lam * (res.error + tail)
    return (value, error) if full_output else value
