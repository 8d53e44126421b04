"""Scenario parameters, rate bookkeeping and geometry shared by the
analytic and simulation code."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class SchemeKind(str, enum.Enum):
    """Transmission scheme.

    OFT suspends transmission until one-bit feedback reports the receiver SNR
    above the decoding threshold. NOFT transmits every slot without feedback.
    """

    OFT = "oft"
    NOFT = "noft"

    @classmethod
    def parse(cls, value: "str | SchemeKind") -> "SchemeKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected 'oft' or 'noft'") from None


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class NetworkConfig:
    """Static parameters of one scenario.

    Attributes:
        L: source-destination distance [m].
        alpha: path-loss exponent, 2 <= alpha <= 6.
        p: transmitter-side SNR, linear scale (receiver noise normalized to 1).
        lambda_e: eavesdropper density [nodes/m^2].
        epsilon: end-to-end secrecy outage constraint, 0 < epsilon < 1.
    """

    L: float = 50.0
    alpha: float = 3.0
    p: float = 1e10
    lambda_e: float = 1e-5
    epsilon: float = 0.05

    def __post_init__(self):
        checks = [
            (math.isfinite(self.L) and self.L > 0, f"L must be > 0 (got {self.L})"),
            (2.0 <= self.alpha <= 6.0, f"alpha must lie in [2, 6] (got {self.alpha})"),
            (math.isfinite(self.p) and self.p > 0, f"p must be > 0 (got {self.p})"),
            (
                math.isfinite(self.lambda_e) and self.lambda_e >= 0,
                f"lambda_e must be >= 0 (got {self.lambda_e})",
            ),
            (0.0 < self.epsilon < 1.0, f"epsilon must lie in (0, 1) (got {self.epsilon})"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValueError(message)

    def replace(self, **changes) -> "NetworkConfig":
        fields = dict(L=self.L, alpha=self.alpha, p=self.p, lambda_e=self.lambda_e, epsilon=self.epsilon)
        fields.update(changes)
        return NetworkConfig(**fields)


@dataclass(frozen=True)
class HopLayout:
    n_hops: int
    node_positions: tuple[tuple[float, float], ...]

    @property
    def transmitters(self) -> tuple[tuple[float, float], ...]:
        return self.node_positions[:-1]


@dataclass(frozen=True)
class RateDesign:
    """Wiretap code rates [bits/channel use] and their SNR thresholds."""

    r_t: float
    r_s: float
    r_e: float
    beta_t: float
    beta_e: float


def _check_hops(n_hops: int) -> int:
    if int(n_hops) != n_hops or n_hops < 1:
        raise ValueError(f"n_hops must be an integer >= 1 (got {n_hops})")
    return int(n_hops)


def hop_distance(config: NetworkConfig, n_hops: int) -> float:
    return config.L / _check_hops(n_hops)


def hop_layout(config: NetworkConfig, n_hops: int) -> HopLayout:
    """Equidistant collinear placement: node k at ((k-1) L/N, 0)."""
    n = _check_hops(n_hops)
    positions = tuple((k * config.L / n, 0.0) for k in range(n + 1))
    return HopLayout(n, positions)


def path_gain(distance: float, alpha: float) -> float:
    """Bounded path loss 1 / (1 + d^alpha)."""
    if distance < 0:
        raise ValueError(f"distance must be >= 0 (got {distance})")
    return 1.0 / (1.0 + distance ** alpha)


def rates_from(r_t: float, r_s: float) -> RateDesign:
    if not r_s > 0:
        raise ValueError(f"r_s must be > 0 (got {r_s})")
    if r_t < r_s:
        raise ValueError(f"r_t must be >= r_s (got r_t={r_t}, r_s={r_s})")
    r_e = r_t - r_s
    return RateDesign(
        r_t=r_t,
        r_s=r_s,
        r_e=r_e,
        beta_t=math.expm1(r_t * math.log(2.0)),
        beta_e=math.expm1(r_e * math.log(2.0)),
    )
