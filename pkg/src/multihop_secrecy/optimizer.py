"""Hop-count search and a grid oracle for the closed-form rate design."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytics import LN2, optimal_rates, rate_redundancy, scheme_constant, throughput
from .model import NetworkConfig, RateDesign, SchemeKind

DEFAULT_N_MAX = 50


@dataclass(frozen=True)
class HopSearchResult:
    scheme: SchemeKind
    n_star: int
    rates_star: RateDesign
    throughput_star: float
    profile: list = field(default_factory=list)  # [(N, throughput), ...]


@dataclass(frozen=True)
class RateGridResult:
    r_t_best: float
    throughput_best: float
    grid_step: float
    r_t_grid: np.ndarray = field(repr=False, default=None)
    values: np.ndarray = field(repr=False, default=None)
    # natural log of the objective; stays finite where the values underflow
    log_values: np.ndarray = field(repr=False, default=None)


def optimize_hops(config: NetworkConfig, scheme: SchemeKind, n_max: int = DEFAULT_N_MAX) -> HopSearchResult:
    """Exhaustive search of N in [1, n_max]; ties go to the smaller N."""
    scheme = SchemeKind.parse(scheme)
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1 (got {n_max})")
    profile = []
    best = None
    for n in range(1, int(n_max) + 1):
        rates = optimal_rates(config, scheme, n)
        u = throughput(config, scheme, n, rates)
        profile.append((n, u))
        if best is None or u > best[2]:
            best = (n, rates, u)
    n_star, rates_star, u_star = best
    return HopSearchResult(scheme, n_star, rates_star, u_star, profile)


def brute_force_rates(
    config: NetworkConfig,
    scheme: SchemeKind,
    n_hops: int,
    grid_step: float = 1e-4,
    r_t_max: float | None = None,
) -> RateGridResult:
    """Maximize throughput over R_t on the grid {R_e + k * grid_step, k >= 1}.

    Independent of the Lambert-W solution: R_e is fixed by the secrecy
    constraint and the throughput is simply evaluated at every grid point.
    The search runs on the log of the objective so that deep-outage designs,
    whose throughput underflows double precision, are still resolved.
    """
    if not grid_step > 0:
        raise ValueError(f"grid_step must be > 0 (got {grid_step})")
    r_e = rate_redundancy(config, n_hops)
    if r_t_max is None:
        r_t_max = r_e + 20.0
    if r_t_max <= r_e:
        raise ValueError(f"r_t_max={r_t_max} must exceed the redundancy rate R_e={r_e}")
    k = np.arange(1, int(np.floor((r_t_max - r_e) / grid_step)) + 1)
    r_s = k * grid_step
    grid = r_e + r_s
    decay = scheme_constant(config, scheme, n_hops)
    log_values = np.log(r_s) - decay * np.expm1(grid * LN2) - np.log(n_hops)
    i = int(np.argmax(log_values))
    values = np.exp(log_values)
    return RateGridResult(float(grid[i]), float(values[i]), grid_step, grid, values, log_values)


def sign_changes(values, tol: float = 1e-12) -> int:
    """Number of sign changes in consecutive differences.

    Differences no larger than ``tol`` times the largest magnitude are
    treated as ties and skipped.
    """
    values = np.asarray(values, dtype=float)
    diffs = np.diff(values)
    scale = np.max(np.abs(values)) if values.size else 0.0
    signs = np.sign(diffs[np.abs(diffs) > tol * scale])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
