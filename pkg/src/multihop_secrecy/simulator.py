"""Monte Carlo simulation of the multihop wiretap link.

Eavesdroppers are drawn from a homogeneous Poisson point process over a
finite rectangle, all channels see unit-mean Rayleigh (exponential power)
fading, and the OFT/NOFT slot dynamics are played out trial by trial.

Trials are grouped into fixed-size blocks. Block ``b`` draws from its own
Philox stream keyed by ``(master_seed, b)``, and per-block tallies are merged
in block order, so a report depends only on the inputs and the seed and not
on how many worker threads ran the blocks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytics
from .model import NetworkConfig, RateDesign, SchemeKind, _check_hops, hop_layout

DEFAULT_BLOCK_SIZE = 2048
DEFAULT_SLOT_CAP = 10**6
Z_LIMIT = 4.0
MIN_WALD_COUNT = 30


class MobilityModel(str, enum.Enum):
    """How eavesdropper positions evolve from hop to hop."""

    INDEPENDENT = "independent"  # fresh point pattern for every hop
    FIXED = "fixed"  # one pattern reused by every hop

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown mobility {value!r}; expected 'independent' or 'fixed'") from None


class SlotCapExceeded(RuntimeError):
    """An OFT hop waited longer than the configured slot cap."""


@dataclass(frozen=True)
class SimRegion:
    width: float = 2000.0
    height: float = 2000.0
    center: tuple = (25.0, 0.0)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"region width and height must be > 0 (got {self.width} x {self.height})")

    @classmethod
    def around_path(cls, config: NetworkConfig, width: float = 2000.0, height: float = 2000.0) -> "SimRegion":
        return cls(width, height, (config.L / 2.0, 0.0))

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def bounds(self):
        cx, cy = self.center
        return (cx - self.width / 2, cx + self.width / 2, cy - self.height / 2, cy + self.height / 2)


@dataclass(frozen=True)
class SimEstimate:
    trials: int
    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    low_count: bool = False

    @classmethod
    def from_mean(cls, trials, mean, std_error, probability=False, low_count=False):
        lo, hi = mean - 1.96 * std_error, mean + 1.96 * std_error
        if probability:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        return cls(int(trials), float(mean), float(std_error), float(lo), float(hi), bool(low_count))

    @classmethod
    def binomial(cls, successes: int, trials: int):
        p = successes / trials
        se = math.sqrt(p * (1.0 - p) / trials)
        low = min(successes, trials - successes) < MIN_WALD_COUNT
        return cls.from_mean(trials, p, se, probability=True, low_count=low)


@dataclass(frozen=True)
class SimReport:
    scheme: SchemeKind
    mobility: MobilityModel
    n_hops: int
    p_t_hop: SimEstimate
    p_c_hop: SimEstimate
    p_c_path: SimEstimate
    p_so_path: SimEstimate
    throughput: SimEstimate  # ratio of means, sum(R_s * delivered) / sum(slots)
    throughput_mean_of_ratios: SimEstimate
    slots_per_hop: SimEstimate
    master_seed: int


@dataclass
class _Tally:
    trials: int = 0
    delivered: int = 0
    outages: int = 0
    hops: int = 0
    slots: int = 0
    slots_sq: int = 0
    hop_slots_sq: int = 0
    delivered_slots: int = 0
    ratio_sum: float = 0.0
    ratio_sq_sum: float = 0.0
    hop_draws: int = 0
    hop_successes: int = 0

    def merge(self, other: "_Tally") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))


def sample_eavesdroppers(region: SimRegion, lambda_e: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on ``region``; returns an ``(k, 2)`` array of positions."""
    if lambda_e < 0:
        raise ValueError(f"lambda_e must be >= 0 (got {lambda_e})")
    x0, x1, y0, y1 = region.bounds
    count = rng.poisson(lambda_e * region.area) if lambda_e > 0 else 0
    pts = np.empty((count, 2))
    pts[:, 0] = rng.uniform(x0, x1, count)
    pts[:, 1] = rng.uniform(y0, y1, count)
    return pts


def _block_rng(master_seed: int, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed) & (2**64 - 1), spawn_key=(block,))
    return np.random.Generator(np.random.Philox(seq))


class _Trialer:
    def __init__(self, config, scheme, n_hops, rates, mobility, region, slot_cap):
        self.config = config
        self.scheme = scheme
        self.n = n_hops
        self.rates = rates
        self.mobility = mobility
        self.region = region
        self.slot_cap = slot_cap
        self.tx = np.array([x for x, _ in hop_layout(config, n_hops).transmitters])
        # legitimate link decodes iff H > beta_t (d^alpha + 1) / p
        self.h_threshold = rates.beta_t * ((config.L / n_hops) ** config.alpha + 1.0) / config.p

    def _legitimate(self, rng, size):
        n = self.n
        if self.scheme is SchemeKind.NOFT:
            ok = rng.exponential(size=(size, n)) > self.h_threshold
            return np.ones((size, n), dtype=np.int64), ok.all(axis=1), ok.sum()

        slots = np.zeros((size, n), dtype=np.int64)
        pending = np.ones((size, n), dtype=bool)
        rounds = 0
        while pending.any():
            rounds += 1
            if rounds > self.slot_cap:
                raise SlotCapExceeded(
                    f"an OFT hop waited more than {self.slot_cap} slots; "
                    f"beta_t={self.rates.beta_t:.6g} is implausibly large for p={self.config.p:.6g}"
                )
            idx = np.flatnonzero(pending)
            success = rng.exponential(size=idx.size) > self.h_threshold
            slots.flat[idx] += 1
            pending.flat[idx[success]] = False
        return slots, np.ones(size, dtype=bool), self.n * size

    def _exceeds(self, rng, xs, ys, a):
        cfg = self.config
        d_alpha = ((xs - a) ** 2 + ys * ys) ** (cfg.alpha / 2.0)
        fading = rng.exponential(size=xs.size)
        return cfg.p * fading > self.rates.beta_e * (1.0 + d_alpha)

    def _eavesdropping(self, rng, size):
        cfg = self.config
        outage = np.zeros(size, dtype=bool)
        if cfg.lambda_e == 0:
            return outage
        x0, x1, y0, y1 = self.region.bounds
        mean_count = cfg.lambda_e * self.region.area

        def draw_pattern():
            counts = rng.poisson(mean_count, size=size)
            total = int(counts.sum())
            owner = np.repeat(np.arange(size), counts)
            xs = rng.uniform(x0, x1, total)
            ys = rng.uniform(y0, y1, total)
            return owner, xs, ys

        if self.mobility is MobilityModel.FIXED:
            pattern = draw_pattern()
        for a in self.tx:
            owner, xs, ys = pattern if self.mobility is MobilityModel.FIXED else draw_pattern()
            hit = self._exceeds(rng, xs, ys, a)
            outage |= np.bincount(owner[hit], minlength=size) > 0
        return outage

    def run(self, rng, size) -> _Tally:
        slots, delivered, hop_successes = self._legitimate(rng, size)
        outage = self._eavesdropping(rng, size)
        total_slots = slots.sum(axis=1)
        t = _Tally()
        t.trials = size
        t.delivered = int(delivered.sum())
        t.outages = int(outage.sum())
        t.hops = size * self.n
        t.slots = int(total_slots.sum())
        t.slots_sq = int((total_slots * total_slots).sum())
        t.hop_slots_sq = int((slots * slots).sum())
        t.delivered_slots = int(total_slots[delivered].sum())
        ratio = delivered / total_slots
        t.ratio_sum = float(ratio.sum())
        t.ratio_sq_sum = float((ratio * ratio).sum())
        t.hop_draws = t.slots
        t.hop_successes = int(hop_successes)
        return t


def simulate(
    config: NetworkConfig,
    scheme: SchemeKind,
    n_hops: int,
    rates: RateDesign,
    mobility: MobilityModel = MobilityModel.INDEPENDENT,
    region: Optional[SimRegion] = None,
    trials: int = 100_000,
    master_seed: int = 0,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    slot_cap: int = DEFAULT_SLOT_CAP,
) -> SimReport:
    """Estimate per-hop transmission, path connection, end-to-end secrecy
    outage and secure throughput by direct simulation."""
    scheme = SchemeKind.parse(scheme)
    mobility = MobilityModel.parse(mobility)
    n = _check_hops(n_hops)
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be an integer >= 1 (got {trials})")
    trials = int(trials)
    if region is None:
        region = SimRegion.around_path(config)
    trialer = _Trialer(config, scheme, n, rates, mobility, region, slot_cap)

    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)

    def run_block(b):
        return trialer.run(_block_rng(master_seed, b), sizes[b])

    total = _Tally()
    if workers <= 1:
        for b in range(len(sizes)):
            total.merge(run_block(b))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for tally in pool.map(run_block, range(len(sizes))):
                total.merge(tally)
    return _report(total, scheme, mobility, n, rates, master_seed)


def _report(t: _Tally, scheme, mobility, n, rates, master_seed) -> SimReport:
    exact_one = SimEstimate.from_mean(t.trials, 1.0, 0.0, probability=True)

    # per-hop decoding probability from all legitimate draws; for OFT the
    # stopping rule makes hops / draws the geometric maximum-likelihood estimate
    if scheme is SchemeKind.OFT:
        p_hat = t.hops / t.hop_draws
        se = p_hat * math.sqrt(max(1.0 - p_hat, 0.0) / t.hops)
        low = min(t.hops, t.hop_draws - t.hops) < MIN_WALD_COUNT
        p_t_hop = SimEstimate.from_mean(t.hops, p_hat, se, probability=True, low_count=low)
        p_c_hop = exact_one
        p_c_path = exact_one
    else:
        p_t_hop = exact_one
        p_c_hop = SimEstimate.binomial(t.hop_successes, t.hops)
        p_c_path = SimEstimate.binomial(t.delivered, t.trials)

    p_so = SimEstimate.binomial(t.outages, t.trials)

    # ratio of means with a delta-method standard error
    m = t.trials
    u_hat = rates.r_s * t.delivered / t.slots
    resid_sq = (
        rates.r_s**2 * t.delivered
        - 2.0 * u_hat * rates.r_s * t.delivered_slots
        + u_hat**2 * t.slots_sq
    )
    mean_slots = t.slots / m
    var_resid = max(resid_sq, 0.0) / max(m - 1, 1)
    u_se = math.sqrt(var_resid / m) / mean_slots
    u = SimEstimate.from_mean(m, u_hat, u_se, low_count=t.delivered < MIN_WALD_COUNT)

    mor_mean = rates.r_s * t.ratio_sum / m
    mor_var = max(rates.r_s**2 * t.ratio_sq_sum / m - mor_mean**2, 0.0) * m / max(m - 1, 1)
    u_mor = SimEstimate.from_mean(m, mor_mean, math.sqrt(mor_var / m))

    hop_mean = t.hop_draws / t.hops
    hop_var = max(t.hop_slots_sq / t.hops - hop_mean**2, 0.0) * t.hops / max(t.hops - 1, 1)
    slots_per_hop = SimEstimate.from_mean(t.hops, hop_mean, math.sqrt(hop_var / t.hops))

    return SimReport(
        scheme=scheme,
        mobility=mobility,
        n_hops=n,
        p_t_hop=p_t_hop,
        p_c_hop=p_c_hop,
        p_c_path=p_c_path,
        p_so_path=p_so,
        throughput=u,
        throughput_mean_of_ratios=u_mor,
        slots_per_hop=slots_per_hop,
        master_seed=int(master_seed),
    )


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    analytic: float
    empirical: float
    std_error: float
    z: float
    flagged: bool
    # "two-sided": |z| > 4 flags; "upper-bound": z > 3 flags
    test: str = "two-sided"


@dataclass(frozen=True)
class Comparison:
    report: SimReport
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(row.flagged for row in self.rows)


def _z(empirical, analytic, se):
    if se > 0:
        return (empirical - analytic) / se
    return 0.0 if math.isclose(empirical, analytic, rel_tol=1e-12, abs_tol=1e-15) else math.copysign(math.inf, empirical - analytic)


def _row(name, analytic, est: SimEstimate, test="two-sided", null_se=None):
    # with too few events the Wald error collapses toward 0, so fall back
    # to the score-test error implied by the analytic value
    se = null_se if est.low_count and null_se is not None else est.std_error
    z = _z(est.mean, analytic, se)
    flagged = abs(z) > Z_LIMIT if test == "two-sided" else z > 3.0
    return ComparisonRow(name, float(analytic), est.mean, float(se), float(z), bool(flagged), test)


def validate_against_analytics(
    config: NetworkConfig,
    scheme: SchemeKind,
    n_hops: int,
    rates: Optional[RateDesign] = None,
    trials: int = 100_000,
    master_seed: int = 0,
    mobility: MobilityModel = MobilityModel.INDEPENDENT,
    region: Optional[SimRegion] = None,
    workers: int = 1,
    fixed_quadrature: bool = True,
) -> Comparison:
    """Simulate and line the estimates up against the closed forms.

    Under independent patterns every quantity is flagged when ``|z| > 4``.
    Under fixed patterns the closed-form outage is only an upper bound, so
    that row is flagged when the estimate exceeds it by more than 3 standard
    errors; the fixed-pattern quadrature value is added as a two-sided row.
    """
    scheme = SchemeKind.parse(scheme)
    mobility = MobilityModel.parse(mobility)
    if rates is None:
        rates = analytics.optimal_rates(config, scheme, n_hops)
    perf = analytics.performance(config, scheme, n_hops, rates)
    report = simulate(
        config, scheme, n_hops, rates, mobility=mobility, region=region,
        trials=trials, master_seed=master_seed, workers=workers,
    )
    def prob_row(name, analytic, est, test="two-sided"):
        null_se = math.sqrt(analytic * (1.0 - analytic) / est.trials)
        return _row(name, analytic, est, test, null_se)

    rows = []
    if scheme is SchemeKind.OFT:
        rows.append(prob_row("p_t_hop", perf.p_t_hop, report.p_t_hop))
        rows.append(_row("slots_per_hop", 1.0 / perf.p_t_hop, report.slots_per_hop))
        u_null = None
    else:
        rows.append(prob_row("p_c_hop", perf.p_c_hop, report.p_c_hop))
        rows.append(prob_row("p_c_path", perf.p_c_path, report.p_c_path))
        # every NOFT trial lasts exactly N slots
        pc = perf.p_c_path
        u_null = rates.r_s / n_hops * math.sqrt(pc * (1.0 - pc) / report.throughput.trials)
    if mobility is MobilityModel.INDEPENDENT:
        rows.append(prob_row("p_so_path", perf.p_so_path, report.p_so_path))
    else:
        rows.append(prob_row("p_so_path", perf.p_so_path, report.p_so_path, test="upper-bound"))
        if fixed_quadrature and config.lambda_e > 0:
            fixed = analytics.sop_fixed_eavesdroppers(config, n_hops, rates.beta_e)
            rows.append(prob_row("p_so_path_fixed", fixed, report.p_so_path))
    rows.append(_row("throughput", perf.throughput, report.throughput, null_se=u_null))
    return Comparison(report, rows)
