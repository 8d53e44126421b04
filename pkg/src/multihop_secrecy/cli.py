"""Experiment runner: analyze, optimize, simulate and sweep.

Scenario files are INI-style::

    [network]
    L = 50
    alpha = 3
    p_db = 100
    lambda_e = 1e-5
    epsilon = 0.05

    [design]
    scheme = both          ; oft | noft | both
    n_hops = 5
    n_max = 50

    [sweep]
    axis = p_db            ; p_db | lambda_e | n_hops
    min = 30
    max = 120
    points = 19
    spacing = linear       ; linear | log

    [sim]
    trials = 100000
    seed = 42
    mobility = independent ; independent | fixed
    region_width = 2000
    region_height = 2000

    [output]
    path = results.csv
    format = csv           ; csv | json

Command-line flags override file values. Without a file the defaults are
L = 50 m, alpha = 3, p = 100 dB, lambda_e = 1e-5, epsilon = 0.05.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__, analytics
from .model import NetworkConfig, SchemeKind, db_to_linear
from .optimizer import DEFAULT_N_MAX, optimize_hops
from .simulator import MobilityModel, SimRegion, SlotCapExceeded, validate_against_analytics

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ZSCORE = 3
EXIT_SLOT_CAP = 4

SWEEP_AXES = ("p_db", "lambda_e", "n_hops")


class SpecError(ValueError):
    """Invalid experiment description."""


@dataclass
class SweepAxis:
    axis: str
    min: float
    max: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise SpecError(f"sweep axis must be one of {', '.join(SWEEP_AXES)} (got {self.axis!r})")
        if self.points < 2:
            raise SpecError(f"sweep points must be >= 2 (got {self.points})")
        if self.spacing not in ("linear", "log"):
            raise SpecError(f"sweep spacing must be 'linear' or 'log' (got {self.spacing!r})")
        if self.max < self.min:
            raise SpecError(f"sweep max {self.max} is below min {self.min}")
        if self.spacing == "log" and self.min <= 0:
            raise SpecError("log spacing needs a positive sweep minimum")

    def values(self) -> list:
        if self.spacing == "log":
            vals = np.geomspace(self.min, self.max, self.points)
        else:
            vals = np.linspace(self.min, self.max, self.points)
        if self.axis == "n_hops":
            return sorted({int(round(v)) for v in vals})
        return [float(v) for v in vals]


@dataclass
class SimSettings:
    trials: int = 100_000
    master_seed: int = 0
    mobility: str = "independent"
    region_width: float = 2000.0
    region_height: float = 2000.0


@dataclass
class ExperimentSpec:
    L: float = 50.0
    alpha: float = 3.0
    p_db: float = 100.0
    lambda_e: float = 1e-5
    epsilon: float = 0.05
    schemes: list = field(default_factory=lambda: [SchemeKind.OFT, SchemeKind.NOFT])
    n_hops: Optional[int] = None
    n_max: int = DEFAULT_N_MAX
    sweep: Optional[SweepAxis] = None
    sim: Optional[SimSettings] = None
    out_path: Optional[str] = None
    out_format: str = "csv"
    workers: int = 1

    def network(self, **overrides) -> NetworkConfig:
        values = dict(L=self.L, alpha=self.alpha, p_db=self.p_db, lambda_e=self.lambda_e, epsilon=self.epsilon)
        values.update(overrides)
        p_db = values.pop("p_db")
        try:
            return NetworkConfig(p=db_to_linear(p_db), **values)
        except ValueError as exc:
            raise SpecError(str(exc)) from None

    def metadata(self, command: str) -> dict:
        meta = {
            "command": command,
            "version": __version__,
            "network": {"L": self.L, "alpha": self.alpha, "p_db": self.p_db, "lambda_e": self.lambda_e, "epsilon": self.epsilon},
            "schemes": [s.value for s in self.schemes],
            "n_hops": self.n_hops,
            "n_max": self.n_max,
        }
        if self.sweep is not None:
            meta["sweep"] = asdict(self.sweep)
        if self.sim is not None:
            meta["sim"] = asdict(self.sim)
        return meta


def _parse_schemes(value: str) -> list:
    value = value.strip().lower()
    if value == "both":
        return [SchemeKind.OFT, SchemeKind.NOFT]
    try:
        return [SchemeKind.parse(value)]
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def load_spec(path: Optional[str]) -> ExperimentSpec:
    spec = ExperimentSpec()
    if path is None:
        return spec
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not parser.read(path):
        raise SpecError(f"cannot read config file {path!r}")
    try:
        if parser.has_section("network"):
            sec = parser["network"]
            for key in ("L", "alpha", "p_db", "lambda_e", "epsilon"):
                if key in sec:
                    setattr(spec, key, sec.getfloat(key))
            if "p" in sec:
                raise SpecError("give the transmit SNR as p_db in config files")
        if parser.has_section("design"):
            sec = parser["design"]
            if "scheme" in sec:
                spec.schemes = _parse_schemes(sec["scheme"])
            if "n_hops" in sec:
                spec.n_hops = sec.getint("n_hops")
            if "n_max" in sec:
                spec.n_max = sec.getint("n_max")
        if parser.has_section("sweep"):
            sec = parser["sweep"]
            spec.sweep = SweepAxis(
                axis=sec.get("axis", "").strip(),
                min=sec.getfloat("min"),
                max=sec.getfloat("max"),
                points=sec.getint("points"),
                spacing=sec.get("spacing", "linear").strip(),
            )
        if parser.has_section("sim"):
            sec = parser["sim"]
            spec.sim = SimSettings(
                trials=sec.getint("trials", 100_000),
                master_seed=sec.getint("seed", 0),
                mobility=sec.get("mobility", "independent").strip(),
                region_width=sec.getfloat("region_width", 2000.0),
                region_height=sec.getfloat("region_height", 2000.0),
            )
        if parser.has_section("output"):
            sec = parser["output"]
            spec.out_path = sec.get("path", None)
            spec.out_format = sec.get("format", "csv").strip()
    except (TypeError, ValueError, configparser.Error) as exc:
        raise SpecError(f"{path}: {exc}") from None
    return spec


def _apply_flags(spec: ExperimentSpec, args) -> ExperimentSpec:
    if args.scheme is not None:
        spec.schemes = _parse_schemes(args.scheme)
    if args.hops is not None:
        spec.n_hops = args.hops
    if args.n_max is not None:
        spec.n_max = args.n_max
    if args.trials is not None or args.seed is not None or args.mobility is not None:
        spec.sim = spec.sim or SimSettings()
    if spec.sim is not None:
        if args.trials is not None:
            spec.sim.trials = args.trials
        if args.seed is not None:
            spec.sim.master_seed = args.seed
        if args.mobility is not None:
            spec.sim.mobility = args.mobility
    if args.out is not None:
        spec.out_path = args.out
    if args.format is not None:
        spec.out_format = args.format
    spec.workers = args.workers
    for name in ("L", "alpha", "p_db", "lambda_e", "epsilon"):
        value = getattr(args, name)
        if value is not None:
            setattr(spec, name, value)
    if args.sweep is not None:
        axis, lo, hi, points = args.sweep
        try:
            lo, hi, points = float(lo), float(hi), int(points)
        except ValueError:
            raise SpecError(f"--sweep expects AXIS MIN MAX POINTS (got {' '.join(args.sweep)})") from None
        spec.sweep = SweepAxis(axis, lo, hi, points, args.spacing or "linear")
    elif args.spacing is not None and spec.sweep is not None:
        spec.sweep.spacing = args.spacing
        spec.sweep.__post_init__()
    return spec


def _validate(spec: ExperimentSpec) -> None:
    spec.network()
    if spec.n_hops is not None and spec.n_hops < 1:
        raise SpecError(f"n_hops must be >= 1 (got {spec.n_hops})")
    if spec.n_max < 1:
        raise SpecError(f"n_max must be >= 1 (got {spec.n_max})")
    if spec.out_format not in ("csv", "json"):
        raise SpecError(f"output format must be csv or json (got {spec.out_format!r})")
    if spec.sim is not None:
        if spec.sim.trials < 1:
            raise SpecError(f"trials must be >= 1 (got {spec.sim.trials})")
        try:
            MobilityModel.parse(spec.sim.mobility)
            SimRegion(spec.sim.region_width, spec.sim.region_height)
        except ValueError as exc:
            raise SpecError(str(exc)) from None


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def render_table(rows: list, metadata: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"metadata": metadata, "rows": rows}, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
    columns = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(rows: list, spec: ExperimentSpec, command: str, summary: list) -> None:
    text = render_table(rows, spec.metadata(command), spec.out_format)
    if spec.out_path:
        with open(spec.out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        for line in summary:
            print(line)
        print(f"wrote {len(rows)} rows to {spec.out_path}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _limits(config, scheme, n):
    if config.lambda_e == 0:
        return math.nan, math.nan
    lim = analytics.high_snr_limit(config, scheme, n)
    return lim.r_s_limit, lim.throughput_limit


def cmd_analyze(spec: ExperimentSpec) -> int:
    if spec.n_hops is None:
        raise SpecError("analyze needs a fixed hop count (--hops or [design] n_hops)")
    config = spec.network()
    rows, summary = [], []
    for scheme in spec.schemes:
        rep = analytics.performance(config, scheme, spec.n_hops)
        r_s_lim, u_lim = _limits(config, scheme, spec.n_hops)
        rows.append({
            "scheme": scheme.value,
            "n_hops": rep.n_hops,
            "r_t": rep.rates.r_t,
            "r_s": rep.rates.r_s,
            "r_e": rep.rates.r_e,
            "beta_t": rep.rates.beta_t,
            "beta_e": rep.rates.beta_e,
            "p_t_hop": rep.p_t_hop,
            "p_c_hop": rep.p_c_hop,
            "p_c_path": rep.p_c_path,
            "p_so_hop": rep.p_so_hop,
            "p_so_path": rep.p_so_path,
            "throughput": rep.throughput,
            "r_s_limit": r_s_lim,
            "throughput_limit": u_lim,
        })
        summary.append(
            f"{scheme.value.upper()} N={rep.n_hops}: R_t={rep.rates.r_t:.6g} R_s={rep.rates.r_s:.6g} "
            f"R_e={rep.rates.r_e:.6g} P_so={rep.p_so_path:.6g} U={rep.throughput:.6g}"
        )
    _emit(rows, spec, "analyze", summary)
    return EXIT_OK


def cmd_optimize(spec: ExperimentSpec) -> int:
    config = spec.network()
    rows, summary = [], []
    for scheme in spec.schemes:
        res = optimize_hops(config, scheme, spec.n_max)
        for n, u in res.profile:
            rates = analytics.optimal_rates(config, scheme, n)
            rows.append({
                "scheme": scheme.value,
                "n_hops": n,
                "r_t": rates.r_t,
                "r_s": rates.r_s,
                "r_e": rates.r_e,
                "throughput": u,
                "optimal": n == res.n_star,
            })
        summary.append(f"{scheme.value.upper()}: n_star={res.n_star} U*={res.throughput_star:.6g}")
    _emit(rows, spec, "optimize", summary)
    return EXIT_OK


def _hops_for(spec, config, scheme) -> int:
    if spec.n_hops is not None:
        return spec.n_hops
    return optimize_hops(config, scheme, spec.n_max).n_star


def cmd_simulate(spec: ExperimentSpec) -> int:
    if spec.sim is None:
        spec.sim = SimSettings()
    config = spec.network()
    sim = spec.sim
    region = SimRegion.around_path(config, sim.region_width, sim.region_height)
    rows, summary = [], []
    failed = False
    for scheme in spec.schemes:
        n = _hops_for(spec, config, scheme)
        cmp = validate_against_analytics(
            config, scheme, n, trials=sim.trials, master_seed=sim.master_seed,
            mobility=sim.mobility, region=region, workers=spec.workers,
        )
        for row in cmp.rows:
            rows.append({
                "scheme": scheme.value,
                "n_hops": n,
                "mobility": cmp.report.mobility.value,
                "quantity": row.quantity,
                "analytic": row.analytic,
                "empirical": row.empirical,
                "std_error": row.std_error,
                "z": row.z,
                "test": row.test,
                "flagged": row.flagged,
            })
            summary.append(
                f"{scheme.value.upper()} N={n} {row.quantity}: analytic={row.analytic:.6g} "
                f"empirical={row.empirical:.6g} z={row.z:+.2f}{'  FLAGGED' if row.flagged else ''}"
            )
        failed |= not cmp.ok
    _emit(rows, spec, "simulate", summary)
    return EXIT_ZSCORE if failed else EXIT_OK


def _sweep_point(spec: ExperimentSpec, value) -> dict:
    axis = spec.sweep.axis
    overrides = {} if axis == "n_hops" else {axis: value}
    config = spec.network(**overrides)
    row = {axis: value}
    for scheme in spec.schemes:
        key = scheme.value
        if axis == "n_hops":
            n = int(value)
        else:
            n = _hops_for(spec, config, scheme)
        rep = analytics.performance(config, scheme, n)
        r_s_lim, u_lim = _limits(config, scheme, n)
        row.update({
            f"{key}_n_star": n,
            f"{key}_r_t_star": rep.rates.r_t,
            f"{key}_r_s_star": rep.rates.r_s,
            f"{key}_r_e": rep.rates.r_e,
            f"{key}_p_so": rep.p_so_path,
            f"{key}_throughput": rep.throughput,
            f"{key}_r_s_limit": r_s_lim,
            f"{key}_throughput_limit": u_lim,
        })
        if spec.sim is not None:
            sim = spec.sim
            cmp = validate_against_analytics(
                config, scheme, n, rep.rates, trials=sim.trials, master_seed=sim.master_seed,
                mobility=sim.mobility,
                region=SimRegion.around_path(config, sim.region_width, sim.region_height),
                fixed_quadrature=False,
            )
            row.update({
                f"{key}_p_so_sim": cmp.report.p_so_path.mean,
                f"{key}_p_so_sim_se": cmp.report.p_so_path.std_error,
                f"{key}_throughput_sim": cmp.report.throughput.mean,
                f"{key}_throughput_sim_se": cmp.report.throughput.std_error,
            })
    return row


def cmd_sweep(spec: ExperimentSpec) -> int:
    if spec.sweep is None:
        raise SpecError("sweep needs an axis (--sweep AXIS MIN MAX POINTS or a [sweep] section)")
    values = spec.sweep.values()
    for v in values:
        # surface invalid sweep bounds before any work starts
        if spec.sweep.axis != "n_hops":
            spec.network(**{spec.sweep.axis: v})
        elif v < 1:
            raise SpecError(f"n_hops sweep values must be >= 1 (got {v})")
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda v: _sweep_point(spec, v), values))
    else:
        rows = [_sweep_point(spec, v) for v in values]
    _emit(rows, spec, "sweep", [f"{len(rows)} sweep points over {spec.sweep.axis}"])
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI scenario file")
    common.add_argument("--scheme", choices=["oft", "noft", "both"])
    common.add_argument("--hops", type=int, help="fixed hop count N")
    common.add_argument("--n-max", type=int, dest="n_max", help="largest N searched (default 50)")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--mobility", choices=["independent", "fixed"])
    common.add_argument("--workers", type=int, default=1, help="worker threads (does not change results)")
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--format", choices=["csv", "json"])
    net = common.add_argument_group("network overrides")
    net.add_argument("--L", type=float, dest="L", help="source-destination distance [m]")
    net.add_argument("--alpha", type=float)
    net.add_argument("--p-db", type=float, dest="p_db", help="transmitter-side SNR [dB]")
    net.add_argument("--lambda-e", type=float, dest="lambda_e", help="eavesdropper density [1/m^2]")
    net.add_argument("--epsilon", type=float)
    common.add_argument("--sweep", nargs=4, metavar=("AXIS", "MIN", "MAX", "POINTS"))
    common.add_argument("--spacing", choices=["linear", "log"])

    parser = argparse.ArgumentParser(
        prog="multihop-secrecy",
        description="Secure transmission design for linear multihop relay networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="closed-form metrics at a fixed hop count")
    sub.add_parser("optimize", parents=[common], help="throughput-optimal hop count")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the closed forms")
    sub.add_parser("sweep", parents=[common], help="parameter sweep (p_db, lambda_e or n_hops)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _apply_flags(load_spec(args.config), args)
        _validate(spec)
        return COMMANDS[args.command](spec)
    except SpecError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SlotCapExceeded as exc:
        print(f"error: simulation aborted: {exc}", file=sys.stderr)
        return EXIT_SLOT_CAP


if __name__ == "__main__":
    sys.exit(main())
