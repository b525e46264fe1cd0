"""Command-line front end.

Every option can also come from a JSON config file (``--config``); flags
given on the command line override the file. Exit codes: 0 success,
1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import dpcsim, oracle, regions, svgplot
from .ginfo import ChannelParams

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CHANNEL_KEYS = ("p1", "p2", "sigma2", "c12", "c21", "q")

# per-command options and their defaults; channel keys are shared
DEFAULTS = {
    "region": {"n_beta": 201, "n_dir": 181, "kind": "cg", "out": None, "svg": None,
               "units": "nats"},
    "point": {"r1": None, "r2": None, "kind": "cg", "n_beta": 201, "n_dir": 181,
              "tol": 1e-9, "units": "nats"},
    "verify": {"n_beta": 201, "n_dir": 181, "tol": 2e-3, "sweep": False, "refine": True},
    "oracle": {"n_triples": 1000, "seed": 0, "max_support": 4, "tol": 1e-4, "out": None},
    "simulate": {"beta1": 0.5, "beta2": 0.5, "r1": 0.0, "r2": 0.0, "n": 64, "trials": 100,
                 "seed": 0, "noise_model": "gaussian", "decode_order": "common-1-2",
                 "out": None, "units": "nats"},
}
CHANNEL_DEFAULTS = {"p1": 1.0, "p2": 1.0, "sigma2": 1.0, "c12": 0.0, "c21": 0.0, "q": 0.0}


class ConfigError(ValueError):
    pass


def _channel_args(p):
    g = p.add_argument_group("channel")
    g.add_argument("--p1", type=float, help="power of transmitter 1 (default 1)")
    g.add_argument("--p2", type=float, help="power of transmitter 2 (default 1)")
    g.add_argument("--sigma2", type=float, help="noise variance (default 1)")
    g.add_argument("--c12", type=float, help="conference capacity 1 -> 2, nats (default 0)")
    g.add_argument("--c21", type=float, help="conference capacity 2 -> 1, nats (default 0)")
    g.add_argument("--q", type=float, help="interference variance (default 0)")
    p.add_argument("--config", help="JSON file with any of the options below")


def _grid_args(p, tol):
    p.add_argument("--n-beta", dest="n_beta", type=int, help="power-split grid points per axis")
    p.add_argument("--n-dir", dest="n_dir", type=int, help="number of support directions")
    p.add_argument("--tol", type=float, help=f"tolerance (default {tol:g})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confmac",
        description="Gaussian MAC with conferencing encoders: regions, checks, simulation.",
        argument_default=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="export the boundary of a rate region",
                       argument_default=argparse.SUPPRESS)
    _channel_args(p)
    p.add_argument("--n-beta", dest="n_beta", type=int, help="power-split grid points per axis")
    p.add_argument("--n-dir", dest="n_dir", type=int, help="number of support directions")
    p.add_argument("--kind", choices=("cg", "ach"), help="capacity (cg) or successive decoding (ach)")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--svg", help="also plot both region boundaries to this SVG file")
    p.add_argument("--units", choices=("nats", "bits"))

    p = sub.add_parser("point", help="test whether a rate pair lies in a region",
                       argument_default=argparse.SUPPRESS)
    _channel_args(p)
    p.add_argument("--r1", type=float, help="rate of user 1")
    p.add_argument("--r2", type=float, help="rate of user 2")
    p.add_argument("--kind", choices=("cg", "ach"))
    p.add_argument("--units", choices=("nats", "bits"), help="units of --r1/--r2")
    _grid_args(p, DEFAULTS["point"]["tol"])

    p = sub.add_parser("verify", help="check that the two regions coincide",
                       argument_default=argparse.SUPPRESS)
    _channel_args(p)
    _grid_args(p, DEFAULTS["verify"]["tol"])
    p.add_argument("--sweep", action="store_true",
                   help="run the 36-channel sweep instead of the given channel")
    p.add_argument("--no-refine", dest="refine", action="store_false",
                   help="use the power-split grid alone, without local search")

    p = sub.add_parser("oracle", help="Gaussian-dominance suite on random discrete triples",
                       argument_default=argparse.SUPPRESS)
    _channel_args(p)
    p.add_argument("--n-triples", dest="n_triples", type=int)
    p.add_argument("--seed", type=int, help="seed of the first triple")
    p.add_argument("--max-support", dest="max_support", type=int,
                   help=f"largest support size, at most {oracle.MAX_SUPPORT}")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="write per-triple records here")

    p = sub.add_parser("simulate", help="Monte Carlo run of the dirty-paper scheme",
                       argument_default=argparse.SUPPRESS)
    _channel_args(p)
    p.add_argument("--beta1", type=float, help="private power fraction of user 1")
    p.add_argument("--beta2", type=float, help="private power fraction of user 2")
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--n", type=int, help="blocklength")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--noise-model", dest="noise_model", choices=dpcsim.NOISE_MODELS)
    p.add_argument("--decode-order", dest="decode_order", choices=dpcsim.DECODE_ORDERS)
    p.add_argument("--units", choices=("nats", "bits"), help="units of --r1/--r2")
    p.add_argument("--out", help="write the key=value report here")
    return parser


def resolve_config(command: str, flags: dict) -> dict:
    """Defaults, then the JSON file, then command-line flags."""
    allowed = dict(CHANNEL_DEFAULTS, **DEFAULTS[command])
    cfg = dict(allowed)
    path = flags.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if doc.pop("command", command) != command:
            raise ConfigError("config file is for a different command")
        unknown = sorted(set(doc) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}")
        cfg.update(doc)
    cfg.update(flags)
    return cfg


def _params(cfg) -> ChannelParams:
    return ChannelParams(**{k: float(cfg[k]) for k in CHANNEL_KEYS})


def _unit_factor(units) -> float:
    if units not in ("nats", "bits"):
        raise ConfigError(f"units must be nats or bits, got {units!r}")
    return math.log(2.0) if units == "bits" else 1.0


def cmd_region(cfg, out=None) -> int:
    out = out or sys.stdout
    params = _params(cfg)
    n_beta, n_dir = int(cfg["n_beta"]), int(cfg["n_dir"])
    _unit_factor(cfg["units"])
    region = regions.build_region(cfg["kind"], params, n_beta, n_dir)
    if cfg["out"]:
        regions.write_csv(region, cfg["out"], cfg["units"])
        print(f"wrote {len(region.directions)} directions to {cfg['out']}", file=out)
    else:
        regions.write_csv(region, out, cfg["units"])
    if cfg["svg"]:
        f = 1.0 / _unit_factor(cfg["units"])
        series = []
        for kind in ("cg", "ach"):
            r = region if kind == cfg["kind"] else regions.build_region(kind, params, n_beta, n_dir)
            pts = [(x * f, y * f) for x, y in r.boundary if x > 0 or y > 0]
            series.append((kind.upper(), pts))
        unit = cfg["units"]
        with open(cfg["svg"], "w") as fh:
            fh.write(svgplot.line_plot(series, f"R1 [{unit}]", f"R2 [{unit}]"))
        if cfg["out"]:
            print(f"wrote {cfg['svg']}", file=out)
    return EXIT_OK


def cmd_point(cfg, out=None) -> int:
    out = out or sys.stdout
    if cfg["r1"] is None or cfg["r2"] is None:
        raise ConfigError("point needs --r1 and --r2")
    f = _unit_factor(cfg["units"])
    pair = regions.RatePair(float(cfg["r1"]) * f, float(cfg["r2"]) * f)
    region = regions.build_region(cfg["kind"], _params(cfg), int(cfg["n_beta"]), int(cfg["n_dir"]))
    inside = regions.contains(region, pair, float(cfg["tol"]))
    lam = region.directions
    slack = float(np.min(region.support_values - (lam * pair.r1 + (1 - lam) * pair.r2)))
    print(f"({cfg['r1']}, {cfg['r2']}) {cfg['units']}: "
          f"{'inside' if inside else 'outside'} {cfg['kind']} (slack {slack / f:.6g})", file=out)
    return EXIT_OK if inside else EXIT_FAIL


def cmd_verify(cfg, out=None) -> int:
    out = out or sys.stdout
    n_beta, n_dir, tol = int(cfg["n_beta"]), int(cfg["n_dir"]), float(cfg["tol"])
    refine = bool(cfg["refine"])
    if cfg["sweep"]:
        cases = regions.verify_sweep(n_beta, n_dir, tol, refine)
    else:
        params = _params(cfg)
        cases = [(params, regions.verify_regions_equal(params, n_beta, n_dir, tol, refine))]
    failed = 0
    for p, rep in cases:
        status = "equal" if rep.equal else "DIFFERENT"
        print(f"p1={p.p1:g} p2={p.p2:g} sigma2={p.sigma2:g} c12={p.c12:g} c21={p.c21:g} "
              f"{status} distance={rep.distance:.3e} worst_lambda={rep.worst_direction:.4f} "
              f"ach_excess={rep.ach_excess:.3e} tol={tol:g}", file=out)
        failed += not rep.equal
    print(f"{len(cases) - failed}/{len(cases)} channels equal", file=out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_oracle(cfg, out=None) -> int:
    out = out or sys.stdout
    params = _params(cfg)
    n = int(cfg["n_triples"])
    if n < 1:
        raise ConfigError("n_triples must be at least 1")
    records, failing = [], []
    worst = math.inf
    for seed, m, a, rep in oracle.run_suite(params, n, int(cfg["seed"]),
                                            int(cfg["max_support"]), float(cfg["tol"])):
        records.append(oracle.format_record(seed, m, a, rep))
        worst = min(worst, float(np.min(rep.margins)))
        if not rep.chain_holds:
            failing.append(seed)
    text = "\n".join(records) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    print(f"{n - len(failing)}/{n} triples dominated; worst margin {worst:.3e}", file=out)
    if failing:
        print("failing seeds: " + " ".join(map(str, failing)), file=out)
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(cfg, out=None) -> int:
    out = out or sys.stdout
    f = _unit_factor(cfg.pop("units"))
    target = cfg.pop("out")
    sim = {k: v for k, v in cfg.items() if k not in ("r1", "r2")}
    sim["r1"] = float(cfg["r1"]) * f
    sim["r2"] = float(cfg["r2"]) * f
    config = dpcsim.config_from_dict(sim)
    books = dpcsim.make_codebooks(config)
    rep = dpcsim.run_trials(config, books)
    if target:
        with open(target, "w") as fh:
            fh.write(rep.to_text())
    lo, hi = rep.wilson_interval_joint
    p = config.params
    print(f"n={rep.n} trials={rep.trials_run} joint error rate {rep.joint_error_rate:.4f} "
          f"(95% Wilson [{lo:.4f}, {hi:.4f}])", file=out)
    print(f"errors: common={rep.errors_common} m1={rep.errors_m1} m2={rep.errors_m2} "
          f"joint={rep.errors_joint}", file=out)
    print(f"power: user1={rep.empirical_power_1:.4f} (bound {rep.power_bound(p.p1):.4f}) "
          f"user2={rep.empirical_power_2:.4f} (bound {rep.power_bound(p.p2):.4f}) "
          f"backoff={books.backoff:.4f}", file=out)
    if not target:
        out.write(rep.to_text())
    return EXIT_OK


COMMANDS = {
    "region": cmd_region,
    "point": cmd_point,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve_config(command, args)
        return COMMANDS[command](cfg)
    except (ValueError, TypeError, OSError) as exc:
        # DeskScaleError, InvalidCovarianceError and ConfigError are ValueErrors
        print(f"confmac {command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
