"""Command line entry point: ``frontlab <command> --config PATH``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis as an
from . import config as cf
from . import front as fr
from . import sim
from . import spectral as sp
from .errors import ConfigError, FrontLabError, ValidationError
from .runner import build_front, dump_json, run_experiment, sweep, validate

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_ACCEPT = 0, 1, 2, 3


def _config(args) -> cf.ExperimentConfig:
    if args.config:
        return cf.load(args.config, args.override)
    return cf.loads("", args.override)


def _out(args, cfg):
    d = args.out or cfg.out_dir
    os.makedirs(d, exist_ok=True)
    return d


def cmd_front(args):
    cfg = _config(args)
    front, _ = build_front(cfg)
    d = _out(args, cfg)
    fr.write_front_csv(front, os.path.join(d, "front.csv"))
    fr.write_front_json(front, os.path.join(d, "front.json"))
    print(json.dumps(fr.front_summary(front), sort_keys=True, indent=1))
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    manifest = run_experiment(cfg, _out(args, cfg))
    print(json.dumps(manifest["results"], sort_keys=True, indent=1))
    return EXIT_OK


def cmd_proportion(args):
    cfg = _config(args)
    front, _ = build_front(cfg)
    rows = {}
    for label, spec in cfg.build_components():
        v0 = sim.init_component(front, spec).v
        rows[label] = an.proportion(v0, front, pulled_convention=args.pulled_zero)
    print(json.dumps({"classification": front.classification.value, "p": rows}, sort_keys=True, indent=1))
    return EXIT_OK


def cmd_spectrum(args):
    cfg = _config(args)
    front, term = build_front(cfg)
    res = sp.spectrum(front, term, cfg.spectrum_m)
    d = _out(args, cfg)
    sp.write_spectrum_csv(res, os.path.join(d, "spectrum.csv"))
    sp.write_ground_state_csv(res, front, os.path.join(d, "ground_state.csv"))
    summary = {
        "eigenvalues": [float(v) for v in res.eigenvalues],
        "essential_edge": res.essential_edge,
        "gap": res.gap,
        "gap_unreliable": res.gap_unreliable,
        "cosine_to_kernel": sp.cosine_similarity(res.ground_state, sp.kernel_reference(front)),
    }
    dump_json(summary, os.path.join(d, "spectrum.json"))
    print(json.dumps(summary, sort_keys=True, indent=1))
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()] if args.values else []
    summary = sweep(cfg, args.param, values, args.parallelism, args.out or cfg.out_dir)
    print(json.dumps(summary, sort_keys=True, indent=1))
    return EXIT_OK


def cmd_validate(args):
    cfg = _config(args)
    rep = validate(cfg)
    print(rep.render())
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_accept(args):
    from .acceptance import run_all

    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_OK if not failed else EXIT_ACCEPT


def build_parser():
    p = argparse.ArgumentParser(prog="frontlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--config", help="experiment config file")
        sp_.add_argument("--out", help="output directory (overrides [output] dir)")
        sp_.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="section.key=value, repeatable")
        sp_.add_argument("--parallelism", type=int, default=1)
        return sp_

    common(sub.add_parser("front", help="build or solve the front")).set_defaults(fn=cmd_front)
    common(sub.add_parser("simulate", help="run an experiment")).set_defaults(fn=cmd_simulate)
    q = common(sub.add_parser("proportion", help="p of every configured component"))
    q.add_argument("--pulled-zero", action="store_true", help="report p = 0 for pulled fronts instead of failing")
    q.set_defaults(fn=cmd_proportion)
    common(sub.add_parser("spectrum", help="spectral data of the linearized operator")).set_defaults(fn=cmd_spectrum)
    s = common(sub.add_parser("sweep", help="run one experiment per parameter value"))
    s.add_argument("--param", required=True, choices=("a", "rho", "alpha", "dx", "dt"))
    s.add_argument("--values", default="", help="comma-separated values")
    s.set_defaults(fn=cmd_sweep)
    common(sub.add_parser("validate", help="dry-run checks of a config")).set_defaults(fn=cmd_validate)
    common(sub.add_parser("accept", help="run the acceptance checks")).set_defaults(fn=cmd_accept)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FrontLabError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
