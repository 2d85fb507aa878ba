"""Command-line entry point: ``gridapprox <subcommand> ...``.

Exit codes: 0 success, 1 domain or input error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import experiments as E
from . import sets as S
from . import vcdim as V
from .errors import ConfigError, GridApproxError

SEED_ENV = "GRIDAPPROX_SEED"
log = logging.getLogger("gridapprox")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", path) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", path) from exc


def _resolve_seed(flag, cfg_seed):
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return cfg_seed


def _load_config(args):
    cfg = E.ExperimentConfig.from_dict(_load_json(args.config), args.config)
    cfg.seed = _resolve_seed(args.seed, cfg.seed)
    if getattr(args, "mc_samples", None) is not None:
        cfg.mc_samples = args.mc_samples
    return cfg


def cmd_run(args):
    cfg = _load_config(args)
    summary = E.run_experiment(cfg, args.out, threads=args.threads)
    print(json.dumps(summary, indent=2, sort_keys=True))


def cmd_compute_bound(args):
    make = V.UCBoundParams.one_way if args.one_way else V.UCBoundParams.two_way
    try:
        params = make(args.d, args.eps, args.delta)
        value = V.m_uc(params)
    except ValueError as exc:
        raise GridApproxError(str(exc)) from exc
    print(json.dumps({"m_uc": value, "K": params.K, "K_prime": params.K_prime, "d": params.d,
                      "eps": params.eps, "delta": params.delta,
                      "variant": "one-way" if args.one_way else "two-way"}))


def cmd_vc(args):
    obj = _load_json(args.family)
    try:
        fam = V.family_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad family: {exc}", args.family) from exc
    print(json.dumps({"vc_dimension": V.vc_dimension(fam), "universe_size": fam.n,
                      "distinct_sets": len(fam.traces()), "sauer_bound_holds": V.sauer_bound_check(fam)}))


def cmd_svc(args):
    obj = _load_json(args.config)
    try:
        pool = [S.target_from_json(t, args.config, f"pool[{k}]") for k, t in enumerate(obj["pool"])]
        w, z, axis = obj["w"], obj["z"], obj.get("axis", S.VERTICAL)
    except KeyError as exc:
        raise ConfigError("missing required field", args.config, exc.args[0]) from exc
    print(json.dumps({"svc_lower_bound": V.svc_lower_bound(pool, (w, z), axis), "axis": axis}))


def _load_cloud(path):
    obj = _load_json(path)
    pts = obj.get("points") if isinstance(obj, dict) else obj
    try:
        return S.PointCloud(pts)
    except (GridApproxError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad point cloud: {exc}", path, "points") from exc


def cmd_hausdorff(args):
    print(json.dumps({"hausdorff": S.hausdorff(_load_cloud(args.a), _load_cloud(args.b))}))


def cmd_render(args):
    cfg = _load_config(args)
    g, lab, h, _ = E._approximate(cfg, cfg.targets[0], E.trial_seed(cfg.seed, args.trial))
    path = E.render_svg(g, cfg.targets[0], h, args.out, labels=lab)
    print(json.dumps({"svg": str(path)}))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridapprox", description="Grid-based approximate definability toolkit.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=lambda s: int(s, 0))
    run.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    run.add_argument("--mc-samples", type=int)
    run.set_defaults(func=cmd_run)

    cb = sub.add_parser("compute-bound", help="uniform-convergence sample bound m^UC")
    cb.add_argument("--d", type=int, required=True)
    cb.add_argument("--eps", type=float, required=True)
    cb.add_argument("--delta", type=float, required=True)
    cb.add_argument("--one-way", action="store_true")
    cb.set_defaults(func=cmd_compute_bound)

    vc = sub.add_parser("vc", help="VC dimension of a finite family (JSON)")
    vc.add_argument("family")
    vc.set_defaults(func=cmd_vc)

    svc = sub.add_parser("svc", help="slice VC lower bound for a pool of sets")
    svc.add_argument("--config", required=True)
    svc.set_defaults(func=cmd_svc)

    hd = sub.add_parser("hausdorff", help="Hausdorff distance between two point-cloud files")
    hd.add_argument("a")
    hd.add_argument("b")
    hd.set_defaults(func=cmd_hausdorff)

    rd = sub.add_parser("render", help="render one trial of an experiment config as SVG")
    rd.add_argument("--config", required=True)
    rd.add_argument("--out", required=True, help="SVG file path")
    rd.add_argument("--seed", type=lambda s: int(s, 0))
    rd.add_argument("--trial", type=int, default=0)
    rd.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except GridApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
