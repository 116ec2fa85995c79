"""Command-line entry point: ``stereoloc {simulate,localize,sweep,selftest}``.

Exit codes: 0 success, 1 validation error (bad config or arguments, or a
failing selftest), 2 numerical failure.  ``LOCALIZER_LOG`` sets the log
level (error, warn, info, debug).
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys

from . import acceptance, config, report
from .errors import ConfigError, NumericalError, ValidationError

log = logging.getLogger("stereoloc")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}


def _setup_logging():
    name = os.environ.get("LOCALIZER_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(name, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if name not in LOG_LEVELS:
        log.warning("unknown LOCALIZER_LOG=%r, using 'warn'", name)


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="stereoloc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON scenario file")
        src.add_argument("--preset", choices=config.PRESETS, help="built-in scenario")
        sp.add_argument("--events", type=_positive_int, default=None,
                        help="number of random events (overrides the config)")
        sp.add_argument("--seed", type=_positive_int, default=None, help="event seed (overrides the config)")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--tolerance", type=_positive_float, default=None,
                        help="oracle tolerance used for row flags")

    scenario_args(sub.add_parser("simulate", help="forward simulation only"))
    scenario_args(sub.add_parser("localize", help="full localization protocol"))
    sw = sub.add_parser("sweep", help="rerun a scenario over a parameter grid")
    scenario_args(sw)
    sw.add_argument("--param", required=True,
                    help="dotted path into the config, e.g. events.radius or emitters.1.worldline.rate")
    sw.add_argument("--values", required=True, help="comma-separated numbers")

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("--tolerance", type=_positive_float, default=0.0,
                    help="raise every criterion tolerance to at least this value")
    st.add_argument("--fault", default=None,
                    help="corrupt one stamp of the first fixture event, e.g. s0.fifth")
    st.add_argument("--criteria", default=None, help="comma-separated criterion numbers (default 1-11)")
    return p


def _load(args):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(args.config, f"cannot read config: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(args.config, f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    else:
        doc = config.preset(args.preset)
    doc = copy.deepcopy(doc)
    events = doc.setdefault("events", {})
    if args.events is not None:
        events.pop("list", None)
        events["count"] = args.events
    if args.seed is not None:
        events["seed"] = args.seed
    return doc


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _run(args, mode):
    cfg = config.parse_config(_load(args))
    fmt = args.format or cfg.output_format
    log.info("scenario %s, %d events, seed %d", cfg.scenario_hash(), cfg.events.count, cfg.seed)
    rep = report.run_scenario(cfg, mode, args.tolerance)
    _emit(report.render(rep, fmt), args.out)
    failed = [r for r in rep.rows if r["flags"].startswith("error")]
    for r in failed:
        log.error("event %d: %s", r["index"], r["flags"])
    return 2 if failed else 0


def _set_path(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        try:
            node = node[int(k)] if isinstance(node, list) else node[k]
        except (KeyError, IndexError, ValueError):
            raise ConfigError(f"--param {dotted}", f"no field {k!r}") from None
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ConfigError(f"--param {dotted}", "not a field")


def _sweep(args):
    base = _load(args)
    try:
        values = [float(v) for v in args.values.split(",")]
    except ValueError:
        raise ConfigError("--values", "expected comma-separated numbers") from None
    cols = ["param", "value", "scenario_hash", "seed", "events", "flagged",
            "max_oracle_delta", "max_roundtrip_residual", "max_constraint"]
    rows = []
    for v in values:
        doc = copy.deepcopy(base)
        _set_path(doc, args.param, v)
        cfg = config.parse_config(doc)
        rep = report.run_scenario(cfg, "localize", args.tolerance)
        rows.append({
            "param": args.param, "value": v, "scenario_hash": rep.scenario_hash, "seed": rep.seed,
            "events": len(rep.rows), "flagged": rep.n_flagged,
            "max_oracle_delta": rep.max_abs("oracle_delta"),
            "max_roundtrip_residual": rep.max_abs("roundtrip_residual"),
            "max_constraint": rep.max_abs("constraint") if cfg.dimension == 4 else float("nan"),
        })
    summary = report.LocalizationReport("sweep", base.get("dimension"), "", rows[0]["seed"],
                                        cols, rows)
    fmt = args.format or "csv"
    _emit(report.render(summary, fmt), args.out)
    return 0


def _selftest(args):
    numbers = range(1, 12)
    if args.criteria:
        numbers = [int(n) for n in args.criteria.split(",")]
    if args.tolerance:
        print(f"tolerances raised to at least {args.tolerance:g}")
    if args.fault:
        try:
            acceptance.check_fault_name(args.fault)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"fault injected: stamp {args.fault} shifted by {acceptance.FAULT_SIZE:g}")
    results = acceptance.run_all(numbers, args.tolerance, args.fault, echo=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return _selftest(args)
        if args.command == "sweep":
            return _sweep(args)
        return _run(args, args.command)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
