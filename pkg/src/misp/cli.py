"""Command line front-end: ``run`` experiments, ``verify`` the acceptance suite,
``gen`` instances."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .errors import ResourceLimitError
from .harness import ALGORITHMS, FAMILIES, ORDERS, ArrivalOrder, SecretaryInstance, build_algorithm, generate_instance, monte_carlo

EXIT_CONFIG = 2
EXIT_RESOURCE = 3

RUN_DEFAULTS = {"algo": None, "trials": 1000, "seed": 0, "order": "uniform", "threads": None,
                "out_json": None, "out_csv": None, "p": None, "instance": None}


class ConfigError(ValueError):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="misp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment")
    run.add_argument("--config", help="JSON config file; command-line flags override its keys")
    run.add_argument("--instance", help="instance JSON file")
    run.add_argument("--algo", help=f"one of {', '.join(ALGORITHMS)}")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--order", help=f"{', '.join(ORDERS)} or a comma-separated permutation")
    run.add_argument("--threads", type=int, help="worker processes (default: CPU count)")
    run.add_argument("--out-json", dest="out_json")
    run.add_argument("--out-csv", dest="out_csv")
    run.add_argument("-p", dest="p", help="sampling probability override, e.g. 0.5 or 2/3")
    run.add_argument("--quiet", action="store_true", help="suppress the summary table")

    ver = sub.add_parser("verify", help="run the acceptance suite")
    ver.add_argument("--only", help="comma-separated criterion numbers")

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--family", required=True, help=f"one of {', '.join(FAMILIES)}")
    gen.add_argument("--size", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--out", help="output path (default: stdout)")
    return ap


def load_config(args) -> dict:
    cfg = dict(RUN_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(RUN_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def resolve_instance(value, base_dir: str = ".") -> SecretaryInstance:
    if value is None:
        raise ConfigError("no instance given (--instance or config 'instance')")
    try:
        if isinstance(value, dict):
            return SecretaryInstance.from_dict(value)
        path = value if os.path.isabs(value) else os.path.join(base_dir, value)
        return SecretaryInstance.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read instance: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed instance: {exc}") from exc


def _parse_p(value):
    if value is None:
        return None
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad -p value {value!r}") from exc


def summary_table(report, algo: str, bound_label: str) -> str:
    margin = report.margin
    status = "n/a" if margin is None else ("PASS" if margin >= 0 else "FAIL")
    rows = [
        ("algorithm", algo),
        ("order", report.order),
        ("trials", str(report.trials)),
        ("seed", str(report.seed)),
        ("OPT value", str(report.opt_value)),
        ("mean ratio", f"{report.mean_ratio:.6f}"),
        ("std error", f"{report.stderr:.6f}"),
        ("bound", f"{report.bound} = {float(report.bound):.6f} ({bound_label})" if report.bound is not None else "-"),
        ("bound - 3 SE", "-" if report.threshold is None else f"{report.threshold:.6f}"),
        ("margin", "-" if margin is None else f"{margin:+.6f} {status}"),
        ("wall time", f"{report.wall_time:.2f}s"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def cmd_run(args) -> int:
    cfg = load_config(args)
    base_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    inst = resolve_instance(cfg["instance"], base_dir)
    if not cfg["algo"]:
        raise ConfigError("no algorithm given (--algo)")
    try:
        trials, seed = int(cfg["trials"]), int(cfg["seed"])
        order = ArrivalOrder.parse(cfg["order"])
        threads = int(cfg["threads"]) if cfg["threads"] is not None else (os.cpu_count() or 1)
        if trials < 1 or threads < 1:
            raise ValueError("trials and threads must be >= 1")
        choice = build_algorithm(cfg["algo"], inst, _parse_p(cfg["p"]))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    report = monte_carlo(inst, choice.factory, order, trials, seed, workers=threads,
                         label=choice.name, bound=choice.bound)
    if cfg["out_json"]:
        with open(cfg["out_json"], "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_json())
    if cfg["out_csv"]:
        with open(cfg["out_csv"], "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
    if not args.quiet:
        print(summary_table(report, choice.name, choice.bound_label))
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all

    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError as exc:
            raise ConfigError(f"bad --only value {args.only!r}") from exc
    results = run_all(only)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


def cmd_gen(args) -> int:
    try:
        inst = generate_instance(args.family, args.size, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.out:
        inst.save(args.out)
    else:
        json.dump(inst.to_dict(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": cmd_run, "verify": cmd_verify, "gen": cmd_gen}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
