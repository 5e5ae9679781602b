"""Command-line front end.

Exit status: 0 success, 1 invalid input, 2 a checked bound was violated,
3 the LP solver returned a numeric warning.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import harness, io
from .mechanism import discount
from .optimal_revenue import brev, drev_bruteforce, myerson_one_good, optimal_rev_lp, srev
from .transport import GroundCost, wasserstein
from .valuation import AllocationSpace

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors, not bound violations
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def validate(self) -> None:
        o = self.options
        for key in ("dist", "x", "y", "menu", "target"):
            if o.get(key) is not None and not Path(o[key]).is_file():
                raise UsageError(f"--{key}: no such file {o[key]!r}")
        if "eta" in o and not 0 < o["eta"] < 1:
            raise UsageError("--eta must lie in (0, 1)")
        if "eps" in o and not o["eps"] > 0:
            raise UsageError("--eps must be positive")
        if "n" in o and o["n"] < 1:
            raise UsageError("--n must be at least 1")
        if "count" in o and o["count"] < 0:
            raise UsageError("--count must be nonnegative")
        if "space" in o:
            AllocationSpace.parse(o["space"])
        if "cost" in o:
            GroundCost.parse(o["cost"])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="revcont", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("rev", help="optimal or class revenue of a distribution")
    r.add_argument("--dist", required=True)
    r.add_argument("--space", default="additive")
    r.add_argument("--class", dest="klass", default="lp",
                   choices=["lp", "myerson", "srev", "brev", "drev"])
    r.add_argument("--out")

    w = sub.add_parser("wasserstein", help="Wasserstein distance between two distributions")
    w.add_argument("--x", required=True)
    w.add_argument("--y", required=True)
    w.add_argument("--cost", default="l1")
    w.add_argument("--plan")

    d = sub.add_parser("discount", help="discount every price of a menu")
    d.add_argument("--menu", required=True)
    d.add_argument("--eta", type=float, required=True)
    d.add_argument("--out")

    v = sub.add_parser("verify", help="run a seeded verification suite")
    v.add_argument("--suite", required=True, choices=harness.SUITES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=100)
    v.add_argument("--out")
    v.add_argument("--format", choices=["csv", "json"], default="csv")

    le = sub.add_parser("learn", help="sample-then-discount learning pipeline")
    le.add_argument("--target", required=True)
    le.add_argument("--n", type=int, required=True)
    le.add_argument("--eps", type=float, required=True)
    le.add_argument("--seed", type=int, default=0)
    le.add_argument("--space", default="additive")
    le.add_argument("--out")

    e = sub.add_parser("examples", help="emit the canned worked instances")
    e.add_argument("--M", type=float, default=100.0)
    e.add_argument("--eps", type=float, default=0.1)
    e.add_argument("--c", type=float, default=4.0)
    e.add_argument("--out")
    return p


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "out", "format")}
    return RunConfig(ns.command, opts, getattr(ns, "out", None), getattr(ns, "format", "json"))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


def dispatch(cfg: RunConfig) -> int:
    cfg.validate()
    o = cfg.options
    if cfg.command == "rev":
        dist = io.load_distribution(o["dist"])
        klass = o["klass"]
        if klass == "lp":
            res = optimal_rev_lp(dist, o["space"])
            if cfg.out:
                Path(cfg.out).write_text(io.to_json(res.to_dict()))
            print(io.fmt(res.value))
            return EXIT_OK if res.status == "optimal" else EXIT_NUMERIC
        if klass == "myerson":
            price, value = myerson_one_good(dist)
            payload = {"price": price, "value": value}
        elif klass == "srev":
            value = srev(dist)
            payload = {"value": value}
        elif klass == "brev":
            value = brev(dist)
            payload = {"value": value}
        else:
            value = drev_bruteforce(dist)
            payload = {"value": value}
        if cfg.out:
            Path(cfg.out).write_text(io.to_json(payload))
        print(io.fmt(value))
        return EXIT_OK

    if cfg.command == "wasserstein":
        x, y = io.load_distribution(o["x"]), io.load_distribution(o["y"])
        value, plan = wasserstein(x, y, o["cost"])
        if o.get("plan"):
            Path(o["plan"]).write_text(io.to_json(plan.to_dict()))
        print(io.fmt(value))
        return EXIT_OK

    if cfg.command == "discount":
        menu = io.load_menu(o["menu"])
        _emit(io.dump_menu(discount(menu, o["eta"])) + "\n", cfg.out)
        return EXIT_OK

    if cfg.command == "verify":
        reports = list(harness.run_suite(o["suite"], o["seed"], o["count"], harness.report_tolerance()))
        text = io.emit_report(reports, cfg.format, cfg.out)
        if not cfg.out:
            sys.stdout.write(text)
        failed = sum(not r.holds for r in reports)
        print(f"{o['suite']}: {len(reports)} reports, {failed} violations", file=sys.stderr)
        return EXIT_VIOLATION if failed else EXIT_OK

    if cfg.command == "learn":
        target = io.load_distribution(o["target"])
        rep = harness.learn_pipeline(target, o["n"], o["eps"], o["seed"], o["space"])
        _emit(io.to_json(rep.to_dict()), cfg.out)
        # the guarantee is conditional on the realized distance meeting the budget
        if rep.within_budget and rep.regret > 2 * rep.eps + harness.report_tolerance():
            return EXIT_VIOLATION
        return EXIT_OK

    if cfg.command == "examples":
        ex = harness.sharp_examples(M=o["M"], eps=o["eps"], c=o["c"])
        _emit(io.to_json({k: v.to_dict() for k, v in ex.items()}), cfg.out)
        return EXIT_OK

    raise UsageError(f"unknown command {cfg.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return dispatch(parse_config(argv))
    except (UsageError, ValueError, KeyError, TypeError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
