"""Command line: c2, family, reduce, poly and transfer subcommands.

Exit codes: 0 success, 1 failed check, 2 usage, 3 point budget, 4 routes disagree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

from c2kit import __version__
from c2kit.engine import (
    BudgetExceeded,
    C2Error,
    C2Result,
    c2_coeff_graph,
    c2_direct,
    c2_dodgson,
    default_workers,
    denom_reduce,
    eligible,
)
from c2kit.graph_polys import DodgsonSpec, dodgson, forest_poly, kirchhoff
from c2kit.graphs import GraphError, SetPartition, parse_graph

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_DISAGREE = 0, 1, 2, 3, 4

GRAPH_ROUTES = ("direct", "dodgson1", "dodgson2", "five", "coeff", "denom")
FORMATS = ("json", "csv", "table")
CSV_COLUMNS = ("family", "n", "p", "route", "c2", "elapsed_ms")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Preset:
    kind: str
    p: int
    lo: int
    hi: int
    routes: tuple[str, ...]
    verify: bool = False
    fit: bool = False


PRESETS = {
    "zigzag-p2": Preset("1,2", 2, 5, 12, ("direct", "dodgson", "denom"), verify=True),
    "zigzag-p3": Preset("1,2", 3, 5, 8, ("direct", "dodgson", "denom"), verify=True),
    "c13-p2": Preset("1,3", 2, 7, 14, ("direct", "transfer"), verify=True, fit=True),
    "c23-table": Preset("2,3", 2, 7, 13, ("direct", "table", "transfer")),
    "2k2-p2": Preset("2k2", 2, 3, 6, ("direct",), verify=True),
}


@dataclass
class RunConfig:
    """Validated options shared by the subcommands."""

    command: str
    p: int = 2
    routes: tuple[str, ...] = ("direct",)
    fmt: str = "json"
    meta: bool = True
    workers: int | None = None
    budget: int | None = None
    extra: dict = field(default_factory=dict)


def _int_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _apply_environment(cfg: RunConfig) -> None:
    if cfg.workers is not None:
        os.environ["C2KIT_WORKERS"] = str(cfg.workers)
    if cfg.budget is not None:
        os.environ["C2KIT_POINT_BUDGET"] = str(cfg.budget)


def _meta(cfg: RunConfig) -> dict:
    return {
        "version": __version__,
        "python": platform.python_version(),
        "workers": cfg.workers or default_workers(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def emit(records: list[dict], cfg: RunConfig, out=None, columns: Sequence[str] | None = None) -> None:
    out = out or sys.stdout
    if cfg.fmt == "json":
        doc: dict = {"records": records}
        if cfg.meta:
            doc["meta"] = _meta(cfg)
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return
    cols = list(columns or sorted({k for r in records for k in r}))
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow({k: _cell(r.get(k)) for k in cols})
        out.write(buf.getvalue())
        return
    rows = [[_cell(r.get(k)) for k in cols] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(cols)]
    out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


# ---------------------------------------------------------------- c2


def _graph_result(g, p: int, route: str, edges: list[int] | None, cfg: RunConfig) -> C2Result:
    kw = {"workers": cfg.workers, "budget": cfg.budget}
    if route == "direct":
        return c2_direct(g, p, **kw)
    if route in ("dodgson1", "dodgson2", "five"):
        variant = {"dodgson1": 1, "dodgson2": 2, "five": 3}[route]
        return c2_dodgson(g, p, variant, edges, **kw)
    if route == "coeff":
        if p != 2:
            raise UsageError(f"unsupported (route coeff, p={p}): the coefficient route is p=2 only")
        return c2_coeff_graph(g, edges)
    res = denom_reduce(g, edges, p, **kw)
    if res.c2 is None:
        raise UsageError("route denom needs an eligible graph (2 + E <= 2V)")
    return res.c2


def cmd_c2(args: argparse.Namespace, cfg: RunConfig) -> int:
    g = parse_graph(args.graph)
    routes = cfg.routes
    if routes == ("all",):
        routes = ("direct",)
        if eligible(g) and g.edge_count >= 5:
            routes += ("dodgson1", "dodgson2", "five") + (("coeff",) if cfg.p == 2 else ()) + ("denom",)
    edges = _int_list(args.edges)
    results = [_graph_result(g, cfg.p, r, edges, cfg) for r in routes]
    for r in results:
        r.graph = args.graph
    records = sorted((r.to_record(cfg.meta) for r in results), key=lambda r: r["method"])
    emit(records, cfg)
    values = {r.value for r in results}
    if len(values) > 1:
        detail = ", ".join(f"{r.method}={r.value}" for r in results)
        print(f"routes disagree: {detail}", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


# ---------------------------------------------------------------- family


def _family_rows(fam, route: str) -> list[dict]:
    from c2kit.recurrences.families import c2_sequence

    rows = []
    if route in ("transfer", "table"):
        t0 = time.perf_counter()
        seq = c2_sequence(fam, route)
        each = (time.perf_counter() - t0) / max(1, len(seq))
        return [_row(fam, x, route, v, each) for x, v in seq]
    for x in fam.params:
        t0 = time.perf_counter()
        sub = type(fam)(fam.kind, fam.p, x, x)
        (_, v), = c2_sequence(sub, route)
        rows.append(_row(fam, x, route, v, time.perf_counter() - t0))
    return rows


def _row(fam, x: int, route: str, value: int, elapsed: float) -> dict:
    return {"family": fam.kind, "n": x, "p": fam.p, "route": route, "c2": value, "elapsed_ms": round(elapsed * 1000, 3)}


def cmd_family(args: argparse.Namespace, cfg: RunConfig) -> int:
    from c2kit.recurrences.families import FamilySpec, check_route, verify_closed_form
    from c2kit.recurrences.fit import fit_values

    if args.preset:
        pre = PRESETS[args.preset]
        kind, p, lo, hi, routes = pre.kind, pre.p, pre.lo, pre.hi, pre.routes
        verify, fit = pre.verify or args.verify_paper, pre.fit or args.fit
    else:
        if not args.kind or not args.range:
            raise UsageError("family needs --kind and --range (or --preset)")
        from c2kit.recurrences.families import parse_range

        kind, p, routes = args.kind, cfg.p, cfg.routes
        lo, hi = parse_range(args.range)
        verify, fit = args.verify_paper, args.fit
    fam = FamilySpec(kind, p, lo, hi)
    for r in routes:
        check_route(fam, r)
    rows = []
    for r in routes:
        rows.extend(_family_rows(fam, r))
    rows.sort(key=lambda r: (r["n"], r["route"]))
    if not cfg.meta:
        for r in rows:
            r.pop("elapsed_ms")
    status = EXIT_OK
    by_n: dict[int, dict[str, int]] = {}
    for r in rows:
        by_n.setdefault(r["n"], {})[r["route"]] = r["c2"]
    clash = {n: v for n, v in by_n.items() if len(set(v.values())) > 1}
    report: dict = {}
    if clash:
        report["disagreements"] = {str(n): v for n, v in sorted(clash.items())}
        status = EXIT_DISAGREE
    if verify:
        first = [(r["n"], r["c2"]) for r in rows if r["route"] == routes[0]]
        bad = verify_closed_form(fam, first)
        report["verify_paper"] = "PASS" if not bad else "FAIL"
        if bad:
            report["mismatches"] = [list(b) for b in bad]
            status = status or EXIT_FAIL
    if fit:
        values = [r["c2"] for r in rows if r["route"] == routes[-1]]
        rec = fit_values(values, p)
        report["fit"] = {
            "recurrence": rec.describe(),
            "charpoly": rec.charpoly(),
            "order": rec.order,
            "start": rec.start,
            "route": routes[-1],
        }
    _emit_family(rows, report, cfg)
    return status


def _emit_family(rows: list[dict], report: dict, cfg: RunConfig) -> None:
    if cfg.fmt == "json":
        doc: dict = {"records": rows}
        doc.update(report)
        if cfg.meta:
            doc["meta"] = _meta(cfg)
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return
    cols = CSV_COLUMNS if cfg.meta else CSV_COLUMNS[:-1]
    emit(rows, cfg, columns=cols)
    for key in sorted(report):
        print(f"# {key}: {json.dumps(report[key], sort_keys=True)}", file=sys.stderr)


# ---------------------------------------------------------------- reduce


def cmd_reduce(args: argparse.Namespace, cfg: RunConfig) -> int:
    g = parse_graph(args.graph)
    if g.edge_count < 5:
        raise UsageError(f"reduction needs at least 5 edges, graph has {g.edge_count}")
    res = denom_reduce(
        g, _int_list(args.order), cfg.p, max_disc_terms=args.max_disc_terms, workers=cfg.workers, budget=cfg.budget
    )
    trace = [{"j": j, "edge": e, "kind": kind, "terms": terms} for j, e, kind, terms in res.trace]
    doc: dict = {"graph": args.graph, "p": cfg.p, "stop": res.stop, "index": res.index, "trace": trace}
    if res.c2 is not None:
        doc["c2"] = res.c2.value
    if cfg.fmt == "json":
        if cfg.meta:
            doc["meta"] = _meta(cfg)
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        emit(trace, cfg, columns=("j", "edge", "kind", "terms"))
        print(f"stop: {res.stop} at D^{res.index}")
        if res.c2 is not None:
            print(f"c2: {res.c2.value}")
    return EXIT_OK


# ---------------------------------------------------------------- poly


def _parse_partition(text: str) -> SetPartition:
    try:
        return SetPartition([[int(v) for v in part.split(",")] for part in text.split("|")])
    except ValueError as exc:
        raise UsageError(f"bad partition {text!r}; use e.g. 0,2|1") from exc


def cmd_poly(args: argparse.Namespace, cfg: RunConfig) -> int:
    g = parse_graph(args.graph)
    if args.which == "kirchhoff":
        poly = kirchhoff(g)
        text, sign = poly.to_text(), None
    elif args.which == "dodgson":
        spec = DodgsonSpec(set(_int_list(args.I) or []), set(_int_list(args.J) or []), set(_int_list(args.K) or []))
        sp = dodgson(g, spec)
        text, sign = sp.poly.to_text(), sp.sign
    else:
        if not args.partition:
            raise UsageError("forest polynomials need --partition")
        poly = forest_poly(g, _parse_partition(args.partition))
        text, sign = poly.to_text(), None
    if cfg.fmt == "json":
        doc = {"graph": args.graph, "polynomial": args.which, "text": text}
        if sign is not None:
            doc["sign"] = sign
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------- transfer


def cmd_transfer(args: argparse.Namespace, cfg: RunConfig) -> int:
    from c2kit.recurrences.transfer import RecurrenceSystem, base_seeds, build_transfer, flip_commutes, minimize, run_transfer

    if cfg.p != 2:
        raise UsageError(f"unsupported (route transfer, p={cfg.p}): transfer systems are p=2 only")
    if args.family not in ("1,3", "2,3"):
        raise UsageError(f"unsupported (family {args.family}, route transfer)")
    if args.load:
        with open(args.load) as fh:
            sys_ = RecurrenceSystem.from_json(fh.read())
        raw_states = None
    else:
        sys_ = build_transfer(args.family)
        raw_states = len(sys_.states)
    if args.action == "build":
        info = {"family": args.family, "states": len(sys_.states), "flip_commutes": flip_commutes(sys_)}
        if args.minimize:
            sys_ = minimize(sys_)
            info["minimized_states"] = len(sys_.states)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(sys_.to_json())
            info["written"] = args.out
        print(json.dumps(info, sort_keys=True, indent=2))
        return EXIT_OK
    lo, hi = _range_arg(args.range)
    ns = list(range(lo, hi + 1))
    seeds = base_seeds(sys_, ns)
    if raw_states is not None:
        sys_ = minimize(sys_, seeds)
    rows = [{"family": args.family, "n": n, "p": 2, "route": "transfer", "c2": run_transfer(sys_, seeds, n)} for n in ns]
    emit(rows, cfg, columns=CSV_COLUMNS[:-1])
    return EXIT_OK


def _range_arg(text: str) -> tuple[int, int]:
    from c2kit.recurrences.families import parse_range

    try:
        return parse_range(text)
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; use lo:hi") from exc


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", type=int, default=2, help="prime (default 2)")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--no-meta", action="store_true", help="omit timings and run metadata")
    common.add_argument("--workers", type=int, help="threads for point counting")
    common.add_argument("--budget", type=int, help="maximum number of points to enumerate")

    parser = argparse.ArgumentParser(prog="c2kit", description="c2 invariants of decompleted circulant graphs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    c2 = sub.add_parser("c2", parents=[common], help="c2 of one graph")
    c2.add_argument("--graph", required=True, help="circulant-decompleted:n:j,k, circulant:n:j,k, JSON or a JSON file")
    c2.add_argument("--route", default="direct", help=f"comma list from {', '.join(GRAPH_ROUTES)}, or all")
    c2.add_argument("--edges", help="edges for the Dodgson routes or the reduction order")

    fam = sub.add_parser("family", parents=[common], help="c2 along a family")
    fam.add_argument("--kind", help="1,2 (zigzag), 1,3 ... 3,4, or 2k2")
    fam.add_argument("--range", help="lo:hi over n (or k for 2k2)")
    fam.add_argument("--route", default="direct", help="comma list from direct, dodgson, coeff, denom, transfer, table")
    fam.add_argument("--preset", choices=sorted(PRESETS))
    fam.add_argument("--verify-paper", action="store_true", help="check the known closed form")
    fam.add_argument("--fit", action="store_true", help="fit a step-2 recurrence to the values")

    red = sub.add_parser("reduce", parents=[common], help="denominator reduction trace")
    red.add_argument("--graph", required=True)
    red.add_argument("--order", help="explicit edge order (default: automatic)")
    red.add_argument("--max-disc-terms", type=int)

    poly = sub.add_parser("poly", parents=[common], help="print a graph polynomial")
    poly.add_argument("which", choices=("kirchhoff", "dodgson", "forest"))
    poly.add_argument("--graph", required=True)
    poly.add_argument("--I", dest="I")
    poly.add_argument("--J", dest="J")
    poly.add_argument("--K", dest="K")
    poly.add_argument("--partition", help="vertex parts, e.g. 0,2|1")

    tr = sub.add_parser("transfer", parents=[common], help="build or run a transfer system (p=2)")
    tr.add_argument("action", choices=("build", "run"))
    tr.add_argument("--family", required=True, choices=("1,3", "2,3"))
    tr.add_argument("--range", default="7:20")
    tr.add_argument("--minimize", action="store_true")
    tr.add_argument("--out", help="write the system as JSON")
    tr.add_argument("--load", help="read a system written by build --out")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    routes = tuple(r.strip() for r in getattr(args, "route", "direct").split(",") if r.strip())
    if args.command == "c2":
        for r in routes:
            if r not in GRAPH_ROUTES + ("all",):
                raise UsageError(f"unknown route {r!r} for c2")
    if args.p < 2:
        raise UsageError(f"p must be a prime, got {args.p}")
    return RunConfig(args.command, args.p, routes, args.format, not args.no_meta, args.workers, args.budget)


COMMANDS = {"c2": cmd_c2, "family": cmd_family, "reduce": cmd_reduce, "poly": cmd_poly, "transfer": cmd_transfer}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    from c2kit.recurrences.families import UnsupportedRoute

    try:
        cfg = _config(args)
        _apply_environment(cfg)
        return COMMANDS[args.command](args, cfg)
    except BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, UnsupportedRoute, GraphError, ValueError) as exc:
        print(f"usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except C2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
