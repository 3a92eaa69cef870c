"""Command-line front end: ``ldfec analyze|simulate|compare|validate``."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from . import __version__
from . import analysis as A
from .analysis import DivergenceError
from .channel import GilbertElliottChannel, IidChannel
from .codec import CodeParams
from .sim import Scenario, _rate_to_l, run, with_axis, workers
from .tables import COMPARE_SCHEMA, DIVERGES, SIMULATE_SCHEMA, ScenarioError, Table, build_id, load_document


def _numbers(text: str, kind=float) -> list:
    """Parse ``0.05,0.1`` lists and inclusive integer ranges like ``1..5``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part and kind is int:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(kind(part))
    return out


def _ints(text):
    return _numbers(text, int)


def _floats(text):
    return _numbers(text, float)


def _meta(args, **extra) -> dict:
    m = {"build": build_id(), "command": " ".join(sys.argv[1:]) or args.command}
    if getattr(args, "seed", None) is not None:
        m["seed"] = args.seed
    m.update(extra)
    return m


# -- analyze ------------------------------------------------------------------


def _analyze_busy(args) -> Table:
    t = Table(["l", "epsilon", "E_S", "E_S2", "E_S3", "E_Splus", "delay_bound", "delay_bound_per_info", "status"])
    for l in args.l:
        for eps in args.eps:
            if l * eps >= 1:
                t.add(l=l, epsilon=eps, status=DIVERGES)
                continue
            m = A.busy_time_moments(l, eps)
            t.add(l=l, epsilon=eps, E_S=m.E_S, E_S2=m.E_S2, E_S3=m.E_S3, E_Splus=m.E_Splus,
                  delay_bound=A.delay_upper_bound(l, eps), delay_bound_per_info=A.delay_upper_bound_per_info(l, eps),
                  status="ok")
    return t


def _analyze_pmf(args) -> Table:
    t = Table(["l", "lg", "c", "epsilon", "s", "p", "status"])
    c = args.c[0] if args.c else 1
    for eps in args.eps:
        for l in args.l:
            lg = args.lg[0] if args.lg else l * c
            try:
                pmf = A.busy_time_pmf(l, eps) if c == 1 and lg == l else A.group_busy_pmf(lg, c, eps)
            except DivergenceError:
                t.add(l=l, lg=lg, c=c, epsilon=eps, status=DIVERGES)
                continue
            for s, p in enumerate(pmf.probs):
                t.add(l=l, lg=lg, c=c, epsilon=eps, s=s, p=float(p), status="ok")
            t.add(l=l, lg=lg, c=c, epsilon=eps, s="tail", p=pmf.tail_bound, status="ok")
    return t


def _analyze_cost(args) -> Table:
    t = Table(["l", "epsilon", "cost", "cost_exact_moment", "status"])
    for l in args.l:
        for eps in args.eps:
            if l * eps >= 1:
                t.add(l=l, epsilon=eps, status=DIVERGES)
                continue
            t.add(l=l, epsilon=eps, cost=A.decoding_cost(l, eps), cost_exact_moment=A.decoding_cost(l, eps, exact=True),
                  status="ok")
    return t


def _analyze_group(args) -> Table:
    t = Table(["rate", "l", "c", "lg", "epsilon", "delay_per_slot", "status"])
    ls = [_rate_to_l(r) for r in args.rate] if args.rate else args.l
    cs = args.c or [1]
    for l in ls:
        for eps in args.eps:
            for c in cs:
                row = dict(rate=(l - 1) / l, l=l, c=c, lg=c * l, epsilon=eps)
                if l * eps >= 1:
                    t.add(**row, status=DIVERGES)
                else:
                    t.add(**row, delay_per_slot=A.group_delay_per_packet(l, c, eps), status="ok")
    return t


def _analyze_failure(args) -> Table:
    t = Table(["l", "epsilon", "Q", "series", "closed_form", "epsilon0", "status"])
    for l in args.l:
        for eps in args.eps:
            for q in args.q:
                if l * eps >= 1:
                    t.add(l=l, epsilon=eps, Q=q, status=DIVERGES)
                    continue
                r = A.failure_report(l, eps, q)
                t.add(l=l, epsilon=eps, Q=q, series=r.series, closed_form=r.closed_form, epsilon0=r.epsilon0,
                      status="ok")
    return t


def _analyze_rank(args) -> Table:
    t = Table(["Q", "k", "lower", "upper"])
    for q in args.q:
        for k in range(1, args.k_max + 1):
            lo, up = A.rank_bounds(k, q)
            t.add(Q=q, k=k, lower=lo, upper=up)
    return t


def _analyze_throughput(args) -> Table:
    t = Table(["l", "epsilon", "N", "R0", "tail_bound", "status"])
    for l in args.l:
        for eps in args.eps:
            row = dict(l=l, epsilon=eps, N=args.slots, R0=args.r0)
            if l * eps >= 1:
                t.add(**row, status=DIVERGES)
            else:
                t.add(**row, tail_bound=A.throughput_tail(l, eps, args.slots, args.r0), status="ok")
    return t


ANALYSES = {
    "busy": _analyze_busy,
    "pmf": _analyze_pmf,
    "cost": _analyze_cost,
    "group": _analyze_group,
    "failure": _analyze_failure,
    "rank": _analyze_rank,
    "throughput": _analyze_throughput,
}


def cmd_analyze(args) -> int:
    if args.what != "rank" and not args.eps:
        raise SystemExit("analyze needs --eps")
    if args.what not in ("group", "rank") and not args.l:
        args.l = [_rate_to_l(r) for r in args.rate] if args.rate else None
        if not args.l:
            raise SystemExit("analyze needs --l or --rate")
    table = ANALYSES[args.what](args)
    table.meta = _meta(args, analysis=args.what)
    table.write(args.out)
    return 0


# -- simulate / compare ---------------------------------------------------------------

SIM_COLUMNS = [
    "axis", "value", "variant", "n", "k", "l", "lg", "c", "rate", "channel", "loss_rate", "mode", "feedback_delay",
    "seeds", "replications", "n_slots", "n_info", "delivered", "mean_delay", "mean_delay_stderr", "delay_per_slot",
    "delay_per_slot_stderr", "gt", "per", "busy_periods", "ops_per_info", "dependence_events", "retransmissions",
    "delay_bound", "status",
]


def _code_from(d: dict) -> CodeParams:
    v = d["variant"]
    try:
        if v == "stream":
            return CodeParams.stream(d["l"])
        if v == "group":
            return CodeParams.group(d["lg"], d["c"])
        return CodeParams.block(d["n"], d["k"])
    except KeyError as exc:
        raise ScenarioError(f"$.code.{exc.args[0]}", f"required for variant {v!r}") from None


def _channel_from(d: dict):
    if d["model"] == "iid":
        return IidChannel(d["epsilon"])
    return GilbertElliottChannel(d["pi_B"], d["expected_burst"])


_RUN_KEYS = ("N", "mode", "feedback_delay", "field_bits", "ideal_recovery", "seeds", "replications", "engine",
             "payload_symbols", "tail_packets")


def _scenario_from(doc: dict, args, code: CodeParams | None = None) -> Scenario:
    kw = {k: doc[k] for k in _RUN_KEYS if k in doc}
    if args.seed is not None:
        kw["seeds"] = [args.seed]
    if args.reps is not None:
        kw["replications"] = args.reps
    try:
        return Scenario(code=code or _code_from(doc["code"]), channel=_channel_from(doc["channel"]), **kw)
    except ValueError as exc:
        raise ScenarioError("$", str(exc)) from None


def _row(sc: Scenario, rep, axis="", value="", slot_ms=None, bound=True) -> dict:
    code = sc.code
    row = dict(
        axis=axis, value=value, variant=code.variant, n=code.n, k=code.k, l=code.l, lg=code.lg, c=code.c,
        rate=code.rate, channel=sc.channel.to_dict()["model"], loss_rate=sc.channel.loss_rate, mode=sc.mode,
        feedback_delay=sc.feedback_delay, seeds=" ".join(map(str, sc.seeds)), replications=sc.replications,
    )
    s = rep.summary()
    for key in ("n_slots", "n_info", "delivered", "mean_delay", "delay_per_slot", "gt", "per", "busy_periods",
                "ops_per_info", "dependence_events", "retransmissions"):
        row[key] = s[key]
    row["mean_delay_stderr"] = rep.stderr("mean_delay")
    row["delay_per_slot_stderr"] = rep.stderr("delay_per_slot")
    if slot_ms:
        for key in ("mean_delay", "mean_delay_stderr", "delay_per_slot", "delay_per_slot_stderr"):
            row[key] = row[key] * slot_ms
    row["status"] = DIVERGES if sc.divergent else "ok"
    if bound and not sc.divergent and isinstance(sc.channel, IidChannel) and code.variant != "block":
        eps = sc.channel.epsilon
        l = code.period // code.coded_per_period
        b = A.group_delay_per_packet(l, code.c, eps) if code.variant == "group" else A.delay_upper_bound(l, eps)
        row["delay_bound"] = b * slot_ms if slot_ms else b
    return row


def cmd_simulate(args) -> int:
    doc = load_document(args.scenario, SIMULATE_SCHEMA)
    base = _scenario_from(doc, args)
    out = doc.get("output", {})
    slot_ms = args.slot_ms or out.get("slot_ms")
    table = Table(SIM_COLUMNS, meta=_meta(args, scenario=base.to_dict(), workers=workers(),
                                          delay_unit="ms" if slot_ms else "slots"))
    points = [("", "", base)]
    if "sweep" in doc:
        axis = doc["sweep"]["axis"]
        points = []
        for v in doc["sweep"]["values"]:
            v = int(v) if axis in ("c", "block_size") else v
            try:
                points.append((axis, v, with_axis(base, axis, v)))
            except ValueError as exc:
                raise ScenarioError("$.sweep.values", str(exc)) from None
    for axis, v, sc in points:
        table.add(**_row(sc, run(sc), axis, v, slot_ms, out.get("bound", True)))
    table.write(args.out)
    return 0


def cmd_compare(args) -> int:
    doc = load_document(args.scenario, COMPARE_SCHEMA)
    try:
        l = _rate_to_l(doc["rate"])
    except ValueError as exc:
        raise ScenarioError("$.rate", str(exc)) from None
    slot_ms = args.slot_ms or doc.get("output", {}).get("slot_ms")
    codes = [("stream", l, CodeParams.stream(l))]
    codes += [("group", c, CodeParams.group(c * l, c)) for c in doc.get("group_c", []) if c > 1]
    for k in doc.get("block_sizes", [l - 1]):
        if k % (l - 1):
            raise ScenarioError("$.block_sizes", f"block size {k} is not a multiple of {l - 1} at rate {doc['rate']}")
        codes.append(("block", k, CodeParams.block(k * l // (l - 1), k)))
    table = Table(SIM_COLUMNS, meta=_meta(args, compare=doc, workers=workers(),
                                          delay_unit="ms" if slot_ms else "slots"))
    for name, value, code in codes:
        sc = _scenario_from(doc, args, code=code)
        table.add(**_row(sc, run(sc), name, value, slot_ms))
    table.write(args.out)
    return 0


# -- validate --------------------------------------------------------------------


def cmd_validate(args) -> int:
    from .validation import run_all

    only = set(args.only) if args.only else None
    results = run_all(only, echo=lambda s: print(s, flush=True))
    table = Table(["number", "name", "passed", "seconds", "detail"], meta=_meta(args))
    for r in results:
        table.add(number=r.number, name=r.name, passed=r.passed, seconds=r.seconds, detail=r.detail)
    if args.out:
        table.write(args.out)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldfec", description="Low-delay streaming erasure codes.")
    p.add_argument("--version", action="version", version=f"ldfec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="CSV output path (JSON mirror written alongside); stdout if omitted")
        sp.add_argument("--seed", type=int, help="override the scenario seeds with a single seed")
        sp.add_argument("--reps", type=int, help="override the replication count")

    a = sub.add_parser("analyze", help="closed-form results")
    a.add_argument("what", choices=sorted(ANALYSES))
    a.add_argument("--l", type=_ints, help="stream parameter(s), e.g. 5 or 2,5,10 or 2..10")
    a.add_argument("--eps", type=_floats, help="erasure probability list")
    a.add_argument("--c", type=_ints, help="coded packets per group interval, e.g. 1..5")
    a.add_argument("--lg", type=_ints, help="group interval length")
    a.add_argument("--q", type=_floats, default=[256.0], help="field size(s)")
    a.add_argument("--rate", type=_floats, help="code rate(s) of the form (l-1)/l")
    a.add_argument("--slots", type=int, default=10_000, help="stream length for the throughput bound")
    a.add_argument("--r0", type=float, default=0.75, help="throughput threshold")
    a.add_argument("--k-max", type=int, default=10, help="largest dimension for rank bounds")
    common(a)
    a.set_defaults(func=cmd_analyze)

    for name, fn, helptext in (("simulate", cmd_simulate, "run a scenario file"),
                               ("compare", cmd_compare, "stream vs group vs block at one rate")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("scenario", help="JSON scenario file")
        s.add_argument("--slot-ms", type=float, help="report delays in milliseconds")
        common(s)
        s.set_defaults(func=fn)

    v = sub.add_parser("validate", help="run every cross-check; nonzero exit on failure")
    v.add_argument("--only", type=_ints, help="subset of check numbers, e.g. 1..6")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate, seed=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
