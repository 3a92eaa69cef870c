"""End-to-end cross-checks between the analysis, the oracles and the simulator.

Each check returns a :class:`CheckResult`; ``run_all`` is what the
``validate`` command and the acceptance tests execute.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from . import analysis as A
from .channel import IidChannel, make_rng
from .codec import CodeParams
from .sim import Scenario, measure_gt, run


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str, dict]], limit: float | None = None) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail, values = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        ok = False
        detail += f"; runtime {dt:.1f}s over the {limit:g}s budget"
    return CheckResult(number, name, ok, detail, dt, values)


# -- individual checks ------------------------------------------------------------


def check_normalization() -> CheckResult:
    def body():
        worst = 0.0
        for l in range(2, 11):
            for x in range(1, 10):
                eps = x / 10 / l
                pmf = A.busy_time_pmf(l, eps)
                worst = max(worst, abs(math.fsum(pmf.probs) + pmf.tail_bound - 1))
        return worst <= 1e-9, f"max |sum p + tail - 1| = {worst:.2e}", {"max_error": worst}

    return _timed(1, "busy-time normalization", body, limit=1.0)


def check_stream_oracle() -> CheckResult:
    def body():
        worst = 0.0
        for l in (2, 3, 4):
            k = 20 // l
            res = A.oracle_busy_counts(l, 1, k)
            for eps in (0.1, 0.3):
                probs = res.probs(eps)
                for s in range(k + 1):
                    worst = max(worst, abs(probs[s] - float(A.busy_time_prob(s, l, eps))))
        return worst <= 1e-12, f"max deviation from enumeration = {worst:.2e}", {"max_error": worst}

    return _timed(2, "stream pmf vs enumeration", body, limit=60.0)


def check_group_oracle() -> CheckResult:
    def body():
        mismatches = 0
        worst = 0.0
        n_counts = 0
        for lg in range(2, 7):
            for c in range(1, min(3, lg - 1) + 1):
                k = min(4, 24 // lg)
                res = A.oracle_busy_counts(lg, c, k)
                for s in range(2, k + 1):
                    for p in range(c):
                        n_counts += 1
                        e = s * c - p
                        oracle = int(res.counts[s, e]) if e <= s * lg else 0
                        if oracle != A.group_np_count(lg, c, s, p):
                            mismatches += 1
                if lg * 0.1 < c:
                    probs = res.probs(0.1)
                    for s in range(k + 1):
                        worst = max(worst, abs(probs[s] - A.group_busy_prob(s, lg, c, 0.1)))
        red = 0.0
        for l in range(2, 7):
            for x in (0.1, 0.5, 0.8):
                eps = x / l
                a = A.group_busy_pmf(l, 1, eps, method="lattice").probs
                b = A.busy_time_pmf(l, eps).probs
                red = max(red, float(np.max(np.abs(a - b))) if len(a) == len(b) else math.inf)
        ok = mismatches == 0 and worst <= 1e-12 and red <= 1e-12
        detail = (f"{n_counts} pattern counts, {mismatches} mismatches; pmf deviation {worst:.2e}; "
                  f"c=1 reduction deviation {red:.2e}")
        return ok, detail, {"mismatches": mismatches, "pmf_error": worst, "reduction_error": red}

    return _timed(3, "group counts and pmf vs enumeration", body, limit=120.0)


def check_kreweras() -> CheckResult:
    def body():
        bad = 0
        cases = 0
        for n in range(1, 7):
            for a in combinations(range(9), n):
                cases += 1
                e = A.kreweras_enumerate(a, n)
                if A.kreweras_count(a, n) != e or A.kreweras_recursion(a, n) != e:
                    bad += 1
        enum = A.kreweras_enumerate((1, 2), 2)
        plus = A.kreweras_recursion((1, 2), 2)
        step = A.kreweras_step((1, 2), 2, [1, 2], plus_one=False)
        no_plus_full = A.kreweras_recursion((1, 2), 2, plus_one=False)
        ok = bad == 0 and (enum, plus, step) == (5, 5, 4) and no_plus_full != enum
        detail = (f"{cases} sequences, {bad} disagreements; a=(1,2): enumeration {enum}, "
                  f"+1 form {plus}, form without +1 {step}")
        return ok, detail, {"bad": bad, "enum": enum, "plus_one": plus, "no_plus": step}

    return _timed(4, "dominated-sequence determinant", body)


def check_binomial_identity() -> CheckResult:
    def body():
        bad = [(k, l) for k in range(2, 41) for l in range(2, 13) if len(set(A.binomial_identity_sides(k, l))) != 1]
        return not bad, f"{39 * 11 - len(bad)}/{39 * 11} (k, l) pairs agree exactly", {"failures": bad}

    return _timed(5, "binomial identity", body)


def check_busy_monte_carlo(seed: int = 2024) -> CheckResult:
    def body():
        l, eps = 5, 0.1
        sc = Scenario(CodeParams.stream(l), IidChannel(eps), N=l * 3_600_000, ideal_recovery=True, seeds=[seed])
        rep = run(sc, n_workers=1)
        pmf = A.busy_time_pmf(l, eps).probs
        h = rep.busy_pmf()
        n = max(len(h), len(pmf))
        tv = 0.5 * float(np.abs(np.pad(h, (0, n - len(h))) - np.pad(pmf, (0, n - len(pmf)))).sum())
        ok = rep.busy_periods >= 10**6 and tv < 0.01
        return ok, f"{rep.busy_periods} busy periods, TV distance {tv:.5f}", {"tv": tv, "busy": rep.busy_periods}

    return _timed(6, "simulated busy-time law", body, limit=30.0)


def check_delay_bound(seed: int = 7, reps: int = 10, n_slots: int = 1_000_000) -> CheckResult:
    def body():
        rows = []
        ok = True
        tight = None
        for l in (2, 5, 10):
            for eps in (0.05, 0.1):
                if l * eps >= 1:
                    rows.append(f"l={l},eps={eps}: diverges (bound infinite)")
                    continue
                bound = A.delay_upper_bound(l, eps)
                sc = Scenario(CodeParams.stream(l), IidChannel(eps), N=n_slots, ideal_recovery=True,
                              seeds=[seed], replications=reps)
                rep = run(sc)
                meas, se = rep.delay_per_slot, rep.stderr("delay_per_slot")
                good = meas <= bound + 3 * se
                ok &= good
                rows.append(f"l={l},eps={eps}: {meas:.4f} (3se {3 * se:.4f}) vs {bound:.4f}" + ("" if good else " VIOLATED"))
                if (l, eps) == (2, 0.05):
                    tight = (bound - meas) / meas
        ok &= tight is not None and abs(tight) <= 0.25
        return ok, "; ".join(rows) + f"; gap at l=2,eps=0.05: {tight:.1%}", {"tightness": tight}

    return _timed(7, "delay bound vs simulation", body)


def check_cost(seed: int = 11, n_info: int = 1_000_000) -> CheckResult:
    def body():
        a = A.decoding_cost(5, 0.1)
        b = A.decoding_cost(25, 0.02)
        l = 5
        sc = Scenario(CodeParams.stream(l), IidChannel(0.1), N=n_info * l // (l - 1), seeds=[seed],
                      field_bits=8, engine="codec")
        rep = run(sc, n_workers=1)
        sim = rep.ops_per_info
        ok_a, ok_b = abs(a - 3.13) <= 0.01, abs(b - 0.67) <= 0.01
        ok_sim = abs(sim - 3.13) <= 0.1 * 3.13
        detail = (f"cost(5,0.1)={a:.4f}, cost(25,0.02)={b:.4f}, simulated ops/info packet={sim:.3f} "
                  f"(exact-moment cost {A.decoding_cost(5, 0.1, exact=True):.3f})")
        return ok_a and ok_b and ok_sim, detail, {"cost_5": a, "cost_25": b, "sim": sim}

    return _timed(8, "decoder cost", body)


def check_group_delay(seed: int = 5, n_slots: int = 3_000_000) -> CheckResult:
    def body():
        rate, eps = 0.8, 0.1
        l = round(1 / (1 - rate))
        analytic = [A.group_delay_per_packet(l, c, eps) for c in range(1, 6)]
        measured = []
        for c in range(1, 6):
            sc = Scenario(CodeParams.group(c * l, c), IidChannel(eps), N=n_slots, ideal_recovery=True, seeds=[seed])
            measured.append(run(sc, n_workers=1).delay_per_slot)
        mono_a = all(x <= y for x, y in zip(analytic, analytic[1:]))
        mono_m = all(x <= y for x, y in zip(measured, measured[1:]))
        detail = "analytic " + ", ".join(f"{v:.3f}" for v in analytic) + "; simulated " + ", ".join(
            f"{v:.3f}" for v in measured)
        return mono_a and mono_m, detail, {"analytic": analytic, "measured": measured}

    return _timed(9, "group delay ordering", body)


def check_rank_bounds(seed: int = 3, samples: int = 100_000, patterns: int = 100) -> CheckResult:
    def body():
        coincide = all(
            abs(A.rank_bounds(k, Q)[0] - A.rank_bounds(k, Q)[1]) <= 1e-15 for k in (1, 2) for Q in (2, 4, 256)
        )
        rng = make_rng(seed)
        outside = 0
        tested = 0
        for bits in (1, 2):
            Q = 1 << bits
            for k in range(1, 7):
                lo, up = A.rank_bounds(k, Q)
                zs = {tuple(A.zero_counts(A.sample_admissible_pattern(k, rng))) for _ in range(patterns)}
                for Z in sorted(zs):
                    f = A.monte_carlo_full_rank(Z, bits, samples, rng)
                    sig = math.sqrt(max(f * (1 - f), 1e-12) / samples)
                    tested += 1
                    if not lo - 4 * sig <= f <= up + 4 * sig:
                        outside += 1
        ok = coincide and outside == 0
        return ok, f"bounds coincide at k=1,2: {coincide}; {tested} distinct patterns, {outside} outside", {
            "outside": outside, "tested": tested}

    return _timed(10, "rank bounds", body)


def check_failure_series() -> CheckResult:
    def body():
        worst = worst_res = 0.0
        for l in (5, 7):
            for eps in (0.05, 0.1):
                for Q in (4, 256):
                    series = A.stream_failure_bound(l, eps, Q)
                    closed, e0 = A.corollary_failure_bound(l, eps, Q)
                    res = abs(e0 * (1 - e0) ** (l - 1) - (1 - Q**-2) * eps * (1 - eps) ** (l - 1))
                    worst = max(worst, abs(series - closed))
                    worst_res = max(worst_res, res)
        ok = worst <= 1e-10 and worst_res < 1e-12
        return ok, f"series vs closed form {worst:.2e}; root residual {worst_res:.2e}", {
            "error": worst, "residual": worst_res}

    return _timed(11, "failure series vs closed form", body)


def check_throughput(seed: int = 99, streams: int = 100_000) -> CheckResult:
    def body():
        l, eps, N, R0 = 5, 0.1, 10_000, 0.75
        sc = Scenario(CodeParams.stream(l), IidChannel(eps), N=N, ideal_recovery=True, seeds=[seed],
                      replications=streams)
        gt = measure_gt(sc)
        emp = float(np.mean(gt > R0))
        bound = A.throughput_tail(l, eps, N, R0)
        return emp >= bound, f"P(GT > {R0}) = {emp:.6f} over {streams} streams, bound {bound:.6f}", {
            "empirical": emp, "bound": bound}

    return _timed(12, "good-throughput tail", body, limit=120.0)


CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_normalization,
    2: check_stream_oracle,
    3: check_group_oracle,
    4: check_kreweras,
    5: check_binomial_identity,
    6: check_busy_monte_carlo,
    7: check_delay_bound,
    8: check_cost,
    9: check_group_delay,
    10: check_rank_bounds,
    11: check_failure_series,
    12: check_throughput,
}


def run_all(only=None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    out = []
    for n, fn in CHECKS.items():
        if only and n not in only:
            continue
        res = fn()
        if echo:
            echo(res.line())
        out.append(res)
    return out
