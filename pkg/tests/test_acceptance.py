"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``python3 tests/test_acceptance.py`` for the lines alone, or let pytest
collect this module; the conftest hook repeats the lines in the terminal
summary. Each criterion's data is computed once and cached, so criterion 9
(certification) can total the derivations checked by all the others.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

from dsub.checker import check_derivation
from dsub.deciders import (
    downcast_sa, downcast_step, exposure, reveal, stare_at, step_subtype, upcast_sa, upcast_step,
)
from dsub.differential import run_differential
from dsub.engines import Prover
from dsub.enumerate import enumerate_contexts, enumerate_types
from dsub.generate import FuzzConfig, generate, random_context, random_type
from dsub.judgements import SubJudgement, SystemId
from dsub.reductions import map_ctx, map_type, replay_catalog
from dsub.syntax import (
    All, Bot, Path, Top, TypeDecl, fresh, free_vars, is_invertible, show, subst_var_in_type,
)

FUZZ = FuzzConfig(seed=20240, count=10_000)
ORACLE_DEPTH = 30
ORIG_DEPTH, ORIG_CAP, NF_DEPTH = 8, 4, 12
INVERTIBLE_CONTEXTS = 1000

RESULTS: dict = {}


@dataclass
class Line:
    number: int
    title: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"criterion {self.number} {'PASS' if self.passed else 'FAIL'}  {self.title}: {self.detail}"


@dataclass
class Certs:
    """Tally of Proved results and how many of them the checker accepted."""

    checked: int = 0
    failed: list = field(default_factory=list)

    def add(self, res, label: str = "") -> None:
        if res.proved:
            self.checked += 1
            if not check_derivation(res.derivation):
                self.failed.append(label or str(res.derivation.conclusion))


def record(line: Line) -> Line:
    RESULTS[line.number] = line
    print(line)
    return line


# -- instance sets ---------------------------------------------------------------


@lru_cache(maxsize=None)
def exhaustive_contexts() -> tuple:
    return tuple(enumerate_contexts("D", 1, 3))


@lru_cache(maxsize=None)
def exhaustive_types(ctx) -> tuple:
    return tuple(enumerate_types("D", 3, ctx))


def exhaustive_set():
    for g in exhaustive_contexts():
        tys = exhaustive_types(g)
        for s, u in itertools.product(tys, tys):
            yield g, s, u


# -- criterion 1 -----------------------------------------------------------------


@lru_cache(maxsize=None)
def criterion_1() -> Line:
    t0 = time.perf_counter()
    outcomes = replay_catalog()
    elapsed = time.perf_counter() - t0
    entries = {o.entry for o in outcomes}
    bad = [f"{o.entry}/{o.check.system or o.check.kind}" for o in outcomes if not o.ok]
    ok = not bad and len(entries) >= 6 and elapsed < 5
    return Line(1, "catalog replay", ok,
                f"{len(outcomes) - len(bad)}/{len(outcomes)} checks over {len(entries)} entries "
                f"in {elapsed:.2f}s (limit 5s)" + (f"; mismatched {bad}" if bad else ""))


# -- criteria 2 and 3 ------------------------------------------------------------


@dataclass
class OracleRun:
    instances: int = 0
    exhausted: int = 0
    disagree: list = field(default_factory=list)
    seconds: float = 0.0
    certs: Certs = field(default_factory=Certs)


@lru_cache(maxsize=None)
def kernel_run() -> OracleRun:
    run = OracleRun()
    t0 = time.perf_counter()
    for g in exhaustive_contexts():
        prover = Prover(SystemId.DKERNEL)
        tys = exhaustive_types(g)
        for s, u in itertools.product(tys, tys):
            run.instances += 1
            algo = step_subtype(g, s, u)
            res = prover.prove(SubJudgement(SystemId.DKERNEL, g, s, u), ORACLE_DEPTH)
            run.certs.add(res)
            run.exhausted += res.exhausted
            if algo.accepted != res.proved:
                run.disagree.append(f"{g} |- {show(s)} <: {show(u)}")
    run.seconds = time.perf_counter() - t0
    return run


@lru_cache(maxsize=None)
def strong_run() -> OracleRun:
    """Same contexts on both sides, then every ordered pair of distinct contexts."""
    run = OracleRun()
    t0 = time.perf_counter()
    ctxs = exhaustive_contexts()
    prover = Prover(SystemId.DSTRONG_KERNEL)
    for g1, g2 in itertools.product(ctxs, ctxs):
        for s, u in itertools.product(exhaustive_types(g1), exhaustive_types(g2)):
            run.instances += 1
            algo = stare_at(g1, s, u, g2)
            res = prover.prove(SubJudgement(SystemId.DSTRONG_KERNEL, g1, s, u, g2), ORACLE_DEPTH)
            run.certs.add(res)
            run.exhausted += res.exhausted
            if algo.accepted != res.proved:
                run.disagree.append(f"{g1} |- {show(s)} <: {show(u)} -| {g2}")
    run.seconds = time.perf_counter() - t0
    return run


def _oracle_line(number: int, title: str, run: OracleRun, limit: float) -> Line:
    ok = not run.disagree and not run.exhausted and run.seconds < limit
    detail = (f"{run.instances - len(run.disagree)}/{run.instances} agree, "
              f"{run.exhausted} depth-exhausted at depth {ORACLE_DEPTH}, {run.seconds:.1f}s")
    if run.disagree:
        detail += f"; first disagreement {run.disagree[0]}"
    return Line(number, title, ok, detail)


@lru_cache(maxsize=None)
def criterion_2() -> Line:
    return _oracle_line(2, "step vs kernel oracle", kernel_run(), 120)


@lru_cache(maxsize=None)
def criterion_3() -> Line:
    return _oracle_line(3, "stare-at vs strong-kernel oracle", strong_run(), 120)


# -- criteria 4 and 5 ------------------------------------------------------------


@lru_cache(maxsize=None)
def exhaustive_chain() -> tuple:
    violations, certs, accepted = [], Certs(), 0
    prover = Prover(SystemId.DSUB_NF)
    for g, s, u in exhaustive_set():
        st, sa = step_subtype(g, s, u), stare_at(g, s, u, g)
        if st.accepted and not sa.accepted:
            violations.append(f"step without stare-at: {g} |- {show(s)} <: {show(u)}")
        if sa.accepted:
            accepted += 1
            res = prover.prove(SubJudgement(SystemId.DSUB_NF, g, s, u), 2 * sa.trace_depth)
            certs.add(res)
            if not res.proved:
                violations.append(f"stare-at without dsub-nf: {g} |- {show(s)} <: {show(u)}")
    return violations, certs, accepted


@lru_cache(maxsize=None)
def fuzz_report():
    t0 = time.perf_counter()
    report = run_differential(FUZZ, keep_instances=False)
    return report, time.perf_counter() - t0


@lru_cache(maxsize=None)
def criterion_4() -> Line:
    violations, _, accepted = exhaustive_chain()
    report, seconds = fuzz_report()
    chain = [v for v in report.violations
             if v["property"] in ("step implies stare-at", "stare-at implies dsub-nf")]
    ok = not violations and not chain and report.total == FUZZ.count
    detail = (f"exhaustive: {len(violations)} violations ({accepted} stare-at accepted); "
              f"fuzz seed {FUZZ.seed}: {len(chain)} violations over {report.total} instances "
              f"({seconds:.1f}s)")
    return Line(4, "inclusion chain", ok, detail)


@lru_cache(maxsize=None)
def timing_run() -> dict:
    """Wall-clock of every decider and auxiliary operation on the fuzzed instances."""
    worst = Counter()
    for inst in generate(FUZZ):
        g1, s, u, g2 = inst.left_ctx, inst.lhs, inst.rhs, inst.right_ctx
        calls = [("stare_at", lambda: stare_at(g1, s, u, g2)),
                 ("exposure", lambda: exposure(g1, s)),
                 ("reveal", lambda: reveal(g1, s))]
        if inst.single_context:
            calls.append(("step_subtype", lambda: step_subtype(g1, s, u)))
        for x in g1.dom():
            p = Path(x)
            calls += [("upcast_step", lambda p=p: upcast_step(g1, p)),
                      ("downcast_step", lambda p=p: downcast_step(g1, p)),
                      ("upcast_sa", lambda p=p: upcast_sa(g1, p)),
                      ("downcast_sa", lambda p=p: downcast_sa(g1, p))]
        for name, fn in calls:
            t0 = time.perf_counter()
            fn()
            worst[name] = max(worst[name], time.perf_counter() - t0)
    return dict(worst)


@lru_cache(maxsize=None)
def criterion_5() -> Line:
    report, _ = fuzz_report()
    fuel = [v for v in report.violations if v["property"] == "stare-at fuel bound"]
    worst = timing_run()
    slowest = max(worst.items(), key=lambda kv: kv[1])
    ok = not fuel and slowest[1] < 1.0
    detail = (f"{len(fuel)} fuel-bound violations, max calls {report.fuel['max_calls']}, "
              f"max calls/bound {report.fuel['max_calls_over_bound']}; slowest operation "
              f"{slowest[0]} {slowest[1] * 1000:.1f}ms (limit 1000ms)")
    return Line(5, "termination and fuel", ok, detail)


# -- criterion 6 -----------------------------------------------------------------


@dataclass
class NfRun:
    table: Counter = field(default_factory=Counter)
    unresolved: list = field(default_factory=list)
    indecisive: list = field(default_factory=list)
    proved: dict = field(default_factory=dict)  # context -> {(i, j): height}
    certs: Certs = field(default_factory=Certs)
    seconds: float = 0.0


@lru_cache(maxsize=None)
def nf_run() -> NfRun:
    run = NfRun()
    t0 = time.perf_counter()
    for g in exhaustive_contexts():
        orig, nf = Prover(SystemId.DSUB_ORIG, ORIG_CAP), Prover(SystemId.DSUB_NF)
        tys = exhaustive_types(g)
        proved = run.proved.setdefault(g, {})
        for (i, s), (j, u) in itertools.product(enumerate(tys), enumerate(tys)):
            rn = nf.prove(SubJudgement(SystemId.DSUB_NF, g, s, u), NF_DEPTH)
            ro = orig.prove(SubJudgement(SystemId.DSUB_ORIG, g, s, u), ORIG_DEPTH)
            run.certs.add(rn)
            run.certs.add(ro)
            run.table[(ro.verdict.value, rn.verdict.value)] += 1
            text = f"{g} |- {show(s)} <: {show(u)}"
            if ro.proved != rn.proved:
                # A proof on one side only counts as unresolved, whatever the other said.
                run.unresolved.append(text)
            elif not ro.proved:
                if rn.exhausted:
                    run.indecisive.append(text)
            if rn.proved:
                proved[(i, j)] = rn.derivation.height
    run.seconds = time.perf_counter() - t0
    return run


TRANS_SLACK = 2


@lru_cache(maxsize=None)
def nf_transitivity() -> tuple:
    """Compose proved pairs through every enumerated middle type."""
    composed, failures, extra = 0, [], Certs()
    for g, proved in nf_run().proved.items():
        tys = exhaustive_types(g)
        prover = Prover(SystemId.DSUB_NF)
        by_left: dict = {}
        for (i, j), h in proved.items():
            by_left.setdefault(i, []).append((j, h))
        for (i, j), h1 in proved.items():
            for k, h2 in by_left.get(j, ()):
                composed += 1
                if (i, k) in proved:
                    continue
                res = prover.prove(SubJudgement(SystemId.DSUB_NF, g, tys[i], tys[k]), h1 + h2 + TRANS_SLACK)
                extra.add(res)
                if not res.proved:
                    failures.append(f"{g} |- {show(tys[i])} <: {show(tys[j])} <: {show(tys[k])}")
    return composed, failures, extra


@lru_cache(maxsize=None)
def criterion_6() -> Line:
    run = nf_run()
    composed, failures, _ = nf_transitivity()
    ok = not run.unresolved and not failures
    table = ", ".join(f"{o}/{n}={c}" for (o, n), c in sorted(run.table.items()))
    detail = (f"orig/nf verdicts {table}; {len(run.unresolved)} unresolved; "
              f"{len(run.indecisive)} indecisive on both sides (reported, Trans pool cap {ORIG_CAP}); "
              f"transitivity {composed - len(failures)}/{composed} compositions proved; {run.seconds:.1f}s")
    return Line(6, "normal-form equivalence and transitivity", ok, detail)


# -- criterion 7 -----------------------------------------------------------------


@lru_cache(maxsize=None)
def mapping_run() -> dict:
    table, disagree, certs = Counter(), [], Certs()
    n = 0
    t0 = time.perf_counter()
    for g in enumerate_contexts("F", 2, 4, fun=False):
        tys = tuple(enumerate_types("F", 4, g, fun=False))
        fsub, dsub = Prover(SystemId.FSUB_MINUS), Prover(SystemId.DSUB_NF, inversion=True)
        image_ctx = map_ctx(g)
        for s, u in itertools.product(tys, tys):
            n += 1
            rf = fsub.prove(SubJudgement(SystemId.FSUB_MINUS, g, s, u), 20)
            rd = dsub.prove(SubJudgement(SystemId.DSUB_NF, image_ctx, map_type(s), map_type(u)), 16)
            certs.add(rf)
            certs.add(rd)
            table[(rf.verdict.value, rd.verdict.value)] += 1
            if (rf.proved and rd.refuted) or (rd.proved and rf.refuted):
                disagree.append(f"{g} |- {show(s)} <: {show(u)}")
    indecisive = sum(c for (a, b), c in table.items() if "depth-exhausted" in (a, b))
    return {"n": n, "table": table, "disagree": disagree, "indecisive": indecisive,
            "certs": certs, "seconds": time.perf_counter() - t0}


@lru_cache(maxsize=None)
def criterion_7() -> Line:
    r = mapping_run()
    share = r["indecisive"] / r["n"]
    ok = not r["disagree"] and share < 0.05
    detail = (f"{r['n']} instances, {r['n'] - r['indecisive'] - len(r['disagree'])} decisive agree, "
              f"{len(r['disagree'])} disagree, {r['indecisive']} indecisive ({share:.2%}, limit 5%); "
              f"{r['seconds']:.1f}s")
    return Line(7, "F<:-minus mapping", ok, detail)


# -- criterion 8 -----------------------------------------------------------------


def shape_violation(s, u):
    """Which invertible-context shape constraint ``s <: u`` breaks, if any."""
    if isinstance(s, Top) and not isinstance(u, Top):
        return "supertype of Top"
    if isinstance(s, TypeDecl) and not isinstance(u, (Top, TypeDecl)):
        return "supertype of a declaration"
    if isinstance(s, All) and not isinstance(u, (Top, All)):
        return "supertype of a function"
    if isinstance(u, Bot) and not isinstance(s, Bot):
        return "subtype of Bot"
    if isinstance(u, TypeDecl) and not isinstance(s, (Bot, TypeDecl)):
        return "subtype of a declaration"
    if isinstance(u, All) and not isinstance(s, (Bot, Path, All)):
        return "subtype of a function"
    if isinstance(u, Path) and not isinstance(s, (Bot, Path)):
        return "subtype of a path"
    return None


def inversion_premises(g, s, u) -> list:
    """The judgements the inversion lemma derives from a proved ``s <: u``."""
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        return [(g, u.lower, s.lower), (g, s.upper, u.upper)]
    if isinstance(s, All) and isinstance(u, All):
        z = fresh("z", set(g.dom()) | free_vars(s) | free_vars(u))
        return [(g, u.param_type, s.param_type),
                (g.extend(z, u.param_type), subst_var_in_type(s.ret, s.param, z),
                 subst_var_in_type(u.ret, u.param, z))]
    return []


@lru_cache(maxsize=None)
def invertible_run() -> dict:
    cfg = FuzzConfig(seed=FUZZ.seed, max_measure=3, max_ctx_len=2,
                     invertible_bias=1.0, bad_bounds_bias=0.0)
    counts, violations, certs = Counter(), [], Certs()
    nf = Prover(SystemId.DSUB_NF)
    t0 = time.perf_counter()
    for i in range(INVERTIBLE_CONTEXTS):
        rng = random.Random(f"invertible:{cfg.seed}:{i}")
        g = random_context(rng, cfg)
        if not is_invertible(g):
            violations.append(f"generator produced a non-invertible context {g}")
            continue
        counts["contexts"] += 1
        orig = Prover(SystemId.DSUB_ORIG, 3)
        for _ in range(4):
            s, u = random_type(rng, 3, g.dom()), random_type(rng, 3, g.dom())
            res = orig.prove(SubJudgement(SystemId.DSUB_ORIG, g, s, u), 6)
            certs.add(res)
            if not res.proved:
                continue
            counts["proved"] += 1
            text = f"{g} |- {show(s)} <: {show(u)}"
            bad = shape_violation(s, u)
            if bad:
                violations.append(f"{bad}: {text}")
            for pg, ps, pu in inversion_premises(g, s, u):
                counts["inversion premises"] += 1
                sub = nf.prove(SubJudgement(SystemId.DSUB_NF, pg, ps, pu), NF_DEPTH)
                certs.add(sub)
                if sub.refuted:
                    violations.append(f"inversion premise {show(ps)} <: {show(pu)} refuted for {text}")
                elif sub.exhausted:
                    counts["premises left open"] += 1
    counts["seconds"] = round(time.perf_counter() - t0, 1)
    return {"counts": counts, "violations": violations, "certs": certs}


@lru_cache(maxsize=None)
def criterion_8() -> Line:
    r = invertible_run()
    c = r["counts"]
    ok = not r["violations"] and c["contexts"] >= 1000
    detail = (f"{c['contexts']} invertible contexts, {c['proved']} proved judgements, "
              f"{len(r['violations'])} shape/inversion violations, "
              f"{c['inversion premises'] - c['premises left open']}/{c['inversion premises']} inversion premises "
              f"confirmed, {c['seconds']}s")
    if r["violations"]:
        detail += f"; first {r['violations'][0]}"
    return Line(8, "invertible-context inversion lemmas", ok, detail)


# -- criterion 9 -----------------------------------------------------------------


@lru_cache(maxsize=None)
def criterion_9() -> Line:
    report, _ = fuzz_report()
    sources = {
        "kernel oracle": kernel_run().certs,
        "strong-kernel oracle": strong_run().certs,
        "chain": exhaustive_chain()[1],
        "nf equivalence": nf_run().certs,
        "transitivity": nf_transitivity()[2],
        "mapping": mapping_run()["certs"],
        "invertible": invertible_run()["certs"],
    }
    checked = sum(c.checked for c in sources.values())
    failed = [f for c in sources.values() for f in c.failed]
    fuzz_failed = [v for v in report.violations if v["property"] == "certification"]
    ok = not failed and not fuzz_failed
    detail = (f"{checked - len(failed)}/{checked} derivations certified in the runs above, "
              f"{len(fuzz_failed)} certification failures in the fuzz run")
    return Line(9, "derivation certification", ok, detail)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


# -- pytest entry points -------------------------------------------------------------


def _assert(fn) -> None:
    line = record(fn())
    assert line.passed, str(line)


def test_criterion_1_catalog_replay():
    _assert(criterion_1)


def test_criterion_2_kernel_oracle():
    _assert(criterion_2)


def test_criterion_3_strong_kernel_oracle():
    _assert(criterion_3)


def test_criterion_4_inclusion_chain():
    _assert(criterion_4)


def test_criterion_5_termination_and_fuel():
    _assert(criterion_5)


def test_criterion_6_normal_form():
    _assert(criterion_6)


def test_criterion_7_mapping():
    _assert(criterion_7)


def test_criterion_8_invertible_contexts():
    _assert(criterion_8)


def test_criterion_9_certification():
    _assert(criterion_9)


def main() -> int:
    lines = [record(fn()) for fn in CRITERIA]
    return 0 if all(line.passed for line in lines) else 1


if __name__ == "__main__":
    sys.exit(main())
