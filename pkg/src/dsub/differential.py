"""Differential testing of the deciders against the declarative engines.

For every generated instance the runner records

* step subtyping against bounded kernel search,
* stare-at subtyping against bounded strong-kernel search,
* the inclusion chain step => stare-at => normal-form D<:, with the normal-form
  search capped at twice the stare-at trace depth,
* the measure bound on stare-at's recursive calls,
* certification of every derivation found.

Reports are plain JSON with a schema tag and version and contain no timestamps,
so identical configurations give byte-identical output.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .checker import check_derivation
from .deciders import stare_at, step_subtype
from .engines import Prover
from .generate import FuzzConfig, Instance, generate_instance
from .judgements import SubJudgement, SystemId

REPORT_SCHEMA = "dsub-differential-report"
REPORT_VERSION = 1

ORACLE_DEPTH = 40


@dataclass
class Report:
    config: dict
    total: int = 0
    instances: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    fuel: dict = field(default_factory=dict)
    indecisive: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "config": self.config,
            "summary": {
                "instances": self.total,
                "violations": len(self.violations),
                "counts": self.counts,
                "indecisive": self.indecisive,
                "fuel": self.fuel,
            },
            "violations": self.violations,
            "instances": self.instances,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False)


class _Runner:
    def __init__(self, cfg: FuzzConfig, oracle_depth: int):
        self.cfg = cfg
        self.oracle_depth = oracle_depth
        self.kernel = Prover(SystemId.DKERNEL)
        self.strong = Prover(SystemId.DSTRONG_KERNEL)
        self.nf = Prover(SystemId.DSUB_NF)
        self.counts: dict = {}
        self.violations: list = []
        self.indecisive: Counter = Counter()
        self.max_calls = 0
        self.max_ratio = 0.0
        self.total_calls = 0

    def count(self, system: str, verdict: str) -> None:
        self.counts.setdefault(system, Counter())[verdict] += 1

    def violation(self, prop: str, inst: Instance, i: int, **details) -> None:
        self.violations.append({"property": prop, "index": i, "instance": str(inst), **details})

    def oracle(self, prover: Prover, j: SubJudgement, inst: Instance, i: int, name: str):
        res = prover.prove(j, self.oracle_depth)
        self.count(name, res.verdict.value)
        if res.proved and not check_derivation(res.derivation):
            self.violation("certification", inst, i, system=name)
        if res.exhausted:
            self.indecisive[name] += 1
        return res

    def run(self, inst: Instance, i: int) -> dict:
        systems = set(self.cfg.systems)
        g1, s, u, g2 = inst.left_ctx, inst.lhs, inst.rhs, inst.right_ctx
        rec: dict = {"index": i, "instance": str(inst), "verdicts": {}}
        v = rec["verdicts"]
        step = None
        if inst.single_context and "step" in systems:
            step = step_subtype(g1, s, u)
            v["step"] = "accepted" if step.accepted else "rejected"
            self.count("step", v["step"])
        stare = None
        if "stare-at" in systems:
            stare = stare_at(g1, s, u, g2)
            v["stare-at"] = "accepted" if stare.accepted else "rejected"
            self.count("stare-at", v["stare-at"])
            rec["fuel"] = {"calls": stare.calls, "nesting": stare.fuel_used, "bound": stare.bound}
            self.total_calls += stare.calls
            self.max_calls = max(self.max_calls, stare.calls)
            self.max_ratio = max(self.max_ratio, stare.calls / stare.bound)
            if stare.calls > stare.bound:
                self.violation("stare-at fuel bound", inst, i, calls=stare.calls, bound=stare.bound)
        if inst.single_context and "kernel" in systems:
            k = self.oracle(self.kernel, SubJudgement(SystemId.DKERNEL, g1, s, u), inst, i, "kernel")
            v["kernel"] = k.verdict.value
            if step is not None and not k.exhausted and step.accepted != k.proved:
                self.violation("step agrees with kernel", inst, i, step=v["step"], kernel=v["kernel"])
        if "strong-kernel" in systems:
            k = self.oracle(self.strong, SubJudgement(SystemId.DSTRONG_KERNEL, g1, s, u, g2), inst, i, "strong-kernel")
            v["strong-kernel"] = k.verdict.value
            if stare is not None and not k.exhausted and stare.accepted != k.proved:
                self.violation("stare-at agrees with strong kernel", inst, i,
                               stare_at=v["stare-at"], strong_kernel=v["strong-kernel"])
        if step is not None and stare is not None and step.accepted and not stare.accepted:
            self.violation("step implies stare-at", inst, i)
        if "dsub-nf" in systems and inst.single_context and stare is not None and stare.accepted:
            depth = 2 * stare.trace_depth
            res = self.nf.prove(SubJudgement(SystemId.DSUB_NF, g1, s, u), depth)
            v["dsub-nf"] = res.verdict.value
            rec["dsub-nf-depth"] = depth
            self.count("dsub-nf", res.verdict.value)
            if not res.proved:
                self.violation("stare-at implies dsub-nf", inst, i, depth=depth, verdict=res.verdict.value)
            elif not check_derivation(res.derivation):
                self.violation("certification", inst, i, system="dsub-nf")
        return rec


def run_differential(cfg: FuzzConfig, *, oracle_depth: int = ORACLE_DEPTH, instances=None,
                     keep_instances: bool = True) -> Report:
    """Run every check of ``cfg.systems`` over the configured (or given) instances."""
    runner = _Runner(cfg, oracle_depth)
    items = instances if instances is not None else (generate_instance(cfg, i) for i in range(cfg.count))
    records = []
    total = 0
    for i, inst in enumerate(items):
        total += 1
        rec = runner.run(inst, i)
        if keep_instances:
            records.append(rec)
    config = cfg.to_json()
    config["oracle_depth"] = oracle_depth
    if instances is not None:
        config["source"] = "explicit"
    return Report(
        config=config,
        total=total,
        instances=records,
        counts={k: dict(sorted(c.items())) for k, c in sorted(runner.counts.items())},
        violations=runner.violations,
        fuel={"max_calls": runner.max_calls, "max_calls_over_bound": round(runner.max_ratio, 6),
              "total_calls": runner.total_calls},
        indecisive=dict(sorted(runner.indecisive.items())),
    )


def write_report(report: Report, path: Optional[str]) -> None:
    text = report.dumps() + "\n"
    if path is None or path == "-":
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
