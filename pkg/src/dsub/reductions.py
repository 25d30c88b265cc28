"""The F<:-minus to D<: mapping, invertible contexts, OPE, and the named-example catalog."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional

from .engines import Prover, prove_subtyping, prove_typing
from .errors import InputError, MappingError
from .judgements import Derivation, OpeJudgement, SearchResult, SubJudgement, SystemId, Verdict
from .syntax import (
    BOT, EMPTY, TOP, All, Bot, Context, FForall, FFun, FTop, FTVar, Path, Top, TypeDecl,
    ctx_well_formed, free_vars, fresh, is_invertible,
)

VAR_PREFIX = "x_"


def var_of(name: str) -> str:
    """The D<: variable standing for the F<: type variable ``name``."""
    return VAR_PREFIX + name


def map_type(t, *, allow_fun: bool = False):
    if isinstance(t, FTop):
        return TOP
    if isinstance(t, FTVar):
        return Path(var_of(t.name))
    if isinstance(t, FForall):
        return All(var_of(t.var), TypeDecl(BOT, map_type(t.bound, allow_fun=allow_fun)),
                   map_type(t.body, allow_fun=allow_fun))
    if isinstance(t, FFun):
        if not allow_fun:
            raise MappingError("function types are outside the F<:-minus mapping; enable the function case to map them")
        dom = map_type(t.dom, allow_fun=True)
        cod = map_type(t.cod, allow_fun=True)
        return All(fresh("x", free_vars(cod) | free_vars(dom)), dom, cod)
    raise MappingError(f"not an F<: type: {t!r}")


def map_ctx(ctx: Context, *, allow_fun: bool = False) -> Context:
    return Context(tuple((var_of(x), TypeDecl(BOT, map_type(t, allow_fun=allow_fun))) for x, t in ctx))


def map_judgement(j: SubJudgement, system: SystemId = SystemId.DSUB_NF, *, allow_fun: bool = False) -> SubJudgement:
    if not j.system.is_fsub:
        raise MappingError("only F<: judgements can be mapped")
    return SubJudgement(system, map_ctx(j.left_ctx, allow_fun=allow_fun),
                        map_type(j.lhs, allow_fun=allow_fun), map_type(j.rhs, allow_fun=allow_fun),
                        map_ctx(j.right_ctx, allow_fun=allow_fun))


def image_membership(t, *, allow_fun: bool = False) -> bool:
    """Whether ``t`` is the image of some F<: type, up to the choice of variable names.

    The image grammar is ``I ::= Top | v.A | all(v: {A: Bot .. I}) I``, with the
    extra form ``all(v: I) I`` when the function case is admitted.
    """
    if isinstance(t, Top):
        return True
    if isinstance(t, Path):
        return True
    if isinstance(t, All):
        p = t.param_type
        if isinstance(p, TypeDecl) and isinstance(p.lower, Bot) and image_membership(p.upper, allow_fun=allow_fun):
            return image_membership(t.ret, allow_fun=allow_fun)
        if allow_fun and t.param not in free_vars(t.ret):
            return image_membership(p, allow_fun=True) and image_membership(t.ret, allow_fun=True)
    return False


# -- order preserving sub-environments ---------------------------------------


def ope_check(ctx: Context, sub: Context, depth: int, *, prover: Optional[Prover] = None) -> SearchResult:
    """Search for ``ctx ⪯ sub``; Ope-Keep's subtyping premise runs full D<: search at ``depth``."""
    if not (ctx_well_formed(ctx) and ctx_well_formed(sub)):
        raise InputError("contexts must be well-formed")
    prover = prover or Prover(SystemId.DSUB_ORIG)
    unsure = False

    def go(g: Context, h: Context) -> Optional[Derivation]:
        nonlocal unsure
        concl = OpeJudgement(g, h)
        if not g and not h:
            return Derivation("Ope-Nil", concl)
        if len(g) < len(h) or not g:
            return None
        (x, s), g0 = g.bindings[-1], g.prefix(len(g) - 1)
        if h and h.bindings[-1][0] == x:
            u = h.bindings[-1][1]
            rest = go(g0, h.prefix(len(h) - 1))
            if rest is not None and set(free_vars(u)) <= set(g0.dom()):
                res = prover.prove(SubJudgement(SystemId.DSUB_ORIG, g0, s, u), depth)
                if res.proved:
                    return Derivation("Ope-Keep", concl, (rest, res.derivation))
                unsure = unsure or res.exhausted
        rest = go(g0, h)
        if rest is not None:
            return Derivation("Ope-Drop", concl, (rest,))
        return None

    d = go(ctx, sub)
    if d is not None:
        return SearchResult(Verdict.PROVED, d, depth)
    return SearchResult(Verdict.DEPTH_EXHAUSTED if unsure else Verdict.REFUTED, None, depth)


# -- catalog -------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogCheck:
    """One expected outcome inside a catalog entry.

    ``kind`` is ``subtyping`` (``system`` may also be ``step`` or ``stare-at``),
    ``typing``, ``image`` (image membership) or ``map`` (the mapped judgement).
    """

    kind: str
    text: str
    expect: str
    system: Optional[str] = None
    depth: int = 8
    allow_fun: bool = False


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    source: str
    checks: tuple = field(default_factory=tuple)

    @property
    def expected(self) -> dict:
        return {c.system or c.kind: c.expect for c in self.checks}


CATALOG_VERSION = 1


@lru_cache(maxsize=1)
def _load() -> tuple:
    raw = json.loads(resources.files("dsub").joinpath("data/catalog.json").read_text(encoding="utf-8"))
    if raw.get("version") != CATALOG_VERSION:
        raise ValueError(f"unsupported catalog version {raw.get('version')!r}")
    return tuple(
        CatalogEntry(e["name"], e["description"], e["source"], tuple(CatalogCheck(**c) for c in e["checks"]))
        for e in raw["entries"]
    )


def counterexample_catalog() -> list[CatalogEntry]:
    return list(_load())


@dataclass(frozen=True)
class CheckOutcome:
    entry: str
    check: CatalogCheck
    actual: str

    @property
    def ok(self) -> bool:
        return self.actual == self.check.expect


def run_check(entry: CatalogEntry, c: CatalogCheck) -> CheckOutcome:
    """Evaluate one catalog check; the parser and deciders are imported lazily."""
    from .deciders import stare_at, step_subtype
    from .parser import parse_judgement, parse_type, parse_typing, print_judgement

    if c.kind == "subtyping":
        if c.system in ("step", "stare-at"):
            j = parse_judgement(c.text, SystemId.DSTRONG_KERNEL)
            if c.system == "step":
                v = step_subtype(j.left_ctx, j.lhs, j.rhs)
            else:
                v = stare_at(j.left_ctx, j.lhs, j.rhs, j.right_ctx)
            actual = "accepted" if v.accepted else "rejected"
        else:
            j = parse_judgement(c.text, SystemId(c.system))
            actual = prove_subtyping(j, c.depth).verdict.value
    elif c.kind == "typing":
        tj = parse_typing(c.text)
        actual = prove_typing(tj.ctx, tj.term, tj.type, c.depth).verdict.value
    elif c.kind == "image":
        actual = str(image_membership(parse_type(c.text, "D"), allow_fun=c.allow_fun)).lower()
    elif c.kind == "map":
        j = parse_judgement(c.text, SystemId.FSUB)
        actual = print_judgement(map_judgement(j, SystemId.DSUB_ORIG, allow_fun=c.allow_fun))
    else:
        raise ValueError(f"unknown check kind {c.kind!r}")
    return CheckOutcome(entry.name, c, actual)


def replay_catalog(entries=None) -> list[CheckOutcome]:
    entries = counterexample_catalog() if entries is None else entries
    return [run_check(e, c) for e in entries for c in e.checks]
