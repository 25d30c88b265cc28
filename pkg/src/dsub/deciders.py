"""Terminating subtyping algorithms: step subtyping (kernel D<:) and stare-at
subtyping (strong kernel D<:), with Exposure, Revealing, Upcast and Downcast.

Every operation produces a trace built from :class:`Derivation` nodes so a run
can be replayed rule by rule (:func:`replay`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .judgements import AlgoJudgement, Derivation, OpJudgement
from .syntax import (
    BOT, EMPTY, TOP, All, Bot, Context, Path, Top, TypeDecl, alpha_eq, ctx_equal, fresh,
    measure, measure_ctx, subst_var_in_type,
)

STEP = "step"
STARE_AT = "stare-at"


@dataclass(frozen=True)
class AlgoVerdict:
    accepted: bool
    trace: Optional[Derivation]
    fuel_used: int  # deepest chain of nested recursive subtyping calls
    calls: int = 0  # total recursive subtyping calls, backtracking included
    bound: Optional[int] = None  # measure bound on fuel (stare-at only)

    @property
    def trace_depth(self) -> int:
        return self.trace.height if self.trace is not None else 0


@dataclass(frozen=True)
class RevealResult:
    out_ctx: Context
    out_type: object
    trace: Optional[Derivation] = None

    def __iter__(self):
        return iter((self.out_ctx, self.out_type))


# ---------------------------------------------------------------------------
# Exposure / Upcast / Downcast


def _expose(ctx: Context, t) -> Derivation:
    if not isinstance(t, Path):
        return Derivation("Exp-Stop", OpJudgement("exposure", ctx, t, t))
    prefix, bound = ctx.split(t.var)
    inner = _expose(prefix, bound)
    e = inner.conclusion.output
    if isinstance(e, Bot):
        return Derivation("Exp-Bot", OpJudgement("exposure", ctx, t, BOT), (inner,))
    if isinstance(e, TypeDecl):
        upper = _expose(prefix, e.upper)
        return Derivation("Exp-Bnd", OpJudgement("exposure", ctx, t, upper.conclusion.output), (inner, upper))
    return Derivation("Exp-Top", OpJudgement("exposure", ctx, t, TOP))


def exposure(ctx: Context, t):
    return _expose(ctx, t).conclusion.output


def _cast(ctx: Context, p: Path, up: bool) -> Derivation:
    op = "upcast" if up else "downcast"
    prefix, bound = ctx.split(p.var)
    inner = _expose(prefix, bound)
    e = inner.conclusion.output
    if isinstance(e, Bot):
        rule, out = ("Uc-Bot", BOT) if up else ("Dc-Top", TOP)
        return Derivation(rule, OpJudgement(op, ctx, p, out), (inner,))
    if isinstance(e, TypeDecl):
        rule, out = ("Uc-Bnd", e.upper) if up else ("Dc-Bnd", e.lower)
        return Derivation(rule, OpJudgement(op, ctx, p, out), (inner,))
    rule, out = ("Uc-Top", TOP) if up else ("Dc-bot", BOT)
    return Derivation(rule, OpJudgement(op, ctx, p, out))


def upcast_step(ctx: Context, p: Path):
    return _cast(ctx, p, True).conclusion.output


def downcast_step(ctx: Context, p: Path):
    return _cast(ctx, p, False).conclusion.output


# ---------------------------------------------------------------------------
# Revealing / Upcast / Downcast returning prefix contexts


def _reveal(ctx: Context, t) -> Derivation:
    if not isinstance(t, Path):
        return Derivation("Rv-Stop", OpJudgement("reveal", ctx, t, t, ctx))
    prefix, bound = ctx.split(t.var)
    inner = _reveal(prefix, bound)
    j = inner.conclusion
    if isinstance(j.output, Bot):
        return Derivation("Rv-Bot", OpJudgement("reveal", ctx, t, BOT, EMPTY), (inner,))
    if isinstance(j.output, TypeDecl):
        upper = _reveal(j.out_ctx, j.output.upper)
        u = upper.conclusion
        return Derivation("Rv-Bnd", OpJudgement("reveal", ctx, t, u.output, u.out_ctx), (inner, upper))
    return Derivation("Rv-Top", OpJudgement("reveal", ctx, t, TOP, EMPTY))


def reveal(ctx: Context, t) -> RevealResult:
    d = _reveal(ctx, t)
    return RevealResult(d.conclusion.out_ctx, d.conclusion.output, d)


def _cast_sa(ctx: Context, p: Path, up: bool) -> Derivation:
    op = "upcast-sa" if up else "downcast-sa"
    prefix, bound = ctx.split(p.var)
    inner = _reveal(prefix, bound)
    j = inner.conclusion
    if isinstance(j.output, Bot):
        rule, out = ("U-Bot", BOT) if up else ("D-Top", TOP)
        return Derivation(rule, OpJudgement(op, ctx, p, out, EMPTY), (inner,))
    if isinstance(j.output, TypeDecl):
        rule, out = ("U-Bnd", j.output.upper) if up else ("D-Bnd", j.output.lower)
        return Derivation(rule, OpJudgement(op, ctx, p, out, j.out_ctx), (inner,))
    rule, out = ("U-Top", TOP) if up else ("D-bot", BOT)
    return Derivation(rule, OpJudgement(op, ctx, p, out, EMPTY))


def upcast_sa(ctx: Context, p: Path) -> RevealResult:
    d = _cast_sa(ctx, p, True)
    return RevealResult(d.conclusion.out_ctx, d.conclusion.output, d)


def downcast_sa(ctx: Context, p: Path) -> RevealResult:
    d = _cast_sa(ctx, p, False)
    return RevealResult(d.conclusion.out_ctx, d.conclusion.output, d)


# ---------------------------------------------------------------------------
# Subtyping algorithms


class _Fuel:
    def __init__(self):
        self.calls = 0
        self.deepest = 0

    def enter(self, level: int):
        self.calls += 1
        self.deepest = max(self.deepest, level)


def binder_name(a: str, b: str, avoid) -> str:
    avoid = set(avoid)
    if a not in avoid:
        return a
    if b not in avoid:
        return b
    return fresh(a, avoid)


def _step(ctx: Context, s, u, level: int, fuel: _Fuel) -> Optional[Derivation]:
    fuel.enter(level)
    j = AlgoJudgement(STEP, ctx, s, u)
    if isinstance(u, Top):
        return Derivation("S-Top", j)
    if isinstance(s, Bot):
        return Derivation("S-Bot", j)
    if isinstance(s, Path) and isinstance(u, Path) and s.var == u.var:
        return Derivation("S-VRefl", j)
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        lo = _step(ctx, u.lower, s.lower, level + 1, fuel)
        if lo is None:
            return None
        hi = _step(ctx, s.upper, u.upper, level + 1, fuel)
        return None if hi is None else Derivation("S-Bnd", j, (lo, hi))
    if isinstance(s, All) and isinstance(u, All):
        if not alpha_eq(s.param_type, u.param_type):
            return None
        z = binder_name(s.param, u.param, ctx.dom())
        body = _step(ctx.extend(z, s.param_type), subst_var_in_type(s.ret, s.param, z),
                     subst_var_in_type(u.ret, u.param, z), level + 1, fuel)
        return None if body is None else Derivation("S-All", j, (body,))
    # Path cases; when both sides are paths try the left unfold first, then the right.
    if isinstance(s, Path):
        cast = _cast(ctx, s, True)
        rest = _step(ctx, cast.conclusion.output, u, level + 1, fuel)
        if rest is not None:
            return Derivation("S-Sel2", j, (cast, rest))
    if isinstance(u, Path):
        cast = _cast(ctx, u, False)
        rest = _step(ctx, s, cast.conclusion.output, level + 1, fuel)
        if rest is not None:
            return Derivation("S-Sel1", j, (cast, rest))
    return None


def step_subtype(ctx: Context, s, u) -> AlgoVerdict:
    fuel = _Fuel()
    trace = _step(ctx, s, u, 1, fuel)
    return AlgoVerdict(trace is not None, trace, fuel.deepest, fuel.calls)


def _stare(g1: Context, s, u, g2: Context, level: int, fuel: _Fuel) -> Optional[Derivation]:
    fuel.enter(level)
    j = AlgoJudgement(STARE_AT, g1, s, u, g2)
    if isinstance(u, Top):
        return Derivation("SA-Top", j)
    if isinstance(s, Bot):
        return Derivation("SA-Bot", j)
    if isinstance(s, Path) and isinstance(u, Path) and s.var == u.var:
        return Derivation("SA-VRefl", j)
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        lo = _stare(g2, u.lower, s.lower, g1, level + 1, fuel)
        if lo is None:
            return None
        hi = _stare(g1, s.upper, u.upper, g2, level + 1, fuel)
        return None if hi is None else Derivation("SA-Bnd", j, (lo, hi))
    if isinstance(s, All) and isinstance(u, All):
        param = _stare(g2, u.param_type, s.param_type, g1, level + 1, fuel)
        if param is None:
            return None
        z = binder_name(s.param, u.param, g1.dom() + g2.dom())
        body = _stare(g1.extend(z, s.param_type), subst_var_in_type(s.ret, s.param, z),
                      subst_var_in_type(u.ret, u.param, z), g2.extend(z, u.param_type), level + 1, fuel)
        return None if body is None else Derivation("SA-All", j, (param, body))
    if isinstance(s, Path):
        cast = _cast_sa(g1, s, True)
        c = cast.conclusion
        rest = _stare(c.out_ctx, c.output, u, g2, level + 1, fuel)
        if rest is not None:
            return Derivation("SA-Sel2", j, (cast, rest))
    if isinstance(u, Path):
        cast = _cast_sa(g2, u, False)
        c = cast.conclusion
        rest = _stare(g1, s, c.output, c.out_ctx, level + 1, fuel)
        if rest is not None:
            return Derivation("SA-Sel1", j, (cast, rest))
    return None


def stare_at(g1: Context, s, u, g2: Optional[Context] = None) -> AlgoVerdict:
    g2 = g1 if g2 is None else g2
    fuel = _Fuel()
    trace = _stare(g1, s, u, g2, 1, fuel)
    bound = measure_ctx(g1) + measure(s) + measure(u) + measure_ctx(g2)
    return AlgoVerdict(trace is not None, trace, fuel.deepest, fuel.calls, bound)


# ---------------------------------------------------------------------------
# Replay


def replay(d: Derivation) -> bool:
    """Re-check an algorithmic trace node by node against the algorithmic rules."""
    try:
        return _replay(d)
    except (KeyError, AttributeError, TypeError):
        return False


def _op_node_ok(d: Derivation) -> bool:
    j = d.conclusion
    if not isinstance(j, OpJudgement):
        return False
    if j.op == "exposure":
        ref = _expose(j.ctx, j.input)
    elif j.op in ("upcast", "downcast"):
        ref = _cast(j.ctx, j.input, j.op == "upcast")
    elif j.op == "reveal":
        ref = _reveal(j.ctx, j.input)
    else:
        ref = _cast_sa(j.ctx, j.input, j.op == "upcast-sa")
    r = ref.conclusion
    return (
        ref.rule == d.rule
        and alpha_eq(r.output, j.output)
        and (r.out_ctx is None) == (j.out_ctx is None)
        and (r.out_ctx is None or ctx_equal(r.out_ctx, j.out_ctx))
    )


def _replay(d: Derivation) -> bool:
    j = d.conclusion
    if not isinstance(j, AlgoJudgement):
        return False
    g1, s, u, g2 = j.left_ctx, j.lhs, j.rhs, j.right_ctx
    two = j.algo == STARE_AT
    if not two and not ctx_equal(g1, g2):
        return False
    p = d.premises
    r = d.rule.split("-", 1)[1]
    if r == "Top":
        return isinstance(u, Top) and not p
    if r == "Bot":
        return isinstance(s, Bot) and not p
    if r == "VRefl":
        return isinstance(s, Path) and isinstance(u, Path) and s.var == u.var and not p
    if r == "Bnd":
        if not (isinstance(s, TypeDecl) and isinstance(u, TypeDecl) and len(p) == 2):
            return False
        lo, hi = p[0].conclusion, p[1].conclusion
        return (
            lo.same(AlgoJudgement(j.algo, g2, u.lower, s.lower, g1))
            and hi.same(AlgoJudgement(j.algo, g1, s.upper, u.upper, g2))
            and _replay(p[0]) and _replay(p[1])
        )
    if r == "All":
        if not (isinstance(s, All) and isinstance(u, All)):
            return False
        if two:
            if len(p) != 2 or not p[0].conclusion.same(AlgoJudgement(j.algo, g2, u.param_type, s.param_type, g1)):
                return False
            if not _replay(p[0]):
                return False
            body = p[1]
        else:
            if len(p) != 1 or not alpha_eq(s.param_type, u.param_type):
                return False
            body = p[0]
        b = body.conclusion
        z = b.left_ctx.bindings[-1][0]
        if z in g1 or z in g2:
            return False
        want = AlgoJudgement(j.algo, g1.extend(z, s.param_type), subst_var_in_type(s.ret, s.param, z),
                             subst_var_in_type(u.ret, u.param, z), g2.extend(z, u.param_type))
        return b.same(want) and _replay(body)
    if r in ("Sel1", "Sel2"):
        if len(p) != 2 or not _op_node_ok(p[0]):
            return False
        c, rest = p[0].conclusion, p[1].conclusion
        if r == "Sel2":
            ok_op = c.op == ("upcast-sa" if two else "upcast") and isinstance(s, Path) and c.input == s
            ctx_l = c.out_ctx if two else g1
            want = AlgoJudgement(j.algo, ctx_l, c.output, u, g2)
        else:
            ok_op = c.op == ("downcast-sa" if two else "downcast") and isinstance(u, Path) and c.input == u
            ctx_r = c.out_ctx if two else g2
            want = AlgoJudgement(j.algo, g1, s, c.output, ctx_r)
        ok_ctx = ctx_equal(c.ctx, g1 if r == "Sel2" else g2)
        return ok_op and ok_ctx and rest.same(want) and _replay(p[1])
    return False
