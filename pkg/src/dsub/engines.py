"""Declarative rule systems as depth-bounded backtracking proof search.

Each system is a fixed rule table tried axioms first. The depth cap counts rule
applications on the longest branch. Proved goals and settled failures are tabled.
Systems without a transitivity rule also cut a goal that is already open on the
current branch, which lets small searches finish with ``REFUTED``.

Systems with a transitivity rule draw the middle type from a finite candidate
pool, skip the cycle cut, and never report ``REFUTED``.
"""

from __future__ import annotations

import math
from typing import Iterator, Optional

from .deciders import binder_name, exposure
from .enumerate import enumerate_types
from .errors import InputError
from .judgements import Derivation, SearchResult, SubJudgement, SystemId, TypingJudgement, Verdict
from .syntax import (
    BOT, TOP, All, Apply, Bot, Context, FForall, FFun, FTVar, FTop, Lambda, Let, Path,
    Top, TypeDecl, TypeTag, Var, alpha_eq, canon, closed_in, ctx_well_formed, fresh,
    free_vars, has_fun, is_dtype, is_ftype, is_invertible, measure, subst_var_in_term,
    subst_var_in_type,
)

INF = math.inf

DEFAULT_TRANS_EXTRA = 1


def default_trans_cap(lhs, rhs) -> int:
    return max(measure(lhs), measure(rhs)) + DEFAULT_TRANS_EXTRA


class Prover:
    """Bounded proof search for one rule system.

    Tables survive across queries, so a single prover can answer many judgements
    cheaply. With ``trans_cap=None`` the Trans candidate pool is sized per query
    from the judgement; tables are then kept per cap value. Tabled failures make a
    shared prover's non-proofs history dependent: it may settle a goal as refuted
    where a fresh prover reports exhaustion at the same depth, or the reverse.
    Proofs are unaffected, and refuted never meets proved.
    """

    def __init__(self, system: SystemId, trans_cap: Optional[int] = None, *, inversion: bool = False):
        self.system = SystemId(system)
        if inversion and self.system not in INVERSION_SYSTEMS:
            raise InputError(f"inversion pruning is not available for {self.system.value}")
        self.trans_cap = trans_cap
        self.inversion = inversion
        self._tables: dict = {}
        self._pools: dict = {}
        self._invertible: dict = {}

    # -- public entry points -------------------------------------------------

    def prove(self, j, depth: int) -> SearchResult:
        if depth < 1:
            raise InputError("depth must be >= 1")
        if isinstance(j, SubJudgement):
            validate_judgement(j)
            cap = self.trans_cap if self.trans_cap is not None else default_trans_cap(j.lhs, j.rhs)
        else:
            validate_typing(j)
            cap = self.trans_cap if self.trans_cap is not None else default_trans_cap(j.type, j.type)
        self._cap = cap
        self._proved, self._failed, self._bounded = self._tables.setdefault(cap, ({}, set(), {}))
        self._stack: dict = {}
        # With Trans the search never claims REFUTED, so cycles are left to the depth
        # cap instead: every outcome is then a function of (goal, remaining depth)
        # alone and can be tabled without tracking which open goals it relied on.
        self._cut_cycles = not self.system.has_trans
        self._cap_hit = False
        self._pool_used = False
        self._nodes = 0
        d, _ = self._search(j, depth, 0)
        if d is not None:
            verdict = Verdict.PROVED
        elif self._cap_hit or self._pool_used or self.system.has_trans:
            verdict = Verdict.DEPTH_EXHAUSTED
        else:
            verdict = Verdict.REFUTED
        truncated = self.system.has_trans or self._pool_used
        return SearchResult(verdict, d, depth, truncated, self._nodes, {"trans_cap": cap})

    # -- core search ---------------------------------------------------------

    def _search(self, goal, rem: int, level: int):
        key = goal.key
        d = self._proved.get(key)
        if d is not None and d.height <= rem:
            return d, INF
        if key in self._failed:
            return None, INF
        b = self._bounded.get(key)
        if rem <= 0 or (b is not None and rem <= b):
            self._cap_hit = True
            return None, INF
        open_level = self._stack.get(key) if self._cut_cycles else None
        if open_level is not None:
            return None, open_level
        if self._cut_cycles:
            self._stack[key] = level
        outer_cap = self._cap_hit
        self._cap_hit = False
        min_cut = INF
        found = None
        for rule, premises in self._rules(goal):
            self._nodes += 1
            subs = []
            for p in premises:
                sd, cut = self._search(p, rem - 1, level + 1)
                min_cut = min(min_cut, cut)
                if sd is None:
                    break
                subs.append(sd)
            else:
                found = Derivation(rule, goal, tuple(subs))
                break
        if self._cut_cycles:
            del self._stack[key]
        capped = self._cap_hit
        self._cap_hit = outer_cap or capped
        if found is not None:
            old = self._proved.get(key)
            if old is None or found.height < old.height:
                self._proved[key] = found
            return found, INF
        if min_cut >= level:
            if capped:
                self._bounded[key] = max(self._bounded.get(key, 0), rem)
            else:
                self._failed.add(key)
            return None, INF
        return None, min_cut

    def _rules(self, goal) -> Iterator[tuple]:
        if isinstance(goal, TypingJudgement):
            return self._typing_rules(goal)
        rules = _RULES[self.system](self, goal)
        if self.inversion and self._is_invertible(goal.left_ctx):
            allowed = inversion_allowed(goal.lhs, goal.rhs)
            if allowed is not None:
                return (r for r in rules if r[0] in allowed)
        return rules

    def _is_invertible(self, ctx: Context) -> bool:
        ok = self._invertible.get(ctx)
        if ok is None:
            ok = self._invertible[ctx] = is_invertible(ctx)
        return ok

    # -- helpers shared by rule tables ----------------------------------------

    def _sub(self, ctx, s, u, rctx=None) -> SubJudgement:
        return SubJudgement(self.system, ctx, s, u, rctx)

    def _trans(self, g: SubJudgement, rule: str = "Trans"):
        self._pool_used = True
        s, u = g.lhs, g.rhs
        for t in self._pool(g.left_ctx):
            if alpha_eq(t, s) or alpha_eq(t, u):
                continue
            yield rule, [self._sub(g.left_ctx, s, t), self._sub(g.left_ctx, t, u)]

    def _pool(self, ctx: Context) -> tuple:
        key = (ctx, self._cap, self.system.is_fsub, self.system is SystemId.FSUB)
        pool = self._pools.get(key)
        if pool is not None:
            return pool
        seen, out = set(), []

        def add(t):
            if closed_in(t, ctx):
                c = canon(t)
                if c not in seen:
                    seen.add(c)
                    out.append(t)

        if self.system.is_fsub:
            for name in ctx.dom():
                add(FTVar(name))
            for _, t in ctx:
                for part in _components(t):
                    add(part)
            for t in enumerate_types("F", self._cap, ctx, fun=self.system is SystemId.FSUB):
                add(t)
        else:
            for name in ctx.dom():
                add(Path(name))
            for _, t in ctx:
                for part in _components(t):
                    add(part)
            for t in enumerate_types("D", self._cap, ctx):
                add(t)
        pool = tuple(out)
        self._pools[key] = pool
        return pool

    # -- typing ---------------------------------------------------------------

    def _typing_rules(self, g: TypingJudgement):
        ctx, t, ty = g.ctx, g.term, g.type
        sub_sys = SystemId.DSUB_ORIG
        if isinstance(t, Var):
            bound = ctx.lookup(t.name)
            if alpha_eq(bound, ty):
                yield "Var", []
            else:
                yield "Sub", [TypingJudgement(ctx, t, bound), SubJudgement(sub_sys, ctx, bound, ty)]
            return
        if isinstance(t, TypeTag):
            tag = TypeDecl(t.type, t.type)
            if alpha_eq(tag, ty):
                yield "Typ-I", []
            else:
                yield "Sub", [TypingJudgement(ctx, t, tag), SubJudgement(sub_sys, ctx, tag, ty)]
            return
        self._pool_used = True
        if isinstance(t, Lambda):
            if isinstance(ty, All) and alpha_eq(ty.param_type, t.param_type):
                z = binder_name(t.param, ty.param, ctx.dom())
                yield "All-I", [TypingJudgement(ctx.extend(z, t.param_type), subst_var_in_term(t.body, t.param, z),
                                                subst_var_in_type(ty.ret, ty.param, z))]
            for cand in synth(ctx, t):
                if not alpha_eq(cand, ty):
                    yield "Sub", [TypingJudgement(ctx, t, cand), SubJudgement(sub_sys, ctx, cand, ty)]
            return
        if isinstance(t, Apply):
            for f in fun_candidates(ctx, t.fun):
                res = subst_var_in_type(f.ret, f.param, t.arg)
                prem = [TypingJudgement(ctx, Var(t.fun), f), TypingJudgement(ctx, Var(t.arg), f.param_type)]
                if alpha_eq(res, ty):
                    yield "All-E", prem
                else:
                    yield "Sub", [TypingJudgement(ctx, t, res), SubJudgement(sub_sys, ctx, res, ty)]
            return
        if isinstance(t, Let):
            z = fresh(t.bound, set(ctx.dom()) | free_vars(ty))
            for s in synth(ctx, t.rhs):
                yield "Let", [TypingJudgement(ctx, t.rhs, s),
                              TypingJudgement(ctx.extend(z, s), subst_var_in_term(t.body, t.bound, z), ty)]
            return
        raise InputError(f"not a term: {t!r}")


INVERSION_SYSTEMS = frozenset({SystemId.DSUB_ORIG, SystemId.DSUB_UNRAVELLED, SystemId.DSUB_NF, SystemId.DSUB_NF_NOBB})


def inversion_allowed(s, u) -> Optional[frozenset]:
    """Rules that can still conclude ``s <: u`` in an invertible context, or None for no restriction.

    Encodes the inversion lemmas for invertible contexts: Top only has Top above it,
    Bot only Bot below it, declarations and dependent functions are related only to
    Top or to their own kind (and then only structurally), and a declaration or
    function type cannot sit below a path.
    """
    if isinstance(u, Top) or isinstance(s, Bot):
        return None
    if isinstance(s, Top) or isinstance(u, Bot):
        return frozenset()
    if isinstance(s, TypeDecl):
        return frozenset({"Refl", "Bnd"}) if isinstance(u, TypeDecl) else frozenset()
    if isinstance(s, All):
        return frozenset({"Refl", "All"}) if isinstance(u, All) else frozenset()
    if isinstance(u, TypeDecl):
        return frozenset()
    return None


def _components(t) -> list:
    """A context-bound type and its immediate closed components."""
    out = [t]
    if isinstance(t, TypeDecl):
        out += [t.lower, t.upper]
    elif isinstance(t, All):
        out.append(t.param_type)
        if t.param not in free_vars(t.ret):
            out.append(t.ret)
    elif isinstance(t, FFun):
        out += [t.dom, t.cod]
    elif isinstance(t, FForall):
        out.append(t.bound)
        if t.var not in free_vars(t.body):
            out.append(t.body)
    return out


def fun_candidates(ctx: Context, name: str) -> list:
    """Function types a variable may be used at: its declared type and its exposure."""
    out = []
    t = ctx.lookup(name)
    for cand in (t, exposure(ctx, t)):
        if isinstance(cand, All) and not any(alpha_eq(cand, o) for o in out):
            out.append(cand)
    return out


def synth(ctx: Context, t) -> list:
    """Candidate types for a term, built syntax-directedly (used as Sub middles)."""
    if isinstance(t, Var):
        return [ctx.lookup(t.name)]
    if isinstance(t, TypeTag):
        return [TypeDecl(t.type, t.type)]
    if isinstance(t, Lambda):
        z = fresh(t.param, ctx.dom())
        inner = ctx.extend(z, t.param_type)
        return [All(z, t.param_type, b) for b in synth(inner, subst_var_in_term(t.body, t.param, z))]
    if isinstance(t, Apply):
        return [subst_var_in_type(f.ret, f.param, t.arg) for f in fun_candidates(ctx, t.fun)]
    if isinstance(t, Let):
        out = []
        for s in synth(ctx, t.rhs):
            z = fresh(t.bound, ctx.dom())
            for b in synth(ctx.extend(z, s), subst_var_in_term(t.body, t.bound, z)):
                if z not in free_vars(b):
                    out.append(b)
        return out
    raise InputError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Rule tables


def _all_premises(p: Prover, g: SubJudgement, contravariant_param: bool = True):
    s, u = g.lhs, g.rhs
    z = binder_name(s.param, u.param, g.left_ctx.dom() + g.right_ctx.dom())
    body_l = subst_var_in_type(s.ret, s.param, z)
    body_r = subst_var_in_type(u.ret, u.param, z)
    return z, body_l, body_r


def _fall(p: Prover, g: SubJudgement, rule: str = "F-All"):
    s, u = g.lhs, g.rhs
    z = binder_name(s.var, u.var, g.left_ctx.dom())
    return rule, [
        p._sub(g.left_ctx, u.bound, s.bound),
        p._sub(g.left_ctx.extend(z, u.bound), subst_var_in_type(s.body, s.var, z), subst_var_in_type(u.body, u.var, z)),
    ]


def _rules_fsub(p: Prover, g: SubJudgement):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    if isinstance(s, FForall) and isinstance(u, FForall):
        yield _fall(p, g)
    if isinstance(u, FTop):
        yield "F-Top", []
    if alpha_eq(s, u):
        yield "F-Refl", []
    if isinstance(s, FTVar) and alpha_eq(ctx.lookup(s.name), u):
        yield "F-Tvar", []
    if isinstance(s, FFun) and isinstance(u, FFun):
        yield "F-Fun", [p._sub(ctx, u.dom, s.dom), p._sub(ctx, s.cod, u.cod)]
    yield from p._trans(g, "F-Trans")


def _rules_fsub_nf(p: Prover, g: SubJudgement, fun: bool = True):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    if isinstance(u, FTop):
        yield "F-Top", []
    if isinstance(s, FTVar) and isinstance(u, FTVar) and s.name == u.name:
        yield "F-VarRefl", []
    if isinstance(s, FTVar):
        yield "F-Tvar'", [p._sub(ctx, ctx.lookup(s.name), u)]
    if fun and isinstance(s, FFun) and isinstance(u, FFun):
        yield "F-Fun", [p._sub(ctx, u.dom, s.dom), p._sub(ctx, s.cod, u.cod)]
    if isinstance(s, FForall) and isinstance(u, FForall):
        yield _fall(p, g)


def _rules_fsub_minus(p: Prover, g: SubJudgement):
    return _rules_fsub_nf(p, g, fun=False)


def _dsub_structural(p: Prover, g: SubJudgement):
    """Top, Bot, Refl, Bnd, All: shared by every full D<: presentation."""
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    if isinstance(u, Top):
        yield "Top", []
    if isinstance(s, Bot):
        yield "Bot", []
    if alpha_eq(s, u):
        yield "Refl", []
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        yield "Bnd", [p._sub(ctx, u.lower, s.lower), p._sub(ctx, s.upper, u.upper)]
    if isinstance(s, All) and isinstance(u, All):
        z, bl, br = _all_premises(p, g)
        yield "All", [p._sub(ctx, u.param_type, s.param_type), p._sub(ctx.extend(z, u.param_type), bl, br)]


def _sel_unravelled(p: Prover, g: SubJudgement):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    if isinstance(u, Path):
        yield "Sel1'", [p._sub(ctx, ctx.lookup(u.var), TypeDecl(s, TOP))]
    if isinstance(s, Path):
        yield "Sel2'", [p._sub(ctx, ctx.lookup(s.var), TypeDecl(BOT, u))]


def _rules_dsub_orig(p: Prover, g: SubJudgement):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    yield from _dsub_structural(p, g)
    if isinstance(u, Path):
        x = Var(u.var)
        bound = ctx.lookup(u.var)
        if isinstance(bound, TypeDecl) and alpha_eq(bound.lower, s):
            yield "Sel1", [TypingJudgement(ctx, x, bound)]
        decl = TypeDecl(s, TOP)
        if not alpha_eq(decl, bound):
            yield "Sel1", [TypingJudgement(ctx, x, decl)]
    if isinstance(s, Path):
        x = Var(s.var)
        bound = ctx.lookup(s.var)
        if isinstance(bound, TypeDecl) and alpha_eq(bound.upper, u):
            yield "Sel2", [TypingJudgement(ctx, x, bound)]
        decl = TypeDecl(BOT, u)
        if not alpha_eq(decl, bound):
            yield "Sel2", [TypingJudgement(ctx, x, decl)]
    yield from p._trans(g)


def _rules_dsub_unravelled(p: Prover, g: SubJudgement):
    yield from _dsub_structural(p, g)
    yield from _sel_unravelled(p, g)
    yield from p._trans(g)


def _rules_dsub_nf(p: Prover, g: SubJudgement, bb: bool = True):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    yield from _dsub_structural(p, g)
    yield from _sel_unravelled(p, g)
    if bb:
        for x, bound in ctx:
            yield "BB", [p._sub(ctx, bound, TypeDecl(s, TOP)), p._sub(ctx, bound, TypeDecl(BOT, u))]


def _rules_dsub_nf_nobb(p: Prover, g: SubJudgement):
    return _rules_dsub_nf(p, g, bb=False)


def _rules_kernel(p: Prover, g: SubJudgement):
    ctx, s, u = g.left_ctx, g.lhs, g.rhs
    if isinstance(u, Top):
        yield "K-Top", []
    if isinstance(s, Bot):
        yield "K-Bot", []
    if isinstance(s, Path) and isinstance(u, Path) and s.var == u.var:
        yield "K-VRefl", []
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        yield "K-Bnd", [p._sub(ctx, u.lower, s.lower), p._sub(ctx, s.upper, u.upper)]
    if isinstance(s, All) and isinstance(u, All) and alpha_eq(s.param_type, u.param_type):
        z, bl, br = _all_premises(p, g)
        yield "K-All", [p._sub(ctx.extend(z, s.param_type), bl, br)]
    if isinstance(u, Path):
        yield "K-Sel1", [p._sub(ctx, ctx.lookup(u.var), TypeDecl(s, TOP))]
    if isinstance(s, Path):
        yield "K-Sel2", [p._sub(ctx, ctx.lookup(s.var), TypeDecl(BOT, u))]


def _rules_strong_kernel(p: Prover, g: SubJudgement):
    g1, g2, s, u = g.left_ctx, g.right_ctx, g.lhs, g.rhs
    if isinstance(u, Top):
        yield "Sk-Top", []
    if isinstance(s, Bot):
        yield "Sk-Bot", []
    if isinstance(s, Path) and isinstance(u, Path) and s.var == u.var:
        yield "Sk-VRefl", []
    if isinstance(s, TypeDecl) and isinstance(u, TypeDecl):
        yield "Sk-Bnd", [p._sub(g2, u.lower, s.lower, g1), p._sub(g1, s.upper, u.upper, g2)]
    if isinstance(s, All) and isinstance(u, All):
        z, bl, br = _all_premises(p, g)
        yield "Sk-All", [p._sub(g2, u.param_type, s.param_type, g1),
                         p._sub(g1.extend(z, s.param_type), bl, br, g2.extend(z, u.param_type))]
    if isinstance(u, Path):
        yield "Sk-Sel1", [p._sub(g2, g2.lookup(u.var), TypeDecl(s, TOP), g1)]
    if isinstance(s, Path):
        yield "Sk-Sel2", [p._sub(g1, g1.lookup(s.var), TypeDecl(BOT, u), g2)]


_RULES = {
    SystemId.FSUB: _rules_fsub,
    SystemId.FSUB_NF: _rules_fsub_nf,
    SystemId.FSUB_MINUS: _rules_fsub_minus,
    SystemId.DSUB_ORIG: _rules_dsub_orig,
    SystemId.DSUB_UNRAVELLED: _rules_dsub_unravelled,
    SystemId.DSUB_NF: _rules_dsub_nf,
    SystemId.DSUB_NF_NOBB: _rules_dsub_nf_nobb,
    SystemId.DKERNEL: _rules_kernel,
    SystemId.DSTRONG_KERNEL: _rules_strong_kernel,
}


# ---------------------------------------------------------------------------
# Validation and module-level API


def validate_judgement(j: SubJudgement) -> None:
    sys_ = j.system
    want = is_ftype if sys_.is_fsub else is_dtype
    for t in (j.lhs, j.rhs):
        if not want(t):
            raise InputError(f"{t!r} is not a type of {sys_.value}")
        if sys_ is SystemId.FSUB_MINUS and has_fun(t):
            raise InputError("function types are not part of F<:-minus")
    for ctx in (j.left_ctx, j.right_ctx):
        if not ctx_well_formed(ctx):
            raise InputError(f"context is not well-formed: {ctx}")
        for _, t in ctx:
            if not want(t):
                raise InputError(f"{t!r} is not a type of {sys_.value}")
            if sys_ is SystemId.FSUB_MINUS and has_fun(t):
                raise InputError("function types are not part of F<:-minus")
    if not sys_.two_contexts and j.left_ctx != j.right_ctx:
        raise InputError(f"{sys_.value} judgements carry a single context")
    if not closed_in(j.lhs, j.left_ctx):
        raise InputError(f"{j.lhs} is not closed in the left context")
    if not closed_in(j.rhs, j.right_ctx):
        raise InputError(f"{j.rhs} is not closed in the right context")


def validate_typing(j: TypingJudgement) -> None:
    if not ctx_well_formed(j.ctx):
        raise InputError(f"context is not well-formed: {j.ctx}")
    if not closed_in(j.term, j.ctx) or not closed_in(j.type, j.ctx):
        raise InputError("term and type must be closed in the context")


def prove_subtyping(j: SubJudgement, depth: int, *, trans_cap: Optional[int] = None,
                    prover: Optional[Prover] = None) -> SearchResult:
    prover = prover or Prover(j.system, trans_cap)
    if prover.system is not j.system:
        raise InputError("prover and judgement systems differ")
    return prover.prove(j, depth)


def prove_typing(ctx: Context, term, ty, depth: int, *, trans_cap: Optional[int] = None,
                 prover: Optional[Prover] = None) -> SearchResult:
    prover = prover or Prover(SystemId.DSUB_ORIG, trans_cap)
    return prover.prove(TypingJudgement(ctx, term, ty), depth)
