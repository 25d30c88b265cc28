"""Independent validation of derivation trees.

The checker shares no code with proof search beyond syntax utilities: every node
is matched against its named rule, premises are compared up to alpha-equivalence,
and binder extensions must use a variable fresh for the conclusion's context(s).
"""

from __future__ import annotations

from .judgements import Derivation, OpeJudgement, SubJudgement, SystemId, TypingJudgement
from .syntax import (
    BOT, TOP, All, Apply, Bot, Context, FForall, FFun, FTop, FTVar, Lambda, Let, Path, Top,
    TypeDecl, TypeTag, Var, alpha_eq, closed_in, ctx_equal, subst_var_in_term, subst_var_in_type,
)

_D_STRUCT = {"Top", "Bot", "Refl", "Bnd", "All"}

SYSTEM_RULES = {
    SystemId.FSUB: {"F-All", "F-Top", "F-Refl", "F-Tvar", "F-Fun", "F-Trans"},
    SystemId.FSUB_NF: {"F-Top", "F-VarRefl", "F-Tvar'", "F-Fun", "F-All"},
    SystemId.FSUB_MINUS: {"F-Top", "F-VarRefl", "F-Tvar'", "F-All"},
    SystemId.DSUB_ORIG: _D_STRUCT | {"Sel1", "Sel2", "Trans"},
    SystemId.DSUB_UNRAVELLED: _D_STRUCT | {"Sel1'", "Sel2'", "Trans"},
    SystemId.DSUB_NF: _D_STRUCT | {"Sel1'", "Sel2'", "BB"},
    SystemId.DSUB_NF_NOBB: _D_STRUCT | {"Sel1'", "Sel2'"},
    SystemId.DKERNEL: {"K-Top", "K-Bot", "K-VRefl", "K-Bnd", "K-All", "K-Sel1", "K-Sel2"},
    SystemId.DSTRONG_KERNEL: {"Sk-Top", "Sk-Bot", "Sk-VRefl", "Sk-Bnd", "Sk-All", "Sk-Sel1", "Sk-Sel2"},
}


def check_derivation(d: Derivation) -> bool:
    """True iff every node of ``d`` is a correct instance of its named rule."""
    try:
        return _check(d)
    except (KeyError, AttributeError, TypeError, ValueError):
        return False


def _check(d: Derivation) -> bool:
    if not isinstance(d, Derivation):
        return False
    c = d.conclusion
    if isinstance(c, SubJudgement):
        ok = _check_sub(d)
    elif isinstance(c, TypingJudgement):
        ok = _check_typing(d)
    elif isinstance(c, OpeJudgement):
        ok = _check_ope(d)
    else:
        return False
    return ok and all(_check(p) for p in d.premises)


# -- helpers -----------------------------------------------------------------


def _is_sub(d: Derivation, system, left: Context, lhs, rhs, right: Context = None) -> bool:
    c = d.conclusion
    right = left if right is None else right
    return (
        isinstance(c, SubJudgement)
        and c.system is system
        and ctx_equal(c.left_ctx, left)
        and ctx_equal(c.right_ctx, right)
        and alpha_eq(c.lhs, lhs)
        and alpha_eq(c.rhs, rhs)
    )


def _is_typing(d: Derivation, ctx: Context, term, ty) -> bool:
    c = d.conclusion
    return isinstance(c, TypingJudgement) and ctx_equal(c.ctx, ctx) and c.term == term and alpha_eq(c.type, ty)


def _extension(ctx: Context, ext: Context, bound) -> str | None:
    """The variable ``z`` if ``ext`` is ``ctx; z: bound`` with ``z`` fresh, else None."""
    if len(ext) != len(ctx) + 1 or not ctx.is_prefix_of(ext):
        return None
    z, t = ext.bindings[-1]
    if z in ctx.dom() or not alpha_eq(t, bound):
        return None
    return z


def _arity(d: Derivation, n: int) -> bool:
    return len(d.premises) == n


# -- subtyping ---------------------------------------------------------------


def _check_sub(d: Derivation) -> bool:
    c: SubJudgement = d.conclusion
    sysid, rule = c.system, d.rule
    if rule not in SYSTEM_RULES[sysid]:
        return False
    g, s, u = c.left_ctx, c.lhs, c.rhs
    if not sysid.two_contexts and not ctx_equal(c.left_ctx, c.right_ctx):
        return False
    if not (closed_in(s, c.left_ctx) and closed_in(u, c.right_ctx)):
        return False
    if sysid.is_fsub:
        return _check_fsub(d, sysid, g, s, u)
    if sysid is SystemId.DKERNEL:
        return _check_kernel(d, g, s, u)
    if sysid is SystemId.DSTRONG_KERNEL:
        return _check_strong(d, g, s, u, c.right_ctx)
    return _check_dsub(d, sysid, g, s, u)


def _check_fsub(d, sysid, g, s, u) -> bool:
    rule, ps = d.rule, d.premises
    if rule == "F-Top":
        return _arity(d, 0) and isinstance(u, FTop)
    if rule == "F-Refl":
        return _arity(d, 0) and alpha_eq(s, u)
    if rule == "F-VarRefl":
        return _arity(d, 0) and isinstance(s, FTVar) and isinstance(u, FTVar) and s.name == u.name
    if rule == "F-Tvar":
        return _arity(d, 0) and isinstance(s, FTVar) and alpha_eq(g.lookup(s.name), u)
    if rule == "F-Tvar'":
        return _arity(d, 1) and isinstance(s, FTVar) and _is_sub(ps[0], sysid, g, g.lookup(s.name), u)
    if rule == "F-Fun":
        return (_arity(d, 2) and isinstance(s, FFun) and isinstance(u, FFun)
                and _is_sub(ps[0], sysid, g, u.dom, s.dom) and _is_sub(ps[1], sysid, g, s.cod, u.cod))
    if rule == "F-All":
        if not (_arity(d, 2) and isinstance(s, FForall) and isinstance(u, FForall)):
            return False
        if not _is_sub(ps[0], sysid, g, u.bound, s.bound):
            return False
        inner = ps[1].conclusion
        z = _extension(g, inner.left_ctx, u.bound)
        return z is not None and _is_sub(
            ps[1], sysid, inner.left_ctx, subst_var_in_type(s.body, s.var, z), subst_var_in_type(u.body, u.var, z))
    if rule == "F-Trans":
        if not _arity(d, 2):
            return False
        mid = ps[0].conclusion.rhs
        return _is_sub(ps[0], sysid, g, s, mid) and _is_sub(ps[1], sysid, g, mid, u)
    return False


def _all_body_ok(prem: Derivation, sysid, g: Context, s: All, u: All, bound, rg: Context = None, rbound=None) -> bool:
    inner = prem.conclusion
    if not isinstance(inner, SubJudgement):
        return False
    z = _extension(g, inner.left_ctx, bound)
    if z is None:
        return False
    if rg is None:
        right = inner.left_ctx
    else:
        if _extension(rg, inner.right_ctx, rbound) != z:
            return False
        right = inner.right_ctx
    return _is_sub(prem, sysid, inner.left_ctx, subst_var_in_type(s.ret, s.param, z),
                   subst_var_in_type(u.ret, u.param, z), right)


def _check_dsub(d, sysid, g, s, u) -> bool:
    rule, ps = d.rule, d.premises
    if rule == "Top":
        return _arity(d, 0) and isinstance(u, Top)
    if rule == "Bot":
        return _arity(d, 0) and isinstance(s, Bot)
    if rule == "Refl":
        return _arity(d, 0) and alpha_eq(s, u)
    if rule == "Bnd":
        return (_arity(d, 2) and isinstance(s, TypeDecl) and isinstance(u, TypeDecl)
                and _is_sub(ps[0], sysid, g, u.lower, s.lower) and _is_sub(ps[1], sysid, g, s.upper, u.upper))
    if rule == "All":
        return (_arity(d, 2) and isinstance(s, All) and isinstance(u, All)
                and _is_sub(ps[0], sysid, g, u.param_type, s.param_type)
                and _all_body_ok(ps[1], sysid, g, s, u, u.param_type))
    if rule == "Sel1":
        return (_arity(d, 1) and isinstance(u, Path)
                and _typing_at_decl(ps[0], g, u.var, lower=s))
    if rule == "Sel2":
        return (_arity(d, 1) and isinstance(s, Path)
                and _typing_at_decl(ps[0], g, s.var, upper=u))
    if rule == "Sel1'":
        return _arity(d, 1) and isinstance(u, Path) and _is_sub(ps[0], sysid, g, g.lookup(u.var), TypeDecl(s, TOP))
    if rule == "Sel2'":
        return _arity(d, 1) and isinstance(s, Path) and _is_sub(ps[0], sysid, g, g.lookup(s.var), TypeDecl(BOT, u))
    if rule == "Trans":
        if not _arity(d, 2):
            return False
        mid = ps[0].conclusion.rhs
        return _is_sub(ps[0], sysid, g, s, mid) and _is_sub(ps[1], sysid, g, mid, u)
    if rule == "BB":
        if not _arity(d, 2):
            return False
        return any(
            _is_sub(ps[0], sysid, g, t, TypeDecl(s, TOP)) and _is_sub(ps[1], sysid, g, t, TypeDecl(BOT, u))
            for _, t in g
        )
    return False


def _typing_at_decl(prem: Derivation, g: Context, x: str, lower=None, upper=None) -> bool:
    """The Sel1/Sel2 premise ``x : {A: lower .. _}`` (resp. ``{A: _ .. upper}``)."""
    c = prem.conclusion
    if not isinstance(c, TypingJudgement) or c.term != Var(x) or not ctx_equal(c.ctx, g):
        return False
    t = c.type
    if not isinstance(t, TypeDecl):
        return False
    if lower is not None:
        return alpha_eq(t.lower, lower)
    return alpha_eq(t.upper, upper)


def _check_kernel(d, g, s, u) -> bool:
    rule, ps, k = d.rule, d.premises, SystemId.DKERNEL
    if rule == "K-Top":
        return _arity(d, 0) and isinstance(u, Top)
    if rule == "K-Bot":
        return _arity(d, 0) and isinstance(s, Bot)
    if rule == "K-VRefl":
        return _arity(d, 0) and isinstance(s, Path) and isinstance(u, Path) and s.var == u.var
    if rule == "K-Bnd":
        return (_arity(d, 2) and isinstance(s, TypeDecl) and isinstance(u, TypeDecl)
                and _is_sub(ps[0], k, g, u.lower, s.lower) and _is_sub(ps[1], k, g, s.upper, u.upper))
    if rule == "K-All":
        return (_arity(d, 1) and isinstance(s, All) and isinstance(u, All)
                and alpha_eq(s.param_type, u.param_type) and _all_body_ok(ps[0], k, g, s, u, s.param_type))
    if rule == "K-Sel1":
        return _arity(d, 1) and isinstance(u, Path) and _is_sub(ps[0], k, g, g.lookup(u.var), TypeDecl(s, TOP))
    if rule == "K-Sel2":
        return _arity(d, 1) and isinstance(s, Path) and _is_sub(ps[0], k, g, g.lookup(s.var), TypeDecl(BOT, u))
    return False


def _check_strong(d, g1, s, u, g2) -> bool:
    rule, ps, k = d.rule, d.premises, SystemId.DSTRONG_KERNEL
    if rule == "Sk-Top":
        return _arity(d, 0) and isinstance(u, Top)
    if rule == "Sk-Bot":
        return _arity(d, 0) and isinstance(s, Bot)
    if rule == "Sk-VRefl":
        return _arity(d, 0) and isinstance(s, Path) and isinstance(u, Path) and s.var == u.var
    if rule == "Sk-Bnd":
        return (_arity(d, 2) and isinstance(s, TypeDecl) and isinstance(u, TypeDecl)
                and _is_sub(ps[0], k, g2, u.lower, s.lower, g1) and _is_sub(ps[1], k, g1, s.upper, u.upper, g2))
    if rule == "Sk-All":
        return (_arity(d, 2) and isinstance(s, All) and isinstance(u, All)
                and _is_sub(ps[0], k, g2, u.param_type, s.param_type, g1)
                and _all_body_ok(ps[1], k, g1, s, u, s.param_type, g2, u.param_type))
    if rule == "Sk-Sel1":
        return (_arity(d, 1) and isinstance(u, Path)
                and _is_sub(ps[0], k, g2, g2.lookup(u.var), TypeDecl(s, TOP), g1))
    if rule == "Sk-Sel2":
        return (_arity(d, 1) and isinstance(s, Path)
                and _is_sub(ps[0], k, g1, g1.lookup(s.var), TypeDecl(BOT, u), g2))
    return False


# -- typing ------------------------------------------------------------------


def _check_typing(d: Derivation) -> bool:
    c: TypingJudgement = d.conclusion
    g, t, ty, rule, ps = c.ctx, c.term, c.type, d.rule, d.premises
    if not (closed_in(t, g) and closed_in(ty, g)):
        return False
    if rule == "Var":
        return _arity(d, 0) and isinstance(t, Var) and alpha_eq(g.lookup(t.name), ty)
    if rule == "Typ-I":
        return _arity(d, 0) and isinstance(t, TypeTag) and alpha_eq(TypeDecl(t.type, t.type), ty)
    if rule == "Sub":
        if not _arity(d, 2):
            return False
        mid = ps[0].conclusion.type
        return _is_typing(ps[0], g, t, mid) and _is_sub(ps[1], SystemId.DSUB_ORIG, g, mid, ty)
    if rule == "All-I":
        if not (_arity(d, 1) and isinstance(t, Lambda) and isinstance(ty, All)
                and alpha_eq(t.param_type, ty.param_type)):
            return False
        inner = ps[0].conclusion
        if not isinstance(inner, TypingJudgement):
            return False
        z = _extension(g, inner.ctx, t.param_type)
        return z is not None and _is_typing(
            ps[0], inner.ctx, subst_var_in_term(t.body, t.param, z), subst_var_in_type(ty.ret, ty.param, z))
    if rule == "All-E":
        if not (_arity(d, 2) and isinstance(t, Apply)):
            return False
        f = ps[0].conclusion.type
        return (isinstance(f, All) and _is_typing(ps[0], g, Var(t.fun), f)
                and _is_typing(ps[1], g, Var(t.arg), f.param_type)
                and alpha_eq(subst_var_in_type(f.ret, f.param, t.arg), ty))
    if rule == "Let":
        if not (_arity(d, 2) and isinstance(t, Let)):
            return False
        s = ps[0].conclusion.type
        inner = ps[1].conclusion
        if not (_is_typing(ps[0], g, t.rhs, s) and isinstance(inner, TypingJudgement)):
            return False
        z = _extension(g, inner.ctx, s)
        return z is not None and _is_typing(ps[1], inner.ctx, subst_var_in_term(t.body, t.bound, z), ty)
    return False


# -- order preserving sub-environments ---------------------------------------


def _check_ope(d: Derivation) -> bool:
    c: OpeJudgement = d.conclusion
    g, h, rule, ps = c.ctx, c.sub, d.rule, d.premises

    def ope(p, a, b):
        return isinstance(p.conclusion, OpeJudgement) and ctx_equal(p.conclusion.ctx, a) and ctx_equal(p.conclusion.sub, b)

    if rule == "Ope-Nil":
        return _arity(d, 0) and len(g) == 0 and len(h) == 0
    if rule == "Ope-Drop":
        return _arity(d, 1) and len(g) > 0 and ope(ps[0], g.prefix(len(g) - 1), h)
    if rule == "Ope-Keep":
        if not (_arity(d, 2) and len(g) > 0 and len(h) > 0):
            return False
        (x, s), (y, u) = g.bindings[-1], h.bindings[-1]
        g0 = g.prefix(len(g) - 1)
        return (x == y and ope(ps[0], g0, h.prefix(len(h) - 1))
                and _is_sub(ps[1], SystemId.DSUB_ORIG, g0, s, u))
    return False
