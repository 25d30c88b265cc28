"""Surface syntax: a small tokenizer and recursive-descent parser.

D<: types   ``Top``, ``Bot``, ``{A: S .. U}``, ``x.A``, ``all(x: S) U``
F<: types   ``Top``, ``X``, ``S -> U``, ``forall X <: S . U``
contexts    ``x: T; y: T2`` (D<:) or ``X <: T; Y <: T2`` (F<:)
judgements  ``[G |-] S <: U`` and ``G1 |- S <: U -| G2``
terms       ``x``, ``{A = T}``, ``lam(x: T) t``, ``f a``, ``let x = t in u``

The Unicode forms produced by ``show(..., unicode=True)`` are accepted too.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import LabelError, ParseError, UnboundVariableError
from .judgements import SubJudgement, SystemId, TypingJudgement
from .syntax import (
    BOT, EMPTY, FTOP, LABEL, TOP, All, Apply, Context, FForall, FFun, FTVar, Lambda, Let, Path,
    TypeDecl, TypeTag, Var, show, show_ctx, show_term,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<sym>\|-|-\||<:|->|\.\.|→|⊤|⊥|∀|[{}():;.=])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))"
)
_ALIASES = {"⊤": "Top", "⊥": "Bot", "→": "->"}
KEYWORDS = {"Top", "Bot", "all", "forall", "lam", "let", "in"}


@dataclass(frozen=True)
class Token:
    kind: str  # "sym", "ident" or "eof"
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if rest.strip():
                at = pos + len(rest) - len(rest.lstrip())
                raise ParseError(f"unexpected character {text[at]!r}", at, text)
            out.append(Token("eof", "", len(text)))
            return out
        kind = "sym" if m.group("sym") else "ident"
        raw = m.group(kind)
        out.append(Token(kind, _ALIASES.get(raw, raw), m.start(kind)))
        pos = m.end()


def _with(scope, name: str):
    return None if scope is None else scope | {name}


class _Parser:
    def __init__(self, text: str, sort: str):
        if sort not in ("D", "F"):
            raise ValueError(f"unknown sort {sort!r}")
        self.text = text
        self.sort = sort
        self.toks = tokenize(text)
        self.i = 0
        self.unbound: Optional[Token] = None

    # -- token plumbing ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{msg}, found {found}", tok.pos, self.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error("expected an identifier")
        self.i += 1
        return t

    def label(self) -> None:
        t = self.tok
        if t.kind != "ident":
            self.error("expected a type label")
        if t.text != LABEL:
            raise LabelError(f"only the type label {LABEL!r} is supported, got {t.text!r} at position {t.pos}")
        self.i += 1

    def end(self) -> None:
        """Require end of input; scope errors are reported only for well-formed text."""
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")
        self.end_scope()

    def end_scope(self) -> None:
        if self.unbound is not None:
            x = self.unbound
            raise UnboundVariableError(f"unbound variable {x.text!r} at position {x.pos}")

    def bound(self, name: Token, scope) -> None:
        if scope is not None and name.text not in scope and self.unbound is None:
            self.unbound = name

    # -- types ---------------------------------------------------------------

    def type(self, scope):
        return self.dtype(scope) if self.sort == "D" else self.ftype(scope)

    def dtype(self, scope):
        t = self.tok
        if self.at("Top"):
            self.i += 1
            return TOP
        if self.at("Bot"):
            self.i += 1
            return BOT
        if self.at("{"):
            self.i += 1
            self.label()
            self.expect(":")
            lo = self.dtype(scope)
            self.expect("..")
            hi = self.dtype(scope)
            self.expect("}")
            return TypeDecl(lo, hi)
        if self.at("all") or self.at("∀"):
            self.i += 1
            self.expect("(")
            x = self.ident()
            self.expect(":")
            s = self.dtype(scope)
            self.expect(")")
            u = self.dtype(_with(scope, x.text))
            return All(x.text, s, u)
        if self.at("("):
            self.i += 1
            inner = self.dtype(scope)
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text not in KEYWORDS:
            x = self.ident()
            self.expect(".")
            self.label()
            self.bound(x, scope)
            return Path(x.text)
        self.error("expected a D<: type")

    def ftype(self, scope):
        left = self.fatom(scope)
        if self.at("->"):
            self.i += 1
            return FFun(left, self.ftype(scope))
        return left

    def fatom(self, scope):
        t = self.tok
        if self.at("Top"):
            self.i += 1
            return FTOP
        if self.at("forall") or self.at("∀"):
            self.i += 1
            x = self.ident()
            self.expect("<:")
            s = self.ftype(scope)
            self.expect(".")
            u = self.ftype(_with(scope, x.text))
            return FForall(x.text, s, u)
        if self.at("("):
            self.i += 1
            inner = self.ftype(scope)
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text not in KEYWORDS:
            x = self.ident()
            self.bound(x, scope)
            return FTVar(x.text)
        self.error("expected an F<: type")

    # -- contexts and judgements ---------------------------------------------

    def context(self, stop: tuple) -> Context:
        ctx = EMPTY
        if self.tok.kind == "eof" or any(self.at(s) for s in stop):
            return ctx
        while True:
            x = self.ident()
            if x.text in ctx:
                raise ParseError(f"variable {x.text!r} bound twice", x.pos, self.text)
            self.expect(":" if self.sort == "D" else "<:")
            ctx = ctx.extend(x.text, self.type(frozenset(ctx.dom())))
            if not self.at(";"):
                return ctx
            self.i += 1
            if self.tok.kind == "eof" or any(self.at(s) for s in stop):
                return ctx

    def has_turnstile(self) -> bool:
        return any(t.text == "|-" for t in self.toks if t.kind == "sym")

    # -- terms ---------------------------------------------------------------

    def term(self, scope):
        t = self.tok
        if self.at("let"):
            self.i += 1
            x = self.ident()
            self.expect("=")
            rhs = self.term(scope)
            self.expect("in")
            body = self.term(_with(scope, x.text))
            return Let(x.text, rhs, body)
        if self.at("lam"):
            self.i += 1
            self.expect("(")
            x = self.ident()
            self.expect(":")
            ty = self.dtype(scope)
            self.expect(")")
            return Lambda(x.text, ty, self.term(_with(scope, x.text)))
        if self.at("{"):
            self.i += 1
            self.label()
            self.expect("=")
            ty = self.dtype(scope)
            self.expect("}")
            return TypeTag(ty)
        if self.at("("):
            self.i += 1
            inner = self.term(scope)
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text not in KEYWORDS:
            f = self.ident()
            self.bound(f, scope)
            nxt = self.tok
            if nxt.kind == "ident" and nxt.text not in KEYWORDS:
                a = self.ident()
                self.bound(a, scope)
                return Apply(f.text, a.text)
            return Var(f.text)
        self.error("expected a term")


def parse_type(text: str, sort: str = "D", ctx: Context = EMPTY):
    p = _Parser(text, sort)
    t = p.type(frozenset(ctx.dom()))
    p.end()
    return t


def parse_context(text: str, sort: str = "D") -> Context:
    p = _Parser(text, sort)
    ctx = p.context(())
    p.end()
    return ctx


def parse_term(text: str, ctx: Context = EMPTY):
    p = _Parser(text, "D")
    t = p.term(frozenset(ctx.dom()))
    p.end()
    return t


def sort_of(system: SystemId) -> str:
    return "F" if SystemId(system).is_fsub else "D"


def parse_judgement(text: str, system: SystemId = SystemId.DSUB_ORIG, *,
                    ctx: Optional[Context] = None, rctx: Optional[Context] = None) -> SubJudgement:
    """Parse ``[G1 |-] S <: U [-| G2]``.

    Contexts written in the text take precedence over ``ctx``/``rctx``; a missing
    right context defaults to the left one.
    """
    system = SystemId(system)
    p = _Parser(text, sort_of(system))
    left = ctx if ctx is not None else EMPTY
    if p.has_turnstile():
        left = p.context(("|-",))
        p.expect("|-")
    s = p.type(frozenset(left.dom()))
    p.expect("<:")
    right = rctx if rctx is not None else left
    # The right-hand side is scoped by the right context, which is written after
    # it: parse it unchecked first, then re-read it once that context is known.
    mark = p.i
    u = p.type(None)
    if p.at("-|"):
        p.i += 1
        right = p.context(())
    p.end()
    p.i = mark
    p.type(frozenset(right.dom()))
    p.end_scope()
    return SubJudgement(system, left, s, u, right)


def parse_typing(text: str) -> TypingJudgement:
    """Parse ``[G |-] t : T``."""
    p = _Parser(text, "D")
    ctx = EMPTY
    if p.has_turnstile():
        ctx = p.context(("|-",))
        p.expect("|-")
    scope = frozenset(ctx.dom())
    t = p.term(scope)
    p.expect(":")
    ty = p.dtype(scope)
    p.end()
    return TypingJudgement(ctx, t, ty)


def print_judgement(j: SubJudgement, unicode: bool = False) -> str:
    body = f"{show(j.lhs, unicode)} <: {show(j.rhs, unicode)}"
    left = show_ctx(j.left_ctx, unicode)
    text = f"{left} |- {body}" if left else body
    if j.system.two_contexts or j.right_ctx != j.left_ctx:
        if not left:
            text = f"|- {body}"
        text = f"{text} -| {show_ctx(j.right_ctx, unicode)}".rstrip()
    return text


def print_typing(j: TypingJudgement) -> str:
    head = f"{show_ctx(j.ctx)} |- " if j.ctx else ""
    return f"{head}{show_term(j.term)} : {show(j.type)}"
