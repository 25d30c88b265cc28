"""Abstract syntax for D<: and F<: types, D<: terms and typing contexts.

Variables are plain names. Binders are compared up to alpha-renaming through
a canonical nameless form (see :func:`canon`), so two types that differ only in
bound names are interchangeable everywhere a rule asks for identical types.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

LABEL = "A"


# ---------------------------------------------------------------------------
# D<: types


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "Top"


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "Bot"


@dataclass(frozen=True)
class TypeDecl:
    """``{A: lower .. upper}``."""

    lower: "DType"
    upper: "DType"
    label: str = LABEL

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Path:
    """``var.A``."""

    var: str
    label: str = LABEL

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class All:
    """``all(param: param_type) ret``; ``param`` is bound in ``ret`` only."""

    param: str
    param_type: "DType"
    ret: "DType"

    def __str__(self) -> str:
        return show(self)


DType = Union[Top, Bot, TypeDecl, Path, All]

TOP = Top()
BOT = Bot()


# ---------------------------------------------------------------------------
# F<: types


@dataclass(frozen=True)
class FTop:
    def __str__(self) -> str:
        return "Top"


@dataclass(frozen=True)
class FTVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FFun:
    dom: "FType"
    cod: "FType"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class FForall:
    """``forall var <: bound . body``; ``var`` is bound in ``body`` only."""

    var: str
    bound: "FType"
    body: "FType"

    def __str__(self) -> str:
        return show(self)


FType = Union[FTop, FTVar, FFun, FForall]

FTOP = FTop()

AnyType = Union[DType, FType]


def is_ftype(t: object) -> bool:
    return isinstance(t, (FTop, FTVar, FFun, FForall))


def is_dtype(t: object) -> bool:
    return isinstance(t, (Top, Bot, TypeDecl, Path, All))


def has_fun(t: FType) -> bool:
    """True if an arrow occurs anywhere in ``t`` (i.e. ``t`` is outside F<:-minus)."""
    if isinstance(t, FFun):
        return True
    if isinstance(t, FForall):
        return has_fun(t.bound) or has_fun(t.body)
    return False


# ---------------------------------------------------------------------------
# D<: terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TypeTag:
    """``{A = T}``."""

    type: DType

    def __str__(self) -> str:
        return show_term(self)


@dataclass(frozen=True)
class Lambda:
    param: str
    param_type: DType
    body: "DTerm"

    def __str__(self) -> str:
        return show_term(self)


@dataclass(frozen=True)
class Apply:
    """``fun arg``; both sides are variables."""

    fun: str
    arg: str

    def __str__(self) -> str:
        return f"{self.fun} {self.arg}"


@dataclass(frozen=True)
class Let:
    bound: str
    rhs: "DTerm"
    body: "DTerm"

    def __str__(self) -> str:
        return show_term(self)


DTerm = Union[Var, TypeTag, Lambda, Apply, Let]


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class Context:
    """Ordered bindings ``x: T``. For F<: the bound type is the upper bound of ``X``."""

    bindings: tuple = ()

    @classmethod
    def of(cls, *pairs) -> "Context":
        return cls(tuple((name, t) for name, t in pairs))

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.bindings)

    def __bool__(self) -> bool:
        return bool(self.bindings)

    def dom(self) -> tuple:
        return tuple(name for name, _ in self.bindings)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.bindings)

    def lookup(self, name: str):
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i in range(len(self.bindings) - 1, -1, -1):
            if self.bindings[i][0] == name:
                return i
        raise KeyError(name)

    def split(self, name: str) -> tuple["Context", object]:
        """``Γ1; x: T; Γ2`` -> ``(Γ1, T)``."""
        i = self.index(name)
        return Context(self.bindings[:i]), self.bindings[i][1]

    def prefix(self, n: int) -> "Context":
        return Context(self.bindings[:n])

    def extend(self, name: str, t) -> "Context":
        return Context(self.bindings + ((name, t),))

    def is_prefix_of(self, other: "Context") -> bool:
        n = len(self.bindings)
        return n <= len(other.bindings) and ctx_equal(self, other.prefix(n))

    def __str__(self) -> str:
        return show_ctx(self)


EMPTY = Context()


# ---------------------------------------------------------------------------
# Free variables, closedness, well-formedness


def free_vars(t) -> frozenset:
    if isinstance(t, (Top, Bot, FTop)):
        return frozenset()
    if isinstance(t, Path):
        return frozenset((t.var,))
    if isinstance(t, FTVar):
        return frozenset((t.name,))
    if isinstance(t, TypeDecl):
        return free_vars(t.lower) | free_vars(t.upper)
    if isinstance(t, FFun):
        return free_vars(t.dom) | free_vars(t.cod)
    if isinstance(t, All):
        return free_vars(t.param_type) | (free_vars(t.ret) - {t.param})
    if isinstance(t, FForall):
        return free_vars(t.bound) | (free_vars(t.body) - {t.var})
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, TypeTag):
        return free_vars(t.type)
    if isinstance(t, Lambda):
        return free_vars(t.param_type) | (free_vars(t.body) - {t.param})
    if isinstance(t, Apply):
        return frozenset((t.fun, t.arg))
    if isinstance(t, Let):
        return free_vars(t.rhs) | (free_vars(t.body) - {t.bound})
    raise TypeError(f"not a type or term: {t!r}")


def closed_in(t, ctx: Context) -> bool:
    dom = set(ctx.dom())
    return free_vars(t) <= dom


def ctx_well_formed(ctx: Context) -> bool:
    seen: set = set()
    for name, t in ctx:
        if name in seen or not free_vars(t) <= seen:
            return False
        seen.add(name)
    return True


def is_invertible(ctx: Context) -> bool:
    """No binding is Bot, and every declaration binding is ``{A: Bot .. U}`` with U neither Bot nor a declaration."""
    for _, t in ctx:
        if isinstance(t, Bot):
            return False
        if isinstance(t, TypeDecl):
            if isinstance(t.upper, (Bot, TypeDecl)) or not isinstance(t.lower, Bot):
                return False
    return True


# ---------------------------------------------------------------------------
# Alpha-equivalence via a nameless canonical form


def canon(t):
    """Nameless form: bound occurrences become de Bruijn levels, free ones keep names."""
    return _canon(t, ())


@lru_cache(maxsize=1 << 18)
def _canon(t, env: tuple):
    if isinstance(t, Top):
        return "T"
    if isinstance(t, Bot):
        return "B"
    if isinstance(t, FTop):
        return "T"
    if isinstance(t, Path):
        return ("p", _lookup_level(env, t.var))
    if isinstance(t, FTVar):
        return ("v", _lookup_level(env, t.name))
    if isinstance(t, TypeDecl):
        return ("d", _canon(t.lower, env), _canon(t.upper, env))
    if isinstance(t, FFun):
        return ("f", _canon(t.dom, env), _canon(t.cod, env))
    if isinstance(t, All):
        return ("a", _canon(t.param_type, env), _canon(t.ret, env + (t.param,)))
    if isinstance(t, FForall):
        return ("q", _canon(t.bound, env), _canon(t.body, env + (t.var,)))
    raise TypeError(f"not a type: {t!r}")


def _lookup_level(env: tuple, name: str):
    for i in range(len(env) - 1, -1, -1):
        if env[i] == name:
            return i
    return name


def alpha_eq(a, b) -> bool:
    return a is b or canon(a) == canon(b)


def ctx_key(ctx: Context) -> tuple:
    return tuple((name, canon(t)) for name, t in ctx)


def ctx_equal(a: Context, b: Context) -> bool:
    return a is b or ctx_key(a) == ctx_key(b)


# ---------------------------------------------------------------------------
# Fresh names and substitution


def fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    name = base
    while name in avoid:
        name += "'"
    return name


def subst_var_in_type(t, frm: str, to: str):
    """Capture-avoiding replacement of free ``frm`` by ``to`` (D<: paths or F<: variables)."""
    if frm == to or frm not in free_vars(t):
        return t
    return _subst(t, frm, to)


def _subst(t, frm: str, to: str):
    if isinstance(t, Path):
        return Path(to, t.label) if t.var == frm else t
    if isinstance(t, FTVar):
        return FTVar(to) if t.name == frm else t
    if isinstance(t, (Top, Bot, FTop)):
        return t
    if isinstance(t, TypeDecl):
        return TypeDecl(subst_var_in_type(t.lower, frm, to), subst_var_in_type(t.upper, frm, to), t.label)
    if isinstance(t, FFun):
        return FFun(subst_var_in_type(t.dom, frm, to), subst_var_in_type(t.cod, frm, to))
    if isinstance(t, All):
        s = subst_var_in_type(t.param_type, frm, to)
        if t.param == frm:
            return All(t.param, s, t.ret)
        param, ret = t.param, t.ret
        if param == to:
            param = fresh(param, free_vars(ret) | {to, frm})
            ret = _subst(ret, t.param, param) if t.param in free_vars(ret) else ret
        return All(param, s, subst_var_in_type(ret, frm, to))
    if isinstance(t, FForall):
        b = subst_var_in_type(t.bound, frm, to)
        if t.var == frm:
            return FForall(t.var, b, t.body)
        var, body = t.var, t.body
        if var == to:
            var = fresh(var, free_vars(body) | {to, frm})
            body = _subst(body, t.var, var) if t.var in free_vars(body) else body
        return FForall(var, b, subst_var_in_type(body, frm, to))
    raise TypeError(f"not a type: {t!r}")


def subst_var_in_term(t: DTerm, frm: str, to: str) -> DTerm:
    """Capture-avoiding variable renaming inside a D<: term (types included)."""
    if frm == to or frm not in free_vars(t):
        return t
    if isinstance(t, Var):
        return Var(to)
    if isinstance(t, Apply):
        return Apply(to if t.fun == frm else t.fun, to if t.arg == frm else t.arg)
    if isinstance(t, TypeTag):
        return TypeTag(subst_var_in_type(t.type, frm, to))
    if isinstance(t, Lambda):
        pt = subst_var_in_type(t.param_type, frm, to)
        if t.param == frm:
            return Lambda(t.param, pt, t.body)
        param, body = t.param, t.body
        if param == to:
            param = fresh(param, free_vars(body) | {to, frm})
            body = subst_var_in_term(body, t.param, param)
        return Lambda(param, pt, subst_var_in_term(body, frm, to))
    if isinstance(t, Let):
        rhs = subst_var_in_term(t.rhs, frm, to)
        if t.bound == frm:
            return Let(t.bound, rhs, t.body)
        bound, body = t.bound, t.body
        if bound == to:
            bound = fresh(bound, free_vars(body) | {to, frm})
            body = subst_var_in_term(body, t.bound, bound)
        return Let(bound, rhs, subst_var_in_term(body, frm, to))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Measure


def measure(t) -> int:
    """Syntactic size; a D<: path counts 2, every other leaf counts 1."""
    if isinstance(t, (Top, Bot, FTop, FTVar)):
        return 1
    if isinstance(t, Path):
        return 2
    if isinstance(t, TypeDecl):
        return 1 + measure(t.lower) + measure(t.upper)
    if isinstance(t, All):
        return 1 + measure(t.param_type) + measure(t.ret)
    if isinstance(t, FFun):
        return 1 + measure(t.dom) + measure(t.cod)
    if isinstance(t, FForall):
        return 1 + measure(t.bound) + measure(t.body)
    raise TypeError(f"not a type: {t!r}")


def measure_ctx(ctx: Context) -> int:
    return sum(measure(t) for _, t in ctx)


# ---------------------------------------------------------------------------
# Printing


_ASCII = {"top": "Top", "bot": "Bot", "all": "all", "forall": "forall", "arrow": "->"}
_UNICODE = {"top": "⊤", "bot": "⊥", "all": "∀", "forall": "∀", "arrow": "→"}


def show(t, unicode: bool = False) -> str:
    sym = _UNICODE if unicode else _ASCII
    if isinstance(t, (Top, FTop)):
        return sym["top"]
    if isinstance(t, Bot):
        return sym["bot"]
    if isinstance(t, Path):
        return f"{t.var}.{t.label}"
    if isinstance(t, FTVar):
        return t.name
    if isinstance(t, TypeDecl):
        return f"{{{t.label}: {show(t.lower, unicode)} .. {show(t.upper, unicode)}}}"
    if isinstance(t, All):
        if unicode:
            return f"∀({t.param}: {show(t.param_type, True)}) {show(t.ret, True)}"
        return f"all({t.param}: {show(t.param_type)}) {show(t.ret)}"
    if isinstance(t, FFun):
        dom = show(t.dom, unicode)
        if isinstance(t.dom, (FFun, FForall)):
            dom = f"({dom})"
        return f"{dom} {sym['arrow']} {show(t.cod, unicode)}"
    if isinstance(t, FForall):
        return f"{sym['forall']} {t.var} <: {show(t.bound, unicode)} . {show(t.body, unicode)}"
    raise TypeError(f"not a type: {t!r}")


def show_ctx(ctx: Context, unicode: bool = False) -> str:
    parts = []
    for name, t in ctx:
        sep = " <: " if is_ftype(t) else ": "
        parts.append(f"{name}{sep}{show(t, unicode)}")
    return "; ".join(parts)


def show_term(t: DTerm, unicode: bool = False) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, TypeTag):
        return f"{{A = {show(t.type, unicode)}}}"
    if isinstance(t, Lambda):
        lam = "λ" if unicode else "lam"
        return f"{lam}({t.param}: {show(t.param_type, unicode)}) {show_term(t.body, unicode)}"
    if isinstance(t, Apply):
        return f"{t.fun} {t.arg}"
    if isinstance(t, Let):
        return f"let {t.bound} = {show_term(t.rhs, unicode)} in {show_term(t.body, unicode)}"
    raise TypeError(f"not a term: {t!r}")
