"""Exhaustive generation of small closed types and well-formed contexts."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .syntax import (
    BOT, EMPTY, FTOP, TOP, All, Context, FForall, FFun, FTVar, Path, TypeDecl,
)

# Binder / context-variable name supply. Deterministic, so each alpha class is
# produced exactly once.
D_NAMES = ("x", "y", "z", "w", "v", "u", "t", "s")
F_NAMES = ("X", "Y", "Z", "W", "V", "U", "R", "S")


def next_name(used, supply) -> str:
    for n in supply:
        if n not in used:
            return n
    i = 1
    while f"{supply[0]}{i}" in used:
        i += 1
    return f"{supply[0]}{i}"


def enumerate_types(sort: str, max_measure: int, ctx: Context = EMPTY, *, fun: bool = True) -> Iterator:
    """All types of measure <= ``max_measure`` closed w.r.t. ``ctx``, smallest first.

    ``sort`` is ``"D"`` or ``"F"``; ``fun=False`` restricts F<: to F<:-minus.
    """
    if max_measure < 1:
        raise ValueError("max_measure must be >= 1")
    vars_ = tuple(ctx.dom())
    for m in range(1, max_measure + 1):
        if sort == "D":
            yield from _d_exact(m, vars_)
        elif sort == "F":
            yield from _f_exact(m, vars_, fun)
        else:
            raise ValueError(f"unknown sort {sort!r}")


@lru_cache(maxsize=None)
def _d_exact(m: int, vars_: tuple) -> tuple:
    if m == 1:
        return (TOP, BOT)
    if m == 2:
        return tuple(Path(v) for v in vars_)
    out = []
    for a in range(1, m - 1):
        b = m - 1 - a
        for lo in _d_exact(a, vars_):
            for hi in _d_exact(b, vars_):
                out.append(TypeDecl(lo, hi))
    binder = next_name(vars_, D_NAMES)
    inner = vars_ + (binder,)
    for a in range(1, m - 1):
        b = m - 1 - a
        for s in _d_exact(a, vars_):
            for u in _d_exact(b, inner):
                out.append(All(binder, s, u))
    return tuple(out)


@lru_cache(maxsize=None)
def _f_exact(m: int, vars_: tuple, fun: bool) -> tuple:
    if m == 1:
        return (FTOP,) + tuple(FTVar(v) for v in vars_)
    out = []
    if fun:
        for a in range(1, m - 1):
            for s in _f_exact(a, vars_, fun):
                for u in _f_exact(m - 1 - a, vars_, fun):
                    out.append(FFun(s, u))
    binder = next_name(vars_, F_NAMES)
    inner = vars_ + (binder,)
    for a in range(1, m - 1):
        for s in _f_exact(a, vars_, fun):
            for u in _f_exact(m - 1 - a, inner, fun):
                out.append(FForall(binder, s, u))
    return tuple(out)


def enumerate_contexts(sort: str, max_len: int, max_measure: int, *, fun: bool = True) -> Iterator[Context]:
    """Well-formed contexts with at most ``max_len`` bindings, each of measure <= ``max_measure``."""
    supply = D_NAMES if sort == "D" else F_NAMES

    def go(ctx: Context, remaining: int):
        yield ctx
        if remaining == 0:
            return
        name = next_name(ctx.dom(), supply)
        for t in enumerate_types(sort, max_measure, ctx, fun=fun):
            yield from go(ctx.extend(name, t), remaining - 1)

    yield from go(EMPTY, max_len)
