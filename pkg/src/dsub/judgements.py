"""Judgements, derivation trees and search outcomes shared by every rule system."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Union

from .syntax import (
    Context, DTerm, alpha_eq, canon, ctx_equal, ctx_key, show, show_ctx, show_term,
)


class SystemId(str, Enum):
    FSUB = "fsub"
    FSUB_NF = "fsub-nf"
    FSUB_MINUS = "fsub-minus"
    DSUB_ORIG = "dsub"
    DSUB_UNRAVELLED = "dsub-unravelled"
    DSUB_NF = "dsub-nf"
    DSUB_NF_NOBB = "dsub-nf-nobb"
    DKERNEL = "kernel"
    DSTRONG_KERNEL = "strong-kernel"

    @property
    def is_fsub(self) -> bool:
        return self in (SystemId.FSUB, SystemId.FSUB_NF, SystemId.FSUB_MINUS)

    @property
    def two_contexts(self) -> bool:
        return self is SystemId.DSTRONG_KERNEL

    @property
    def has_trans(self) -> bool:
        return self in (SystemId.FSUB, SystemId.DSUB_ORIG, SystemId.DSUB_UNRAVELLED)


@dataclass(frozen=True)
class SubJudgement:
    """``left_ctx ⊢ lhs <: rhs ⊣ right_ctx``; the two contexts coincide outside strong kernel."""

    system: SystemId
    left_ctx: Context
    lhs: object
    rhs: object
    right_ctx: Context = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.right_ctx is None:
            object.__setattr__(self, "right_ctx", self.left_ctx)

    @cached_property
    def key(self) -> tuple:
        right = ctx_key(self.right_ctx) if self.system.two_contexts else None
        return ("sub", self.system, ctx_key(self.left_ctx), canon(self.lhs), canon(self.rhs), right)

    def same(self, other: object) -> bool:
        return (
            isinstance(other, SubJudgement)
            and self.system is other.system
            and ctx_equal(self.left_ctx, other.left_ctx)
            and ctx_equal(self.right_ctx, other.right_ctx)
            and alpha_eq(self.lhs, other.lhs)
            and alpha_eq(self.rhs, other.rhs)
        )

    def __str__(self) -> str:
        text = f"{show(self.lhs)} <: {show(self.rhs)}"
        if self.left_ctx:
            text = f"{show_ctx(self.left_ctx)} |- {text}"
        elif self.system.two_contexts or self.right_ctx:
            text = f"|- {text}"
        if self.system.two_contexts:
            text = f"{text} -| {show_ctx(self.right_ctx)}".rstrip()
        return text


@dataclass(frozen=True)
class TypingJudgement:
    """``ctx ⊢ term : type`` in D<:."""

    ctx: Context
    term: DTerm
    type: object

    @cached_property
    def key(self) -> tuple:
        return ("typ", ctx_key(self.ctx), self.term, canon(self.type))

    def same(self, other: object) -> bool:
        return (
            isinstance(other, TypingJudgement)
            and ctx_equal(self.ctx, other.ctx)
            and self.term == other.term
            and alpha_eq(self.type, other.type)
        )

    def __str__(self) -> str:
        head = f"{show_ctx(self.ctx)} |- " if self.ctx else "|- "
        return f"{head}{show_term(self.term)} : {show(self.type)}"


@dataclass(frozen=True)
class OpeJudgement:
    """``ctx ⪯ sub``: ``ctx`` is at least as informative as ``sub``."""

    ctx: Context
    sub: Context

    def same(self, other: object) -> bool:
        return isinstance(other, OpeJudgement) and ctx_equal(self.ctx, other.ctx) and ctx_equal(self.sub, other.sub)

    def __str__(self) -> str:
        return f"[{show_ctx(self.ctx)}] <= [{show_ctx(self.sub)}]"


Conclusion = Union[SubJudgement, TypingJudgement, OpeJudgement]


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: object
    premises: tuple = ()

    @cached_property
    def height(self) -> int:
        return 1 + max((p.height for p in self.premises), default=0)

    @cached_property
    def size(self) -> int:
        return 1 + sum(p.size for p in self.premises)

    def pretty(self, indent: int = 0) -> str:
        lines = [f"{'  ' * indent}{self.rule}: {self.conclusion}"]
        for p in self.premises:
            lines.append(p.pretty(indent + 1))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "conclusion": str(self.conclusion),
            "premises": [p.to_json() for p in self.premises],
        }


class Verdict(str, Enum):
    PROVED = "proved"
    REFUTED = "refuted"
    DEPTH_EXHAUSTED = "depth-exhausted"


@dataclass(frozen=True)
class SearchResult:
    """Three-valued outcome of bounded proof search.

    ``REFUTED`` is only reported when no branch was cut by the depth cap and no
    heuristic candidate pool (Trans middle types, typing synthesis) was consulted.
    """

    verdict: Verdict
    derivation: Optional[Derivation] = None
    depth: int = 0
    pool_truncated: bool = False
    nodes: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def proved(self) -> bool:
        return self.verdict is Verdict.PROVED

    @property
    def refuted(self) -> bool:
        return self.verdict is Verdict.REFUTED

    @property
    def exhausted(self) -> bool:
        return self.verdict is Verdict.DEPTH_EXHAUSTED

    def __str__(self) -> str:
        return self.verdict.value


@dataclass(frozen=True)
class AlgoJudgement:
    """A node of an algorithmic run: ``left_ctx ⊢ lhs <: rhs ⊣ right_ctx`` under ``algo``."""

    algo: str
    left_ctx: Context
    lhs: object
    rhs: object
    right_ctx: Context = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.right_ctx is None:
            object.__setattr__(self, "right_ctx", self.left_ctx)

    def same(self, other: object) -> bool:
        return (
            isinstance(other, AlgoJudgement)
            and self.algo == other.algo
            and ctx_equal(self.left_ctx, other.left_ctx)
            and ctx_equal(self.right_ctx, other.right_ctx)
            and alpha_eq(self.lhs, other.lhs)
            and alpha_eq(self.rhs, other.rhs)
        )

    def __str__(self) -> str:
        head = f"{show_ctx(self.left_ctx)} |- " if self.left_ctx else "|- "
        text = f"{head}{show(self.lhs)} <: {show(self.rhs)}"
        if self.algo == "stare-at":
            text = f"{text} -| {show_ctx(self.right_ctx)}".rstrip()
        return text


_OP_ARROWS = {
    "exposure": "⇑", "upcast": "↗", "downcast": "↘",
    "reveal": "⤊", "upcast-sa": "↗", "downcast-sa": "↘",
}


@dataclass(frozen=True)
class OpJudgement:
    """Result of an auxiliary operation: ``ctx ⊢ input op output [⊣ out_ctx]``."""

    op: str
    ctx: Context
    input: object
    output: object
    out_ctx: Optional[Context] = None

    def __str__(self) -> str:
        head = f"{show_ctx(self.ctx)} |- " if self.ctx else "|- "
        text = f"{head}{show(self.input)} {_OP_ARROWS[self.op]} {show(self.output)}"
        if self.out_ctx is not None:
            text = f"{text} -| {show_ctx(self.out_ctx)}".rstrip()
        return text
