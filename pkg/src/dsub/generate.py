"""Seeded random generation of D<: subtyping instances.

Types are drawn uniformly among all types of a chosen measure (the measure itself
is drawn uniformly), using exact counts so large measures stay cheap. Contexts
are biased toward invertible shapes and toward bad-bounds bindings.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from functools import lru_cache

from .enumerate import D_NAMES, next_name
from .errors import InputError
from .syntax import BOT, EMPTY, TOP, All, Context, Path, TypeDecl, show, show_ctx

DEFAULT_CHECKS = ("step", "stare-at", "kernel", "strong-kernel", "dsub-nf")


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    count: int = 1000
    max_measure: int = 5
    max_ctx_len: int = 2
    systems: tuple = DEFAULT_CHECKS
    invertible_bias: float = 0.3
    bad_bounds_bias: float = 0.2
    split_bias: float = 0.2  # chance of an independent right context

    def __post_init__(self):
        if self.count < 0 or self.max_measure < 1 or self.max_ctx_len < 0:
            raise InputError("count >= 0, max_measure >= 1 and max_ctx_len >= 0 are required")
        if not 0 <= self.invertible_bias + self.bad_bounds_bias <= 1:
            raise InputError("context biases must sum to at most 1")
        if not 0 <= self.split_bias <= 1:
            raise InputError("split_bias must lie in [0, 1]")
        object.__setattr__(self, "systems", tuple(self.systems))
        unknown = set(self.systems) - set(DEFAULT_CHECKS)
        if unknown:
            raise InputError(f"unknown systems: {sorted(unknown)}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["systems"] = list(self.systems)
        return d


@dataclass(frozen=True)
class Instance:
    left_ctx: Context
    lhs: object
    rhs: object
    right_ctx: Context = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.right_ctx is None:
            object.__setattr__(self, "right_ctx", self.left_ctx)

    @property
    def single_context(self) -> bool:
        return self.left_ctx == self.right_ctx

    def __str__(self) -> str:
        body = f"{show(self.lhs)} <: {show(self.rhs)}"
        if self.single_context:
            return f"{show_ctx(self.left_ctx)} |- {body}" if self.left_ctx else body
        return f"{show_ctx(self.left_ctx)} |- {body} -| {show_ctx(self.right_ctx)}".strip()


# -- uniform sampling at a fixed measure ----------------------------------------


@lru_cache(maxsize=None)
def count_types(m: int, nvars: int) -> int:
    """Number of D<: types of measure exactly ``m`` with ``nvars`` variables in scope."""
    if m < 1:
        return 0
    if m == 1:
        return 2
    if m == 2:
        return nvars
    total = 0
    for a in range(1, m - 1):
        b = m - 1 - a
        total += count_types(a, nvars) * (count_types(b, nvars) + count_types(b, nvars + 1))
    return total


def type_at(m: int, scope: tuple, k: int):
    """The ``k``-th type of measure ``m`` over ``scope`` (a bijection onto ``range(count_types)``)."""
    n = len(scope)
    if m == 1:
        return (TOP, BOT)[k]
    if m == 2:
        return Path(scope[k])
    for a in range(1, m - 1):
        b = m - 1 - a
        block = count_types(a, n) * count_types(b, n)
        if k < block:
            hi, lo = divmod(k, count_types(a, n))
            return TypeDecl(type_at(a, scope, lo), type_at(b, scope, hi))
        k -= block
        block = count_types(a, n) * count_types(b, n + 1)
        if k < block:
            binder = next_name(scope, D_NAMES)
            body, param = divmod(k, count_types(a, n))
            return All(binder, type_at(a, scope, param), type_at(b, scope + (binder,), body))
        k -= block
    raise IndexError(k)


def random_type(rng: random.Random, max_measure: int, scope: tuple, min_measure: int = 1):
    sizes = [m for m in range(min_measure, max_measure + 1) if count_types(m, len(scope))]
    m = rng.choice(sizes)
    return type_at(m, scope, rng.randrange(count_types(m, len(scope))))


# -- contexts ---------------------------------------------------------------------


def _invertible_binding(rng: random.Random, cfg: FuzzConfig, scope: tuple):
    for _ in range(64):
        t = random_type(rng, cfg.max_measure, scope)
        if isinstance(t, TypeDecl):
            t = TypeDecl(BOT, t.upper)
            if isinstance(t.upper, TypeDecl) or t.upper == BOT:
                continue
        if t == BOT:
            continue
        return t
    return TypeDecl(BOT, TOP)


def random_context(rng: random.Random, cfg: FuzzConfig) -> Context:
    n = rng.randint(0, cfg.max_ctx_len)
    mode = rng.random()
    invertible = mode < cfg.invertible_bias
    bad = not invertible and mode < cfg.invertible_bias + cfg.bad_bounds_bias
    bad_at = rng.randrange(n) if bad and n else -1
    ctx = EMPTY
    for i in range(n):
        scope = ctx.dom()
        name = next_name(scope, D_NAMES)
        if i == bad_at:
            t = TypeDecl(TOP, BOT)
        elif invertible:
            t = _invertible_binding(rng, cfg, scope)
        else:
            t = random_type(rng, cfg.max_measure, scope)
        ctx = ctx.extend(name, t)
    return ctx


def generate_instance(cfg: FuzzConfig, i: int) -> Instance:
    rng = random.Random(f"{cfg.seed}:{i}")
    left = random_context(rng, cfg)
    right = random_context(rng, cfg) if rng.random() < cfg.split_bias else left
    s = random_type(rng, cfg.max_measure, left.dom())
    u = random_type(rng, cfg.max_measure, right.dom())
    return Instance(left, s, u, right)


def generate(cfg: FuzzConfig):
    for i in range(cfg.count):
        yield generate_instance(cfg, i)
