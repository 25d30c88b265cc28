import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsub.enumerate import enumerate_types
from dsub.syntax import (
    BOT, EMPTY, TOP, All, Apply, Context, FForall, FFun, FTVar, FTOP, Lambda, Let, Path, TypeDecl, TypeTag,
    Var, alpha_eq, ctx_well_formed, free_vars, has_fun, is_invertible, measure, measure_ctx, show,
    subst_var_in_term, subst_var_in_type,
)

from strategies import dtypes

x, y, z = Path("x"), Path("y"), Path("z")


class TestFreeVars:
    def test_top_has_none(self):
        assert free_vars(TOP) == frozenset()

    def test_all_binds_in_return_type(self):
        assert free_vars(All("x", y, x)) == {"y"}

    def test_all_does_not_bind_in_parameter(self):
        assert free_vars(All("x", x, TOP)) == {"x"}

    def test_decl_binds_nothing(self):
        assert free_vars(TypeDecl(x, x)) == {"x"}

    def test_terms(self):
        t = Let("a", Var("f"), Lambda("b", Path("c"), Apply("a", "b")))
        assert free_vars(t) == {"f", "c"}

    def test_ftypes(self):
        assert free_vars(FForall("X", FTVar("Y"), FFun(FTVar("X"), FTVar("Z")))) == {"Y", "Z"}


class TestWellFormed:
    def test_empty(self):
        assert ctx_well_formed(EMPTY)

    def test_prefix_order(self):
        ctx = Context.of(("x", TypeDecl(BOT, TOP)), ("y", TypeDecl(BOT, x)))
        assert ctx_well_formed(ctx)

    def test_unbound(self):
        assert not ctx_well_formed(Context.of(("x", TypeDecl(BOT, y))))

    def test_self_reference(self):
        assert not ctx_well_formed(Context.of(("x", TypeDecl(BOT, x))))

    def test_duplicate_names(self):
        assert not ctx_well_formed(Context.of(("x", TOP), ("x", TOP)))


class TestAlpha:
    def test_bound_rename(self):
        assert alpha_eq(All("x", TOP, x), All("y", TOP, y))

    def test_same_free(self):
        assert alpha_eq(All("x", TOP, z), All("y", TOP, z))

    def test_free_differ(self):
        assert not alpha_eq(x, y)

    def test_capture_matters(self):
        assert not alpha_eq(All("x", TOP, y), All("y", TOP, y))

    def test_forall(self):
        assert alpha_eq(FForall("X", FTOP, FTVar("X")), FForall("Y", FTOP, FTVar("Y")))

    def test_equivalence_on_enumerated(self):
        ctx = Context.of(("x", TOP))
        tys = list(enumerate_types("D", 4, ctx))
        renamed = [subst_var_in_type(t, "nothing", "x") for t in tys]
        for a, b in zip(tys, renamed):
            assert alpha_eq(a, b) and alpha_eq(b, a)
        # distinct enumerated types are never alpha-equivalent
        for i, a in enumerate(tys[:40]):
            for b in tys[i + 1:40]:
                assert not alpha_eq(a, b)


class TestSubst:
    def test_path(self):
        assert subst_var_in_type(x, "x", "y") == y

    def test_capture_avoided(self):
        out = subst_var_in_type(All("x", z, x), "z", "x")
        assert isinstance(out, All) and out.param != "x"
        assert out.param_type == x and out.ret == Path(out.param)

    def test_closed(self):
        assert subst_var_in_type(TOP, "x", "y") == TOP

    def test_shadowed(self):
        t = All("x", x, x)
        assert subst_var_in_type(t, "x", "y") == All("x", y, x)

    def test_term(self):
        t = Lambda("a", x, Apply("a", "x"))
        assert subst_var_in_term(t, "x", "y") == Lambda("a", y, Apply("a", "y"))


class TestMeasure:
    def test_values(self):
        assert measure(TOP) == 1
        assert measure(x) == 2
        assert measure(All("x", TOP, BOT)) == 3
        assert measure_ctx(Context.of(("x", TOP), ("y", TypeDecl(BOT, TOP)))) == 4

    def test_ftypes_count_nodes(self):
        assert measure(FFun(FTOP, FTVar("X"))) == 3


def _count(t) -> int:
    """Node count with paths worth two, written independently of ``measure``."""
    if t in (TOP, BOT):
        return 1
    if isinstance(t, Path):
        return 2
    children = (t.lower, t.upper) if isinstance(t, TypeDecl) else (t.param_type, t.ret)
    return 1 + sum(_count(c) for c in children)


def test_invertible_examples():
    assert is_invertible(Context.of(("x", TypeDecl(BOT, TOP))))
    assert not is_invertible(Context.of(("x", TypeDecl(TOP, BOT))))
    assert not is_invertible(Context.of(("x", TypeDecl(BOT, TypeDecl(BOT, TOP)))))
    assert not is_invertible(Context.of(("x", BOT)))
    assert is_invertible(Context.of(("x", TOP), ("y", All("z", x, TOP))))


def test_has_fun():
    assert has_fun(FForall("X", FTOP, FFun(FTOP, FTOP)))
    assert not has_fun(FForall("X", FTOP, FTVar("X")))


def test_show_unicode():
    assert show(All("x", TypeDecl(BOT, TOP), x), unicode=True) == "∀(x: {A: ⊥ .. ⊤}) x.A"


@given(dtypes(("a", "b")))
def test_alpha_reflexive(t):
    assert alpha_eq(t, t)


@given(dtypes(("a", "b")), dtypes(("a", "b")), dtypes(("a", "b")))
def test_alpha_transitive(a, b, c):
    if alpha_eq(a, b) and alpha_eq(b, c):
        assert alpha_eq(a, c)
    assert alpha_eq(a, b) == alpha_eq(b, a)


@given(dtypes(("a", "b")))
def test_subst_identity(t):
    assert alpha_eq(subst_var_in_type(t, "a", "a"), t)


@given(dtypes(("a", "b")), st.sampled_from(["x", "y", "b"]))
def test_subst_free_vars(t, to):
    out = subst_var_in_type(t, "a", to)
    assert free_vars(out) <= (free_vars(t) - {"a"}) | {to}
    assert measure(out) == measure(t)


@given(dtypes(("a",)))
def test_subst_round_trip_on_fresh_name(t):
    there = subst_var_in_type(t, "a", "q")
    assert alpha_eq(subst_var_in_type(there, "q", "a"), t)


@settings(max_examples=300)
@given(dtypes(("a", "b"), max_leaves=16))
def test_measure_matches_independent_count(t):
    assert measure(t) == _count(t) >= 1


def test_types_are_immutable():
    with pytest.raises(AttributeError):
        TOP.x = 1  # type: ignore[attr-defined]
    with pytest.raises(Exception):
        TypeDecl(TOP, BOT).lower = BOT  # type: ignore[misc]
    assert TypeTag(TOP).type == TOP
