import itertools
import json
from importlib import resources

import pytest
from hypothesis import given, settings

from dsub.checker import check_derivation
from dsub.engines import Prover
from dsub.enumerate import enumerate_contexts, enumerate_types
from dsub.errors import MappingError
from dsub.judgements import SubJudgement, SystemId, Verdict
from dsub.parser import parse_type
from dsub.reductions import (
    counterexample_catalog, image_membership, map_ctx, map_type, ope_check, replay_catalog, var_of,
)
from dsub.syntax import (
    BOT, EMPTY, FTOP, TOP, All, Context, FForall, FFun, FTVar, Path, TypeDecl, ctx_well_formed,
    is_invertible,
)

from strategies import fcontexts, ftypes


class TestMapping:
    def test_top(self):
        assert map_type(FTOP) == TOP

    def test_var(self):
        assert map_type(FTVar("X")) == Path("x_X")

    def test_forall(self):
        assert map_type(FForall("X", FTOP, FTOP)) == All("x_X", TypeDecl(BOT, TOP), TOP)

    def test_ctx(self):
        assert map_ctx(Context.of(("X", FTOP))) == Context.of(("x_X", TypeDecl(BOT, TOP)))

    def test_function_rejected(self):
        with pytest.raises(MappingError):
            map_type(FFun(FTOP, FTOP))

    def test_function_allowed(self):
        out = map_type(FFun(FTOP, FTOP), allow_fun=True)
        assert isinstance(out, All) and out.param_type == TOP and out.ret == TOP

    def test_renaming_injective(self):
        names = ["X", "Y", "X1", "x_X", "Z'"]
        assert len({var_of(n) for n in names}) == len(names)


@given(fcontexts(max_len=3, max_leaves=4).flatmap(lambda g: ftypes(g.dom(), 8, fun=False).map(lambda t: (g, t))))
def test_image_properties(case):
    g, t = case
    image_ctx = map_ctx(g)
    assert ctx_well_formed(image_ctx) and is_invertible(image_ctx)
    assert image_membership(map_type(t))
    for _, bound in image_ctx:
        assert image_membership(bound.upper)


@given(ftypes((), 8, fun=True))
def test_image_with_functions(t):
    assert image_membership(map_type(t, allow_fun=True), allow_fun=True)


class TestImageMembership:
    def test_bot(self):
        assert not image_membership(BOT)

    def test_top(self):
        assert image_membership(TOP)

    def test_non_image_middle(self):
        assert not image_membership(parse_type("all(x: {A: Top .. Bot}) x.A"))

    def test_bare_declaration(self):
        assert not image_membership(TypeDecl(BOT, TOP))

    def test_function_form(self):
        t = All("y", TOP, TOP)
        assert not image_membership(t)
        assert image_membership(t, allow_fun=True)


class TestInvertible:
    def test_examples(self):
        assert is_invertible(Context.of(("x", TypeDecl(BOT, TOP))))
        assert not is_invertible(Context.of(("x", TypeDecl(TOP, BOT))))
        assert not is_invertible(Context.of(("x", TypeDecl(BOT, TypeDecl(BOT, TOP)))))

    def test_every_enumerated_image(self):
        for g in enumerate_contexts("F", 2, 4, fun=False):
            assert is_invertible(map_ctx(g))


class TestOpe:
    def test_nil(self):
        res = ope_check(EMPTY, EMPTY, 2)
        assert res.proved and res.derivation.rule == "Ope-Nil"

    def test_drop(self):
        res = ope_check(Context.of(("x", TOP)), EMPTY, 2)
        assert res.proved and res.derivation.rule == "Ope-Drop"

    def test_keep(self):
        res = ope_check(Context.of(("x", BOT)), Context.of(("x", TOP)), 2)
        assert res.proved and res.derivation.rule == "Ope-Keep" and check_derivation(res.derivation)

    def test_widening_is_not_narrowing(self):
        res = ope_check(Context.of(("x", TOP)), Context.of(("x", BOT)), 4)
        assert not res.proved

    def test_extra_binding_refuted(self):
        assert ope_check(EMPTY, Context.of(("x", TOP)), 2).verdict is Verdict.REFUTED


SMALL_CTXS = list(enumerate_contexts("D", 2, 2))


def test_ope_reflexive():
    for g in SMALL_CTXS:
        res = ope_check(g, g, 4)
        assert res.proved and check_derivation(res.derivation)


def test_ope_transitive():
    prover = Prover(SystemId.DSUB_ORIG, 3)
    related = {(i, j) for (i, a), (j, b) in itertools.product(enumerate(SMALL_CTXS), repeat=2)
               if ope_check(a, b, 4, prover=prover).proved}
    for (i, j), (k, m) in itertools.product(related, related):
        if j == k:
            assert ope_check(SMALL_CTXS[i], SMALL_CTXS[m], 8, prover=prover).proved


def test_ope_respected_by_subtyping():
    prover = Prover(SystemId.DSUB_ORIG, 3)
    narrow = Context.of(("x", TypeDecl(BOT, BOT)))
    wide = Context.of(("x", TypeDecl(BOT, TOP)))
    more = Context.of(("x", TypeDecl(BOT, BOT)), ("y", TOP))
    for small, big in ((narrow, wide), (more, wide), (more, EMPTY)):
        assert ope_check(small, big, 4, prover=prover).proved
        for s, u in itertools.product(list(enumerate_types("D", 3, big)), repeat=2):
            if prover.prove(SubJudgement(SystemId.DSUB_ORIG, big, s, u), 5).proved:
                assert prover.prove(SubJudgement(SystemId.DSUB_ORIG, small, s, u), 8).proved


@settings(max_examples=60, deadline=None)
@given(fcontexts(max_len=2, max_leaves=3).flatmap(
    lambda g: ftypes(g.dom(), 4, fun=False).flatmap(lambda s: ftypes(g.dom(), 4, fun=False).map(lambda u: (g, s, u)))))
def test_mapping_preserved_and_reflected(case):
    g, s, u = case
    f = Prover(SystemId.FSUB_MINUS).prove(SubJudgement(SystemId.FSUB_MINUS, g, s, u), 20)
    d = Prover(SystemId.DSUB_NF, inversion=True).prove(
        SubJudgement(SystemId.DSUB_NF, map_ctx(g), map_type(s), map_type(u)), 16)
    assert not (f.proved and d.refuted)
    assert not (d.proved and f.refuted)


class TestCatalog:
    def test_shape(self):
        entries = counterexample_catalog()
        assert len(entries) >= 6
        assert len({e.name for e in entries}) == len(entries)
        assert all(e.checks and e.description and e.source for e in entries)

    def test_data_file_versioned(self):
        raw = json.loads(resources.files("dsub").joinpath("data/catalog.json").read_text(encoding="utf-8"))
        assert raw["version"] == 1

    def test_covers_required_cases(self):
        by_name = {e.name: e for e in counterexample_catalog()}
        assert by_name["function-vs-universal"].expected["fsub-nf"] == "refuted"
        assert by_name["non-image-middle"].expected["image"] in ("true", "false")
        bad = by_name["bad-bounds"].expected
        assert (bad["dsub"], bad["kernel"], bad["stare-at"]) == ("proved", "refuted", "rejected")
        assert by_name["aliasing"].expected["step"] == "rejected"
        assert by_name["typing-reduction"].expected["typing"] == "proved"

    @pytest.mark.parametrize("outcome", replay_catalog(), ids=lambda o: f"{o.entry}-{o.check.system or o.check.kind}")
    def test_golden(self, outcome):
        assert outcome.ok, f"expected {outcome.check.expect}, got {outcome.actual}"
