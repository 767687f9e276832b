"""Sharing analysis: condition lowering, transfer rules, diagnostics."""

import pytest

from refshare.aliasset import alias_set_from_groups, mk_pair, vc
from refshare.analysis import (AnalysisCtx, Options, analyze_program)
from refshare.components import DomainMode
from refshare.parser import parse_program
from refshare.syntax import CDC, Cond, CStarEq, Named
from refshare.typecheck import check_types

from conftest import analyze_fixture

HEADER = """
data Ints = Nil | Cons Int Ints
data PairR = MkPair (Ref Ints) (Ref Ints)
"""


def _prog(body_src):
    prog = parse_program(HEADER + body_src)
    check_types(prog)
    return prog


def _ctx(mode=DomainMode.OLD):
    prog = _prog("fn f (p: PairR) -> () pre nosharing post nosharing "
                 "{ ret = () }")
    return AnalysisCtx(prog, Options(mode=mode))


# -- condition lowering ------------------------------------------------------

def test_lower_pair_of_shared_refs():
    # "*a = *b; p = MkPair a b": both fields of p reach the same list
    ctx = _ctx()
    cond = Cond(stmts=(CStarEq(1, "a", 1, "b"),
                       CDC("p", "MkPair", ("a", "b"))))
    a, abstracts = ctx.lower_condition(cond, {"p": Named("PairR", ())})
    assert abstracts == {}
    assert a == alias_set_from_groups(
        ("p.[MkPair.1]",),
        ("p.[MkPair.2]",),
        ("p.[MkPair.1,Ref.1]", "p.[MkPair.2,Ref.1]"),
        ("p.[MkPair.1,Ref.1,Cons.1]", "p.[MkPair.2,Ref.1,Cons.1]"),
    )


def test_lower_abstract_introduces_pseudo_variable():
    ctx = _ctx()
    cond = Cond(stmts=(CStarEq(0, "xs", 0, "abstract"),))
    a, abstracts = ctx.lower_condition(cond, {"xs": Named("Ints", ())})
    assert list(abstracts) == ["abstract:Ints"]
    assert a == alias_set_from_groups(
        ("xs.[]", "abstract:Ints.[]"),
        ("xs.[Cons.1]", "abstract:Ints.[Cons.1]"),
    )


def test_lower_nosharing_is_self_pairs_only():
    ctx = _ctx()
    a, abstracts = ctx.lower_condition(Cond(stmts=()),
                                       {"xs": Named("Ints", ())})
    assert abstracts == {}
    assert a == alias_set_from_groups(("xs.[]",), ("xs.[Cons.1]",))


def test_lower_with_base_keeps_transitive_pairs():
    # a postcondition is interpreted on top of the precondition state, so
    # "ret = x" plus a pre where x shares with y allows ret ~ y
    ctx = _ctx()
    env = {"x": Named("Ints", ()), "y": Named("Ints", ())}
    pre, _ = ctx.lower_condition(
        Cond(stmts=(CStarEq(0, "x", 0, "y"),)), env)
    env2 = dict(env, ret=Named("Ints", ()))
    post, _ = ctx.lower_condition(
        Cond(stmts=(CStarEq(0, "ret", 0, "x"),)), env2, base=pre)
    assert mk_pair(vc("ret", "[]"), vc("y", "[]")) in post


# -- individual transfer behaviour -------------------------------------------

def test_reference_to_constant_is_conservative():
    # After *vp = Nil; v = *vp the analysis cannot rule out sharing
    # between v and the referenced cell (the empty component of a
    # recursive type stands for any substructure).
    prog = _prog("""
fn f () -> ()
  pre nosharing post nosharing
{
  v0 = Nil
  *vp = v0
  v = *vp
  ret = ()
}
""")
    res = analyze_program(prog, Options(mode=DomainMode.OLD))["f"]
    a = res.per_point[3]
    assert mk_pair(vc("v", "[]"), vc("v", "[]")) in a
    assert mk_pair(vc("v", "[]"), vc("vp", "[Ref.1]")) in a


def test_error_statement_yields_empty_set():
    prog = _prog("""
fn f (xs: Ints) -> Ints
  pre xs = abstract post nosharing
{
  error
}
""")
    res = analyze_program(prog, Options(mode=DomainMode.OLD))["f"]
    assert len(res.per_point[1]) == 0
    assert res.ok


def test_constants_do_not_share():
    prog = _prog("""
fn f () -> Ints
  pre nosharing post nosharing
{
  xs = Nil
  ys = xs
  ret = ys
}
""")
    res = analyze_program(prog, Options(mode=DomainMode.OLD))["f"]
    final_point = max(res.per_point)
    assert not res.per_point[final_point].restrict_to({"xs", "ys", "ret"})
    assert res.ok


# -- diagnostics --------------------------------------------------------------

def test_update_through_unbanged_parameter():
    prog = _prog("""
fn f (p: Ref Ints) -> ()
  pre nosharing post nosharing
{
  v = Nil
  *!p := v !p
  ret = ()
}
""")
    res = analyze_program(prog, Options(mode=DomainMode.OLD))["f"]
    assert "UndeclaredMutable" in {d.kind for d in res.diagnostics}


def test_update_reaching_abstract_sharing():
    _, res = analyze_fixture("abstract_update", DomainMode.OLD)
    kinds = {d.kind for d in res["demo"].diagnostics}
    assert "AbstractUpdate" in kinds


def test_generic_reuse_before_update_is_flagged():
    _, res = analyze_fixture("map_const", DomainMode.OLD)
    diags = res["hazard_demo"].diagnostics
    assert "InstypeHazard" in {d.kind for d in diags}


def test_diagnostics_carry_point_labels():
    _, res = analyze_fixture("colours", DomainMode.OLD)
    for d in res["make_cycle"].diagnostics:
        fn, _, point = d.point.partition(":")
        assert fn == "make_cycle" and point.isdigit()


# -- function application -----------------------------------------------------

def test_closure_result_sharing_suppressed_with_precise_app():
    _, coarse = analyze_fixture("closures", DomainMode.OLD)
    _, precise = analyze_fixture("closures", DomainMode.OLD,
                                 precise_app=True)
    g_cl = mk_pair(vc("g", "[Cl.1]"), vc("g", "[Cl.1]"))
    assert any(g_cl in a for a in coarse["use_adder"].per_point.values())
    assert all(g_cl not in a for a in precise["use_adder"].per_point.values())
    assert precise["use_adder"].ok


def test_mutable_argument_gains_callee_post_sharing():
    _, res = analyze_fixture("bst", DomainMode.OLD)
    a3 = res["list_bst"].per_point[3]
    assert mk_pair(vc("tp", "[Ref.1,Node.2]"), vc("tp", "[Ref.1,Node.2]")) in a3


def test_labelled_points_use_function_prefix():
    _, res = analyze_fixture("bst", DomainMode.OLD)
    labels = res["list_bst"].labelled_points()
    assert set(labels) == {f"list_bst:{i}" for i in range(5)}
