"""Reference interpreter: execution, tracing, concrete sharing."""

import pytest

from refshare.aliasset import mk_pair, vc
from refshare.components import DomainMode, Universe
from refshare.interp import (Machine, build_literal, concrete_sharing,
                             footprint, run, show_value)
from refshare.parser import parse_program
from refshare.typecheck import check_types

from conftest import load_fixture


def test_bst_builds_sorted_tree():
    prog = load_fixture("bst")
    r = run(prog, "list_bst", ["Cons 3 (Cons 1 (Cons 2 Nil))"])
    assert r.status == "ok"
    rendered = show_value(_final_heap(prog, r), r.value)
    assert rendered == "(Node (Node TNil 1 (Node TNil 2 TNil)) 3 TNil)"


def _final_heap(prog, r):
    # trace points carry their own heap snapshots
    return r.trace[-1].heap


def test_literal_round_trip_through_show_value():
    # compound values render with outer parentheses, which build_literal
    # happily consumes again
    prog = load_fixture("bst")
    m = Machine(prog)
    for text in ("(Cons 1 (Cons 2 Nil))", "Nil", "5", "()",
                 "(Node TNil 7 (Node TNil 8 TNil))"):
        v = build_literal(m, text)
        assert show_value(m.heap, v) == text
        assert show_value(m.heap, build_literal(m, show_value(m.heap, v))) \
            == text


def test_reference_literals():
    prog = load_fixture("bst")
    m = Machine(prog)
    v = build_literal(m, "Ref (Cons 1 Nil)")
    assert show_value(m.heap, v) == "(Ref (Cons 1 Nil))"


def test_cyclic_value_rendering_terminates():
    prog = load_fixture("colours")
    r = run(prog, "make_cycle", [])
    assert r.status == "ok"
    text = show_value(_final_heap(prog, r), r.value, depth=10)
    assert "..." in text  # the cycle is cut off, not followed forever


def test_step_limit():
    prog = parse_program("""
fn loop (x: Int) -> ()
  pre nosharing post nosharing
{
  v = loop x
  ret = v
}
""")
    check_types(prog)
    r = run(prog, "loop", ["0"], step_limit=50)
    assert r.status == "step-limit"


def test_error_statement_aborts():
    prog = parse_program("""
data Ints = Nil | Cons Int Ints
fn f (xs: Ints) -> Int
  pre xs = abstract post nosharing
{
  case xs {
    Cons *h *t -> { ret = *h }
    Nil -> { error }
  }
}
""")
    check_types(prog)
    assert run(prog, "f", ["Cons 9 Nil"]).value is not None
    assert run(prog, "f", ["Nil"]).status == "error"


def test_footprint_respects_component_folding():
    prog = load_fixture("bst")
    u = Universe(prog, DomainMode.OLD)
    m = Machine(prog)
    v = build_literal(m, "Node (Node TNil 1 TNil) 2 (Node TNil 3 TNil)")
    from refshare.syntax import Named
    fp = footprint(u, prog, m.heap, v, Named("Tree", ()))
    # every key is a component of the type
    comps = set(u.components_of(Named("Tree", ())))
    assert set(fp) <= comps
    # the whole tree collapses onto the empty component plus the key slot
    assert fp[()], "expected cells under the root component"


def test_concrete_sharing_matches_structural_facts():
    prog = load_fixture("rtrees")
    r = run(prog, "two_trees", [])
    assert r.status == "ok"
    u = Universe(prog, DomainMode.OLD)
    tp = next(t for t in r.trace if t.label == "two_trees:5")
    a = concrete_sharing(u, prog, tp, prog.funcs["two_trees"].var_types)
    # ts was built as Cons t Nil: the list's head slot is exactly t
    assert mk_pair(vc("t", "[RNode.1]"), vc("ts", "[Cons.1,RNode.1]")) in a
    assert mk_pair(vc("t", "[RNode.2]"), vc("ts", "[]")) in a
    # concrete sharing is always self-closed
    assert a.with_self_closure() == a


def test_trace_covers_executed_points_only():
    prog = load_fixture("bst")
    r = run(prog, "list_bst", ["Nil"])
    labels = {t.label for t in r.trace}
    # the Cons branch of list_bst_du never runs on an empty list
    assert "list_bst_du:7" in labels
    assert "list_bst_du:2" not in labels
