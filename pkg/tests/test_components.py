"""Unit and property tests for the folded-component domain."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refshare.components import DomainMode, Universe, parse_comp, comp_str
from refshare.parser import parse_program
from refshare.typecheck import check_types

SRC = """
data Ints = Nil | Cons Int Ints
data Tree = TLeaf | TNode Tree Int Tree
data RTrees = RNil | RCons RTree RTrees
data RTree = RNode Int RTrees

fn noop () -> () pre nosharing post nosharing { ret = () }
"""


def _universe(mode):
    prog = parse_program(SRC)
    check_types(prog)
    return prog, Universe(prog, mode)


def _named(prog, name):
    from refshare.syntax import Named
    return Named(name, ())


def _comps(u, t):
    return {comp_str(c) for c in u.components_of(t)}


def test_old_mode_components_of_recursive_types():
    prog, u = _universe(DomainMode.OLD)
    from refshare.syntax import Named, RefT
    tree = Named("Tree", ())
    assert _comps(u, tree) == {"[]", "[TNode.2]"}
    assert _comps(u, RefT(tree)) == {"[Ref.1]", "[Ref.1,TNode.2]"}
    assert _comps(u, Named("RTree", ())) == {"[]", "[RNode.1]", "[RNode.2]"}
    assert _comps(u, Named("RTrees", ())) == {"[]", "[RCons.1]",
                                              "[RCons.1,RNode.1]"}
    assert _comps(u, Named("Int", ())) == set()


def test_new_mode_components_of_recursive_types():
    prog, u = _universe(DomainMode.NEW)
    from refshare.syntax import Named
    # rewinding to the first occurrence of a repeated type keeps one
    # constructor layer of context and never produces the empty path
    assert _comps(u, Named("RTree", ())) == {
        "[RNode.1]", "[RNode.2]", "[RNode.2,RCons.1]", "[RNode.2,RCons.2]"}
    assert _comps(u, Named("Ints", ())) == {"[Cons.1]", "[Cons.2]"}
    for t in ("Tree", "RTrees", "RTree", "Ints"):
        assert "[]" not in _comps(u, Named(t, ()))


def test_old_mode_fold_truncates_on_ancestor_type():
    prog, u = _universe(DomainMode.OLD)
    from refshare.syntax import Named
    ints = Named("Ints", ())
    # stepping back into the root type folds to the empty path
    assert u.fc(ints, parse_comp("[Cons.2]")) == ()
    assert u.fc(ints, parse_comp("[Cons.2,Cons.1]")) == parse_comp("[Cons.1]")


def test_preimages_in_recursive_list():
    prog, u = _universe(DomainMode.OLD)
    from refshare.syntax import Named
    ints = Named("Ints", ())
    # which argument-side components of Cons's second argument reach
    # [Cons.1] after prefixing the step Cons.2?
    rests = {comp_str(tuple(r))
             for r in u.preimages_under(ints, "Cons", 2, parse_comp("[Cons.1]"))}
    assert rests == {"[Cons.1]"}
    # the list tail itself folds onto the whole list
    rests = {comp_str(tuple(r))
             for r in u.preimages_under(ints, "Cons", 2, ())}
    assert rests == {"[]"}


def test_unfold_preimages_mutually_recursive():
    prog, u = _universe(DomainMode.OLD)
    from refshare.syntax import Named
    rtrees = Named("RTrees", ())
    pre = {comp_str(c) for c in u.unfold_preimages(rtrees, ())}
    assert pre == {"[RCons.2]", "[RCons.1,RNode.2]"}


def test_comp_str_round_trip():
    for s in ("[]", "[Cons.1]", "[Ref.1,TNode.2]", "[RCons.1,RNode.1]"):
        assert comp_str(parse_comp(s)) == s


_TYPES = ["Ints", "Tree", "RTrees", "RTree"]
_STEPS = [("Cons", 1), ("Cons", 2), ("TNode", 1), ("TNode", 2), ("TNode", 3),
          ("RCons", 1), ("RCons", 2), ("RNode", 1), ("RNode", 2), ("Ref", 1)]


@settings(max_examples=300, deadline=None)
@given(tname=st.sampled_from(_TYPES),
       mode=st.sampled_from(list(DomainMode)),
       raw=st.lists(st.sampled_from(_STEPS), max_size=4))
def test_fold_is_idempotent_on_random_paths(tname, mode, raw):
    prog, u = _universe(mode)
    from refshare.syntax import Named
    t = Named(tname, ())
    c = u.fc(t, raw, strict=False)
    if c is None:
        return  # illegal path: nothing to check
    assert u.fc(t, c) == c
    assert c in (u.components_of(t) | {()})


@settings(max_examples=100, deadline=None)
@given(tname=st.sampled_from(_TYPES), mode=st.sampled_from(list(DomainMode)))
def test_component_sets_are_finite_and_folded(tname, mode):
    prog, u = _universe(mode)
    from refshare.syntax import Named
    t = Named(tname, ())
    comps = u.components_of(t)
    assert len(comps) < 100
    for c in comps:
        assert u.fc(t, c) == c


@settings(max_examples=200, deadline=None)
@given(tname=st.sampled_from(_TYPES),
       mode=st.sampled_from(list(DomainMode)),
       step=st.sampled_from(_STEPS))
def test_preimages_fold_back(tname, mode, step):
    prog, u = _universe(mode)
    from refshare.syntax import Named
    t = Named(tname, ())
    dc, i = step
    targets = set(u.components_of(t)) | {()}
    for c in targets:
        for rest in u.preimages_under(t, dc, i, c):
            assert u.fc(t, ((dc, i),) + tuple(rest), strict=False) == c
