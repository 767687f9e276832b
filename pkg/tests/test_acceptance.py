"""End-to-end acceptance checks for the sharing analysis toolkit.

Every expected alias set here was worked out by hand from the transfer
rules (written in the clique "group" notation and expanded), so these
tests are an oracle for the analyzer rather than a snapshot of its
output.
"""

import time

import pytest

from refshare.aliasset import AliasSet, alias_set_from_groups, mk_pair, vc
from refshare.analysis import Options, analyze_program
from refshare.components import DomainMode, Universe
from refshare.interp import run, soundness_check
from refshare.randprog import generate_program

from conftest import analyze_fixture, load_fixture


# ---------------------------------------------------------------------------
# 1. Exact per-point reproduction for the binary search tree program
#    (coarse/OLD component folding).
# ---------------------------------------------------------------------------

ABS_L = "abstract:Ints.[Cons.1]", "abstract:Ints.[]"


def _expect_list_bst():
    a0 = alias_set_from_groups(
        ("xs.[Cons.1]", "abstract:Ints.[Cons.1]"),
        ("xs.[]", "abstract:Ints.[]"),
    )
    a1 = a0
    a2 = a1.union(alias_set_from_groups(("tp.[Ref.1]",)))
    a3 = a2.union(alias_set_from_groups(("tp.[Ref.1,Node.2]",)))
    a4 = a3.union(alias_set_from_groups(
        ("ret.[]", "tp.[Ref.1]"),
        ("ret.[Node.2]", "tp.[Ref.1,Node.2]"),
    ))
    return {0: a0, 1: a1, 2: a2, 3: a3, 4: a4}


def _expect_list_bst_du():
    a0 = alias_set_from_groups(
        ("tp.[Ref.1]",),
        ("tp.[Ref.1,Node.2]",),
        ("xs.[Cons.1]", "abstract:Ints.[Cons.1]"),
        ("xs.[]", "abstract:Ints.[]"),
    )
    a1 = a0.union(alias_set_from_groups(
        ("xs.[Cons.1]", "abstract:Ints.[Cons.1]", "v1.[Ref.1]",
         "v2.[Ref.1,Cons.1]"),
        ("v2.[Ref.1]", "xs.[]", "abstract:Ints.[]"),
    ))
    a2 = a1
    a3 = a2.union(alias_set_from_groups(
        ("v2.[Ref.1]", "xs.[]", "xs1.[]", "abstract:Ints.[]"),
        ("v1.[Ref.1]", "xs.[Cons.1]", "xs1.[Cons.1]",
         "abstract:Ints.[Cons.1]", "v2.[Ref.1,Cons.1]"),
    ))
    a7 = alias_set_from_groups(
        ("tp.[Ref.1]",),
        ("tp.[Ref.1,Node.2]",),
        ("abstract:Ints.[Cons.1]",),
        ("abstract:Ints.[]",),
    )
    a9 = a3.union(a7)
    return {0: a0, 1: a1, 2: a2, 3: a3, 4: a3, 5: a3, 6: a3,
            7: a7, 8: a7, 9: a9}


def _expect_bst_insert_du():
    a0 = alias_set_from_groups(("tp.[Ref.1]",), ("tp.[Ref.1,Node.2]",))
    a1 = a0.union(alias_set_from_groups(
        ("v1.[]", "tp.[Ref.1]"),
        ("tp.[Ref.1,Node.2]", "v1.[Node.2]"),
    ))
    a5 = a0.union(alias_set_from_groups(("v4.[]",), ("v4.[Node.2]",)))
    a6 = a5.union(alias_set_from_groups(
        ("v4.[]", "tp.[Ref.1]"),
        ("v4.[Node.2]", "tp.[Ref.1,Node.2]"),
    ))
    a8 = a1.union(alias_set_from_groups(
        ("v1.[]", "tp.[Ref.1]", "lp.[Ref.1]", "rp.[Ref.1]"),
        ("tp.[Ref.1,Node.2]", "lp.[Ref.1,Node.2]", "rp.[Ref.1,Node.2]",
         "v5.[Ref.1]", "v1.[Node.2]"),
    ))
    a18 = a8.union(a6)
    exp = {0: a0, 1: a1, 2: a0, 3: a0, 4: a0, 5: a5, 6: a6, 7: a6,
           18: a18}
    for p in range(8, 18):
        exp[p] = a8
    return exp


GOLDEN_BST = {
    "list_bst": _expect_list_bst,
    "list_bst_du": _expect_list_bst_du,
    "bst_insert_du": _expect_bst_insert_du,
}


@pytest.mark.parametrize("fn", sorted(GOLDEN_BST))
def test_bst_per_point_old_mode(fn):
    start = time.time()
    _, res = analyze_fixture("bst", DomainMode.OLD)
    expected = GOLDEN_BST[fn]()
    got = res[fn].per_point
    assert sorted(got) == sorted(expected)
    for point in sorted(expected):
        assert got[point] == expected[point], (
            f"{fn}:{point}\n got      {got[point].compact_text()}\n"
            f" expected {expected[point].compact_text()}")
    assert not res[fn].diagnostics
    assert time.time() - start < 1.0


# ---------------------------------------------------------------------------
# 2. Sharing created by  t = RNode 2 Nil; ts = Cons t Nil  between a tree
#    and a list containing it (mutually recursive types, OLD folding).
# ---------------------------------------------------------------------------

def test_tree_in_list_sharing_old_mode():
    _, res = analyze_fixture("rtrees", DomainMode.OLD)
    expected = AliasSet({
        mk_pair(vc("t", "[RNode.1]"), vc("t", "[RNode.1]")),
        mk_pair(vc("t", "[RNode.2]"), vc("t", "[RNode.2]")),
        mk_pair(vc("ts", "[]"), vc("ts", "[]")),
        mk_pair(vc("ts", "[Cons.1]"), vc("ts", "[Cons.1]")),
        mk_pair(vc("ts", "[Cons.1,RNode.1]"), vc("ts", "[Cons.1,RNode.1]")),
        mk_pair(vc("t", "[RNode.1]"), vc("ts", "[Cons.1,RNode.1]")),
        mk_pair(vc("t", "[RNode.2]"), vc("ts", "[]")),
    })
    got = res["two_trees"].per_point[5].restrict_to({"t", "ts"})
    assert got == expected
    assert len(expected) == 7


# ---------------------------------------------------------------------------
# 3. Update-safety diagnostics.
# ---------------------------------------------------------------------------

def _kinds_at(res, fn):
    return {(d.kind, d.point) for d in res[fn].diagnostics}


def test_cyclic_argument_violates_nosharing_precondition():
    # assign requires its two arguments not to share, but tailp points
    # into cols.
    _, res = analyze_fixture("colours", DomainMode.OLD)
    kinds = {d.kind for d in res["make_cycle"].diagnostics}
    assert "PreconditionViolated" in kinds


def test_update_without_annotating_live_alias():
    # *!headp := Green mutates a cell the live variable cols can reach,
    # and cols is not in the statement's annotation set.
    _, res = analyze_fixture("colours", DomainMode.OLD)
    diags = [d for d in res["update_head"].diagnostics
             if d.kind == "MissingBang"]
    assert diags
    assert any("cols" in d.message for d in diags)


def test_abstract_sharing_blocks_nosharing_callee():
    # demo's parameter may share with arbitrary callers' data, so passing
    # it to a destructive updater declared `pre nosharing` must be
    # rejected.
    _, res = analyze_fixture("abstract_update", DomainMode.OLD)
    kinds = {d.kind for d in res["demo"].diagnostics}
    assert "PreconditionViolated" in kinds


# ---------------------------------------------------------------------------
# 4. Postcondition checking for double references.
# ---------------------------------------------------------------------------

def test_double_ref_postcondition():
    _, res = analyze_fixture("double_ref", DomainMode.OLD)
    assert res["good_post"].ok
    bad = {d.kind for d in res["bad_post"].diagnostics}
    assert bad == {"PostconditionViolated"}


# ---------------------------------------------------------------------------
# 5. Functions whose declared sharing is satisfied analyze cleanly.
# ---------------------------------------------------------------------------

def test_fresh_result_satisfies_nosharing_post():
    _, res = analyze_fixture("map_const", DomainMode.OLD)
    assert res["map_const_1"].ok


def test_abstract_result_post_accepted():
    _, res = analyze_fixture("bst", DomainMode.OLD)
    assert res["list_bst"].ok


# ---------------------------------------------------------------------------
# 6. Precision difference between the two component-folding modes on
#    repeated destructive updates through one pointer.
# ---------------------------------------------------------------------------

CROSS_TREE_PAIRS = [
    mk_pair(vc("rtree1", "[]"), vc("rtree2", "[]")),
    mk_pair(vc("rtree1", "[]"), vc("rtree3", "[]")),
    mk_pair(vc("rtree2", "[]"), vc("rtree3", "[]")),
    mk_pair(vc("rtree1", "[RNode.1]"), vc("rtree2", "[RNode.1]")),
    mk_pair(vc("rtree1", "[RNode.2]"), vc("rtree3", "[RNode.2]")),
]


def test_repeated_update_cross_sharing_old_mode():
    _, res = analyze_fixture("rtrees", DomainMode.OLD)
    final_point = max(res["reuse_ptr"].per_point)
    a = res["reuse_ptr"].per_point[final_point]
    for pair in CROSS_TREE_PAIRS:
        assert pair in a, f"missing {pair} in OLD mode"


def test_repeated_update_no_cross_sharing_new_mode():
    _, res = analyze_fixture("rtrees", DomainMode.NEW)
    names = {"rtree1", "rtree2", "rtree3"}
    for point, a in res["reuse_ptr"].per_point.items():
        for p, q in a:
            if p.var in names and q.var in names:
                assert p.var == q.var, (
                    f"NEW mode cross pair {{{p}, {q}}} at point {point}")


# ---------------------------------------------------------------------------
# 7. Soundness of the analysis against the reference interpreter: every
#    concrete alias pair observed during execution must be predicted.
# ---------------------------------------------------------------------------

RUNNABLE = [
    ("bst", "list_bst", ["Cons 3 (Cons 1 (Cons 2 Nil))"]),
    ("rtrees", "two_trees", []),
    ("rtrees", "reuse_ptr", ["RNode 1 Nil", "RNode 2 Nil", "RNode 3 Nil"]),
    ("colours", "update_head", []),
    ("colours", "make_cycle", []),
    ("abstract_update", "overwrite", ["5", "Ref TLeaf"]),
    ("abstract_update", "demo", ["Ref TLeaf"]),
    ("double_ref", "good_post", ["Ref (Ref (Ref 1))", "Ref (Ref (Ref 2))"]),
    ("double_ref", "bad_post", ["Ref (Ref (Ref 1))", "Ref (Ref (Ref 2))"]),
    ("map_const", "map_const_1", ["Cons 1 (Cons 2 Nil)"]),
    ("map_const", "hazard_demo", ["Ref (Cons 1 Nil)"]),
    ("closures", "use_adder", []),
    ("closures", "close_over", ["Cons 5 Nil"]),
    ("closures", "const_pair", ["Nil", "Nil"]),
    ("arrays", "head_or_zero", ["Array (Cons 1 Nil) Nil"]),
]

N_RANDOM = 200


def _violations(prog, mode, result):
    analyses = analyze_program(prog, Options(mode=mode))
    per_label = {}
    for r in analyses.values():
        per_label.update(r.labelled_points())
    return soundness_check(prog, Universe(prog, mode), result, per_label)


def test_soundness_fixtures_and_random_programs():
    start = time.time()
    for name, entry, args in RUNNABLE:
        prog = load_fixture(name)
        result = run(prog, entry, args)
        assert result.status == "ok", (name, entry, result.status)
        for mode in DomainMode:
            v = _violations(prog, mode, result)
            assert not v, (name, entry, mode, [str(x) for x in v[:3]])
    for seed in range(N_RANDOM):
        prog = generate_program(seed, max_stmts=12)
        result = run(prog, "main", [])
        assert result.status == "ok", (seed, result.status)
        for mode in DomainMode:
            v = _violations(prog, mode, result)
            assert not v, (seed, mode, [str(x) for x in v[:3]])
    assert time.time() - start < 60.0


# ---------------------------------------------------------------------------
# 8. Algebraic properties of the component domain, checked exhaustively
#    over every type that occurs in the fixture corpus.
# ---------------------------------------------------------------------------

FIXTURE_NAMES = ["bst", "rtrees", "colours", "abstract_update",
                 "double_ref", "map_const", "closures", "arrays"]


def _fixture_types(prog):
    types = []
    for fd in prog.funcs.values():
        types.extend(fd.var_types.values())
    return types


@pytest.mark.parametrize("mode", list(DomainMode))
def test_component_domain_algebra(mode):
    for name in FIXTURE_NAMES:
        prog = load_fixture(name)
        u = Universe(prog, mode)
        for t in _fixture_types(prog):
            comps = u.components_of(t)
            assert len(comps) < 10_000  # finite, materialized
            for c in comps:
                # folding is idempotent on already-folded paths
                assert u.fc(t, c) == c, (name, t, c, mode)
                # every preimage of c under any constructor step folds
                # back to c
                for dc, arity in _cons_steps(u, t):
                    for i in range(arity):
                        for rest in u.preimages_under(t, dc, i, c):
                            folded = u.fc(t, ((dc, i),) + tuple(rest))
                            assert folded == c, (name, t, c, dc, i, rest)


def _cons_steps(u, t):
    try:
        cons = u.constructors(t)
    except Exception:
        return []
    return [(name, len(arg_types)) for name, arg_types in cons]


@pytest.mark.parametrize("mode", list(DomainMode))
def test_analysis_points_are_self_closed(mode):
    for name in FIXTURE_NAMES:
        prog, res = analyze_fixture(name, mode)
        for fn, r in res.items():
            for point, a in r.per_point.items():
                assert a.with_self_closure() == a, (name, fn, point, mode)
