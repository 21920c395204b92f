import pytest

from battery import ALL, FREE, random_hosts
from grafrepair.conditions import graph_satisfies, kmax, potentially_increasing_occurrences
from grafrepair.conflicts import CyclicError, constraint_order
from grafrepair.fixtures import C, CF, CFDISC, FF, FFDISC, G0, G1, G2, G_DEP, RULES, addF, c_le1, c_noDep, c_one, delDep, graph
from grafrepair.graph import Morphism
from grafrepair.matching import graph_isomorphic
from grafrepair.repair import (
    EDGELESS_REASON,
    IterationCapExceeded,
    RepairingSet,
    RepairTrace,
    apply_sequence_at,
    apply_sequence_stepwise,
    build_sequence,
    construct_repairing_set,
    constructed_rules,
    iteration_bound,
    repair_one,
    repair_set,
    repairing_set_from_rules,
    required_graphs,
    validate_for_set,
    validate_repairing_sequence,
    validate_repairing_set,
)
from grafrepair.rewrite import PlainRule
from grafrepair.conditions import uanf_from_graphs

PLAIN = list(RULES.values())
CONSTRUCTIBLE = sorted(n for n, c in FREE.items() if c.nlvl >= 2 and n != "c_alldep")


def one_set():
    return repairing_set_from_rules(c_one, PLAIN)


def nodep_set():
    return repairing_set_from_rules(c_noDep, PLAIN)


class TestSequences:
    def test_add_feature(self):
        seq = build_sequence(c_one, 2, [(addF, {0: 0}, {})])
        v = validate_repairing_sequence(seq, c_one)
        assert v and v.shortcut
        assert seq.anchor == C and graph_isomorphic(seq.result, CF)

    def test_wrong_anchor(self):
        seq = build_sequence(c_noDep, 1, [(delDep, {0: 0, 1: 1}, {0: 0})])
        v = validate_repairing_sequence(seq, c_one, 2)
        assert not v and any("start" in r for r in v.reasons)

    def test_delete_dep(self):
        seq = build_sequence(c_noDep, 1, [(delDep, {0: 0, 1: 1}, {0: 0})])
        assert validate_repairing_sequence(seq, c_noDep)
        assert seq.kind == "universal"

    def test_deleting_a_node_is_not_allowed(self):
        del_f = PlainRule(FF, graph({0: "Feature"}), graph({0: "Feature"}), "delF")
        seq = build_sequence(c_noDep, 1, [(del_f, {0: 0, 1: 1}, {0: 0})])
        v = validate_repairing_sequence(seq, c_noDep)
        assert not v and any("deleted" in r for r in v.reasons)

    def test_describe(self):
        seq = build_sequence(c_one, 2, [(addF, {0: 0}, {})])
        assert seq.describe() == "C_2 (existential): addF"


class TestSets:
    def test_required_graphs(self):
        assert required_graphs(c_one) == [2]
        assert required_graphs(c_noDep) == [1]
        assert required_graphs(ALL["c_chain"]) == [2, 3]

    def test_rule_search(self):
        assert validate_repairing_set(one_set(), c_one)
        assert validate_repairing_set(nodep_set(), c_noDep)

    def test_empty_set_names_the_missing_graph(self):
        v = validate_repairing_set(RepairingSet(()), c_one)
        assert not v and "missing repairing sequence for C_2" in v.reasons

    def test_edgeless_universal(self):
        v = validate_repairing_set(RepairingSet(()), uanf_from_graphs([C]))
        assert not v and v.reasons == [EDGELESS_REASON]

    def test_cyclic_constraint(self):
        v = validate_repairing_set(RepairingSet(()), ALL["c_mutual"])
        assert any("circular" in r for r in v.reasons)

    def test_foreign_rule(self):
        rs = one_set()
        v = validate_repairing_set(RepairingSet((), rs.sequences), c_one)
        assert not v and any("outside the set" in r for r in v.reasons)

    def test_set_of_sets(self):
        assert validate_for_set([one_set(), nodep_set()], [c_one, c_noDep])
        assert not validate_for_set([one_set()], [c_one, c_noDep])


class TestConstruction:
    def test_c_one_rules(self):
        got = {(len(r.L), len(r.R)) for r in constructed_rules(c_one)}
        # C ⇒ CFdisc, CFdisc ⇒ CF and C ⇒ CF
        assert got == {(1, 2), (2, 3), (1, 3)}
        lhs_rhs = [(r.L, r.R) for r in constructed_rules(c_one)]
        assert any(graph_isomorphic(l, C) and graph_isomorphic(r, CFDISC) for l, r in lhs_rhs)

    def test_c_no_dep(self):
        rs = construct_repairing_set(c_noDep)
        (seq,) = rs.sequences.values()
        assert graph_isomorphic(seq.result, FFDISC)
        assert validate_repairing_set(rs, c_noDep)

    @pytest.mark.parametrize("name", CONSTRUCTIBLE)
    def test_validates(self, name):
        c = ALL[name]
        assert validate_repairing_set(construct_repairing_set(c), c)

    def test_cyclic_refused(self):
        with pytest.raises(ValueError, match="circular"):
            construct_repairing_set(ALL["c_mutual"])

    def test_edgeless_refused(self):
        with pytest.raises(ValueError):
            construct_repairing_set(uanf_from_graphs([C]))

    def test_no_sequence_exists(self):
        # every feature needs a loop and a dependency on every other feature
        with pytest.raises(ValueError, match="no valid repairing sequence"):
            construct_repairing_set(ALL["c_alldep"])


class TestApplying:
    def test_concurrent_equals_stepwise(self):
        for name in CONSTRUCTIBLE:
            c = ALL[name]
            rs = construct_repairing_set(c)
            for host in random_hosts(25, seed=4):
                km = kmax(host, c)
                if km >= c.nlvl - 1:
                    continue
                seq = rs.sequence_for(km + 2)
                if seq is None:
                    continue
                for p in potentially_increasing_occurrences(host, c, km)[:2]:
                    assert graph_isomorphic(apply_sequence_at(seq, p).H, apply_sequence_stepwise(seq, p))

    def test_anchor_mismatch(self):
        seq = build_sequence(c_one, 2, [(addF, {0: 0}, {})])
        with pytest.raises(ValueError):
            apply_sequence_at(seq, Morphism.identity(CF))


class TestRepairOne:
    @pytest.mark.parametrize("host", [G0, G2, graph({0: "Class", 1: "Class", 2: "Feature"}, {0: (0, 2, "owns")})], ids=["G0", "G2", "half"])
    @pytest.mark.parametrize("seed", range(3))
    def test_c_one(self, host, seed):
        h, trace = repair_one(host, c_one, one_set(), seed)
        assert graph_satisfies(h, c_one)
        # one feature per bare class, and adding a feature never creates a class
        bare = [n for n, t in host.nodes.items() if t == "Class" and not _owns(host, n)]
        assert trace.applications == len(bare)

    def test_consistent_host_is_untouched(self):
        h, trace = repair_one(G1, c_one, one_set())
        assert h == G1 and len(trace) == 0

    def test_every_iteration_progresses(self):
        c = ALL["c_chain"]
        rs = construct_repairing_set(c)
        for host in random_hosts(30, seed=11):
            h, trace = repair_one(host, c, rs, 1)
            assert graph_satisfies(h, c)
            assert all(e["progress"] for e in trace.events if e["event"] == "iteration")

    def test_inner_loop(self):
        # two classes own the middle feature, so extending one chain creates a new violation
        c = ALL["c_chain"]
        host = graph(
            {0: "Class", 1: "Feature", 2: "Feature", 3: "Feature", 4: "Class"},
            {0: (0, 1, "owns"), 1: (1, 2, "dep"), 2: (2, 3, "dep"), 3: (4, 2, "owns")},
        )
        rs = construct_repairing_set(c)
        phases = set()
        for seed in range(5):
            h, trace = repair_one(host, c, rs, seed)
            assert graph_satisfies(h, c)
            phases |= {e["phase"] for e in trace.events if e["event"] == "apply"}
        assert phases == {"outer", "inner"}

    def test_deterministic(self):
        rs = one_set()
        a = repair_one(G2, c_one, rs, 42)
        b = repair_one(G2, c_one, rs, 42)
        assert a[0] == b[0] and a[1].to_jsonl() == b[1].to_jsonl()

    def test_iteration_cap(self):
        with pytest.raises(IterationCapExceeded):
            repair_one(G0, c_one, one_set(), max_iterations=0)

    def test_bound_grows_with_host(self):
        assert iteration_bound(G2, c_one) > iteration_bound(G0, c_one) > 0

    def test_refuses_cyclic(self):
        with pytest.raises(ValueError, match="circular"):
            repair_one(G0, ALL["c_mutual"], RepairingSet(()))

    def test_refuses_invalid_set(self):
        with pytest.raises(ValueError, match="invalid repairing set"):
            repair_one(G0, c_one, RepairingSet(()))

    def test_on_step_and_trace(self):
        seen = []
        trace = RepairTrace()
        h, out = repair_one(G2, c_one, one_set(), 0, on_step=seen.append, trace=trace)
        assert out is trace and seen[-1] == h
        assert len(seen) == trace.applications == 2


def _owns(g, c):
    return any(s == c and lab == "owns" for s, _, lab in g.edges.values())


class TestRepairSet:
    def test_good_set(self):
        cs = [c_one, c_noDep]
        for seed in range(5):
            h, trace = repair_set(G_DEP, cs, [one_set(), nodep_set()], seed)
            assert all(graph_satisfies(h, c) for c in cs)
            done = [e["constraint"] for e in trace.events if e["event"] == "constraint-done"]
            assert sorted(done) == ["c_noDep", "c_one"]

    def test_earlier_constraints_stay_satisfied(self):
        cs = [c_one, c_noDep]
        sets = [one_set(), nodep_set()]
        order = constraint_order(cs, sets)
        for seed in range(5):
            g = G_DEP
            done = []
            for i in order:

                def check(h, done=tuple(done)):
                    assert all(graph_satisfies(h, d) for d in done)

                g, _ = repair_one(g, cs[i], sets[i], seed, on_step=check)
                done.append(cs[i])
            h, _ = repair_set(G_DEP, cs, sets, seed)
            assert all(graph_satisfies(h, c) for c in cs)

    def test_cyclic_set(self):
        cs = [c_one, c_le1]
        sets = [one_set(), repairing_set_from_rules(c_le1, PLAIN)]
        with pytest.raises(CyclicError):
            repair_set(G0, cs, sets)

    def test_invalid_sets(self):
        with pytest.raises(ValueError):
            repair_set(G0, [c_one], [RepairingSet(())])
