import random

import pytest

from battery import ALL, SMALL_HOSTS
from grafrepair.acsynth import (
    anchored_gluings,
    basic_ac,
    global_main_condition,
    increasing_ac_at_layer,
    increasing_condition,
    main_condition,
    maintaining_ac,
    maintaining_ac_at_layer,
    no_existentially_destroyed,
    no_universally_inserted,
    no_violation_inserted,
    synthesize,
    union_increasing_ac,
)
from grafrepair.conditions import FALSE, TRUE, And, kmax, satisfies, size
from grafrepair.consistency import NotBasic, classify_basic_increasing, is_direct_increasing, is_direct_maintaining
from grafrepair.fixtures import C, CF, CFDISC, EMPTY, G0, G1, RULES, addF, c_noDep, c_one, c_two, delDep, graph
from grafrepair.fuzz import hosts_containing
from grafrepair.graph import Morphism
from grafrepair.rewrite import Rule, apply, is_applicable, matches, transformations
from test_consistency import ALL_RULES

SOUND_CONSTRAINTS = ["c_one", "c_two", "c_noDep", "c_le1", "c_own", "c_loop", "c_chain", "cex", "c_disc"]


def guards(rule, c):
    """Every synthesized guard for ``rule`` with the notion it promises."""
    for k in range(-1, c.nlvl, 2):
        yield k, "main", maintaining_ac_at_layer(rule, c, k), is_direct_maintaining
        if k > c.nlvl - 2:
            continue
        yield k, "incr", increasing_ac_at_layer(rule, c, k), is_direct_increasing
        yield k, "incr-union", union_increasing_ac(rule, c, k), is_direct_increasing
        cls = classify_basic_increasing(rule, c, k)
        if not isinstance(cls, NotBasic):
            yield k, "basic", basic_ac(rule, cls, c, k), is_direct_increasing


def hosts_at(c, k, rule, fuzz, seed):
    for g in SMALL_HOSTS:
        if kmax(g, c) == k:
            yield g
    for g in hosts_containing(rule.L, random.Random(seed), fuzz, 2, 3):
        if kmax(g, c) == k:
            yield g


class TestComponents:
    def test_add_feature_keeps_everything(self):
        # addF deletes nothing, so remain and wors are trivial
        assert no_existentially_destroyed(addF, c_one, 1) == TRUE
        assert no_violation_inserted(addF, c_two, -1) == TRUE

    def test_add_class_inserts_universal(self):
        ins = no_universally_inserted(RULES["addClass"], c_one, -1)
        assert ins != TRUE
        (m,) = matches(RULES["addClass"], G0)
        assert not is_applicable(Rule(RULES["addClass"], ins), m)

    def test_remain_blocks_owns_deletion(self):
        remain = no_existentially_destroyed(RULES["delOwns"], c_one, 1)
        (m,) = matches(RULES["delOwns"], G1)
        assert not satisfies(m, remain)

    def test_wors_protects_intermediate(self):
        # c_two asks for two features; deleting an owns edge of a partial witness worsens it
        wors = no_violation_inserted(RULES["delOwns"], c_two, -1)
        assert wors != TRUE
        (m,) = matches(RULES["delOwns"], G1)
        assert not satisfies(m, wors)

    def test_top_layer_wors_is_true(self):
        assert no_violation_inserted(RULES["delOwns"], c_one, 1) == TRUE

    def test_layer_checks(self):
        with pytest.raises(ValueError):
            main_condition(addF, c_one, 0)
        with pytest.raises(ValueError):
            increasing_condition(addF, c_one, 1)

    def test_global_is_conjunction_of_layers(self):
        for name in ("c_one", "c_loop", "c_chain"):
            c = ALL[name]
            for rule in RULES.values():
                g = global_main_condition(rule, c)
                for host in SMALL_HOSTS[::4]:
                    for m in matches(rule, host):
                        each = all(satisfies(m, main_condition(rule, c, k)) for k in range(-1, c.nlvl, 2))
                        assert satisfies(m, g) == each


class TestAnchoredGluings:
    def test_empty_anchor_keeps_disjoint(self):
        a = Morphism.inclusion(EMPTY, C)
        e = Morphism.inclusion(EMPTY, CF)
        got = anchored_gluings(C, a, e)
        assert any(len(o.graph.nodes) == 3 for o in got)

    def test_anchored(self):
        got = anchored_gluings(CF, Morphism.inclusion(C, CF), Morphism.inclusion(C, CFDISC))
        assert got and all(o.left @ Morphism.inclusion(C, CF) == o.right @ Morphism.inclusion(C, CFDISC) for o in got)

    def test_domain_mismatch(self):
        with pytest.raises(ValueError):
            anchored_gluings(CF, Morphism.inclusion(C, CF), Morphism.inclusion(EMPTY, CF))


class TestIncreasing:
    def test_add_feature_at_g0(self):
        guarded = increasing_ac_at_layer(addF, c_one, -1)
        (m,) = matches(addF, G0)
        assert is_applicable(guarded, m)
        assert is_direct_increasing(apply(guarded, m), c_one)

    def test_add_feature_blocked_when_satisfied(self):
        guarded = increasing_ac_at_layer(addF, c_one, -1)
        host = graph({0: "Class", 1: "Feature"}, {0: (0, 1, "owns")})
        assert not any(is_applicable(guarded, m) for m in matches(addF, host))

    def test_delete_dep(self):
        guarded = increasing_ac_at_layer(delDep, c_noDep, -1)
        host = graph({0: "Feature", 1: "Feature"}, {0: (0, 1, "dep")})
        (m,) = matches(delDep, host)
        assert is_applicable(guarded, m)

    def test_wrong_intermediate(self):
        with pytest.raises(ValueError):
            increasing_ac_at_layer(addF, c_two, -1, cp=graph({0: "Feature"}))

    def test_basic_is_smaller(self):
        for c in (c_one, c_two, c_noDep):
            for rule in ALL_RULES.values():
                cls = classify_basic_increasing(rule, c, -1)
                if isinstance(cls, NotBasic):
                    continue
                apb = basic_ac(rule, cls, c, -1)
                incr = increasing_ac_at_layer(rule, c, -1, getattr(cls, "cp", None))
                assert size(apb.ac) <= size(incr.ac)


class TestSynthesize:
    def test_main_report(self):
        rule, report = synthesize("main", RULES["delOwns"], c_one, 1)
        assert set(report.stats) >= {"remain_size", "ins_size", "wors_size", "size"}
        assert report.as_dict()["kind"] == "main"
        assert rule.ac == maintaining_ac_at_layer(RULES["delOwns"], c_one, 1).ac

    def test_global(self):
        rule, _ = synthesize("main-global", addF, c_one)
        assert rule.ac == maintaining_ac(addF, c_one).ac

    def test_basic_refused(self):
        with pytest.raises(ValueError, match="not a basic"):
            synthesize("basic", RULES["addClass"], c_one, -1)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            synthesize("nope", addF, c_one, -1)

    def test_layer_required(self):
        with pytest.raises(ValueError):
            synthesize("incr", addF, c_one)

    def test_existing_condition_is_kept(self):
        base = Rule(addF, FALSE)
        rule, _ = synthesize("main", base, c_one, -1)
        assert rule.ac == FALSE or (isinstance(rule.ac, And) and FALSE in rule.ac.parts)


@pytest.mark.parametrize("cname", SOUND_CONSTRAINTS)
def test_guards_are_sound(cname):
    c = ALL[cname]
    checked = 0
    for rname, rule in sorted(ALL_RULES.items()):
        for k, kind, guarded, promise in guards(rule, c):
            for g in hosts_at(c, k, rule, 60, seed=len(rname) + k):
                for t in transformations(guarded, g):
                    checked += 1
                    assert promise(t, c), (rname, k, kind, g, t.match.nodes)
    assert checked > 0
