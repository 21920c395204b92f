"""Classifiers for the consistency notions of transformations and rules.

Transformation-level notions are decided exactly.  Rule-level notions quantify
over every host graph, so they are answered with a proof (by application
condition or by the static overlap characterization), with bounded-search
evidence, or with a concrete counterexample.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator

from .conditions import (
    FALSE,
    And,
    Condition,
    UANFConstraint,
    graph_satisfies,
    has_extension,
    intermediate_targets,
    kmax,
    next_graph_condition,
    satisfies,
    to_uanf,
    violation_vector,
)
from .graph import Graph, Morphism
from .matching import enumerate_monomorphisms
from .overlaps import enumerate_overlaps
from .rewrite import (
    PlainRule,
    Rule,
    Transformation,
    as_rule,
    satisfies_dangling_condition,
    transformations,
)

NOTIONS = (
    "preserving",
    "guaranteeing",
    "sustaining",
    "improving",
    "direct_sustaining",
    "direct_improving",
    "maintaining",
    "increasing",
    "direct_maintaining",
    "direct_increasing",
)


@dataclass(frozen=True)
class ConsistencyVerdict:
    preserving: bool
    guaranteeing: bool
    sustaining: bool
    improving: bool
    direct_sustaining: bool
    direct_improving: bool
    maintaining: bool
    increasing: bool
    direct_maintaining: bool
    direct_increasing: bool

    def as_dict(self) -> dict[str, bool]:
        return {n: getattr(self, n) for n in NOTIONS}


def _key(p: Morphism) -> tuple:
    return tuple(sorted(p.nodes.items())), tuple(sorted(p.edges.items()))


def _uanf(c) -> UANFConstraint:
    return c if isinstance(c, UANFConstraint) else to_uanf(c)


# Preserving and guaranteeing work for any constraint.


def is_preserving(t: Transformation, c) -> bool:
    return not graph_satisfies(t.G, c) or graph_satisfies(t.H, c)


def is_guaranteeing(t: Transformation, c) -> bool:
    return graph_satisfies(t.H, c)


def _first_level(c: UANFConstraint) -> tuple[Graph, Condition]:
    return c.graph(1), c.chain(1, c.nlvl, c.terminal)


def _first_violations(g: Graph, c: UANFConstraint) -> int:
    c1, d = _first_level(c)
    return sum(1 for p in enumerate_monomorphisms(c1, g) if not satisfies(p, d))


def _is_existential(c: UANFConstraint) -> bool:
    # A UANF chain with empty C_1 came from an existentially bound constraint.
    return c.graph(1).is_empty()


def is_sustaining(t: Transformation, c) -> bool:
    c = _uanf(c)
    if _is_existential(c):
        return is_preserving(t, c)
    return _first_violations(t.G, c) >= _first_violations(t.H, c)


def is_improving(t: Transformation, c) -> bool:
    c = _uanf(c)
    if _is_existential(c):
        return is_guaranteeing(t, c)
    return _first_violations(t.G, c) > _first_violations(t.H, c)


def _tracked(t: Transformation, pattern: Graph) -> set[tuple]:
    out = set()
    for p in enumerate_monomorphisms(pattern, t.G):
        q = t.track @ p
        if q.is_total:
            out.add(_key(q))
    return out


def is_direct_sustaining(t: Transformation, c) -> bool:
    c = _uanf(c)
    if _is_existential(c):
        return is_preserving(t, c)
    c1, d = _first_level(c)
    for p in enumerate_monomorphisms(c1, t.G):
        q = t.track @ p
        if q.is_total and satisfies(p, d) and not satisfies(q, d):
            return False
    old = _tracked(t, c1)
    for p in enumerate_monomorphisms(c1, t.H):
        if _key(p) not in old and not satisfies(p, d):
            return False
    return True


def is_direct_improving(t: Transformation, c) -> bool:
    c = _uanf(c)
    if _is_existential(c):
        return is_guaranteeing(t, c)
    if not is_direct_sustaining(t, c):
        return False
    c1, d = _first_level(c)
    for p in enumerate_monomorphisms(c1, t.G):
        if satisfies(p, d):
            continue
        q = t.track @ p
        if not q.is_total or satisfies(q, d):
            return True
    return False


# Layered notions.


def is_maintaining(t: Transformation, c: UANFConstraint) -> bool:
    """``nv_j(H) ≤ nv_j(G)`` for every layer ``j``."""
    vg, vh = violation_vector(t.G, c), violation_vector(t.H, c)
    return all(h <= g for g, h in zip(vg, vh))


def is_increasing(t: Transformation, c: UANFConstraint) -> bool:
    """Maintaining, with a strict drop at the first unsatisfied layer of ``G``."""
    if graph_satisfies(t.G, c):
        return False
    if not is_maintaining(t, c):
        return False
    km = kmax(t.G, c)
    vg, vh = violation_vector(t.G, c), violation_vector(t.H, c)
    j = km + 1 + 1  # vectors start at layer -1
    return vh[j] < vg[j]


def _ig_morphisms(c: UANFConstraint, j: int) -> list[Morphism]:
    return [Morphism.inclusion(c.graph(j), cp) for cp in intermediate_targets(c, j)]


def direct_maintaining_report(t: Transformation, c: UANFConstraint) -> dict[str, bool]:
    """The four formulas of direct maintaining, evaluated separately.

    Requires ``G ⊭ c``.  Universal graphs ``C_i`` are checked for odd
    ``i ≤ kmax`` and existential graphs for even ``2 ≤ i ≤ kmax + 1``.
    """
    g, h = t.G, t.H
    km = kmax(g, c)
    top_i = km + 2
    top = c.graph(top_i)
    e = next_graph_condition(c, km)
    occ = enumerate_monomorphisms(top, g)

    no_del = True
    if e != FALSE:
        arr = _ig_morphisms(c, top_i)
        for p in occ:
            q = t.track @ p
            if not q.is_total:
                continue
            for a in arr:
                if has_extension(a, p) and not has_extension(a, q):
                    no_del = False
                    break
            if not no_del:
                break

    d = FALSE if e == FALSE else e
    old = {_key(q) for q in (t.track @ p for p in occ) if q.is_total}
    no_ins = all(_key(p) in old or satisfies(p, d) for p in enumerate_monomorphisms(top, h))

    no_univ = True
    for i in range(1, km + 1, 2):
        tracked = _tracked(t, c.graph(i))
        if any(_key(p) not in tracked for p in enumerate_monomorphisms(c.graph(i), h)):
            no_univ = False
            break

    no_exist = True
    for i in range(2, km + 2, 2):
        if any(not (t.track @ p).is_total for p in enumerate_monomorphisms(c.graph(i), g)):
            no_exist = False
            break
    return {
        "no_new_violation_by_deletion": no_del,
        "no_new_violation_by_insertion": no_ins,
        "no_universal_insertion": no_univ,
        "no_existential_deletion": no_exist,
    }


def is_direct_maintaining(t: Transformation, c: UANFConstraint) -> bool:
    if graph_satisfies(t.G, c):
        return graph_satisfies(t.H, c)
    return all(direct_maintaining_report(t, c).values())


def is_direct_increasing(t: Transformation, c: UANFConstraint) -> bool:
    """Raises:
    ValueError: if ``G ⊨ c``; no transformation increases consistency then.
    """
    if graph_satisfies(t.G, c):
        raise ValueError("the source graph satisfies the constraint")
    if not is_direct_maintaining(t, c):
        return False
    km = kmax(t.G, c)
    top = c.graph(km + 2)
    occ = enumerate_monomorphisms(top, t.G)
    if c.terminal == FALSE and km == c.nlvl - 2:
        return any(not (t.track @ p).is_total for p in occ)
    arr = _ig_morphisms(c, km + 2)
    for p in occ:
        q = t.track @ p
        for a in arr:
            if not has_extension(a, p) and (not q.is_total or has_extension(a, q)):
                return True
    return False


def classify_transformation(t: Transformation, c: UANFConstraint) -> ConsistencyVerdict:
    dm = is_direct_maintaining(t, c)
    di = False if graph_satisfies(t.G, c) else (dm and is_direct_increasing(t, c))
    return ConsistencyVerdict(
        preserving=is_preserving(t, c),
        guaranteeing=is_guaranteeing(t, c),
        sustaining=is_sustaining(t, c),
        improving=is_improving(t, c),
        direct_sustaining=is_direct_sustaining(t, c),
        direct_improving=is_direct_improving(t, c),
        maintaining=is_maintaining(t, c),
        increasing=is_increasing(t, c),
        direct_maintaining=dm,
        direct_increasing=di,
    )


# Static characterization of basic rules.


def _check_layer(c: UANFConstraint, k: int, hi: int) -> None:
    if k % 2 != 1 or not -1 <= k <= hi:
        raise ValueError(f"layer {k} must be odd and within [-1, {hi}]")


def _hits(o, left_elems: tuple[list[int], list[int]], right_elems: tuple[list[int], list[int]]) -> bool:
    ln = {o.left.nodes[x] for x in left_elems[0]}
    le = {o.left.edges[x] for x in left_elems[1]}
    rn = {o.right.nodes[x] for x in right_elems[0]}
    re = {o.right.edges[x] for x in right_elems[1]}
    return bool(ln & rn or le & re)


def _all(g: Graph) -> tuple[list[int], list[int]]:
    return list(g.nodes), list(g.edges)


def _minus(g: Graph, sub: Graph) -> tuple[list[int], list[int]]:
    return [n for n in g.nodes if n not in sub.nodes], [e for e in g.edges if e not in sub.edges]


def deleting_overlaps(rho: PlainRule, cj: Graph, part: tuple[list[int], list[int]] | None = None):
    """Overlaps of ``L`` and ``cj`` where deleted elements meet ``part`` (default all of ``cj``)."""
    part = _all(cj) if part is None else part
    deleted = (rho.deleted_nodes, rho.deleted_edges)
    return [o for o in enumerate_overlaps(rho.L, cj) if _hits(o, deleted, part)]


def creating_overlaps(rho: PlainRule, cj: Graph):
    """Overlaps of ``R`` and ``cj`` where created elements meet ``cj``."""
    created = (rho.created_nodes, rho.created_edges)
    return [o for o in enumerate_overlaps(rho.R, cj) if _hits(o, created, _all(cj))]


def basic_maintaining_report(rho: PlainRule | Rule, c: UANFConstraint, k: int) -> dict[str, bool]:
    """The three overlap clauses of the static characterization at odd layer ``k``.

    Clause one uses the whole existential graph ``C_j`` rather than only
    ``C_j ∖ C_{j-1}``: deleting an element of ``C_{j-1}`` can destroy a
    ``C_j`` occurrence as well.
    """
    rho = rho.plain if isinstance(rho, Rule) else rho
    _check_layer(c, k, c.nlvl - 1)
    exist_ok = True
    for j in range(2, min(k + 1, c.nlvl) + 1, 2):
        for o in deleting_overlaps(rho, c.graph(j)):
            if satisfies_dangling_condition(rho, o.left):
                exist_ok = False
                break
        if not exist_ok:
            break
    inv = rho.invert()
    univ_ok = True
    for j in range(1, min(k + 2, c.nlvl) + 1, 2):
        for o in creating_overlaps(rho, c.graph(j)):
            if satisfies_dangling_condition(inv, o.left):
                univ_ok = False
                break
        if not univ_ok:
            break
    next_ok = True
    if k < c.nlvl - 2:
        hi, lo = c.graph(k + 3), c.graph(k + 2)
        next_ok = not deleting_overlaps(rho, hi, _minus(hi, lo))
    return {"existential_not_destroyed": exist_ok, "universal_not_created": univ_ok, "next_graph_not_reduced": next_ok}


def is_basic_maintaining_at_layer(rho: PlainRule | Rule, c: UANFConstraint, k: int) -> bool:
    return all(basic_maintaining_report(rho, c, k).values())


@dataclass(frozen=True)
class NotBasic:
    reason: str = ""

    kind = "not-basic"


@dataclass(frozen=True)
class Deleting:
    k: int
    increasing_morphism: Morphism

    kind = "deleting"


@dataclass(frozen=True)
class Inserting:
    k: int
    increasing_morphism: Morphism
    cp: Graph

    kind = "inserting"


BasicClassification = NotBasic | Deleting | Inserting


def classify_basic_increasing(rule: Rule | PlainRule, c: UANFConstraint, k: int) -> BasicClassification:
    """Decide whether ``rule`` is a basic increasing rule at layer ``k``.

    Deleting classifications are preferred over inserting ones.  Among
    intermediate graphs the largest completed one is reported.
    """
    rule = as_rule(rule)
    _check_layer(c, k, c.nlvl - 2)
    if not is_basic_maintaining_at_layer(rule.plain, c, k):
        return NotBasic("the rule is not basic consistency-maintaining at this layer")
    plain = rule.plain
    top = c.graph(k + 2)
    occ = enumerate_monomorphisms(top, plain.L)
    if not occ:
        return NotBasic(f"the left-hand side contains no occurrence of C_{k + 2}")
    for p in occ:
        if not all(x in plain.K.nodes for x in p.nodes.values()) or not all(
            x in plain.K.edges for x in p.edges.values()
        ):
            return Deleting(k, p)
    if k < c.nlvl - 2:
        for p in occ:
            q = Morphism(top, plain.R, p.nodes, p.edges)
            for cp in reversed(intermediate_targets(c, k + 2)):
                a = Morphism.inclusion(top, cp)
                if not has_extension(a, p) and has_extension(a, q):
                    return Inserting(k, p, cp)
    return NotBasic("no occurrence of the next graph is deleted or completed")


# Rule-level verdicts.


@dataclass
class RuleVerdict:
    kind: str  # "proved", "fuzz-pass" or "counterexample"
    reason: str = ""
    checked: int = 0
    transformation: Transformation | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        out = {"verdict": self.kind, "reason": self.reason, "checked": self.checked}
        if self.transformation is not None:
            t = self.transformation
            out["counterexample"] = {"host_nodes": t.G.nodes, "match_nodes": t.match.nodes}
        return out


def _is_conjunct(part: Condition, ac: Condition) -> bool:
    parts = set(ac.parts) if isinstance(ac, And) else {ac}
    need = set(part.parts) if isinstance(part, And) else {part}
    return need <= parts


def candidate_hosts(rule: Rule, c: UANFConstraint, k: int, search_bound: int, fuzz_cases: int, seed: int) -> Iterator[Graph]:
    """Hosts with ``kmax = k``: every small graph, then random extensions of ``L``."""
    from .fuzz import all_graphs, hosts_containing

    for g in all_graphs(c.tg, search_bound, search_bound):
        if kmax(g, c) == k:
            yield g
    rng = random.Random(seed)
    for g in hosts_containing(rule.L, rng, fuzz_cases):
        if kmax(g, c) == k:
            yield g


def is_rule_maintaining_at_layer(
    rule: Rule | PlainRule,
    c: UANFConstraint,
    k: int,
    search_bound: int = 3,
    fuzz_cases: int = 200,
    seed: int = 0,
    direct: bool = False,
) -> RuleVerdict:
    """Whether every transformation from a host with ``kmax = k`` is (direct) maintaining."""
    rule = as_rule(rule)
    if not -1 <= k < c.nlvl:
        raise ValueError(f"layer {k} out of range [-1, {c.nlvl})")
    if rule.ac == FALSE:
        return RuleVerdict("proved", "the application condition is false")
    if k % 2 == 1:
        if is_basic_maintaining_at_layer(rule.plain, c, k):
            return RuleVerdict("proved", "the plain rule is basic consistency-maintaining at this layer")
        from .acsynth import main_condition

        m = main_condition(rule.plain, c, k)
        if m == FALSE:
            pass
        elif _is_conjunct(m, rule.ac) or m == rule.ac:
            return RuleVerdict("proved", "the application condition contains the maintaining condition")
    check = is_direct_maintaining if direct else is_maintaining
    n = 0
    for g in candidate_hosts(rule, c, k, search_bound, fuzz_cases, seed):
        for t in transformations(rule, g):
            n += 1
            if not check(t, c):
                return RuleVerdict("counterexample", "a transformation breaks the notion", n, t)
    return RuleVerdict("fuzz-pass", "no counterexample among the searched hosts", n)


__all__ = [
    "NOTIONS",
    "ConsistencyVerdict",
    "classify_transformation",
    "is_preserving",
    "is_guaranteeing",
    "is_sustaining",
    "is_improving",
    "is_direct_sustaining",
    "is_direct_improving",
    "is_maintaining",
    "is_increasing",
    "is_direct_maintaining",
    "is_direct_increasing",
    "direct_maintaining_report",
    "basic_maintaining_report",
    "is_basic_maintaining_at_layer",
    "deleting_overlaps",
    "creating_overlaps",
    "NotBasic",
    "Deleting",
    "Inserting",
    "BasicClassification",
    "classify_basic_increasing",
    "RuleVerdict",
    "is_rule_maintaining_at_layer",
]
