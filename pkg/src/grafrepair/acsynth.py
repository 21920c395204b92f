"""Synthesis of maintaining, increasing and basic application conditions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .conditions import (
    FALSE,
    TRUE,
    Condition,
    Exists,
    Forall,
    Not,
    UANFConstraint,
    conj,
    disj,
    intermediate_targets,
    size,
)
from .consistency import Deleting, Inserting, NotBasic, _minus, creating_overlaps, deleting_overlaps
from .graph import Graph, Morphism
from .overlaps import Overlap, gluings
from .rewrite import PlainRule, Rule, apply, as_rule, satisfies_dangling_condition, shift_over_rule


def _check(c: UANFConstraint, k: int, hi: int) -> None:
    if k % 2 != 1 or not -1 <= k <= hi:
        raise ValueError(f"layer {k} must be odd and within [-1, {hi}]")


def _plain(rule: Rule | PlainRule) -> PlainRule:
    return rule.plain if isinstance(rule, Rule) else rule


def anchored_gluings(g: Graph, anchor: Morphism, e: Morphism) -> list[Overlap]:
    """Gluings of ``g`` and ``cod(e)`` identifying ``anchor(x)`` with ``e(x)``.

    This is the set of extended overlaps, except that the disjoint gluing is
    kept when the common domain is empty.
    """
    if anchor.dom.key != e.dom.key:
        raise ValueError("anchor and e must have the same domain")
    fn = {anchor.nodes[x]: e.nodes[x] for x in anchor.dom.nodes}
    fe = {anchor.edges[x]: e.edges[x] for x in anchor.dom.edges}
    out = list(gluings(g, e.cod, fn, fe))
    if not anchor.dom.is_empty():
        out = [o for o in out if o.is_proper()]
    return out


def _negated(overlaps: list[Overlap]) -> Condition:
    return conj(Not(Exists(o.left, TRUE)) for o in overlaps)


def no_violation_inserted(rho: Rule | PlainRule, c: UANFConstraint, k: int) -> Condition:
    """``wors_k``: forbid deleting the part of an intermediate graph above ``C_{k+2}``."""
    _check(c, k, c.nlvl - 1)
    if k >= c.nlvl - 2:
        return TRUE
    rho = _plain(rho)
    lo = c.graph(k + 2)
    parts = []
    for cp in intermediate_targets(c, k + 2):
        parts.extend(deleting_overlaps(rho, cp, _minus(cp, lo)))
    return _negated(parts)


def no_universally_inserted(rho: Rule | PlainRule, c: UANFConstraint, k: int) -> Condition:
    """``ins_k``: forbid creating an occurrence of a universal ``C_j``, ``j ≤ k + 2``."""
    if not -1 <= k:
        raise ValueError("layer must be at least -1")
    rho = _plain(rho)
    parts = []
    for j in range(1, min(k + 2, c.nlvl) + 1, 2):
        for o in creating_overlaps(rho, c.graph(j)):
            parts.append(shift_over_rule(Not(Exists(o.left, TRUE)), rho))
    return conj(parts)


def no_existentially_destroyed(rho: Rule | PlainRule, c: UANFConstraint, k: int) -> Condition:
    """``remain_k``: forbid deleting any element of an existential ``C_j``, ``j ≤ k + 1``."""
    _check(c, k, c.nlvl - 1)
    if k == -1:
        return TRUE
    rho = _plain(rho)
    parts = []
    for j in range(2, min(k + 1, c.nlvl) + 1, 2):
        parts.extend(deleting_overlaps(rho, c.graph(j)))
    return _negated(parts)


def main_condition(rho: Rule | PlainRule, c: UANFConstraint, k: int) -> Condition:
    """``Main_k = remain_k ∧ ins_k ∧ wors_k``."""
    return conj(
        no_existentially_destroyed(rho, c, k),
        no_universally_inserted(rho, c, k),
        no_violation_inserted(rho, c, k),
    )


def maintaining_ac_at_layer(rule: Rule | PlainRule, c: UANFConstraint, k: int) -> Rule:
    rule = as_rule(rule)
    return rule.with_ac(conj(rule.ac, main_condition(rule.plain, c, k)))


def _odd_layers(c: UANFConstraint) -> list[int]:
    return list(range(-1, c.nlvl, 2))


def global_main_condition(rho: Rule | PlainRule, c: UANFConstraint) -> Condition:
    """``⋀ wors_i ∧ ins_top ∧ remain_top`` over the odd layers, equal to ``⋀ Main_i``."""
    top = _odd_layers(c)[-1]
    return conj(
        conj(no_violation_inserted(rho, c, i) for i in _odd_layers(c)),
        no_universally_inserted(rho, c, c.nlvl - 1),
        no_existentially_destroyed(rho, c, top),
    )


def maintaining_ac(rule: Rule | PlainRule, c: UANFConstraint) -> Rule:
    rule = as_rule(rule)
    return rule.with_ac(conj(rule.ac, global_main_condition(rule.plain, c)))


def _top_overlaps(lhs: Graph, top: Graph) -> list[Overlap]:
    # With an empty C_{k+2} the disjoint gluing is the only overlap.
    return [o for o in gluings(lhs, top) if o.is_proper() or top.is_empty()]


def _check_cp(c: UANFConstraint, k: int, cp: Graph | None) -> Graph:
    top = c.graph(k + 2)
    if k == c.nlvl - 2:
        if cp is not None and cp.key != top.key:
            raise ValueError(f"at layer {k} the target graph must be C_{k + 2}")
        return top
    cands = intermediate_targets(c, k + 2)
    if cp is None:
        return cands[-1]
    for g in cands:
        if g.key == cp.key:
            return g
    raise ValueError(f"not an intermediate graph of C_{k + 2} and C_{k + 3}")


def violation_exists(rho: PlainRule, c: UANFConstraint, k: int, o: Overlap, cp: Graph) -> Condition:
    """``nex(P, C')``: the ``C_{k+2}`` part of ``P`` does not extend to ``C'``."""
    if k == c.nlvl - 2:
        return Exists(o.left, TRUE)
    top = c.graph(k + 2)
    qs = anchored_gluings(o.graph, o.right, Morphism.inclusion(top, cp))
    return Exists(o.left, _negated(qs))


def violation_removed(rho: PlainRule, c: UANFConstraint, k: int, o: Overlap, cp: Graph) -> Condition:
    """``rep(P, C')``: the rule destroys or completes the ``C_{k+2}`` part of ``P``."""
    top, below = c.graph(k + 2), c.graph(k + 1)
    deleted_n = {o.left.nodes[x] for x in rho.deleted_nodes}
    deleted_e = {o.left.edges[x] for x in rho.deleted_edges}
    fresh_n, fresh_e = _minus(top, below)
    if deleted_n & {o.right.nodes[x] for x in fresh_n} or deleted_e & {o.right.edges[x] for x in fresh_e}:
        return TRUE
    if k == c.nlvl - 2:
        return FALSE
    if not satisfies_dangling_condition(rho, o.left):
        return FALSE
    t = apply(rho, o.left)
    tracked = t.track @ o.right
    if not tracked.is_total:
        return FALSE
    n = t.comatch
    if not (set(n.nodes.values()) & set(tracked.nodes.values()) or set(n.edges.values()) & set(tracked.edges.values())):
        return FALSE
    qs = anchored_gluings(t.H, tracked, Morphism.inclusion(top, cp))
    body = disj(Exists(q.left, TRUE) for q in qs)
    return shift_over_rule(Forall(n, body), rho)


def _incr_disjunction(rho: PlainRule, c: UANFConstraint, k: int, cp: Graph) -> tuple[Condition, int]:
    ovs = _top_overlaps(rho.L, c.graph(k + 2))
    parts = [conj(violation_exists(rho, c, k, o, cp), violation_removed(rho, c, k, o, cp)) for o in ovs]
    return disj(parts), len(ovs)


def increasing_condition(rho: Rule | PlainRule, c: UANFConstraint, k: int, cp: Graph | None = None) -> Condition:
    """``Main_k ∧ ⋁_P (nex ∧ rep)`` without the rule's own condition."""
    _check(c, k, c.nlvl - 2)
    rho = _plain(rho)
    cp = _check_cp(c, k, cp)
    d, _ = _incr_disjunction(rho, c, k, cp)
    return conj(main_condition(rho, c, k), d)


def increasing_ac_at_layer(rule: Rule | PlainRule, c: UANFConstraint, k: int, cp: Graph | None = None) -> Rule:
    """The rule guarded by ``Incr_k^{C'}``.

    ``cp`` defaults to ``C_{k+3}`` (or ``C_{k+2}`` at layer ``nlvl - 2``).
    """
    rule = as_rule(rule)
    return rule.with_ac(conj(rule.ac, increasing_condition(rule.plain, c, k, cp)))


def union_increasing_ac(rule: Rule | PlainRule, c: UANFConstraint, k: int) -> Rule:
    """One guard covering every intermediate graph, with ``Main_k`` stated once."""
    rule = as_rule(rule)
    _check(c, k, c.nlvl - 2)
    rho = rule.plain
    cps = [c.graph(k + 2)] if k == c.nlvl - 2 else intermediate_targets(c, k + 2)
    d = disj(_incr_disjunction(rho, c, k, cp)[0] for cp in cps)
    return rule.with_ac(conj(rule.ac, main_condition(rho, c, k), d))


def basic_condition(classification, c: UANFConstraint, j: int, rho: Rule | PlainRule) -> Condition:
    """``apb_j`` for a basic increasing rule."""
    if isinstance(classification, NotBasic) or not isinstance(classification, (Deleting, Inserting)):
        raise ValueError("basic application conditions need a basic increasing rule")
    k = classification.k
    if j % 2 != 1 or not -1 <= j <= c.nlvl - 2:
        raise ValueError(f"layer {j} must be odd and within [-1, {c.nlvl - 2}]")
    if k == c.nlvl - 2:
        return TRUE
    if j != k:
        return FALSE
    top = c.graph(k + 2)
    target = c.graph(k + 3) if isinstance(classification, Deleting) else classification.cp
    qs = anchored_gluings(_plain(rho).L, classification.increasing_morphism, Morphism.inclusion(top, target))
    return _negated(qs)


def basic_ac(rule: Rule | PlainRule, classification, c: UANFConstraint, j: int) -> Rule:
    rule = as_rule(rule)
    return rule.with_ac(conj(rule.ac, basic_condition(classification, c, j, rule)))


@dataclass
class SynthesisReport:
    rule: str
    constraint: str
    kind: str
    layer: int | None
    condition: Condition
    intermediate: Graph | None = None
    stats: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "rule": self.rule,
            "constraint": self.constraint,
            "kind": self.kind,
            "layer": self.layer,
            "stats": dict(self.stats),
        }


def synthesize(kind: str, rule: Rule | PlainRule, c: UANFConstraint, k: int | None = None, cp: Graph | None = None) -> tuple[Rule, SynthesisReport]:
    """Build one of the guards by name: ``main``, ``main-global``, ``incr``, ``incr-union`` or ``basic``.

    Raises:
        ValueError: for an unknown kind, a missing layer, or a rule that is not
            basic increasing when ``basic`` is requested.
    """
    from .consistency import classify_basic_increasing

    rule = as_rule(rule)
    rho = rule.plain
    stats: dict = {}
    if kind != "main-global" and k is None:
        raise ValueError(f"{kind} needs a layer")
    if kind == "main":
        parts = {
            "remain": no_existentially_destroyed(rho, c, k),
            "ins": no_universally_inserted(rho, c, k),
            "wors": no_violation_inserted(rho, c, k),
        }
        out = maintaining_ac_at_layer(rule, c, k)
        stats = {f"{n}_size": size(p) for n, p in parts.items()}
    elif kind == "main-global":
        out = maintaining_ac(rule, c)
    elif kind == "incr":
        cp = _check_cp(c, k, cp)
        _, n = _incr_disjunction(rho, c, k, cp)
        stats["top_overlaps"] = n
        out = increasing_ac_at_layer(rule, c, k, cp)
    elif kind == "incr-union":
        out = union_increasing_ac(rule, c, k)
    elif kind == "basic":
        cls = classify_basic_increasing(rule, c, k)
        if isinstance(cls, NotBasic):
            raise ValueError(f"not a basic increasing rule: {cls.reason}")
        stats["classification"] = cls.kind
        out = basic_ac(rule, cls, c, k)
    else:
        raise ValueError(f"unknown condition kind {kind!r}")
    stats["size"] = size(out.ac)
    report = SynthesisReport(rule.name, c.name, kind, k, out.ac, cp, stats)
    return out, report


__all__ = [
    "anchored_gluings",
    "no_violation_inserted",
    "no_universally_inserted",
    "no_existentially_destroyed",
    "main_condition",
    "maintaining_ac_at_layer",
    "global_main_condition",
    "maintaining_ac",
    "violation_exists",
    "violation_removed",
    "increasing_condition",
    "increasing_ac_at_layer",
    "union_increasing_ac",
    "basic_condition",
    "basic_ac",
    "SynthesisReport",
    "synthesize",
]
