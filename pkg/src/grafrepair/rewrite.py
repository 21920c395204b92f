"""Double-pushout rules and transformations.

Rules are spans ``L ⊇ K ⊆ R`` of identity inclusions.  Applying a rule at an
injective match keeps the ids of preserved host elements and gives created
elements fresh ids above the host's largest id, so the track morphism of a
transformation is the identity on the ids of the context graph ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .conditions import (
    FALSE,
    TRUE,
    And,
    Condition,
    Const,
    Exists,
    Forall,
    Not,
    Or,
    UANFConstraint,
    conj,
    disj,
    neg,
    satisfies,
    shift_over_morphism,
)
from .graph import Graph, Morphism
from .matching import enumerate_monomorphisms
from .overlaps import enumerate_overlaps, intermediate_graphs


class NotApplicable(ValueError):
    """Raised when a rule cannot be applied at the given match."""


class PlainRule:
    """A plain rule ``L ⊇ K ⊆ R``."""

    def __init__(self, L: Graph, K: Graph, R: Graph, name: str = ""):
        if not K.is_subgraph_of(L):
            raise ValueError("K is not included in L")
        if not K.is_subgraph_of(R):
            raise ValueError("K is not included in R")
        self.L, self.K, self.R = L, K, R
        self.name = name

    @classmethod
    def identity(cls, g: Graph, name: str = "") -> PlainRule:
        return cls(g, g, g, name)

    @property
    def l(self) -> Morphism:
        return Morphism.inclusion(self.K, self.L)

    @property
    def r(self) -> Morphism:
        return Morphism.inclusion(self.K, self.R)

    @property
    def deleted_nodes(self) -> list[int]:
        return [n for n in self.L.nodes if n not in self.K.nodes]

    @property
    def deleted_edges(self) -> list[int]:
        return [e for e in self.L.edges if e not in self.K.edges]

    @property
    def created_nodes(self) -> list[int]:
        return [n for n in self.R.nodes if n not in self.K.nodes]

    @property
    def created_edges(self) -> list[int]:
        return [e for e in self.R.edges if e not in self.K.edges]

    def deletes(self) -> bool:
        return len(self.K) < len(self.L)

    def creates(self) -> bool:
        return len(self.K) < len(self.R)

    def invert(self) -> PlainRule:
        return PlainRule(self.R, self.K, self.L, f"{self.name}^-1" if self.name else "")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlainRule) and (self.L, self.K, self.R) == (other.L, other.K, other.R)

    def __hash__(self) -> int:
        return hash((self.L, self.K, self.R))

    def __repr__(self) -> str:
        label = self.name or "rule"
        return f"<PlainRule {label}: -{len(self.L) - len(self.K)} +{len(self.R) - len(self.K)}>"


class Rule:
    """A plain rule with a left application condition ``ac`` over ``L``."""

    def __init__(self, plain: PlainRule, ac: Condition = TRUE, name: str = ""):
        self.plain = plain
        self.ac = ac
        self.name = name or plain.name

    @property
    def L(self) -> Graph:
        return self.plain.L

    @property
    def K(self) -> Graph:
        return self.plain.K

    @property
    def R(self) -> Graph:
        return self.plain.R

    def with_ac(self, ac: Condition) -> Rule:
        return Rule(self.plain, ac, self.name)

    def __repr__(self) -> str:
        return f"<Rule {self.name or 'rule'} ac={self.ac!r}>"


def as_rule(rule: Rule | PlainRule) -> Rule:
    return rule if isinstance(rule, Rule) else Rule(rule)


def _plain(rule: Rule | PlainRule) -> PlainRule:
    return rule.plain if isinstance(rule, Rule) else rule


def satisfies_dangling_condition(rule: Rule | PlainRule, m: Morphism) -> bool:
    """No deleted node may keep an edge that the rule does not delete."""
    plain = _plain(rule)
    g = m.cod
    matched = set(m.edges.values())
    for v in plain.deleted_nodes:
        for e in g.index.incident.get(m.nodes[v], ()):
            if e not in matched:
                return False
            # A matched edge at a deleted node is itself deleted, since K is a graph.
    return True


def _check_match(rule: Rule | PlainRule, m: Morphism) -> None:
    if m.dom.key != _plain(rule).L.key:
        raise ValueError("match domain is not the rule's left-hand side")
    if not (m.is_total and m.is_injective):
        raise ValueError("matches must be total and injective")


def is_applicable(rule: Rule | PlainRule, m: Morphism) -> bool:
    """True iff the match satisfies the rule's condition and the dangling-edge condition."""
    _check_match(rule, m)
    if isinstance(rule, Rule) and not satisfies(m, rule.ac):
        return False
    return satisfies_dangling_condition(rule, m)


@dataclass(frozen=True, eq=False)
class Transformation:
    """A direct transformation ``G ⇒ H`` with its context ``D``, comatch and track."""

    rule: Rule
    match: Morphism
    G: Graph
    D: Graph
    H: Graph
    comatch: Morphism
    track: Morphism

    @property
    def g(self) -> Morphism:
        return Morphism.inclusion(self.D, self.G)

    @property
    def h(self) -> Morphism:
        return Morphism.inclusion(self.D, self.H)

    def __repr__(self) -> str:
        return f"<Transformation {self.rule.name or 'rule'} at {self.match.nodes}>"


def apply(rule: Rule | PlainRule, m: Morphism, check_ac: bool = True) -> Transformation:
    """Apply ``rule`` at the match ``m``.

    Raises:
        NotApplicable: if the condition or the dangling-edge condition fails.
    """
    rule = as_rule(rule)
    _check_match(rule, m)
    if check_ac and not satisfies(m, rule.ac):
        raise NotApplicable("the match does not satisfy the application condition")
    if not satisfies_dangling_condition(rule, m):
        raise NotApplicable("the dangling-edge condition fails")
    plain = rule.plain
    g = m.cod
    d = g.remove((m.nodes[v] for v in plain.deleted_nodes), (m.edges[e] for e in plain.deleted_edges))
    cn = {v: m.nodes[v] for v in plain.K.nodes}
    ce = {e: m.edges[e] for e in plain.K.edges}
    nodes = dict(d.nodes)
    nxt = g.next_node_id()
    for v in plain.created_nodes:
        cn[v] = nxt
        nodes[nxt] = plain.R.nodes[v]
        nxt += 1
    edges = dict(d.edges)
    nxt = g.next_edge_id()
    for e in plain.created_edges:
        s, t, lab = plain.R.edges[e]
        ce[e] = nxt
        edges[nxt] = (cn[s], cn[t], lab)
        nxt += 1
    h = Graph(g.tg, nodes, edges)
    comatch = Morphism(plain.R, h, cn, ce)
    track = Morphism(g, h, {n: n for n in d.nodes}, {e: e for e in d.edges})
    return Transformation(rule, m, g, d, h, comatch, track)


def matches(rule: Rule | PlainRule, g: Graph) -> list[Morphism]:
    """All matches of ``rule`` in ``g`` at which it is applicable, in canonical order."""
    rule = as_rule(rule)
    return [m for m in enumerate_monomorphisms(rule.L, g) if is_applicable(rule, m)]


def transformations(rule: Rule | PlainRule, g: Graph) -> list[Transformation]:
    return [apply(rule, m, check_ac=False) for m in matches(rule, g)]


def track_compose(t: Transformation, p: Morphism) -> tuple[Morphism, bool]:
    """``track_t ∘ p`` and whether it is total."""
    if p.cod.key != t.G.key:
        raise ValueError("p must map into the transformation's source graph")
    q = t.track @ p
    return q, q.is_total


def invert(rule: PlainRule) -> PlainRule:
    return rule.invert()


def identity_transformation(g: Graph) -> Transformation:
    return apply(PlainRule.identity(g, "id"), Morphism.identity(g))


def shift_over_rule(ap: Condition, rho: PlainRule) -> Condition:
    """Translate a condition over ``R`` into one over ``L`` so that
    ``m ⊨ shift(ap, ρ) ⇔ n ⊨ ap`` for every transformation with match ``m`` and
    comatch ``n``."""
    if isinstance(ap, Const):
        return ap
    if isinstance(ap, (Exists, Forall)):
        a0 = ap.a
        if a0.dom.key != rho.R.key:
            raise ValueError("shift over rule: condition is not rooted at R")
        inv = rho.invert()
        if not satisfies_dangling_condition(inv, a0):
            return FALSE if isinstance(ap, Exists) else TRUE
        t = apply(inv, a0, check_ac=False)
        rho2 = PlainRule(t.H, t.D, t.G)
        return type(ap)(t.comatch, shift_over_rule(ap.sub, rho2))
    if isinstance(ap, Not):
        return neg(shift_over_rule(ap.sub, rho))
    if isinstance(ap, And):
        return conj(shift_over_rule(d, rho) for d in ap.parts)
    if isinstance(ap, Or):
        return disj(shift_over_rule(d, rho) for d in ap.parts)
    raise TypeError(f"not a condition: {ap!r}")


def concurrent_rule(seq: Sequence[Transformation]) -> PlainRule:
    """The rule ``G_1 ⊇ K ⊆ G_n`` of a chained sequence, ``K`` being what survives every step.

    Raises:
        ValueError: if the sequence is empty or not chained.
    """
    if not seq:
        raise ValueError("empty transformation sequence")
    for a, b in zip(seq, seq[1:]):
        if a.H != b.G:
            raise ValueError("transformation sequence is not chained")
    g1 = seq[0].G
    keep_n = [n for n in g1.nodes if all(n in t.D.nodes for t in seq)]
    keep_e = [e for e in g1.edges if all(e in t.D.edges for t in seq)]
    return PlainRule(g1, g1.subgraph(keep_n, keep_e), seq[-1].H)


def sequence_track(seq: Sequence[Transformation]) -> Morphism:
    """The composite track ``G_1 ⇢ G_n`` of a chained sequence."""
    tr = Morphism.identity(seq[0].G)
    for t in seq:
        tr = t.track @ tr
    return tr


def derived_rules(rule: Rule | PlainRule, c: UANFConstraint, k: int) -> list[Rule]:
    """Context extensions of ``rule`` whose left-hand sides overlap ``C_{k+2}``
    (or its intermediate graphs towards ``C_{k+3}``)."""
    rule = as_rule(rule)
    if k % 2 != 1 or not -1 <= k <= c.nlvl - 2:
        raise ValueError(f"layer {k} must be odd and within [-1, {c.nlvl - 2}]")
    if k == c.nlvl - 2:
        targets = [c.graph(k + 2)]
    else:
        targets = intermediate_graphs(c.graph(k + 2), c.graph(k + 3))
    out = []
    for p in targets:
        for o in enumerate_overlaps(rule.L, p):
            if not satisfies_dangling_condition(rule.plain, o.left):
                continue
            t = apply(rule.plain, o.left)
            plain = PlainRule(t.G, t.D, t.H, f"{rule.name}'" if rule.name else "")
            out.append(Rule(plain, shift_over_morphism(rule.ac, o.left), plain.name))
    return out
