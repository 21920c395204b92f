"""JSON documents for type graphs, graphs, rules, constraints and rule sets.

Every document carries a ``kind`` and (except type graphs) its ``type_graph``.
Element ids are written as decimal strings in maps.  :func:`dumps` is
canonical: loading a file it wrote and writing it again gives the same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

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
    to_uanf,
)
from .graph import Graph, Morphism, TypeGraph
from .rewrite import PlainRule, Rule

KINDS = ("typegraph", "graph", "rule", "constraint", "rule-set", "constraint-set")


class ParseError(ValueError):
    """A malformed document; ``pointer`` is a JSON pointer to the offending value."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        self.message = message
        super().__init__(f"{self.pointer}: {message}")


def _ptr(base: str, *parts) -> str:
    out = base
    for p in parts:
        out += "/" + str(p).replace("~", "~0").replace("/", "~1")
    return out


def _need(doc: Any, key: str, typ, at: str):
    if not isinstance(doc, dict):
        raise ParseError(at, "expected an object")
    if key not in doc:
        raise ParseError(_ptr(at, key), "missing")
    val = doc[key]
    if not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
        names = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise ParseError(_ptr(at, key), f"expected {names}")
    return val


def _id(key: str, at: str) -> int:
    try:
        v = int(key)
    except (TypeError, ValueError):
        raise ParseError(at, f"id {key!r} is not an integer") from None
    if str(v) != key or v < 0:
        raise ParseError(at, f"id {key!r} is not a canonical non-negative integer")
    return v


# Type graphs and graphs.


def typegraph_to_json(tg: TypeGraph) -> dict:
    return {"node_types": sorted(tg.node_types), "edge_types": {k: list(v) for k, v in tg.edge_types.items()}}


def typegraph_from_json(doc: Any, at: str = "") -> TypeGraph:
    nts = _need(doc, "node_types", list, at)
    for i, n in enumerate(nts):
        if not isinstance(n, str):
            raise ParseError(_ptr(at, "node_types", i), "expected a string")
    ets = _need(doc, "edge_types", dict, at)
    edges = {}
    for name, ends in ets.items():
        if not (isinstance(ends, list) and len(ends) == 2 and all(isinstance(x, str) for x in ends)):
            raise ParseError(_ptr(at, "edge_types", name), "expected [source_type, target_type]")
        edges[name] = tuple(ends)
    tg = TypeGraph(nts, edges)
    probs = tg.problems()
    if probs:
        raise ParseError(_ptr(at, "edge_types"), probs[0])
    return tg


def graph_body(g: Graph) -> dict:
    return {
        "nodes": {str(n): t for n, t in sorted(g.nodes.items())},
        "edges": {str(e): [s, t, lab] for e, (s, t, lab) in sorted(g.edges.items())},
    }


def graph_from_body(doc: Any, tg: TypeGraph, at: str = "") -> Graph:
    raw_n = _need(doc, "nodes", dict, at)
    raw_e = _need(doc, "edges", dict, at)
    nodes = {}
    for k, t in raw_n.items():
        p = _ptr(at, "nodes", k)
        n = _id(k, p)
        if t not in tg.node_types:
            raise ParseError(p, f"unknown node type {t!r}")
        nodes[n] = t
    edges = {}
    for k, v in raw_e.items():
        p = _ptr(at, "edges", k)
        e = _id(k, p)
        if not (isinstance(v, list) and len(v) == 3):
            raise ParseError(p, "expected [source, target, type]")
        s, t, lab = v
        for i, end in ((0, s), (1, t)):
            if not isinstance(end, int) or isinstance(end, bool) or end not in nodes:
                raise ParseError(_ptr(p, i), f"edge end {end!r} is not a node of this graph")
        if lab not in tg.edge_types:
            raise ParseError(_ptr(p, 2), f"unknown edge type {lab!r}")
        st, tt = tg.edge_types[lab]
        if nodes[s] != st or nodes[t] != tt:
            raise ParseError(p, f"edge type {lab!r} needs {st} -> {tt}")
        edges[e] = (s, t, lab)
    return Graph(tg, nodes, edges)


def morphism_body(m: Morphism) -> dict:
    return {
        "nodes": {str(k): v for k, v in sorted(m.nodes.items())},
        "edges": {str(k): v for k, v in sorted(m.edges.items())},
    }


def morphism_from_body(doc: Any, dom: Graph, cod: Graph, at: str = "", total: bool = True) -> Morphism:
    """Read a map ``dom -> cod`` and check it is an injective typed morphism."""
    raw_n = _need(doc, "nodes", dict, at)
    raw_e = _need(doc, "edges", dict, at)
    nodes, edges = {}, {}
    for k, v in raw_n.items():
        p = _ptr(at, "nodes", k)
        x = _id(k, p)
        if x not in dom.nodes:
            raise ParseError(p, f"node {x} is not in the domain")
        if not isinstance(v, int) or isinstance(v, bool) or v not in cod.nodes:
            raise ParseError(p, f"image {v!r} is not a node of the codomain")
        if dom.nodes[x] != cod.nodes[v]:
            raise ParseError(p, "node types differ")
        nodes[x] = v
    for k, v in raw_e.items():
        p = _ptr(at, "edges", k)
        x = _id(k, p)
        if x not in dom.edges:
            raise ParseError(p, f"edge {x} is not in the domain")
        if not isinstance(v, int) or isinstance(v, bool) or v not in cod.edges:
            raise ParseError(p, f"image {v!r} is not an edge of the codomain")
        s, t, lab = dom.edges[x]
        if (nodes.get(s), nodes.get(t), lab) != cod.edges[v]:
            raise ParseError(p, "edge image does not agree with the node map")
        edges[x] = v
    if total:
        missing = [n for n in dom.nodes if n not in nodes]
        if missing:
            raise ParseError(_ptr(at, "nodes"), f"node {missing[0]} is not mapped")
        missing = [e for e in dom.edges if e not in edges]
        if missing:
            raise ParseError(_ptr(at, "edges"), f"edge {missing[0]} is not mapped")
    for field_, mp in (("nodes", nodes), ("edges", edges)):
        if len(set(mp.values())) != len(mp):
            raise ParseError(_ptr(at, field_), "map is not injective")
    return Morphism(dom, cod, nodes, edges)


# Conditions over a root graph.


def condition_to_json(c: Condition) -> dict:
    if isinstance(c, Const):
        return {"type": "true" if c.value else "false"}
    if isinstance(c, (Exists, Forall)):
        return {
            "type": "exists" if isinstance(c, Exists) else "forall",
            "to": graph_body(c.a.cod),
            "map": morphism_body(c.a),
            "sub": condition_to_json(c.sub),
        }
    if isinstance(c, Not):
        return {"type": "not", "sub": condition_to_json(c.sub)}
    if isinstance(c, (And, Or)):
        return {"type": "and" if isinstance(c, And) else "or", "parts": [condition_to_json(p) for p in c.parts]}
    raise TypeError(f"not a condition: {c!r}")


def condition_from_json(doc: Any, root: Graph, at: str = "") -> Condition:
    typ = _need(doc, "type", str, at)
    if typ == "true":
        return TRUE
    if typ == "false":
        return FALSE
    if typ in ("exists", "forall"):
        cod = graph_from_body(_need(doc, "to", dict, at), root.tg, _ptr(at, "to"))
        a = morphism_from_body(_need(doc, "map", dict, at), root, cod, _ptr(at, "map"))
        sub = condition_from_json(_need(doc, "sub", dict, at), cod, _ptr(at, "sub"))
        return (Exists if typ == "exists" else Forall)(a, sub)
    if typ == "not":
        return Not(condition_from_json(_need(doc, "sub", dict, at), root, _ptr(at, "sub")))
    if typ in ("and", "or"):
        parts = _need(doc, "parts", list, at)
        subs = tuple(condition_from_json(p, root, _ptr(at, "parts", i)) for i, p in enumerate(parts))
        return (And if typ == "and" else Or)(subs)
    raise ParseError(_ptr(at, "type"), f"unknown condition type {typ!r}")


# Rules.


def rule_body(rule: Rule | PlainRule) -> dict:
    plain = rule.plain if isinstance(rule, Rule) else rule
    out = {"name": rule.name, "lhs": graph_body(plain.L), "interface": graph_body(plain.K), "rhs": graph_body(plain.R)}
    if isinstance(rule, Rule) and rule.ac != TRUE:
        out["ac"] = condition_to_json(rule.ac)
    return out


def rule_from_body(doc: Any, tg: TypeGraph, at: str = "") -> Rule:
    name = doc.get("name", "") if isinstance(doc, dict) else ""
    if not isinstance(name, str):
        raise ParseError(_ptr(at, "name"), "expected a string")
    L = graph_from_body(_need(doc, "lhs", dict, at), tg, _ptr(at, "lhs"))
    K = graph_from_body(_need(doc, "interface", dict, at), tg, _ptr(at, "interface"))
    R = graph_from_body(_need(doc, "rhs", dict, at), tg, _ptr(at, "rhs"))
    if not K.is_subgraph_of(L):
        raise ParseError(_ptr(at, "interface"), "interface is not included in lhs (ids must agree)")
    if not K.is_subgraph_of(R):
        raise ParseError(_ptr(at, "interface"), "interface is not included in rhs (ids must agree)")
    plain = PlainRule(L, K, R, name)
    ac = TRUE
    if "ac" in doc:
        ac = condition_from_json(doc["ac"], L, _ptr(at, "ac"))
    return Rule(plain, ac, name)


# Constraints.


def constraint_body(c: UANFConstraint) -> dict:
    gs = c.graphs[1:]
    incl = [morphism_body(Morphism.inclusion(a, b)) for a, b in zip(gs, gs[1:])]
    return {
        "name": c.name,
        "graphs": [graph_body(g) for g in gs],
        "inclusions": incl,
        "terminal": c.terminal.value,
    }


def constraint_from_body(doc: Any, tg: TypeGraph, at: str = "") -> UANFConstraint:
    """Read a quantifier chain ``Q_1(C_1, Q_2(C_1 -> C_2, ...))`` and normalize it.

    Without ``quantifiers`` the chain alternates starting with ``forall``.
    A ``condition`` key holding any nested quantifier chain over the empty
    graph is accepted instead of ``graphs``.
    """
    name = doc.get("name", "") if isinstance(doc, dict) else ""
    if not isinstance(name, str):
        raise ParseError(_ptr(at, "name"), "expected a string")
    if "condition" in doc:
        cond = condition_from_json(doc["condition"], Graph(tg, {}, {}), _ptr(at, "condition"))
        try:
            c = to_uanf(cond, name)
        except ValueError as exc:
            raise ParseError(_ptr(at, "condition"), str(exc)) from None
        c.name = name
        return c
    raw = _need(doc, "graphs", list, at)
    if not raw:
        raise ParseError(_ptr(at, "graphs"), "a constraint needs at least one graph")
    graphs = [graph_from_body(g, tg, _ptr(at, "graphs", i)) for i, g in enumerate(raw)]
    incl = doc.get("inclusions", [])
    if not isinstance(incl, list):
        raise ParseError(_ptr(at, "inclusions"), "expected a list")
    if len(incl) != len(graphs) - 1:
        raise ParseError(_ptr(at, "inclusions"), f"expected {len(graphs) - 1} inclusion maps")
    terminal = _need(doc, "terminal", bool, at)
    quants = doc.get("quantifiers")
    if quants is None:
        quants = ["forall" if i % 2 == 0 else "exists" for i in range(len(graphs))]
    if not isinstance(quants, list) or len(quants) != len(graphs) or any(q not in ("forall", "exists") for q in quants):
        raise ParseError(_ptr(at, "quantifiers"), f"expected {len(graphs)} entries of 'forall' or 'exists'")
    anchors = [Morphism(graphs[0].empty(), graphs[0], {}, {})]
    for i, m in enumerate(incl):
        anchors.append(morphism_from_body(m, graphs[i], graphs[i + 1], _ptr(at, "inclusions", i)))
    cond: Condition = TRUE if terminal else FALSE
    for q, a in zip(reversed(quants), reversed(anchors)):
        cond = (Forall if q == "forall" else Exists)(a, cond)
    try:
        c = to_uanf(cond, name)
    except ValueError as exc:
        raise ParseError(at, str(exc)) from None
    c.name = name
    return c


# Documents.


def to_document(obj: Any, kind: str | None = None) -> dict:
    """Wrap an object in a self-describing document."""
    if isinstance(obj, TypeGraph):
        return {"kind": "typegraph", **typegraph_to_json(obj)}
    if isinstance(obj, Graph):
        return {"kind": "graph", "type_graph": typegraph_to_json(obj.tg), **graph_body(obj)}
    if isinstance(obj, (Rule, PlainRule)):
        return {"kind": "rule", "type_graph": typegraph_to_json(obj.L.tg), **rule_body(obj)}
    if isinstance(obj, UANFConstraint):
        return {"kind": "constraint", "type_graph": typegraph_to_json(obj.tg), **constraint_body(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def rule_set_document(rules, sequences: list[dict] | None = None) -> dict:
    """``sequences`` entries: ``{"constraint", "target", "steps": [{"rule", "nodes", "edges"}]}``."""
    rules = list(rules)
    if not rules:
        raise ValueError("an empty rule set has no type graph; add a rule")
    doc = {"kind": "rule-set", "type_graph": typegraph_to_json(rules[0].L.tg), "rules": [rule_body(r) for r in rules]}
    if sequences:
        doc["sequences"] = sequences
    return doc


def constraint_set_document(constraints, rules, sequences: list[dict] | None = None) -> dict:
    doc = rule_set_document(rules, sequences)
    doc["kind"] = "constraint-set"
    doc["constraints"] = [constraint_body(c) for c in constraints]
    return doc


@dataclass
class SequenceSpec:
    constraint: str
    target: int
    steps: list[tuple[str, dict[int, int], dict[int, int]]]

    def as_json(self) -> dict:
        return {
            "constraint": self.constraint,
            "target": self.target,
            "steps": [
                {"rule": r, "nodes": {str(k): v for k, v in sorted(n.items())}, "edges": {str(k): v for k, v in sorted(e.items())}}
                for r, n, e in self.steps
            ],
        }


@dataclass
class RuleSet:
    """Rules plus optionally registered repairing sequences (by constraint name)."""

    rules: list[Rule]
    sequences: list[SequenceSpec] = field(default_factory=list)

    def by_name(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def plain_rules(self) -> list[PlainRule]:
        return [r.plain for r in self.rules]


@dataclass
class ConstraintSet:
    constraints: list[UANFConstraint]
    rule_set: RuleSet


def _rule_set_from(doc: dict, tg: TypeGraph) -> RuleSet:
    raw = _need(doc, "rules", list, "")
    rules = [rule_from_body(r, tg, _ptr("", "rules", i)) for i, r in enumerate(raw)]
    names = [r.name for r in rules]
    for i, n in enumerate(names):
        if not n:
            raise ParseError(_ptr("", "rules", i, "name"), "rules in a set need a name")
        if names.index(n) != i:
            raise ParseError(_ptr("", "rules", i, "name"), f"duplicate rule name {n!r}")
    specs = []
    for i, s in enumerate(doc.get("sequences", [])):
        at = _ptr("", "sequences", i)
        cname = _need(s, "constraint", str, at)
        target = _need(s, "target", int, at)
        steps = []
        for j, st in enumerate(_need(s, "steps", list, at)):
            sat = _ptr(at, "steps", j)
            rname = _need(st, "rule", str, sat)
            if rname not in names:
                raise ParseError(_ptr(sat, "rule"), f"unknown rule {rname!r}")
            nmap = {_id(k, _ptr(sat, "nodes", k)): v for k, v in _need(st, "nodes", dict, sat).items()}
            emap = {_id(k, _ptr(sat, "edges", k)): v for k, v in _need(st, "edges", dict, sat).items()}
            steps.append((rname, nmap, emap))
        specs.append(SequenceSpec(cname, target, steps))
    return RuleSet(rules, specs)


def _rule_set_json(rs: RuleSet) -> dict:
    doc = {"rules": [rule_body(r) for r in rs.rules]}
    if rs.sequences:
        doc["sequences"] = [s.as_json() for s in rs.sequences]
    return doc


def from_document(doc: Any, kind: str | None = None):
    """Parse a document.  ``kind`` (if given) must match the document's own."""
    found = _need(doc, "kind", str, "")
    if found not in KINDS:
        raise ParseError("/kind", f"unknown kind {found!r}; expected one of {', '.join(KINDS)}")
    if kind is not None and kind != found:
        raise ParseError("/kind", f"expected a {kind} document, found {found}")
    if found == "typegraph":
        return typegraph_from_json(doc)
    tg = typegraph_from_json(_need(doc, "type_graph", dict, ""), "/type_graph")
    if found == "graph":
        return graph_from_body(doc, tg)
    if found == "rule":
        return rule_from_body(doc, tg)
    if found == "constraint":
        return constraint_from_body(doc, tg)
    rs = _rule_set_from(doc, tg)
    if found == "rule-set":
        return rs
    raw = _need(doc, "constraints", list, "")
    cs = [constraint_from_body(c, tg, _ptr("", "constraints", i)) for i, c in enumerate(raw)]
    return ConstraintSet(cs, rs)


def document_of(obj: Any) -> dict:
    if isinstance(obj, RuleSet):
        if not obj.rules:
            raise ValueError("an empty rule set has no type graph; add a rule")
        return {"kind": "rule-set", "type_graph": typegraph_to_json(obj.rules[0].L.tg), **_rule_set_json(obj)}
    if isinstance(obj, ConstraintSet):
        tg = obj.constraints[0].tg if obj.constraints else obj.rule_set.rules[0].L.tg
        return {
            "kind": "constraint-set",
            "type_graph": typegraph_to_json(tg),
            "constraints": [constraint_body(c) for c in obj.constraints],
            **_rule_set_json(obj.rule_set),
        }
    return to_document(obj)


def dumps(obj: Any) -> str:
    """Canonical JSON text for an object or an already built document."""
    doc = obj if isinstance(obj, dict) else document_of(obj)
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def loads(text: str, kind: str | None = None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("", f"invalid JSON: {exc}") from None
    return from_document(doc, kind)


def load(path: str | Path, kind: str | None = None):
    return loads(Path(path).read_text(encoding="utf-8"), kind)


def save(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def repairing_set_for(rs: RuleSet, c: UANFConstraint, max_steps: int = 3):
    """The registered sequences of ``rs`` for ``c`` (matched by name), or the
    sequences found by searching its rules when none are registered."""
    from .repair import RepairingSet, build_sequence, repairing_set_from_rules

    specs = [s for s in rs.sequences if s.constraint == c.name]
    plain = rs.plain_rules()
    if not specs:
        return repairing_set_from_rules(c, plain, max_steps)
    seqs = {}
    for s in specs:
        steps = [(rs.by_name(r).plain, n, e) for r, n, e in s.steps]
        seqs[s.target] = build_sequence(c, s.target, steps)
    return RepairingSet(tuple(plain), seqs)


def graph_to_dot(g: Graph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f'  n{n} [label="{n}:{t}"];' for n, t in sorted(g.nodes.items())]
    lines += [f'  n{s} -> n{t} [label="{lab}"];' for _, (s, t, lab) in sorted(g.edges.items())]
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class Workspace:
    """Named graphs, rules and constraints over one type graph."""

    type_graph: TypeGraph
    graphs: dict[str, Graph] = field(default_factory=dict)
    rules: dict[str, Rule] = field(default_factory=dict)
    constraints: dict[str, UANFConstraint] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    def _typed(self, tg: TypeGraph, name: str) -> None:
        if tg != self.type_graph:
            raise ValueError(f"{name} is typed over a different type graph")

    def add(self, name: str, obj: Any) -> None:
        if isinstance(obj, Graph):
            self._typed(obj.tg, name)
            self.graphs[name] = obj
        elif isinstance(obj, (Rule, PlainRule)):
            self._typed(obj.L.tg, name)
            self.rules[name] = obj if isinstance(obj, Rule) else Rule(obj, TRUE, obj.name or name)
        elif isinstance(obj, UANFConstraint):
            self._typed(obj.tg, name)
            self.constraints[name] = obj
        else:
            raise TypeError(f"cannot register {type(obj).__name__}")

    def load(self, path: str | Path, name: str | None = None):
        obj = load(path)
        if isinstance(obj, RuleSet):
            for r in obj.rules:
                self.add(r.name, r)
        elif isinstance(obj, ConstraintSet):
            for c in obj.constraints:
                self.add(c.name, c)
            for r in obj.rule_set.rules:
                self.add(r.name, r)
        elif not isinstance(obj, TypeGraph):
            self.add(name or getattr(obj, "name", "") or Path(path).stem, obj)
        return obj
