"""Typed graphs, morphisms and validation.

Node and edge identities are opaque integers.  Subgraph relations are
identity-based: ``A`` is a subgraph of ``B`` when every node and edge id of
``A`` occurs in ``B`` with the same label and endpoints.  Inclusions are
therefore identity maps on ids.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Any, Iterable, Mapping


class TypeGraph:
    """The fixed type graph every typed graph refers to.

    Args:
        node_types: Names of the node types.
        edge_types: Mapping from edge type name to ``(source_type, target_type)``.
    """

    __slots__ = ("node_types", "edge_types", "_key")

    def __init__(self, node_types: Iterable[str], edge_types: Mapping[str, tuple[str, str]]):
        self.node_types = frozenset(node_types)
        self.edge_types = dict(sorted((k, tuple(v)) for k, v in edge_types.items()))
        self._key = (tuple(sorted(self.node_types)), tuple(self.edge_types.items()))

    def problems(self) -> list[str]:
        out = []
        for name, (s, t) in self.edge_types.items():
            if name in self.node_types:
                out.append(f"edge type {name!r} reuses a node type name")
            for end in (s, t):
                if end not in self.node_types:
                    out.append(f"edge type {name!r} refers to undeclared node type {end!r}")
        return out

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, TypeGraph) and self._key == other._key)

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"TypeGraph({sorted(self.node_types)}, {self.edge_types})"


class _Index:
    """Lookup tables used by the matcher. Built lazily once per graph."""

    __slots__ = ("by_type", "between", "out_count", "in_count", "incident", "out_nb", "in_nb")

    def __init__(self, g: Graph):
        self.by_type: dict[str, list[int]] = defaultdict(list)
        for n, t in g.nodes.items():
            self.by_type[t].append(n)
        self.between: dict[tuple[int, int, str], list[int]] = defaultdict(list)
        self.out_count: dict[tuple[int, str], int] = defaultdict(int)
        self.in_count: dict[tuple[int, str], int] = defaultdict(int)
        self.incident: dict[int, list[int]] = defaultdict(list)
        self.out_nb: dict[tuple[int, str], set[int]] = defaultdict(set)
        self.in_nb: dict[tuple[int, str], set[int]] = defaultdict(set)
        for e, (s, t, lab) in g.edges.items():
            self.between[(s, t, lab)].append(e)
            self.out_count[(s, lab)] += 1
            self.in_count[(t, lab)] += 1
            self.incident[s].append(e)
            if t != s:
                self.incident[t].append(e)
            self.out_nb[(s, lab)].add(t)
            self.in_nb[(t, lab)].add(s)


class Graph:
    """A finite graph typed over ``tg``.

    ``nodes`` maps node id to node type; ``edges`` maps edge id to
    ``(source, target, edge_type)``.  Instances are treated as immutable and
    compare by content.  The constructor does not validate; see
    :func:`validate_graph`.
    """

    __slots__ = ("tg", "nodes", "edges", "_key", "_hash", "_index")

    def __init__(
        self,
        tg: TypeGraph,
        nodes: Mapping[int, str] | None = None,
        edges: Mapping[int, tuple[int, int, str]] | None = None,
    ):
        self.tg = tg
        self.nodes: dict[int, str] = dict(sorted((nodes or {}).items()))
        self.edges: dict[int, tuple[int, int, str]] = dict(
            sorted((k, tuple(v)) for k, v in (edges or {}).items())
        )
        self._key = (tuple(self.nodes.items()), tuple(self.edges.items()))
        self._hash = None
        self._index = None

    @property
    def index(self) -> _Index:
        if self._index is None:
            self._index = _Index(self)
        return self._index

    @property
    def key(self) -> tuple:
        return self._key

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, Graph) and self._key == other._key and self.tg == other.tg

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key)
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(nodes={self.nodes}, edges={self.edges})"

    def __len__(self) -> int:
        return len(self.nodes) + len(self.edges)

    def is_empty(self) -> bool:
        return not self.nodes and not self.edges

    def src(self, e: int) -> int:
        return self.edges[e][0]

    def tar(self, e: int) -> int:
        return self.edges[e][1]

    def is_subgraph_of(self, other: Graph) -> bool:
        """True when every element of ``self`` occurs identically in ``other``."""
        return all(other.nodes.get(n) == t for n, t in self.nodes.items()) and all(
            other.edges.get(e) == v for e, v in self.edges.items()
        )

    def subgraph(self, nodes: Iterable[int], edges: Iterable[int]) -> Graph:
        """The subgraph on the given ids. Endpoints must be among ``nodes``."""
        ns = {n: self.nodes[n] for n in nodes}
        es = {e: self.edges[e] for e in edges}
        for e, (s, t, _) in es.items():
            if s not in ns or t not in ns:
                raise ValueError(f"edge {e} would dangle in the subgraph")
        return Graph(self.tg, ns, es)

    def remove(self, nodes: Iterable[int], edges: Iterable[int]) -> Graph:
        nodes, edges = set(nodes), set(edges)
        return self.subgraph(
            (n for n in self.nodes if n not in nodes), (e for e in self.edges if e not in edges)
        )

    def union(self, other: Graph) -> Graph:
        """Union of two graphs that agree on their shared ids."""
        ns = dict(self.nodes)
        for n, t in other.nodes.items():
            if ns.setdefault(n, t) != t:
                raise ValueError(f"node {n} has conflicting types")
        es = dict(self.edges)
        for e, v in other.edges.items():
            if es.setdefault(e, v) != v:
                raise ValueError(f"edge {e} has conflicting attachments")
        return Graph(self.tg, ns, es)

    def next_node_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def next_edge_id(self) -> int:
        return max(self.edges, default=-1) + 1

    def empty(self) -> Graph:
        return Graph(self.tg)


def validate_graph(g: Graph | Mapping[str, Any], tg: TypeGraph | None = None) -> list[str]:
    """Return every well-formedness violation of a graph. An empty list means ok.

    Accepts a :class:`Graph` or a raw mapping with ``nodes`` and ``edges``
    lists (as read from JSON), in which case duplicate ids are reported too.
    """
    out: list[str] = []
    if isinstance(g, Graph):
        tg = g.tg
        nodes = list(g.nodes.items())
        edges = [(e, s, t, lab) for e, (s, t, lab) in g.edges.items()]
    else:
        if tg is None:
            raise ValueError("a type graph is required to validate raw graph data")
        nodes = [(n["id"], n["type"]) for n in g.get("nodes", [])]
        edges = [(e["id"], e["src"], e["tar"], e["type"]) for e in g.get("edges", [])]
    seen: set[int] = set()
    for n, _ in nodes:
        if n in seen:
            out.append(f"duplicate node id {n}")
        seen.add(n)
    seen = set()
    for e, *_ in edges:
        if e in seen:
            out.append(f"duplicate edge id {e}")
        seen.add(e)
    ntype = dict(nodes)
    for n, t in nodes:
        if t not in tg.node_types:
            out.append(f"node {n} has unknown type {t!r}")
    for e, s, t, lab in edges:
        if lab not in tg.edge_types:
            out.append(f"edge {e} has unknown type {lab!r}")
            continue
        want_s, want_t = tg.edge_types[lab]
        for role, end, want in (("source", s, want_s), ("target", t, want_t)):
            if end not in ntype:
                out.append(f"edge {e} has dangling {role} {end}")
            elif ntype[end] != want:
                out.append(
                    f"type mismatch: edge {e} of type {lab!r} needs {role} of type "
                    f"{want!r}, node {end} has type {ntype[end]!r}"
                )
    return out


class Morphism:
    """A (possibly partial) graph morphism ``dom -> cod`` given by element maps."""

    __slots__ = ("dom", "cod", "nodes", "edges", "_hash")

    def __init__(self, dom: Graph, cod: Graph, nodes: Mapping[int, int], edges: Mapping[int, int]):
        self.dom = dom
        self.cod = cod
        self.nodes = dict(nodes)
        self.edges = dict(edges)
        self._hash = None

    @classmethod
    def identity(cls, g: Graph) -> Morphism:
        return cls(g, g, {n: n for n in g.nodes}, {e: e for e in g.edges})

    @classmethod
    def inclusion(cls, sub: Graph, sup: Graph) -> Morphism:
        """The identity-on-ids inclusion ``sub -> sup``."""
        if not sub.is_subgraph_of(sup):
            raise ValueError("not a subgraph: cannot build an inclusion")
        return cls(sub, sup, {n: n for n in sub.nodes}, {e: e for e in sub.edges})

    @classmethod
    def empty(cls, g: Graph) -> Morphism:
        return cls(g.empty(), g, {}, {})

    def __call__(self, x: int) -> int:
        return self.nodes[x]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Morphism)
            and self.nodes == other.nodes
            and self.edges == other.edges
            and self.dom == other.dom
            and self.cod == other.cod
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (self.dom, self.cod, tuple(sorted(self.nodes.items())), tuple(sorted(self.edges.items())))
            )
        return self._hash

    def __repr__(self) -> str:
        return f"Morphism(nodes={self.nodes}, edges={self.edges})"

    def __matmul__(self, first: Morphism) -> Morphism:
        """``self @ first`` is the composite ``self ∘ first``, partial where undefined."""
        ns = {x: self.nodes[y] for x, y in first.nodes.items() if y in self.nodes}
        es = {x: self.edges[y] for x, y in first.edges.items() if y in self.edges}
        return Morphism(first.dom, self.cod, ns, es)

    @property
    def is_total(self) -> bool:
        return len(self.nodes) == len(self.dom.nodes) and len(self.edges) == len(self.dom.edges)

    @property
    def is_injective(self) -> bool:
        return len(set(self.nodes.values())) == len(self.nodes) and len(set(self.edges.values())) == len(
            self.edges
        )

    @property
    def is_bijective(self) -> bool:
        return (
            self.is_total
            and self.is_injective
            and len(self.nodes) == len(self.cod.nodes)
            and len(self.edges) == len(self.cod.edges)
        )

    def is_identity_inclusion(self) -> bool:
        return (
            self.is_total
            and all(k == v for k, v in self.nodes.items())
            and all(k == v for k, v in self.edges.items())
        )

    def problems(self) -> list[str]:
        """Structural violations: unknown elements, type changes, broken src/tar."""
        out = []
        for x, y in self.nodes.items():
            if x not in self.dom.nodes or y not in self.cod.nodes:
                out.append(f"node map {x}->{y} leaves the graphs")
            elif self.dom.nodes[x] != self.cod.nodes[y]:
                out.append(f"node map {x}->{y} changes the type")
        for x, y in self.edges.items():
            if x not in self.dom.edges or y not in self.cod.edges:
                out.append(f"edge map {x}->{y} leaves the graphs")
                continue
            s, t, lab = self.dom.edges[x]
            s2, t2, lab2 = self.cod.edges[y]
            if lab != lab2:
                out.append(f"edge map {x}->{y} changes the type")
            if self.nodes.get(s) != s2 or self.nodes.get(t) != t2:
                out.append(f"edge map {x}->{y} does not preserve its endpoints")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def image(self) -> Graph:
        return self.cod.subgraph(self.nodes.values(), self.edges.values())

    def image_contains(self, nodes: Iterable[int] = (), edges: Iterable[int] = ()) -> bool:
        ns, es = set(self.nodes.values()), set(self.edges.values())
        return all(n in ns for n in nodes) and all(e in es for e in edges)

    def inverse(self) -> Morphism:
        """The partial inverse ``cod -> dom`` of an injective morphism."""
        return Morphism(
            self.cod,
            self.dom,
            {y: x for x, y in self.nodes.items()},
            {y: x for x, y in self.edges.items()},
        )


def restrict_morphism(f: Morphism, sub_dom: Graph, sub_cod: Graph) -> Morphism | None:
    """The restriction of ``f`` to ``sub_dom -> sub_cod``, or None if the image escapes.

    Raises:
        ValueError: if the inputs are not subgraphs of ``dom(f)`` and ``cod(f)``.
    """
    if not sub_dom.is_subgraph_of(f.dom) or not sub_cod.is_subgraph_of(f.cod):
        raise ValueError("restriction needs subgraphs of the morphism's domain and codomain")
    ns = {x: f.nodes[x] for x in sub_dom.nodes if x in f.nodes}
    es = {x: f.edges[x] for x in sub_dom.edges if x in f.edges}
    if any(y not in sub_cod.nodes for y in ns.values()) or any(y not in sub_cod.edges for y in es.values()):
        return None
    return Morphism(sub_dom, sub_cod, ns, es)
