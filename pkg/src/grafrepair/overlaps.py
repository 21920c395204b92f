"""Gluings of two graphs: overlaps, extended overlaps and intermediate graphs."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping

from .graph import Graph, Morphism


@dataclass(frozen=True, eq=False)
class Overlap:
    """A graph ``graph`` with jointly surjective injective ``left`` and ``right``.

    ``left`` is always the identity inclusion of the first graph, so the
    overlap graph keeps the first graph's ids.  Elements of the second graph
    that are not identified receive fresh ids.
    """

    graph: Graph
    left: Morphism
    right: Morphism

    @property
    def shared_nodes(self) -> set[int]:
        return set(self.left.nodes.values()) & set(self.right.nodes.values())

    @property
    def shared_edges(self) -> set[int]:
        return set(self.left.edges.values()) & set(self.right.edges.values())

    def is_proper(self) -> bool:
        """True when the two images intersect."""
        return bool(self.shared_nodes or self.shared_edges)

    def problems(self) -> list[str]:
        out = self.left.problems() + self.right.problems()
        for m, side in ((self.left, "left"), (self.right, "right")):
            if not (m.is_total and m.is_injective):
                out.append(f"{side} map is not total and injective")
        covered_n = set(self.left.nodes.values()) | set(self.right.nodes.values())
        covered_e = set(self.left.edges.values()) | set(self.right.edges.values())
        if covered_n != set(self.graph.nodes) or covered_e != set(self.graph.edges):
            out.append("maps are not jointly surjective")
        return out


def gluings(
    g1: Graph,
    g2: Graph,
    forced_nodes: Mapping[int, int] | None = None,
    forced_edges: Mapping[int, int] | None = None,
) -> Iterator[Overlap]:
    """Every gluing of ``g1`` and ``g2`` along a partial injective identification.

    An identification pairs elements of ``g1`` with elements of ``g2`` of the
    same type; an edge pair is allowed only if its endpoints are paired too.
    ``forced_*`` map ``g1`` ids to ``g2`` ids that must be identified.
    Distinct identifications give non-isomorphic overlaps (as cospans), so
    each isomorphism class is produced exactly once.
    """
    forced_nodes = dict(forced_nodes or {})
    forced_edges = dict(forced_edges or {})
    if len(set(forced_nodes.values())) != len(forced_nodes):
        return
    for x, y in forced_nodes.items():
        if g1.nodes[x] != g2.nodes[y]:
            return
    n1 = list(g1.nodes)
    e1 = list(g1.edges)

    def node_maps(i: int, phi: dict[int, int], used: set[int]) -> Iterator[dict[int, int]]:
        if i == len(n1):
            yield dict(phi)
            return
        x = n1[i]
        if x in forced_nodes:
            phi[x] = forced_nodes[x]
            yield from node_maps(i + 1, phi, used)
            del phi[x]
            return
        yield from node_maps(i + 1, phi, used)
        forced_targets = set(forced_nodes.values())
        for y in g2.index.by_type.get(g1.nodes[x], ()):
            if y in used or y in forced_targets:
                continue
            phi[x] = y
            used.add(y)
            yield from node_maps(i + 1, phi, used)
            used.discard(y)
            del phi[x]

    def edge_maps(i: int, phi, psi: dict[int, int], used: set[int]) -> Iterator[dict[int, int]]:
        if i == len(e1):
            yield dict(psi)
            return
        x = e1[i]
        s, t, lab = g1.edges[x]
        if x in forced_edges:
            y = forced_edges[x]
            s2, t2, lab2 = g2.edges[y]
            if lab2 == lab and phi.get(s) == s2 and phi.get(t) == t2 and y not in used:
                psi[x] = y
                used.add(y)
                yield from edge_maps(i + 1, phi, psi, used)
                used.discard(y)
                del psi[x]
            return
        yield from edge_maps(i + 1, phi, psi, used)
        if s in phi and t in phi:
            forced_targets = set(forced_edges.values())
            for y in g2.index.between.get((phi[s], phi[t], lab), ()):
                if y in used or y in forced_targets:
                    continue
                psi[x] = y
                used.add(y)
                yield from edge_maps(i + 1, phi, psi, used)
                used.discard(y)
                del psi[x]

    for phi in node_maps(0, {}, set(forced_nodes.values())):
        for psi in edge_maps(0, phi, {}, set()):
            yield _build(g1, g2, phi, psi)


def _build(g1: Graph, g2: Graph, phi: dict[int, int], psi: dict[int, int]) -> Overlap:
    back_n = {y: x for x, y in phi.items()}
    back_e = {y: x for x, y in psi.items()}
    nodes = dict(g1.nodes)
    edges = dict(g1.edges)
    rn: dict[int, int] = {}
    nxt = g1.next_node_id()
    for y, typ in g2.nodes.items():
        if y in back_n:
            rn[y] = back_n[y]
        else:
            rn[y] = nxt
            nodes[nxt] = typ
            nxt += 1
    re: dict[int, int] = {}
    nxt = g1.next_edge_id()
    for y, (s, t, lab) in g2.edges.items():
        if y in back_e:
            re[y] = back_e[y]
        else:
            re[y] = nxt
            edges[nxt] = (rn[s], rn[t], lab)
            nxt += 1
    p = Graph(g1.tg, nodes, edges)
    left = Morphism(g1, p, {n: n for n in g1.nodes}, {e: e for e in g1.edges})
    return Overlap(p, left, Morphism(g2, p, rn, re))


def enumerate_overlaps(g1: Graph, g2: Graph) -> list[Overlap]:
    """One representative per isomorphism class of overlaps with a shared element."""
    return [o for o in gluings(g1, g2) if o.is_proper()]


def extended_overlaps(g: Graph, anchor: Morphism, e: Morphism) -> list[Overlap]:
    """Overlaps ``P`` of ``g`` and ``cod(e)`` in which ``anchor`` and ``e`` agree.

    That is, ``left ∘ anchor = right ∘ e``.  Only overlaps with a shared
    element are returned.
    """
    if anchor.dom != e.dom:
        raise ValueError("anchor and e must have the same domain")
    if anchor.cod != g:
        raise ValueError("anchor must map into g")
    fn = {anchor.nodes[x]: e.nodes[x] for x in anchor.dom.nodes}
    fe = {anchor.edges[x]: e.edges[x] for x in anchor.dom.edges}
    return [o for o in gluings(g, e.cod, fn, fe) if o.is_proper()]


def intermediate_graphs(lo: Graph, hi: Graph) -> list[Graph]:
    """All well-formed graphs ``X`` with ``lo ⊊ X ⊆ hi`` (sharing ids with ``hi``).

    Raises:
        ValueError: if ``lo`` is not a subgraph of ``hi``.
    """
    if not lo.is_subgraph_of(hi):
        raise ValueError("intermediate graphs need lo to be included in hi")
    extra_nodes = [n for n in hi.nodes if n not in lo.nodes]
    extra_edges = [e for e in hi.edges if e not in lo.edges]
    out = []
    for r in range(len(extra_nodes) + 1):
        for ns in combinations(extra_nodes, r):
            present = set(lo.nodes) | set(ns)
            allowed = [e for e in extra_edges if hi.edges[e][0] in present and hi.edges[e][1] in present]
            for q in range(len(allowed) + 1):
                for es in combinations(allowed, q):
                    if not ns and not es:
                        continue
                    out.append(hi.subgraph(list(lo.nodes) + list(ns), list(lo.edges) + list(es)))
    return out
