"""Backtracking search for injective graph morphisms."""

from __future__ import annotations

from collections import Counter
from itertools import permutations, product
from typing import Iterator, Mapping

from .graph import Graph, Morphism


def _node_order(pattern: Graph, fixed: Mapping[int, int]) -> list[int]:
    # Grow from already-placed nodes so candidates come from host adjacency.
    placed = set(fixed)
    order: list[int] = []
    rest = [n for n in pattern.nodes if n not in placed]
    idx = pattern.index
    while rest:
        best, best_score = None, None
        for n in rest:
            links = sum(1 for e in idx.incident.get(n, ()) if (set(pattern.edges[e][:2]) - {n}) & placed)
            score = (-links, -len(idx.incident.get(n, ())), n)
            if best_score is None or score < best_score:
                best, best_score = n, score
        order.append(best)
        placed.add(best)
        rest.remove(best)
    return order


def _edge_demand(pattern: Graph, v: int, placed: set[int]) -> Counter:
    # Multiplicity of pattern edges between v and nodes placed before it.
    demand: Counter = Counter()
    for e in pattern.index.incident.get(v, ()):
        s, t, lab = pattern.edges[e]
        if (s == v or s in placed) and (t == v or t in placed):
            demand[(s, t, lab)] += 1
    return demand


def find_morphisms(
    pattern: Graph,
    host: Graph,
    fixed_nodes: Mapping[int, int] | None = None,
    fixed_edges: Mapping[int, int] | None = None,
) -> Iterator[Morphism]:
    """Yield every total injective morphism ``pattern -> host`` extending the fixed maps.

    Raises:
        ValueError: if the graphs are typed over different type graphs.
    """
    if pattern.tg != host.tg:
        raise ValueError("pattern and host are typed over different type graphs")
    fixed_nodes = dict(fixed_nodes or {})
    fixed_edges = dict(fixed_edges or {})
    # Reject inconsistent fixed parts up front.
    if len(set(fixed_nodes.values())) != len(fixed_nodes) or len(set(fixed_edges.values())) != len(fixed_edges):
        return
    for x, y in fixed_nodes.items():
        if host.nodes.get(y) != pattern.nodes[x]:
            return
    for x, y in fixed_edges.items():
        if y not in host.edges:
            return
        s, t, lab = pattern.edges[x]
        hs, ht, hlab = host.edges[y]
        if hlab != lab:
            return
        for pn, hn in ((s, hs), (t, ht)):
            if fixed_nodes.setdefault(pn, hn) != hn:
                return
            if host.nodes[hn] != pattern.nodes[pn]:
                return
    if len(set(fixed_nodes.values())) != len(fixed_nodes):
        return
    if len(pattern.nodes) > len(host.nodes) or len(pattern.edges) > len(host.edges):
        return

    pidx, hidx = pattern.index, host.index
    order = _node_order(pattern, fixed_nodes)
    placed = set(fixed_nodes)
    demands = []
    for v in order:
        demands.append(_edge_demand(pattern, v, placed))
        placed.add(v)
    # Fixed nodes must already carry the edges demanded between them.
    base = Counter()
    for e, (s, t, lab) in pattern.edges.items():
        if s in fixed_nodes and t in fixed_nodes:
            base[(s, t, lab)] += 1
    for (s, t, lab), k in base.items():
        if len(hidx.between.get((fixed_nodes[s], fixed_nodes[t], lab), ())) < k:
            return
    degree = {
        v: (
            Counter((lab, "o") for (_, _, lab) in (pattern.edges[e] for e in pidx.incident.get(v, ()) if pattern.edges[e][0] == v))
            + Counter((lab, "i") for (_, _, lab) in (pattern.edges[e] for e in pidx.incident.get(v, ()) if pattern.edges[e][1] == v))
        )
        for v in order
    }

    phi = dict(fixed_nodes)
    used = set(phi.values())

    def candidates(v: int) -> list[int]:
        typ = pattern.nodes[v]
        pool = None
        for e in pidx.incident.get(v, ()):
            s, t, lab = pattern.edges[e]
            if s == v and t in phi and t != v:
                nb = hidx.in_nb.get((phi[t], lab), set())
            elif t == v and s in phi and s != v:
                nb = hidx.out_nb.get((phi[s], lab), set())
            else:
                continue
            pool = set(nb) if pool is None else pool & nb
        if pool is None:
            cands = hidx.by_type.get(typ, [])
        else:
            cands = sorted(n for n in pool if host.nodes[n] == typ)
        return [n for n in cands if n not in used]

    def fits(v: int, h: int, i: int) -> bool:
        for (lab, d), k in degree[v].items():
            have = hidx.out_count.get((h, lab), 0) if d == "o" else hidx.in_count.get((h, lab), 0)
            if have < k:
                return False
        for (s, t, lab), k in demands[i].items():
            if len(hidx.between.get((phi[s], phi[t], lab), ())) < k:
                return False
        return True

    def edge_assignments() -> Iterator[dict[int, int]]:
        groups: dict[tuple, list[int]] = {}
        for e, (s, t, lab) in pattern.edges.items():
            if e in fixed_edges:
                continue
            groups.setdefault((phi[s], phi[t], lab), []).append(e)
        taken = set(fixed_edges.values())
        options = []
        for key, pes in groups.items():
            free = [h for h in hidx.between.get(key, ()) if h not in taken]
            if len(free) < len(pes):
                return
            options.append([dict(zip(pes, perm)) for perm in permutations(free, len(pes))])
        for combo in product(*options):
            psi = dict(fixed_edges)
            for part in combo:
                psi.update(part)
            yield psi

    def go(i: int) -> Iterator[Morphism]:
        if i == len(order):
            for psi in edge_assignments():
                yield Morphism(pattern, host, dict(phi), psi)
            return
        v = order[i]
        for h in candidates(v):
            phi[v] = h
            if fits(v, h, i):
                used.add(h)
                yield from go(i + 1)
                used.discard(h)
            del phi[v]

    yield from go(0)


def _canonical_key(m: Morphism) -> tuple:
    return (tuple(m.nodes[n] for n in m.dom.nodes), tuple(m.edges[e] for e in m.dom.edges))


def enumerate_monomorphisms(
    pattern: Graph,
    host: Graph,
    fixed_nodes: Mapping[int, int] | None = None,
    fixed_edges: Mapping[int, int] | None = None,
) -> list[Morphism]:
    """All total injective morphisms ``pattern -> host``, in canonical order."""
    return sorted(find_morphisms(pattern, host, fixed_nodes, fixed_edges), key=_canonical_key)


def has_morphism(pattern: Graph, host: Graph, fixed_nodes=None, fixed_edges=None) -> bool:
    return next(find_morphisms(pattern, host, fixed_nodes, fixed_edges), None) is not None


def extensions(a: Morphism, p: Morphism) -> Iterator[Morphism]:
    """Morphisms ``q: cod(a) -> cod(p)`` with ``q ∘ a = p``, both injective and total."""
    fn = {a.nodes[x]: y for x, y in p.nodes.items()}
    fe = {a.edges[x]: y for x, y in p.edges.items()}
    return find_morphisms(a.cod, p.cod, fn, fe)


def graph_isomorphic(g: Graph, h: Graph) -> bool:
    """True iff a type-preserving bijective morphism ``g -> h`` exists."""
    if g.tg != h.tg or len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return False
    if Counter(g.nodes.values()) != Counter(h.nodes.values()):
        return False
    if Counter(v[2] for v in g.edges.values()) != Counter(v[2] for v in h.edges.values()):
        return False
    return has_morphism(g, h)


def find_isomorphism(g: Graph, h: Graph) -> Morphism | None:
    if not graph_isomorphic(g, h):
        return None
    return next(find_morphisms(g, h))
