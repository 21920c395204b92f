"""Random and exhaustive host generation for bounded checks."""

from __future__ import annotations

import random
from itertools import combinations, combinations_with_replacement
from typing import Iterator

from .graph import Graph, TypeGraph


def _edge_slots(tg: TypeGraph, nodes: dict[int, str]) -> list[tuple[int, int, str]]:
    slots = []
    for lab in sorted(tg.edge_types):
        st, tt = tg.edge_types[lab]
        for s in sorted(nodes):
            if nodes[s] != st:
                continue
            for t in sorted(nodes):
                if nodes[t] == tt:
                    slots.append((s, t, lab))
    return slots


def random_graph(
    tg: TypeGraph,
    rng: random.Random,
    max_nodes: int = 4,
    max_edges: int = 5,
    base: Graph | None = None,
    simple: bool = True,
) -> Graph:
    """A random graph, optionally extending ``base`` (whose ids are kept)."""
    nodes = dict(base.nodes) if base is not None else {}
    edges = dict(base.edges) if base is not None else {}
    types = sorted(tg.node_types)
    nxt = max(nodes, default=-1) + 1
    for _ in range(rng.randint(0, max(0, max_nodes - len(nodes)))):
        nodes[nxt] = rng.choice(types)
        nxt += 1
    slots = _edge_slots(tg, nodes)
    if simple:
        taken = set(edges.values())
        slots = [s for s in slots if s not in taken]
    budget = max(0, max_edges - len(edges))
    want = rng.randint(0, min(budget, len(slots))) if slots else 0
    nxt = max(edges, default=-1) + 1
    if simple:
        chosen = rng.sample(slots, want)
    else:
        chosen = [rng.choice(slots) for _ in range(want)]
    for s in chosen:
        edges[nxt] = s
        nxt += 1
    return Graph(tg, nodes, edges)


def all_graphs(tg: TypeGraph, max_nodes: int, max_edges: int) -> Iterator[Graph]:
    """Every simple graph with ids ``0..n-1`` up to the given size.

    Node types are drawn as sorted multisets, so many (not all) isomorphic
    duplicates are skipped.
    """
    types = sorted(tg.node_types)
    for n in range(max_nodes + 1):
        for combo in combinations_with_replacement(types, n):
            nodes = dict(enumerate(combo))
            slots = _edge_slots(tg, nodes)
            for m in range(min(max_edges, len(slots)) + 1):
                for es in combinations(slots, m):
                    yield Graph(tg, nodes, dict(enumerate(es)))


def hosts_containing(base: Graph, rng: random.Random, count: int, max_extra_nodes: int = 2, max_extra_edges: int = 3) -> Iterator[Graph]:
    """``count`` random hosts that contain ``base`` as a subgraph."""
    for _ in range(count):
        yield random_graph(
            base.tg,
            rng,
            max_nodes=len(base.nodes) + max_extra_nodes,
            max_edges=len(base.edges) + max_extra_edges,
            base=base,
        )
