"""Conflicts between the graphs of a constraint and between constraints."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .conditions import UANFConstraint
from .consistency import _all, _hits, _minus, is_basic_maintaining_at_layer
from .graph import Graph
from .overlaps import Overlap, enumerate_overlaps, intermediate_graphs
from .rewrite import PlainRule, satisfies_dangling_condition


class CyclicError(ValueError):
    """Raised when a topological ordering is requested for a cyclic graph."""

    def __init__(self, cycle: list):
        self.cycle = cycle
        super().__init__("conflict graph has a cycle: " + " -> ".join(map(str, cycle)))


@lru_cache(maxsize=4096)
def _overlaps(g1: Graph, g2: Graph) -> tuple[Overlap, ...]:
    return tuple(enumerate_overlaps(g1, g2))


def _deletion_bases(lo: Graph, hi: Graph) -> list[Graph]:
    """Graphs ``C`` with ``lo ⊆ C ⊊ hi``; each gives a rule deleting ``hi ∖ C``."""
    return [lo] + [g for g in intermediate_graphs(lo, hi) if g != hi]


def _check_pair(c: UANFConstraint, k: int, j: int) -> bool:
    """True for existential ``k`` and universal ``j``, False for the reverse."""
    for i in (k, j):
        if not 1 <= i <= c.nlvl:
            raise ValueError(f"graph index {i} out of range [1, {c.nlvl}]")
    if c.is_existential(k) and c.is_universal(j):
        return True
    if c.is_universal(k) and c.is_existential(j):
        return False
    raise ValueError(f"C_{k} and C_{j} must be one existentially and one universally bound graph")


def causes_conflict(c: UANFConstraint, k: int, j: int) -> bool:
    """Whether ``C_k`` causes a conflict for ``C_j``, decided by overlaps.

    For existential ``C_k``: some overlap of ``C_k`` and ``C_j`` meets
    ``C_k ∖ C_{k-1}`` and the rule deleting ``C_k ∖ C_{k-1}`` applies at it.
    For universal ``C_k``: some rule deleting ``C_k ∖ C`` (``C_{k-1} ⊆ C ⊊ C_k``)
    applies at an overlap whose deleted part meets ``C_j``.
    """
    if _check_pair(c, k, j):
        ck, lo = c.graph(k), c.graph(k - 1)
        rho = PlainRule(ck, lo, lo)
        part = _minus(ck, lo)
        target = _all(c.graph(j))
        return any(_hits(o, part, target) and satisfies_dangling_condition(rho, o.left) for o in _overlaps(ck, c.graph(j)))
    cj, target = c.graph(k), _all(c.graph(j))
    for base in _deletion_bases(c.graph(k - 1), cj):
        rho = PlainRule(cj, base, base)
        part = _minus(cj, base)
        if any(_hits(o, part, target) and satisfies_dangling_condition(rho, o.left) for o in _overlaps(cj, c.graph(j))):
            return True
    return False


def universal_constraint(g: Graph) -> UANFConstraint:
    """``∀(g, false)`` as a chain."""
    return UANFConstraint([g.empty(), g])


def existential_constraint(g: Graph) -> UANFConstraint:
    """``∃(g, true)`` as a chain."""
    e = g.empty()
    return UANFConstraint([e, e, g])


def _basic_wrt(rho: PlainRule, g: Graph, universal: bool) -> bool:
    if universal:
        return is_basic_maintaining_at_layer(rho, universal_constraint(g), -1)
    return is_basic_maintaining_at_layer(rho, existential_constraint(g), 1)


def causes_conflict_basic(c: UANFConstraint, k: int, j: int) -> bool:
    """:func:`causes_conflict` decided through basic consistency-maintaining rules."""
    if _check_pair(c, k, j):
        lo = c.graph(k - 1)
        return not _basic_wrt(PlainRule(lo, lo, c.graph(k)), c.graph(j), True)
    ck = c.graph(k)
    return any(not _basic_wrt(PlainRule(ck, b, b), c.graph(j), False) for b in _deletion_bases(c.graph(k - 1), ck))


@dataclass(frozen=True)
class ConflictGraph:
    nodes: tuple
    edges: tuple[tuple, ...]
    conflicts: tuple[tuple, ...] = ()  # the raw "causes a conflict" pairs
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("node labels must be unique")
        known = set(self.nodes)
        for s, t in self.edges:
            if s not in known or t not in known:
                raise ValueError(f"edge {s}->{t} references a missing node")

    def successors(self, n) -> list:
        return [t for s, t in self.edges if s == n]

    def find_cycle(self) -> list | None:
        """A directed cycle ``[v0, ..., v0]``, or None."""
        color = {n: 0 for n in self.nodes}
        succ = {n: sorted(set(self.successors(n)), key=_label_key) for n in self.nodes}
        for root in sorted(self.nodes, key=_label_key):
            if color[root]:
                continue
            stack = [(root, iter(succ[root]))]
            path = [root]
            color[root] = 1
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[v] = 2
                    stack.pop()
                    path.pop()
                elif color[nxt] == 1:
                    return path[path.index(nxt):] + [nxt]
                elif color[nxt] == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
                    path.append(nxt)
        return None

    def is_acyclic(self) -> bool:
        return self.find_cycle() is None

    def as_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edges],
            "conflicts": [list(e) for e in self.conflicts],
            "acyclic": self.is_acyclic(),
            "notes": list(self.notes),
        }

    def to_dot(self, name: str = "conflicts") -> str:
        lines = [f"digraph {name} {{"]
        lines += [f'  "{n}";' for n in self.nodes]
        lines += [f'  "{s}" -> "{t}";' for s, t in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label_key(n):
    return (not isinstance(n, int), n if isinstance(n, int) else str(n))


def conflict_graph_edges(nlvl: int, conflicts: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Edges ``k'→j'`` with ``k' ∈ {k, k-1}``, ``j' ∈ {j, j-1}`` inside ``[0, nlvl)`` and ``k' ≠ j'``."""
    out = set()
    for k, j in conflicts:
        for s in (k, k - 1):
            for t in (j, j - 1):
                if 0 <= s < nlvl and 0 <= t < nlvl and s != t:
                    out.add((s, t))
    return sorted(out)


def conflicts_of(c: UANFConstraint, basic: bool = False) -> list[tuple[int, int]]:
    """Every pair ``(k, j)`` such that ``C_k`` causes a conflict for ``C_j``."""
    decide = causes_conflict_basic if basic else causes_conflict
    out = []
    for k in range(1, c.nlvl + 1):
        for j in range(1, c.nlvl + 1):
            if c.is_existential(k) and c.is_universal(j) or c.is_universal(k) and c.is_existential(j):
                if decide(c, k, j):
                    out.append((k, j))
    return out


def conflict_graph(c: UANFConstraint) -> ConflictGraph:
    pairs = conflicts_of(c)
    return ConflictGraph(tuple(range(c.nlvl)), tuple(conflict_graph_edges(c.nlvl, pairs)), tuple(pairs))


def is_circular_conflict_free(c: UANFConstraint) -> bool:
    return conflict_graph(c).is_acyclic()


def topological_ordering(g: ConflictGraph) -> list:
    """Kahn's algorithm, breaking ties by the smallest label.

    Raises:
        CyclicError: carrying one cycle of ``g``.
    """
    indeg = {n: 0 for n in g.nodes}
    succ: dict = {n: [] for n in g.nodes}
    for s, t in set(g.edges):
        succ[s].append(t)
        indeg[t] += 1
    heap = [(_label_key(n), n) for n in g.nodes if indeg[n] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, n = heapq.heappop(heap)
        out.append(n)
        for t in succ[n]:
            indeg[t] -= 1
            if indeg[t] == 0:
                heapq.heappush(heap, (_label_key(t), t))
    if len(out) != len(g.nodes):
        raise CyclicError(g.find_cycle() or [])
    return out


# Conflicts between constraints.


def _concurrent_rules(repairing_set) -> list[PlainRule]:
    if repairing_set is None:
        return []
    seqs = getattr(repairing_set, "sequences", None)
    if seqs is None:
        return [s if isinstance(s, PlainRule) else s.concurrent for s in repairing_set]
    items = seqs.values() if isinstance(seqs, Mapping) else seqs
    return [s.concurrent for s in items]


def constraint_causes_conflict(c: UANFConstraint, c2: UANFConstraint, repairing_set) -> bool:
    """Whether a registered repairing sequence of ``c`` has a concurrent rule that is
    not basic consistency-maintaining for ``∀(C_j, false)`` or ``∃(C_j, true)``,
    ``C_j`` ranging over the non-empty graphs of ``c2``.

    ``repairing_set`` is a repairing set for ``c`` (anything with ``sequences``)
    or an iterable of sequences or concurrent rules.
    """
    rules = _concurrent_rules(repairing_set)
    for rho in rules:
        for j in range(1, c2.nlvl + 1):
            g = c2.graph(j)
            if g.is_empty():
                continue
            if not _basic_wrt(rho, g, c2.is_universal(j)):
                return True
    return False


def _label(c: UANFConstraint, i: int) -> str:
    return c.name or f"c{i}"


def conflict_graph_of_set(constraints: Sequence[UANFConstraint], repairing_sets: Sequence) -> ConflictGraph:
    """One node per constraint (labelled by name) and an edge ``c → c'`` whenever
    ``c`` causes a conflict for ``c'``.  Self-conflicts are left to each
    constraint's own conflict graph.

    Members that are not circular conflict free are reported in ``notes``.
    """
    if len(constraints) != len(repairing_sets):
        raise ValueError("need one repairing set per constraint")
    labels = [_label(c, i) for i, c in enumerate(constraints)]
    if len(set(labels)) != len(labels):
        raise ValueError("constraint labels must be unique")
    edges, notes = [], []
    for i, c in enumerate(constraints):
        if not is_circular_conflict_free(c):
            notes.append(f"{labels[i]} is not circular conflict free")
        for j, c2 in enumerate(constraints):
            if i != j and constraint_causes_conflict(c, c2, repairing_sets[i]):
                edges.append((labels[i], labels[j]))
    return ConflictGraph(tuple(labels), tuple(edges), tuple(edges), tuple(notes))


def is_circular_conflict_free_set(constraints: Sequence[UANFConstraint], repairing_sets: Sequence) -> bool:
    g = conflict_graph_of_set(constraints, repairing_sets)
    return not g.notes and g.is_acyclic()


def constraint_order(constraints: Sequence[UANFConstraint], repairing_sets: Sequence) -> list[int]:
    """Indices of ``constraints`` in topological order of their conflict graph.

    Raises:
        CyclicError: if the constraint conflict graph has a cycle.
        ValueError: if a member constraint is not circular conflict free.
    """
    g = conflict_graph_of_set(constraints, repairing_sets)
    if g.notes:
        raise ValueError("; ".join(g.notes))
    pos = {lab: i for i, lab in enumerate(g.nodes)}
    return [pos[n] for n in topological_ordering(g)]

