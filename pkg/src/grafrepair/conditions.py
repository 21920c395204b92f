"""Nested graph conditions, their semantics, and layered constraints.

Conditions are trees of :class:`Const`, :class:`Exists`, :class:`Forall`,
:class:`Not`, :class:`And` and :class:`Or`.  Quantifier anchors are total
injective morphisms; the ones produced here are identity inclusions.

A :class:`UANFConstraint` is the alternating chain
``∀(C_0↪C_1, ∃(C_1↪C_2, ∀(C_2↪C_3, ...)))`` that starts with a universal
quantifier.  The graph ``C_k`` is universally bound for odd ``k`` and
existentially bound for even ``k ≥ 2``; the quantifier of layer ``k`` (the
one over ``a_k: C_k ↪ C_{k+1}``) is universal for even ``k``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import Graph, Morphism
from .matching import enumerate_monomorphisms, extensions, find_morphisms
from .overlaps import gluings, intermediate_graphs


class Condition:
    """Base class of the condition AST."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Condition):
    value: bool

    def __repr__(self) -> str:
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Exists(Condition):
    a: Morphism
    sub: Condition = TRUE

    def __repr__(self) -> str:
        return f"∃({_show(self.a)}, {self.sub!r})"


@dataclass(frozen=True)
class Forall(Condition):
    a: Morphism
    sub: Condition = FALSE

    def __repr__(self) -> str:
        return f"∀({_show(self.a)}, {self.sub!r})"


@dataclass(frozen=True)
class Not(Condition):
    sub: Condition

    def __repr__(self) -> str:
        return f"¬{self.sub!r}"


@dataclass(frozen=True)
class And(Condition):
    parts: tuple[Condition, ...]

    def __repr__(self) -> str:
        return "(" + " ∧ ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True)
class Or(Condition):
    parts: tuple[Condition, ...]

    def __repr__(self) -> str:
        return "(" + " ∨ ".join(map(repr, self.parts)) + ")"


def _show(a: Morphism) -> str:
    g = a.cod
    return f"{len(a.dom)}↪{len(g.nodes)}n/{len(g.edges)}e"


def conj(*parts: Condition | Iterable[Condition]) -> Condition:
    """Conjunction with flattening and constant folding; empty means true."""
    flat: list[Condition] = []
    for p in _expand(parts):
        if p == FALSE:
            return FALSE
        if p == TRUE:
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Condition | Iterable[Condition]) -> Condition:
    """Disjunction with flattening and constant folding; empty means false."""
    flat: list[Condition] = []
    for p in _expand(parts):
        if p == TRUE:
            return TRUE
        if p == FALSE:
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(c: Condition) -> Condition:
    if isinstance(c, Const):
        return Const(not c.value)
    if isinstance(c, Not):
        return c.sub
    return Not(c)


def _expand(parts) -> Iterable[Condition]:
    for p in parts:
        if isinstance(p, Condition):
            yield p
        else:
            yield from p


def size(c: Condition) -> int:
    """Number of AST nodes."""
    if isinstance(c, (Exists, Forall, Not)):
        return 1 + size(c.sub)
    if isinstance(c, (And, Or)):
        return 1 + sum(size(p) for p in c.parts)
    return 1


def _check_root(p: Morphism, a: Morphism) -> None:
    if a.dom is not p.dom and a.dom.key != p.dom.key:
        raise ValueError("morphism domain does not match the condition's root graph")


def satisfies(p: Morphism, c: Condition) -> bool:
    """Whether the total injective morphism ``p`` satisfies ``c``."""
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Exists):
        _check_root(p, c.a)
        return any(satisfies(q, c.sub) for q in extensions(c.a, p))
    if isinstance(c, Forall):
        _check_root(p, c.a)
        return all(satisfies(q, c.sub) for q in extensions(c.a, p))
    if isinstance(c, Not):
        return not satisfies(p, c.sub)
    if isinstance(c, And):
        return all(satisfies(p, d) for d in c.parts)
    if isinstance(c, Or):
        return any(satisfies(p, d) for d in c.parts)
    raise TypeError(f"not a condition: {c!r}")


def graph_satisfies(g: Graph, c: Condition | UANFConstraint) -> bool:
    """Whether ``g`` satisfies the constraint ``c`` (a condition over the empty graph)."""
    if isinstance(c, UANFConstraint):
        c = c.condition
    return satisfies(Morphism.empty(g), c)


def shift_over_morphism(c: Condition, i: Morphism) -> Condition:
    """Shift ``c`` (over ``dom(i)``) along ``i`` so that ``m ⊨ shift(c, i) ⇔ m∘i ⊨ c``."""
    if isinstance(c, Const):
        return c
    if isinstance(c, (Exists, Forall)):
        a = c.a
        if a.dom.key != i.dom.key:
            raise ValueError("shift: morphism domain does not match the condition's root graph")
        forced_n = {i.nodes[x]: a.nodes[x] for x in a.dom.nodes}
        forced_e = {i.edges[x]: a.edges[x] for x in a.dom.edges}
        parts = []
        for o in gluings(i.cod, a.cod, forced_n, forced_e):
            parts.append(type(c)(o.left, shift_over_morphism(c.sub, o.right)))
        return disj(parts) if isinstance(c, Exists) else conj(parts)
    if isinstance(c, Not):
        return neg(shift_over_morphism(c.sub, i))
    if isinstance(c, And):
        return conj(shift_over_morphism(d, i) for d in c.parts)
    if isinstance(c, Or):
        return disj(shift_over_morphism(d, i) for d in c.parts)
    raise TypeError(f"not a condition: {c!r}")


@functools.total_ordering
class _Infinity:
    """Positive infinity for violation counts. Greater than every int."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other: object) -> bool:
        if other is self or isinstance(other, int):
            return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash("inf")

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"


INF = _Infinity()


class UANFConstraint:
    """An alternating constraint chain ``C_0 = ∅ ⊊ C_1 ⊊ ... ⊊ C_n`` (``C_1`` may be empty).

    Consecutive graphs share ids, so each ``a_k`` is an identity inclusion.
    The chain ends in ``∃(C_n, true)`` when ``n`` is even and in
    ``∀(C_n, false)`` when ``n`` is odd.
    """

    def __init__(self, graphs: Sequence[Graph], name: str = ""):
        graphs = tuple(graphs)
        if len(graphs) < 2:
            raise ValueError("a constraint chain needs at least C_0 and C_1")
        if not graphs[0].is_empty():
            raise ValueError("C_0 must be the empty graph")
        for k in range(len(graphs) - 1):
            if not graphs[k].is_subgraph_of(graphs[k + 1]):
                raise ValueError(f"C_{k} is not included in C_{k + 1}")
            if k >= 1 and len(graphs[k]) == len(graphs[k + 1]):
                raise ValueError(f"a_{k} is bijective")
        self.graphs = graphs
        self.name = name
        self._cache: dict = {}

    @property
    def nlvl(self) -> int:
        return len(self.graphs) - 1

    @property
    def terminal(self) -> Const:
        return TRUE if self.nlvl % 2 == 0 else FALSE

    @property
    def tg(self):
        return self.graphs[-1].tg

    def graph(self, k: int) -> Graph:
        return self.graphs[k]

    def morphism(self, k: int) -> Morphism:
        """The inclusion ``a_k: C_k ↪ C_{k+1}``."""
        key = ("a", k)
        if key not in self._cache:
            self._cache[key] = Morphism.inclusion(self.graphs[k], self.graphs[k + 1])
        return self._cache[key]

    @staticmethod
    def is_universal(k: int) -> bool:
        """Whether ``C_k`` is universally bound."""
        return k % 2 == 1

    @staticmethod
    def is_existential(k: int) -> bool:
        """Whether ``C_k`` is existentially bound."""
        return k >= 2 and k % 2 == 0

    def chain(self, start: int, stop: int, last: Condition) -> Condition:
        """``Q_start(a_start, ..., Q_{stop-1}(a_{stop-1}, last))``, rooted at ``C_start``."""
        key = ("chain", start, stop, last)
        if key in self._cache:
            return self._cache[key]
        c = last
        for k in range(stop - 1, start - 1, -1):
            c = (Forall if k % 2 == 0 else Exists)(self.morphism(k), c)
        self._cache[key] = c
        return c

    @property
    def condition(self) -> Condition:
        return self.chain(0, self.nlvl, self.terminal)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UANFConstraint) and self.graphs == other.graphs

    def __hash__(self) -> int:
        return hash(self.graphs)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<UANFConstraint{label} nlvl={self.nlvl} {self.condition!r}>"


def subcondition_at_layer(c: UANFConstraint, k: int) -> Condition:
    """The subcondition of layer ``k`` (rooted at ``C_k``); true for ``k = -1``."""
    if not -1 <= k <= c.nlvl:
        raise ValueError(f"layer {k} out of range [-1, {c.nlvl}]")
    if k == -1:
        return TRUE
    return c.chain(k, c.nlvl, c.terminal)


def replace_from_layer(c: UANFConstraint, k: int, e: Condition) -> Condition:
    """Replace the subcondition at layer ``k`` by ``e`` (rooted at ``C_k``)."""
    if not 0 <= k <= c.nlvl:
        raise ValueError(f"layer {k} out of range [0, {c.nlvl}]")
    if isinstance(e, (Exists, Forall)) and e.a.dom.key != c.graph(k).key:
        raise ValueError(f"replacement is not rooted at C_{k}")
    return c.chain(0, k, e)


def truncate_after_layer(c: UANFConstraint, k: int) -> Condition:
    """The truncated condition ``cut_k(c)``."""
    if not -1 <= k < c.nlvl:
        raise ValueError(f"layer {k} out of range [-1, {c.nlvl})")
    if k == -1:
        return TRUE
    return c.chain(0, k + 1, TRUE if k % 2 == 1 else FALSE)


def satisfies_up_to_layer(p: Morphism, c: UANFConstraint, k: int) -> bool:
    return satisfies(p, truncate_after_layer(c, k))


def graph_satisfies_up_to_layer(g: Graph, c: UANFConstraint, k: int) -> bool:
    return satisfies(Morphism.empty(g), truncate_after_layer(c, k))


def kmax(g: Graph, c: UANFConstraint) -> int:
    """The largest layer ``k`` with ``g ⊨_k c``.

    Only odd layers need checking: satisfaction up to an even layer implies
    satisfaction of ``c``.  When every odd layer up to ``nlvl - 1`` holds but
    ``c`` does not (possible for odd ``nlvl``), the last odd layer is returned.
    """
    if graph_satisfies(g, c):
        return c.nlvl - 1
    last = -1
    i = -1
    while i <= c.nlvl - 1:
        if not graph_satisfies_up_to_layer(g, c, i):
            return i - 2
        last = i
        i += 2
    return last


def _check_odd(c: UANFConstraint, k: int, lo: int, hi: int) -> None:
    if k % 2 != 1 or not lo <= k <= hi:
        raise ValueError(f"layer {k} must be odd and within [{lo}, {hi}]")


def intermediate_condition(c: UANFConstraint, k: int, cp: Graph) -> Condition:
    """``repl(k, c, ∃(C_k ↪ cp, true))`` for odd ``k`` and ``cp ∈ ig(C_k, C_{k+1})``."""
    _check_odd(c, k, 0, c.nlvl - 1)
    lo, hi = c.graph(k), c.graph(k + 1)
    if not (lo.is_subgraph_of(cp) and cp.is_subgraph_of(hi) and len(cp) > len(lo)):
        raise ValueError("cp is not an intermediate graph of C_k and C_{k+1}")
    return replace_from_layer(c, k, Exists(Morphism.inclusion(lo, cp), TRUE))


def next_graph_condition(c: UANFConstraint, k: int) -> Condition:
    """``cut_0(sub_{k+2}(c))`` rooted at ``C_{k+2}``: ``∃(C_{k+2} ↪ C_{k+3}, true)``,
    or false when ``C_{k+2}`` is the last graph of a chain ending in false."""
    j = k + 2
    if j == c.nlvl:
        return c.terminal
    return Exists(c.morphism(j), TRUE)


def intermediate_targets(c: UANFConstraint, j: int) -> list[Graph]:
    """``ig(C_j, C_{j+1})``, cached per constraint."""
    key = ("ig", j)
    if key not in c._cache:
        c._cache[key] = intermediate_graphs(c.graph(j), c.graph(j + 1))
    return c._cache[key]


def number_of_violations(g: Graph, c: UANFConstraint, j: int, k_max: int | None = None):
    """The violation count ``nv_j(g)``; returns :data:`INF` above the first unsatisfied layer."""
    if not -1 <= j < c.nlvl:
        raise ValueError(f"layer {j} out of range [-1, {c.nlvl})")
    km = kmax(g, c) if k_max is None else k_max
    if j < km + 1:
        return 0
    if j > km + 1:
        return INF
    e = next_graph_condition(c, km)
    occ = enumerate_monomorphisms(c.graph(j + 1), g)
    if e == FALSE:
        return len(occ)
    total = 0
    for cp in intermediate_targets(c, j + 1):
        a = Morphism.inclusion(c.graph(j + 1), cp)
        total += sum(1 for q in occ if next(extensions(a, q), None) is None)
    return total


def violation_vector(g: Graph, c: UANFConstraint) -> list:
    """``[nv_{-1}, nv_0, ..., nv_{nlvl-1}]``."""
    km = kmax(g, c)
    return [number_of_violations(g, c, j, km) for j in range(-1, c.nlvl)]


def is_potentially_increasing(p: Morphism, c: UANFConstraint, k: int) -> bool:
    """Whether the occurrence ``p: C_{k+2} -> G`` is potentially increasing at layer ``k``.

    It must violate ``∃(C_{k+2} ↪ C_{k+3})`` (or simply exist, when the chain
    ends there in false) while every restriction ``p|C_{i+1}`` with
    ``0 ≤ i ≤ k`` satisfies the corresponding truncated subcondition.
    """
    _check_odd(c, k, -1, c.nlvl - 2)
    top = c.graph(k + 2)
    if p.dom.key != top.key:
        raise ValueError(f"occurrence is not rooted at C_{k + 2}")
    if satisfies(p, next_graph_condition(c, k)):
        return False
    for i in range(0, k + 1):
        sub = c.chain(i + 1, k + 1, TRUE)
        if not satisfies(p @ Morphism.inclusion(c.graph(i + 1), top), sub):
            return False
    return True


def potentially_increasing_occurrences(g: Graph, c: UANFConstraint, k: int) -> list[Morphism]:
    """Every potentially increasing occurrence of ``C_{k+2}`` in ``g``, in canonical order."""
    _check_odd(c, k, -1, c.nlvl - 2)
    return [p for p in enumerate_monomorphisms(c.graph(k + 2), g) if is_potentially_increasing(p, c, k)]


def _flatten(c: Condition) -> tuple[list[list], bool]:
    quants: list[list] = []
    while isinstance(c, (Exists, Forall)):
        quants.append([isinstance(c, Forall), c.a])
        c = c.sub
    if not isinstance(c, Const):
        raise ValueError("not in ANF: quantifier chains may only end in true or false")
    if not quants:
        raise ValueError("a constant condition has no UANF form")
    if not quants[0][1].dom.is_empty():
        raise ValueError("not a constraint: root graph is not empty")
    for (_, a), (_, b) in zip(quants, quants[1:]):
        if a.cod.key != b.dom.key:
            raise ValueError("not in ANF: anchors do not chain")
        if not (a.is_total and a.is_injective):
            raise ValueError("not in ANF: anchors must be total and injective")
    return quants, c.value


def to_uanf(c: Condition | UANFConstraint, name: str = "") -> UANFConstraint:
    """Normalize a quantifier-chain constraint to an equivalent UANF chain.

    Endings ``∃(a, false)`` and ``∀(a, true)`` are folded to constants,
    neighbouring quantifiers of the same kind are merged by composition,
    inner bijective anchors are composed into their successor, and a leading
    existential is wrapped as ``∀(id_∅, ·)``.  Graph ids are renamed so
    consecutive graphs are related by identity inclusions.

    Raises:
        ValueError: if ``c`` is not a quantifier chain over the empty graph or
            normalizes to a constant.
    """
    if isinstance(c, UANFConstraint):
        return c
    quants, term = _flatten(c)
    changed = True
    while changed:
        changed = False
        if quants and quants[-1][0] == term:
            # ∀(a, true) ≡ true and ∃(a, false) ≡ false.
            quants.pop()
            changed = True
            continue
        for i in range(len(quants) - 1):
            if quants[i][0] == quants[i + 1][0]:
                quants[i : i + 2] = [[quants[i][0], quants[i + 1][1] @ quants[i][1]]]
                changed = True
                break
        if changed:
            continue
        for i, (univ, a) in enumerate(quants):
            if a.is_bijective and (i >= 1 or not univ):
                if i + 1 < len(quants):
                    quants[i + 1][1] = quants[i + 1][1] @ a
                del quants[i]
                changed = True
                break
    if not quants:
        raise ValueError("the condition normalizes to a constant and has no UANF form")
    if not quants[0][0]:
        e = quants[0][1].dom
        quants.insert(0, [True, Morphism.identity(e)])
    return UANFConstraint(_rename_chain([a for _, a in quants]), name)


def _rename_chain(anchors: list[Morphism]) -> list[Graph]:
    first = anchors[0].dom
    graphs = [first]
    phi_n = {n: n for n in first.nodes}
    phi_e = {e: e for e in first.edges}
    for a in anchors:
        prev = graphs[-1]
        back_n = {y: x for x, y in a.nodes.items()}
        back_e = {y: x for x, y in a.edges.items()}
        new_n: dict[int, int] = {}
        nodes = dict(prev.nodes)
        nxt = prev.next_node_id()
        for y, typ in a.cod.nodes.items():
            if y in back_n:
                new_n[y] = phi_n[back_n[y]]
            else:
                new_n[y] = nxt
                nodes[nxt] = typ
                nxt += 1
        new_e: dict[int, int] = {}
        edges = dict(prev.edges)
        nxt = prev.next_edge_id()
        for y, (s, t, lab) in a.cod.edges.items():
            if y in back_e:
                new_e[y] = phi_e[back_e[y]]
            else:
                new_e[y] = nxt
                edges[nxt] = (new_n[s], new_n[t], lab)
                nxt += 1
        graphs.append(Graph(prev.tg, nodes, edges))
        phi_n, phi_e = new_n, new_e
    return graphs


def uanf_from_graphs(graphs: Sequence[Graph], name: str = "") -> UANFConstraint:
    """Build a constraint from a chain ``C_1 ⊊ C_2 ⊊ ...`` (``C_0 = ∅`` is prepended)."""
    return UANFConstraint([graphs[0].empty(), *graphs], name)


def has_extension(a: Morphism, p: Morphism) -> bool:
    return next(extensions(a, p), None) is not None


def occurrences(pattern: Graph, host: Graph) -> list[Morphism]:
    return enumerate_monomorphisms(pattern, host)


__all__ = [
    "Condition",
    "Const",
    "TRUE",
    "FALSE",
    "Exists",
    "Forall",
    "Not",
    "And",
    "Or",
    "conj",
    "disj",
    "neg",
    "size",
    "satisfies",
    "graph_satisfies",
    "shift_over_morphism",
    "INF",
    "UANFConstraint",
    "subcondition_at_layer",
    "replace_from_layer",
    "truncate_after_layer",
    "satisfies_up_to_layer",
    "graph_satisfies_up_to_layer",
    "kmax",
    "intermediate_condition",
    "next_graph_condition",
    "intermediate_targets",
    "number_of_violations",
    "violation_vector",
    "potentially_increasing_occurrences",
    "to_uanf",
    "uanf_from_graphs",
    "has_extension",
    "find_morphisms",
]
