"""Brute-force reference implementations used to check the library.

Nothing here calls the library's matcher, evaluator, overlap or intermediate
graph code; graphs are read through their plain ``nodes``/``edges`` dicts.
"""

from __future__ import annotations

from itertools import combinations, permutations, product

from grafrepair.conditions import And, Const, Exists, Forall, Not, Or


def monos(p, h):
    """Every injective typed morphism ``p -> h`` as ``(node_map, edge_map)``."""
    pn = list(p.nodes)
    out = []
    for img in permutations(h.nodes, len(pn)):
        nm = dict(zip(pn, img))
        if any(p.nodes[v] != h.nodes[nm[v]] for v in pn):
            continue
        options = []
        for e, (s, t, lab) in p.edges.items():
            options.append([f for f, ed in h.edges.items() if ed == (nm[s], nm[t], lab)])
        for choice in product(*options):
            if len(set(choice)) == len(choice):
                out.append((nm, dict(zip(p.edges, choice))))
    return out


def count_monos(p, h) -> int:
    return len(monos(p, h))


def holds(cond, g, nm=None, em=None) -> bool:
    """``(nm, em) ⊨ cond`` where the maps send ``cond``'s root graph into ``g``."""
    nm, em = nm or {}, em or {}
    if isinstance(cond, Const):
        return cond.value
    if isinstance(cond, Not):
        return not holds(cond.sub, g, nm, em)
    if isinstance(cond, And):
        return all(holds(x, g, nm, em) for x in cond.parts)
    if isinstance(cond, Or):
        return any(holds(x, g, nm, em) for x in cond.parts)
    a = cond.a
    ext = []
    for qn, qe in monos(a.cod, g):
        if all(qn[a.nodes[v]] == nm[v] for v in a.dom.nodes) and all(qe[a.edges[e]] == em[e] for e in a.dom.edges):
            ext.append((qn, qe))
    if isinstance(cond, Exists):
        return any(holds(cond.sub, g, qn, qe) for qn, qe in ext)
    if isinstance(cond, Forall):
        return all(holds(cond.sub, g, qn, qe) for qn, qe in ext)
    raise TypeError(cond)


def chain(c, upto: int, last):
    """The quantifier chain over ``C_1 .. C_upto`` of ``c`` ending in ``last``."""
    from grafrepair.graph import Morphism

    cond = last
    for i in range(upto, 0, -1):
        a = Morphism.inclusion(c.graph(i - 1), c.graph(i))
        cond = (Forall if i % 2 == 1 else Exists)(a, cond)
    return cond


def cut(c, k: int):
    if k == -1:
        return Const(True)
    return chain(c, k + 1, Const(k % 2 == 1))


def satisfies(g, c) -> bool:
    return holds(chain(c, c.nlvl, Const(c.nlvl % 2 == 0)), g)


def kmax(g, c) -> int:
    return max(k for k in range(-1, c.nlvl) if holds(cut(c, k), g))


def subgraphs_between(lo, hi):
    """Every well-formed ``X`` with ``lo ⊊ X ⊆ hi``, as ``(nodes, edges)`` frozensets."""
    extra_n = [n for n in hi.nodes if n not in lo.nodes]
    extra_e = [e for e in hi.edges if e not in lo.edges]
    out = set()
    for r in range(len(extra_n) + 1):
        for ns in combinations(extra_n, r):
            nodes = set(lo.nodes) | set(ns)
            ok_e = [e for e in extra_e if hi.edges[e][0] in nodes and hi.edges[e][1] in nodes]
            for s in range(len(ok_e) + 1):
                for es in combinations(ok_e, s):
                    if ns or es:
                        out.add((frozenset(nodes), frozenset(set(lo.edges) | set(es))))
    return out


def _partial_injections(xs, ys, ok):
    """Partial injective maps ``xs ⇀ ys`` with ``ok(x, y)`` on every pair."""
    xs = list(xs)

    def go(i, used, acc):
        if i == len(xs):
            yield dict(acc)
            return
        yield from go(i + 1, used, acc)
        for y in ys:
            if y not in used and ok(xs[i], y):
                acc.append((xs[i], y))
                yield from go(i + 1, used | {y}, acc)
                acc.pop()

    yield from go(0, frozenset(), [])


def overlap_identifications(g1, g2):
    """Non-empty type-compatible partial identifications of ``g1`` with ``g2``.

    Each corresponds to exactly one overlap up to isomorphism of cospans.
    """
    out = []
    for phi in _partial_injections(g1.nodes, list(g2.nodes), lambda a, b: g1.nodes[a] == g2.nodes[b]):

        def edge_ok(e, f, phi=phi):
            s, t, lab = g1.edges[e]
            s2, t2, lab2 = g2.edges[f]
            return lab == lab2 and phi.get(s) == s2 and phi.get(t) == t2

        for psi in _partial_injections(g1.edges, list(g2.edges), edge_ok):
            if phi or psi:
                out.append((phi, psi))
    return out


def overlap_sizes(g1, g2):
    """Sorted ``(nodes, edges)`` sizes of every overlap graph."""
    n1, e1 = len(g1.nodes), len(g1.edges)
    n2, e2 = len(g2.nodes), len(g2.edges)
    return sorted((n1 + n2 - len(phi), e1 + e2 - len(psi)) for phi, psi in overlap_identifications(g1, g2))


def topological_ok(order, edges) -> bool:
    pos = {n: i for i, n in enumerate(order)}
    return all(pos[s] < pos[t] for s, t in edges)


def conflict_edges(nlvl: int, pairs) -> set:
    """Edges by the index rule: ``k = k'`` or ``k = k' + 1``, likewise for ``j``."""
    out = set()
    for k, j in pairs:
        for kp in range(nlvl):
            for jp in range(nlvl):
                if kp != jp and k in (kp, kp + 1) and j in (jp, jp + 1):
                    out.add((kp, jp))
    return out


def _touches(nm, em, nodes, edges) -> bool:
    return bool(set(nm.values()) & nodes or set(em.values()) & edges)


def insertion_creates(lo, hi, pat, g) -> bool:
    """Gluing ``hi ∖ lo`` onto some occurrence of ``lo`` in ``g`` yields a new ``pat``."""
    from grafrepair.graph import Graph

    for nm, em in monos(lo, g):
        n0 = max(g.nodes, default=-1) + 1
        e0 = max(g.edges, default=-1) + 1
        place = dict(nm)
        nodes, edges = dict(g.nodes), dict(g.edges)
        for i, v in enumerate(v for v in hi.nodes if v not in lo.nodes):
            place[v] = n0 + i
            nodes[n0 + i] = hi.nodes[v]
        fresh_e = set()
        for i, e in enumerate(e for e in hi.edges if e not in lo.edges):
            s, t, lab = hi.edges[e]
            edges[e0 + i] = (place[s], place[t], lab)
            fresh_e.add(e0 + i)
        h = Graph(g.tg, nodes, edges)
        fresh_n = set(nodes) - set(g.nodes)
        if any(_touches(pn, pe, fresh_n, fresh_e) for pn, pe in monos(pat, h)):
            return True
    return False


def deletion_destroys(hi, base, pat, g) -> bool:
    """Deleting ``hi ∖ base`` at some occurrence of ``hi`` in ``g`` removes a ``pat``."""
    for nm, em in monos(hi, g):
        dn = {nm[v] for v in hi.nodes if v not in base.nodes}
        de = {em[e] for e in hi.edges if e not in base.edges}
        if any((s in dn or t in dn) and e not in de for e, (s, t, _) in g.edges.items()):
            continue  # dangling
        if any(_touches(pn, pe, dn, de) for pn, pe in monos(pat, g)):
            return True
    return False


def causes_conflict(c, k: int, j: int, hosts) -> bool:
    """Search ``hosts`` for a repair step at ``C_k`` that disturbs ``C_j``."""
    lo, ck, cj = c.graph(k - 1), c.graph(k), c.graph(j)
    if k % 2 == 0:
        return any(insertion_creates(lo, ck, cj, g) for g in hosts)
    bases = [lo] + [b for b in _between_graphs(lo, ck) if len(b.nodes) + len(b.edges) < len(ck.nodes) + len(ck.edges)]
    return any(deletion_destroys(ck, b, cj, g) for b in bases for g in hosts)


def _between_graphs(lo, hi):
    from grafrepair.graph import Graph

    for ns, es in subgraphs_between(lo, hi):
        yield Graph(hi.tg, {n: hi.nodes[n] for n in ns}, {e: hi.edges[e] for e in es})
