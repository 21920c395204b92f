"""Repairing sequences, repairing rule sets and the rule-based repair loops."""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .conditions import (
    INF,
    UANFConstraint,
    graph_satisfies,
    graph_satisfies_up_to_layer,
    has_extension,
    is_potentially_increasing,
    kmax,
    number_of_violations,
    potentially_increasing_occurrences,
    violation_vector,
)
from .conflicts import (
    _basic_wrt,
    causes_conflict,
    constraint_order,
    is_circular_conflict_free,
)
from .graph import Graph, Morphism
from .matching import enumerate_monomorphisms, find_morphisms
from .overlaps import intermediate_graphs
from .rewrite import (
    NotApplicable,
    PlainRule,
    Transformation,
    apply,
    as_rule,
    concurrent_rule,
    sequence_track,
    transformations,
)


def satisfies_layer(g: Graph, c: UANFConstraint, k: int) -> bool:
    """``g ⊨_k c``; layers at or beyond ``nlvl - 1`` mean plain satisfaction."""
    if k >= c.nlvl - 1:
        return graph_satisfies(g, c)
    return graph_satisfies_up_to_layer(g, c, k)


def anchor_index(c: UANFConstraint, k: int) -> int:
    """Where a repairing sequence for ``C_k`` starts: ``k - 1`` if existential, else ``k``."""
    if not 1 <= k <= c.nlvl:
        raise ValueError(f"graph index {k} out of range [1, {c.nlvl}]")
    return k - 1 if c.is_existential(k) else k


def _kind(c: UANFConstraint, k: int) -> str:
    return "existential" if c.is_existential(k) else "universal"


@dataclass(frozen=True, eq=False)
class RepairingSequence:
    """A chained transformation sequence repairing the graph ``C_target`` of a constraint."""

    target: int
    kind: str
    steps: tuple[Transformation, ...]

    def __post_init__(self):
        if self.kind not in ("existential", "universal"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if not self.steps:
            raise ValueError("a repairing sequence needs at least one step")

    @property
    def anchor(self) -> Graph:
        return self.steps[0].G

    @property
    def result(self) -> Graph:
        return self.steps[-1].H

    @property
    def rules(self) -> list[PlainRule]:
        return [t.rule.plain for t in self.steps]

    @cached_property
    def concurrent(self) -> PlainRule:
        return concurrent_rule(self.steps)

    @cached_property
    def track(self) -> Morphism:
        return sequence_track(self.steps)

    def describe(self) -> str:
        names = " => ".join(t.rule.name or "rule" for t in self.steps)
        return f"C_{self.target} ({self.kind}): {names}"


def build_sequence(c: UANFConstraint, k: int, steps: Iterable[tuple]) -> RepairingSequence:
    """Apply ``(rule, node_map, edge_map)`` steps starting from the anchor graph of ``C_k``.

    Each match maps the rule's left-hand side into the current graph.
    """
    g = c.graph(anchor_index(c, k))
    out = []
    for rule, nodes, edges in steps:
        rule = as_rule(rule)
        m = Morphism(rule.L, g, nodes, edges)
        t = apply(rule, m)
        out.append(t)
        g = t.H
    return RepairingSequence(k, _kind(c, k), tuple(out))


@dataclass
class Validation:
    ok: bool
    reasons: list[str] = field(default_factory=list)
    shortcut: bool = False

    def __bool__(self) -> bool:
        return self.ok

    def as_dict(self) -> dict:
        return {"ok": self.ok, "reasons": list(self.reasons), "shortcut": self.shortcut}


def _lands_on(seq: RepairingSequence, lo: Graph, hi: Graph) -> bool:
    """Whether the result is ``hi`` up to an isomorphism agreeing with the track on ``lo``."""
    res = seq.result
    if len(res.nodes) != len(hi.nodes) or len(res.edges) != len(hi.edges):
        return False
    tr = seq.track
    fn = {x: tr.nodes[x] for x in lo.nodes}
    fe = {x: tr.edges[x] for x in lo.edges}
    return next(find_morphisms(hi, res, fn, fe), None) is not None


def validate_repairing_sequence(seq: RepairingSequence, c: UANFConstraint, k: int | None = None) -> Validation:
    """Check the clauses of a repairing sequence for ``C_k``.

    The basic-maintaining side conditions are skipped when the sequence lands
    exactly on ``C_k`` (existential) or on a graph between ``C_{k-1}`` and
    ``C_k`` (universal), where they hold by construction.

    Raises:
        ValueError: if the transformations are not chained.
    """
    k = seq.target if k is None else k
    reasons: list[str] = []
    a = anchor_index(c, k)
    concurrent = seq.concurrent  # raises on unchained input
    if seq.target != k:
        reasons.append(f"sequence is registered for C_{seq.target}, not C_{k}")
    if seq.kind != _kind(c, k):
        reasons.append(f"C_{k} is {_kind(c, k)}ly bound but the sequence is {seq.kind}")
    if seq.anchor.key != c.graph(a).key:
        return Validation(False, reasons + [f"sequence does not start at C_{a}"])
    anchor = c.graph(a)
    existential = c.is_existential(k)
    if existential:
        tr = Morphism.identity(anchor)
        for i, t in enumerate(seq.steps, 1):
            tr = t.track @ tr
            if not tr.is_total:
                reasons.append(f"the track of C_{a} is not total after step {i}")
                break
    else:
        tr = seq.track
        lost = [v for v in anchor.nodes if v not in tr.nodes]
        if lost:
            reasons.append(f"nodes {lost} of C_{k} are deleted")
    if not satisfies_layer(seq.result, c, k):
        reasons.append(f"the final graph does not satisfy the constraint up to layer {k}")
    shortcut = False
    if not reasons:
        if existential:
            shortcut = _lands_on(seq, anchor, c.graph(k))
        else:
            shortcut = concurrent.deletes() and not concurrent.creates() and c.graph(k - 1).is_subgraph_of(concurrent.K)
    if not reasons and not shortcut:
        for j in range(1, c.nlvl + 1, 2):
            g = c.graph(j)
            if g.is_empty() or (existential and causes_conflict(c, k, j)):
                continue
            if not _basic_wrt(concurrent, g, True):
                reasons.append(f"the concurrent rule is not basic consistency-maintaining for ∀(C_{j}, false)")
    return Validation(not reasons, reasons, shortcut)


@dataclass
class RepairingSet:
    """A rule set with the repairing sequences registered for one constraint."""

    rules: tuple[PlainRule, ...]
    sequences: dict[int, RepairingSequence] = field(default_factory=dict)

    def sequence_for(self, k: int) -> RepairingSequence | None:
        return self.sequences.get(k)


def required_graphs(c: UANFConstraint) -> list[int]:
    """Indices that need a repairing sequence: every existential graph and, for odd
    ``nlvl``, the last graph."""
    out = [k for k in range(2, c.nlvl + 1, 2)]
    if c.nlvl % 2 == 1:
        out.append(c.nlvl)
    return out


def edgeless_universal(c: UANFConstraint) -> bool:
    """``c = ∀(C_1, false)`` with no edges in ``C_1``: nothing can repair it."""
    return c.nlvl == 1 and not c.graph(1).edges


EDGELESS_REASON = "∀(C_1, false) with an edgeless C_1 has no repairing set"


def validate_repairing_set(rs: RepairingSet, c: UANFConstraint) -> Validation:
    reasons: list[str] = []
    if edgeless_universal(c):
        return Validation(False, [EDGELESS_REASON])
    if not is_circular_conflict_free(c):
        reasons.append("the constraint is not circular conflict free")
    for k in required_graphs(c):
        if k not in rs.sequences:
            reasons.append(f"missing repairing sequence for C_{k}")
    known = set(rs.rules)
    for k, seq in sorted(rs.sequences.items()):
        v = validate_repairing_sequence(seq, c, k)
        reasons += [f"C_{k}: {r}" for r in v.reasons]
        foreign = [r.name or "rule" for r in seq.rules if r not in known]
        if foreign:
            reasons.append(f"C_{k}: steps use rules outside the set: {foreign}")
    return Validation(not reasons, reasons)


def validate_for_set(sets: Sequence[RepairingSet], constraints: Sequence[UANFConstraint]) -> Validation:
    if len(sets) != len(constraints):
        return Validation(False, ["need one repairing set per constraint"])
    reasons = []
    for i, (rs, c) in enumerate(zip(sets, constraints)):
        label = c.name or f"c{i}"
        reasons += [f"{label}: {r}" for r in validate_repairing_set(rs, c).reasons]
    return Validation(not reasons, reasons)


# Searching a rule set for repairing sequences.


def find_repairing_sequence(c: UANFConstraint, k: int, rules: Sequence[PlainRule], max_steps: int = 3) -> RepairingSequence | None:
    """The first valid repairing sequence for ``C_k`` in breadth-first order, or None."""
    a = anchor_index(c, k)
    anchor = c.graph(a)
    kind = _kind(c, k)
    queue: deque[tuple[Transformation, ...]] = deque([()])
    while queue:
        prefix = queue.popleft()
        g = prefix[-1].H if prefix else anchor
        for rule in rules:
            for t in transformations(rule, g):
                seq = prefix + (t,)
                tr = sequence_track(seq)
                if kind == "existential":
                    if not all(x in tr.nodes for x in anchor.nodes) or not all(x in tr.edges for x in anchor.edges):
                        continue
                elif not all(x in tr.nodes for x in anchor.nodes):
                    continue
                cand = RepairingSequence(k, kind, seq)
                if validate_repairing_sequence(cand, c, k):
                    return cand
                if len(seq) < max_steps:
                    queue.append(seq)
    return None


def repairing_set_from_rules(c: UANFConstraint, rules: Sequence[PlainRule], max_steps: int = 3) -> RepairingSet:
    """Register the first repairing sequence found for every graph of ``c``."""
    seqs = {}
    for k in range(1, c.nlvl + 1):
        if c.graph(k).is_empty():
            continue
        s = find_repairing_sequence(c, k, rules, max_steps)
        if s is not None:
            seqs[k] = s
    return RepairingSet(tuple(rules), seqs)


# The constructed repairing set.


def _ladder(lo: Graph, hi: Graph) -> list[Graph]:
    """Graphs from ``lo`` to ``hi`` adding one element at a time, nodes first."""
    out = [lo]
    cur = lo
    for n in sorted(x for x in hi.nodes if x not in lo.nodes):
        cur = hi.subgraph(list(cur.nodes) + [n], list(cur.edges))
        out.append(cur)
    for e in sorted(x for x in hi.edges if x not in lo.edges):
        cur = hi.subgraph(list(cur.nodes), list(cur.edges) + [e])
        out.append(cur)
    return out


def _run_ladder(rules: dict, lo: Graph, hi: Graph, g: Graph, p: Morphism) -> list[Transformation]:
    """Apply the single-element insertion rules from ``lo`` to ``hi`` at ``p: lo -> g``."""
    steps = []
    emb = p
    chain = _ladder(lo, hi)
    for x, y in zip(chain, chain[1:]):
        rule = rules[(x.key, x.key, y.key)]
        m = Morphism(rule.L, g, emb.nodes, emb.edges)
        t = apply(rule, m)
        created_n = {v: t.comatch.nodes[v] for v in rule.created_nodes}
        created_e = {e: t.comatch.edges[e] for e in rule.created_edges}
        emb = Morphism(y, t.H, {v: t.track.nodes[w] for v, w in emb.nodes.items()} | created_n,
                       {e: t.track.edges[w] for e, w in emb.edges.items()} | created_e)
        steps.append(t)
        g = t.H
    return steps


def constructed_rules(c: UANFConstraint) -> list[PlainRule]:
    """Insertion rules between graphs of ``{C_{k-1}} ∪ ig(C_{k-1}, C_k)`` for existential
    ``C_k``; deletion rules between graphs of ``ig(C_{k-1}, C_k)`` for universal ``C_k``,
    plus node-preserving deletions down to ``C_{k-1}``."""
    seen: dict[tuple, PlainRule] = {}
    for k in range(1, c.nlvl + 1):
        lo, hi = c.graph(k - 1), c.graph(k)
        family = [lo] + intermediate_graphs(lo, hi)
        for i, small in enumerate(family):
            for big in family[i + 1:]:
                if big == small or not small.is_subgraph_of(big):
                    continue
                if c.is_existential(k):
                    rule = PlainRule(small, small, big, f"ins{k}_{len(seen)}")
                else:
                    if small is lo and set(small.nodes) != set(big.nodes):
                        continue
                    rule = PlainRule(big, small, small, f"del{k}_{len(seen)}")
                seen.setdefault((rule.L.key, rule.K.key, rule.R.key), rule)
    return list(seen.values())


def construct_repairing_set(c: UANFConstraint, max_fixups: int = 32) -> RepairingSet:
    """Build the constructed repairing set and one validated sequence per graph.

    Raises:
        ValueError: if ``c`` is not circular conflict free, is an edgeless
            ``∀(C_1, false)``, or no valid sequence can be assembled.
    """
    if edgeless_universal(c):
        raise ValueError(EDGELESS_REASON)
    if not is_circular_conflict_free(c):
        raise ValueError("the constructed repairing set needs a circular conflict free constraint")
    rules = constructed_rules(c)
    index = {(r.L.key, r.K.key, r.R.key): r for r in rules}
    seqs: dict[int, RepairingSequence] = {}
    for k in range(1, c.nlvl + 1):
        if c.graph(k).is_empty():
            continue
        if c.is_existential(k):
            seq = _construct_existential(c, k, index, max_fixups)
        else:
            seq = _construct_universal(c, k, index)
        if seq is None:
            if k in required_graphs(c):
                raise ValueError(f"no valid repairing sequence could be assembled for C_{k}")
            continue
        seqs[k] = seq
    return RepairingSet(tuple(rules), seqs)


def _construct_existential(c: UANFConstraint, k: int, index: dict, max_fixups: int) -> RepairingSequence | None:
    lo, hi = c.graph(k - 1), c.graph(k)
    steps = _run_ladder(index, lo, hi, lo, Morphism.identity(lo))
    g = steps[-1].H
    # Newly created universal occurrences are completed towards the next graph.
    for _ in range(max_fixups):
        if satisfies_layer(g, c, k):
            break
        km = kmax(g, c)
        j = km + 2
        occ = potentially_increasing_occurrences(g, c, km) if j < k else []
        if not occ:
            return None
        more = _run_ladder(index, c.graph(j), c.graph(j + 1), g, occ[0])
        steps += more
        g = more[-1].H
    seq = RepairingSequence(k, "existential", tuple(steps))
    return seq if validate_repairing_sequence(seq, c, k) else None


def _construct_universal(c: UANFConstraint, k: int, index: dict) -> RepairingSequence | None:
    hi = c.graph(k)
    cands = [r for r in index.values() if r.L.key == hi.key and not r.created_nodes and not r.created_edges]
    cands = [r for r in cands if set(r.K.nodes) == set(hi.nodes)]
    cands.sort(key=lambda r: (-len(r.K), sorted(r.K.edges)))
    for rule in cands:
        t = apply(rule, Morphism.identity(hi))
        seq = RepairingSequence(k, "universal", (t,))
        if validate_repairing_sequence(seq, c, k):
            return seq
    return None


# Applying sequences.


def apply_sequence_at(seq: RepairingSequence, p: Morphism) -> Transformation:
    """Apply the concurrent rule of ``seq`` at the occurrence ``p`` of its anchor graph."""
    if p.dom.key != seq.anchor.key:
        raise ValueError("the occurrence is not rooted at the sequence's anchor graph")
    try:
        return apply(seq.concurrent, p)
    except NotApplicable as exc:  # valid sequences are applicable everywhere
        raise RuntimeError(f"internal error: {seq.describe()} is not applicable: {exc}") from exc


def apply_sequence_stepwise(seq: RepairingSequence, p: Morphism) -> Graph:
    """Replay each step of ``seq`` at ``p``; the result matches :func:`apply_sequence_at`."""
    emb = p
    host = p.cod
    for t in seq.steps:
        m = emb @ t.match
        ht = apply(t.rule.plain, m)
        nodes, edges = {}, {}
        for x, y in t.track.nodes.items():
            if emb.nodes.get(x) is not None:
                nodes[y] = ht.track.nodes[emb.nodes[x]]
        for x, y in t.track.edges.items():
            if emb.edges.get(x) is not None:
                edges[y] = ht.track.edges[emb.edges[x]]
        for v in t.rule.plain.created_nodes:
            nodes[t.comatch.nodes[v]] = ht.comatch.nodes[v]
        for e in t.rule.plain.created_edges:
            edges[t.comatch.edges[e]] = ht.comatch.edges[e]
        emb = Morphism(t.H, ht.H, nodes, edges)
        host = ht.H
    return host


# Repair loops.


def _okey(p: Morphism) -> tuple:
    return (tuple(sorted(p.nodes.items())), tuple(sorted(p.edges.items())))


def _nv_snapshot(g: Graph, c: UANFConstraint) -> list:
    return ["inf" if v == INF else v for v in violation_vector(g, c)]


@dataclass
class RepairTrace:
    events: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def applications(self) -> int:
        return sum(1 for e in self.events if e.get("event") == "apply")

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n" for e in self.events)


class IterationCapExceeded(RuntimeError):
    pass


def iteration_bound(g: Graph, c: UANFConstraint) -> int:
    """A safety cap on sequence applications (not a proved bound)."""
    return 100 + 20 * (c.nlvl + 1) * (len(g) + 1) ** 2


def _choose_sequence(rs: RepairingSet, c: UANFConstraint, j: int, r: int) -> tuple[RepairingSequence, int]:
    """Branch 0 destroys the occurrence of ``C_j``; branch 1 extends it to ``C_{j+1}``.
    The missing branch falls through to the other one."""
    destroy = rs.sequence_for(j)
    extend = rs.sequence_for(j + 1) if j + 1 <= c.nlvl else None
    if r == 0 and destroy is not None:
        return destroy, 0
    if extend is not None:
        return extend, 1
    if destroy is not None:
        return destroy, 0
    raise RuntimeError(f"the repairing set has no sequence for C_{j} or C_{j + 1}")


def _affected(c: UANFConstraint, t: Transformation, bound: int) -> list[tuple[int, Morphism]]:
    """Occurrences of universal ``C_j`` (``j < bound``) that ``t`` left potentially increasing:
    new ones, and tracked ones that lost their ``C_{j+1}`` extension."""
    out = []
    for j in range(1, min(bound, c.nlvl + 1), 2):
        cj = c.graph(j)
        if cj.is_empty():
            continue
        old = {}
        for q in enumerate_monomorphisms(cj, t.G):
            q2 = t.track @ q
            if q2.is_total:
                old[_okey(q2)] = q
        for q in enumerate_monomorphisms(cj, t.H):
            if not is_potentially_increasing(q, c, j - 2):
                continue
            before = old.get(_okey(q))
            if before is None:
                out.append((j, q))
            elif j < c.nlvl and has_extension(c.morphism(j), before) and not has_extension(c.morphism(j), q):
                out.append((j, q))
    return out


def _occurrence_dict(p: Morphism) -> dict:
    return {"nodes": {str(k): v for k, v in sorted(p.nodes.items())}, "edges": {str(k): v for k, v in sorted(p.edges.items())}}


def repair_one(
    g: Graph,
    c: UANFConstraint,
    rs: RepairingSet,
    seed: int | str = 0,
    max_iterations: int | None = None,
    on_step: Callable[[Graph], None] | None = None,
    trace: RepairTrace | None = None,
    label: str | None = None,
) -> tuple[Graph, RepairTrace]:
    """Repair ``g`` towards ``c`` with the registered sequences of ``rs``.

    Each outer iteration repairs one potentially increasing occurrence at the
    first unsatisfied layer, then restores the previously satisfied layers
    from the set ``M`` of occurrences the application spoiled.

    Raises:
        ValueError: if ``c`` is not circular conflict free or ``rs`` is invalid.
        IterationCapExceeded: if more than ``max_iterations`` sequences are applied.
    """
    if not is_circular_conflict_free(c):
        raise ValueError("refusing to repair a constraint with circular conflicts")
    v = validate_repairing_set(rs, c)
    if not v:
        raise ValueError("invalid repairing set: " + "; ".join(v.reasons))
    cap = iteration_bound(g, c) if max_iterations is None else max_iterations
    trace = RepairTrace() if trace is None else trace
    base = {"constraint": label} if label is not None else {}
    applied = 0

    def run(seq: RepairingSequence, p: Morphism) -> Transformation:
        nonlocal applied
        applied += 1
        if applied > cap:
            raise IterationCapExceeded(f"more than {cap} sequence applications")
        t = apply_sequence_at(seq, p)
        if on_step is not None:
            on_step(t.H)
        return t

    it = 0
    while not graph_satisfies(g, c):
        it += 1
        rng = random.Random(f"{seed}/{it}")
        km = kmax(g, c)
        nv_before = number_of_violations(g, c, km + 1, km)
        cands = potentially_increasing_occurrences(g, c, km)
        if not cands:
            raise RuntimeError(f"no potentially increasing occurrence at layer {km}")
        p = cands[rng.randrange(len(cands))]
        seq, branch = _choose_sequence(rs, c, km + 2, rng.randrange(2))
        t = run(seq, p)
        h = t.H
        trace.events.append(
            base | {"event": "apply", "iteration": it, "phase": "outer", "kmax": km, "graph": km + 2,
                    "occurrence": _occurrence_dict(p), "branch": branch, "sequence": seq.describe(),
                    "candidates": len(cands), "nv": _nv_snapshot(h, c)}
        )
        pending = _affected(c, t, km + 2)
        while not satisfies_layer(h, c, km):
            pending = [(j, q) for j, q in pending if is_potentially_increasing(q, c, j - 2)]
            if not pending:
                raise RuntimeError(f"could not restore layer {km}")
            pending.sort(key=lambda x: (x[0], _okey(x[1])))
            j, q = pending[rng.randrange(len(pending))]
            seq, branch = _choose_sequence(rs, c, j, rng.randrange(2))
            t = run(seq, q)
            fresh = _affected(c, t, km + 2)
            carried = []
            for j2, q2 in pending:
                if j2 == j and _okey(q2) == _okey(q):
                    continue
                moved = t.track @ q2
                if moved.is_total:
                    carried.append((j2, moved))
            seen, pending = set(), []
            for j2, q2 in fresh + carried:
                key = (j2, _okey(q2))
                if key not in seen:
                    seen.add(key)
                    pending.append((j2, q2))
            h = t.H
            trace.events.append(
                base | {"event": "apply", "iteration": it, "phase": "inner", "kmax": km, "graph": j,
                        "occurrence": _occurrence_dict(q), "branch": branch, "sequence": seq.describe(),
                        "nv": _nv_snapshot(h, c)}
            )
        g = h
        km2 = kmax(g, c)
        progress = km2 > km or (km2 == km and number_of_violations(g, c, km + 1, km2) < nv_before)
        trace.events.append(base | {"event": "iteration", "iteration": it, "kmax_before": km, "kmax_after": km2,
                                    "nv_before": nv_before if nv_before != INF else "inf", "progress": progress})
    return g, trace


def repair_set(
    g: Graph,
    constraints: Sequence[UANFConstraint],
    sets: Sequence[RepairingSet],
    seed: int | str = 0,
    max_iterations: int | None = None,
) -> tuple[Graph, RepairTrace]:
    """Repair the constraints one by one in topological order of their conflict graph.

    After every sequence application each already repaired constraint is
    re-checked.

    Raises:
        CyclicError: if the constraint conflict graph is cyclic.
        ValueError: if a repairing set is invalid.
        RuntimeError: if an earlier constraint stops being satisfied.
    """
    v = validate_for_set(sets, constraints)
    if not v:
        raise ValueError("invalid repairing sets: " + "; ".join(v.reasons))
    order = constraint_order(constraints, sets)
    trace = RepairTrace()
    done: list[UANFConstraint] = []
    for i in order:
        c = constraints[i]
        label = c.name or f"c{i}"

        def check(h: Graph, done=tuple(done), label=label) -> None:
            for d in done:
                if not graph_satisfies(h, d):
                    raise RuntimeError(f"repairing {label} broke {d.name or 'an earlier constraint'}")

        g, _ = repair_one(g, c, sets[i], f"{seed}:{label}", max_iterations, check, trace, label)
        trace.events.append({"event": "constraint-done", "constraint": label})
        done.append(c)
    return g, trace
