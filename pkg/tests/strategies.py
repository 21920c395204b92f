"""Hypothesis strategies for small graphs over the class/feature type graph."""

from hypothesis import strategies as st

from grafrepair.fixtures import TG_TOY, graph


@st.composite
def graphs(draw, max_nodes=4, max_edges=5):
    n = draw(st.integers(0, max_nodes))
    nodes = {i: draw(st.sampled_from(["Class", "Feature"])) for i in range(n)}
    slots = []
    for s, ts in nodes.items():
        for t, tt in nodes.items():
            for lab, (a, b) in sorted(TG_TOY.edge_types.items()):
                if ts == a and tt == b:
                    slots.append((s, t, lab))
    picks = draw(st.lists(st.sampled_from(slots), max_size=max_edges)) if slots else []
    return graph(nodes, dict(enumerate(picks)))


@st.composite
def chains(draw, max_len=3):
    """A UANF chain built by growing a random graph one step at a time."""
    from grafrepair.conditions import UANFConstraint

    length = draw(st.integers(1, max_len))
    gs = [graph()]
    cur = graph()
    for i in range(length):
        nodes, edges = dict(cur.nodes), dict(cur.edges)
        grew = False
        while not grew:
            if draw(st.booleans()) or not nodes:
                nodes[len(nodes)] = draw(st.sampled_from(["Class", "Feature"]))
                grew = True
            slots = [
                (s, t, lab)
                for s, ts in nodes.items()
                for t, tt in nodes.items()
                for lab, (a, b) in sorted(TG_TOY.edge_types.items())
                if ts == a and tt == b
            ]
            if slots and draw(st.booleans()):
                edges[max(edges, default=-1) + 1] = draw(st.sampled_from(slots))
                grew = True
        cur = graph(nodes, edges)
        gs.append(cur)
    return UANFConstraint(gs)
