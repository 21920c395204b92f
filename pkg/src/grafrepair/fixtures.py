"""A small class/feature model used in examples, tests and the CLI docs."""

from __future__ import annotations

from .graph import Graph, TypeGraph

TG_TOY = TypeGraph({"Class", "Feature"}, {"owns": ("Class", "Feature"), "dep": ("Feature", "Feature")})


def graph(nodes: dict[int, str] | None = None, edges: dict[int, tuple[int, int, str]] | None = None) -> Graph:
    return Graph(TG_TOY, nodes or {}, edges or {})


EMPTY = graph()
C = graph({0: "Class"})
F = graph({0: "Feature"})
CFDISC = graph({0: "Class", 1: "Feature"})
CF = graph({0: "Class", 1: "Feature"}, {0: (0, 1, "owns")})
CFF = graph({0: "Class", 1: "Feature", 2: "Feature"}, {0: (0, 1, "owns"), 1: (0, 2, "owns")})
FFDISC = graph({0: "Feature", 1: "Feature"})
FF = graph({0: "Feature", 1: "Feature"}, {0: (0, 1, "dep")})

G0 = C
G1 = CF
G2 = graph({0: "Class", 1: "Class"})

FFLOOP = graph({0: "Feature"}, {0: (0, 0, "dep")})
CFFDEP = graph({0: "Class", 1: "Feature", 2: "Feature"}, {0: (0, 1, "owns"), 1: (0, 2, "owns"), 2: (1, 2, "dep")})
CFL = graph({0: "Class", 1: "Feature"}, {0: (0, 1, "owns"), 1: (1, 1, "dep")})
CFDISC_LOOP = graph({0: "Class", 1: "Feature"}, {0: (1, 1, "dep")})
FDEP3 = graph({0: "Feature", 1: "Feature", 2: "Feature"}, {0: (0, 1, "dep"), 1: (1, 2, "dep")})
# c owns f1, f1 dep f2 (and f2 dep f3)
CHAIN2 = graph({0: "Class", 1: "Feature", 2: "Feature"}, {0: (0, 1, "owns"), 1: (1, 2, "dep")})
CHAIN3 = graph({0: "Class", 1: "Feature", 2: "Feature", 3: "Feature"}, {0: (0, 1, "owns"), 1: (1, 2, "dep"), 2: (2, 3, "dep")})
CHAIN2_OWNED = graph({0: "Class", 1: "Feature", 2: "Feature"}, {0: (0, 1, "owns"), 1: (1, 2, "dep"), 2: (0, 2, "owns")})
FLOOP_F = graph({0: "Feature", 1: "Feature"}, {0: (0, 0, "dep")})
FLOOP_FDEP = graph({0: "Feature", 1: "Feature"}, {0: (0, 0, "dep"), 1: (0, 1, "dep")})


def _constraints():
    from .conditions import uanf_from_graphs

    return {
        "c_one": uanf_from_graphs([C, CF], "c_one"),
        "c_noDep": uanf_from_graphs([FF], "c_noDep"),
        "c_two": uanf_from_graphs([C, CFF], "c_two"),
        "c_le1": uanf_from_graphs([CFF], "c_le1"),
    }


def _more_constraints():
    from .conditions import TRUE, Exists, to_uanf, uanf_from_graphs
    from .graph import Morphism

    cex = to_uanf(Exists(Morphism.empty(CF), TRUE), "cex")
    cex.name = "cex"
    return {
        # conflict graph 0 -> 1
        "c_own": uanf_from_graphs([CF, CFL], "c_own"),
        # mutual conflicts, cyclic
        "c_mutual": uanf_from_graphs([FF, FDEP3], "c_mutual"),
        "c_cyclic3": uanf_from_graphs([C, CF, CFF], "c_cyclic3"),
        # the inner loop of the repair algorithm is needed here
        "c_chain": uanf_from_graphs([C, CHAIN2, CHAIN3], "c_chain"),
        "c_loop": uanf_from_graphs([C, CF, CFL], "c_loop"),
        "cex": cex,
        # four layers; witnesses for what satisfaction up to a layer cannot tell
        "c_layers": uanf_from_graphs([C, CF, CHAIN2, CHAIN2_OWNED], "c_layers"),
        "c_disc": uanf_from_graphs([C, CFDISC, CFDISC_LOOP], "c_disc"),
        # every feature has a loop and depends on every other feature
        "c_alldep": uanf_from_graphs([F, FFLOOP, FLOOP_F, FLOOP_FDEP], "c_alldep"),
    }


def _rules():
    from .rewrite import PlainRule

    return {
        "addF": PlainRule(C, C, CF, "addF"),
        "delDep": PlainRule(FF, FFDISC, FFDISC, "delDep"),
        "delOwns": PlainRule(CF, CFDISC, CFDISC, "delOwns"),
        "delClass": PlainRule(C, EMPTY, EMPTY, "delClass"),
        "addClass": PlainRule(EMPTY, EMPTY, C, "addClass"),
        "addDep": PlainRule(FFDISC, FFDISC, FF, "addDep"),
        "moveF": PlainRule(
            graph({0: "Class", 1: "Feature", 2: "Class"}, {0: (0, 1, "owns")}),
            graph({0: "Class", 1: "Feature", 2: "Class"}),
            graph({0: "Class", 1: "Feature", 2: "Class"}, {1: (2, 1, "owns")}),
            "moveF",
        ),
    }


CONSTRAINTS = _constraints()
MORE_CONSTRAINTS = _more_constraints()
RULES = _rules()
c_one = CONSTRAINTS["c_one"]
c_noDep = CONSTRAINTS["c_noDep"]
c_two = CONSTRAINTS["c_two"]
c_le1 = CONSTRAINTS["c_le1"]
addF = RULES["addF"]
delDep = RULES["delDep"]

# C plus two features joined by a dep edge
G_DEP = graph({0: "Class", 1: "Feature", 2: "Feature"}, {0: (1, 2, "dep")})


def data_documents() -> dict:
    """The example files shipped in ``data/``, keyed by file name."""
    from .io import ConstraintSet, Rule, RuleSet

    def rules(*names):
        return RuleSet([Rule(RULES[n], name=n) for n in names])

    return {
        "G0.json": G0,
        "G1.json": G1,
        "G2.json": G2,
        "G_dep.json": G_DEP,
        "c_one.json": c_one,
        "c_noDep.json": c_noDep,
        "c_le1.json": c_le1,
        "rules.json": rules(*RULES),
        "good_set.json": ConstraintSet([c_one, c_noDep], rules("addF", "delDep")),
        "bad_set.json": ConstraintSet([c_one, c_le1], rules("addF", "delOwns")),
    }


def write_data(directory) -> list:
    from pathlib import Path

    from .io import save

    out = []
    for name, obj in data_documents().items():
        path = Path(directory) / name
        save(obj, path)
        out.append(path)
    return out
