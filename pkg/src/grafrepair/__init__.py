"""Typed graphs, nested graph conditions, consistency-aware rule application
and rule-based repair of graphs towards constraints."""

from .acsynth import (
    basic_ac,
    increasing_ac_at_layer,
    maintaining_ac,
    maintaining_ac_at_layer,
    synthesize,
    union_increasing_ac,
)
from .conditions import (
    FALSE,
    TRUE,
    And,
    Condition,
    Exists,
    Forall,
    Not,
    Or,
    UANFConstraint,
    graph_satisfies,
    graph_satisfies_up_to_layer,
    kmax,
    number_of_violations,
    satisfies,
    shift_over_morphism,
    to_uanf,
    truncate_after_layer,
    uanf_from_graphs,
    violation_vector,
)
from .conflicts import (
    ConflictGraph,
    CyclicError,
    causes_conflict,
    causes_conflict_basic,
    conflict_graph,
    conflict_graph_of_set,
    constraint_order,
    is_circular_conflict_free,
    is_circular_conflict_free_set,
    topological_ordering,
)
from .consistency import (
    ConsistencyVerdict,
    classify_basic_increasing,
    classify_transformation,
    is_basic_maintaining_at_layer,
    is_direct_increasing,
    is_direct_maintaining,
    is_rule_maintaining_at_layer,
)
from .graph import Graph, Morphism, TypeGraph, restrict_morphism
from .io import ConstraintSet, ParseError, RuleSet, Workspace, dumps, load, loads, save
from .matching import enumerate_monomorphisms, graph_isomorphic
from .overlaps import Overlap, enumerate_overlaps, extended_overlaps, intermediate_graphs
from .repair import (
    IterationCapExceeded,
    RepairingSequence,
    RepairingSet,
    RepairTrace,
    construct_repairing_set,
    find_repairing_sequence,
    repair_one,
    repair_set,
    repairing_set_from_rules,
    validate_repairing_sequence,
    validate_repairing_set,
)
from .rewrite import NotApplicable, PlainRule, Rule, Transformation, apply, concurrent_rule, derived_rules, matches, shift_over_rule

__version__ = "0.1.0"
