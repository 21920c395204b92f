"""Command line interface.

Exit codes: 0 success, 1 a domain verdict of false or invalid, 2 usage or
parse errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import io
from .acsynth import synthesize
from .conditions import INF, UANFConstraint, graph_satisfies, graph_satisfies_up_to_layer, kmax, number_of_violations, violation_vector
from .conflicts import CyclicError, conflict_graph, conflict_graph_of_set
from .consistency import classify_transformation
from .graph import Graph
from .repair import (
    IterationCapExceeded,
    construct_repairing_set,
    repair_one,
    repair_set,
    validate_for_set,
)
from .rewrite import NotApplicable, apply, matches


class Verdict(click.ClickException):
    """A domain answer of false or invalid."""

    exit_code = 1


class Unreadable(click.ClickException):
    exit_code = 2


def _load(path: str, *kinds: str):
    try:
        obj = io.load(path)
    except io.ParseError as exc:
        raise Unreadable(f"{path}: {exc}") from None
    except OSError as exc:
        raise Unreadable(f"{path}: {exc.strerror}") from None
    want = {
        "graph": Graph,
        "constraint": UANFConstraint,
        "rule": io.Rule,
        "rule-set": io.RuleSet,
        "constraint-set": io.ConstraintSet,
    }
    if kinds and not any(isinstance(obj, want[k]) for k in kinds):
        raise Unreadable(f"{path}: expected a {' or '.join(kinds)} document")
    return obj


def _graph(path: str) -> Graph:
    return _load(path, "graph")


def _constraint(path: str) -> UANFConstraint:
    obj = _load(path, "constraint", "constraint-set")
    if isinstance(obj, io.ConstraintSet):
        if len(obj.constraints) != 1:
            raise Unreadable(f"{path}: expected exactly one constraint, found {len(obj.constraints)}")
        return obj.constraints[0]
    return obj


def _rule_set(path: str) -> io.RuleSet:
    obj = _load(path, "rule", "rule-set", "constraint-set")
    if isinstance(obj, io.Rule):
        return io.RuleSet([obj])
    if isinstance(obj, io.ConstraintSet):
        return obj.rule_set
    return obj


def _rule(path: str, name: str | None) -> io.Rule:
    rs = _rule_set(path)
    if name is None:
        if len(rs.rules) != 1:
            raise click.UsageError(f"{path} holds {len(rs.rules)} rules; pick one with --name")
        return rs.rules[0]
    try:
        return rs.by_name(name)
    except KeyError:
        raise click.UsageError(f"no rule named {name!r} in {path}") from None


def _emit_graph(g: Graph, out: str | None, fmt: str = "json") -> None:
    text = io.graph_to_dot(g) if fmt == "dot" else io.dumps(g)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _emit(value, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(value, sort_keys=True))
    else:
        click.echo(value if not isinstance(value, (dict, list)) else json.dumps(value, sort_keys=True))


def _nv(v):
    return "inf" if v == INF else v


def _pick(rule: io.Rule, g: Graph, index: int):
    ms = matches(rule, g)
    if not ms:
        raise Verdict(f"rule {rule.name or '(unnamed)'} has no applicable match")
    if not 0 <= index < len(ms):
        raise click.UsageError(f"--match-index {index} out of range; {len(ms)} matches")
    return ms[index]


graph_opt = click.option("-g", "--graph", "graph_path", required=True, type=click.Path(dir_okay=False), help="Host graph file.")
constraint_opt = click.option("-c", "--constraint", "constraint_path", required=True, type=click.Path(dir_okay=False), help="Constraint file.")
rules_opt = click.option("-r", "--rules", "rules_path", required=True, type=click.Path(dir_okay=False), help="Rule or rule-set file.")
name_opt = click.option("--name", default=None, help="Rule name inside a rule set.")
index_opt = click.option("--match-index", default=0, show_default=True, type=int, help="Which match, in canonical order.")


def format_opt(*choices: str):
    return click.option("--format", "fmt", type=click.Choice(choices), default=choices[0], show_default=True)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli() -> None:
    """Graph constraints, rule application conditions and model repair."""


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(io.KINDS), default=None, help="Require this document kind.")
def validate(path: str, kind: str | None) -> None:
    """Parse a document; for constraint sets also validate the repairing sets."""
    try:
        obj = io.load(path, kind)
    except io.ParseError as exc:
        raise Unreadable(f"{path}: {exc}") from None
    except OSError as exc:
        raise Unreadable(f"{path}: {exc.strerror}") from None
    if isinstance(obj, io.ConstraintSet):
        sets = []
        for c in obj.constraints:
            try:
                sets.append(io.repairing_set_for(obj.rule_set, c))
            except (ValueError, NotApplicable) as exc:
                raise Verdict(f"{c.name}: {exc}") from None
        v = validate_for_set(sets, obj.constraints)
        if not v:
            raise Verdict("invalid repairing sets: " + "; ".join(v.reasons))
        cg = conflict_graph_of_set(obj.constraints, sets)
        cycle = cg.find_cycle()
        if cycle:
            raise Verdict("circular conflicts between constraints: " + " -> ".join(map(str, cycle)))
    click.echo(f"ok: {io.document_of(obj)['kind']}")


@cli.command()
@graph_opt
@rules_opt
@name_opt
@format_opt("json", "text")
def match(graph_path, rules_path, name, fmt) -> None:
    """List the applicable matches of a rule."""
    g, rule = _graph(graph_path), _rule(rules_path, name)
    ms = matches(rule, g)
    if fmt == "json":
        click.echo(json.dumps([io.morphism_body(m) for m in ms], sort_keys=True))
    else:
        for i, m in enumerate(ms):
            click.echo(f"{i}: {m.nodes}")
    if not ms:
        raise Verdict("no applicable match")


@cli.command("apply")
@graph_opt
@rules_opt
@name_opt
@index_opt
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False), help="Write the result here.")
def apply_cmd(graph_path, rules_path, name, match_index, output) -> None:
    """Apply a rule at one of its matches."""
    g, rule = _graph(graph_path), _rule(rules_path, name)
    t = apply(rule, _pick(rule, g, match_index), check_ac=False)
    _emit_graph(t.H, output)


@cli.command()
@graph_opt
@constraint_opt
@click.option("--layer", type=int, default=None, help="Check satisfaction up to this layer.")
@format_opt("text", "json")
def check(graph_path, constraint_path, layer, fmt) -> None:
    """Whether the graph satisfies the constraint (up to a layer)."""
    g, c = _graph(graph_path), _constraint(constraint_path)
    if layer is None:
        ok = graph_satisfies(g, c)
    else:
        if not -1 <= layer < c.nlvl:
            raise click.UsageError(f"--layer must lie in [-1, {c.nlvl})")
        ok = graph_satisfies_up_to_layer(g, c, layer)
    _emit(ok if fmt == "json" else str(ok).lower(), fmt)
    if not ok:
        raise Verdict("not satisfied")


@cli.command("kmax")
@graph_opt
@constraint_opt
@format_opt("text", "json")
def kmax_cmd(graph_path, constraint_path, fmt) -> None:
    """The largest layer up to which the graph satisfies the constraint."""
    _emit(kmax(_graph(graph_path), _constraint(constraint_path)), fmt)


@cli.command()
@graph_opt
@constraint_opt
@click.option("--layer", type=int, default=None, help="Layer j; default prints the whole vector from layer -1.")
@format_opt("text", "json")
def nv(graph_path, constraint_path, layer, fmt) -> None:
    """Number of violations at layer j."""
    g, c = _graph(graph_path), _constraint(constraint_path)
    if layer is None:
        _emit([_nv(v) for v in violation_vector(g, c)], fmt)
        return
    if not -1 <= layer < c.nlvl:
        raise click.UsageError(f"--layer must lie in [-1, {c.nlvl})")
    _emit(_nv(number_of_violations(g, c, layer)), fmt)


@cli.command()
@graph_opt
@rules_opt
@constraint_opt
@name_opt
@index_opt
@format_opt("json", "text")
def classify(graph_path, rules_path, constraint_path, name, match_index, fmt) -> None:
    """Which consistency notions a transformation satisfies."""
    g, rule, c = _graph(graph_path), _rule(rules_path, name), _constraint(constraint_path)
    t = apply(rule, _pick(rule, g, match_index), check_ac=False)
    verdict = classify_transformation(t, c).as_dict()
    if fmt == "json":
        click.echo(json.dumps(verdict, sort_keys=True))
    else:
        for k, v in verdict.items():
            click.echo(f"{k}: {str(v).lower()}")


@cli.command("synth-ac")
@click.argument("kind", type=click.Choice(["main", "incr", "basic"]))
@rules_opt
@constraint_opt
@name_opt
@click.option("--layer", type=int, required=True)
@click.option("--intermediate", default=None, type=click.Path(dir_okay=False), help="Graph C' for incr.")
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False))
def synth_ac(kind, rules_path, constraint_path, name, layer, intermediate, output) -> None:
    """Equip a rule with a synthesized application condition."""
    rule, c = _rule(rules_path, name), _constraint(constraint_path)
    cp = _graph(intermediate) if intermediate else None
    if not -1 <= layer < c.nlvl:
        raise click.UsageError(f"--layer must lie in [-1, {c.nlvl})")
    try:
        out, report = synthesize(kind, rule, c, layer, cp)
    except ValueError as exc:
        if kind == "basic" and "not a basic" in str(exc):
            raise Verdict(str(exc)) from None
        raise click.UsageError(str(exc)) from None
    text = io.dumps(out)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    click.echo(json.dumps(report.as_dict(), sort_keys=True), err=True)


@cli.command()
@click.option("--constraint", "constraint_path", type=click.Path(dir_okay=False), default=None)
@click.option("--set", "set_path", type=click.Path(dir_okay=False), default=None, help="Constraint set with rules.")
@format_opt("json", "dot")
def conflicts(constraint_path, set_path, fmt) -> None:
    """Conflict graph of a constraint or of a constraint set; exit 1 if cyclic."""
    if (constraint_path is None) == (set_path is None):
        raise click.UsageError("give exactly one of --constraint and --set")
    if constraint_path:
        cg = conflict_graph(_constraint(constraint_path))
    else:
        cs = _load(set_path, "constraint-set")
        try:
            sets = [io.repairing_set_for(cs.rule_set, c) for c in cs.constraints]
        except (ValueError, NotApplicable) as exc:
            raise Verdict(str(exc)) from None
        cg = conflict_graph_of_set(cs.constraints, sets)
    cycle = cg.find_cycle()
    doc = cg.as_dict() | {"cycle": cycle}
    click.echo(cg.to_dot() if fmt == "dot" else json.dumps(doc, sort_keys=True), nl=fmt != "dot")
    if cycle:
        raise Verdict("cycle: " + " -> ".join(map(str, cycle)))
    if cg.notes:
        raise Verdict("; ".join(cg.notes))


@cli.command()
@graph_opt
@click.option("-c", "--constraint", "constraint_paths", multiple=True, required=True, type=click.Path(dir_okay=False),
              help="Constraint or constraint-set file; repeatable.")
@click.option("-r", "--rules", "rules_path", default=None, type=click.Path(dir_okay=False), help="Rule or rule-set file.")
@click.option("--construct", is_flag=True, help="Use the constructed repairing set of each constraint.")
@click.option("--seed", type=int, default=0, envvar="GRAFREPAIR_SEED", show_default=True)
@click.option("--max-iterations", type=int, default=None, help="Cap on sequence applications.")
@click.option("--trace", "trace_path", default=None, type=click.Path(dir_okay=False), help="Write a JSON-lines trace.")
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False))
@format_opt("json", "dot")
def repair(graph_path, constraint_paths, rules_path, construct, seed, max_iterations, trace_path, output, fmt) -> None:
    """Repair a graph with respect to one or more constraints."""
    g = _graph(graph_path)
    constraints: list[UANFConstraint] = []
    rule_set = _rule_set(rules_path) if rules_path else None
    for p in constraint_paths:
        obj = _load(p, "constraint", "constraint-set")
        if isinstance(obj, io.ConstraintSet):
            constraints += obj.constraints
            if rule_set is None:
                rule_set = obj.rule_set
        else:
            constraints.append(obj)
    if rule_set is None and not construct:
        raise click.UsageError("give --rules or --construct")
    try:
        if construct:
            sets = [construct_repairing_set(c) for c in constraints]
        else:
            sets = [io.repairing_set_for(rule_set, c) for c in constraints]
        if len(constraints) == 1:
            h, trace = repair_one(g, constraints[0], sets[0], seed, max_iterations)
        else:
            h, trace = repair_set(g, constraints, sets, seed, max_iterations)
    except CyclicError as exc:
        raise Verdict(f"{exc}") from None
    except IterationCapExceeded as exc:
        raise Verdict(f"iteration cap reached: {exc}") from None
    except (ValueError, NotApplicable) as exc:
        raise Verdict(str(exc)) from None
    if trace_path:
        Path(trace_path).write_text(trace.to_jsonl(), encoding="utf-8")
    _emit_graph(h, output, fmt)


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=argv, prog_name="grafrepair", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
