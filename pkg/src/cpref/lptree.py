"""Lexicographic preference trees.

A tree node ranks a group of attributes through a conditional preference
table; a pair of alternatives is decided at the first node whose label they
value differently.  Comparison, linearisability, completeness, strict-cut
counting and translation to plain statements all walk the tree without ever
enumerating the alternative space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .model import (
    And,
    CPStatement,
    CPTheory,
    Formula,
    PartialInstantiation,
    TRUE,
    AttributeSchema,
    ValidationError,
    eval_formula,
    instantiation_formula,
    validate_formula,
)
from .semantics import Relation, assemble_top_p


class IncompleteTreeError(ValueError):
    """An operation whose contract needs a complete tree got a partial one."""


class LinkKind(enum.Enum):
    STRICT = ">"
    EQUIV = "~"


@dataclass(frozen=True)
class OrderLink:
    """One explicit ordered pair of a rule's preference relation."""

    left: PartialInstantiation
    right: PartialInstantiation
    kind: LinkKind


@dataclass(frozen=True)
class LPRule:
    """``condition : order`` — the order given in extension as links whose
    reflexive-transitive closure is the rule's preorder."""

    condition: Formula
    links: tuple[OrderLink, ...]


Edge = tuple[PartialInstantiation | None, "LPNode"]


@dataclass(frozen=True)
class LPNode:
    """A node: its attribute label, preference table, and outgoing edges.

    Children come either as a single unlabelled edge (label None) or as one
    edge per instantiation of the node's label.
    """

    label: tuple[str, ...]
    rules: tuple[LPRule, ...]
    children: tuple[Edge, ...] = ()


@dataclass(frozen=True)
class LPTree:
    schema: AttributeSchema
    root: LPNode


@dataclass(frozen=True)
class PathContext:
    """Everything the semantics needs to know about a node's position."""

    ancestors: frozenset[str]
    assigned: PartialInstantiation  # values fixed by labelled edges above
    noninst: frozenset[str]  # attributes crossed on unlabelled edges
    trail: str


def strict_chain_rule(
    condition: Formula, ordered: Iterable[PartialInstantiation]
) -> LPRule:
    """A rule whose order is the strict chain through ``ordered``."""
    items = list(ordered)
    links = tuple(
        OrderLink(a, b, LinkKind.STRICT) for a, b in zip(items, items[1:])
    )
    return LPRule(condition, links)


@lru_cache(maxsize=None)
def _closed_order(
    rule: LPRule, insts: tuple[PartialInstantiation, ...]
) -> frozenset[tuple[int, int]]:
    """Reflexive-transitive closure of a rule's links, as index pairs."""
    index = {inst: i for i, inst in enumerate(insts)}
    geq = {(i, i) for i in range(len(insts))}
    for link in rule.links:
        i, j = index[link.left], index[link.right]
        geq.add((i, j))
        if link.kind is LinkKind.EQUIV:
            geq.add((j, i))
    changed = True
    while changed:
        changed = False
        for i, j in list(geq):
            for j2, k in list(geq):
                if j == j2 and (i, k) not in geq:
                    geq.add((i, k))
                    changed = True
    return frozenset(geq)


def _label_instantiations(
    schema: AttributeSchema, label: tuple[str, ...]
) -> tuple[PartialInstantiation, ...]:
    return tuple(schema.instantiations(label))


def _matching_rule(
    node: LPNode, context_values: PartialInstantiation
) -> LPRule:
    for rule in node.rules:
        if eval_formula(context_values.restrict(rule.condition.variables()), rule.condition):
            return rule
    raise ValidationError("no rule applies at node; tree is not valid")


def iter_nodes(tree: LPTree) -> Iterator[tuple[LPNode, PathContext]]:
    """Depth-first traversal yielding each node with its path context."""
    schema = tree.schema

    def walk(node: LPNode, ctx: PathContext):
        yield node, ctx
        label = set(node.label)
        for edge_label, child in node.children:
            if edge_label is None:
                child_ctx = PathContext(
                    ctx.ancestors | label,
                    ctx.assigned,
                    ctx.noninst | label,
                    ctx.trail + "/*",
                )
            else:
                rendered = ",".join(f"{n}={v}" for n, v in edge_label.bindings)
                child_ctx = PathContext(
                    ctx.ancestors | label,
                    ctx.assigned.override(edge_label),
                    ctx.noninst,
                    ctx.trail + "/" + rendered,
                )
            yield from walk(child, child_ctx)

    root_ctx = PathContext(frozenset(), schema.empty_instantiation(), frozenset(), "root")
    yield from walk(tree.root, root_ctx)


# ---------------------------------------------------------------------------
# Validation


def validate(tree: LPTree) -> list[str]:
    """Structural check; returns human-readable violations (empty when valid)."""
    schema = tree.schema
    violations: list[str] = []

    for node, ctx in iter_nodes(tree):
        where = ctx.trail
        label = node.label
        if not label:
            violations.append(f"{where}: node label is empty")
            continue
        if len(set(label)) != len(label):
            violations.append(f"{where}: label repeats an attribute")
            continue
        unknown = [a for a in label if a not in schema]
        if unknown:
            violations.append(f"{where}: unknown attributes {unknown}")
            continue
        repeated = set(label) & ctx.ancestors
        if repeated:
            violations.append(f"{where}: attribute repeated on branch: {sorted(repeated)}")

        _validate_children(schema, node, where, violations)
        rules_ok = _validate_rules(schema, node, ctx, where, violations)
        if rules_ok:
            _validate_rule_multiplicity(schema, node, where, violations)

    return violations


def _validate_children(schema, node, where, violations):
    if not node.children:
        return
    labels = [e for e, _ in node.children]
    if len(node.children) == 1 and labels[0] is None:
        return
    if any(e is None for e in labels):
        violations.append(f"{where}: unlabelled edge mixed with labelled edges")
        return
    expected = set(_label_instantiations(schema, tuple(schema.ordered(node.label))))
    if len(set(labels)) != len(labels) or set(labels) != expected:
        violations.append(
            f"{where}: edges must carry each label instantiation exactly once"
        )


def _validate_rules(schema, node, ctx, where, violations) -> bool:
    ok = True
    label_set = set(node.label)
    insts = set(_label_instantiations(schema, tuple(schema.ordered(node.label))))
    for k, rule in enumerate(node.rules):
        try:
            validate_formula(rule.condition, schema)
        except ValidationError as exc:
            violations.append(f"{where}: rule {k} condition: {exc}")
            ok = False
            continue
        stray = rule.condition.variables() - ctx.noninst
        if stray:
            violations.append(
                f"{where}: rule {k} conditions on attributes outside the "
                f"unlabelled-edge ancestors: {sorted(stray)}"
            )
            ok = False
        for link in rule.links:
            for endpoint in (link.left, link.right):
                if endpoint.var_set != label_set or endpoint not in insts:
                    violations.append(
                        f"{where}: rule {k} orders {endpoint!r}, which is not an "
                        f"instantiation of the node label"
                    )
                    ok = False
                    break
    return ok


def _validate_rule_multiplicity(schema, node, where, violations):
    condition_vars = set()
    for rule in node.rules:
        condition_vars |= rule.condition.variables()
    for u in schema.instantiations(condition_vars):
        matches = sum(
            1
            for rule in node.rules
            if eval_formula(u.restrict(rule.condition.variables()), rule.condition)
        )
        if matches != 1:
            violations.append(
                f"{where}: {matches} rules match context {u!r} (need exactly one)"
            )


# ---------------------------------------------------------------------------
# Deciding and comparing


def _descend(
    tree: LPTree, o: PartialInstantiation, o_prime: PartialInstantiation
) -> tuple[LPNode, PathContext] | None:
    """First node whose label values differ between o and o', with context."""
    schema = tree.schema
    node = tree.root
    ctx = PathContext(frozenset(), schema.empty_instantiation(), frozenset(), "root")
    while True:
        label = node.label
        if o.restrict(label) != o_prime.restrict(label):
            return node, ctx
        if not node.children:
            return None
        if len(node.children) == 1 and node.children[0][0] is None:
            child = node.children[0][1]
            ctx = PathContext(
                ctx.ancestors | set(label), ctx.assigned, ctx.noninst | set(label), ctx.trail
            )
            node = child
            continue
        shared = o.restrict(label)
        for edge_label, child in node.children:
            if edge_label == shared:
                ctx = PathContext(
                    ctx.ancestors | set(label),
                    ctx.assigned.override(edge_label),
                    ctx.noninst,
                    ctx.trail,
                )
                node = child
                break
        else:
            raise ValidationError("missing edge for shared label values; tree is not valid")


def decide(
    tree: LPTree, o: PartialInstantiation, o_prime: PartialInstantiation
) -> LPNode | None:
    """The node deciding the pair, or None when the pair escapes the tree."""
    if o == o_prime:
        raise ValidationError("decide is defined for distinct alternatives only")
    found = _descend(tree, o, o_prime)
    return None if found is None else found[0]


def compare_lptree(
    tree: LPTree, o: PartialInstantiation, o_prime: PartialInstantiation
) -> Relation:
    """Four-way label of a distinct pair under the tree's relation.

    Undecided pairs are incomparable; decided pairs take the verdict of the
    unique applicable rule's preorder on the label values.
    """
    if o == o_prime:
        raise ValidationError("compare is defined for distinct alternatives only")
    found = _descend(tree, o, o_prime)
    if found is None:
        return Relation.INCOMPARABLE
    node, ctx = found
    rule = _matching_rule(node, o.restrict(ctx.noninst))
    insts = _label_instantiations(tree.schema, tree.schema.ordered(node.label))
    geq = _closed_order(rule, insts)
    i = insts.index(o.restrict(node.label))
    j = insts.index(o_prime.restrict(node.label))
    forward, backward = (i, j) in geq, (j, i) in geq
    if forward and backward:
        return Relation.EQUIVALENT
    if forward:
        return Relation.STRICTLY_BETTER
    if backward:
        return Relation.STRICTLY_WORSE
    return Relation.INCOMPARABLE


# ---------------------------------------------------------------------------
# Global shape predicates


def _rule_is_linear(schema: AttributeSchema, node: LPNode, rule: LPRule) -> bool:
    insts = _label_instantiations(schema, schema.ordered(node.label))
    geq = _closed_order(rule, insts)
    n = len(insts)
    for i in range(n):
        for j in range(i + 1, n):
            forward, backward = (i, j) in geq, (j, i) in geq
            if forward == backward:  # incomparable or equivalent
                return False
    return True


def is_complete(tree: LPTree) -> bool:
    """Every attribute on every branch, every rule a linear order."""
    all_names = set(tree.schema.names)
    for node, ctx in iter_nodes(tree):
        for rule in node.rules:
            if not _rule_is_linear(tree.schema, node, rule):
                return False
        if not node.children and ctx.ancestors | set(node.label) != all_names:
            return False
    return True


def is_linearisable_lptree(tree: LPTree) -> bool:
    """True iff every rule's order is antisymmetric."""
    for node, _ in iter_nodes(tree):
        insts = _label_instantiations(tree.schema, tree.schema.ordered(node.label))
        for rule in node.rules:
            geq = _closed_order(rule, insts)
            if any((j, i) in geq for i, j in geq if i != j):
                return False
    return True


# ---------------------------------------------------------------------------
# Translation to statements


def _conjoin(*parts: Formula) -> Formula:
    out: Formula = TRUE
    for part in parts:
        if part == TRUE:
            continue
        out = part if out == TRUE else And(out, part)
    return out


def lptree_to_statements(tree: LPTree) -> CPTheory:
    """The statement theory inducing exactly the tree's relation.

    Every ordered pair of a rule's preorder becomes a statement swapping the
    attributes where the pair differs, conditioned on the rule condition, the
    labelled-edge values above the node, and the label values the pair
    shares; all attributes below or beside the node are free.  Pinning the
    shared label values keeps each statement sanctioning exactly the pairs
    the node decides with that verdict; projecting them away instead would
    also sanction pairs the rule never ordered.
    """
    schema = tree.schema
    all_names = set(schema.names)
    statements: list[CPStatement] = []
    for node, ctx in iter_nodes(tree):
        label = schema.ordered(node.label)
        insts = _label_instantiations(schema, label)
        free = frozenset(all_names - ctx.ancestors - set(label))
        path_formula = instantiation_formula(ctx.assigned)
        for rule in node.rules:
            geq = _closed_order(rule, insts)
            for i, j in sorted(geq):
                if i == j:
                    continue
                w, w_prime = insts[i], insts[j]
                diff = [a for a in label if w[a] != w_prime[a]]
                shared = w.restrict(a for a in label if a not in diff)
                cond = _conjoin(
                    rule.condition, path_formula, instantiation_formula(shared)
                )
                statements.append(
                    CPStatement(cond, free, w.restrict(diff), w_prime.restrict(diff))
                )
    return CPTheory(schema, tuple(statements))


# ---------------------------------------------------------------------------
# Counting and ranking without touching the universe


def strict_cut_count(tree: LPTree, o: PartialInstantiation) -> int:
    """How many alternatives are strictly better than ``o``.

    Walks ``o``'s branch; at each node the strictly-better label values each
    account for a full block of alternatives over the attributes not yet
    encountered.  Requires a complete tree.
    """
    if not is_complete(tree):
        raise IncompleteTreeError("strict-cut counting requires a complete tree")
    schema = tree.schema
    node = tree.root
    ancestors: set[str] = set()
    noninst: set[str] = set()
    total = 0
    while True:
        label = schema.ordered(node.label)
        insts = _label_instantiations(schema, label)
        rule = _matching_rule(node, o.restrict(noninst))
        geq = _closed_order(rule, insts)
        mine = insts.index(o.restrict(label))
        above = sum(
            1
            for j in range(len(insts))
            if (j, mine) in geq and (mine, j) not in geq
        )
        remaining = set(schema.names) - ancestors - set(label)
        block = math.prod(len(schema.domain(a)) for a in remaining)
        total += above * block
        if not node.children:
            return total
        ancestors |= set(label)
        if len(node.children) == 1 and node.children[0][0] is None:
            noninst |= set(label)
            node = node.children[0][1]
            continue
        shared = o.restrict(label)
        for edge_label, child in node.children:
            if edge_label == shared:
                node = child
                break
        else:
            raise ValidationError("missing edge below node; tree is not valid")


def top_p_lptree(
    tree: LPTree, candidates: Iterable[PartialInstantiation], p: int
) -> tuple[PartialInstantiation, ...]:
    """Top-p sequence of the candidate set under the tree's relation."""
    items = list(dict.fromkeys(candidates))
    verdicts: dict[tuple[PartialInstantiation, PartialInstantiation], bool] = {}
    for a in items:
        for b in items:
            if a != b:
                verdicts[(a, b)] = compare_lptree(tree, a, b) is Relation.STRICTLY_BETTER
    return assemble_top_p(items, lambda a, b: verdicts[(a, b)], p, tree.schema)
