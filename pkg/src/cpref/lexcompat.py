"""Compatibility of statement theories with complete lexicographic trees.

A theory is k-lexico-compatible when some complete tree with labels of at
most k attributes induces a relation extending the theory's.  The builder
grows such a tree top-down, labelling each node with a candidate attribute
group and a linear order that no active statement contradicts; the extension
checker certifies the result node by node against every relevant statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import itertools

from .model import (
    Atom,
    CPStatement,
    CPTheory,
    Formula,
    PartialInstantiation,
    TRUE,
    AttributeSchema,
    ValidationError,
    consistent_with,
    eval_formula,
)
from .lptree import (
    IncompleteTreeError,
    LPNode,
    LPTree,
    _closed_order,
    _label_instantiations,
    is_complete,
    iter_nodes,
    strict_chain_rule,
    validate,
)
from .semantics import assemble_top_p

DEFAULT_NODE_BUDGET = 10**6


class NodeBudgetError(RuntimeError):
    """Tree construction exceeded the configured node budget."""


class NotLexicoCompatibleError(RuntimeError):
    """An operation assumed a k-lexico-compatible theory and found otherwise."""


@dataclass(frozen=True)
class NodeContext:
    """Position of a node being labelled: attributes above it and the values
    fixed along its (fully labelled) path."""

    ancestors: frozenset[str]
    assigned: PartialInstantiation

    @classmethod
    def root(cls, schema: AttributeSchema) -> NodeContext:
        return cls(frozenset(), schema.empty_instantiation())

    def child(self, label: Iterable[str], values: PartialInstantiation) -> NodeContext:
        return NodeContext(self.ancestors | set(label), self.assigned.override(values))


@dataclass(frozen=True)
class CandidateLabel:
    """A label choice: up to k fresh attributes and a linear order over their
    instantiations, best first."""

    attrs: tuple[str, ...]
    order: tuple[PartialInstantiation, ...]


def relevant(
    statement: CPStatement,
    ctx: NodeContext,
    label: Iterable[str] | None = None,
) -> bool:
    """True iff the statement can sanction a swap decided at this node: its
    swapped attributes avoid the ancestors, its condition is consistent with
    the path values, and (when a label is given) it swaps into the label."""
    if statement.swapped & ctx.ancestors:
        return False
    if not consistent_with(statement.condition, ctx.assigned):
        return False
    if label is not None and not (statement.swapped & set(label)):
        return False
    return True


def phi_at_node(theory: CPTheory, ctx: NodeContext) -> tuple[CPStatement, ...]:
    """The statements still active at a node: condition consistent with the
    path values and swapped attributes not yet placed."""
    return tuple(
        s
        for s in theory.statements
        if not (s.swapped & ctx.ancestors)
        and consistent_with(s.condition, ctx.assigned)
    )


def _forced_pairs(
    statement: CPStatement, insts: Sequence[PartialInstantiation]
) -> Iterable[tuple[int, int]]:
    """Ordered pairs of label instantiations the statement forces strictly.

    t must be compatible with the better side and the condition, t' with the
    worse side, and both must agree outside the statement's free and swapped
    attributes.
    """
    outside = [
        a
        for a in (insts[0].names if insts else ())
        if a not in statement.free and a not in statement.swapped
    ]
    for i, t in enumerate(insts):
        if not t.compatible(statement.better):
            continue
        if not consistent_with(statement.condition, t):
            continue
        for j, t_prime in enumerate(insts):
            if not t_prime.compatible(statement.worse):
                continue
            if t.restrict(outside) != t_prime.restrict(outside):
                continue
            yield i, j


def _deterministic_toposort(n: int, edges: set[tuple[int, int]]) -> list[int] | None:
    """Total order respecting the edges, smallest index first; None on cycle."""
    succ: dict[int, set[int]] = {i: set() for i in range(n)}
    indegree = [0] * n
    for i, j in edges:
        if j not in succ[i]:
            succ[i].add(j)
            indegree[j] += 1
    ready = sorted(i for i in range(n) if indegree[i] == 0)
    out: list[int] = []
    while ready:
        current = ready.pop(0)
        out.append(current)
        for j in sorted(succ[current]):
            indegree[j] -= 1
            if indegree[j] == 0:
                ready.append(j)
        ready.sort()
    return out if len(out) == n else None


def choose_attribute(
    theory: CPTheory, ctx: NodeContext, k: int
) -> CandidateLabel | None:
    """A compatible label for the node, or None when every candidate fails.

    Candidate attribute sets are tried by increasing size, then schema order.
    A set T is rejected if an active statement that does not swap into T has a
    free attribute inside T, or if the strict preferences forced over T's
    instantiations by statements swapping into T contain a cycle.  Otherwise
    the returned order is the deterministic topological linearisation of the
    forced pairs.
    """
    if k < 1:
        raise ValidationError("label width must be at least 1")
    schema = theory.schema
    remaining = [a for a in schema.names if a not in ctx.ancestors]
    if not remaining:
        raise ValidationError("no attributes left to place")
    active = phi_at_node(theory, ctx)
    for size in range(1, min(k, len(remaining)) + 1):
        for combo in itertools.combinations(remaining, size):
            t_set = set(combo)
            if any(
                s.free & t_set
                for s in active
                if not (s.swapped & t_set)
            ):
                continue
            insts = _label_instantiations(schema, combo)
            forced: set[tuple[int, int]] = set()
            for s in active:
                if s.swapped & t_set:
                    forced.update(_forced_pairs(s, insts))
            order = _deterministic_toposort(len(insts), forced)
            if order is None:
                continue
            return CandidateLabel(combo, tuple(insts[i] for i in order))
    return None


def build_complete_lptree(
    theory: CPTheory, k: int, node_budget: int = DEFAULT_NODE_BUDGET
) -> LPTree | None:
    """Grow a complete tree with labels of width at most k whose relation
    extends the theory's; None when the theory is not k-lexico-compatible.

    Nodes are expanded depth first, leftmost child first; every edge is
    labelled and every node carries a single unconditional rule, so a failure
    at any node is final.
    """
    schema = theory.schema
    if not schema.attributes:
        raise ValidationError("tree construction needs at least one attribute")
    created = 0

    def grow(ctx: NodeContext) -> LPNode | None:
        nonlocal created
        created += 1
        if created > node_budget:
            raise NodeBudgetError(f"tree construction exceeded {node_budget} nodes")
        cand = choose_attribute(theory, ctx, k)
        if cand is None:
            return None
        rule = strict_chain_rule(TRUE, cand.order)
        if ctx.ancestors | set(cand.attrs) == set(schema.names):
            return LPNode(cand.attrs, (rule,), ())
        edges = []
        for value in _label_instantiations(schema, cand.attrs):
            child = grow(ctx.child(cand.attrs, value))
            if child is None:
                return None
            edges.append((value, child))
        return LPNode(cand.attrs, (rule,), tuple(edges))

    root = grow(NodeContext.root(schema))
    return None if root is None else LPTree(schema, root)


def is_k_lexico_compatible(theory: CPTheory, k: int) -> bool:
    """True iff some complete k-wide tree's relation extends the theory's."""
    return build_complete_lptree(theory, k) is not None


# ---------------------------------------------------------------------------
# Extension check


def extends_check(theory: CPTheory, tree: LPTree) -> bool:
    """True iff the complete tree's relation extends the theory's.

    For every node and every statement relevant there, the statement's free
    attributes must avoid the node's ancestors, and every applicable rule must
    strictly order the label values induced by the statement's swap, whatever
    the free and untouched attributes do.
    """
    if validate(tree):
        raise ValidationError("extension check requires a valid tree")
    if not is_complete(tree):
        raise IncompleteTreeError("extension check requires a complete tree")
    schema = theory.schema
    for node, path in iter_nodes(tree):
        label = schema.ordered(node.label)
        insts = _label_instantiations(schema, label)
        ctx = NodeContext(path.ancestors, path.assigned)
        for s in theory.statements:
            if not relevant(s, ctx, label):
                continue
            if s.free & ctx.ancestors:
                return False
            if not _rules_respect_statement(schema, node, path, insts, s, label):
                return False
    return True


def _rules_respect_statement(schema, node, path, insts, statement, label) -> bool:
    u_vars = schema.ordered(statement.condition_vars)
    rest = [
        a
        for a in label
        if a not in statement.condition_vars
        and a not in statement.free
        and a not in statement.swapped
    ]
    # Free values outside the label vanish under the restriction below.
    free_here = [a for a in label if a in statement.free]
    for rule in node.rules:
        geq = _closed_order(rule, insts)
        for u in schema.instantiations(u_vars):
            if not eval_formula(u, statement.condition):
                continue
            if not u.compatible(path.assigned):
                continue
            if not consistent_with(rule.condition, u.combine(path.assigned)):
                continue
            for s_part in schema.instantiations(rest):
                for v1 in schema.instantiations(free_here):
                    for v2 in schema.instantiations(free_here):
                        left = u.combine(s_part, v1, statement.better).restrict(label)
                        right = u.combine(s_part, v2, statement.worse).restrict(label)
                        i, j = insts.index(left), insts.index(right)
                        if not ((i, j) in geq and (j, i) not in geq):
                            return False
    return True


# ---------------------------------------------------------------------------
# Ranking through one branch per pair


def top_p_lexcompat(
    theory: CPTheory,
    k: int,
    candidates: Iterable[PartialInstantiation],
    p: int,
) -> tuple[PartialInstantiation, ...]:
    """Top-p for a theory known to be k-lexico-compatible, without building
    the whole tree: each pair follows the single branch along its shared
    values until a chosen label separates it."""
    items = list(dict.fromkeys(candidates))
    cache: dict[tuple[PartialInstantiation, PartialInstantiation], bool] = {}

    def branch_better(o, o_prime) -> bool:
        if (o, o_prime) in cache:
            return cache[(o, o_prime)]
        ctx = NodeContext.root(theory.schema)
        while True:
            cand = choose_attribute(theory, ctx, k)
            if cand is None:
                raise NotLexicoCompatibleError(
                    f"theory is not {k}-lexico-compatible"
                )
            mine = o.restrict(cand.attrs)
            theirs = o_prime.restrict(cand.attrs)
            if mine != theirs:
                verdict = cand.order.index(mine) < cand.order.index(theirs)
                cache[(o, o_prime)] = verdict
                cache[(o_prime, o)] = not verdict
                return verdict
            ctx = ctx.child(cand.attrs, mine)

    return assemble_top_p(items, branch_better, p, theory.schema)


# ---------------------------------------------------------------------------
# Hardness-reduction generator


def gen_3sat_reduction(
    clauses: Sequence[Sequence[int]], num_vars: int | None = None
) -> CPTheory:
    """Encode a CNF as a theory that is 1-lexico-compatible iff the CNF is
    unsatisfiable.

    Clauses are sequences of nonzero literals (DIMACS style) over variables
    1..n.  Clause k contributes, per literal l, the statement
    ``l | {Yk} : Y(k-1)=t >= Y(k-1)=f``; a closing statement
    ``true | {Y0} : Ym=t >= Ym=f`` ties the chain shut.  With no clauses the
    free part would collide with the swap, so the closing statement is emitted
    with an empty free part.
    """
    seen = {abs(l) for clause in clauses for l in clause}
    if num_vars is None:
        num_vars = max(seen, default=1)
    for clause in clauses:
        if not clause:
            raise ValidationError("clauses must contain at least one literal")
        for l in clause:
            if l == 0 or abs(l) > num_vars:
                raise ValidationError(f"literal {l} out of range for {num_vars} variables")
    m = len(clauses)
    names = [f"X{i}" for i in range(1, num_vars + 1)] + [f"Y{j}" for j in range(m + 1)]
    schema = AttributeSchema.of((n, ("t", "f")) for n in names)
    statements = []
    for k, clause in enumerate(clauses, start=1):
        for l in clause:
            statements.append(
                CPStatement.make(
                    schema,
                    {f"Y{k - 1}": "t"},
                    {f"Y{k - 1}": "f"},
                    condition=Atom(f"X{abs(l)}", "t" if l > 0 else "f"),
                    free=(f"Y{k}",),
                )
            )
    statements.append(
        CPStatement.make(
            schema,
            {f"Y{m}": "t"},
            {f"Y{m}": "f"},
            free=(f"Y{0}",) if m > 0 else (),
        )
    )
    return CPTheory(schema, tuple(statements))
