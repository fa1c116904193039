"""Shared fixtures: the worked example theories and random-instance generators."""

from __future__ import annotations

import random

from cpref import (
    And,
    Atom,
    AttributeSchema,
    CPNet,
    CPNetTable,
    CPStatement,
    CPTheory,
    ExplicitPreorder,
    LinkKind,
    LPNode,
    LPRule,
    LPTree,
    Not,
    Or,
    OrderLink,
    TRUE,
    strict_chain_rule,
)


def alt(schema, **bindings):
    return schema.alternative({k: str(v) for k, v in bindings.items()})


def inst(schema, **bindings):
    return schema.instantiation({k: str(v) for k, v in bindings.items()})


# ---------------------------------------------------------------------------
# Worked examples
#
# The holiday theory: wait or go now (W), city (C), plane or car (P).


def ex2_schema():
    return AttributeSchema.of(
        [("W", ("w", "nw")), ("C", ("c1", "c2", "c3")), ("P", ("p", "np"))]
    )


def ex2_theory():
    s = ex2_schema()
    return CPTheory(
        s,
        (
            CPStatement.make(s, {"W": "nw"}, {"W": "w"}, free=("C", "P")),
            CPStatement.make(s, {"C": "c3"}, {"C": "c1"}),
            CPStatement.make(s, {"C": "c1"}, {"C": "c2"}),
            CPStatement.make(s, {"P": "p"}, {"P": "np"}, condition=Atom("W", "nw")),
            CPStatement.make(
                s, {"C": "c1", "P": "p"}, {"C": "c3", "P": "np"}, condition=Atom("W", "nw")
            ),
            CPStatement.make(
                s, {"P": "np"}, {"P": "p"}, condition=Atom("W", "w"), free=("C",)
            ),
        ),
    )


EX2_DSL = """\
attr W: w, nw
attr C: c1, c2, c3
attr P: p, np

stmt true | {C, P} : W=nw >= W=w
stmt true : C=c3 >= C=c1 >= C=c2
stmt W=nw : P=p >= P=np
stmt W=nw : C=c1,P=p >= C=c3,P=np
stmt W=w | {C} : P=np >= P=p
"""


# Two binary attributes whose linear order needs a two-attribute swap.


def ex3_schema():
    return AttributeSchema.of([("A", ("a", "na")), ("B", ("b", "nb"))])


def ex3_theory():
    s = ex3_schema()
    return CPTheory(
        s,
        (
            CPStatement.make(s, {"A": "a", "B": "b"}, {"A": "na", "B": "nb"}),
            CPStatement.make(s, {"B": "nb"}, {"B": "b"}, condition=Atom("A", "na")),
            CPStatement.make(s, {"A": "na", "B": "b"}, {"A": "a", "B": "nb"}),
        ),
    )


def ex3_chain(s):
    """The intended linear order, best first."""
    return (
        alt(s, A="a", B="b"),
        alt(s, A="na", B="nb"),
        alt(s, A="na", B="b"),
        alt(s, A="a", B="nb"),
    )


# Three binary attributes whose linear order fits no width-1 tree.


def ex5_theory():
    s = AttributeSchema.of([("A", ("a", "na")), ("B", ("b", "nb")), ("C", ("c", "nc"))])
    return CPTheory(
        s,
        (
            CPStatement.make(s, {"A": "a"}, {"A": "na"}),
            CPStatement.make(
                s, {"B": "nb"}, {"B": "b"}, condition=Atom("C", "nc"), free=("A",)
            ),
            CPStatement.make(
                s, {"B": "nb"}, {"B": "b"}, condition=And(Atom("A", "na"), Atom("C", "c"))
            ),
            CPStatement.make(
                s, {"B": "b"}, {"B": "nb"}, condition=And(Atom("A", "a"), Atom("C", "c"))
            ),
            CPStatement.make(s, {"C": "c"}, {"C": "nc"}, condition=Atom("A", "a")),
            CPStatement.make(
                s, {"C": "nc"}, {"C": "c"}, condition=Atom("A", "na"), free=("B",)
            ),
        ),
    )


# One statement making Y more important than all the X's.


def ex7_theory(n):
    names = [f"X{i}" for i in range(1, n + 1)]
    s = AttributeSchema.of([(x, ("x", "nx")) for x in names] + [("Y", ("y", "ny"))])
    return CPTheory(s, (CPStatement.make(s, {"Y": "y"}, {"Y": "ny"}, free=names),))


# Y's preference depends on all the X's; linear as statements, exponential as a net.


def ex8_schema(n):
    names = [f"X{i}" for i in range(1, n + 1)]
    return AttributeSchema.of([(x, ("x", "nx")) for x in names] + [("Y", ("y", "ny"))])


def ex8_theory(n):
    s = ex8_schema(n)
    names = [f"X{i}" for i in range(1, n + 1)]
    stmts = [CPStatement.make(s, {x: "x"}, {x: "nx"}) for x in names]
    all_pos = None
    for x in names:
        atom = Atom(x, "x")
        all_pos = atom if all_pos is None else And(all_pos, atom)
    stmts.append(CPStatement.make(s, {"Y": "y"}, {"Y": "ny"}, condition=all_pos))
    stmts.extend(
        CPStatement.make(s, {"Y": "ny"}, {"Y": "y"}, condition=Atom(x, "nx"))
        for x in names
    )
    return CPTheory(s, tuple(stmts))


def ex8_net(n):
    s = ex8_schema(n)
    names = tuple(f"X{i}" for i in range(1, n + 1))
    tables = [
        CPNetTable(x, (), ((s.empty_instantiation(), ("x", "nx")),)) for x in names
    ]
    y_rules = []
    for u in s.instantiations(names):
        positive = all(u[x] == "x" for x in names)
        y_rules.append((u, ("y", "ny") if positive else ("ny", "y")))
    tables.append(CPNetTable("Y", names, tuple(y_rules)))
    return CPNet(s, tuple(tables))


# Conditional chains over a three-valued attribute with a redundant tightening.


def ex9_schema():
    return AttributeSchema.of(
        [("A", ("a", "na")), ("B", ("b", "nb")), ("C", ("c1", "c2", "c3"))]
    )


def ex9_theory():
    s = ex9_schema()
    return CPTheory(
        s,
        (
            CPStatement.make(s, {"C": "c1"}, {"C": "c2"}, condition=Atom("A", "na")),
            CPStatement.make(s, {"C": "c2"}, {"C": "c3"}, condition=Atom("B", "b")),
            CPStatement.make(s, {"C": "c1"}, {"C": "c3"}, condition=Atom("A", "a")),
        ),
    )


def ex9_extra():
    return CPStatement.make(
        ex9_schema(), {"C": "c1"}, {"C": "c3"}, condition=Atom("B", "b")
    )


# ---------------------------------------------------------------------------
# Random instances


def random_schema(rng: random.Random, max_attrs=4, max_domain=3, min_attrs=2):
    n = rng.randint(min_attrs, max_attrs)
    pairs = []
    for i in range(n):
        name = "ABCDEFGH"[i]
        size = rng.randint(2, max_domain)
        pairs.append((name, tuple(f"{name.lower()}{j}" for j in range(size))))
    return AttributeSchema.of(pairs)


def random_condition(rng: random.Random, schema, attrs):
    if not attrs:
        return TRUE
    literals = []
    for a in attrs:
        literal = Atom(a, rng.choice(schema.domain(a)))
        literals.append(literal if rng.random() < 0.7 else Not(literal))
    f = literals[0]
    for lit in literals[1:]:
        f = And(f, lit) if rng.random() < 0.7 else Or(f, lit)
    return f


def random_theory(rng: random.Random, schema, max_statements=6):
    statements = []
    for _ in range(rng.randint(1, max_statements)):
        attrs = list(schema.names)
        rng.shuffle(attrs)
        w = attrs[: rng.randint(1, min(2, len(attrs)))]
        rest = attrs[len(w):]
        v = rest[: rng.randint(0, min(1, len(rest)))]
        rest = rest[len(v):]
        u = rest[: rng.randint(0, min(2, len(rest)))]
        better, worse = {}, {}
        for a in w:
            better[a], worse[a] = rng.sample(schema.domain(a), 2)
        statements.append(
            CPStatement.make(
                schema, better, worse, condition=random_condition(rng, schema, u), free=v
            )
        )
    return CPTheory(schema, tuple(statements))


def random_preorder(rng: random.Random, schema, max_pairs=14):
    universe = list(schema.alternatives())
    pairs = [
        (rng.choice(universe), rng.choice(universe))
        for _ in range(rng.randint(0, max_pairs))
    ]
    return ExplicitPreorder.from_pairs(schema, pairs)


def _random_rules(rng: random.Random, schema, label, noninst, linear, final):
    """One TRUE rule, or one rule per value of a crossed attribute.

    Orders stay antisymmetric unless the node is final (covers everything
    still unplaced on its branch): ties above distinguishing structure make
    the node-decides relation intransitive, and the statement translation is
    exact only without them.
    """
    insts = list(schema.instantiations(label))

    def one_order(condition):
        base = insts[:]
        rng.shuffle(base)
        if linear or rng.random() < 0.4:
            return strict_chain_rule(condition, base)
        if not final:
            # random subset of pairs consistent with one linear order
            links = []
            for _ in range(rng.randint(0, len(insts))):
                i, j = sorted(rng.sample(range(len(base)), 2))
                links.append(OrderLink(base[i], base[j], LinkKind.STRICT))
            return LPRule(condition, tuple(links))
        links = []
        for _ in range(rng.randint(0, len(insts) + 1)):
            left, right = rng.sample(insts, 2)
            kind = LinkKind.STRICT if rng.random() < 0.7 else LinkKind.EQUIV
            links.append(OrderLink(left, right, kind))
        return LPRule(condition, tuple(links))

    if noninst and rng.random() < 0.5:
        split = rng.choice(sorted(noninst))
        return tuple(
            one_order(Atom(split, v)) for v in schema.domain(split)
        )
    return (one_order(TRUE),)


def random_lptree(rng: random.Random, schema, k=2, complete=False):
    """A structurally valid tree; ``complete`` forces full branches and
    linear rules."""

    def grow(remaining, noninst):
        size = rng.randint(1, min(k, len(remaining)))
        label = tuple(
            sorted(rng.sample(remaining, size), key=schema.position)
        )
        rest = [a for a in remaining if a not in label]
        if complete:
            mode = "leaf" if not rest else rng.choice(("labelled", "labelled", "unlabelled"))
        elif not rest:
            mode = "leaf"
        else:
            mode = rng.choice(("none", "labelled", "labelled", "unlabelled"))
        rules = _random_rules(
            rng, schema, label, noninst, linear=complete, final=mode == "leaf"
        )
        if mode in ("leaf", "none"):
            return LPNode(label, rules, ())
        if mode == "unlabelled":
            child = grow(rest, noninst | set(label))
            return LPNode(label, rules, ((None, child),))
        edges = tuple(
            (value, grow(rest, noninst)) for value in schema.instantiations(label)
        )
        return LPNode(label, rules, edges)

    return LPTree(schema, grow(list(schema.names), set()))


def brute_force_sat(clauses, num_vars):
    """Exhaustive satisfiability check over all assignments."""
    for bits in range(2 ** num_vars):
        assignment = {i + 1: bool(bits >> i & 1) for i in range(num_vars)}
        if all(
            any(assignment[abs(l)] == (l > 0) for l in clause) for clause in clauses
        ):
            return True
    return False
