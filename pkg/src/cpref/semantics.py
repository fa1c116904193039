"""Worsening-swap semantics of statement theories.

A statement sanctions worsening swaps between alternatives; the induced
preference relation is the reflexive-transitive closure of all sanctioned
swaps.  Dominance is decided by budgeted breadth-first reachability, and the
exhaustive closure oracle materialises the whole relation at desk scale to
answer the query catalogue exactly.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .model import (
    AttributeSchema,
    CPStatement,
    CPTheory,
    PartialInstantiation,
    ValidationError,
    eval_formula,
)

DEFAULT_ORACLE_CAP = 1 << 20


class OracleTooLargeError(RuntimeError):
    """The alternative space exceeds the cap for exhaustive computation."""


class Relation(enum.Enum):
    """Outcome of comparing two distinct alternatives."""

    STRICTLY_BETTER = "strictly-better"
    STRICTLY_WORSE = "strictly-worse"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


class OptimumKind(enum.Enum):
    WEAKLY_UNDOMINATED = "weakly-undominated"
    UNDOMINATED = "undominated"
    DOMINATING = "dominating"
    STRONGLY_DOMINATING = "strongly-dominating"


class _BudgetExhausted:
    """Distinct search outcome; deliberately not coercible to bool."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BUDGET_EXHAUSTED"

    def __bool__(self):
        raise TypeError("budget-exhausted outcome must not be used as a boolean")


BUDGET_EXHAUSTED = _BudgetExhausted()


@dataclass(frozen=True)
class SearchBudget:
    """Bounds on the reachability search: stored states and node expansions."""

    max_states: int
    max_expansions: int

    def __post_init__(self):
        if self.max_states <= 0 or self.max_expansions <= 0:
            raise ValidationError("search budget bounds must be positive")

    @classmethod
    def unlimited(cls) -> SearchBudget:
        return cls(2**63, 2**63)

    @classmethod
    def of(cls, n: int) -> SearchBudget:
        return cls(n, n)


# ---------------------------------------------------------------------------
# Explicit preorders


def _bool_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # float32 to hit BLAS; exact because path counts stay far below 2**24
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


def _transitive_closure(matrix: np.ndarray) -> np.ndarray:
    # Repeated squaring of the boolean incidence matrix.
    closure = matrix.copy()
    while True:
        step = closure | _bool_matmul(closure, closure)
        if np.array_equal(step, closure):
            return closure
        closure = step


@dataclass(frozen=True, eq=False)
class ExplicitPreorder:
    """A relation over the full alternative space, held as a boolean matrix.

    The universe is always the canonical enumeration of the schema's
    alternatives; ``matrix[i, j]`` means ``universe[i] >= universe[j]``.
    """

    schema: AttributeSchema
    universe: tuple[PartialInstantiation, ...]
    matrix: np.ndarray

    @cached_property
    def _index(self) -> dict[PartialInstantiation, int]:
        return {alt: i for i, alt in enumerate(self.universe)}

    @classmethod
    def from_pairs(
        cls,
        schema: AttributeSchema,
        pairs: Iterable[tuple[PartialInstantiation, PartialInstantiation]],
    ) -> ExplicitPreorder:
        """The least preorder containing the given pairs."""
        universe = tuple(schema.alternatives())
        index = {alt: i for i, alt in enumerate(universe)}
        matrix = np.eye(len(universe), dtype=bool)
        for o, o_prime in pairs:
            matrix[index[o], index[o_prime]] = True
        closed = _transitive_closure(matrix)
        closed.setflags(write=False)
        return cls(schema, universe, closed)

    @classmethod
    def identity(cls, schema: AttributeSchema) -> ExplicitPreorder:
        return cls.from_pairs(schema, ())

    def index_of(self, alt: PartialInstantiation) -> int:
        try:
            return self._index[alt]
        except KeyError:
            raise ValidationError(f"{alt!r} is not an alternative of this universe") from None

    def geq(self, o: PartialInstantiation, o_prime: PartialInstantiation) -> bool:
        return bool(self.matrix[self.index_of(o), self.index_of(o_prime)])

    def strictly_better(self, o: PartialInstantiation, o_prime: PartialInstantiation) -> bool:
        i, j = self.index_of(o), self.index_of(o_prime)
        return bool(self.matrix[i, j] and not self.matrix[j, i])

    def label(self, o: PartialInstantiation, o_prime: PartialInstantiation) -> Relation:
        if o == o_prime:
            raise ValidationError("labels are defined for distinct alternatives only")
        forward = self.geq(o, o_prime)
        backward = self.geq(o_prime, o)
        return _label_from(forward, backward)

    def pairs(self, strict_only: bool = False) -> Iterator[
        tuple[PartialInstantiation, PartialInstantiation]
    ]:
        """Related pairs in row-major universe order."""
        for i, o in enumerate(self.universe):
            for j, o_prime in enumerate(self.universe):
                if not self.matrix[i, j]:
                    continue
                if strict_only and self.matrix[j, i]:
                    continue
                yield o, o_prime

    def is_reflexive(self) -> bool:
        return bool(self.matrix.diagonal().all())

    def is_antisymmetric(self) -> bool:
        off_diagonal = self.matrix & self.matrix.T
        np.fill_diagonal(off_diagonal, False)
        return not off_diagonal.any()

    def is_preorder(self) -> bool:
        return self.is_reflexive() and np.array_equal(
            _transitive_closure(self.matrix), self.matrix
        )

    def extends(self, other: ExplicitPreorder) -> bool:
        """True iff every pair related by ``other`` is related by this relation."""
        if other.schema != self.schema:
            raise ValidationError("relations compare only over the same schema")
        return not (other.matrix & ~self.matrix).any()

    def __eq__(self, other):
        if not isinstance(other, ExplicitPreorder):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.schema, self.matrix.tobytes()))


def _label_from(forward: bool, backward: bool) -> Relation:
    if forward and backward:
        return Relation.EQUIVALENT
    if forward:
        return Relation.STRICTLY_BETTER
    if backward:
        return Relation.STRICTLY_WORSE
    return Relation.INCOMPARABLE


# ---------------------------------------------------------------------------
# Swaps and dominance


def sanctions(
    statement: CPStatement, o: PartialInstantiation, o_prime: PartialInstantiation
) -> bool:
    """True iff (o, o') is a worsening swap of the statement: both satisfy the
    condition with equal values there, the swap values match, and everything
    outside condition, free and swapped attributes is untouched."""
    u = statement.condition_vars
    if o.restrict(u) != o_prime.restrict(u):
        return False
    if not eval_formula(o, statement.condition):
        return False
    if not (o.extends(statement.better) and o_prime.extends(statement.worse)):
        return False
    untouched = o.var_set - u - statement.free - statement.swapped
    return all(o[a] == o_prime[a] for a in untouched)


def worsening_successors(
    theory: CPTheory, o: PartialInstantiation
) -> tuple[PartialInstantiation, ...]:
    """All alternatives one sanctioned swap below ``o``, deduplicated, in
    deterministic statement-then-instantiation order."""
    out: dict[PartialInstantiation, None] = {}
    for s in theory.statements:
        if not o.extends(s.better):
            continue
        if not eval_formula(o, s.condition):
            continue
        base = o.override(s.worse)
        for v in theory.schema.instantiations(s.free):
            out.setdefault(base.override(v))
    return tuple(out)


def dominates(
    theory: CPTheory,
    o: PartialInstantiation,
    o_prime: PartialInstantiation,
    budget: SearchBudget | None = None,
):
    """Decide ``o >= o'``: reflexively, or through a chain of worsening swaps.

    Breadth-first reachability with a visited set.  Returns True, False, or
    BUDGET_EXHAUSTED when the search was truncated; with an unlimited budget
    the answer is exact.
    """
    if o == o_prime:
        return True
    if budget is None:
        budget = SearchBudget.unlimited()
    seen = {o}
    frontier: deque[PartialInstantiation] = deque((o,))
    expansions = 0
    truncated = False
    while frontier:
        if expansions >= budget.max_expansions:
            truncated = True
            break
        current = frontier.popleft()
        expansions += 1
        for successor in worsening_successors(theory, current):
            if successor == o_prime:
                return True
            if successor in seen:
                continue
            if len(seen) >= budget.max_states:
                truncated = True
                continue
            seen.add(successor)
            frontier.append(successor)
    return BUDGET_EXHAUSTED if truncated else False


def compare(
    theory: CPTheory,
    o: PartialInstantiation,
    o_prime: PartialInstantiation,
    budget: SearchBudget | None = None,
):
    """Four-way label for a distinct pair, from the two dominance directions.

    Returns a Relation, or BUDGET_EXHAUSTED if either direction was truncated.
    """
    if o == o_prime:
        raise ValidationError("compare is defined for distinct alternatives only")
    forward = dominates(theory, o, o_prime, budget)
    backward = dominates(theory, o_prime, o, budget)
    if forward is BUDGET_EXHAUSTED or backward is BUDGET_EXHAUSTED:
        return BUDGET_EXHAUSTED
    return _label_from(forward, backward)


# ---------------------------------------------------------------------------
# The exhaustive oracle and the queries answered through it


def _check_cap(schema: AttributeSchema, cap: int) -> None:
    size = schema.universe_size()
    if size > cap:
        raise OracleTooLargeError(
            f"universe of {size} alternatives exceeds the cap of {cap}"
        )


def _swap_edges(theory: CPTheory) -> tuple[tuple[PartialInstantiation, ...], list[tuple[int, int]]]:
    universe = tuple(theory.schema.alternatives())
    index = {alt: i for i, alt in enumerate(universe)}
    edges = []
    for i, o in enumerate(universe):
        for successor in worsening_successors(theory, o):
            edges.append((i, index[successor]))
    return universe, edges


def closure_oracle(theory: CPTheory, cap: int = DEFAULT_ORACLE_CAP) -> ExplicitPreorder:
    """The exact induced relation: every sanctioned swap edge, closed
    reflexively and transitively over the enumerated universe."""
    _check_cap(theory.schema, cap)
    universe, edges = _swap_edges(theory)
    matrix = np.eye(len(universe), dtype=bool)
    for i, j in edges:
        matrix[i, j] = True
    closed = _transitive_closure(matrix)
    closed.setflags(write=False)
    return ExplicitPreorder(theory.schema, universe, closed)


def linearisable(theory: CPTheory, cap: int = DEFAULT_ORACLE_CAP) -> bool:
    """True iff the induced relation is antisymmetric, i.e. every strongly
    connected component of the sanctioned-swap graph is a singleton."""
    _check_cap(theory.schema, cap)
    universe, edges = _swap_edges(theory)
    n = len(universe)
    if not edges:
        return True
    rows, cols = zip(*edges)
    graph = csr_matrix((np.ones(len(edges), dtype=np.int8), (rows, cols)), shape=(n, n))
    n_components, _ = connected_components(graph, directed=True, connection="strong")
    return n_components == n


def equivalent(theory: CPTheory, other: CPTheory, cap: int = DEFAULT_ORACLE_CAP) -> bool:
    """True iff both theories induce the same relation."""
    if theory.schema != other.schema:
        raise ValidationError("equivalence compares theories over the same schema")
    return closure_oracle(theory, cap) == closure_oracle(other, cap)


def undominated_check(theory: CPTheory, o: PartialInstantiation) -> bool:
    """True iff no statement sanctions a swap into ``o``.

    A chain ending at ``o`` must end with a direct sanctioned predecessor, so
    a single scan over the statements decides the query.
    """
    for s in theory.statements:
        if o.extends(s.worse) and eval_formula(o, s.condition):
            return False
    return True


def optimum_check(
    theory: CPTheory,
    o: PartialInstantiation,
    kind: OptimumKind,
    cap: int = DEFAULT_ORACLE_CAP,
) -> bool:
    """Evaluate one of the optimality notions against the exhaustive relation."""
    oracle = closure_oracle(theory, cap)
    return _optimum_at(oracle, oracle.index_of(o), kind)


def _optimum_at(oracle: ExplicitPreorder, i: int, kind: OptimumKind) -> bool:
    row = oracle.matrix[i]
    col = oracle.matrix[:, i]
    others = np.arange(len(oracle.universe)) != i
    if kind is OptimumKind.WEAKLY_UNDOMINATED:
        return not (col & ~row).any()
    if kind is OptimumKind.UNDOMINATED:
        return not col[others].any()
    if kind is OptimumKind.DOMINATING:
        return bool(row.all())
    if kind is OptimumKind.STRONGLY_DOMINATING:
        return bool(row.all()) and not col[others].any()
    raise ValidationError(f"unknown optimum kind: {kind!r}")


def optimum_exists(
    theory: CPTheory, kind: OptimumKind, cap: int = DEFAULT_ORACLE_CAP
) -> PartialInstantiation | None:
    """A witness alternative of the requested kind, or None.

    A weakly undominated witness always exists: the strict relation is acyclic,
    so some vertex has no strict predecessor.
    """
    oracle = closure_oracle(theory, cap)
    for i, alt in enumerate(oracle.universe):
        if _optimum_at(oracle, i, kind):
            return alt
    return None


def geq_cut_extract(
    theory: CPTheory, o: PartialInstantiation
) -> PartialInstantiation | None:
    """Some alternative distinct from ``o`` that dominates it, or None.

    Any dominator chain ends with a direct sanctioned predecessor, so scanning
    the statements for an improving swap out of ``o`` is complete.
    """
    for s in theory.statements:
        if o.extends(s.worse) and eval_formula(o, s.condition):
            return o.override(s.better)
    return None


def assemble_top_p(
    candidates: Sequence[PartialInstantiation],
    strictly_better,
    p: int,
    schema: AttributeSchema,
) -> tuple[PartialInstantiation, ...]:
    """Greedy maximal-first sequence satisfying the top-p contract.

    ``strictly_better(a, b)`` must be an acyclic strict relation.  Ties among
    maximal candidates break towards the canonically smallest alternative.
    """
    remaining = sorted(dict.fromkeys(candidates), key=schema.sort_key)
    if p >= len(remaining):
        raise ValidationError("p must be smaller than the candidate set")
    out = []
    for _ in range(p):
        pick = next(
            o
            for o in remaining
            if not any(strictly_better(other, o) for other in remaining if other != o)
        )
        out.append(pick)
        remaining.remove(pick)
    return tuple(out)


def top_p_general(
    theory: CPTheory,
    candidates: Iterable[PartialInstantiation],
    p: int,
    cap: int = DEFAULT_ORACLE_CAP,
) -> tuple[PartialInstantiation, ...]:
    """A top-p sequence of the candidate set: no later element is strictly
    preferred to an earlier one.  Pairwise comparisons come from the oracle."""
    oracle = closure_oracle(theory, cap)
    return assemble_top_p(
        list(candidates), oracle.strictly_better, p, theory.schema
    )
