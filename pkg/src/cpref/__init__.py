"""Reasoning over conditional preference statements, CP-nets and
lexicographic preference trees on finite combinatorial domains."""

from .model import (
    Alternative,
    And,
    Atom,
    Attribute,
    AttributeSchema,
    Const,
    CPNet,
    CPNetTable,
    CPStatement,
    CPTheory,
    DependencyGraph,
    FALSE,
    Formula,
    Iff,
    Implies,
    LanguageProfile,
    Not,
    Or,
    PartialInstantiation,
    TRUE,
    ValidationError,
    classify,
    consistent_with,
    cpnet_to_statements,
    dependency_graph,
    eval_formula,
    preorder_to_cp,
)
from .semantics import (
    BUDGET_EXHAUSTED,
    DEFAULT_ORACLE_CAP,
    ExplicitPreorder,
    OptimumKind,
    OracleTooLargeError,
    Relation,
    SearchBudget,
    closure_oracle,
    compare,
    dominates,
    equivalent,
    geq_cut_extract,
    linearisable,
    optimum_check,
    optimum_exists,
    sanctions,
    top_p_general,
    undominated_check,
    worsening_successors,
)
from .lptree import (
    IncompleteTreeError,
    LinkKind,
    LPNode,
    LPRule,
    LPTree,
    OrderLink,
    compare_lptree,
    decide,
    is_complete,
    is_linearisable_lptree,
    lptree_to_statements,
    strict_chain_rule,
    strict_cut_count,
    top_p_lptree,
    validate,
)
from .lexcompat import (
    CandidateLabel,
    NodeBudgetError,
    NodeContext,
    NotLexicoCompatibleError,
    build_complete_lptree,
    choose_attribute,
    extends_check,
    gen_3sat_reduction,
    is_k_lexico_compatible,
    phi_at_node,
    relevant,
    top_p_lexcompat,
)
from .textio import (
    ParseError,
    parse_alternative,
    parse_instantiation,
    parse_lptree,
    parse_theory,
    serialize,
    serialize_lptree,
    serialize_preorder,
    serialize_theory,
)

__version__ = "0.1.0"
