"""Calculus engine and finite-model checker for stochastic, variation and
extended conditional independence."""

from .universe import (
    CIStatement,
    ComplementarityDecl,
    ReductionRegistry,
    Universe,
    VarSet,
    canonicalize,
    is_reduction,
    join,
    statement,
    well_formed,
)
from .dsl import parse_session, parse_statement, render_statement
from .engine import (
    ClosureResult,
    Derivation,
    Limits,
    NotDerivable,
    RuleSet,
    apply_rule,
    closure,
    format_proof,
    prove,
    replay,
    rule_set,
)
from .models import (
    DiscreteDistribution,
    RegimeFamily,
    WitnessTable,
    check_complementary,
    check_eci,
    check_eci_general,
    check_pairwise_eci,
    check_sci,
    check_vci,
    compute_S_z,
    conditional,
    conditional_image,
    find_dominating,
    partition_meet,
    product_space,
)
from .files import load_model, load_strategy, dump_model
from .search import (
    SearchConfig,
    axiom_soundness_scan,
    exhaustive_vci_scan,
    random_distribution,
    random_family,
    search_counterexample,
)
from .causal import (
    AceResult,
    InfoBase,
    Strategy,
    ace,
    check_ancillarity,
    check_extended_stability,
    check_simple_stability,
    check_sufficiency,
    g_formula,
)

__all__ = [
    "AceResult",
    "CIStatement",
    "ClosureResult",
    "ComplementarityDecl",
    "Derivation",
    "DiscreteDistribution",
    "InfoBase",
    "Limits",
    "NotDerivable",
    "ReductionRegistry",
    "RegimeFamily",
    "RuleSet",
    "SearchConfig",
    "Strategy",
    "Universe",
    "VarSet",
    "WitnessTable",
    "ace",
    "apply_rule",
    "axiom_soundness_scan",
    "canonicalize",
    "check_ancillarity",
    "check_complementary",
    "check_eci",
    "check_eci_general",
    "check_extended_stability",
    "check_pairwise_eci",
    "check_sci",
    "check_simple_stability",
    "check_sufficiency",
    "check_vci",
    "closure",
    "compute_S_z",
    "conditional",
    "conditional_image",
    "dump_model",
    "exhaustive_vci_scan",
    "find_dominating",
    "format_proof",
    "g_formula",
    "is_reduction",
    "join",
    "load_model",
    "load_strategy",
    "parse_session",
    "parse_statement",
    "partition_meet",
    "product_space",
    "prove",
    "random_distribution",
    "random_family",
    "render_statement",
    "replay",
    "rule_set",
    "search_counterexample",
    "statement",
    "well_formed",
]

__version__ = "0.1.0"
