"""Continuous positional payoffs on labeled game graphs.

Build payoffs as non-decreasing contracting bases of piecewise-linear maps,
solve two-player infinite-duration games under them by value iteration,
strategy improvement or exhaustive enumeration, and probe payoff properties
(prefix-monotonicity, shift-determinism, the multi-discounted form) with
sampling checkers.
"""

from .analysis import (
    DegenerateAnchorError,
    DetectorVerdict,
    PsiValue,
    ThreeLassoMdp,
    Witness,
    check_claim_identity,
    check_fairly_mixing,
    check_fairly_mixing_blocks,
    check_prefix_monotone,
    check_shift_deterministic,
    detect_multi_discounted,
    find_mdp_violation,
    fit_affine_shift,
    psi_payoff,
    psi_transform,
    three_lasso_expectation,
    verify_mdp_violation,
)
from .graph import (
    MAX,
    MIN,
    ChoiceArena,
    Edge,
    GameGraph,
    GameReport,
    GraphError,
    Lasso,
    LassoChoiceArena,
    PositionalStrategy,
    all_strategies,
    build_lasso_choice_game,
    build_two_entry_choice_game,
    consistent_edges,
    first_edge_strategy,
    game_from_json,
    game_to_json,
    game_to_json_str,
    play,
    validate,
    validate_game,
)
from .payoff import (
    DEFAULT_EPS,
    DEFAULT_EPS_CMP,
    CanonicalMetric,
    ContractingBase,
    FunctionPayoff,
    MultiDiscountedSpec,
    canonical_metric,
    compose_letters,
    diam_after,
    eval_multi_discounted,
    eval_payoff,
    eval_payoff_raw,
    from_multi_discounted,
    payoff_from_json,
    payoff_to_json,
    payoff_to_json_str,
)
from .pwl import (
    ContractionError,
    DomainError,
    PiecewiseLinearMap,
    compose_pwl,
    eval_pwl,
    pwl_fixed_point,
)
from .solver import (
    BruteForceResult,
    Equilibrium,
    SizeCapError,
    SolverError,
    ValueVector,
    VerifyReport,
    bellman_step,
    brute_force_solve,
    equilibrium_to_json,
    find_violating,
    modified_cost,
    neighbor_compare,
    random_switch_solve,
    reported_values,
    solve_value_iteration,
    strategy_improvement,
    strategy_value,
    switch,
    verify_equilibrium,
)
from .words import (
    Alphabet,
    UPWord,
    WordError,
    format_letters,
    format_word,
    parse_letters,
    parse_word,
    prepend,
    unroll,
    up_equal,
    upword,
)

__version__ = "0.1.0"
