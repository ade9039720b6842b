"""Shapley- and bankruptcy-based attribution of campaign benefits to marketing channels."""

from .bankruptcy import (
    AttributionCompatibility,
    BankruptcyProblem,
    IncompatibleProblemError,
    Rule,
    apply_rule,
    bankruptcy_order_extend,
    cel_lambda,
    cel_rule,
    check_attribution_compatible,
    check_order_decomposition_bankruptcy,
    check_repetition_monotonicity_bankruptcy,
    check_rule_properties,
    combination_deficit,
    construct_kpi_witness,
    is_attribution_compatible,
    minimal_rights,
    pessimistic_game,
    prop_rule,
    reduce_irrelevant,
    to_bankruptcy,
)
from .checks import Check, PropertyViolation, Report
from .extensions import (
    ExtendedPlayer,
    ExtendedProblem,
    PlayerKind,
    check_extension_efficiency,
    check_order_decomposition,
    check_repetition_monotonicity,
    order_extend,
    position_attribution,
    repeat_channel,
    repetition_extend,
    shapley_occurrence,
    shapley_order,
    shapley_order_by_channel,
    shapley_repetition,
)
from .problem import (
    AttributionProblem,
    CombinationFunction,
    Format,
    ParseError,
    PathStats,
    aggregate_combinations,
    parse_problem,
    path_stats,
    serialize_problem,
    total_benefit,
)
from .rational import decimal_string, format_rational, parse_rational, rational_json
from .sumgame import (
    Allocation,
    CharacteristicFunction,
    ResourceLimitError,
    SumGame,
    check_axioms,
    check_stability,
    coalition_payoff,
    find_independent_partition,
    harsanyi_dividends,
    shapley_bruteforce,
    shapley_sum_game,
    sum_game,
    unanimity_game,
)

__version__ = "0.1.0"
