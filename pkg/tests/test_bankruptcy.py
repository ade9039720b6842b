import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from attribeo import (
    BankruptcyProblem,
    CombinationFunction,
    ExtendedPlayer,
    PlayerKind,
    aggregate_combinations,
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
from helpers import SKEWED, BALANCED, claims_feasible, problem_from

F = Fraction


def problem_as_bp(problem):
    return to_bankruptcy(aggregate_combinations(problem))


def test_skewed_claims_and_rules():
    bp = problem_as_bp(problem_from(SKEWED))
    assert bp.estate == 100
    assert bp.claims == {0: 90, 1: 40, 2: 80}
    assert bp.deficit == 110
    assert cel_lambda(bp) == F(110, 3)
    assert cel_rule(bp) == {0: F(160, 3), 1: F(10, 3), 2: F(130, 3)}
    assert prop_rule(bp) == {0: F(900, 21), 1: F(400, 21), 2: F(800, 21)}


def test_balanced_claims_and_rules():
    bp = problem_as_bp(problem_from(BALANCED))
    assert bp.claims == {0: 70, 1: 66, 2: 86}
    assert bp.deficit == 122
    assert apply_rule(bp, "cel") == {0: F(88, 3), 1: F(76, 3), 2: F(136, 3)}
    assert apply_rule(bp, "prop") == {0: F(7000, 222), 1: F(6600, 222), 2: F(8600, 222)}


def test_order_split_claims():
    problem = problem_from(SKEWED)
    bp, split = bankruptcy_order_extend(problem)
    assert {p.label(problem): c for p, c in bp.claims.items()} == {
        "1_1": 60, "1_2": 30, "2_1": 10, "2_3": 30, "3_1": 30, "3_2": 50}
    assert split[1] == (ExtendedPlayer(1, 1, PlayerKind.POSITION), ExtendedPlayer(1, 3, PlayerKind.POSITION))
    assert cel_lambda(bp) == 20
    assert list(cel_rule(bp).values()) == [40, 10, 0, 10, 10, 30]

    problem = problem_from(BALANCED)
    bp, _ = bankruptcy_order_extend(problem)
    assert list(bp.claims.values()) == [34, 36, 30, 36, 36, 50]
    assert cel_lambda(bp) == F(61, 3)


def test_skewed_cel_does_not_decompose():
    report = check_order_decomposition_bankruptcy(problem_from(SKEWED), "cel")
    assert report["cel-order-hypothesis"].witness == {"irrelevant": ["2_1"]}
    decomposition = report["order-decomposition[cel]"]
    assert decomposition.status == "info"
    assert decomposition.witness["2"] == {"whole": F(10, 3), "split": 10}
    assert decomposition.witness["1"] == {"whole": F(160, 3), "split": 50}
    assert report.ok


def test_balanced_cel_decomposes():
    report = check_order_decomposition_bankruptcy(problem_from(BALANCED), "cel")
    assert report["order-decomposition[cel]"].status == "pass"
    assert report["cel-order-share-condition"].status == "pass"


def test_prop_decomposes_on_skewed():
    assert check_order_decomposition_bankruptcy(problem_from(SKEWED), "prop")["order-decomposition[prop]"].passed


def test_pessimistic_game_and_minimal_rights():
    bp = problem_as_bp(problem_from(SKEWED))
    v = pessimistic_game(bp)
    assert v({0}) == 0
    assert v({0, 2}) == 60
    assert v({0, 1, 2}) == 100
    assert minimal_rights(BankruptcyProblem(100, {"a": 90, "b": 20})) == {"a": 80, "b": 10}


def test_witness_two_claimants():
    f = construct_kpi_witness(BankruptcyProblem(10, {1: 7, 2: 8}))
    assert dict(f.items()) == {frozenset([1]): 2, frozenset([2]): 3, frozenset([1, 2]): 5}


def test_incompatible_rejected():
    bp = BankruptcyProblem(5, {"a": 9, "b": 1})
    assert not is_attribution_compatible(bp)
    result = check_attribution_compatible(bp)
    assert not result.compatible
    with pytest.raises(ValueError):
        construct_kpi_witness(bp)
    with pytest.raises(ValueError):
        BankruptcyProblem(20, {"a": 9, "b": 1})
    with pytest.raises(ValueError):
        BankruptcyProblem(5, {"a": -1, "b": 9})


def test_exclusion_separates_rules():
    bp = BankruptcyProblem(30, {"a": 30, "b": 2, "c": 20})
    cel = check_rule_properties(bp, "cel")
    prop = check_rule_properties(bp, "prop")
    assert cel.ok and cel["EXC"].passed
    assert prop["EXC"].passed is False and prop["EXC"].status == "info"
    assert prop.ok


def test_zero_estate():
    bp = BankruptcyProblem(0, {"a": 0, "b": 0})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert apply_rule(bp, "cel") == {"a": 0, "b": 0}
        with pytest.raises(RuntimeWarning):
            cel_rule(bp)
    assert reduce_irrelevant(bp, "cel")[0] == bp


def test_ipl_removes_irrelevant():
    problem = problem_from(SKEWED)
    bp, _ = bankruptcy_order_extend(problem)
    reduced, shares = reduce_irrelevant(bp, "cel")
    assert len(reduced.claims) == 5
    assert all(shares[k] == cel_rule(bp)[k] for k in reduced.claims)


def test_repetition_monotonicity_repeated():
    problem = problem_from([("1", 20), ("1>2", 40), ("2>1", 10), ("2>1>2", 30)])
    k = [p for p, _ in problem.paths].index((1, 0))
    for rule in ("cel", "prop"):
        assert check_repetition_monotonicity_bankruptcy(problem, k, 1, rule).passed


def test_deficit_identity_simple():
    f = CombinationFunction({frozenset("ab"): 10, frozenset("abc"): 5, frozenset("c"): 1})
    assert combination_deficit(f) == 20
    assert to_bankruptcy(f).deficit == 20


claim_lists = st.lists(st.fractions(min_value=0, max_value=30, max_denominator=5), min_size=1, max_size=6)


@settings(max_examples=200)
@given(claim_lists, st.fractions(min_value=0, max_value=1, max_denominator=12))
def test_rules_on_family(claims, t):
    low, high = max(claims), sum(claims)
    bp = BankruptcyProblem(low + (high - low) * t, dict(enumerate(claims)))
    assert is_attribution_compatible(bp)
    for rule in ("cel", "prop"):
        assert check_rule_properties(bp, rule).ok
        reduce_irrelevant(bp, rule)
    if bp.estate:
        lam = cel_lambda(bp)
        assert sum(max(F(0), c - lam) for c in claims) == bp.estate


@settings(max_examples=200)
@given(claim_lists, st.fractions(min_value=0, max_value=1, max_denominator=12))
def test_witness_round_trip(claims, t):
    low, high = max(claims), sum(claims)
    bp = BankruptcyProblem(low + (high - low) * t, dict(enumerate(claims)))
    f = construct_kpi_witness(bp)
    assert f.is_nonnegative()
    image = to_bankruptcy(f)
    assert image.estate == bp.estate
    assert dict(image.claims) == dict(bp.claims)


def test_lp_oracle_small():
    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(1, 3)
        claims = [F(rng.randint(0, 6)) for _ in range(n)]
        estate = F(rng.randint(0, int(sum(claims))))
        bp = BankruptcyProblem(estate, dict(enumerate(claims)))
        assert is_attribution_compatible(bp) == claims_feasible(estate, claims)
