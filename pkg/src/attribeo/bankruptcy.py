"""Attribution as a claims problem: PROP and CEL shares and their properties.

Each channel claims the full KPI of every combination it belongs to; the
estate is the campaign total. Problems arising this way are exactly those
with ``max claim <= estate <= total claims``.
"""

from __future__ import annotations

import enum
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .checks import Check, PropertyViolation, Report
from .extensions import ExtendedPlayer, PlayerKind
from .problem import AttributionProblem, CombinationFunction, aggregate_combinations, total_benefit
from .sumgame import Allocation, CharacteristicFunction


class IncompatibleProblemError(ValueError):
    """The claims problem cannot come from any attribution problem."""


class Rule(str, enum.Enum):
    CEL = "cel"
    PROP = "prop"


@dataclass(frozen=True)
class BankruptcyProblem:
    estate: Fraction
    claims: Mapping[Hashable, Fraction]

    def __post_init__(self):
        claims = {k: Fraction(v) for k, v in dict(self.claims).items()}
        object.__setattr__(self, "claims", claims)
        object.__setattr__(self, "estate", Fraction(self.estate))
        if not claims:
            raise ValueError("a claims problem needs at least one claimant")
        if any(c < 0 for c in claims.values()):
            raise ValueError("claims must be nonnegative")
        if self.estate < 0:
            raise ValueError("the estate must be nonnegative")
        if self.estate > self.total_claims:
            raise ValueError("the estate exceeds the total claims")

    @property
    def claimants(self) -> tuple:
        return tuple(self.claims)

    @property
    def total_claims(self) -> Fraction:
        return sum(self.claims.values(), Fraction(0))

    @property
    def deficit(self) -> Fraction:
        return self.total_claims - self.estate

    def without(self, removed: Iterable[Hashable]) -> BankruptcyProblem:
        removed = set(removed)
        return BankruptcyProblem(self.estate, {k: c for k, c in self.claims.items() if k not in removed})


def to_bankruptcy(f: CombinationFunction) -> BankruptcyProblem:
    claims = {p: Fraction(0) for p in f.universe}
    for combo, value in f.items():
        for p in combo:
            claims[p] += value
    return BankruptcyProblem(f.total(), claims)


def combination_deficit(f: CombinationFunction) -> Fraction:
    """Deficit written directly over combinations: ``sum (|S| - 1) f(S)``."""
    return sum(((len(combo) - 1) * value for combo, value in f.items()), Fraction(0))


def prop_rule(bp: BankruptcyProblem) -> Allocation:
    total = bp.total_claims
    if total == 0:
        return {k: Fraction(0) for k in bp.claims}
    return {k: c * bp.estate / total for k, c in bp.claims.items()}


def cel_lambda(bp: BankruptcyProblem) -> Fraction:
    """Loss level solving ``sum max(0, c_i - lam) = E``.

    Walks the claims in decreasing order; on the segment where the k largest
    claims are the active ones the equation is linear and solved exactly.
    """
    ordered = sorted(bp.claims.values(), reverse=True)
    if bp.estate == 0:
        return ordered[0]
    prefix = Fraction(0)
    for k, claim in enumerate(ordered, 1):
        prefix += claim
        floor = ordered[k] if k < len(ordered) else Fraction(0)
        # awards at the next breakpoint, with exactly the k largest claims active
        if prefix - k * floor >= bp.estate:
            return (prefix - bp.estate) / k
    raise AssertionError("estate exceeds total claims")  # excluded by BankruptcyProblem


def cel_rule(bp: BankruptcyProblem) -> Allocation:
    if bp.estate == 0:
        warnings.warn("zero estate: every CEL share is zero", RuntimeWarning, stacklevel=2)
        return {k: Fraction(0) for k in bp.claims}
    lam = cel_lambda(bp)
    return {k: max(Fraction(0), c - lam) for k, c in bp.claims.items()}


def apply_rule(bp: BankruptcyProblem, rule: Rule | str) -> Allocation:
    rule = Rule(rule)
    if rule is Rule.CEL:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return cel_rule(bp)
    return prop_rule(bp)


def pessimistic_game(bp: BankruptcyProblem) -> CharacteristicFunction:
    """``v(S) = max(0, E - claims outside S)``."""
    claims = dict(bp.claims)
    total = bp.total_claims

    def worth(coalition: frozenset) -> Fraction:
        if not coalition:
            return Fraction(0)
        outside = total - sum((claims[k] for k in coalition), Fraction(0))
        return max(Fraction(0), bp.estate - outside)

    return CharacteristicFunction(bp.claimants, worth)


def minimal_rights(bp: BankruptcyProblem) -> Allocation:
    total = bp.total_claims
    return {k: max(Fraction(0), bp.estate - (total - c)) for k, c in bp.claims.items()}


def is_attribution_compatible(bp: BankruptcyProblem) -> bool:
    return bp.total_claims >= bp.estate >= max(bp.claims.values())


@dataclass(frozen=True)
class AttributionCompatibility:
    compatible: bool
    witness: CombinationFunction | None = field(default=None)


def check_attribution_compatible(bp: BankruptcyProblem) -> AttributionCompatibility:
    if not is_attribution_compatible(bp):
        return AttributionCompatibility(False)
    return AttributionCompatibility(True, construct_kpi_witness(bp))


def construct_kpi_witness(bp: BankruptcyProblem) -> CombinationFunction:
    """Nonnegative combination KPI whose estate and claims are exactly ``bp``'s.

    Built by induction on the number of claimants with claims in ascending
    order (ties keep claimant order). The largest claimant either gets the
    excess over the runner-up as a stand-alone value and joins every
    combination of the runner-up in a smaller problem, or the smaller problem
    is settled with singletons and the runner-up pair carries the deficit.
    """
    if not is_attribution_compatible(bp):
        raise IncompatibleProblemError(
            "need max claim <= estate <= total claims for a KPI witness")
    order = sorted(range(len(bp.claims)), key=lambda k: (list(bp.claims.values())[k], k))
    players = [bp.claimants[k] for k in order]
    claims = [bp.claims[p] for p in players]
    values = _witness(players, claims, bp.estate)
    return CombinationFunction(values.items(), universe=bp.claimants)


def _witness(players: list, claims: list[Fraction], estate: Fraction) -> Counter:
    f: Counter = Counter()
    if len(players) == 1:
        f[frozenset(players)] = estate
        return f
    if len(players) == 2:
        (a, b), (ca, cb) = players, claims
        f[frozenset([a])] = estate - cb
        f[frozenset([b])] = estate - ca
        f[frozenset([a, b])] = ca + cb - estate
        return f
    top, runner = players[-1], players[-2]
    c_top, c_runner = claims[-1], claims[-2]
    rest = sum(claims[:-1], Fraction(0))
    gap, excess = c_top - c_runner, estate - rest
    if gap >= excess:
        f[frozenset([top])] = gap
        for combo, value in _witness(players[:-1], claims[:-1], estate - gap).items():
            f[combo | {top} if runner in combo else combo] += value
        return f
    deficit = rest + c_top - estate
    f[frozenset([top])] = excess
    for p, c in zip(players[:-2], claims[:-2]):
        f[frozenset([p])] = c
    f[frozenset([runner])] = c_runner - deficit
    f[frozenset([runner, top])] = deficit
    return f


def check_rule_properties(bp: BankruptcyProblem, rule: Rule | str) -> Report:
    """IND, EFF, ETE, EXC and CMR for one rule; EXC and CMR are only asserted for CEL."""
    rule = Rule(rule)
    report = Report()
    shares = apply_rule(bp, rule)
    bad = [k for k, c in bp.claims.items() if not 0 <= shares[k] <= c]
    report.add(Check("IND", not bad, witness={"violations": bad}))
    allocated = sum(shares.values(), Fraction(0))
    report.add(Check("EFF", allocated == bp.estate, witness={"allocated": allocated, "estate": bp.estate}))
    bad = [
        (a, b) for a in bp.claims for b in bp.claims
        if a != b and bp.claims[a] == bp.claims[b] and shares[a] != shares[b]
    ]
    report.add(Check("ETE", not bad, witness={"violations": bad}))
    n = len(bp.claims)
    threshold = bp.deficit / n
    bad = [k for k, c in bp.claims.items() if c <= threshold and shares[k] != 0]
    report.add(Check("EXC", not bad, asserted=rule is Rule.CEL, witness={
        "threshold": threshold, "violations": bad}))

    m = minimal_rights(bp)
    inner = BankruptcyProblem(
        bp.estate - sum(m.values(), Fraction(0)), {k: c - m[k] for k, c in bp.claims.items()})
    inner_shares = apply_rule(inner, rule)
    bad = [k for k in bp.claims if shares[k] != m[k] + inner_shares[k]]
    report.add(Check("CMR", not bad, asserted=rule is Rule.CEL, witness={
        "minimal_rights": m, "violations": bad}))
    report.add(Check("CMR-inner-compatible", is_attribution_compatible(inner),
                     asserted=is_attribution_compatible(bp),
                     witness={"estate": inner.estate, "claims": inner.claims}))
    return report


def reduce_irrelevant(bp: BankruptcyProblem, rule: Rule | str) -> tuple[BankruptcyProblem, Allocation]:
    """Drop every claimant the rule awards nothing and re-solve the smaller problem.

    Raises :class:`PropertyViolation` if the survivors' shares move or the
    reduced problem stops being a claims problem.
    """
    shares = apply_rule(bp, rule)
    if bp.estate == 0:
        return bp, shares
    irrelevant = [k for k, s in shares.items() if s == 0]
    if not irrelevant:
        return bp, shares
    try:
        reduced = bp.without(irrelevant)
    except ValueError as exc:
        raise PropertyViolation(f"reduced problem is not a claims problem: {exc}") from exc
    reduced_shares = apply_rule(reduced, rule)
    moved = [k for k in reduced.claims if reduced_shares[k] != shares[k]]
    if moved:
        raise PropertyViolation(f"shares changed after removing irrelevant claimants: {moved}")
    return reduced, reduced_shares


def bankruptcy_order_extend(
    problem: AttributionProblem,
) -> tuple[BankruptcyProblem, dict[int, tuple[ExtendedPlayer, ...]]]:
    """Claims problem over position players plus the channel -> position players map.

    The claim of ``i_j`` is the KPI of every path with channel i at position j.
    """
    claims: dict[ExtendedPlayer, Fraction] = {}
    for path, kpi in problem.paths:
        for j, c in enumerate(path, 1):
            key = ExtendedPlayer(c, j, PlayerKind.POSITION)
            claims[key] = claims.get(key, Fraction(0)) + kpi
    claims = dict(sorted(claims.items()))
    split = {i: tuple(p for p in claims if p.channel == i) for i in range(problem.n)}
    return BankruptcyProblem(total_benefit(problem), claims), split


def check_order_decomposition_bankruptcy(problem: AttributionProblem, rule: Rule | str) -> Report:
    """Compare each channel's share with the summed shares of its position players."""
    rule = Rule(rule)
    report = Report()
    repeated = [problem.path_labels(p) for p, _ in problem.paths if len(set(p)) < len(p)]
    if repeated:
        report.add(Check(f"order-decomposition[{rule.value}]", None,
                         witness={"paths_with_repetition": repeated}))
        return report

    base = to_bankruptcy(aggregate_combinations(problem))
    split_bp, split = bankruptcy_order_extend(problem)
    bad = [problem.label(i) for i, parts in split.items()
           if sum((split_bp.claims[p] for p in parts), Fraction(0)) != base.claims[i]]
    report.add(Check("order-split-claims", not bad, witness={"violations": bad}))
    report.add(Check("order-split-deficit", split_bp.deficit == base.deficit,
                     witness={"deficit": base.deficit, "split_deficit": split_bp.deficit}))
    report.add(Check("order-split-compatible", is_attribution_compatible(split_bp)))

    whole = apply_rule(base, rule)
    parts_shares = apply_rule(split_bp, rule)
    summed = {i: sum((parts_shares[p] for p in parts), Fraction(0)) for i, parts in split.items()}
    comparison = {problem.label(i): {"whole": whole[i], "split": summed[i]} for i in split}

    for i in split:
        report.add(Check(f"splitting-proof[{problem.label(i)}]", whole[i] >= summed[i], asserted=False,
                         witness=comparison[problem.label(i)]))

    exact = all(whole[i] == summed[i] for i in split)
    if rule is Rule.PROP:
        report.add(Check("order-decomposition[prop]", exact, witness=comparison))
        return report

    irrelevant = [problem.label(i) for i in split if whole[i] == 0]
    irrelevant += [p.label(problem) for p, s in parts_shares.items() if s == 0]
    if irrelevant:
        report.add(Check("cel-order-hypothesis", None, witness={"irrelevant": irrelevant}))
        report.add(Check("order-decomposition[cel]", exact, asserted=False, witness=comparison))
        return report

    n = len(split)
    counts = {i: len(parts) for i, parts in split.items()}
    total_parts = sum(counts.values())
    bad = []
    for i in split:
        ge = whole[i] >= summed[i]
        le = whole[i] <= summed[i]
        if ge != (counts[i] * n >= total_parts) or le != (counts[i] * n <= total_parts):
            bad.append(problem.label(i))
    report.add(Check("cel-order-share-condition", not bad, witness={
        "order_players": {problem.label(i): counts[i] for i in split}, "violations": bad}))
    balanced = len(set(counts.values())) == 1
    report.add(Check("order-decomposition[cel]", exact, asserted=balanced, witness=comparison))
    return report


def check_repetition_monotonicity_bankruptcy(
    problem: AttributionProblem,
    path_index: int,
    channel: int,
    rule: Rule | str,
) -> Check:
    """Share of a channel against the joint share of its two halves after one repetition.

    The repeated channel is split into one claimant holding its old claim and
    one holding the repeated path's KPI; the estate is unchanged.
    """
    rule = Rule(rule)
    path, kpi = problem.paths[path_index]
    if channel not in path:
        raise ValueError(f"channel {problem.label(channel)!r} does not occur in path {path_index}")
    base = to_bankruptcy(aggregate_combinations(problem))
    first = ExtendedPlayer(channel, 1, PlayerKind.OCCURRENCE)
    second = ExtendedPlayer(channel, 2, PlayerKind.OCCURRENCE)
    claims: dict = {k: c for k, c in base.claims.items() if k != channel}
    claims[first] = base.claims[channel]
    claims[second] = kpi
    extended = BankruptcyProblem(base.estate, claims)
    before = apply_rule(base, rule)[channel]
    shares = apply_rule(extended, rule)
    after = shares[first] + shares[second]
    return Check(f"repetition-monotonicity[{rule.value}]", after >= before, witness={
        "channel": problem.label(channel), "path": path_index, "before": before, "after": after})
