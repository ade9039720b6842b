"""Repetition- and order-aware attribution through fictitious players.

A channel seen k times in a path is replaced there by occurrence players
``i^1..i^k``; a channel at position j is replaced by the position player
``i_j``. Each extension is again a sum game, so its Shapley value reduces to
per-path shares that never require the extended game to be tabulated.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .checks import Check, Report
from .problem import AttributionProblem, CombinationFunction, aggregate_combinations, total_benefit
from .sumgame import Allocation, shapley_sum_game


class PlayerKind(str, enum.Enum):
    OCCURRENCE = "occurrence"
    POSITION = "position"


@dataclass(frozen=True, order=True)
class ExtendedPlayer:
    channel: int
    index: int
    kind: PlayerKind

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("extended player indices start at 1")

    def label(self, problem: AttributionProblem) -> str:
        sep = "^" if self.kind is PlayerKind.OCCURRENCE else "_"
        return f"{problem.label(self.channel)}{sep}{self.index}"


@dataclass(frozen=True)
class ExtendedProblem:
    base: AttributionProblem
    players: tuple[ExtendedPlayer, ...]
    kpi: CombinationFunction
    kind: PlayerKind

    def players_of(self, channel: int) -> tuple[ExtendedPlayer, ...]:
        return tuple(p for p in self.players if p.channel == channel)


def _occurrence_set(path) -> frozenset[ExtendedPlayer]:
    counts = Counter(path)
    return frozenset(
        ExtendedPlayer(c, k, PlayerKind.OCCURRENCE) for c, n in counts.items() for k in range(1, n + 1)
    )


def _position_set(path) -> frozenset[ExtendedPlayer]:
    return frozenset(ExtendedPlayer(c, j, PlayerKind.POSITION) for j, c in enumerate(path, 1))


def repetition_extend(problem: AttributionProblem) -> ExtendedProblem:
    """Occurrence players ``i^1..i^{r_i}`` and the KPI over their combinations.

    The k-th appearance of a channel in a path is mapped to its k-th
    occurrence player, so a path contributes to the combination holding
    exactly as many occurrence players of each channel as it has appearances.
    """
    r = Counter()
    for path, _ in problem.paths:
        for c, n in Counter(path).items():
            r[c] = max(r[c], n)
    players = tuple(
        ExtendedPlayer(c, k, PlayerKind.OCCURRENCE) for c in sorted(r) for k in range(1, r[c] + 1)
    )
    kpi = CombinationFunction(((_occurrence_set(p), v) for p, v in problem.paths), universe=players)
    return ExtendedProblem(problem, players, kpi, PlayerKind.OCCURRENCE)


def order_extend(problem: AttributionProblem) -> ExtendedProblem:
    """Position players ``i_j`` for every (channel, position) pair that occurs."""
    players = sorted({p for path, _ in problem.paths for p in _position_set(path)})
    kpi = CombinationFunction(((_position_set(p), v) for p, v in problem.paths), universe=players)
    return ExtendedProblem(problem, tuple(players), kpi, PlayerKind.POSITION)


def shapley_repetition(problem: AttributionProblem) -> Allocation:
    """Per-channel attribution when repetitions count: ``sum_p n_i(p)/len(p) * f(p)``."""
    phi: Allocation = {i: Fraction(0) for i in range(problem.n)}
    for path, kpi in problem.paths:
        for c, n in Counter(path).items():
            phi[c] += Fraction(n, len(path)) * kpi
    return phi


def shapley_occurrence(problem: AttributionProblem) -> Allocation:
    """Value of each occurrence player in the repetition-extended sum game."""
    return shapley_sum_game(repetition_extend(problem).kpi)


def shapley_order(problem: AttributionProblem) -> Allocation:
    """Value of each position player: paths with channel i at position j share f(p)/len(p)."""
    phi: Allocation = {}
    for path, kpi in problem.paths:
        share = kpi / len(path)
        for j, c in enumerate(path, 1):
            key = ExtendedPlayer(c, j, PlayerKind.POSITION)
            phi[key] = phi.get(key, Fraction(0)) + share
    return dict(sorted(phi.items()))


def shapley_order_by_channel(problem: AttributionProblem) -> Allocation:
    """Position values summed per channel.

    With repeated channels this counts every appearance, which makes it equal
    to :func:`shapley_repetition`; no separate combined rule is defined.
    """
    totals: Allocation = {i: Fraction(0) for i in range(problem.n)}
    for player, value in shapley_order(problem).items():
        totals[player.channel] += value
    return totals


def position_attribution(problem: AttributionProblem) -> dict[int, Fraction]:
    """Credit per position: every path of length >= j gives f(p)/len(p) to position j."""
    longest = max(len(p) for p, _ in problem.paths)
    phi = {j: Fraction(0) for j in range(1, longest + 1)}
    for path, kpi in problem.paths:
        share = kpi / len(path)
        for j in range(1, len(path) + 1):
            phi[j] += share
    return phi


def repeat_channel(problem: AttributionProblem, path_index: int, channel: int) -> AttributionProblem:
    """Copy of ``problem`` with one more appearance of ``channel`` in the chosen path.

    The duplicate is placed right after the channel's first appearance and the
    path keeps its KPI; it merges with an existing identical path if there is one.
    """
    path, kpi = problem.paths[path_index]
    if channel not in path:
        raise ValueError(f"channel {problem.label(channel)!r} does not occur in path {path_index}")
    at = path.index(channel) + 1
    longer = path[:at] + (channel,) + path[at:]
    rows = [(problem.path_labels(p), v) for k, (p, v) in enumerate(problem.paths) if k != path_index]
    rows.append((problem.path_labels(longer), kpi))
    return AttributionProblem.from_rows(rows, [problem.label(i) for i in problem.declared])


_CHANNEL_RULES = {
    "shapley": lambda problem: shapley_sum_game(aggregate_combinations(problem)),
    "shapley-rep": shapley_repetition,
}


def check_repetition_monotonicity(
    problem: AttributionProblem,
    path_index: int,
    channel: int,
    rule: str = "shapley-rep",
) -> Check:
    """Compare a channel's attribution before and after repeating it once in a path."""
    attribute = _CHANNEL_RULES[rule]
    longer = repeat_channel(problem, path_index, channel)
    label = problem.label(channel)
    before = attribute(problem)[channel]
    after = attribute(longer)[longer.index(label)]
    return Check(
        f"repetition-monotonicity[{rule}]",
        after >= before,
        witness={"channel": label, "path": path_index, "before": before, "after": after},
    )


def check_order_decomposition(problem: AttributionProblem) -> Report:
    """Plain Shapley value of each channel against the sum of its position values.

    The identity is only guaranteed when no channel repeats within a path;
    otherwise the report lists the offending paths instead.
    """
    report = Report()
    repeated = [problem.path_labels(p) for p, _ in problem.paths if len(set(p)) < len(p)]
    if repeated:
        report.add(Check("order-decomposition", None, witness={"paths_with_repetition": repeated}))
        return report
    plain = shapley_sum_game(aggregate_combinations(problem))
    split = shapley_order_by_channel(problem)
    bad = {problem.label(i): (plain[i], split[i]) for i in plain if plain[i] != split[i]}
    report.add(Check("order-decomposition", not bad, witness={"violations": bad}))
    return report


def check_extension_efficiency(problem: AttributionProblem) -> Report:
    report = Report()
    b = total_benefit(problem)
    for name, values in (
        ("efficiency[shapley-rep]", shapley_repetition(problem).values()),
        ("efficiency[shapley-order]", shapley_order(problem).values()),
        ("efficiency[positions]", position_attribution(problem).values()),
    ):
        allocated = sum(values, Fraction(0))
        report.add(Check(name, allocated == b, witness={"allocated": allocated, "total": b}))
    return report
