"""Sum games, Harsanyi dividends and Shapley values, with the attribution axioms."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .checks import Check, Report
from .problem import CombinationFunction, sort_players

Allocation = dict[Hashable, Fraction]

DIVIDEND_CAP = 20
ORACLE_CAP = 12
STABILITY_CAP = 12


class ResourceLimitError(RuntimeError):
    """A brute-force computation was requested above its configured size cap."""


def _scale(values: Sequence[Fraction]) -> tuple[list[int], int]:
    """Express rationals as integers over one common denominator."""
    den = math.lcm(*(Fraction(v).denominator for v in values)) if values else 1
    return [int(v * den) for v in values], den


def _popcounts(n: int) -> list[int]:
    return [m.bit_count() for m in range(1 << n)]


def _mask_members(players: Sequence[Hashable], mask: int) -> frozenset:
    return frozenset(p for k, p in enumerate(players) if mask >> k & 1)


class CharacteristicFunction:
    """TU game on a finite player set; ``worth`` maps coalitions to rationals."""

    def __init__(self, players: Iterable[Hashable], worth: Callable[[frozenset], Fraction]):
        self.players = tuple(players)
        self._worth = worth
        if self._worth(frozenset()) != 0:
            raise ValueError("the empty coalition must be worth 0")

    def __call__(self, coalition: Iterable[Hashable]) -> Fraction:
        coalition = frozenset(coalition)
        if not coalition:
            return Fraction(0)
        return Fraction(self._worth(coalition))

    def table(self, players: Sequence[Hashable] | None = None) -> list[Fraction]:
        """Worth of every coalition of ``players``, indexed by bitmask."""
        players = self.players if players is None else tuple(players)
        return [self(_mask_members(players, mask)) for mask in range(1 << len(players))]


class SumGame(CharacteristicFunction):
    """Coalition worth = total KPI of all combinations contained in the coalition."""

    def __init__(self, kpi: CombinationFunction):
        self.kpi = kpi
        super().__init__(kpi.universe, self._sum_inside)

    def _sum_inside(self, coalition: frozenset) -> Fraction:
        return sum((v for combo, v in self.kpi.items() if combo <= coalition), Fraction(0))

    def table(self, players: Sequence[Hashable] | None = None) -> list[Fraction]:
        # zeta transform over subsets instead of one support scan per coalition
        players = self.players if players is None else tuple(players)
        bit = {p: 1 << k for k, p in enumerate(players)}
        members = frozenset(players)
        size = 1 << len(players)
        entries = [(sum(bit[p] for p in combo), v) for combo, v in self.kpi.items() if combo <= members]
        ints, den = _scale([v for _, v in entries])
        acc = [0] * size
        for (mask, _), value in zip(entries, ints):
            acc[mask] += value
        for k in range(len(players)):
            step = 1 << k
            for mask in range(size):
                if mask & step:
                    acc[mask] += acc[mask ^ step]
        return [Fraction(a, den) for a in acc]


def sum_game(f: CombinationFunction) -> SumGame:
    if not f.is_nonnegative():
        raise ValueError("sum games need a nonnegative combination function")
    return SumGame(f)


def unanimity_game(players: Iterable[Hashable], carrier: Iterable[Hashable]) -> CharacteristicFunction:
    carrier = frozenset(carrier)
    return CharacteristicFunction(players, lambda s: Fraction(int(bool(carrier) and carrier <= s)))


def harsanyi_dividends(
    v: CharacteristicFunction,
    players: Iterable[Hashable] | None = None,
    cap: int = DIVIDEND_CAP,
) -> CombinationFunction:
    """Dividends ``d_S = v(S) - sum_{T < S} d_T`` for every coalition of ``players``.

    The recursion is evaluated as a Moebius inversion over the subset lattice,
    which is O(n 2^n) rather than O(3^n) and yields the same values.
    """
    players = v.players if players is None else tuple(players)
    n = len(players)
    if n > cap:
        raise ResourceLimitError(f"{n} players exceed the dividend cap of {cap}")
    acc, den = _scale(v.table(players))
    size = 1 << n
    for k in range(n):
        step = 1 << k
        for mask in range(size):
            if mask & step:
                acc[mask] -= acc[mask ^ step]
    return CombinationFunction(
        ((_mask_members(players, mask), Fraction(acc[mask], den)) for mask in range(1, size) if acc[mask]),
        universe=players,
    )


def shapley_bruteforce(
    v: CharacteristicFunction,
    players: Iterable[Hashable] | None = None,
    cap: int = ORACLE_CAP,
) -> Allocation:
    """Shapley value as the weighted average of marginal contributions.

    Exponential in the number of players; intended as a reference oracle.
    """
    players = v.players if players is None else tuple(players)
    n = len(players)
    if n > cap:
        raise ResourceLimitError(f"{n} players exceed the oracle cap of {cap}")
    if n == 0:
        return {}
    worth, den = _scale(v.table(players))
    sizes = _popcounts(n)
    weights = [Fraction(math.factorial(s) * math.factorial(n - s - 1), math.factorial(n)) for s in range(n)]
    result: Allocation = {}
    for k, player in enumerate(players):
        bit = 1 << k
        by_size = [0] * n
        for mask in range(1 << n):
            if not mask & bit:
                by_size[sizes[mask]] += worth[mask | bit] - worth[mask]
        result[player] = sum((w * t for w, t in zip(weights, by_size)), Fraction(0)) / den
    return result


def shapley_sum_game(f: CombinationFunction) -> Allocation:
    """Shapley value of the sum game: each combination's KPI split equally among its members."""
    phi: Allocation = {p: Fraction(0) for p in f.universe}
    for combo, value in f.items():
        share = value / len(combo)
        for p in combo:
            phi[p] += share
    return phi


def coalition_payoff(alloc: Mapping[Hashable, Fraction], coalition: Iterable[Hashable]) -> Fraction:
    total = Fraction(0)
    for p in coalition:
        if p not in alloc:
            raise KeyError(f"player {p!r} is not in the allocation")
        total += alloc[p]
    return total


def _fmt_set(coalition: Iterable[Hashable]) -> list:
    return sort_players(coalition)


def check_stability(
    f: CombinationFunction,
    alloc: Mapping[Hashable, Fraction],
    cap: int = STABILITY_CAP,
) -> Check:
    """Core condition: every coalition receives at least its sum-game worth.

    Exhaustive over all coalitions when the player count is within ``cap``;
    otherwise over support sets and their pairwise unions.
    """
    players = tuple(f.universe)
    n = len(players)
    game = SumGame(f)
    if n <= cap:
        worth = game.table(players)
        pay = [Fraction(0)] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            pay[mask] = pay[mask ^ low] + alloc[players[low.bit_length() - 1]]
            if pay[mask] < worth[mask]:
                coalition = _mask_members(players, mask)
                return Check("stability", False, witness={
                    "coalition": _fmt_set(coalition), "payoff": pay[mask], "worth": worth[mask]})
        return Check("stability", True, witness={"coalitions_checked": (1 << n) - 1})
    support = f.support()
    family = set(support)
    family.update(a | b for a, b in combinations(support, 2))
    for coalition in sorted(family, key=lambda s: (len(s), _fmt_set(s))):
        payoff, worth = coalition_payoff(alloc, coalition), game(coalition)
        if payoff < worth:
            return Check("stability", False, witness={
                "coalition": _fmt_set(coalition), "payoff": payoff, "worth": worth})
    return Check("stability", True, witness={"coalitions_checked": len(family)})


def find_independent_partition(f: CombinationFunction) -> list[frozenset]:
    """Finest independent blocks: connected components of the support hypergraph."""
    parent = {p: p for p in f.universe}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for combo in f:
        first, *rest = combo
        for p in rest:
            a, b = find(first), find(p)
            if a != b:
                parent[b] = a
    blocks: dict[Hashable, set] = {}
    for p in f.universe:
        blocks.setdefault(find(p), set()).add(p)
    return sorted((frozenset(b) for b in blocks.values()), key=lambda b: _fmt_set(b))


def _marginal_family(f: CombinationFunction, i: Hashable, j: Hashable) -> set[frozenset]:
    """Coalitions S (without i, j) for which f(S+i) or f(S+j) can be nonzero."""
    pair = {i, j}
    family = {frozenset()}
    family.update(combo - pair for combo in f)
    return family


def _dominates(f: CombinationFunction, i: Hashable, j: Hashable) -> bool:
    return all(f[s | {i}] >= f[s | {j}] for s in _marginal_family(f, i, j))


def check_axioms(
    f: CombinationFunction,
    alloc: Mapping[Hashable, Fraction],
    union_cap: int = 12,
) -> Report:
    """Check an allocation against the attribution properties of the Shapley rule."""
    report = Report()
    players = tuple(f.universe)
    total = f.total()
    paid = coalition_payoff(alloc, players)
    report.add(Check("efficiency", paid == total, witness={"allocated": paid, "total": total}))

    bad = []
    pairs = 0
    for i, j in combinations(players, 2):
        if _dominates(f, i, j) and _dominates(f, j, i):
            pairs += 1
            if alloc[i] != alloc[j]:
                bad.append((i, j))
    report.add(Check("symmetry", not bad, witness={"symmetric_pairs": pairs, "violations": bad}))

    in_support = set().union(*f) if len(f) else set()
    nulls = [p for p in players if p not in in_support]
    bad = [p for p in nulls if alloc[p] != 0]
    report.add(Check("null-player", not bad, witness={"null_players": nulls, "violations": bad}))

    bad = [p for p in players if alloc[p] < f[{p}]]
    report.add(Check("stand-alone", not bad, witness={"violations": bad}))

    bad = []
    for i in players:
        for j in players:
            if i != j and _dominates(f, i, j) and alloc[i] < alloc[j]:
                bad.append((i, j))
    report.add(Check("fair-ranking", not bad, witness={"violations": bad}))

    blocks = find_independent_partition(f)
    game = SumGame(f)
    if len(blocks) <= union_cap:
        candidates = [
            frozenset().union(*chosen)
            for r in range(1, len(blocks) + 1)
            for chosen in combinations(blocks, r)
        ]
    else:
        candidates = list(blocks)
    bad = [_fmt_set(s) for s in candidates if coalition_payoff(alloc, s) != game(s)]
    report.add(Check("no-subsidizing", not bad, witness={
        "blocks": [_fmt_set(b) for b in blocks], "violations": bad}))
    return report
