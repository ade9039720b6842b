"""Random instance generators and independent reference oracles for the tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from pathlib import Path

from attribeo import AttributionProblem, CharacteristicFunction, CombinationFunction

FIXTURES = Path(__file__).parent / "fixtures"

REPEATED = [("1", 20), ("1>2", 40), ("2>1", 10), ("2>1>2", 30)]
ORDERED = [("1", 30), ("1>2", 60), ("2>1", 10)]
SKEWED = [("1", 20), ("1>3", 40), ("3>1>2", 30), ("2>3", 10)]
BALANCED = [("1", 14), ("1>3", 20), ("3>1>2", 36), ("2>3", 30)]


def problem_from(table) -> AttributionProblem:
    return AttributionProblem.from_rows([(p.split(">"), Fraction(v)) for p, v in table])


def random_kpi(rng: random.Random, zero_ok: bool = True) -> Fraction:
    low = 0 if zero_ok else 1
    return Fraction(rng.randint(low, 60), rng.randint(1, 6))


def random_problem(
    rng: random.Random,
    max_channels: int = 8,
    max_paths: int = 12,
    max_len: int = 5,
    repetition: bool = True,
) -> AttributionProblem:
    n = rng.randint(1, max_channels)
    labels = [f"c{k}" for k in range(n)]
    rows = []
    for _ in range(rng.randint(1, max_paths)):
        length = rng.randint(1, max_len)
        if repetition:
            seq = [rng.choice(labels) for _ in range(length)]
        else:
            seq = rng.sample(labels, min(length, n))
        rows.append((seq, random_kpi(rng)))
    return AttributionProblem.from_rows(rows)


def random_combinations(
    rng: random.Random,
    n: int,
    max_support: int = 12,
    positive: bool = True,
) -> CombinationFunction:
    players = list(range(n))
    values = {}
    for _ in range(rng.randint(1, max_support)):
        combo = frozenset(rng.sample(players, rng.randint(1, n)))
        values[combo] = Fraction(rng.randint(1 if positive else 0, 40), rng.randint(1, 5))
    return CombinationFunction(values, universe=players)


def compatible_claims(rng: random.Random, n: int) -> tuple[Fraction, list[Fraction]]:
    """Random (E, c) with C >= E >= max c."""
    claims = [Fraction(rng.randint(0, 30), rng.randint(1, 4)) for _ in range(n)]
    low, high = max(claims), sum(claims)
    if high == low:
        return high, claims
    k = rng.randint(0, 12)
    return low + (high - low) * Fraction(k, 12), claims


# --- oracles -----------------------------------------------------------------


def aggregate_by_groupby(problem: AttributionProblem) -> dict[frozenset, Fraction]:
    """Collapse paths to their visited-channel sets with itertools.groupby."""
    keyed = sorted(((tuple(sorted(set(p))), v) for p, v in problem.paths), key=lambda kv: kv[0])
    out = {}
    for key, group in itertools.groupby(keyed, key=lambda kv: kv[0]):
        total = sum((v for _, v in group), Fraction(0))
        if total:
            out[frozenset(key)] = total
    return out


def dividends_direct(v: CharacteristicFunction) -> dict[frozenset, Fraction]:
    """d_S = sum over T subset of S of (-1)^{|S|-|T|} v(T)."""
    players = v.players
    out = {}
    for r in range(1, len(players) + 1):
        for s in itertools.combinations(players, r):
            d = Fraction(0)
            for k in range(r + 1):
                for t in itertools.combinations(s, k):
                    d += (-1) ** (r - k) * v(t)
            if d:
                out[frozenset(s)] = d
    return out


def shapley_permutations(v: CharacteristicFunction) -> dict:
    """Average marginal contribution over every arrival order."""
    players = v.players
    totals = {p: Fraction(0) for p in players}
    for order in itertools.permutations(players):
        before = frozenset()
        prev = Fraction(0)
        for p in order:
            before = before | {p}
            now = v(before)
            totals[p] += now - prev
            prev = now
    count = math.factorial(len(players))
    return {p: t / count for p, t in totals.items()}


def lp_feasible(rows: list[list[Fraction]], rhs: list[Fraction]) -> bool:
    """Exact phase-one simplex: does ``rows @ x == rhs`` have a solution x >= 0?

    Bland's rule prevents cycling; everything stays in Fractions.
    """
    m, n = len(rows), len(rows[0])
    tab = []
    for i, (row, b) in enumerate(zip(rows, rhs)):
        sign = -1 if b < 0 else 1
        tab.append([sign * Fraction(a) for a in row] + [Fraction(int(k == i)) for k in range(m)] + [sign * Fraction(b)])
    basis = [n + i for i in range(m)]
    width = n + m
    obj = [-sum((tab[i][j] for i in range(m)), Fraction(0)) for j in range(n)] + [Fraction(0)] * m
    obj.append(-sum((tab[i][-1] for i in range(m)), Fraction(0)))
    while True:
        entering = next((j for j in range(width) if obj[j] < 0), None)
        if entering is None:
            break
        best = None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                key = (tab[i][-1] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise AssertionError("phase one cannot be unbounded")
        r = best[1]
        pivot = tab[r][entering]
        tab[r] = [a / pivot for a in tab[r]]
        for i in range(m):
            if i != r and tab[i][entering]:
                factor = tab[i][entering]
                tab[i] = [a - factor * b for a, b in zip(tab[i], tab[r])]
        factor = obj[entering]
        obj = [a - factor * b for a, b in zip(obj, tab[r])]
        basis[r] = entering
    return obj[-1] == 0


def claims_feasible(estate: Fraction, claims: list[Fraction]) -> bool:
    """Is there f >= 0 over nonempty subsets with sum f = E and sum_{S contains i} f(S) = c_i?"""
    n = len(claims)
    subsets = list(range(1, 1 << n))
    rows = [[Fraction(1)] * len(subsets)]
    rows += [[Fraction(mask >> i & 1) for mask in subsets] for i in range(n)]
    return lp_feasible(rows, [estate, *claims])
