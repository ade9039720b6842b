"""Command-line front end: ``attribeo --input FILE --rule shapley,cel ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import bankruptcy as bk
from .checks import Check, PropertyViolation, Report
from .extensions import (
    check_extension_efficiency,
    check_order_decomposition,
    order_extend,
    position_attribution,
    repetition_extend,
    shapley_occurrence,
    shapley_order,
    shapley_repetition,
)
from .problem import AttributionProblem, CombinationFunction, ParseError, aggregate_combinations, parse_problem, total_benefit
from .rational import DEFAULT_PRECISION, decimal_string, format_rational, rational_json
from .sumgame import (
    ORACLE_CAP,
    ResourceLimitError,
    check_axioms,
    check_stability,
    shapley_bruteforce,
    shapley_sum_game,
    sum_game,
)

RULES = (
    "shapley", "shapley-rep", "shapley-occurrence", "shapley-order", "positions",
    "cel", "prop", "cel-order", "prop-order",
)
_ORDER_SPLIT = {"cel-order": "cel", "prop-order": "prop"}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    input_path: str
    rules: tuple[str, ...]
    format: str = "auto"
    output: str = "table"
    precision: int = DEFAULT_PRECISION
    oracle: bool = False
    verify: bool = False
    max_oracle_n: int = ORACLE_CAP

    def __post_init__(self):
        if not self.rules:
            raise UsageError("select at least one rule")
        unknown = [r for r in self.rules if r not in RULES]
        if unknown:
            raise UsageError(f"unknown rule(s): {', '.join(unknown)}")
        if self.precision < 1:
            raise UsageError("precision must be >= 1")
        if self.format not in ("auto", "csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.output not in ("table", "json"):
            raise UsageError(f"unknown output {self.output!r}")


@dataclass
class AttributionReport:
    channels: list[str]
    path_count: int
    total_benefit: Fraction
    rules: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    checks: Report = field(default_factory=Report)


def _labelled_combinations(problem: AttributionProblem) -> CombinationFunction:
    f = aggregate_combinations(problem)
    return CombinationFunction(
        ((frozenset(problem.label(i) for i in combo), v) for combo, v in f.items()),
        universe=problem.channels,
    )


def _labelled_bankruptcy(problem: AttributionProblem) -> bk.BankruptcyProblem:
    return bk.to_bankruptcy(_labelled_combinations(problem))


def _prefixed(prefix: str, report: Report) -> Report:
    return Report([Check(f"{prefix}:{c.name}", c.passed, c.asserted, c.witness) for c in report])


def _labelled_order_bankruptcy(problem: AttributionProblem) -> bk.BankruptcyProblem:
    bp, _ = bk.bankruptcy_order_extend(problem)
    return bk.BankruptcyProblem(bp.estate, {p.label(problem): c for p, c in bp.claims.items()})


def _compute(problem: AttributionProblem, rule: str) -> dict[str, Fraction]:
    if rule == "shapley":
        return shapley_sum_game(_labelled_combinations(problem))
    if rule == "shapley-rep":
        return problem.by_label(shapley_repetition(problem))
    if rule == "shapley-occurrence":
        return {p.label(problem): v for p, v in shapley_occurrence(problem).items()}
    if rule == "shapley-order":
        return {p.label(problem): v for p, v in shapley_order(problem).items()}
    if rule == "positions":
        return {str(j): v for j, v in position_attribution(problem).items()}
    if rule in _ORDER_SPLIT:
        return bk.apply_rule(_labelled_order_bankruptcy(problem), _ORDER_SPLIT[rule])
    return bk.apply_rule(_labelled_bankruptcy(problem), rule)


def _oracle(problem: AttributionProblem, rule: str, cap: int) -> dict[str, Fraction] | None:
    if rule == "shapley":
        f = _labelled_combinations(problem)
        return shapley_bruteforce(sum_game(f), cap=cap)
    if rule == "shapley-occurrence":
        ext = repetition_extend(problem)
        phi = shapley_bruteforce(sum_game(ext.kpi), cap=cap)
        return {p.label(problem): v for p, v in phi.items()}
    if rule == "shapley-rep":
        ext = repetition_extend(problem)
        phi = shapley_bruteforce(sum_game(ext.kpi), cap=cap)
        totals = {label: Fraction(0) for label in problem.channels}
        for p, v in phi.items():
            totals[problem.label(p.channel)] += v
        return totals
    if rule in ("shapley-order", "positions"):
        ext = order_extend(problem)
        phi = shapley_bruteforce(sum_game(ext.kpi), cap=cap)
        if rule == "shapley-order":
            return {p.label(problem): v for p, v in phi.items()}
        totals: dict[str, Fraction] = {}
        for p, v in sorted(phi.items()):
            totals[str(p.index)] = totals.get(str(p.index), Fraction(0)) + v
        return dict(sorted(totals.items(), key=lambda kv: int(kv[0])))
    return None


def _verify(problem: AttributionProblem, rule: str, values: dict[str, Fraction]) -> Report:
    report = Report()
    if rule == "shapley":
        f = _labelled_combinations(problem)
        report.extend(check_axioms(f, values))
        report.add(check_stability(f, values))
        return report
    if rule in ("shapley-rep", "shapley-order", "positions"):
        eff = check_extension_efficiency(problem)
        report.add(eff[f"efficiency[{rule}]"])
        if rule == "shapley-order":
            report.extend(check_order_decomposition(problem))
        return report
    if rule == "shapley-occurrence":
        b = total_benefit(problem)
        allocated = sum(values.values(), Fraction(0))
        report.add(Check("efficiency", allocated == b, witness={"allocated": allocated, "total": b}))
        return report
    if rule in _ORDER_SPLIT:
        bp = _labelled_order_bankruptcy(problem)
        report.add(Check("compatible", bk.is_attribution_compatible(bp)))
        report.extend(bk.check_rule_properties(bp, _ORDER_SPLIT[rule]))
        return report

    f = _labelled_combinations(problem)
    bp = bk.to_bankruptcy(f)
    report.add(Check("compatible", bk.is_attribution_compatible(bp)))
    report.add(Check("deficit-identity", bp.deficit == bk.combination_deficit(f),
                     witness={"deficit": bp.deficit}))
    report.extend(bk.check_rule_properties(bp, rule))
    try:
        reduced, _ = bk.reduce_irrelevant(bp, rule)
        report.add(Check("IPL", True, witness={"removed": sorted(set(bp.claims) - set(reduced.claims))}))
    except PropertyViolation as exc:
        report.add(Check("IPL", False, witness=str(exc)))
    report.extend(bk.check_order_decomposition_bankruptcy(problem, rule))
    return report


def run(config: RunConfig) -> tuple[AttributionReport | None, int]:
    try:
        data = Path(config.input_path).read_bytes()
    except OSError as exc:
        print(f"attribeo: cannot read {config.input_path}: {exc.strerror}", file=sys.stderr)
        return None, EXIT_USAGE
    try:
        problem = parse_problem(data, config.format)
    except ParseError as exc:
        print(f"attribeo: {config.input_path}: {exc}", file=sys.stderr)
        return None, EXIT_USAGE

    report = AttributionReport(list(problem.channels), len(problem.paths), total_benefit(problem))
    for rule in config.rules:
        values = _compute(problem, rule)
        report.rules[rule] = values
        if config.oracle:
            try:
                expected = _oracle(problem, rule, config.max_oracle_n)
            except ResourceLimitError as exc:
                print(f"attribeo: oracle for {rule}: {exc}", file=sys.stderr)
                return None, EXIT_USAGE
            if expected is not None:
                report.checks.add(Check(f"{rule}:oracle", expected == values,
                                        witness=None if expected == values else {"oracle": expected}))
        if config.verify:
            report.checks.extend(_prefixed(rule, _verify(problem, rule, values)))
    return report, EXIT_OK if report.checks.ok else EXIT_VERIFY


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in value]
        return sorted(items, key=str) if isinstance(value, (set, frozenset)) else items
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return str(value)


def emit(report: AttributionReport, config: RunConfig) -> str:
    if config.output == "json":
        doc = {
            "problem": {
                "channels": report.channels,
                "paths": report.path_count,
                "total_benefit": rational_json(report.total_benefit, config.precision),
            },
            "rules": {
                rule: {k: rational_json(v, config.precision) for k, v in values.items()}
                for rule, values in report.rules.items()
            },
            "checks": [
                {"name": c.name, "status": c.status, "witness": _plain(c.witness)} for c in report.checks
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    lines = [
        f"channels: {len(report.channels)}  paths: {report.path_count}  "
        f"total benefit: {format_rational(report.total_benefit)}",
        "",
    ]
    rows = [("rule", "player", "exact", "decimal")]
    for rule, values in report.rules.items():
        for key, value in values.items():
            rows.append((rule, key, format_rational(value), decimal_string(value, config.precision)))
    widths = [max(len(r[k]) for r in rows) for k in range(4)]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    if len(report.checks):
        lines.append("")
        for c in report.checks:
            lines.append(f"{c.status:4}  {c.name}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attribeo", description="Game-theoretic channel attribution.")
    parser.add_argument("--input", required=True, metavar="FILE")
    parser.add_argument("--format", choices=("auto", "csv", "json"), default="auto")
    parser.add_argument("--rule", required=True, metavar="R[,R...]",
                        help=f"comma-separated rules from: {', '.join(RULES)}")
    parser.add_argument("--output", choices=("table", "json"), default="table")
    parser.add_argument("--precision", type=int, default=DEFAULT_PRECISION,
                        help="significant digits of decimal renderings")
    parser.add_argument("--oracle", action="store_true", help="cross-check Shapley rules by brute force")
    parser.add_argument("--verify", action="store_true", help="attach property checks")
    parser.add_argument("--max-oracle-n", type=int, default=ORACLE_CAP)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rules = tuple(r.strip() for r in args.rule.split(",") if r.strip())
    try:
        config = RunConfig(args.input, rules, args.format, args.output, args.precision,
                           args.oracle, args.verify, args.max_oracle_n)
    except UsageError as exc:
        print(f"attribeo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report, code = run(config)
    if report is not None:
        sys.stdout.write(emit(report, config))
    return code


if __name__ == "__main__":
    sys.exit(main())
