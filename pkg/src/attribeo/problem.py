"""Path-level campaign data: parsing, validation and aggregation into combinations."""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .rational import format_rational, parse_rational

Path = tuple[int, ...]
"""An observed path: channel indices in order of exposure, repetitions allowed."""

_DIRECTIVE = re.compile(r"^#\s*channels\s*:(.*)$", re.IGNORECASE)


class ParseError(ValueError):
    """Malformed campaign input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Format(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


def sort_players(players: Iterable[Hashable]) -> list:
    players = list(players)
    try:
        return sorted(players)
    except TypeError:
        return sorted(players, key=repr)


def _combination_key(combo: frozenset) -> tuple:
    return (len(combo), sort_players(combo))


class CombinationFunction:
    """Finite-support set function over nonempty combinations of players.

    Only nonzero values are stored; looking up an absent combination gives 0.
    Used for aggregated KPIs as well as for Harsanyi dividend maps, so values
    are not forced to be nonnegative here (see :meth:`is_nonnegative`).
    """

    __slots__ = ("_values", "_universe")

    def __init__(
        self,
        values: Mapping[Iterable[Hashable], Any] | Iterable[tuple[Iterable[Hashable], Any]] = (),
        universe: Iterable[Hashable] | None = None,
    ):
        items = values.items() if isinstance(values, Mapping) else values
        merged: dict[frozenset, Fraction] = {}
        for key, value in items:
            combo = frozenset(key)
            value = Fraction(value)
            if not combo:
                if value != 0:
                    raise ValueError("the empty combination cannot carry a value")
                continue
            merged[combo] = merged.get(combo, Fraction(0)) + value
        if universe is None:
            universe = sort_players(set().union(*merged) if merged else ())
        universe = tuple(universe)
        if len(set(universe)) != len(universe):
            raise ValueError("duplicate players in universe")
        members = set(universe)
        for combo in merged:
            if not combo <= members:
                raise ValueError(f"combination {sort_players(combo)} is not inside the universe")
        ordered = sorted((c for c, v in merged.items() if v != 0), key=_combination_key)
        self._values = {c: merged[c] for c in ordered}
        self._universe = universe

    @property
    def universe(self) -> tuple:
        return self._universe

    def __getitem__(self, combo: Iterable[Hashable]) -> Fraction:
        return self._values.get(frozenset(combo), Fraction(0))

    def __contains__(self, combo: Iterable[Hashable]) -> bool:
        return frozenset(combo) in self._values

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def items(self):
        return self._values.items()

    def support(self) -> list[frozenset]:
        return list(self._values)

    def total(self) -> Fraction:
        return sum(self._values.values(), Fraction(0))

    def is_nonnegative(self) -> bool:
        return all(v > 0 for v in self._values.values())

    def __add__(self, other: CombinationFunction) -> CombinationFunction:
        if not isinstance(other, CombinationFunction):
            return NotImplemented
        universe = list(self._universe) + [p for p in other._universe if p not in set(self._universe)]
        return CombinationFunction(list(self.items()) + list(other.items()), universe)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CombinationFunction):
            return NotImplemented
        return self._values == other._values and set(self._universe) == set(other._universe)

    def __repr__(self) -> str:
        body = ", ".join(
            "{" + ",".join(map(str, sort_players(c))) + "}: " + format_rational(v)
            for c, v in self._values.items()
        )
        return f"CombinationFunction({body})"


@dataclass(frozen=True)
class AttributionProblem:
    """Channels, observed paths and their KPI values.

    ``channels`` holds the labels; a channel's index is its position there.
    Labels are kept in lexicographic order and paths in canonical (sorted)
    order, so two problems built from the same rows in any order compare equal.
    ``declared`` lists channels admitted without being observed in any path.
    """

    channels: tuple[str, ...]
    paths: tuple[tuple[Path, Fraction], ...]
    declared: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        if not self.paths:
            raise ParseError("no paths")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("duplicate channel labels")
        if any(not label for label in self.channels):
            raise ValueError("empty channel label")
        n = len(self.channels)
        seen: set[Path] = set()
        observed: set[int] = set()
        for path, kpi in self.paths:
            if not path:
                raise ValueError("empty path")
            if any(not 0 <= i < n for i in path):
                raise ValueError(f"path {path} uses an unknown channel index")
            if kpi < 0:
                raise ValueError(f"negative KPI for path {path}")
            if path in seen:
                raise ValueError(f"duplicate path {path}")
            seen.add(path)
            observed.update(path)
        if observed | set(self.declared) != set(range(n)):
            raise ValueError("every channel must be observed or declared")
        if observed & set(self.declared):
            raise ValueError("declared channels must be unobserved")

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[tuple[str | Sequence[str], Any]],
        channels: Iterable[str] = (),
    ) -> AttributionProblem:
        """Build a problem from ``(sequence, kpi)`` rows, merging duplicate paths.

        A sequence is either a list of labels or a ``>``-joined string.
        ``channels`` may name extra channels that never appear in a path.
        """
        merged: dict[tuple[str, ...], Fraction] = {}
        for sequence, kpi in rows:
            if isinstance(sequence, str):
                sequence = sequence.split(">")
            labels = tuple(str(s).strip() for s in sequence)
            if not labels:
                raise ParseError("empty path")
            if any(not s for s in labels):
                raise ParseError("empty channel label in path")
            value = kpi if isinstance(kpi, Fraction) else parse_rational(kpi)
            if value < 0:
                raise ParseError(f"negative KPI {format_rational(value)}")
            merged[labels] = merged.get(labels, Fraction(0)) + value
        if not merged:
            raise ParseError("no paths")
        observed = {label for labels in merged for label in labels}
        extra = {str(c).strip() for c in channels} - observed
        if "" in extra:
            raise ParseError("empty declared channel label")
        labels_sorted = tuple(sorted(observed | extra))
        index = {label: i for i, label in enumerate(labels_sorted)}
        paths = sorted((tuple(index[s] for s in seq), kpi) for seq, kpi in merged.items())
        return cls(labels_sorted, tuple(paths), frozenset(index[c] for c in extra))

    @property
    def n(self) -> int:
        return len(self.channels)

    def index(self, label: str) -> int:
        try:
            return self.channels.index(label)
        except ValueError:
            raise KeyError(f"unknown channel {label!r}") from None

    def label(self, i: int) -> str:
        return self.channels[i]

    def path_labels(self, path: Path) -> tuple[str, ...]:
        return tuple(self.channels[i] for i in path)

    def rows(self) -> list[tuple[tuple[str, ...], Fraction]]:
        return [(self.path_labels(p), kpi) for p, kpi in self.paths]

    def has_repetitions(self) -> bool:
        return any(len(set(p)) < len(p) for p, _ in self.paths)

    def by_label(self, alloc: Mapping[int, Fraction]) -> dict[str, Fraction]:
        return {self.channels[i]: alloc[i] for i in sorted(alloc)}


def total_benefit(problem: AttributionProblem) -> Fraction:
    return sum((kpi for _, kpi in problem.paths), Fraction(0))


def aggregate_combinations(problem: AttributionProblem) -> CombinationFunction:
    """Group path KPIs by the set of channels each path visits."""
    return CombinationFunction(
        ((frozenset(path), kpi) for path, kpi in problem.paths),
        universe=range(problem.n),
    )


class PathStats(NamedTuple):
    max_repetitions: int
    positions: frozenset[int]
    appearing_paths: tuple[int, ...]


def path_stats(problem: AttributionProblem, channel: int, allow_unobserved: bool = False) -> PathStats:
    """Maximum repetition count, occupied positions (1-based) and paths of ``channel``.

    A declared channel that never appears in a path raises unless
    ``allow_unobserved`` is set, in which case it reports zero repetitions.
    """
    if not 0 <= channel < problem.n:
        raise KeyError(f"unknown channel index {channel}")
    r = 0
    positions: set[int] = set()
    appearing: list[int] = []
    for k, (path, _) in enumerate(problem.paths):
        count = path.count(channel)
        if count:
            appearing.append(k)
            r = max(r, count)
            positions.update(j for j, c in enumerate(path, 1) if c == channel)
    if not appearing and not allow_unobserved:
        raise ValueError(f"channel {problem.label(channel)!r} appears in no path")
    return PathStats(r, frozenset(positions), tuple(appearing))


# --- input / output ---------------------------------------------------------


def _read_text(source: bytes | str | io.IOBase) -> str:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from exc
    return source


def detect_format(text: str) -> Format:
    return Format.JSON if text.lstrip().startswith("{") else Format.CSV


def parse_problem(source: bytes | str | io.IOBase, format: Format | str | None = None) -> AttributionProblem:
    """Parse CSV or JSON campaign data. ``format=None`` sniffs the content."""
    text = _read_text(source)
    fmt = detect_format(text) if format in (None, "auto") else Format(format)
    if fmt is Format.JSON:
        return _parse_json(text)
    return _parse_csv(text)


def _looks_like_header(field: str) -> bool:
    return not any(ch.isdigit() for ch in field)


def _parse_csv(text: str) -> AttributionProblem:
    rows: list[tuple[list[str], Fraction]] = []
    extra: list[str] = []
    first_data_row = True
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            directive = _DIRECTIVE.match(stripped)
            if directive:
                extra.extend(c.strip() for c in directive.group(1).split(","))
                if any(not c for c in extra):
                    raise ParseError("empty label in channels directive", lineno)
            continue
        fields = next(csv.reader([raw]))
        if len(fields) != 2:
            raise ParseError(f"expected 'path,kpi', got {len(fields)} field(s)", lineno)
        path_field, kpi_field = (f.strip() for f in fields)
        try:
            kpi = parse_rational(kpi_field)
        except ValueError:
            if first_data_row and _looks_like_header(kpi_field):
                first_data_row = False
                continue
            raise ParseError(f"unparseable number {kpi_field!r}", lineno) from None
        first_data_row = False
        if kpi < 0:
            raise ParseError(f"negative KPI {kpi_field}", lineno)
        if not path_field:
            raise ParseError("empty path", lineno)
        labels = [s.strip() for s in path_field.split(">")]
        if any(not s for s in labels):
            raise ParseError("empty channel label in path", lineno)
        rows.append((labels, kpi))
    if not rows:
        raise ParseError("no paths")
    return AttributionProblem.from_rows(rows, extra)


def _parse_json(text: str) -> AttributionProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("paths"), list):
        raise ParseError("expected an object with a 'paths' list")
    rows = []
    for k, entry in enumerate(doc["paths"]):
        where = f"paths[{k}]"
        if not isinstance(entry, dict) or "sequence" not in entry or "kpi" not in entry:
            raise ParseError(f"{where}: expected {{'sequence': [...], 'kpi': ...}}")
        sequence = entry["sequence"]
        if not isinstance(sequence, list) or not sequence:
            raise ParseError(f"{where}: empty path")
        if any(not isinstance(s, (str, int)) or isinstance(s, bool) or not str(s).strip() for s in sequence):
            raise ParseError(f"{where}: channel labels must be non-empty strings")
        try:
            kpi = parse_rational(entry["kpi"])
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None
        if kpi < 0:
            raise ParseError(f"{where}: negative KPI")
        rows.append(([str(s) for s in sequence], kpi))
    channels = doc.get("channels", [])
    if not isinstance(channels, list):
        raise ParseError("'channels' must be a list")
    if not rows:
        raise ParseError("no paths")
    return AttributionProblem.from_rows(rows, [str(c) for c in channels])


def serialize_problem(problem: AttributionProblem, format: Format | str = Format.CSV) -> bytes:
    fmt = Format(format)
    if fmt is Format.JSON:
        doc = {
            "paths": [
                {"sequence": list(labels), "kpi": format_rational(kpi)} for labels, kpi in problem.rows()
            ],
            "channels": list(problem.channels),
        }
        return json.dumps(doc, indent=2).encode()
    for label in problem.channels:
        if ">" in label or label.startswith("#") or label != label.strip():
            raise ValueError(f"channel label {label!r} cannot be written as CSV")
    if any("," in problem.label(i) for i in problem.declared):
        raise ValueError("declared channel labels cannot contain ','")
    out = io.StringIO()
    if problem.declared:
        out.write("#channels: " + ",".join(problem.label(i) for i in sorted(problem.declared)) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["path", "kpi"])
    for labels, kpi in problem.rows():
        writer.writerow([">".join(labels), format_rational(kpi)])
    return out.getvalue().encode()
