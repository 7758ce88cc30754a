"""Tabular ingestion, candidate-explanation enumeration, and series-cube materialization.

Everything downstream (scoring, top-k selection, segmentation) reads from the
immutable :class:`SeriesCube` built here: one aggregated series for the whole
relation plus one series per candidate explanation, all on a shared timestamp
grid.
"""

from __future__ import annotations

import ast
import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed input data or invalid query parameters."""


# ---------------------------------------------------------------------------
# Schema and relation
# ---------------------------------------------------------------------------

KIND_TIME = "time"
KIND_DIMENSION = "dimension"
KIND_MEASURE = "measure"

VALUE_TEXT = "text"
VALUE_INTEGER = "integer"
VALUE_DECIMAL = "decimal"
VALUE_DATE = "date"


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str  # time | dimension | measure
    value_type: str  # text | integer | decimal | date


@dataclass
class Relation:
    """In-memory table with a designated time attribute.

    Columns are stored as aligned numpy arrays (int64 / float64 / object) in
    input row order. The relation is treated as immutable after construction.
    """

    schema: list[AttributeSchema]
    columns: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if not self.schema:
            raise DataError("relation needs at least one attribute")
        counts = {len(col) for col in self.columns.values()}
        if len(counts) != 1:
            raise DataError("ragged columns")
        if self.row_count < 1:
            raise DataError("relation must contain at least one row")
        times = [a for a in self.schema if a.kind == KIND_TIME]
        if len(times) != 1:
            raise DataError("exactly one time attribute required")

    @property
    def row_count(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def time_attr(self) -> str:
        return next(a.name for a in self.schema if a.kind == KIND_TIME)

    def attribute(self, name: str) -> AttributeSchema:
        for a in self.schema:
            if a.name == name:
                return a
        raise DataError(f"unknown attribute: {name!r}")

    def column(self, name: str) -> np.ndarray:
        self.attribute(name)
        return self.columns[name]

    def rows(self) -> Iterable[tuple]:
        names = [a.name for a in self.schema]
        cols = [self.columns[n] for n in names]
        for i in range(self.row_count):
            yield tuple(col[i] for col in cols)

    def distinct_time_count(self) -> int:
        return len(np.unique(self.columns[self.time_attr]))


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------


def _parse_int_column(raw: list[str]) -> np.ndarray | None:
    try:
        return np.array([int(v) for v in raw], dtype=np.int64)
    except ValueError:
        return None


def _parse_float_column(raw: list[str]) -> np.ndarray | None:
    try:
        return np.array([float(v) for v in raw], dtype=np.float64)
    except ValueError:
        return None


def _parse_date_column(raw: list[str]) -> np.ndarray | None:
    try:
        return np.array([date.fromisoformat(v) for v in raw], dtype=object)
    except ValueError:
        return None


def load_csv(
    source,
    time_attr: str,
    type_hints: dict[str, str] | None = None,
) -> Relation:
    """Parse a header-bearing CSV (RFC 4180, UTF-8) into a Relation.

    ``source`` may be a path, bytes, or a text/binary file object. Column
    value types are inferred (integer, then decimal, then ISO date, else
    text); the time column must parse as ISO dates or integers.

    ``type_hints`` maps column names to a kind (``dimension`` / ``measure`` /
    ``time``), overriding the default assignment: decimal columns become
    measures, everything else a dimension.
    """
    hints = dict(type_hints or {})
    text = _as_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV input") from None
    header = [h.strip() for h in header]
    if time_attr not in header:
        raise DataError(f"time attribute {time_attr!r} not in CSV header {header}")

    raw_cols: list[list[str]] = [[] for _ in header]
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(
                f"malformed CSV row {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        for col, value in zip(raw_cols, row):
            col.append(value)
    if not raw_cols[0]:
        raise DataError("CSV has a header but no data rows")

    schema: list[AttributeSchema] = []
    columns: dict[str, np.ndarray] = {}
    for name, raw in zip(header, raw_cols):
        if name == time_attr:
            parsed, vtype = _parse_time_column(name, raw)
            schema.append(AttributeSchema(name, KIND_TIME, vtype))
            columns[name] = parsed
            continue
        parsed, vtype = _infer_column(raw)
        kind = hints.get(name)
        if kind is None:
            kind = KIND_MEASURE if vtype == VALUE_DECIMAL else KIND_DIMENSION
        elif kind not in (KIND_DIMENSION, KIND_MEASURE):
            raise DataError(f"bad type hint for {name!r}: {kind!r}")
        if kind == KIND_MEASURE and vtype not in (VALUE_INTEGER, VALUE_DECIMAL):
            bad = _first_non_numeric(raw)
            raise DataError(
                f"column {name!r} is declared a measure but row {bad[0]} holds "
                f"non-numeric value {bad[1]!r}"
            )
        schema.append(AttributeSchema(name, kind, vtype))
        columns[name] = parsed
    return Relation(schema, columns)


def _as_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    with open(source, "rb") as fh:
        return fh.read().decode("utf-8")


def _parse_time_column(name: str, raw: list[str]) -> tuple[np.ndarray, str]:
    for idx, v in enumerate(raw):
        if v.strip() == "":
            raise DataError(f"empty time value in column {name!r} at data row {idx + 1}")
    parsed = _parse_int_column(raw)
    if parsed is not None:
        return parsed, VALUE_INTEGER
    parsed = _parse_date_column(raw)
    if parsed is not None:
        return parsed, VALUE_DATE
    for idx, v in enumerate(raw):
        try:
            date.fromisoformat(v)
        except ValueError:
            try:
                int(v)
            except ValueError:
                raise DataError(
                    f"unparseable time value {v!r} in column {name!r} at data row {idx + 1}"
                ) from None
    raise DataError(f"mixed time value types in column {name!r}")


def _infer_column(raw: list[str]) -> tuple[np.ndarray, str]:
    parsed = _parse_int_column(raw)
    if parsed is not None:
        return parsed, VALUE_INTEGER
    parsed = _parse_float_column(raw)
    if parsed is not None:
        return parsed, VALUE_DECIMAL
    parsed = _parse_date_column(raw)
    if parsed is not None:
        return parsed, VALUE_DATE
    return np.array(raw, dtype=object), VALUE_TEXT


def _first_non_numeric(raw: list[str]) -> tuple[int, str]:
    for idx, v in enumerate(raw):
        try:
            float(v)
        except ValueError:
            return idx + 1, v
    return 0, ""


# ---------------------------------------------------------------------------
# Derived columns (pre-ingestion computed measures)
# ---------------------------------------------------------------------------

_ALLOWED_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


def apply_derived_columns(relation: Relation, specs: Sequence[dict]) -> Relation:
    """Append computed measure columns, e.g. ``{"name": "px", "expression": "price*share/2.5"}``.

    Expressions support +, -, *, / and parentheses over numeric columns and
    constants.
    """
    schema = list(relation.schema)
    columns = dict(relation.columns)
    for spec in specs:
        name, expr = spec["name"], spec["expression"]
        if name in columns:
            raise DataError(f"derived column {name!r} already exists")
        try:
            tree = ast.parse(expr, mode="eval")
        except SyntaxError as exc:
            raise DataError(f"bad derived-column expression {expr!r}: {exc}") from None
        values = _eval_expr(tree.body, columns, relation.row_count)
        columns[name] = np.asarray(values, dtype=np.float64) * np.ones(relation.row_count)
        schema.append(AttributeSchema(name, KIND_MEASURE, VALUE_DECIMAL))
    return Relation(schema, columns)


def _eval_expr(node: ast.AST, columns: dict[str, np.ndarray], n: int):
    if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
        op = _ALLOWED_BINOPS[type(node.op)]
        return op(_eval_expr(node.left, columns, n), _eval_expr(node.right, columns, n))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_eval_expr(node.operand, columns, n)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in columns:
            raise DataError(f"unknown column {node.id!r} in derived expression")
        col = columns[node.id]
        if col.dtype == object:
            raise DataError(f"column {node.id!r} is not numeric")
        return col.astype(np.float64)
    raise DataError(f"unsupported expression element: {ast.dump(node)}")


# ---------------------------------------------------------------------------
# Explanations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Explanation:
    """Conjunction of equality predicates over distinct explain-by attributes."""

    predicates: tuple[tuple[str, object], ...]

    def __post_init__(self) -> None:
        attrs = [a for a, _ in self.predicates]
        if len(attrs) != len(set(attrs)):
            raise DataError(f"duplicate attribute in explanation: {self.predicates}")
        if not attrs:
            raise DataError("explanation needs at least one predicate")

    @property
    def order(self) -> int:
        return len(self.predicates)

    @property
    def attrs(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.predicates)

    def value_of(self, attr: str):
        for a, v in self.predicates:
            if a == attr:
                return v
        return None

    def label(self) -> str:
        return " & ".join(f"{a}={v}" for a, v in self.predicates)

    def __repr__(self) -> str:  # keeps test failure output readable
        return f"Explanation({self.label()})"


def overlaps(e1: Explanation, e2: Explanation) -> bool:
    """True iff the conjunction e1 AND e2 is satisfiable in some relation.

    Two explanations are non-overlapping exactly when some attribute is
    constrained to different values by both.
    """
    shared = set(e1.attrs) & set(e2.attrs)
    return all(e1.value_of(a) == e2.value_of(a) for a in shared)


def enumerate_explanations(
    relation: Relation, explain_by: Sequence[str], beta_max: int = 3
) -> list[Explanation]:
    """All conjunctions over distinct explain-by attributes with observed value combinations.

    Deterministic order: attribute subsets by (size, schema position), value
    combinations sorted per attribute.
    """
    if beta_max < 1:
        raise DataError("beta_max must be >= 1")
    order_of = {a.name: i for i, a in enumerate(relation.schema)}
    for name in explain_by:
        attr = relation.attribute(name)
        if attr.kind != KIND_DIMENSION:
            raise DataError(f"explain-by attribute {name!r} is not a dimension (kind={attr.kind})")
    if len(set(explain_by)) != len(explain_by):
        raise DataError("duplicate explain-by attribute")

    names = sorted(explain_by, key=order_of.__getitem__)
    out: list[Explanation] = []
    for subset in _attr_subsets(names, min(beta_max, len(names))):
        for combo in observed_combinations(relation, subset):
            out.append(Explanation(tuple(zip(subset, combo))))
    return out


def _attr_subsets(names: Sequence[str], max_size: int) -> list[tuple[str, ...]]:
    from itertools import combinations

    subsets: list[tuple[str, ...]] = []
    for size in range(1, max_size + 1):
        subsets.extend(combinations(names, size))
    return subsets


def observed_combinations(relation: Relation, attrs: Sequence[str]) -> list[tuple]:
    """Sorted distinct value tuples observed for the given attribute list."""
    cols = [relation.columns[a] for a in attrs]
    seen = set(zip(*[col.tolist() for col in cols]))
    return sorted(seen)


# ---------------------------------------------------------------------------
# Aggregation spec and series
# ---------------------------------------------------------------------------


class AggFunction(str, Enum):
    SUM = "SUM"
    COUNT = "COUNT"
    AVG = "AVG"


@dataclass(frozen=True)
class AggSpec:
    """Aggregate to explain. AVG is carried as SUM and COUNT parts throughout."""

    measure: str | None
    function: AggFunction

    @staticmethod
    def parse(measure: str | None, function: str) -> "AggSpec":
        try:
            fn = AggFunction(function.upper())
        except ValueError:
            raise DataError(f"unknown aggregate function {function!r}") from None
        if fn != AggFunction.COUNT and not measure:
            raise DataError(f"{fn.value} requires a measure attribute")
        return AggSpec(measure, fn)


@dataclass
class Series:
    timestamps: tuple
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        n = len(self.timestamps)
        if n != len(self.values):
            raise DataError("timestamps and values length mismatch")
        if n < 2:
            raise DataError("series needs at least two points")
        if any(self.timestamps[i] >= self.timestamps[i + 1] for i in range(n - 1)):
            raise DataError("timestamps must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.timestamps)


def smooth(series: Series, window: int) -> Series:
    """Centered moving average with shrinking windows at the boundaries."""
    if window < 1:
        raise DataError("smoothing window must be >= 1")
    if window > series.n:
        raise DataError(f"smoothing window {window} exceeds series length {series.n}")
    return Series(series.timestamps, smooth_values(series.values, window))


def smooth_values(values: np.ndarray, window: int) -> np.ndarray:
    if window == 1:
        return np.array(values, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    idx = np.arange(n)
    lo = np.maximum(idx - window // 2, 0)
    hi = np.minimum(idx + (window - 1) // 2, n - 1)
    csum = np.concatenate(
        [np.zeros(values.shape[:-1] + (1,)), np.cumsum(values, axis=-1)], axis=-1
    )
    return (csum[..., hi + 1] - csum[..., lo]) / (hi - lo + 1)


# ---------------------------------------------------------------------------
# Series cube
# ---------------------------------------------------------------------------

CUBE_FORMAT_VERSION = 1


@dataclass
class SeriesCube:
    """Shared read-only cube: the overall series plus one series per explanation.

    ``values`` has one row per explanation on the overall timestamp grid;
    timestamps with no matching rows hold 0 for SUM/COUNT. For AVG the cube
    additionally carries the SUM/COUNT decomposition, and ``values`` holds the
    ratio (0 where the slice is empty).
    """

    timestamps: tuple
    agg: AggSpec
    explanations: tuple[Explanation, ...]
    overall_values: np.ndarray  # (n,)
    values: np.ndarray  # (eps, n)
    overall_parts: tuple[np.ndarray, np.ndarray] | None = None  # AVG: (sum, count)
    parts: tuple[np.ndarray, np.ndarray] | None = None  # AVG: (eps, n) sums / counts
    _index: dict[Explanation, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.overall_values = np.asarray(self.overall_values, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64).reshape(
            len(self.explanations), self.n
        )
        if not self._index:
            self._index = {e: i for i, e in enumerate(self.explanations)}

    @property
    def n(self) -> int:
        return len(self.timestamps)

    @property
    def explanation_count(self) -> int:
        return len(self.explanations)

    @property
    def overall(self) -> Series:
        return Series(self.timestamps, self.overall_values)

    def index_of(self, e: Explanation) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise DataError(f"explanation not in cube: {e.label()}") from None

    def series_for(self, e: Explanation) -> Series:
        return Series(self.timestamps, self.values[self.index_of(e)])

    @property
    def per_explanation(self) -> dict[Explanation, Series]:
        return {e: self.series_for(e) for e in self.explanations}

    def with_explanations(self, keep: np.ndarray) -> "SeriesCube":
        """New cube restricted to the explanation rows selected by ``keep``."""
        keep = np.asarray(keep)
        parts = None
        if self.parts is not None:
            parts = (self.parts[0][keep], self.parts[1][keep])
        return SeriesCube(
            timestamps=self.timestamps,
            agg=self.agg,
            explanations=tuple(np.array(self.explanations, dtype=object)[keep]),
            overall_values=self.overall_values,
            values=self.values[keep],
            overall_parts=self.overall_parts,
            parts=parts,
        )

    def smoothed(self, window: int) -> "SeriesCube":
        """Moving-average every series (AVG smooths the SUM/COUNT parts)."""
        if window == 1:
            return self
        if window > self.n:
            raise DataError(f"smoothing window {window} exceeds series length {self.n}")
        if self.agg.function == AggFunction.AVG:
            o_sum = smooth_values(self.overall_parts[0], window)
            o_cnt = smooth_values(self.overall_parts[1], window)
            p_sum = smooth_values(self.parts[0], window)
            p_cnt = smooth_values(self.parts[1], window)
            return SeriesCube(
                timestamps=self.timestamps,
                agg=self.agg,
                explanations=self.explanations,
                overall_values=o_sum / o_cnt,
                values=_safe_ratio(p_sum, p_cnt),
                overall_parts=(o_sum, o_cnt),
                parts=(p_sum, p_cnt),
            )
        return SeriesCube(
            timestamps=self.timestamps,
            agg=self.agg,
            explanations=self.explanations,
            overall_values=smooth_values(self.overall_values, window),
            values=smooth_values(self.values, window),
        )

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        ts_type = VALUE_DATE if isinstance(self.timestamps[0], date) else VALUE_INTEGER
        doc = {
            "version": CUBE_FORMAT_VERSION,
            "agg": {"measure": self.agg.measure, "function": self.agg.function.value},
            "timestamps": {
                "type": ts_type,
                "values": [t.isoformat() if isinstance(t, date) else int(t) for t in self.timestamps],
            },
            "explanations": [list(map(list, e.predicates)) for e in self.explanations],
            "overall": self.overall_values.tolist(),
            "values": self.values.tolist(),
        }
        if self.parts is not None:
            doc["overall_parts"] = [p.tolist() for p in self.overall_parts]
            doc["parts"] = [p.tolist() for p in self.parts]
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SeriesCube":
        doc = json.loads(text)
        if doc.get("version") != CUBE_FORMAT_VERSION:
            raise DataError(f"unsupported cube format version: {doc.get('version')!r}")
        ts = doc["timestamps"]
        if ts["type"] == VALUE_DATE:
            stamps = tuple(date.fromisoformat(v) for v in ts["values"])
        else:
            stamps = tuple(int(v) for v in ts["values"])
        expls = tuple(
            Explanation(tuple((a, v) for a, v in preds)) for preds in doc["explanations"]
        )
        parts = doc.get("parts")
        overall_parts = doc.get("overall_parts")
        return SeriesCube(
            timestamps=stamps,
            agg=AggSpec.parse(doc["agg"]["measure"], doc["agg"]["function"]),
            explanations=expls,
            overall_values=np.array(doc["overall"], dtype=np.float64),
            values=np.array(doc["values"], dtype=np.float64).reshape(len(expls), len(stamps)),
            overall_parts=tuple(np.array(p) for p in overall_parts) if overall_parts else None,
            parts=tuple(np.array(p) for p in parts) if parts else None,
        )


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den != 0)
    return out


def materialize_cube(
    relation: Relation,
    agg: AggSpec,
    explanations: Sequence[Explanation],
    time_window: tuple | None = None,
) -> SeriesCube:
    """Evaluate the group-by-time aggregate for the relation and every explanation.

    Timestamps where an explanation selects no rows get value 0 (SUM/COUNT);
    for AVG both decomposed parts get 0 there. The overall AVG series must
    have at least one row at every grid timestamp, otherwise the offending
    timestamp is reported.
    """
    tcol = relation.columns[relation.time_attr]
    mask = np.ones(relation.row_count, dtype=bool)
    if time_window is not None:
        lo, hi = time_window
        if lo is not None:
            mask &= np.array([t >= lo for t in tcol.tolist()])
        if hi is not None:
            mask &= np.array([t <= hi for t in tcol.tolist()])
        if not mask.any():
            raise DataError(f"time window {time_window!r} excludes every row")

    times = tcol[mask]
    grid, tidx = np.unique(times, return_inverse=True)
    n = len(grid)
    if n < 2:
        raise DataError("need at least two distinct timestamps")

    if agg.function == AggFunction.COUNT:
        weights = np.ones(int(mask.sum()), dtype=np.float64)
    else:
        col = relation.column(agg.measure)
        if col.dtype == object:
            raise DataError(f"measure {agg.measure!r} is not numeric")
        weights = col[mask].astype(np.float64)

    counts = np.bincount(tidx, minlength=n).astype(np.float64)
    sums = np.bincount(tidx, weights=weights, minlength=n)

    eps = len(explanations)
    val_sum = np.zeros((eps, n), dtype=np.float64)
    val_cnt = np.zeros((eps, n), dtype=np.float64)

    by_subset: dict[tuple[str, ...], list[int]] = {}
    for i, e in enumerate(explanations):
        by_subset.setdefault(e.attrs, []).append(i)

    for subset, idxs in by_subset.items():
        combo_rows = _group_by_combo(relation, subset, mask, tidx, weights, n)
        for i in idxs:
            combo = tuple(explanations[i].value_of(a) for a in subset)
            entry = combo_rows.get(combo)
            if entry is not None:
                val_sum[i], val_cnt[i] = entry

    stamps = tuple(grid.tolist())
    if agg.function == AggFunction.AVG:
        zero = np.flatnonzero(counts == 0)
        if zero.size:
            raise DataError(f"AVG undefined at timestamp {stamps[zero[0]]!r}: no rows")
        return SeriesCube(
            timestamps=stamps,
            agg=agg,
            explanations=tuple(explanations),
            overall_values=sums / counts,
            values=_safe_ratio(val_sum, val_cnt),
            overall_parts=(sums, counts),
            parts=(val_sum, val_cnt),
        )
    overall = counts if agg.function == AggFunction.COUNT else sums
    values = val_cnt if agg.function == AggFunction.COUNT else val_sum
    return SeriesCube(
        timestamps=stamps,
        agg=agg,
        explanations=tuple(explanations),
        overall_values=overall,
        values=values,
    )


def _group_by_combo(
    relation: Relation,
    attrs: tuple[str, ...],
    mask: np.ndarray,
    tidx: np.ndarray,
    weights: np.ndarray,
    n: int,
) -> dict[tuple, tuple[np.ndarray, np.ndarray]]:
    """Per observed value-combination of ``attrs``: (sum, count) series."""
    codes = np.zeros(int(mask.sum()), dtype=np.int64)
    uniques: list[np.ndarray] = []
    for a in attrs:
        col_vals, col_codes = np.unique(relation.columns[a][mask], return_inverse=True)
        codes = codes * len(col_vals) + col_codes
        uniques.append(col_vals)
    combo_codes, combo_inverse = np.unique(codes, return_inverse=True)
    flat = combo_inverse * n + tidx
    size = len(combo_codes) * n
    g_sum = np.bincount(flat, weights=weights, minlength=size).reshape(-1, n)
    g_cnt = np.bincount(flat, minlength=size).reshape(-1, n).astype(np.float64)

    out: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
    for row, code in enumerate(combo_codes.tolist()):
        combo = []
        for vals in reversed(uniques):
            code, k = divmod(code, len(vals))
            combo.append(vals[k])
        out[tuple(reversed(combo))] = (g_sum[row], g_cnt[row])
    return out


def complement_series(overall: Series, part: Series, agg: AggSpec) -> Series:
    """Pointwise overall minus part (SUM/COUNT). AVG is not directly subtractable."""
    if overall.timestamps != part.timestamps:
        raise DataError("complement requires matching timestamp grids")
    if agg.function == AggFunction.AVG:
        raise DataError("complement of AVG requires SUM/COUNT parts; use the cube")
    return Series(overall.timestamps, overall.values - part.values)
