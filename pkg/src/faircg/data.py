"""Tabular ingestion, decile binarization, and stratified fold plans.

Numeric columns are cut at their sample deciles (lower empirical quantile,
no interpolation) and every threshold contributes a (<= t, > t) pair;
categorical columns contribute an (= v, != v) pair per level. Duplicate
binary columns produced by degenerate quantiles are dropped, keeping the
first occurrence.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

DEFAULT_QUANTILES = tuple(i / 10 for i in range(1, 10))


@dataclass
class RawTable:
    """Pre-binarization table: feature columns plus extracted label/group."""

    columns: list  # (name, kind, values) with values a list or array per row
    labels: np.ndarray  # in {-1, +1}
    groups: np.ndarray  # group identifier per row

    @property
    def n_rows(self):
        return len(self.labels)

    def __post_init__(self):
        names = [c[0] for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names in table")
        for name, kind, values in self.columns:
            if len(values) != self.n_rows:
                raise DataError(f"column {name!r} has {len(values)} values, expected {self.n_rows}")

    def column(self, name):
        for col in self.columns:
            if col[0] == name:
                return col
        raise ConfigError(f"no column named {name!r}")


@dataclass(frozen=True)
class BinFeature:
    source: str
    op: str  # one of <=, >, =, !=
    value: object


@dataclass
class BinFeatureMap:
    entries: list  # of BinFeature; feature index = position
    complement: np.ndarray = None  # paired feature index, -1 if deduplicated away

    @property
    def p(self):
        return len(self.entries)

    def to_json(self):
        return json.dumps(
            [{"source": e.source, "op": e.op, "value": e.value} for e in self.entries],
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        entries = [BinFeature(d["source"], d["op"], d["value"]) for d in json.loads(text)]
        fm = cls(entries=entries)
        fm.complement = _pair_complements(entries)
        return fm

    def describe(self, j):
        e = self.entries[j]
        op = {"<=": "<=", ">": ">", "=": "=", "!=": "!="}[e.op]
        val = f"{e.value:g}" if isinstance(e.value, float) else str(e.value)
        return f"{e.source}{op}{val}"


_OP_COMPLEMENT = {"<=": ">", ">": "<=", "=": "!=", "!=": "="}


def _pair_complements(entries):
    index = {(e.source, e.op, e.value): j for j, e in enumerate(entries)}
    comp = np.full(len(entries), -1, dtype=int)
    for j, e in enumerate(entries):
        comp[j] = index.get((e.source, _OP_COMPLEMENT[e.op], e.value), -1)
    return comp


@dataclass
class BinaryDataset:
    """Binarized rows with labels in {-1,+1} and group identifiers."""

    X: np.ndarray  # n x p uint8
    y: np.ndarray  # n, in {-1, +1}
    g: np.ndarray  # n, group ids
    feature_map: BinFeatureMap = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.uint8)
        self.y = np.asarray(self.y)
        self.g = np.asarray(self.g)
        if not set(np.unique(self.y)) <= {-1, 1}:
            raise DataError("labels must be in {-1,+1}")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def pos(self):
        return np.nonzero(self.y == 1)[0]

    @property
    def neg(self):
        return np.nonzero(self.y == -1)[0]

    def groups(self):
        return sorted(set(self.g.tolist()))

    def pos_in(self, group):
        return np.nonzero((self.y == 1) & (self.g == group))[0]

    def neg_in(self, group):
        return np.nonzero((self.y == -1) & (self.g == group))[0]

    def zero_set(self, i):
        """Feature indices that are 0 in row i."""
        return np.nonzero(self.X[i] == 0)[0]

    def subset(self, rows):
        return BinaryDataset(self.X[rows], self.y[rows], self.g[rows], self.feature_map)


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray  # row -> fold id
    seed: int

    def train_rows(self, fold):
        return np.nonzero(self.assignments != fold)[0]

    def test_rows(self, fold):
        return np.nonzero(self.assignments == fold)[0]


def ingest_csv(path, schema, group_column, label_column, positive_label):
    """Read a headed CSV into a RawTable.

    ``schema`` maps feature column name -> NUMERIC | CATEGORICAL. The label
    and group columns are extracted and excluded from the feature columns.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc

    col_idx = {name: i for i, name in enumerate(header)}
    for name in list(schema) + [group_column, label_column]:
        if name not in col_idx:
            raise ConfigError(f"{path}: declared column {name!r} not in header {header}")

    raw_labels = [row[col_idx[label_column]] for row in rows]
    labels = np.array([1 if v == str(positive_label) else -1 for v in raw_labels])
    groups = np.array([row[col_idx[group_column]] for row in rows])

    columns = []
    for name, kind in schema.items():
        if name == label_column:
            continue
        cells = [row[col_idx[name]] for row in rows]
        if kind == NUMERIC:
            values = np.empty(len(cells))
            for i, cell in enumerate(cells):
                try:
                    values[i] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {i + 2}, column {name!r}: cannot parse {cell!r} as numeric"
                    ) from None
        elif kind == CATEGORICAL:
            values = cells
        else:
            raise ConfigError(f"unknown column kind {kind!r} for {name!r}")
        columns.append((name, kind, values))
    return RawTable(columns=columns, labels=labels, groups=groups)


def preprocess_compas(table, race_column="race", keep=("African-American", "Caucasian")):
    """Drop rows outside the two largest race groups and binarize the indicator.

    Idempotent: a table whose race column only contains the kept values is
    returned with the same row count.
    """
    try:
        _, kind, values = table.column(race_column)
    except ConfigError:
        raise ConfigError(f"race column {race_column!r} not present") from None
    values = np.asarray(values, dtype=object)
    mask = np.isin(values, keep)
    indicator = np.where(values[mask] == keep[0], "1", "0")
    columns = []
    for name, k, vals in table.columns:
        if name == race_column:
            continue
        vals = np.asarray(vals, dtype=object) if k == CATEGORICAL else np.asarray(vals)
        columns.append((name, k, vals[mask]))
    columns.append((race_column + "_is_" + keep[0].replace("-", "_"), CATEGORICAL, indicator))
    groups = table.groups
    if len(groups) == len(mask):
        groups = np.asarray(groups, dtype=object)[mask]
    return RawTable(columns=columns, labels=table.labels[mask], groups=np.array([str(v) for v in indicator]) if _groups_were_race(table, race_column) else groups)


def _groups_were_race(table, race_column):
    try:
        _, _, vals = table.column(race_column)
    except ConfigError:
        return False
    return list(map(str, table.groups)) == list(map(str, vals))


def _lower_quantile(sorted_vals, q):
    """Value at index ceil(q * n) - 1 of the sorted column."""
    n = len(sorted_vals)
    idx = int(np.ceil(q * n)) - 1
    return sorted_vals[min(max(idx, 0), n - 1)]


def binarize(table, quantiles=DEFAULT_QUANTILES):
    """Binarize a RawTable; returns (BinFeatureMap, BinaryDataset).

    Deterministic given the table and quantiles. Deduplicates identical binary
    columns, keeping the first occurrence.
    """
    if table.n_rows == 0:
        raise DataError("cannot binarize an empty table")
    qs = list(quantiles)
    if any(not 0 < q < 1 for q in qs) or any(b <= a for a, b in zip(qs, qs[1:])):
        raise ConfigError("quantiles must be strictly increasing within (0,1)")

    entries = []
    cols = []
    for name, kind, values in table.columns:
        if kind == NUMERIC:
            vals = np.asarray(values, dtype=float)
            sorted_vals = np.sort(vals)
            thresholds = []
            for q in qs:
                t = _lower_quantile(sorted_vals, q)
                if not thresholds or t != thresholds[-1]:
                    thresholds.append(t)
            for t in thresholds:
                entries.append(BinFeature(name, "<=", float(t)))
                cols.append((vals <= t).astype(np.uint8))
                entries.append(BinFeature(name, ">", float(t)))
                cols.append((vals > t).astype(np.uint8))
        else:
            vals = np.asarray(values, dtype=object)
            for level in sorted({str(v) for v in vals}):
                eq = (vals.astype(str) == level).astype(np.uint8)
                entries.append(BinFeature(name, "=", level))
                cols.append(eq)
                entries.append(BinFeature(name, "!=", level))
                cols.append(1 - eq)

    keep_entries, keep_cols, seen = [], [], {}
    for entry, col in zip(entries, cols):
        key = col.tobytes()
        if key in seen:
            continue
        seen[key] = len(keep_entries)
        keep_entries.append(entry)
        keep_cols.append(col)

    fm = BinFeatureMap(entries=keep_entries)
    fm.complement = _pair_complements(keep_entries)
    X = np.column_stack(keep_cols) if keep_cols else np.zeros((table.n_rows, 0), dtype=np.uint8)
    ds = BinaryDataset(X=X, y=table.labels.copy(), g=np.asarray(table.groups).copy(), feature_map=fm)
    return fm, ds


def make_folds(ds, k=10, seed=0):
    """Stratified k-fold assignment by (label, group), deterministic per seed."""
    if k < 2:
        raise ConfigError("k must be >= 2")
    if k > ds.n:
        raise ConfigError(f"k={k} exceeds row count {ds.n}")
    rng = np.random.default_rng(seed)
    strata = {}
    for i in range(ds.n):
        strata.setdefault((int(ds.y[i]), str(ds.g[i])), []).append(i)
    order = []
    for key in sorted(strata):
        rows = np.array(strata[key])
        rng.shuffle(rows)
        order.extend(rows.tolist())
    assignments = np.empty(ds.n, dtype=int)
    for pos, row in enumerate(order):
        assignments[row] = pos % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)
