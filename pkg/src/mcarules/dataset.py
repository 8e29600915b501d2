"""Categorical dataset ingestion: CSV loading, quantile binning, stratified folds.

Every other module consumes the :class:`CategoricalDataset` produced here: an
``n x p`` matrix of category indices plus a length-``n`` vector of label
indices. Category order within each column is first-occurrence order, fixed at
load time, so literal indices are reproducible across runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

KIND_CATEGORICAL = "categorical"
KIND_QUANTIZED = "quantized-numeric"


class DatasetError(ValueError):
    """Raised when input data violates the dataset contract."""


@dataclass(frozen=True)
class AttributeSchema:
    """One categorical column: its name and the ordered category labels."""

    name: str
    categories: tuple[str, ...]
    kind: str = KIND_CATEGORICAL

    def __post_init__(self):
        if len(self.categories) < 2:
            raise DatasetError(
                f"attribute {self.name!r} has {len(self.categories)} categories; need at least 2"
            )
        if len(set(self.categories)) != len(self.categories):
            raise DatasetError(f"attribute {self.name!r} has duplicate category labels")
        if self.kind not in (KIND_CATEGORICAL, KIND_QUANTIZED):
            raise DatasetError(f"unknown attribute kind {self.kind!r}")

    @property
    def n_categories(self) -> int:
        return len(self.categories)


@dataclass(frozen=True, order=True)
class Literal:
    """Boolean test "attribute takes category", by 0-based indices."""

    attribute: int
    category: int


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """n samples x p categorical attributes plus one label column.

    ``X[i, j]`` is the category index of sample ``i`` for attribute ``j``;
    ``Y[i]`` indexes into ``label_names``. Immutable after construction and
    safe to share read-only across threads.
    """

    schemas: tuple[AttributeSchema, ...]
    X: np.ndarray
    Y: np.ndarray
    label_names: tuple[str, ...]
    label_name: str = "label"
    _attr_index: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64)
        Y = np.asarray(self.Y, dtype=np.int64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if X.ndim != 2:
            raise DatasetError("X must be a 2-d matrix of category indices")
        if len(self.schemas) != X.shape[1]:
            raise DatasetError("schema count does not match X columns")
        if X.shape[1] < 1:
            raise DatasetError("dataset has no attributes")
        if X.shape[0] < 1:
            raise DatasetError("dataset has no rows")
        if Y.shape != (X.shape[0],):
            raise DatasetError("Y length does not match X rows")
        if len(self.label_names) < 2:
            raise DatasetError("need at least 2 label classes")
        if len(set(self.label_names)) != len(self.label_names):
            raise DatasetError("duplicate label names")
        for j, schema in enumerate(self.schemas):
            col = X[:, j]
            if col.min() < 0 or col.max() >= schema.n_categories:
                raise DatasetError(f"X column {j} ({schema.name!r}) has out-of-range category index")
        if Y.min() < 0 or Y.max() >= len(self.label_names):
            raise DatasetError("Y has out-of-range label index")
        X.setflags(write=False)
        Y.setflags(write=False)
        self._attr_index.update({s.name: j for j, s in enumerate(self.schemas)})

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n_labels(self) -> int:
        return len(self.label_names)

    def attribute_index(self, name: str) -> int:
        try:
            return self._attr_index[name]
        except KeyError:
            raise DatasetError(f"unknown attribute {name!r}") from None

    def label_counts(self) -> np.ndarray:
        return np.bincount(self.Y, minlength=self.n_labels)

    def literal_mask(self, literal: Literal) -> np.ndarray:
        """Boolean row mask where the literal holds."""
        return self.X[:, literal.attribute] == literal.category

    def describe_literal(self, literal: Literal) -> str:
        schema = self.schemas[literal.attribute]
        return f"{schema.name} is {schema.categories[literal.category]}"

    def to_csv(self, path) -> None:
        """Write the dataset back out as labelled CSV (category labels, not indices)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([s.name for s in self.schemas] + [self.label_name])
            for i in range(self.n):
                row = [self.schemas[j].categories[self.X[i, j]] for j in range(self.p)]
                row.append(self.label_names[self.Y[i]])
                writer.writerow(row)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Attribute columns without a label, for prediction on unlabeled data.

    Mirrors the attribute side of :class:`CategoricalDataset` (same schemas,
    same code matrix, same name lookup) so model application code can accept
    either.
    """

    schemas: tuple[AttributeSchema, ...]
    X: np.ndarray
    _attr_index: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64)
        object.__setattr__(self, "X", X)
        if X.ndim != 2:
            raise DatasetError("X must be a 2-d matrix of category indices")
        if len(self.schemas) != X.shape[1]:
            raise DatasetError("schema count does not match X columns")
        if X.shape[1] < 1:
            raise DatasetError("table has no attributes")
        if X.shape[0] < 1:
            raise DatasetError("table has no rows")
        for j, schema in enumerate(self.schemas):
            col = X[:, j]
            if col.min() < 0 or col.max() >= schema.n_categories:
                raise DatasetError(f"X column {j} ({schema.name!r}) has out-of-range category index")
        X.setflags(write=False)
        self._attr_index.update({s.name: j for j, s in enumerate(self.schemas)})

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def attribute_index(self, name: str) -> int:
        try:
            return self._attr_index[name]
        except KeyError:
            raise DatasetError(f"unknown attribute {name!r}") from None


def quantize_numeric(values, bins: int) -> np.ndarray:
    """Equal-frequency binning of ``values`` into ``bins`` categories.

    Bin edges sit at the 1/bins quantiles of the observed values; a value
    equal to an edge goes to the lower bin. Returns one category index
    (0..bins-1) per input, in input order.
    """
    if bins not in (2, 3):
        raise DatasetError(f"bins must be 2 or 3, got {bins}")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DatasetError("values must be a non-empty 1-d sequence")
    if np.unique(values).size < bins:
        raise DatasetError(
            f"need at least {bins} distinct values to form {bins} bins, "
            f"got {np.unique(values).size}"
        )
    edges = quantile_edges(values, bins)
    return np.searchsorted(edges, values, side="left").astype(np.int64)


def quantile_edges(values, bins: int) -> np.ndarray:
    """Interior bin edges: the i/bins quantiles for i = 1..bins-1."""
    qs = [i / bins for i in range(1, bins)]
    return np.quantile(np.asarray(values, dtype=np.float64), qs)


def _format_edge(x: float) -> str:
    return f"{x:.6g}"


def _bin_labels(edges: np.ndarray) -> list[str]:
    """Human-readable half-open interval labels for quantile bins."""
    lo = ["-inf"] + [_format_edge(e) for e in edges]
    hi = [_format_edge(e) for e in edges] + ["+inf"]
    return [f"({a}, {b}]" for a, b in zip(lo, hi)]


def load_csv(
    path,
    label_column: str,
    numeric_bins: dict[str, int] | None = None,
    missing_as_category: bool = False,
) -> CategoricalDataset:
    """Load a header-rowed CSV into a :class:`CategoricalDataset`.

    Columns named in ``numeric_bins`` are parsed as reals and quantile-binned
    into 2 or 3 categories; every other column keeps its observed distinct
    values as categories, ordered by first occurrence. Empty cells abort with
    a row-numbered error unless ``missing_as_category`` is set, in which case
    the empty string becomes an explicit category.
    """
    numeric_bins = dict(numeric_bins or {})
    header, rows = _read_header_rows(path)
    if label_column not in header:
        raise DatasetError(f"{path}: label column {label_column!r} not found")
    if label_column in numeric_bins:
        raise DatasetError("the label column cannot be quantized")
    for col in numeric_bins:
        if col not in header:
            raise DatasetError(f"numeric column {col!r} not found in header")
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    if len(header) < 2:
        raise DatasetError(f"{path}: no attribute columns besides the label")

    cells = _strip_cells(path, header, rows, missing_as_category)
    label_pos = header.index(label_column)
    attr_positions = [j for j in range(len(header)) if j != label_pos]
    schemas, X = _encode_columns(path, header, cells, attr_positions, numeric_bins)

    raw_labels = [cells[i][label_pos] for i in range(len(cells))]
    label_names, y = _first_occurrence_codes(raw_labels)
    if len(label_names) < 2:
        raise DatasetError(f"{path}: label column {label_column!r} has a single class")

    return CategoricalDataset(
        schemas=schemas,
        X=X,
        Y=y,
        label_names=label_names,
        label_name=label_column,
    )


def load_feature_csv(
    path,
    numeric_bins: dict[str, int] | None = None,
    missing_as_category: bool = False,
    ignore_columns=(),
) -> FeatureTable:
    """Load attribute columns only, skipping any column named in ``ignore_columns``.

    Same parsing rules as :func:`load_csv`, but no label is required, so this
    is the ingestion path for prediction on unlabeled data.
    """
    numeric_bins = dict(numeric_bins or {})
    header, rows = _read_header_rows(path)
    ignore = set(ignore_columns)
    for col in numeric_bins:
        if col not in header:
            raise DatasetError(f"numeric column {col!r} not found in header")
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    positions = [j for j, name in enumerate(header) if name not in ignore]
    if not positions:
        raise DatasetError(f"{path}: no attribute columns")

    cells = _strip_cells(path, header, rows, missing_as_category)
    schemas, X = _encode_columns(path, header, cells, positions, numeric_bins)
    return FeatureTable(schemas=schemas, X=X)


def _read_header_rows(path):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise DatasetError(f"{path}: duplicate column names in header")
    return header, rows


def _strip_cells(path, header, rows, missing_as_category) -> list[list[str]]:
    cells: list[list[str]] = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DatasetError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
        row = [c.strip() for c in row]
        for col_name, cell in zip(header, row):
            if cell == "" and not missing_as_category:
                raise DatasetError(
                    f"{path}: row {lineno} has an empty cell in column {col_name!r}; "
                    "rerun with missing-as-category to keep such rows"
                )
        cells.append(row)
    return cells


def _encode_columns(path, header, cells, positions, numeric_bins):
    schemas: list[AttributeSchema] = []
    columns: list[np.ndarray] = []
    for pos in positions:
        name = header[pos]
        raw = [cells[i][pos] for i in range(len(cells))]
        if name in numeric_bins:
            schema, codes = _quantized_column(name, raw, numeric_bins[name], path)
        else:
            schema, codes = _categorical_column(name, raw)
        schemas.append(schema)
        columns.append(codes)
    return tuple(schemas), np.column_stack(columns)


def _first_occurrence_codes(raw: list[str]) -> tuple[tuple[str, ...], np.ndarray]:
    order: dict[str, int] = {}
    codes = np.empty(len(raw), dtype=np.int64)
    for i, v in enumerate(raw):
        if v not in order:
            order[v] = len(order)
        codes[i] = order[v]
    return tuple(order), codes


def _categorical_column(name, raw):
    values, codes = _first_occurrence_codes(raw)
    if len(values) < 2:
        raise DatasetError(f"attribute {name!r} has a single observed value")
    return AttributeSchema(name=name, categories=values, kind=KIND_CATEGORICAL), codes


def _quantized_column(name, raw, bins, path):
    values = np.empty(len(raw), dtype=np.float64)
    for i, cell in enumerate(raw):
        try:
            values[i] = float(cell)
        except ValueError:
            raise DatasetError(
                f"{path}: column {name!r} declared numeric but row {i + 2} holds {cell!r}"
            ) from None
    bin_codes = quantize_numeric(values, bins)
    labels = _bin_labels(quantile_edges(values, bins))
    # Occupied bins only, relabelled in first-occurrence order like any column.
    raw_labels = [labels[b] for b in bin_codes]
    cats, codes = _first_occurrence_codes(raw_labels)
    if len(cats) < 2:
        raise DatasetError(f"quantizing column {name!r} produced a single occupied bin")
    return AttributeSchema(name=name, categories=cats, kind=KIND_QUANTIZED), codes


def stratified_kfold(dataset: CategoricalDataset, k: int, seed: int):
    """Split into ``k`` stratified (train, test) index partitions.

    Folds are disjoint, cover all rows, and hold each class's fold counts
    within one sample of proportional. Deterministic given ``seed``.
    """
    if k < 2:
        raise DatasetError(f"k must be at least 2, got {k}")
    counts = dataset.label_counts()
    for c, cnt in enumerate(counts):
        if cnt < k:
            raise DatasetError(
                f"label class {dataset.label_names[c]!r} has {cnt} members; needs at least k={k}"
            )
    rng = np.random.default_rng(seed)
    fold_of = np.empty(dataset.n, dtype=np.int64)
    for c in range(dataset.n_labels):
        idx = np.flatnonzero(dataset.Y == c)
        rng.shuffle(idx)
        # Rotate the start fold per class so remainder samples spread out.
        fold_of[idx] = (np.arange(idx.size) + c) % k
    folds = []
    all_idx = np.arange(dataset.n)
    for f in range(k):
        test = all_idx[fold_of == f]
        train = all_idx[fold_of != f]
        folds.append((train, test))
    return folds


def subset(dataset: CategoricalDataset, indices) -> CategoricalDataset:
    """Row-subset view used for cross-validation; schemas are shared unchanged."""
    indices = np.asarray(indices, dtype=np.int64)
    return CategoricalDataset(
        schemas=dataset.schemas,
        X=dataset.X[indices],
        Y=dataset.Y[indices],
        label_names=dataset.label_names,
        label_name=dataset.label_name,
    )
