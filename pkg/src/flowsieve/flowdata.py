"""Loading, validation, synthesis, and splitting of labeled flow datasets.

A flow record is an aggregated network conversation (byte/packet counters,
ports, protocol, flags) labeled benign (0) or malicious (1). Datasets are
column-oriented, immutable after construction, and safe to share across
concurrent readers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError

# Feature vocabulary rankings are reported against. Adapters map source
# columns onto these names so rankings are comparable across datasets.
CANONICAL_FEATURES = (
    "Fwd. Bytes",
    "Bwd. Bytes",
    "Fwd. Bytes w/ Header",
    "Bwd. Bytes w/ Header",
    "Total Bytes",
    "Packets Per Second",
    "Fwd. Packets per second",
    "Flags",
    "Communication Protocol",
    "Application protocol",
    "Destination Port",
    "Missed Bytes",
)

KNOWN_ADAPTERS = ("bot-iot", "iot-23", "ton-iot", "custom")

# Tokens treated as an absent numeric measurement; imputed as 0 because an
# absent flow counter means no traffic was observed.
MISSING_TOKENS = frozenset({"", "-", "nan", "NaN", "NAN", "NA", "na", "null", "NULL"})

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Dataset:
    """Immutable column-oriented table of numeric features plus binary labels.

    ``x`` is (rows, features) float64; ``labels`` holds 0 (benign) or
    1 (malicious). ``meta`` carries load provenance (encodings, dropped-row
    and missing-cell counts) and is excluded from equality.
    """

    feature_names: tuple[str, ...]
    x: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int8)
        if x.ndim != 2:
            raise DataError("feature block must be 2-dimensional")
        if len(self.feature_names) != len(set(self.feature_names)):
            raise DataError("duplicate feature names")
        if x.shape[1] != len(self.feature_names):
            raise DataError(
                f"{len(self.feature_names)} feature names for {x.shape[1]} columns"
            )
        if labels.shape != (x.shape[0],):
            raise DataError("labels length does not match row count")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise DataError("labels must contain only 0 or 1")
        x.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels)

    @property
    def row_count(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"unknown feature {name!r}") from None
        return self.x[:, j]

    def matrix(self, names=None) -> np.ndarray:
        """Writable (rows, len(names)) float64 copy in the given column order."""
        if names is None:
            return np.array(self.x, dtype=np.float64, order="C", copy=True)
        idx = [self.feature_names.index(n) for n in names]
        return np.ascontiguousarray(self.x[:, idx], dtype=np.float64)

    def class_counts(self) -> tuple[int, int]:
        n1 = int(np.count_nonzero(self.labels))
        return self.row_count - n1, n1

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.feature_names, self.x[rows], self.labels[rows], dict(self.meta))

    def select_features(self, names) -> "Dataset":
        return Dataset(tuple(names), self.matrix(names), self.labels, dict(self.meta))


@dataclass(frozen=True)
class SchemaAdapter:
    """Declarative mapping from a source table onto the canonical schema.

    ``column_map`` renames source columns to canonical feature names; columns
    not mentioned are kept under their source name unless listed in
    ``drop_columns``. Raw label values in ``benign_values`` map to 0 and all
    others to 1, unless ``malicious_values`` is given, in which case the two
    sets are exhaustive and any other raw label is an error.
    """

    dataset_id: str
    label_column: str
    benign_values: frozenset[str]
    column_map: dict = field(default_factory=dict)
    drop_columns: tuple[str, ...] = ()
    malicious_values: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "benign_values", frozenset(self.benign_values))
        object.__setattr__(self, "malicious_values", frozenset(self.malicious_values))
        object.__setattr__(self, "column_map", dict(self.column_map))
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        if self.label_column in self.column_map:
            raise DataError("label column must not appear in column_map")


@dataclass(frozen=True)
class FoldSplit:
    """One fold of a stratified k-fold partition (row indices, sorted)."""

    fold_index: int
    train_rows: np.ndarray
    test_rows: np.ndarray


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seed-reproducible synthetic flow dataset.

    Informative columns get a class-conditional mean shift of at least
    ``separation`` standard deviations; noise columns are label-independent.
    """

    n_rows: int
    n_informative: int
    n_noise: int
    class_balance: float
    seed: int
    separation: float = 3.0

    def validate(self):
        if self.n_rows < 2:
            raise ValueError("n_rows must be at least 2")
        if self.n_informative < 1:
            raise ValueError("n_informative must be at least 1")
        if self.n_noise < 0:
            raise ValueError("n_noise must be nonnegative")
        if not (0.0 < self.class_balance < 1.0):
            raise ValueError("class_balance must lie strictly between 0 and 1")
        if self.separation < 2.0:
            raise ValueError("separation must be at least 2 standard deviations")


def adapter_from_mapping(doc: dict, source: str = "<mapping>") -> SchemaAdapter:
    if not isinstance(doc, dict):
        raise DataError(f"adapter document {source} is not a mapping")
    try:
        dataset_id = str(doc["dataset_id"])
        label_column = str(doc["label_column"])
    except KeyError as exc:
        raise DataError(f"adapter {source} is missing required key {exc}") from None
    return SchemaAdapter(
        dataset_id=dataset_id,
        label_column=label_column,
        benign_values=frozenset(str(v) for v in doc.get("benign_values", ())),
        column_map={str(k): str(v) for k, v in (doc.get("column_map") or {}).items()},
        drop_columns=tuple(str(c) for c in doc.get("drop_columns", ())),
        malicious_values=frozenset(str(v) for v in doc.get("malicious_values", ())),
    )


def adapter_from_file(path) -> SchemaAdapter:
    path = Path(path)
    if not path.exists():
        raise DataError(f"adapter file not found: {path}")
    doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    return adapter_from_mapping(doc, source=str(path))


def get_adapter(adapter_id: str) -> SchemaAdapter:
    """Load one of the adapters shipped with the package."""
    from importlib.resources import files

    if adapter_id not in KNOWN_ADAPTERS:
        raise DataError(
            f"unknown adapter {adapter_id!r}; expected one of {', '.join(KNOWN_ADAPTERS)}"
        )
    resource = files("flowsieve") / "adapters" / f"{adapter_id}.yaml"
    doc = yaml.safe_load(resource.read_text(encoding="utf-8"))
    return adapter_from_mapping(doc, source=f"adapters/{adapter_id}.yaml")


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def _parse_number(cell: str):
    """float value, or None when the cell is not a usable finite number."""
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_table(path, adapter: SchemaAdapter) -> Dataset:
    """Load a delimited text file through a schema adapter.

    Column handling: columns named in ``adapter.column_map`` are renamed,
    ``drop_columns`` are removed, the label column is mapped to {0,1}, and
    every remaining column becomes a feature. A feature column whose
    non-missing cells all parse as finite numbers is numeric (missing cells
    impute 0, counted per column); a column where none parse is categorical
    and is integer-encoded by first appearance; a mixed column is numeric
    and rows holding its unparseable cells are dropped with a counted
    warning. Encodings and counts are recorded in ``Dataset.meta``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    text = path.read_text(encoding="utf-8")
    first_newline = text.find("\n")
    header_line = text if first_newline < 0 else text[:first_newline]
    if not header_line.strip():
        raise DataError(f"{path}: empty file")
    delimiter = _sniff_delimiter(header_line)

    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    raw_rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not raw_rows:
        raise DataError(f"{path}: no data rows")

    if adapter.label_column not in header:
        raise DataError(f"{path}: label column {adapter.label_column!r} not found")
    missing_sources = sorted(set(adapter.column_map) - set(header))
    if missing_sources:
        raise DataError(
            f"{path}: adapter maps absent column(s): {', '.join(missing_sources)}"
        )

    drop = set(adapter.drop_columns)
    label_idx = header.index(adapter.label_column)
    feature_idx: list[int] = []
    feature_names: list[str] = []
    for j, name in enumerate(header):
        if j == label_idx or name in drop:
            continue
        canonical = adapter.column_map.get(name, name)
        if canonical in feature_names:
            raise DataError(f"{path}: duplicate feature column {canonical!r}")
        feature_idx.append(j)
        feature_names.append(canonical)
    if not feature_names:
        raise DataError(f"{path}: no feature columns remain after adaptation")

    n_cols = len(header)
    width_ok = [len(r) == n_cols for r in raw_rows]
    cells = [[c.strip() for c in r] for r in raw_rows]

    # Column classification pass: a column is categorical only when no
    # non-missing cell parses as a finite number.
    numeric_col: dict[int, bool] = {}
    for j in feature_idx:
        parsed_any = failed_any = False
        for ok, row in zip(width_ok, cells):
            if not ok:
                continue
            cell = row[j]
            if cell in MISSING_TOKENS:
                continue
            if _parse_number(cell) is None:
                failed_any = True
            else:
                parsed_any = True
        numeric_col[j] = parsed_any or not failed_any

    keep: list[int] = []
    dropped_rows = 0
    for i, (ok, row) in enumerate(zip(width_ok, cells)):
        corrupt = not ok
        if not corrupt:
            for j in feature_idx:
                cell = row[j]
                if numeric_col[j] and cell not in MISSING_TOKENS and _parse_number(cell) is None:
                    corrupt = True
                    break
        if corrupt:
            dropped_rows += 1
        else:
            keep.append(i)
    if not keep:
        raise DataError(f"{path}: every row was dropped as unparseable")

    labels = np.empty(len(keep), dtype=np.int8)
    exhaustive = bool(adapter.malicious_values)
    for out_i, i in enumerate(keep):
        raw = cells[i][label_idx]
        if raw in adapter.benign_values:
            labels[out_i] = 0
        elif not exhaustive or raw in adapter.malicious_values:
            labels[out_i] = 1
        else:
            raise DataError(f"{path}: unmappable label value {raw!r}")

    x = np.empty((len(keep), len(feature_idx)), dtype=np.float64)
    missing_counts: dict[str, int] = {}
    encodings: dict[str, dict[str, int]] = {}
    for col_out, j in enumerate(feature_idx):
        name = feature_names[col_out]
        if numeric_col[j]:
            missing = 0
            for out_i, i in enumerate(keep):
                cell = cells[i][j]
                if cell in MISSING_TOKENS:
                    x[out_i, col_out] = 0.0
                    missing += 1
                else:
                    value = _parse_number(cell)
                    if value is None:  # non-finite parse counts as missing
                        x[out_i, col_out] = 0.0
                        missing += 1
                    else:
                        x[out_i, col_out] = value
            if missing:
                missing_counts[name] = missing
        else:
            codes: dict[str, int] = {}
            for out_i, i in enumerate(keep):
                cell = cells[i][j]
                if cell not in codes:
                    codes[cell] = len(codes)
                x[out_i, col_out] = codes[cell]
            encodings[name] = codes

    meta = {
        "source": str(path),
        "adapter": adapter.dataset_id,
        "delimiter": delimiter,
        "dropped_rows": dropped_rows,
        "missing_counts": missing_counts,
        "encodings": encodings,
    }
    return Dataset(tuple(feature_names), x, labels, meta)


def write_canonical(dataset: Dataset, path) -> Path:
    """Persist a dataset as canonical delimited text (label column last).

    Floats are written with shortest round-trip repr so reloading restores
    the exact values.
    """
    path = Path(path)
    lines = [",".join([*dataset.feature_names, LABEL_COLUMN])]
    for i in range(dataset.row_count):
        cells = [repr(float(v)) for v in dataset.x[i]]
        cells.append(str(int(dataset.labels[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_canonical(path) -> Dataset:
    """Reload a file produced by write_canonical."""
    return load_table(path, get_adapter("custom"))


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Generate a seed-reproducible stand-in for the external flow datasets.

    Labels are assigned by permutation so the malicious count is exactly
    round(balance * n_rows); informative columns are unit-variance normals
    shifted by ``separation``..``separation + 1`` standard deviations for the
    malicious class, noise columns are identically distributed across classes.
    """
    spec.validate()
    n = spec.n_rows
    n_mal = int(math.floor(spec.class_balance * n + 0.5))
    if not 0 < n_mal < n:
        raise ValueError("class balance leaves one class empty at this row count")

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    labels = np.zeros(n, dtype=np.int8)
    labels[rng.permutation(n)[:n_mal]] = 1

    names: list[str] = []
    columns: list[np.ndarray] = []
    k = spec.n_informative
    for j in range(k):
        shift = spec.separation + (j / (k - 1) if k > 1 else 0.0)
        names.append(f"signal_{j:02d}")
        columns.append(rng.standard_normal(n) + shift * labels)
    for j in range(spec.n_noise):
        names.append(f"noise_{j:02d}")
        columns.append(rng.standard_normal(n))

    x = np.column_stack(columns)
    meta = {
        "source": "synthetic",
        "synthetic": {
            "n_rows": n,
            "n_informative": spec.n_informative,
            "n_noise": spec.n_noise,
            "class_balance": spec.class_balance,
            "seed": spec.seed,
            "separation": spec.separation,
        },
    }
    return Dataset(tuple(names), x, labels, meta)


def _require_binary(dataset: Dataset, context: str):
    n0, n1 = dataset.class_counts()
    if n0 == 0 or n1 == 0:
        raise DataError(f"{context} requires rows of both classes (got {n0} benign, {n1} malicious)")


def stratified_kfold(dataset: Dataset, k: int, seed: int) -> list[FoldSplit]:
    """Deterministic stratified k-fold split; each test fold preserves the
    class ratio within one row per class."""
    if k < 2:
        raise ValueError("k must be at least 2")
    n0, n1 = dataset.class_counts()
    if min(n0, n1) < k:
        raise DataError(f"each class needs at least {k} rows (got {n0} benign, {n1} malicious)")

    rng = np.random.Generator(np.random.PCG64(seed))
    fold_members: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in (0, 1):
        idx = np.nonzero(dataset.labels == cls)[0]
        idx = rng.permutation(idx)
        n_c = idx.size
        base, extra = divmod(n_c, k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            fold_members[f].append(idx[start : start + size])
            start += size

    all_rows = np.arange(dataset.row_count)
    folds = []
    for f in range(k):
        test = np.sort(np.concatenate(fold_members[f]))
        train = np.setdiff1d(all_rows, test, assume_unique=True)
        folds.append(FoldSplit(f, train, test))
    return folds


def _apportion(total: int, class_sizes: list[int]) -> list[int]:
    """Largest-remainder apportionment of `total` across classes, each share
    capped at the class size (total <= sum(class_sizes) keeps this feasible)."""
    n = sum(class_sizes)
    quotas = [total * size / n for size in class_sizes]
    shares = [int(math.floor(q)) for q in quotas]
    order = sorted(range(len(shares)), key=lambda c: (-(quotas[c] - shares[c]), c))
    i = 0
    while sum(shares) < total:
        c = order[i % len(order)]
        if shares[c] < class_sizes[c]:
            shares[c] += 1
        i += 1
    return shares


def holdout_split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/test partition; deterministic given seed.

    The test size is round-half-up of ``test_fraction * rows``, clamped so
    neither side is empty, and apportioned across classes by largest
    remainder.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    n0, n1 = dataset.class_counts()
    if min(n0, n1) < 2:
        raise DataError("both classes need at least 2 rows for a stratified holdout")

    n = dataset.row_count
    n_test = int(math.floor(test_fraction * n + 0.5))
    n_test = min(max(n_test, 1), n - 1)
    share0, share1 = _apportion(n_test, [n0, n1])

    rng = np.random.Generator(np.random.PCG64(seed))
    test_parts, train_parts = [], []
    for cls, share in ((0, share0), (1, share1)):
        idx = rng.permutation(np.nonzero(dataset.labels == cls)[0])
        test_parts.append(idx[:share])
        train_parts.append(idx[share:])
    test_rows = np.sort(np.concatenate(test_parts))
    train_rows = np.sort(np.concatenate(train_parts))
    return dataset.subset(train_rows), dataset.subset(test_rows)
