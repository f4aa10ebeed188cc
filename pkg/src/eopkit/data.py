"""Dataset ingestion and the neighborhood-crime preprocessing pipeline.

The pipeline reproduces a fixed recipe on the standard distribution
format of the communities-and-crime table (comma separated, ``?`` for
missing, no header, 128 columns):

1. drop rows whose target value is missing;
2. drop descriptive columns missing in strictly more than 80% of the
   remaining rows;
3. mean-impute remaining missing cells, then standardize every retained
   column to mean 0 and variance 1;
4. divide targets by their maximum so they land in [0, 1], then flip
   ``y -> 1 - y`` so that higher is more desirable;
5. assign group 1 to rows whose combined non-majority population share
   exceeds the threshold (strictly), group 0 otherwise, and append that
   indicator as a raw 0/1 feature column.

The grouping share columns are consumed by step 5 and excluded from the
feature matrix; the group indicator is the only place the sensitive
information survives.  Every step is audited in a report.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset

__all__ = [
    "RawTable",
    "ColumnRoles",
    "PreprocessReport",
    "load_table",
    "preprocess_communities",
    "make_toy_instance",
    "write_snapshot",
    "read_snapshot",
    "COMMUNITIES_COLUMNS",
]

# Column order of the standard communities-and-crime distribution:
# 5 identifier columns, 122 descriptive columns, 1 target column.
COMMUNITIES_COLUMNS = (
    "state", "county", "community", "communityname", "fold",
    "population", "householdsize", "racepctblack", "racePctWhite",
    "racePctAsian", "racePctHisp", "agePct12t21", "agePct12t29",
    "agePct16t24", "agePct65up", "numbUrban", "pctUrban", "medIncome",
    "pctWWage", "pctWFarmSelf", "pctWInvInc", "pctWSocSec", "pctWPubAsst",
    "pctWRetire", "medFamInc", "perCapInc", "whitePerCap", "blackPerCap",
    "indianPerCap", "AsianPerCap", "OtherPerCap", "HispPerCap",
    "NumUnderPov", "PctPopUnderPov", "PctLess9thGrade", "PctNotHSGrad",
    "PctBSorMore", "PctUnemployed", "PctEmploy", "PctEmplManu",
    "PctEmplProfServ", "PctOccupManu", "PctOccupMgmtProf", "MalePctDivorce",
    "MalePctNevMarr", "FemalePctDiv", "TotalPctDiv", "PersPerFam",
    "PctFam2Par", "PctKids2Par", "PctYoungKids2Par", "PctTeen2Par",
    "PctWorkMomYoungKids", "PctWorkMom", "NumIlleg", "PctIlleg", "NumImmig",
    "PctImmigRecent", "PctImmigRec5", "PctImmigRec8", "PctImmigRec10",
    "PctRecentImmig", "PctRecImmig5", "PctRecImmig8", "PctRecImmig10",
    "PctSpeakEnglOnly", "PctNotSpeakEnglWell", "PctLargHouseFam",
    "PctLargHouseOccup", "PersPerOccupHous", "PersPerOwnOccHous",
    "PersPerRentOccHous", "PctPersOwnOccup", "PctPersDenseHous",
    "PctHousLess3BR", "MedNumBR", "HousVacant", "PctHousOccup",
    "PctHousOwnOcc", "PctVacantBoarded", "PctVacMore6Mos", "MedYrHousBuilt",
    "PctHousNoPhone", "PctWOFullPlumb", "OwnOccLowQuart", "OwnOccMedVal",
    "OwnOccHiQuart", "RentLowQ", "RentMedian", "RentHighQ", "MedRent",
    "MedRentPctHousInc", "MedOwnCostPctInc", "MedOwnCostPctIncNoMtg",
    "NumInShelters", "NumStreet", "PctForeignBorn", "PctBornSameState",
    "PctSameHouse85", "PctSameCity85", "PctSameState85", "LemasSwornFT",
    "LemasSwFTPerPop", "LemasSwFTFieldOps", "LemasSwFTFieldPerPop",
    "LemasTotalReq", "LemasTotReqPerPop", "PolicReqPerOffic", "PolicPerPop",
    "RacialMatchCommPol", "PctPolicWhite", "PctPolicBlack", "PctPolicHisp",
    "PctPolicAsian", "PctPolicMinor", "OfficAssgnDrugUnits",
    "NumKindsDrugsSeiz", "PolicAveOTWorked", "LandArea", "PopDens",
    "PctUsePubTrans", "PolicCars", "PolicOperBudg", "LemasPctPolicOnPatr",
    "LemasGangUnitDeploy", "LemasPctOfficDrugUn", "PolicBudgPerPop",
    "ViolentCrimesPerPop",
)


@dataclass(frozen=True)
class RawTable:
    """A rectangular table of string cells with tagged missing markers."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    missing_markers: frozenset[str] = frozenset({"?"})

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(self, "missing_markers", frozenset(self.missing_markers))
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"row {i} has {len(row)} cells, expected {width}"
                )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def is_missing(self, value: str) -> bool:
        return value.strip() in self.missing_markers


def load_table(
    path,
    delimiter: str = ",",
    missing_markers=("?",),
    column_names=None,
    has_header: bool = False,
) -> RawTable:
    """Read a delimiter-separated table into a :class:`RawTable`.

    Without a header row, 128-column files get the standard
    communities-and-crime names; other widths need ``column_names``.
    Ragged rows are an error naming the offending row.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        rows = [tuple(cell.strip() for cell in row) for row in reader if row]
    if not rows:
        raise ValueError(f"{path} contains no rows")
    if has_header:
        column_names, rows = rows[0], rows[1:]
    if column_names is None:
        if len(rows[0]) == len(COMMUNITIES_COLUMNS):
            column_names = COMMUNITIES_COLUMNS
        else:
            column_names = tuple(f"c{j:03d}" for j in range(len(rows[0])))
    width = len(column_names)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
    return RawTable(tuple(column_names), tuple(rows), frozenset(missing_markers))


@dataclass(frozen=True)
class ColumnRoles:
    """Which columns play which role in the preprocessing recipe."""

    target: str
    group_share_columns: tuple[str, ...]
    identifier_columns: tuple[str, ...] = ()
    group_threshold: float = 0.5  # strict ">", in the file's units

    @classmethod
    def communities_default(cls) -> "ColumnRoles":
        return cls(
            target="ViolentCrimesPerPop",
            group_share_columns=("racepctblack", "racePctHisp", "racePctAsian"),
            identifier_columns=("state", "county", "community", "communityname", "fold"),
        )


@dataclass
class PreprocessReport:
    """Audit record of one preprocessing run."""

    raw_observations: int = 0
    descriptive_feature_count: int = 0
    rows_dropped: int = 0
    columns_dropped: list[str] = field(default_factory=list)
    zero_variance_columns_dropped: list[str] = field(default_factory=list)
    group_columns_excluded: list[str] = field(default_factory=list)
    imputed_cells: int = 0
    target_scale: float = 1.0
    group_sizes: dict = field(default_factory=dict)
    feature_names: list[str] = field(default_factory=list)


def preprocess_communities(
    raw: RawTable, roles: ColumnRoles | None = None
) -> tuple[Dataset, PreprocessReport]:
    """Apply the fixed preprocessing recipe; see the module docstring."""
    roles = roles or ColumnRoles.communities_default()
    report = PreprocessReport(raw_observations=raw.n_rows)
    for name in (roles.target, *roles.group_share_columns, *roles.identifier_columns):
        if name not in raw.columns:
            raise ValueError(f"column {name!r} not present in the table")

    non_feature = {roles.target, *roles.identifier_columns}
    descriptive = [c for c in raw.columns if c not in non_feature]
    report.descriptive_feature_count = len(descriptive)

    target_cells = raw.column(roles.target)
    kept_rows = [i for i, v in enumerate(target_cells) if not raw.is_missing(v)]
    report.rows_dropped = raw.n_rows - len(kept_rows)
    if not kept_rows:
        raise ValueError("no rows remain after dropping unknown targets")
    n = len(kept_rows)

    feature_candidates = [c for c in descriptive if c not in roles.group_share_columns]
    report.group_columns_excluded = list(roles.group_share_columns)

    columns: dict[str, np.ndarray] = {}
    for name in feature_candidates:
        cells = [raw.column(name)[i] for i in kept_rows]
        missing = np.array([raw.is_missing(v) for v in cells])
        # strictly more than 80% missing: integer arithmetic keeps the
        # boundary exact
        if 5 * int(missing.sum()) > 4 * n:
            report.columns_dropped.append(name)
            continue
        values = np.array(
            [0.0 if m else float(v) for v, m in zip(cells, missing)]
        )
        if missing.any():
            present = values[~missing]
            if present.size == 0:
                report.columns_dropped.append(name)
                continue
            values[missing] = present.mean()
            report.imputed_cells += int(missing.sum())
        columns[name] = values

    standardized = []
    names = []
    for name, values in columns.items():
        mean = values.mean()
        std = values.std()
        if std == 0.0:
            report.zero_variance_columns_dropped.append(name)
            continue
        standardized.append((values - mean) / std)
        names.append(name)
    if not standardized:
        raise ValueError("no feature columns survive preprocessing")

    y = np.array([float(target_cells[i]) for i in kept_rows])
    if y.min() < 0:
        raise ValueError("targets must be non-negative rates")
    scale = float(y.max())
    if scale <= 0:
        raise ValueError("targets are identically zero; cannot scale to [0, 1]")
    report.target_scale = scale
    y = 1.0 - y / scale

    share = np.zeros(n)
    for name in roles.group_share_columns:
        cells = [raw.column(name)[i] for i in kept_rows]
        if any(raw.is_missing(v) for v in cells):
            raise ValueError(f"grouping column {name!r} has missing values")
        share += np.array([float(v) for v in cells])
    groups = (share > roles.group_threshold).astype(np.int64)

    X = np.column_stack(standardized + [groups.astype(np.float64)])
    names.append("z")
    report.feature_names = names
    counts = dict(zip(*np.unique(groups, return_counts=True)))
    report.group_sizes = {int(g): int(c) for g, c in counts.items()}

    dataset = Dataset(X=X, y=y, groups=groups, mode="regression")
    return dataset, report


def make_toy_instance(
    seed: int,
    n: int,
    k: int,
    group_split: tuple[int, int] | None = None,
    noise: float = 0.0,
    planted_weights=None,
) -> Dataset:
    """Deterministic small regression dataset for solver oracle tests."""
    if n < 2:
        raise ValueError("need at least two instances")
    if k not in (1, 2):
        raise ValueError("toy instances are 1-D or 2-D")
    if group_split is None:
        group_split = (n - n // 2, n // 2)
    if sum(group_split) != n:
        raise ValueError("group split must sum to n")
    if any(c <= 0 for c in group_split):
        raise ValueError("every group must be non-empty")
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, k))
    if planted_weights is None:
        planted_weights = rng.uniform(-1.0, 1.0, size=k)
    planted_weights = np.asarray(planted_weights, dtype=np.float64)
    y = X @ planted_weights
    if noise:
        y = y + noise * rng.normal(size=n)
    groups = np.array([0] * group_split[0] + [1] * group_split[1])
    return Dataset(X=X, y=y, groups=groups, mode="regression")


def write_snapshot(dataset: Dataset, path, feature_names=None, delimiter=",") -> None:
    """Serialize a dataset to delimited text with a header row."""
    names = list(feature_names or (f"f{j}" for j in range(dataset.k)))
    if len(names) != dataset.k:
        raise ValueError("feature_names length must match the feature count")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow([*names, "group", "target", "mode"])
        for i in range(dataset.n):
            writer.writerow(
                [*(repr(float(v)) for v in dataset.X[i]), dataset.groups[i],
                 repr(float(dataset.y[i])), dataset.mode]
            )


def read_snapshot(path, delimiter=",") -> Dataset:
    """Load a dataset serialized by :func:`write_snapshot`."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        rows = list(reader)
    if header[-3:] != ["group", "target", "mode"] and header[-2:] != ["group", "target"]:
        raise ValueError("snapshot header must end with group,target[,mode]")
    has_mode = header[-1] == "mode"
    k = len(header) - (3 if has_mode else 2)
    X = np.array([[float(v) for v in row[:k]] for row in rows])
    groups = np.array([_parse_group(row[k]) for row in rows])
    y = np.array([float(row[k + 1]) for row in rows])
    mode = rows[0][k + 2] if has_mode else "regression"
    return Dataset(X=X, y=y, groups=groups, mode=mode)


def _parse_group(cell: str):
    try:
        return int(cell)
    except ValueError:
        return cell
