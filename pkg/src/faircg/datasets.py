"""Dataset access: the recidivism CSV loader and a synthetic surrogate.

``load_recidivism_csv`` reads the cleaned two-year-recidivism file (one
binary-indicator column per race, a priors count, score/age/sex/charge
indicators) and keeps the two largest race groups, giving the standard
benchmark shape: 5,278 rows and 7 features after the filter.

``synthetic_recidivism`` is a deterministic generator with the same shape
and binding group-rate differences; it exists so the structural tests and
examples run without any external data file.
"""

from __future__ import annotations

import os

import numpy as np

from .data import CATEGORICAL, NUMERIC, RawTable, binarize, ingest_csv, preprocess_compas
from .errors import DataError

ENV_CSV = "FAIRCG_COMPAS_CSV"

# Column names of the cleaned recidivism CSV (fairml-style export).
_LABEL = "Two_yr_Recidivism"
_PRIORS = "Number_of_Priors"
_BINARY_FEATURES = ("score_factor", "Age_Above_FourtyFive", "Age_Below_TwentyFive", "Female", "Misdemeanor")
_RACE_MAIN = "African_American"
_RACE_OTHERS = ("Asian", "Hispanic", "Native_American", "Other")


def find_recidivism_csv(explicit=None):
    """Path of the real dataset: explicit arg, $FAIRCG_COMPAS_CSV, or data/compas.csv."""
    candidates = [explicit, os.environ.get(ENV_CSV)]
    candidates.append(os.path.join(os.path.dirname(__file__), "..", "..", "data", "compas.csv"))
    for c in candidates:
        if c and os.path.exists(c):
            return os.path.abspath(c)
    return None


def load_recidivism_csv(path):
    """RawTable from the cleaned CSV, restricted to the two largest race groups.

    Rows flagged with any of the minor race indicators are dropped; the group
    column is the remaining African_American indicator, which also stays in
    the feature set so learned rules may reference it.
    """
    schema = {_PRIORS: NUMERIC}
    for name in _BINARY_FEATURES + (_RACE_MAIN,) + _RACE_OTHERS:
        schema[name] = CATEGORICAL
    table = ingest_csv(
        path, schema, group_column=_RACE_MAIN, label_column=_LABEL, positive_label="1"
    )

    minor = np.zeros(table.n_rows, dtype=bool)
    for name in _RACE_OTHERS:
        _, _, vals = table.column(name)
        minor |= np.asarray([str(v) for v in vals]) == "1"
    keep = ~minor
    if not keep.any():
        raise DataError(f"{path}: no rows left after the race filter")

    columns = []
    for name, kind, vals in table.columns:
        if name in _RACE_OTHERS:
            continue
        vals = np.asarray(vals)[keep] if kind == NUMERIC else [v for v, k in zip(vals, keep) if k]
        columns.append((name, kind, vals))
    return RawTable(
        columns=columns,
        labels=table.labels[keep],
        groups=np.asarray(table.groups)[keep],
    )


def synthetic_recidivism(n=5278, seed=7):
    """A surrogate with the benchmark dataset's shape and binding group gaps.

    Not the real data: accuracy numbers on it are not comparable to results
    on the real file. Group base rates and the score/priors signal are chosen
    so fairness constraints actually bind at small epsilon.
    """
    rng = np.random.default_rng(seed)
    race = rng.choice(
        ["African-American", "Caucasian", "Hispanic", "Other", "Asian", "Native-American"],
        size=n,
        p=[0.47, 0.36, 0.11, 0.04, 0.015, 0.005],
    )
    age = np.clip(rng.gamma(5.0, 7.0, n) + 18, 18, 80).round()
    priors = rng.negative_binomial(1, 0.25, n).clip(0, 38).astype(float)
    sex = rng.choice(["Male", "Female"], n, p=[0.8, 0.2])
    misdemeanor = rng.choice(["True", "False"], n, p=[0.35, 0.65])

    base = -1.1 + 0.16 * priors - 0.018 * (age - 18)
    base += np.where(sex == "Male", 0.15, -0.15)
    base += np.where(race == "African-American", 0.45, 0.0)
    score = np.where(rng.random(n) < 1 / (1 + np.exp(-base - 0.4)), "HighScore", "LowScore")
    prob = 1 / (1 + np.exp(-(base + np.where(score == "HighScore", 0.8, -0.4))))
    labels = np.where(rng.random(n) < prob, 1, -1)

    return RawTable(
        columns=[
            ("priors", NUMERIC, priors),
            ("age", NUMERIC, age.astype(float)),
            ("sex", CATEGORICAL, sex.tolist()),
            ("misdemeanor", CATEGORICAL, misdemeanor.tolist()),
            ("score_factor", CATEGORICAL, score.tolist()),
            ("race", CATEGORICAL, race.tolist()),
        ],
        labels=labels,
        groups=race.copy(),
    )


def surrogate_binary(n=5278, seed=7, quantiles=None):
    """Filtered + binarized surrogate: (feature map, BinaryDataset)."""
    table = preprocess_compas(synthetic_recidivism(n=n, seed=seed))
    if quantiles is None:
        return binarize(table)
    return binarize(table, quantiles)


def recidivism_binary(path=None, quantiles=None):
    """Filtered + binarized real dataset, or None when the CSV is absent."""
    found = find_recidivism_csv(path)
    if found is None:
        return None
    table = load_recidivism_csv(found)
    fm, ds = binarize(table) if quantiles is None else binarize(table, quantiles)
    return fm, ds
