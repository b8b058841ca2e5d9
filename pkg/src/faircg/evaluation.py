"""Metrics, k-fold cross-validation, and fairness-accuracy frontiers.

Group error rates are computed by direct counting. A group with an empty
denominator gets rate None and is excluded from the gap maxima with a
warning. The fairness gap of a rule set is the maximum pairwise rate
difference; the equalized-odds gap is the larger of the FNR-gap and FPR-gap
maxima.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InfeasibleError
from .master import NO_FAIRNESS, coverage
from .colgen import train

log = logging.getLogger(__name__)


def predict(rs, ds):
    """+1 on rows satisfying any clause, else -1; order-independent and pure."""
    fired = np.zeros(ds.n, dtype=bool)
    for c in rs.clauses:
        fired |= coverage(c, ds)
    return np.where(fired, 1, -1)


@dataclass
class MetricsReport:
    accuracy: float
    fnr: dict  # group -> rate, None when the group has no positives
    fpr: dict  # group -> rate, None when the group has no negatives
    eq_opp_gap: float
    eq_odds_gap: float
    hamming_loss: float  # unnormalized count, as in the master objective
    complexity: int
    n: int

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "fnr": dict(self.fnr),
            "fpr": dict(self.fpr),
            "eq_opp_gap": self.eq_opp_gap,
            "eq_odds_gap": self.eq_odds_gap,
            "hamming_loss": self.hamming_loss,
            "complexity": self.complexity,
            "n": self.n,
        }


def _max_pairwise_gap(rates):
    defined = [r for r in rates.values() if r is not None]
    if len(defined) < 2:
        return 0.0
    return max(defined) - min(defined)


def evaluate(rs, ds):
    """Confusion counts per group plus the Hamming loss of the selected clauses."""
    pred = predict(rs, ds)
    truth = ds.y
    accuracy = float(np.mean(pred == truth))

    fnr, fpr = {}, {}
    for g in ds.groups():
        pos = (truth == 1) & (ds.g == g)
        neg = (truth == -1) & (ds.g == g)
        if pos.sum():
            fnr[g] = float(np.mean(pred[pos] == -1))
        else:
            fnr[g] = None
            log.warning("group %r has no positives; FNR undefined, excluded from gaps", g)
        if neg.sum():
            fpr[g] = float(np.mean(pred[neg] == 1))
        else:
            fpr[g] = None
            log.warning("group %r has no negatives; FPR undefined, excluded from gaps", g)

    eq_opp = _max_pairwise_gap(fnr)
    eq_odds = max(eq_opp, _max_pairwise_gap(fpr))

    # Hamming loss: uncovered positives count once; covered negatives count
    # once per covering clause (with multiplicity).
    pos_mask = truth == 1
    covered = np.zeros(ds.n, dtype=bool)
    neg_hits = np.zeros(ds.n)
    for c, m in zip(rs.clauses, rs.multiplicities):
        cov = coverage(c, ds)
        covered |= cov
        neg_hits += m * (cov & ~pos_mask)
    hamming = float(np.sum(pos_mask & ~covered) + neg_hits.sum())

    return MetricsReport(
        accuracy=accuracy,
        fnr=fnr,
        fpr=fpr,
        eq_opp_gap=eq_opp,
        eq_odds_gap=eq_odds,
        hamming_loss=hamming,
        complexity=rs.complexity,
        n=ds.n,
    )


@dataclass
class FoldOutcome:
    fold: int
    feasible: bool
    train_metrics: MetricsReport = None
    test_metrics: MetricsReport = None
    rule_set: object = None


@dataclass
class CellResult:
    """All folds of one (metric, epsilon, C) grid cell."""

    metric: str
    eps: float
    C: int
    folds: list = field(default_factory=list)
    infeasible: bool = False

    def _mean_std(self, picker):
        vals = [picker(f) for f in self.folds if f.feasible]
        if not vals:
            return np.nan, np.nan
        return float(np.mean(vals)), float(np.std(vals))

    @property
    def test_accuracy(self):
        return self._mean_std(lambda f: f.test_metrics.accuracy)

    @property
    def test_gap(self):
        return self._mean_std(lambda f: self._gap(f.test_metrics))

    @property
    def train_gap(self):
        return self._mean_std(lambda f: self._gap(f.train_metrics))

    @property
    def mean_complexity(self):
        return self._mean_std(lambda f: f.rule_set.complexity)[0]

    def _gap(self, report):
        if self.metric == "equalized-odds":
            return report.eq_odds_gap
        return report.eq_opp_gap


@dataclass
class FrontierPoint:
    eps: float
    metric: str
    accuracy_mean: float
    accuracy_std: float
    gap_mean: float
    gap_std: float
    train_gap_mean: float
    chosen_C: int
    mean_complexity: float
    dominated: bool = False

    def to_dict(self):
        return {
            "eps": self.eps,
            "metric": self.metric,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "gap_mean": self.gap_mean,
            "gap_std": self.gap_std,
            "train_gap_mean": self.train_gap_mean,
            "chosen_C": self.chosen_C,
            "mean_complexity": self.mean_complexity,
            "dominated": self.dominated,
        }


def _run_fold(args):
    """All grid cells on one fold; pooling columns once when phase1 is given."""
    ds, plan, fold, grid, phase1 = args
    train_ds = ds.subset(plan.train_rows(fold))
    test_ds = ds.subset(plan.test_rows(fold))

    pool = None
    if phase1:
        from .colgen import run_colgen

        merged = {}
        for cfg in phase1:
            try:
                model, _sol, _trace = run_colgen(
                    train_ds, cfg, initial_pool=list(merged.values())
                )
            except InfeasibleError:
                log.warning("fold %d phase-1 cell eps=%s C=%d infeasible; skipped",
                            fold, cfg.fairness.eps1, cfg.C)
                continue
            for c in model.pool:
                merged[c.literals] = c
        pool = list(merged.values())

    outcomes = []
    for cfg in grid:
        try:
            result = train(
                train_ds, cfg, initial_pool=pool or (), skip_colgen=pool is not None
            )
        except InfeasibleError:
            outcomes.append(FoldOutcome(fold=fold, feasible=False))
            continue
        rs = result.rule_set
        outcomes.append(
            FoldOutcome(
                fold=fold,
                feasible=True,
                train_metrics=evaluate(rs, train_ds),
                test_metrics=evaluate(rs, test_ds),
                rule_set=rs,
            )
        )
    return outcomes


def cross_validate(ds, folds, grid, seed=0, jobs=1, phase1=None):
    """Per-cell, per-fold train/test evaluation; returns a list of CellResult.

    ``grid`` is a list of ColGenConfig cells; each fold gets the cell config
    with the fold index mixed into the seed. When ``phase1`` (a smaller list
    of ColGenConfig) is given, column generation runs only for those cells and
    the union of their pools feeds every grid cell's integer master directly.
    An infeasible fold marks the cell infeasible but is not fatal.
    """
    if not grid:
        raise ConfigError("hyperparameter grid is empty")
    jobs = max(1, int(jobs))
    tasks = []
    for fold in range(folds.k):
        fold_grid = [replace(cfg, seed=seed + fold) for cfg in grid]
        fold_p1 = [replace(cfg, seed=seed + fold) for cfg in phase1] if phase1 else None
        tasks.append((ds, folds, fold, fold_grid, fold_p1))

    if jobs == 1:
        per_fold = [_run_fold(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_fold = list(pool.map(_run_fold, tasks))

    cells = []
    for ci, cfg in enumerate(grid):
        cell = CellResult(metric=cfg.fairness.metric, eps=cfg.fairness.eps1, C=cfg.C)
        for fold in range(folds.k):
            cell.folds.append(per_fold[fold][ci])
        cell.infeasible = any(not f.feasible for f in cell.folds)
        cells.append(cell)
    return cells


def build_frontier(cells):
    """One point per (metric, eps): the C with the best CV mean test accuracy.

    Cells with any infeasible fold are skipped. Points beaten on both accuracy
    and fairness gap by another point of the same metric are flagged dominated
    (but kept, so the raw frontier is still available).
    """
    by_key = {}
    for cell in cells:
        if cell.infeasible:
            log.warning(
                "cell metric=%s eps=%s C=%d had infeasible folds; excluded", cell.metric, cell.eps, cell.C
            )
            continue
        by_key.setdefault((cell.metric, cell.eps), []).append(cell)

    points = []
    for (metric, eps) in sorted(by_key, key=lambda k: (k[0], k[1])):
        group = by_key[(metric, eps)]
        best = max(group, key=lambda c: (c.test_accuracy[0], -c.C))
        acc_m, acc_s = best.test_accuracy
        gap_m, gap_s = best.test_gap
        points.append(
            FrontierPoint(
                eps=eps,
                metric=metric,
                accuracy_mean=acc_m,
                accuracy_std=acc_s,
                gap_mean=gap_m,
                gap_std=gap_s,
                train_gap_mean=best.train_gap[0],
                chosen_C=best.C,
                mean_complexity=best.mean_complexity,
            )
        )

    for a in points:
        for b in points:
            if b is a or b.metric != a.metric:
                continue
            if (
                b.accuracy_mean >= a.accuracy_mean
                and b.gap_mean <= a.gap_mean
                and (b.accuracy_mean > a.accuracy_mean or b.gap_mean < a.gap_mean)
            ):
                a.dominated = True
                break
    return points


def default_grid(metric, eps_values, c_values, base_cfg):
    """The two-phase grid: every (eps, C) pair as a ColGenConfig cell."""
    from .master import FairnessSpec

    cells = []
    for eps in eps_values:
        for C in c_values:
            fairness = FairnessSpec(metric=metric, eps1=eps) if metric != NO_FAIRNESS else FairnessSpec()
            cells.append(replace(base_cfg, C=C, fairness=fairness, D=min(base_cfg.D, C - 1)))
    return cells
