"""Pricing: find clauses of minimum reduced cost given restricted-master duals.

Three routes share one reduced-cost definition: an exact integer program
(via bnb), a greedy literal descent with restarts, and a brute-force
enumerator used as a test oracle. Large instances are row/feature subsampled
first; every candidate is re-verified on the full dataset before it is
returned.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .lp import GE, LE, LinearProgram
from .bnb import IntegerProgram, solve_mip
from .master import EQ_ODDS, Clause, _Compressed

log = logging.getLogger(__name__)


@dataclass
class DualSolution:
    """Sign-normalized duals of the restricted master LP, expanded to row level.

    All entries are nonnegative: mu/alpha per positive row, lambda for the
    complexity row, gamma for the fairness rows keyed like
    MasterModel.fairness_rows.
    """

    mu: np.ndarray  # per dataset row; zero on negatives
    alpha: np.ndarray  # per dataset row; zero on negatives
    lam: float
    gamma: dict = field(default_factory=dict)

    @classmethod
    def from_master(cls, model, sol):
        n = model.ds.n
        mu = np.zeros(n)
        alpha = np.zeros(n)
        comp = model.compressed
        for u, row in model.row8.items():
            rows_u = comp.unit_of_row == u
            mu[rows_u] = max(sol.duals[row], 0.0) / comp.counts[u]
        for u, row in model.row9.items():
            rows_u = comp.unit_of_row == u
            alpha[rows_u] = max(-sol.duals[row], 0.0) / comp.counts[u]
        lam = max(-sol.duals[model.complexity_row], 0.0)
        gamma = {key: max(-sol.duals[row], 0.0) for key, row in model.fairness_rows.items()}
        return cls(mu=mu, alpha=alpha, lam=lam, gamma=gamma)


@dataclass
class PricingConfig:
    D: int = 10  # per-clause literal cap; colgen defaults this to C - 1
    time_limit: float = 45.0
    max_columns: int = 100
    max_rows: int = 2000
    max_nonzeros: int = 100_000
    tol: float = 1e-7

    def __post_init__(self):
        if self.D < 1:
            raise ConfigError("per-clause literal cap D must be >= 1")
        if min(self.time_limit, self.max_columns, self.max_rows, self.max_nonzeros) <= 0:
            raise ConfigError("pricing limits must be positive")


def _negative_weights(ds, duals, fairness):
    """Per-negative-row objective weight: 1, plus group-normalized gamma terms."""
    w = np.zeros(ds.n)
    neg = ds.y == -1
    w[neg] = 1.0
    if fairness is not None and fairness.metric == EQ_ODDS:
        groups = ds.groups()
        sizes = {g: int(np.sum(neg & (ds.g == g))) for g in groups}
        for (kind, g, h), gam in duals.gamma.items():
            if kind != "fpr" or gam == 0.0:
                continue
            w[neg & (ds.g == g)] += gam / sizes[g]
            w[neg & (ds.g == h)] -= gam / sizes[h]
    return w


def _row_weights(ds, duals, fairness):
    """Objective coefficient of the coverage indicator for every row."""
    if fairness is not None and fairness.metric == EQ_ODDS and not any(
        k[0] == "fpr" for k in duals.gamma
    ):
        raise ConfigError("equalized-odds pricing needs gamma duals for the proxy rows")
    w = _negative_weights(ds, duals, fairness)
    pos = ds.y == 1
    w[pos] = 2.0 * duals.alpha[pos] - duals.mu[pos]
    return w


def reduced_cost(clause, ds, duals, fairness=None):
    """Reduced cost of the clause against the full dataset."""
    cov = np.ones(ds.n, dtype=bool)
    for j in clause.literals:
        cov &= ds.X[:, j] == 1
    w = _row_weights(ds, duals, fairness)
    return float(w[cov].sum() + duals.lam * clause.complexity)


def subsample(ds, cfg, seed, keep_features=()):
    """Stratified row sample plus feature sample honoring the nonzero budget.

    Returns (sub dataset, row index map, feature index map); maps lift
    sub-space indices back to the full dataset. A dataset within budget is
    returned unchanged with identity maps.
    """
    rng = np.random.default_rng(seed)
    rows = np.arange(ds.n)
    if ds.n > cfg.max_rows:
        chosen = []
        strata = {}
        for i in range(ds.n):
            strata.setdefault((int(ds.y[i]), str(ds.g[i])), []).append(i)
        frac = cfg.max_rows / ds.n
        for key in sorted(strata):
            members = np.array(strata[key])
            take = max(1, int(round(frac * len(members))))
            chosen.extend(rng.choice(members, size=min(take, len(members)), replace=False).tolist())
        rows = np.array(sorted(chosen))

    Xr = ds.X[rows]
    feats = np.arange(ds.p)
    nnz_per_feature = Xr.sum(axis=0).astype(int)
    if nnz_per_feature.sum() > cfg.max_nonzeros:
        keep = sorted(set(int(j) for j in keep_features))
        budget = cfg.max_nonzeros - sum(nnz_per_feature[j] for j in keep)
        others = [j for j in rng.permutation(ds.p) if j not in set(keep)]
        picked = list(keep)
        for j in others:
            if nnz_per_feature[j] <= budget:
                picked.append(int(j))
                budget -= nnz_per_feature[j]
        feats = np.array(sorted(picked), dtype=int)

    if len(rows) == ds.n and len(feats) == ds.p:
        return ds, rows, feats
    sub = ds.subset(rows)
    sub.X = np.ascontiguousarray(sub.X[:, feats])
    sub.feature_map = None
    return sub, rows, feats


def build_pricing(ds, duals, fairness, cfg, row_weights=None):
    """The pricing IP over (z, delta) for the given duals.

    Rows with a zero coverage coefficient are dropped; rows sharing a zero-set
    are merged with summed coefficients (their deltas coincide at optimality).
    """
    w = _row_weights(ds, duals, fairness) if row_weights is None else row_weights

    merged = {}
    for i in range(ds.n):
        if w[i] == 0.0:
            continue
        key = ds.X[i].tobytes()
        merged[key] = merged.get(key, 0.0) + w[i]

    lp = LinearProgram()
    D = float(cfg.D)
    z = [lp.add_var(obj=duals.lam, ub=1, name=f"z{j}") for j in range(ds.p)]
    lp.obj_offset = duals.lam  # the fixed cost of any clause

    delta = []
    for key, coef in merged.items():
        if abs(coef) < 1e-15:
            continue
        pattern = np.frombuffer(key, dtype=np.uint8)
        zero = np.nonzero(pattern == 0)[0]
        v = lp.add_var(obj=float(coef), ub=1, name=f"d{len(delta)}")
        delta.append(v)
        zcoeffs = {z[j]: 1.0 for j in zero}
        if coef < 0:
            lp.add_row({v: D, **zcoeffs}, LE, D)
        else:
            lp.add_row({v: 1.0, **zcoeffs}, GE, 1.0)

    lp.add_row({v: 1.0 for v in z}, LE, D)
    lp.add_row({v: 1.0 for v in z}, GE, 1.0)  # the master assumes c_k >= 2
    return IntegerProgram(lp, z + delta)


def _harvest(mip, ds_full, p_sub, feats, duals, fairness, cfg):
    """Lift solver solutions to full feature space and verify on full data."""
    out = {}
    for x, _obj in mip.feasible_solutions:
        lits = tuple(int(feats[j]) for j in range(p_sub) if round(x[j]) == 1)
        if not lits or len(lits) > cfg.D or lits in out:
            continue
        clause = Clause(lits)
        rho = reduced_cost(clause, ds_full, duals, fairness)
        if rho < -cfg.tol:
            out[lits] = (clause, rho)
    cols = sorted(out.values(), key=lambda cr: (cr[1], cr[0].literals))
    return cols[: cfg.max_columns]


def solve_pricing_exact(ds, duals, fairness, cfg, seed=0, keep_features=()):
    """Exact pricing via branch and bound.

    Returns (columns, certified): columns are (Clause, reduced cost) pairs
    sorted ascending, verified on the full dataset; ``certified`` is True only
    when the solve ran on the full data to proven optimality, i.e. an empty
    result is a genuine priced-out certificate.
    """
    start = time.monotonic()
    sub, rows, feats = subsample(ds, cfg, seed, keep_features)
    subsampled = sub is not ds
    prob = build_pricing(sub, duals if not subsampled else _restrict_duals(duals, rows), fairness, cfg)
    mip = solve_mip(prob, time_limit=cfg.time_limit)
    cols = _harvest(mip, ds, sub.p, feats, duals, fairness, cfg)
    certified = (not subsampled) and mip.status == "optimal"

    if not cols and subsampled:
        remaining = cfg.time_limit - (time.monotonic() - start)
        if remaining > 1.0:
            full_cfg = PricingConfig(
                D=cfg.D, time_limit=remaining, max_columns=cfg.max_columns,
                max_rows=ds.n, max_nonzeros=int(ds.X.sum()) + 1, tol=cfg.tol,
            )
            prob = build_pricing(ds, duals, fairness, full_cfg)
            mip = solve_mip(prob, time_limit=remaining)
            cols = _harvest(mip, ds, ds.p, np.arange(ds.p), duals, fairness, cfg)
            certified = mip.status == "optimal"
    return cols, certified


def _restrict_duals(duals, rows):
    return DualSolution(mu=duals.mu[rows], alpha=duals.alpha[rows], lam=duals.lam, gamma=dict(duals.gamma))


def solve_pricing_greedy(ds, duals, fairness, cfg, restarts=8, seed=0):
    """Greedy literal descent with random restarts; verified, never optimal-certifying."""
    rng = np.random.default_rng(seed)
    w = _row_weights(ds, duals, fairness)
    Xb = ds.X == 1
    found = {}

    def rho_of(cov, n_lits):
        return float(w[cov].sum() + duals.lam * (1 + n_lits))

    for attempt in range(restarts):
        if attempt == 0:
            lits = []
            cov = np.ones(ds.n, dtype=bool)
        else:
            j0 = int(rng.integers(ds.p))
            lits = [j0]
            cov = Xb[:, j0].copy()
        # The empty clause is not a valid column; force one literal first.
        while True:
            best_j, best_rho = None, rho_of(cov, len(lits)) if lits else np.inf
            for j in range(ds.p):
                if j in lits:
                    continue
                cand = cov & Xb[:, j]
                r = rho_of(cand, len(lits) + 1)
                if r < best_rho - 1e-12:
                    best_j, best_rho = j, r
            if best_j is None:
                break
            lits.append(best_j)
            cov &= Xb[:, best_j]
            if len(lits) >= cfg.D:
                break
        # Drop literals that no longer pay for themselves.
        improved = True
        while improved and len(lits) > 1:
            improved = False
            current = rho_of(cov, len(lits))
            for j in list(lits):
                rest = [l for l in lits if l != j]
                cand = np.ones(ds.n, dtype=bool)
                for l in rest:
                    cand &= Xb[:, l]
                if rho_of(cand, len(rest)) < current - 1e-12:
                    lits, cov = rest, cand
                    improved = True
                    break
        if lits:
            clause = Clause(lits)
            rho = reduced_cost(clause, ds, duals, fairness)
            if rho < -cfg.tol:
                found[clause.literals] = (clause, rho)

    cols = sorted(found.values(), key=lambda cr: (cr[1], cr[0].literals))
    return cols[: cfg.max_columns]


def enumerate_clauses(p, max_literals):
    """All clauses with at most ``max_literals`` literals over p features."""
    for d in range(1, max_literals + 1):
        for combo in itertools.combinations(range(p), d):
            yield Clause(combo)


def solve_pricing_brute(ds, duals, fairness, cfg):
    """Exhaustive enumeration oracle; only sensible for small p and D."""
    best = []
    for clause in enumerate_clauses(ds.p, cfg.D):
        rho = reduced_cost(clause, ds, duals, fairness)
        if rho < -cfg.tol:
            best.append((clause, rho))
    best.sort(key=lambda cr: (cr[1], cr[0].literals))
    return best[: cfg.max_columns]
