"""Master LP/IP construction for rule selection.

Two objectives are supported: Hamming loss (compact; one misclassification
variable per positive row) and 0-1 loss (aggregated negative-row constraints
with coefficient C/2). Fairness enters as hard rows bounding pairwise group
gaps: false-negative-rate gaps directly, and false-positive gaps through a
group-normalized Hamming proxy.

Rows that share (pattern, label, group) are merged with multiplicities before
model construction; this is exact for both the LP relaxation and the IP since
merged rows are covered identically by every clause.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .lp import EQ, GE, LE, LinearProgram
from .bnb import IntegerProgram

log = logging.getLogger(__name__)

HAMMING = "hamming"
ZERO_ONE = "zero-one"

EQ_OPP = "equal-opportunity"
EQ_ODDS = "equalized-odds"
NO_FAIRNESS = "none"


@dataclass(frozen=True)
class Clause:
    """A conjunction of binary features; complexity is 1 + literal count."""

    literals: tuple

    def __init__(self, literals):
        lits = tuple(sorted(set(int(j) for j in literals)))
        if not lits:
            raise ConfigError("clauses must have at least one literal")
        object.__setattr__(self, "literals", lits)

    @property
    def complexity(self):
        return 1 + len(self.literals)

    def describe(self, feature_map=None):
        if feature_map is None:
            body = " and ".join(f"f{j}" for j in self.literals)
        else:
            body = " and ".join(f"({feature_map.describe(j)})" for j in self.literals)
        return body


@dataclass
class RuleSet:
    """Disjunction of clauses; predicts +1 iff any clause is fully satisfied."""

    clauses: list
    multiplicities: list = None

    def __post_init__(self):
        if self.multiplicities is None:
            self.multiplicities = [1] * len(self.clauses)
        if len(self.multiplicities) != len(self.clauses):
            raise ConfigError("one multiplicity per clause required")

    @property
    def complexity(self):
        return sum(c.complexity * m for c, m in zip(self.clauses, self.multiplicities))

    def describe(self, feature_map=None):
        if not self.clauses:
            return "(always predict negative)"
        parts = [c.describe(feature_map) for c in self.clauses]
        return "\n OR ".join(f"[{p}]" for p in parts)

    def to_json(self, feature_map_ref=None):
        return json.dumps(
            {
                "clauses": [
                    {"literals": list(c.literals), "multiplicity": m}
                    for c, m in zip(self.clauses, self.multiplicities)
                ],
                "feature_map_ref": feature_map_ref,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        clauses = [Clause(d["literals"]) for d in doc["clauses"]]
        mult = [int(d.get("multiplicity", 1)) for d in doc["clauses"]]
        return cls(clauses=clauses, multiplicities=mult)


@dataclass
class FairnessSpec:
    metric: str = NO_FAIRNESS
    eps1: float = 1.0
    eps2: float = None  # defaults to eps1 for equalized odds

    def __post_init__(self):
        if self.metric not in (NO_FAIRNESS, EQ_OPP, EQ_ODDS):
            raise ConfigError(f"unknown fairness metric {self.metric!r}")
        if self.eps1 < 0:
            raise ConfigError("eps1 must be nonnegative")
        if self.eps2 is None:
            self.eps2 = self.eps1
        if self.eps2 < 0:
            raise ConfigError("eps2 must be nonnegative")


@dataclass
class MasterConfig:
    C: int = 15
    objective: str = HAMMING
    fairness: FairnessSpec = field(default_factory=FairnessSpec)

    def __post_init__(self):
        if self.C < 2:
            raise ConfigError("complexity bound C must be >= 2")
        if self.objective not in (HAMMING, ZERO_ONE):
            raise ConfigError(f"unknown objective {self.objective!r}")


def coverage(clause, ds):
    """Boolean row mask: covered iff every literal is 1 (zero-set disjoint)."""
    for j in clause.literals:
        if not 0 <= j < ds.p:
            raise ConfigError(f"literal {j} out of range for p={ds.p}")
    cov = np.ones(ds.n, dtype=bool)
    for j in clause.literals:
        cov &= ds.X[:, j] == 1
    return cov


@dataclass
class _Compressed:
    """Unique (pattern, label, group) units with row multiplicities."""

    ds: object
    rep_rows: np.ndarray  # representative full-dataset row per unit
    counts: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    unit_of_row: np.ndarray  # full row -> unit index

    @classmethod
    def build(cls, ds):
        seen = {}
        rep, counts, labels, groups = [], [], [], []
        unit_of_row = np.empty(ds.n, dtype=int)
        for i in range(ds.n):
            key = (ds.X[i].tobytes(), int(ds.y[i]), str(ds.g[i]))
            u = seen.get(key)
            if u is None:
                u = len(rep)
                seen[key] = u
                rep.append(i)
                counts.append(0)
                labels.append(int(ds.y[i]))
                groups.append(str(ds.g[i]))
            counts[u] += 1
            unit_of_row[i] = u
        return cls(
            ds=ds,
            rep_rows=np.array(rep),
            counts=np.array(counts, dtype=float),
            labels=np.array(labels),
            groups=np.array(groups, dtype=object),
            unit_of_row=unit_of_row,
        )

    def coverage(self, clause):
        return coverage(clause, self.ds)[self.rep_rows]


@dataclass
class MasterModel:
    lp: LinearProgram
    pool: list  # Clause per w variable
    w_vars: list
    zeta_pos_vars: dict  # positive unit -> var id
    zeta_neg_vars: dict  # negative unit -> var id (0-1 objective only)
    row8: dict  # positive unit -> row id  (misclassification lower link)
    row9: dict  # positive unit -> row id  (coverage upper link)
    complexity_row: int
    fairness_rows: dict  # label -> row id
    compressed: _Compressed
    config: object
    ds: object

    def integer_program(self):
        """The master IP: integral w (with complexity-implied upper bounds) and zeta."""
        ip_lp = _clone_lp(self.lp)
        C = self.config.C
        for k, v in zip(self.pool, self.w_vars):
            ip_lp.ub[v] = float(C // k.complexity)
        for v in self.zeta_pos_vars.values():
            ip_lp.ub[v] = 1.0
        for v in self.zeta_neg_vars.values():
            ip_lp.ub[v] = 1.0
        int_vars = list(self.w_vars) + list(self.zeta_pos_vars.values()) + list(self.zeta_neg_vars.values())
        return IntegerProgram(ip_lp, int_vars)


def _clone_lp(lp):
    out = LinearProgram()
    out.obj = list(lp.obj)
    out.lb = list(lp.lb)
    out.ub = list(lp.ub)
    out.var_names = list(lp.var_names)
    out.rows = [(dict(c), rel, rhs) for c, rel, rhs in lp.rows]
    out.obj_offset = lp.obj_offset
    return out


def _group_pairs(groups):
    return [(g, h) for g in groups for h in groups if g != h]


def _fairness_pos_rows(lp, comp, zeta_pos, eps1):
    """Pairwise FNR-gap rows (one per ordered group pair)."""
    rows = {}
    groups = sorted(set(comp.groups[comp.labels == 1].tolist()))
    sizes = {g: comp.counts[(comp.labels == 1) & (comp.groups == g)].sum() for g in groups}
    usable = [g for g in groups if sizes[g] > 0]
    for g in groups:
        if sizes[g] == 0:
            log.warning("group %r has no positive rows; FNR fairness rows omitted for it", g)
    for g, h in _group_pairs(usable):
        coeffs = {}
        for u, v in zeta_pos.items():
            if comp.groups[u] == g:
                coeffs[v] = coeffs.get(v, 0.0) + comp.counts[u] / sizes[g]
            elif comp.groups[u] == h:
                coeffs[v] = coeffs.get(v, 0.0) - comp.counts[u] / sizes[h]
        rows[("fnr", g, h)] = lp.add_row(coeffs, LE, eps1)
    return rows


def _fairness_neg_rows(lp, comp, pool, w_vars, cov_units, eps2):
    """Pairwise Hamming-proxy rows for the negative class."""
    rows = {}
    groups = sorted(set(comp.groups[comp.labels == -1].tolist()))
    sizes = {g: comp.counts[(comp.labels == -1) & (comp.groups == g)].sum() for g in groups}
    usable = [g for g in groups if sizes[g] > 0]
    for g in groups:
        if sizes[g] == 0:
            log.warning("group %r has no negative rows; FPR-proxy fairness rows omitted for it", g)
    neg = comp.labels == -1
    for g, h in _group_pairs(usable):
        in_g = neg & (comp.groups == g)
        in_h = neg & (comp.groups == h)
        coeffs = {}
        for k, v in enumerate(w_vars):
            cov = cov_units[k]
            val = comp.counts[in_g & cov].sum() / sizes[g] - comp.counts[in_h & cov].sum() / sizes[h]
            if val:
                coeffs[v] = val
        rows[("fpr", g, h)] = lp.add_row(coeffs, LE, eps2)
    return rows


def build_master_hamming(pool, ds, cfg, allow_empty_pool=False):
    """Hamming-loss master over the clause pool (the column-generation master).

    w variables have no upper bound in the LP relaxation; the coverage link
    row uses the coefficient 2 (the c_k >= 2 lower bound), which keeps the
    pricing problem linear.
    """
    _check_pool(pool, cfg, allow_empty_pool)
    comp = _Compressed.build(ds)
    lp = LinearProgram()
    C = float(cfg.C)

    cov_units = [comp.coverage(k) for k in pool]
    neg = comp.labels == -1

    w_vars = []
    for k, cov in zip(pool, cov_units):
        obj = float(comp.counts[neg & cov].sum())
        w_vars.append(lp.add_var(obj=obj, name=f"w{len(w_vars)}"))

    zeta_pos, row8, row9 = {}, {}, {}
    for u in np.nonzero(comp.labels == 1)[0]:
        v = lp.add_var(obj=float(comp.counts[u]), name=f"zp{u}")
        zeta_pos[int(u)] = v
    for u, v in zeta_pos.items():
        covering = {w_vars[k]: 1.0 for k in range(len(pool)) if cov_units[k][u]}
        row8[u] = lp.add_row({v: 1.0, **covering}, GE, 1.0)
        row9[u] = lp.add_row({v: C, **{w: 2.0 for w in covering}}, LE, C)

    complexity_row = lp.add_row({v: float(k.complexity) for k, v in zip(pool, w_vars)}, LE, C)

    fairness_rows = {}
    fs = cfg.fairness
    if fs.metric in (EQ_OPP, EQ_ODDS):
        fairness_rows.update(_fairness_pos_rows(lp, comp, zeta_pos, fs.eps1))
    if fs.metric == EQ_ODDS:
        fairness_rows.update(_fairness_neg_rows(lp, comp, pool, w_vars, cov_units, fs.eps2))

    return MasterModel(
        lp=lp,
        pool=list(pool),
        w_vars=w_vars,
        zeta_pos_vars=zeta_pos,
        zeta_neg_vars={},
        row8=row8,
        row9=row9,
        complexity_row=complexity_row,
        fairness_rows=fairness_rows,
        compressed=comp,
        config=cfg,
        ds=ds,
    )


def build_master_zero_one(pool, ds, cfg, allow_empty_pool=False):
    """0-1-loss master: per-negative zeta with the aggregated C/2 link row."""
    _check_pool(pool, cfg, allow_empty_pool)
    comp = _Compressed.build(ds)
    lp = LinearProgram()
    C = float(cfg.C)

    cov_units = [comp.coverage(k) for k in pool]

    w_vars = [lp.add_var(obj=0.0, name=f"w{k}") for k in range(len(pool))]

    zeta_pos, row8, row9 = {}, {}, {}
    for u in np.nonzero(comp.labels == 1)[0]:
        zeta_pos[int(u)] = lp.add_var(obj=float(comp.counts[u]), name=f"zp{u}")
    for u, v in zeta_pos.items():
        covering = {w_vars[k]: 1.0 for k in range(len(pool)) if cov_units[k][u]}
        row8[u] = lp.add_row({v: 1.0, **covering}, GE, 1.0)
        row9[u] = lp.add_row({v: C, **{w: 2.0 for w in covering}}, LE, C)

    zeta_neg = {}
    for u in np.nonzero(comp.labels == -1)[0]:
        covering = {w_vars[k]: 1.0 for k in range(len(pool)) if cov_units[k][u]}
        if not covering:
            continue  # never covered; contributes no error
        v = lp.add_var(obj=float(comp.counts[u]), name=f"zn{u}")
        zeta_neg[int(u)] = v
        lp.add_row({**covering, v: -C / 2.0}, LE, 0.0)

    complexity_row = lp.add_row({v: float(k.complexity) for k, v in zip(pool, w_vars)}, LE, C)

    fairness_rows = {}
    fs = cfg.fairness
    if fs.metric in (EQ_OPP, EQ_ODDS):
        fairness_rows.update(_fairness_pos_rows(lp, comp, zeta_pos, fs.eps1))
    if fs.metric == EQ_ODDS:
        fairness_rows.update(_fairness_neg_rows(lp, comp, pool, w_vars, cov_units, fs.eps2))

    return MasterModel(
        lp=lp,
        pool=list(pool),
        w_vars=w_vars,
        zeta_pos_vars=zeta_pos,
        zeta_neg_vars=zeta_neg,
        row8=row8,
        row9=row9,
        complexity_row=complexity_row,
        fairness_rows=fairness_rows,
        compressed=comp,
        config=cfg,
        ds=ds,
    )


def _check_pool(pool, cfg, allow_empty_pool):
    if not pool and not allow_empty_pool:
        raise ConfigError("clause pool is empty")
    for k in pool:
        if k.complexity > cfg.C:
            raise ConfigError(f"clause {k.literals} exceeds complexity bound C={cfg.C}")


def decode(model, mip):
    """One RuleSet per pool incumbent, in discovery order, keeping multiplicities."""
    if not mip.pool:
        raise ConfigError("MIP result has an empty solution pool")
    out = []
    for x, _obj in mip.pool:
        clauses, mults = [], []
        for k, v in zip(model.pool, model.w_vars):
            m = int(round(x[v]))
            if m >= 1:
                clauses.append(k)
                mults.append(m)
                if m > 1:
                    log.info("incumbent selects clause %s with multiplicity %d", k.literals, m)
        out.append(RuleSet(clauses=clauses, multiplicities=mults))
    return out


def decode_feasible(model, mip):
    """RuleSets for every integer-feasible point seen during the search."""
    out = []
    for x, _obj in mip.feasible_solutions:
        clauses, mults = [], []
        for k, v in zip(model.pool, model.w_vars):
            m = int(round(x[v]))
            if m >= 1:
                clauses.append(k)
                mults.append(m)
        out.append(RuleSet(clauses=clauses, multiplicities=mults))
    return out


def zero_one_error(rs, ds):
    """Training 0-1 error of a rule set, by direct evaluation."""
    pred = np.zeros(ds.n, dtype=bool)
    for c in rs.clauses:
        pred |= coverage(c, ds)
    return int(np.sum(pred != (ds.y == 1)))


def select_best_01(rulesets, ds):
    """Lowest training 0-1 error; ties by total complexity, then discovery order."""
    if not rulesets:
        raise ConfigError("no rule sets to select from")
    scored = [(zero_one_error(rs, ds), rs.complexity, idx) for idx, rs in enumerate(rulesets)]
    _, _, best = min(scored)
    return rulesets[best]
