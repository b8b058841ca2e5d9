"""Column generation over the rule-selection master.

The restricted master carries a Hamming-loss objective (its pricing problem
is linear in the clause indicators); clauses found by pricing are appended to
the master in place so the previous simplex basis can be shifted and reused.
The loop ends with a certificate when exact pricing proves no clause has
negative reduced cost on the full data.

``train`` is the whole pipeline: tree-mined warm start, column generation,
final integer master, and 0-1 selection over every integer point the search
produced.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import CyclingError, InfeasibleError
from .lp import Basis, solve_lp
from .bnb import solve_mip
from .master import (
    HAMMING,
    ZERO_ONE,
    FairnessSpec,
    MasterConfig,
    RuleSet,
    build_master_hamming,
    build_master_zero_one,
    decode,
    decode_feasible,
    select_best_01,
    zero_one_error,
)
from .mine import MineGrid, mine_warm_start
from .pricing import (
    DualSolution,
    PricingConfig,
    solve_pricing_exact,
    solve_pricing_greedy,
)

log = logging.getLogger(__name__)

PRICED_OUT = "priced-out"
STALLED = "stalled"
TIME_LIMIT = "time-limit"
ITERATION_LIMIT = "iteration-limit"
CYCLING = "cycling"


@dataclass
class ColGenConfig:
    C: int = 15
    objective: str = HAMMING
    fairness: FairnessSpec = field(default_factory=FairnessSpec)
    D: int = None  # pricing literal cap; defaults to C - 1
    time_limit: float = 300.0  # the column-generation loop
    time_limit_pricing: float = 45.0
    time_limit_mip: float = 600.0  # the final integer master
    max_columns_per_iter: int = 100
    max_iterations: int = 200
    mine_grid: MineGrid = field(default_factory=MineGrid)
    use_mined_warm_start: bool = True
    greedy_restarts: int = 8
    seed: int = 0
    # Diagnostic switch: unit upper bounds on the clause variables reintroduce
    # the degenerate-dual loop that unbounded variables exist to prevent.
    force_unit_upper_bound: bool = False

    def __post_init__(self):
        if self.D is None:
            self.D = self.C - 1
        if not 1 <= self.D <= self.C - 1:
            raise ValueError(f"D must lie in [1, C-1]; got D={self.D}, C={self.C}")

    def master_config(self, objective=None):
        return MasterConfig(C=self.C, objective=objective or HAMMING, fairness=self.fairness)

    def pricing_config(self):
        return PricingConfig(
            D=self.D,
            time_limit=self.time_limit_pricing,
            max_columns=self.max_columns_per_iter,
        )


@dataclass
class ColGenIteration:
    iteration: int
    master_objective: float
    columns_added: int
    best_reduced_cost: float
    certified: bool
    elapsed: float


@dataclass
class ColGenTrace:
    iterations: list = field(default_factory=list)
    termination: str = None
    final_objective: float = np.nan
    certified: bool = False  # True iff termination is a proven priced-out state

    @property
    def n_iterations(self):
        return len(self.iterations)


def _dedup_pool(clauses, C):
    seen, out = set(), []
    for c in clauses:
        if c.complexity > C or c.literals in seen:
            continue
        seen.add(c.literals)
        out.append(c)
    return out


def _append_clause(model, clause):
    """Add one clause column to an existing Hamming master, in place."""
    comp = model.compressed
    cov = comp.coverage(clause)
    neg = comp.labels == -1
    v = model.lp.add_var(obj=float(comp.counts[neg & cov].sum()), name=f"w{len(model.w_vars)}")
    for u in np.nonzero((comp.labels == 1) & cov)[0]:
        u = int(u)
        model.lp.rows[model.row8[u]][0][v] = 1.0
        model.lp.rows[model.row9[u]][0][v] = 2.0
    model.lp.rows[model.complexity_row][0][v] = float(clause.complexity)
    for (kind, g, h), row in model.fairness_rows.items():
        if kind != "fpr":
            continue
        in_g = neg & (comp.groups == g)
        in_h = neg & (comp.groups == h)
        size_g = comp.counts[in_g].sum()
        size_h = comp.counts[in_h].sum()
        val = comp.counts[in_g & cov].sum() / size_g - comp.counts[in_h & cov].sum() / size_h
        if val:
            model.lp.rows[row][0][v] = val
    model.pool.append(clause)
    model.w_vars.append(v)
    if getattr(model, "_unit_ub", False):
        model.lp.ub[v] = 1.0
    return v


def _shift_basis(basis, n_old, n_new):
    """Re-index a basis after appending ``n_new`` structural variables."""
    if basis is None or n_new == 0:
        return basis
    status = np.concatenate(
        [basis.status[:n_old], np.zeros(n_new, dtype=basis.status.dtype), basis.status[n_old:]]
    )
    basic = [j + n_new if j >= n_old else j for j in basis.basic]
    return Basis(basic=basic, status=status)


def run_colgen(ds, cfg, initial_pool=()):
    """Generate columns for the Hamming master; returns (model, lp solution, trace).

    The master LP stays feasible throughout (misclassification variables give
    a trivial feasible point unless the fairness bounds themselves conflict,
    which raises InfeasibleError).
    """
    start = time.monotonic()
    pool = _dedup_pool(initial_pool, cfg.C)
    mcfg = cfg.master_config()
    model = build_master_hamming(pool, ds, mcfg, allow_empty_pool=True)
    if cfg.force_unit_upper_bound:
        model._unit_ub = True
        for v in model.w_vars:
            model.lp.ub[v] = 1.0

    pcfg = cfg.pricing_config()
    trace = ColGenTrace()
    known = {c.literals for c in model.pool}
    basis = None
    sol = None

    for it in range(cfg.max_iterations):
        sol = solve_lp(model.lp, basis=basis)
        if sol.status == "infeasible":
            raise InfeasibleError(
                "master LP infeasible: the fairness bounds admit no classifier on this data"
            )
        if sol.status != "optimal":
            raise InfeasibleError(f"master LP ended with status {sol.status!r}")
        basis = sol.basis
        trace.final_objective = sol.objective

        remaining = cfg.time_limit - (time.monotonic() - start)
        if remaining <= 0:
            trace.termination = TIME_LIMIT
            break

        duals = DualSolution.from_master(model, sol)
        fairness = cfg.fairness if cfg.fairness.metric != "none" else None

        cols = solve_pricing_greedy(
            ds, duals, fairness, pcfg, restarts=cfg.greedy_restarts, seed=cfg.seed + it
        )
        certified = False
        if not cols:
            exact_cfg = cfg.pricing_config()
            exact_cfg.time_limit = min(cfg.time_limit_pricing, max(remaining, 1.0))
            cols, certified = solve_pricing_exact(
                ds, duals, fairness, exact_cfg, seed=cfg.seed + it
            )

        fresh = [(c, rho) for c, rho in cols if c.literals not in known]
        best_rho = cols[0][1] if cols else 0.0
        trace.iterations.append(
            ColGenIteration(
                iteration=it,
                master_objective=sol.objective,
                columns_added=len(fresh),
                best_reduced_cost=best_rho,
                certified=certified,
                elapsed=time.monotonic() - start,
            )
        )

        if not fresh:
            if cols:
                # Pricing keeps proposing clauses the master already holds:
                # the degenerate loop that unbounded clause variables prevent.
                trace.termination = CYCLING
                raise CyclingError(
                    "pricing re-proposed existing columns with negative reduced cost; "
                    "check that clause variables carry no artificial upper bounds"
                )
            trace.termination = PRICED_OUT if certified else STALLED
            trace.certified = certified
            break

        n_old = model.lp.n_vars
        for c, _rho in fresh:
            _append_clause(model, c)
            known.add(c.literals)
        basis = _shift_basis(basis, n_old, len(fresh))
    else:
        trace.termination = ITERATION_LIMIT

    if trace.termination in (PRICED_OUT, STALLED, ITERATION_LIMIT, CYCLING) or sol is None:
        sol = solve_lp(model.lp, basis=basis)
        trace.final_objective = sol.objective
    return model, sol, trace


@dataclass
class TrainResult:
    rule_set: RuleSet
    candidates: list  # every integer-feasible rule set, discovery order
    model: object
    trace: ColGenTrace
    mip_status: str
    train_error_01: int


def train(ds, cfg=None, initial_pool=(), skip_colgen=False):
    """Full pipeline: mine, generate columns, solve the integer master, select.

    The final rule set minimizes training 0-1 error over every integer point
    the master search visited, plus the empty rule set (always-negative),
    which satisfies any pairwise-gap bound trivially.

    With ``skip_colgen`` the integer master is solved directly over
    ``initial_pool`` (the second phase of the pool-once, sweep-many protocol).
    """
    cfg = cfg or ColGenConfig()
    pool = _dedup_pool(initial_pool, cfg.C)
    if skip_colgen:
        model = build_master_hamming(pool, ds, cfg.master_config(), allow_empty_pool=True)
        trace = ColGenTrace(termination="skipped")
    else:
        warm = list(pool)
        if cfg.use_mined_warm_start:
            warm += mine_warm_start(ds, cfg.mine_grid, seed=cfg.seed)
            log.info("mined warm start; %d initial clauses", len(warm))
        model, _sol, trace = run_colgen(ds, cfg, initial_pool=warm)

    if cfg.objective == ZERO_ONE:
        final_model = build_master_zero_one(
            model.pool, ds, cfg.master_config(ZERO_ONE), allow_empty_pool=True
        )
    else:
        final_model = model

    mip = solve_mip(final_model.integer_program(), time_limit=cfg.time_limit_mip)
    if mip.status == "infeasible":
        raise InfeasibleError("integer master infeasible under the fairness bounds")

    candidates = decode_feasible(final_model, mip)
    candidates.append(RuleSet(clauses=[]))
    best = select_best_01(candidates, ds)
    incumbents = decode(final_model, mip) if mip.pool else []
    log.info(
        "MIP %s: %d incumbents, %d integer points, best 0-1 error %d",
        mip.status,
        len(incumbents),
        len(candidates),
        zero_one_error(best, ds),
    )
    return TrainResult(
        rule_set=best,
        candidates=candidates,
        model=final_model,
        trace=trace,
        mip_status=mip.status,
        train_error_01=zero_one_error(best, ds),
    )
