"""Branch-and-bound integer programming on top of the LP module.

Best-bound node selection with depth-first plunging so incumbents show up
early; every improving incumbent is kept in a solution pool, and every
integer-feasible point seen during the search is retained separately (the
pricing step harvests those as candidate columns).
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, solve_lp

INT_TOL = 1e-6


@dataclass
class IntegerProgram:
    lp: LinearProgram
    integer_vars: list

    def __post_init__(self):
        for j in self.integer_vars:
            if not 0 <= j < self.lp.n_vars:
                raise ValueError(f"integer var {j} not declared in the LP")


@dataclass
class MIPResult:
    status: str  # optimal | feasible-timeout | infeasible
    x: np.ndarray = None
    objective: float = np.nan
    bound: float = -np.inf
    pool: list = field(default_factory=list)  # improving incumbents, discovery order
    feasible_solutions: list = field(default_factory=list)  # every integer point seen
    nodes: int = 0

    @property
    def gap(self):
        if self.x is None or not np.isfinite(self.bound):
            return np.inf
        return self.objective - self.bound


def _is_integral(x, int_vars):
    if not int_vars:
        return True
    v = x[int_vars]
    return bool(np.all(np.abs(v - np.round(v)) <= INT_TOL))


def _branch_var(x, int_vars):
    """Most fractional integer variable; ties broken by lowest index."""
    best, best_frac = None, -1.0
    for j in int_vars:
        f = x[j] - np.floor(x[j])
        score = 0.5 - abs(f - 0.5)
        if score > INT_TOL and score > best_frac + 1e-12:
            best, best_frac = j, score
    return best


def solve_mip(prob, time_limit=600.0, tol=1e-6, node_limit=None):
    """Minimize ``prob`` by LP-based branch and bound.

    Returns the incumbent, a valid lower bound, and the pool of improving
    incumbents. A root relaxation proven infeasible yields status
    ``infeasible`` rather than an exception.
    """
    if time_limit <= 0:
        raise ValueError("time_limit must be positive")
    lp = prob.lp
    int_vars = sorted(set(prob.integer_vars))
    start = time.monotonic()

    # Integral objective coefficients over an all-integer variable set allow
    # pruning any node whose bound cannot improve the incumbent by >= 1.
    objective_step = 0.0
    if len(int_vars) == lp.n_vars and all(float(c).is_integer() for c in lp.obj):
        objective_step = 1.0

    root = solve_lp(lp)
    if root.status == "infeasible":
        return MIPResult(status="infeasible", nodes=1)
    if root.status == "unbounded":
        raise ValueError("root relaxation unbounded; bound the integer program")

    result = MIPResult(status="optimal")
    result.nodes = 1
    incumbent_obj = np.inf
    incumbent = None
    seen_keys = set()

    def record(x, obj):
        nonlocal incumbent_obj, incumbent
        key = tuple(int(round(x[j])) for j in int_vars)
        if key not in seen_keys:
            seen_keys.add(key)
            result.feasible_solutions.append((x.copy(), obj))
        if obj < incumbent_obj - tol:
            incumbent_obj = obj
            incumbent = x.copy()
            result.pool.append((x.copy(), obj))

    counter = 0
    heap = []  # (bound, counter, bounds dict, warm basis)
    heapq.heappush(heap, (root.objective, counter, {}, None))
    node_cache = {0: root}
    best_open_bound = root.objective
    timed_out = False

    def cutoff():
        cut = incumbent_obj - tol
        if objective_step and np.isfinite(incumbent_obj):
            cut = incumbent_obj - objective_step + 1e-9
        return cut

    while heap:
        if time.monotonic() - start > time_limit:
            timed_out = True
            break
        if node_limit is not None and result.nodes >= node_limit:
            timed_out = True
            break
        bound, cnt, bounds, warm = heapq.heappop(heap)
        if bound > cutoff():
            continue
        sol = node_cache.pop(cnt, None)
        if sol is None:
            sol = solve_lp(lp, bound_override=bounds, basis=warm)
            result.nodes += 1
            if sol.status != "optimal" or sol.objective > cutoff():
                continue

        # Depth-first plunge from this node until it fathoms.
        while True:
            j = _branch_var(sol.x, int_vars)
            if j is None:
                record(sol.x, sol.objective)
                break
            xj = sol.x[j]
            lo = bounds.get(j, (lp.lb[j], None if np.isinf(lp.ub[j]) else lp.ub[j]))
            down = dict(bounds)
            down[j] = (lo[0], float(np.floor(xj)))
            up = dict(bounds)
            up[j] = (float(np.ceil(xj)), lo[1])
            # Plunge toward the nearest integer, queue the other child.
            first, second = (down, up) if xj - np.floor(xj) <= 0.5 else (up, down)

            counter += 1
            heapq.heappush(heap, (sol.objective, counter, second, sol.basis))

            child = solve_lp(lp, bound_override=first, basis=sol.basis)
            result.nodes += 1
            if time.monotonic() - start > time_limit:
                timed_out = True
                if child.status == "optimal":
                    # Keep the unexplored subtree on the heap so the reported
                    # lower bound stays valid.
                    counter += 1
                    heapq.heappush(heap, (child.objective, counter, first, None))
                break
            if child.status != "optimal" or child.objective > cutoff():
                break
            bounds, sol = first, child
        if timed_out:
            break

    if heap:
        best_open_bound = min(h[0] for h in heap)
    else:
        best_open_bound = incumbent_obj

    if incumbent is None:
        if timed_out:
            result.status = "feasible-timeout"
            result.bound = min(best_open_bound, incumbent_obj)
            return result
        result.status = "infeasible"
        result.bound = np.inf
        return result

    result.status = "feasible-timeout" if timed_out else "optimal"
    result.x = incumbent
    result.objective = incumbent_obj
    result.bound = incumbent_obj if not timed_out else min(best_open_bound, incumbent_obj)
    return result
