"""Exact LP solving with dual recovery.

A dense, bounded-variable, two-phase revised simplex. Chosen over an
interior-point method because column generation needs exact basic duals and
cheap warm restarts when columns are appended to the restricted master.

Sign conventions for a minimization problem: duals of ``>=`` rows are
nonnegative, duals of ``<=`` rows are nonpositive, equality rows unrestricted.
The reduced cost of column j is ``c_j - y . A_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError

LE = "<="
GE = ">="
EQ = "="

_AT_LB = 0
_AT_UB = 1
_BASIC = 2
_FREE = 3

_REFACTOR_EVERY = 100
_BLAND_TRIGGER = 60


class LinearProgram:
    """A minimization LP built incrementally: bounded variables plus sparse rows."""

    def __init__(self):
        self.obj = []
        self.lb = []
        self.ub = []
        self.var_names = []
        self.rows = []  # list of (coeff dict, relation, rhs)
        self.obj_offset = 0.0

    @property
    def n_vars(self):
        return len(self.obj)

    @property
    def n_rows(self):
        return len(self.rows)

    def add_var(self, obj=0.0, lb=0.0, ub=None, name=None):
        if ub is not None and ub < lb:
            raise SolverError(f"variable bounds crossed: [{lb}, {ub}]")
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(np.inf if ub is None else float(ub))
        self.var_names.append(name or f"x{len(self.obj) - 1}")
        return len(self.obj) - 1

    def add_row(self, coeffs, rel, rhs):
        if rel not in (LE, GE, EQ):
            raise SolverError(f"unknown relation {rel!r}")
        for j in coeffs:
            if not 0 <= j < self.n_vars:
                raise SolverError(f"row references undeclared variable {j}")
        self.rows.append((dict(coeffs), rel, float(rhs)))
        return len(self.rows) - 1

    def to_lp_text(self):
        """Plain-text dump (LP-file style) for external cross-checking."""
        lines = ["Minimize", " obj: " + _lincomb({j: c for j, c in enumerate(self.obj) if c}, self.var_names)]
        lines.append("Subject To")
        for i, (coeffs, rel, rhs) in enumerate(self.rows):
            lines.append(f" r{i}: " + _lincomb(coeffs, self.var_names) + f" {rel} {rhs:g}")
        lines.append("Bounds")
        for j in range(self.n_vars):
            hi = "inf" if np.isinf(self.ub[j]) else f"{self.ub[j]:g}"
            lines.append(f" {self.lb[j]:g} <= {self.var_names[j]} <= {hi}")
        lines.append("End")
        return "\n".join(lines)


def _lincomb(coeffs, names):
    parts = []
    for j in sorted(coeffs):
        c = coeffs[j]
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c):g} {names[j]}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


@dataclass
class Basis:
    """Warm-start state: basic column ids (structurals then slacks) and statuses."""

    basic: list
    status: np.ndarray


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray = None
    duals: np.ndarray = None
    objective: float = np.nan
    basis: Basis = None
    reduced_costs: np.ndarray = None
    iterations: int = 0


def solve_lp(prob, tol=1e-7, basis=None, bound_override=None, max_iter=200000):
    """Solve ``prob`` to optimality, returning primal, duals and the final basis.

    ``bound_override`` maps variable id -> (lb, ub) and is used by the
    branch-and-bound search without mutating the shared program.
    """
    return _Simplex(prob, tol, bound_override, max_iter).solve(basis)


class _Simplex:
    def __init__(self, prob, tol, bound_override, max_iter):
        self.tol = tol
        self.feas_tol = 1e-9
        self.max_iter = max_iter
        n, m = prob.n_vars, prob.n_rows
        self.n, self.m = n, m
        self.prob = prob

        N = n + m
        A = np.zeros((m, N))
        b = np.empty(m)
        for i, (coeffs, rel, rhs) in enumerate(prob.rows):
            for j, c in coeffs.items():
                A[i, j] = c
            A[i, n + i] = 1.0
            b[i] = rhs
        self.A = A
        self.b = b

        lb = np.empty(N)
        ub = np.empty(N)
        lb[:n] = prob.lb
        ub[:n] = prob.ub
        if bound_override:
            for j, (lo, hi) in bound_override.items():
                lb[j] = lo
                ub[j] = np.inf if hi is None else hi
        for i, (_, rel, _) in enumerate(prob.rows):
            if rel == LE:
                lb[n + i], ub[n + i] = 0.0, np.inf
            elif rel == GE:
                lb[n + i], ub[n + i] = -np.inf, 0.0
            else:
                lb[n + i], ub[n + i] = 0.0, 0.0
        self.lb, self.ub = lb, ub

        c = np.zeros(N)
        c[:n] = prob.obj
        self.c = c

    # -- basis bookkeeping ----------------------------------------------

    def _init_cold(self):
        """Start from the all-artificial basis; returns True if phase 1 is needed."""
        N = self.n + self.m
        self.status = np.empty(N, dtype=np.int8)
        x = np.empty(N)
        for j in range(N):
            if np.isfinite(self.lb[j]):
                self.status[j], x[j] = _AT_LB, self.lb[j]
            elif np.isfinite(self.ub[j]):
                self.status[j], x[j] = _AT_UB, self.ub[j]
            else:
                self.status[j], x[j] = _FREE, 0.0
        self.x = x

        # Try the plain slack basis first: it is feasible whenever every
        # residual fits inside its slack bounds.
        resid = self.b - self.A[:, : self.n] @ x[: self.n]
        slack = np.arange(self.n, N)
        if np.all(resid >= self.lb[slack] - self.feas_tol) and np.all(resid <= self.ub[slack] + self.feas_tol):
            self.basic = list(slack)
            self.status[slack] = _BASIC
            self.Binv = np.eye(self.m)
            self.x[slack] = resid
            return False
        return True

    def _setup_artificials(self):
        N = self.n + self.m
        resid = self.b - self.A @ self.x
        sigma = np.where(resid >= 0, 1.0, -1.0)
        self.A = np.hstack([self.A, np.diag(sigma)])
        self.lb = np.concatenate([self.lb, np.zeros(self.m)])
        self.ub = np.concatenate([self.ub, np.full(self.m, np.inf)])
        self.c = np.concatenate([self.c, np.zeros(self.m)])
        self.x = np.concatenate([self.x, np.abs(resid)])
        self.status = np.concatenate([self.status, np.full(self.m, _BASIC, dtype=np.int8)])
        self.basic = list(range(N, N + self.m))
        self.Binv = np.diag(sigma)  # inverse of diag(sigma)
        self.art_start = N

    def _install_basis(self, basis):
        """Adopt a warm-start basis; returns False if it is unusable."""
        N = self.n + self.m
        if len(basis.basic) != self.m or max(basis.basic, default=-1) >= N:
            return False
        self.status = np.empty(N, dtype=np.int8)
        self.status[: len(basis.status)] = basis.status[:N]
        # Columns appended since the basis was recorded start at their lower bound.
        self.status[len(basis.status):] = _AT_LB
        x = np.zeros(N)
        at_lb = self.status == _AT_LB
        at_ub = self.status == _AT_UB
        x[at_lb] = np.where(np.isfinite(self.lb[at_lb]), self.lb[at_lb], 0.0)
        x[at_ub] = np.where(np.isfinite(self.ub[at_ub]), self.ub[at_ub], 0.0)
        self.x = x
        self.basic = list(basis.basic)
        B = self.A[:, self.basic]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if abs(np.linalg.det(B)) < 1e-12:
            return False
        self.status[self.basic] = _BASIC
        self._recompute_basics()
        bx = self.x[self.basic]
        blb, bub = self.lb[self.basic], self.ub[self.basic]
        return bool(np.all(bx >= blb - 1e-7) and np.all(bx <= bub + 1e-7))

    def _recompute_basics(self):
        xn = self.x.copy()
        xn[self.basic] = 0.0
        self.x[self.basic] = self.Binv @ (self.b - self.A @ xn)

    def _refactor(self):
        B = self.A[:, self.basic]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("numerically singular basis") from exc
        self._recompute_basics()

    # -- core iteration --------------------------------------------------

    def _iterate(self, cost, allow_cols):
        """Run simplex to optimality for the given cost vector.

        Returns 'optimal' or 'unbounded'. ``allow_cols`` masks columns that may
        enter (used to keep artificials out in phase 2).
        """
        degen_run = 0
        since_refactor = 0
        while True:
            if self.iters >= self.max_iter:
                raise SolverError("simplex iteration cap exceeded")
            self.iters += 1
            y = cost[self.basic] @ self.Binv
            r = cost - y @ self.A
            fixed = self.lb == self.ub
            viol = np.where(self.status == _AT_LB, -r, np.where(self.status == _AT_UB, r, np.abs(r)))
            viol[self.status == _BASIC] = -np.inf
            viol[~allow_cols] = -np.inf
            viol[fixed] = -np.inf
            bland = degen_run >= _BLAND_TRIGGER
            if bland:
                cands = np.nonzero(viol > self.tol)[0]
                if cands.size == 0:
                    self._y = y
                    self._r = r
                    return "optimal"
                q = int(cands[0])
            else:
                q = int(np.argmax(viol))
                if viol[q] <= self.tol:
                    self._y = y
                    self._r = r
                    return "optimal"

            d = self.Binv @ self.A[:, q]
            # Direction of change of x_q: +1 from lower/free, -1 from upper.
            up = self.status[q] != _AT_UB
            if self.status[q] == _FREE and r[q] > 0:
                up = False
            delta = -d if up else d  # x_B changes by delta * t

            bx = self.x[self.basic]
            blb, bub = self.lb[self.basic], self.ub[self.basic]
            with np.errstate(divide="ignore", invalid="ignore"):
                lim = np.full(self.m, np.inf)
                neg = delta < -1e-11
                pos = delta > 1e-11
                lim[neg] = (bx[neg] - blb[neg]) / -delta[neg]
                lim[pos] = (bub[pos] - bx[pos]) / delta[pos]
            lim = np.maximum(lim, 0.0)
            span = self.ub[q] - self.lb[q]
            t = min(lim.min(initial=np.inf), span)
            if not np.isfinite(t):
                self._ray_var = q
                return "unbounded"

            degen_run = degen_run + 1 if t <= self.feas_tol else 0

            if span <= t + 1e-12 and span < np.inf and span <= lim.min(initial=np.inf):
                # Bound flip: the entering variable runs to its other bound.
                self.x[self.basic] = bx + delta * span
                self.x[q] = self.ub[q] if up else self.lb[q]
                self.status[q] = _AT_UB if up else _AT_LB
                continue

            ties = np.nonzero(lim <= t + 1e-9)[0]
            if bland:
                leave_pos = int(min(ties, key=lambda i: self.basic[i]))
            else:
                leave_pos = int(max(ties, key=lambda i: (abs(d[i]), -self.basic[i])))
            p = self.basic[leave_pos]

            self.x[self.basic] = bx + delta * t
            self.x[q] = (self.x[q] + t) if up else (self.x[q] - t)
            # Leaving variable lands on the bound that limited the step.
            self.x[p] = blb[leave_pos] if delta[leave_pos] < 0 else bub[leave_pos]
            self.status[p] = _AT_LB if delta[leave_pos] < 0 else _AT_UB
            self.status[q] = _BASIC
            self.basic[leave_pos] = q

            piv = d[leave_pos]
            if abs(piv) < 1e-11:
                self._refactor()
            else:
                row = self.Binv[leave_pos] / piv
                self.Binv -= np.outer(d, row)
                self.Binv[leave_pos] = row
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    # -- driver ----------------------------------------------------------

    def solve(self, warm):
        self.iters = 0
        self.art_start = None
        N0 = self.n + self.m
        warmed = False
        if warm is not None:
            warmed = self._install_basis(warm)
        if not warmed:
            need_phase1 = self._init_cold()
            if need_phase1:
                self._setup_artificials()
                c1 = np.zeros(self.A.shape[1])
                c1[self.art_start:] = 1.0
                allow = np.ones(self.A.shape[1], dtype=bool)
                res = self._iterate(c1, allow)
                if res != "optimal":
                    raise SolverError("phase 1 unbounded (internal error)")
                infeas = float(c1 @ self.x)
                if infeas > 1e-7 * (1.0 + abs(self.b).max(initial=0.0)):
                    return LPSolution(status="infeasible", iterations=self.iters)
                self._evict_artificials()
                # Freeze artificials out of the problem.
                self.lb[self.art_start:] = 0.0
                self.ub[self.art_start:] = 0.0

        cost = np.zeros(self.A.shape[1])
        cost[: len(self.c)] = self.c
        allow = np.ones(self.A.shape[1], dtype=bool)
        if self.art_start is not None:
            allow[self.art_start:] = False
        res = self._iterate(cost, allow)
        if res == "unbounded":
            return LPSolution(status="unbounded", iterations=self.iters)

        x = self.x[: self.n].copy()
        obj = float(np.dot(self.prob.obj, x)) + self.prob.obj_offset
        duals = self._y[: self.m].copy()
        basic = [j for j in self.basic]
        basis = Basis(basic=basic, status=self.status[:N0].copy())
        return LPSolution(
            status="optimal",
            x=x,
            duals=duals,
            objective=obj,
            basis=basis,
            reduced_costs=self._r[: self.n].copy(),
            iterations=self.iters,
        )

    def _evict_artificials(self):
        """Pivot zero-valued basic artificials out where a real column allows it."""
        for pos in range(self.m):
            p = self.basic[pos]
            if p < self.art_start:
                continue
            row = self.Binv[pos] @ self.A[:, : self.art_start]
            cands = np.nonzero(np.abs(row) > 1e-9)[0]
            cands = [j for j in cands if self.status[j] != _BASIC and self.lb[j] != self.ub[j]]
            if not cands:
                continue  # redundant row; artificial stays basic at 0
            q = int(cands[0])
            d = self.Binv @ self.A[:, q]
            piv = d[pos]
            self.status[p] = _AT_LB
            self.x[p] = 0.0
            self.status[q] = _BASIC
            self.basic[pos] = q
            rowi = self.Binv[pos] / piv
            self.Binv -= np.outer(d, rowi)
            self.Binv[pos] = rowi
            self._recompute_basics()
