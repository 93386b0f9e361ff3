"""Dense two-phase primal simplex.

Solves ``min c x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0``.

Pricing is Dantzig's largest-violation rule with lowest-index tie breaking;
after a run of ``degenerate_limit`` consecutive degenerate pivots the phase
switches to Bland's rule for the rest of that phase, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_LP = 1e-7
TOL_FEAS = 1e-7


class IterationLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, table: np.ndarray, basis: list[int], tol: float, max_iter: int,
                 degenerate_limit: int):
        self.T = table
        self.basis = basis
        self.tol = tol
        self.max_iter = max_iter
        self.degenerate_limit = degenerate_limit
        self.iterations = 0

    def price(self, cost: np.ndarray) -> None:
        """Install ``cost`` as the objective row, expressed in reduced form."""
        T = self.T
        T[-1, :] = 0.0
        T[-1, : cost.size] = cost
        for i, b in enumerate(self.basis):
            if T[-1, b] != 0.0:
                T[-1, :] -= T[-1, b] * T[i, :]

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row, :] /= T[row, col]
        colv = T[:, col].copy()
        colv[row] = 0.0
        T -= np.outer(colv, T[row, :])
        T[np.abs(T) < 1e-13] = 0.0
        self.basis[row] = col
        self.iterations += 1

    def _leaving(self, col: int) -> int | None:
        T = self.T
        column = T[:-1, col]
        rows = np.flatnonzero(column > self.tol)
        if rows.size == 0:
            return None
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + self.tol * max(1.0, abs(best))]
        # lowest basic-variable index among tied rows
        return int(min(ties, key=lambda r: self.basis[r]))

    def run(self, ncols: int) -> str:
        """Iterate until optimal or unbounded over the first ``ncols`` columns."""
        T = self.T
        bland = False
        streak = 0
        while True:
            reduced = T[-1, :ncols]
            candidates = np.flatnonzero(reduced < -self.tol)
            if candidates.size == 0:
                return "optimal"
            if self.iterations >= self.max_iter:
                raise IterationLimit(f"simplex exceeded {self.max_iter} pivots")
            if bland:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(reduced[candidates])])
            row = self._leaving(col)
            if row is None:
                return "unbounded"
            if T[row, -1] <= self.tol:
                streak += 1
                if streak >= self.degenerate_limit:
                    bland = True
            else:
                streak = 0
            self.pivot(row, col)


def solve(
    c,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    tol: float = TOL_LP,
    feas_tol: float = TOL_FEAS,
    max_iter: int | None = None,
    degenerate_limit: int = 50,
) -> LpResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    rows = m_eq + m_ub

    # structural columns, then one slack per <= row
    A = np.zeros((rows, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    basis: list[int] = []
    needs_art: list[int] = []
    for i in range(rows):
        if i >= m_eq and not flip[i]:
            basis.append(n + (i - m_eq))
        else:
            basis.append(-1)
            needs_art.append(i)
    n_struct = n + m_ub
    n_art = len(needs_art)
    T = np.zeros((rows + 1, n_struct + n_art + 1))
    T[:rows, :n_struct] = A
    T[:rows, -1] = b
    for a, i in enumerate(needs_art):
        T[i, n_struct + a] = 1.0
        basis[i] = n_struct + a

    if max_iter is None:
        max_iter = 50 * (rows + n_struct) + 1000
    tab = _Tableau(T, basis, tol, max_iter, degenerate_limit)

    if n_art:
        phase1 = np.zeros(n_struct + n_art)
        phase1[n_struct:] = 1.0
        tab.price(phase1)
        tab.run(n_struct + n_art)
        if -tab.T[-1, -1] > feas_tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpResult("infeasible", None, None, tab.iterations)
        # drive zero-level artificials out; rows with no structural entry are redundant
        redundant = []
        for i, bv in enumerate(tab.basis):
            if bv < n_struct:
                continue
            entries = np.flatnonzero(np.abs(tab.T[i, :n_struct]) > tol)
            if entries.size:
                tab.pivot(i, int(entries[0]))
            else:
                redundant.append(i)
        keep = [i for i in range(rows) if i not in set(redundant)]
        tab.T = np.vstack([tab.T[keep], tab.T[-1:]])
        tab.T = np.delete(tab.T, np.s_[n_struct: n_struct + n_art], axis=1)
        tab.basis = [tab.basis[i] for i in keep]

    cost = np.zeros(n_struct)
    cost[:n] = c
    tab.price(cost)
    status = tab.run(n_struct)
    if status == "unbounded":
        return LpResult("unbounded", None, None, tab.iterations)
    x_full = np.zeros(n_struct)
    for i, bv in enumerate(tab.basis):
        x_full[bv] = tab.T[i, -1]
    x = np.maximum(x_full[:n], 0.0)
    return LpResult("optimal", x, float(c @ x), tab.iterations)
