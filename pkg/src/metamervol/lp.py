"""Bounded-variable simplex for LPs of the form

    maximize c . r   subject to   A^T r = z0,   0 <= r <= 1.

The constraint system is short and fat (a handful of equality rows against
hundreds of box-bounded variables), so the solver refactorises the tiny
N x N basis every iteration and keeps the remaining work vectorised over q.
Bound flips keep nonbasic variables at 0 or 1; optimal solutions are basic,
with at most N entries strictly between the bounds.

Warm starts: the basis token of a previous solution of the *same* (A, z0)
system stays primal feasible when only the objective changes, so repeated
extremizations over many directions skip phase 1 entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "BoxedLp",
    "LpSolution",
    "WarmBasis",
    "NumericalLpError",
    "InfeasibleSystemError",
    "solve",
    "solve_many",
    "feasible_point",
]

_EPS_BOUND = 1e-9       # tolerated bound violation before clipping
_DELTA_FRACTIONAL = 1e-7
_PIVOT_TOL = 1e-11
_DEGENERATE_STEP = 1e-11


class NumericalLpError(RuntimeError):
    """Simplex failed to make progress (singular basis / iteration cap)."""


class InfeasibleSystemError(ValueError):
    """The equality system admits no point inside the box bounds."""


@dataclass(frozen=True)
class BoxedLp:
    """max objective . r  s.t.  eq_matrix^T r = eq_rhs, r in [0, 1]^q."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.objective, dtype=float)
        a = np.ascontiguousarray(self.eq_matrix, dtype=float)
        z = np.ascontiguousarray(self.eq_rhs, dtype=float)
        if a.ndim != 2:
            raise ValueError("eq_matrix must be q x N")
        q, n = a.shape
        if c.shape != (q,):
            raise ValueError("objective length must match eq_matrix rows")
        if z.shape != (n,):
            raise ValueError("eq_rhs length must match eq_matrix columns")
        if n > q:
            raise ValueError("more equality constraints than variables")
        for name, arr in (("objective", c), ("eq_matrix", a), ("eq_rhs", z)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr.flags.writeable = False
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_matrix", a)
        object.__setattr__(self, "eq_rhs", z)

    @property
    def q(self) -> int:
        return self.eq_matrix.shape[0]

    @property
    def n_eq(self) -> int:
        return self.eq_matrix.shape[1]


@dataclass(frozen=True)
class WarmBasis:
    """Opaque restart token: basic variable indices plus at-upper flags."""

    basic: np.ndarray
    at_upper: np.ndarray


@dataclass
class LpSolution:
    r: np.ndarray
    objective_value: float
    status: str  # optimal | infeasible | unbounded
    basis_fractional_count: int = 0
    dual_y: Optional[np.ndarray] = None
    dual_bound: float = np.nan
    basis: Optional[WarmBasis] = None


def _eps_eq(z0: np.ndarray) -> float:
    return 1e-8 * max(1.0, float(np.abs(z0).max(initial=0.0)))


class _Simplex:
    """Primal bounded-variable simplex over columns of W (N x m).

    Dual prices depend only on the basis and the objective, so between two
    basis changes every profitable nonbasic variable can jump to its other
    bound in one pass (the dominant move for sign-pattern objectives); the
    basic point is updated incrementally and rebuilt from scratch at each
    repricing to keep rounding drift out.
    """

    def __init__(self, w: np.ndarray, ub: np.ndarray):
        self.w = w
        self.ub = ub
        self.n, self.m = w.shape
        self.basic = np.empty(self.n, dtype=np.intp)
        self.at_upper = np.zeros(self.m, dtype=bool)
        self.rhs = np.zeros(self.n)

    def set_rhs(self, z0: np.ndarray) -> None:
        self.rhs = z0

    def _load(self) -> np.ndarray:
        up = self.at_upper.copy()
        up[self.basic] = False
        if not up.any():
            return np.zeros(self.n)
        return self.w[:, up] @ self.ub[up]

    def x_basic(self) -> np.ndarray:
        return np.linalg.solve(self.w[:, self.basic], self.rhs - self._load())

    def x_full(self) -> np.ndarray:
        x = np.where(self.at_upper, self.ub, 0.0)
        x[self.basic] = self.x_basic()
        return x

    def _ratio_test(self, u: np.ndarray, xb: np.ndarray) -> tuple[float, int, bool]:
        """Largest step before a basic variable hits one of its bounds."""
        t_limit = np.inf
        leave = -1
        leave_upper = False
        pos = u > _PIVOT_TOL
        if pos.any():
            tt = xb[pos] / u[pos]
            k = int(np.argmin(tt))
            if tt[k] < t_limit:
                t_limit = float(tt[k])
                leave = int(np.flatnonzero(pos)[k])
        neg = u < -_PIVOT_TOL
        if neg.any():
            tt = (xb[neg] - self.ub[self.basic[neg]]) / u[neg]
            k = int(np.argmin(tt))
            if tt[k] < t_limit:
                t_limit = float(tt[k])
                leave = int(np.flatnonzero(neg)[k])
                leave_upper = True
        return t_limit, leave, leave_upper

    def run(self, c: np.ndarray, max_iter: int, bland_after: int) -> None:
        """Pivot to optimality for objective c from the current feasible basis."""
        is_basic = np.zeros(self.m, dtype=bool)
        is_basic[self.basic] = True
        tol_d = 1e-10 * max(1.0, float(np.abs(c).max()))
        degenerate = 0
        bland = False

        for _ in range(max_iter):
            wb = self.w[:, self.basic]
            try:
                inv = np.linalg.inv(wb)
            except np.linalg.LinAlgError as exc:
                raise NumericalLpError("singular working basis") from exc
            y = inv.T @ c[self.basic]
            d = c - y @ self.w
            d[self.basic] = 0.0

            improving = np.where(self.at_upper, d < -tol_d, d > tol_d) & ~is_basic
            cand = np.flatnonzero(improving)
            if cand.size == 0:
                return
            if bland:
                order = cand
            else:
                order = cand[np.argsort(-np.abs(d[cand]), kind="stable")]

            xb = inv @ (self.rhs - self._load())
            pivoted = False
            for j in order:
                j = int(j)
                sign = -1.0 if self.at_upper[j] else 1.0
                u = sign * (inv @ self.w[:, j])
                t_limit, leave, leave_upper = self._ratio_test(u, xb)

                flip_limit = self.ub[j]
                if flip_limit <= t_limit:
                    # entering variable reaches its other bound first: no
                    # basis change, prices stay valid, stay in this pass
                    if not np.isfinite(flip_limit):
                        raise NumericalLpError("unbounded ray inside box bounds")
                    self.at_upper[j] = not self.at_upper[j]
                    xb -= u * flip_limit
                    continue

                if leave < 0:
                    raise NumericalLpError("no blocking bound found")
                if t_limit < _DEGENERATE_STEP:
                    degenerate += 1
                    if degenerate > bland_after:
                        bland = True

                out = int(self.basic[leave])
                is_basic[out] = False
                is_basic[j] = True
                self.at_upper[out] = leave_upper and bool(np.isfinite(self.ub[out]))
                self.at_upper[j] = False
                self.basic[leave] = j
                pivoted = True
                break

            if not pivoted:
                # only bound flips happened; reprice to confirm optimality
                continue
        raise NumericalLpError("iteration cap exceeded")


def _phase1(sx: _Simplex, q: int, z0: np.ndarray, bland_after: int) -> bool:
    """Install a feasible basis using one artificial column per row."""
    n = sx.n
    resid_sign = np.where(z0 >= 0, 1.0, -1.0)
    art = np.zeros((n, n))
    np.fill_diagonal(art, resid_sign)
    w1 = np.hstack([sx.w, art])
    ub1 = np.concatenate([sx.ub, np.full(n, np.inf)])
    aux = _Simplex(w1, ub1)
    aux.set_rhs(z0)
    aux.basic = np.arange(q, q + n, dtype=np.intp)
    c1 = np.zeros(q + n)
    c1[q:] = -1.0
    aux.run(c1, max_iter=50 * (q + n) + 200, bland_after=bland_after)

    infeas = -float(c1 @ aux.x_full())
    if infeas > _eps_eq(z0):
        return False

    # pivot leftover zero-valued artificials out of the basis; the entering
    # column must be nonbasic at its lower bound so the point is unchanged
    for row in range(n):
        if aux.basic[row] < q:
            continue
        wb = aux.w[:, aux.basic]
        ok = False
        for j in range(q):
            if aux.at_upper[j] or j in aux.basic:
                continue
            u = np.linalg.solve(wb, aux.w[:, j])
            if abs(u[row]) > 1e-9:
                aux.basic[row] = j
                ok = True
                break
        if not ok:
            raise NumericalLpError("redundant equality row; cannot build basis")

    sx.basic = aux.basic.copy()
    sx.at_upper = aux.at_upper[:q].copy()
    return True


def _trivial_solution(lp: BoxedLp) -> LpSolution:
    r = (lp.objective > 0).astype(float)
    return LpSolution(
        r=r,
        objective_value=float(lp.objective @ r),
        status="optimal",
        basis_fractional_count=0,
        dual_y=np.zeros(0),
        dual_bound=float(np.maximum(lp.objective, 0.0).sum()),
        basis=WarmBasis(np.empty(0, dtype=np.intp), r.astype(bool)),
    )


def _setup(lp: BoxedLp, warm: Optional[WarmBasis]) -> Optional[_Simplex]:
    """Build a feasible simplex state, via the warm token or phase 1."""
    q, n = lp.q, lp.n_eq
    sx = _Simplex(lp.eq_matrix.T.copy(), np.ones(q))
    sx.set_rhs(lp.eq_rhs)
    bland_after = 50 * q

    if warm is not None and warm.basic.shape == (n,) and warm.at_upper.shape == (q,):
        sx.basic = warm.basic.astype(np.intp).copy()
        sx.at_upper = warm.at_upper.copy()
        sx.at_upper[sx.basic] = False
        try:
            xb = sx.x_basic()
            if np.all(xb > -_EPS_BOUND) and np.all(xb < 1 + _EPS_BOUND):
                return sx
        except np.linalg.LinAlgError:
            pass
        sx.at_upper[:] = False

    if not _phase1(sx, q, lp.eq_rhs, bland_after):
        return None
    return sx


def solve(lp: BoxedLp, warm: Optional[WarmBasis] = None) -> LpSolution:
    """Maximise the boxed LP; returns a basic (vertex) optimal solution."""
    if lp.n_eq == 0:
        return _trivial_solution(lp)

    sx = _setup(lp, warm)
    if sx is None:
        return LpSolution(
            r=np.zeros(lp.q), objective_value=np.nan, status="infeasible"
        )

    sx.run(lp.objective, max_iter=200 * lp.q + 2000, bland_after=50 * lp.q)

    r = sx.x_full()
    if r.min() < -_EPS_BOUND or r.max() > 1 + _EPS_BOUND:
        raise NumericalLpError("solution violates box bounds beyond tolerance")
    r = np.clip(r, 0.0, 1.0)

    wb = sx.w[:, sx.basic]
    y = np.linalg.solve(wb.T, lp.objective[sx.basic])
    d = lp.objective - y @ sx.w
    dual_bound = float(y @ lp.eq_rhs + np.maximum(d, 0.0).sum())
    fractional = int(
        np.count_nonzero((r > _DELTA_FRACTIONAL) & (r < 1 - _DELTA_FRACTIONAL))
    )
    return LpSolution(
        r=r,
        objective_value=float(lp.objective @ r),
        status="optimal",
        basis_fractional_count=fractional,
        dual_y=y,
        dual_bound=dual_bound,
        basis=WarmBasis(sx.basic.copy(), sx.at_upper.copy()),
    )


def solve_many(
    eq_matrix: np.ndarray,
    eq_rhs: np.ndarray,
    objectives: np.ndarray,
) -> list[LpSolution]:
    """Solve one boxed system under many objectives, chaining warm starts.

    The feasible region is fixed, so phase 1 runs once and each subsequent
    objective restarts the simplex from the previous optimal basis.  Returns
    solutions in objective order; raises on an infeasible system.
    """
    objectives = np.asarray(objectives, dtype=float)
    first = BoxedLp(objectives[0], eq_matrix, eq_rhs)
    q = first.q
    sx = _setup(first, None)
    if sx is None:
        raise InfeasibleSystemError("equality system is infeasible")

    out: list[LpSolution] = []
    for c in objectives:
        sx.run(c, max_iter=200 * q + 2000, bland_after=50 * q)
        r = sx.x_full()
        if r.min() < -_EPS_BOUND or r.max() > 1 + _EPS_BOUND:
            raise NumericalLpError("solution violates box bounds beyond tolerance")
        r = np.clip(r, 0.0, 1.0)
        y = np.linalg.solve(sx.w[:, sx.basic].T, c[sx.basic])
        d = c - y @ sx.w
        out.append(
            LpSolution(
                r=r,
                objective_value=float(c @ r),
                status="optimal",
                basis_fractional_count=int(
                    np.count_nonzero(
                        (r > _DELTA_FRACTIONAL) & (r < 1 - _DELTA_FRACTIONAL)
                    )
                ),
                dual_y=y,
                dual_bound=float(y @ eq_rhs + np.maximum(d, 0.0).sum()),
            )
        )
    return out


def feasible_point(lp: BoxedLp) -> Optional[np.ndarray]:
    """Any r in [0,1]^q with A^T r = eq_rhs within tolerance, else None."""
    if lp.n_eq == 0:
        return np.zeros(lp.q)
    sx = _Simplex(lp.eq_matrix.T.copy(), np.ones(lp.q))
    sx.set_rhs(lp.eq_rhs)
    if not _phase1(sx, lp.q, lp.eq_rhs, bland_after=50 * lp.q):
        return None
    return np.clip(sx.x_full(), 0.0, 1.0)
