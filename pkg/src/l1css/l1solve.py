"""Least-absolute-deviations regression: exact and certified approximate.

Both solvers attack ``min_x ||M x - b||_1``.  The exact path uses the
split-residual linear program (2n inequality rows) through HiGHS, with a
closed-form weighted-median solve when the design has a single column.  The
approximate path runs iteratively reweighted least squares on the smoothed
objective ``sum_i sqrt(r_i^2 + delta^2)`` with a geometric delta schedule,
and certifies (1 + eps)-optimality through the dual: any y with
``||y||_inf <= 1`` and ``M^T y = 0`` gives the lower bound ``b^T y``, and the
smoothed-gradient direction projected onto that feasible set is such a y.
Iteration stops as soon as the achieved cost is within (1 + eps) of the best
lower bound (plus machine-precision additive slack), so a converged result
carries a genuine optimality certificate rather than a heuristic stop.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .matrices import as_matrix, as_vector

EXACT_CELL_CAP = 100_000  # rows * dims cap for the LP path

_MAX_LEVELS = 12   # delta levels, each a factor 10 below the last
_INNER_SOLVES = 5  # reweighted least-squares solves per level, at most
_RIDGE = 1e-12     # times trace(M^T W M), stabilizes the normal equations
_INNER_TOL = 1e-4  # relative smoothed-objective stagnation ending a level


class SolverError(RuntimeError):
    """The underlying optimizer failed to produce a usable solution."""


class CapacityError(ValueError):
    """Problem exceeds the documented size caps for this code path."""


@dataclass(frozen=True)
class RegressionResult:
    """Outcome of one l1 regression.

    ``cost`` is ``||M x - b||_1`` recomputed exactly from ``x``;
    ``estimate`` lies in ``[cost, (1 + eps) cost]`` and upper-bounds the
    cost, so it can stand in for the cost wherever a cheap certified value
    is needed.  ``converged`` is False when the iteration hit its level cap
    before certifying (1 + eps)-optimality; the best iterate is still
    returned and ``estimate`` widens to ``cost * (1 + eps)``.
    """

    x: np.ndarray
    cost: float
    estimate: float
    converged: bool = True


def _check_eps(eps):
    e = float(eps)
    if not 0.0 < e < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return e


def _weighted_median_fit(m, b):
    # min_x sum_i |m_i x - b_i| = sum_i |m_i| |x - b_i/m_i| + sum_{m_i=0} |b_i|;
    # optimal at a weighted median of the ratios (lower median, deterministic).
    live = m != 0.0
    if not live.any():
        return 0.0
    ratios = b[live] / m[live]
    weights = np.abs(m[live])
    order = np.argsort(ratios, kind="stable")
    csum = np.cumsum(weights[order])
    pivot = np.searchsorted(csum, 0.5 * csum[-1])
    return float(ratios[order][min(pivot, len(order) - 1)])


def l1_regression_exact(M, b):
    """Exact ``min_x ||M x - b||_1``.

    Single-column designs use the weighted-median closed form; otherwise
    the split-residual LP runs through HiGHS.  Raises CapacityError when
    rows * dims exceeds ``EXACT_CELL_CAP`` and SolverError if the LP fails.
    """
    m = as_matrix(M, "design")
    v = as_vector(b, "target")
    n, d = m.shape
    if v.shape[0] != n:
        raise ValueError(f"design has {n} rows but target has {v.shape[0]}")
    if n * d > EXACT_CELL_CAP:
        raise CapacityError(
            f"exact path capped at rows*dims <= {EXACT_CELL_CAP}, got {n * d}"
        )
    if d == 1:
        x = np.array([_weighted_median_fit(m[:, 0], v)])
        cost = float(np.abs(m @ x - v).sum())
        return RegressionResult(x=x, cost=cost, estimate=cost)
    # variables [x (d), t (n)]: minimize sum t  s.t.  Mx - t <= b, -Mx - t <= -b
    eye = np.eye(n)
    a_ub = np.block([[m, -eye], [-m, -eye]])
    b_ub = np.concatenate([v, -v])
    cvec = np.concatenate([np.zeros(d), np.ones(n)])
    bounds = [(None, None)] * d + [(0.0, None)] * n
    res = linprog(cvec, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success or res.x is None:
        raise SolverError(f"LP solver failed (status {res.status}): {res.message}")
    x = res.x[:d].copy()
    cost = float(np.abs(m @ x - v).sum())
    return RegressionResult(x=x, cost=cost, estimate=cost)


def _dual_lower_bound(q_basis, b, r, delta):
    # Project the smoothed-gradient direction y = r / sqrt(r^2 + delta^2)
    # onto {M^T y = 0} via the orthonormal basis of col(M), then rescale into
    # the unit-inf-norm ball.  -b^T y is then a valid lower bound on the
    # optimal cost; negative values clamp to the trivial bound 0.
    y = r / np.sqrt(r * r + delta * delta)
    g = y - q_basis @ (q_basis.T @ y)
    sup = np.abs(g).max()
    if sup > 1.0:
        g = g / sup
    return max(-float(b @ g), 0.0)


def _active_set_bound(m, b, r, active, inactive):
    # Recover a dual point from the residual's sign pattern: y = sign(r) off
    # the active rows, and on the active rows solve M_A^T y_A = -M_I^T y_I
    # so that M^T y = 0.  Feasible once rescaled into the unit ball, so
    # -b^T y certifies a lower bound; near the optimum it is essentially
    # the exact dual solution and closes the duality gap.
    y = np.sign(r)
    try:
        y[active] = np.linalg.solve(m[active].T, -m[inactive].T @ y[inactive])
    except np.linalg.LinAlgError:
        return 0.0
    sup = np.abs(y).max()
    if sup > 1.0:
        y = y / sup
    return max(-float(b @ y), 0.0)


def _interpolation_polish(m, b, x, r, cost, active):
    # Exact l1 solutions interpolate d rows; re-solving on the d currently
    # smallest residuals often lands on the optimal vertex.
    try:
        x_cand = np.linalg.solve(m[active], b[active])
    except np.linalg.LinAlgError:
        return x, r, cost
    r_cand = m @ x_cand - b
    cost_cand = float(np.abs(r_cand).sum())
    if cost_cand < cost:
        return x_cand, r_cand, cost_cand
    return x, r, cost


def _solve_column(m, b, residual, delta, d):
    # One reweighted least-squares step for a single column.  Kept strictly
    # 2-D so a column's float trajectory never depends on which batch it
    # rides in.
    w = 1.0 / np.sqrt(residual * residual + delta * delta)
    wm = m * w[:, None]
    gram = wm.T @ m
    gram[np.arange(d), np.arange(d)] += _RIDGE * np.trace(gram)
    rhs = wm.T @ b
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(gram, rhs, rcond=None)[0]


def _irls_single(m, b, eps, q_basis, d, trace=None, col=0):
    # Full schedule for one target column.  The column owns contiguous
    # buffers and never shares state, so the result is identical whether it
    # is solved alone or as part of a batch.
    tiny = np.finfo(float).tiny
    x = np.zeros(d)
    r = -b.copy()
    delta0 = max(1.0, float(np.abs(b).max()))
    cost = float(np.abs(r).sum())
    slack = 1e-12 * cost  # machine-precision certificate slack, scale-aware
    lower = 0.0
    step_rel = np.inf
    prev_cost = cost
    converged = False
    # x = 0 is always feasible, so the final answer must never be worse
    best_cost, best_x = cost, x.copy()

    square = m.shape[0] == d
    for level in range(_MAX_LEVELS):
        delta = delta0 / 10.0**level
        phi_prev = None
        for _ in range(_INNER_SOLVES):
            x = _solve_column(m, b, r, delta, d)
            r = m @ x - b
            phi = float(np.sqrt(r * r + delta * delta).sum())
            if trace is not None:
                trace.setdefault("smoothed", []).append((level, col, phi))
            if phi_prev is not None and phi_prev - phi <= _INNER_TOL * max(phi_prev, tiny):
                break
            phi_prev = phi
        cost = float(np.abs(r).sum())
        lower = max(lower, _dual_lower_bound(q_basis, b, r, delta))
        # Vertex machinery is a pair of d x d solves, so only attempt it
        # once the smooth bound says the gap is within shouting distance,
        # or the schedule is about to run out.
        near = lower > 0.0 and cost <= (1.0 + 4.0 * eps) * lower + slack
        if d <= m.shape[0] and (near or level >= _MAX_LEVELS - 3):
            order = np.argsort(np.abs(r), kind="stable")
            active, inactive = order[:d], order[d:]
            x, r, cost = _interpolation_polish(m, b, x, r, cost, active)
            if not square:
                order = np.argsort(np.abs(r), kind="stable")
                lower = max(lower, _active_set_bound(m, b, r, order[:d], order[d:]))
        if cost < best_cost:
            best_cost, best_x, best_r = cost, x.copy(), r.copy()
        step_rel = abs(prev_cost - cost) / max(cost, tiny)
        prev_cost = cost
        if cost <= (1.0 + eps) * lower + slack:
            converged = True
            break

    if best_cost < cost:
        x, r, cost = best_x, best_r, best_cost
    if converged:
        est = cost * (1.0 + min(eps, max(step_rel, 0.0)))
    else:
        est = cost * (1.0 + eps)
    return RegressionResult(x=x, cost=cost, estimate=float(est), converged=converged)


def _irls_core(m, bmat, eps, trace=None):
    d = m.shape[1]
    q_basis = np.linalg.qr(m, mode="reduced")[0]
    return [
        _irls_single(m, np.ascontiguousarray(bmat[:, j]), eps, q_basis, d,
                     trace=trace, col=j)
        for j in range(bmat.shape[1])
    ]


def l1_regression_approx(M, b, eps):
    """(1 + eps)-approximate ``min_x ||M x - b||_1`` with a certified stop.

    The returned estimate satisfies ``cost <= estimate <= (1 + eps) cost``;
    a converged result additionally certifies
    ``cost <= (1 + eps) * optimum`` up to machine-precision slack.
    """
    m = as_matrix(M, "design")
    v = as_vector(b, "target")
    e = _check_eps(eps)
    if v.shape[0] != m.shape[0]:
        raise ValueError(f"design has {m.shape[0]} rows but target has {v.shape[0]}")
    return _irls_core(m, v[:, None], e)[0]


def l1_regression_multi(M, B, eps, trace=None):
    """Column-wise l1 regressions of every column of ``B`` against ``M``.

    Returns one RegressionResult per column, each identical to the
    corresponding single-column :func:`l1_regression_approx` call; columns
    that fail to certify keep ``converged=False`` and are the caller's
    responsibility to surface.
    """
    m = as_matrix(M, "design")
    bm = as_matrix(B, "targets")
    e = _check_eps(eps)
    if bm.shape[0] != m.shape[0]:
        raise ValueError(f"design has {m.shape[0]} rows but targets have {bm.shape[0]}")
    return _irls_core(m, bm, e, trace=trace)
