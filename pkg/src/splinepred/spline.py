"""Natural cubic smoothing splines.

``fit`` minimizes (1/M) * sum_j (u(t_j) - y_j)^2 + lambda * integral(u'')^2
over natural cubic splines with knots at the sample times.  The minimizer is
computed with the Reinsch banded formulation, with the penalty entering the
linear system as p = M * lambda so the 1/M scaling of the data term is
preserved exactly and reported lambda values stay on the theoretical scale
of :func:`compute_lemma1_lambda`.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .errors import InsufficientDataError, InvalidDataError, InvalidGridError, SolverError


@dataclass(frozen=True)
class SplineModel:
    """Fitted natural cubic smoothing spline.

    Between knots the curve is the natural-spline interpolant of
    (fitted_values, second_derivs); outside the knot range it extends
    linearly.  The second derivative is zero at both end knots.
    """

    knots: np.ndarray = field(repr=False)
    fitted_values: np.ndarray = field(repr=False)
    second_derivs: np.ndarray = field(repr=False)
    lam: float

    def __post_init__(self):
        for name in ("knots", "fitted_values", "second_derivs"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        m = self.knots.size
        if m < 2:
            raise ValueError("a spline needs at least two knots")
        if self.fitted_values.size != m or self.second_derivs.size != m:
            raise ValueError("knots, fitted_values and second_derivs must have equal length")


def fit(times, y, lam: float) -> SplineModel:
    """Fit the natural cubic smoothing spline with parameter lam >= 0.

    The banded system (R + M*lam * Q^T Q) gamma = Q^T y is solved in O(M),
    where Q is the second-difference operator and R the Gram matrix of the
    linear second-derivative basis; fitted values are y - M*lam * Q gamma.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    yv = np.ascontiguousarray(y, dtype=np.float64)
    if t.ndim != 1 or yv.ndim != 1 or t.size != yv.size:
        raise ValueError("times and y must be 1-D arrays of equal length")
    if t.size < 3:
        raise InsufficientDataError(f"need at least 3 points, got {t.size}")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if not np.all(np.isfinite(yv)):
        raise InvalidDataError("observations contain non-finite values")
    steps = np.diff(t)
    if not np.all(np.isfinite(t)) or np.any(steps <= 0):
        raise InvalidGridError("times must be finite and strictly increasing")

    m = t.size
    p = m * lam
    h0 = steps[:-1]        # h_k, interval left of interior knot k+1
    h1 = steps[1:]         # h_{k+1}, interval right of it
    a = 1.0 / h0
    c = 1.0 / h1
    b = -(a + c)

    # upper banded storage for solveh_banded: row 0 = 2nd superdiag, row 2 = diag
    n_i = m - 2
    ab = np.zeros((3, n_i))
    ab[2] = (h0 + h1) / 3.0 + p * (a * a + b * b + c * c)
    ab[1, 1:] = h1[:-1] / 6.0 + p * (b[:-1] * a[1:] + c[:-1] * b[1:])
    if n_i > 2:
        ab[0, 2:] = p * c[:-2] * a[2:]
    rhs = (yv[:-2] - yv[1:-1]) / h0 + (yv[2:] - yv[1:-1]) / h1

    try:
        gamma = solveh_banded(ab, rhs)
    except LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise SolverError(f"banded spline solve failed: {exc}") from exc

    if p == 0.0:
        fitted = yv
    else:
        qg = np.zeros(m)
        qg[:-2] += gamma / h0
        qg[1:-1] -= gamma * (1.0 / h0 + 1.0 / h1)
        qg[2:] += gamma / h1
        fitted = yv - p * qg
    second = np.zeros(m)
    second[1:-1] = gamma
    return SplineModel(t, fitted, second, float(lam))


def evaluate(model: SplineModel, t):
    """Evaluate the spline at scalar or array t; linear beyond the knot range."""
    tq = np.asarray(t, dtype=np.float64)
    scalar = tq.ndim == 0
    tq = np.atleast_1d(tq)
    knots = model.knots
    a = model.fitted_values
    m2 = model.second_derivs
    idx = np.clip(np.searchsorted(knots, tq, side="right") - 1, 0, knots.size - 2)
    h = knots[idx + 1] - knots[idx]
    dl = tq - knots[idx]          # distance from left knot
    dr = knots[idx + 1] - tq      # distance from right knot
    out = (m2[idx] * dr ** 3 + m2[idx + 1] * dl ** 3) / (6.0 * h) \
        + (a[idx] / h - m2[idx] * h / 6.0) * dr \
        + (a[idx + 1] / h - m2[idx + 1] * h / 6.0) * dl

    below = tq < knots[0]
    above = tq > knots[-1]
    if np.any(below):
        h0 = knots[1] - knots[0]
        slope = (a[1] - a[0]) / h0 - h0 * (2.0 * m2[0] + m2[1]) / 6.0
        out[below] = a[0] + slope * (tq[below] - knots[0])
    if np.any(above):
        hn = knots[-1] - knots[-2]
        slope = (a[-1] - a[-2]) / hn + hn * (m2[-2] + 2.0 * m2[-1]) / 6.0
        out[above] = a[-1] + slope * (tq[above] - knots[-1])
    return float(out[0]) if scalar else out


def integrated_curvature(model: SplineModel) -> float:
    """Integral of the squared second derivative over the knot range."""
    h = np.diff(model.knots)
    m2 = model.second_derivs
    return float(np.sum(h * (m2[:-1] ** 2 + m2[:-1] * m2[1:] + m2[1:] ** 2) / 3.0))


def training_mse(model: SplineModel, y) -> float:
    """Mean squared misfit of the fitted values against the observations."""
    yv = np.asarray(y, dtype=np.float64)
    return float(np.mean((model.fitted_values - yv) ** 2))


def objective(model: SplineModel, y) -> float:
    """The penalized criterion (1/M) * SSE + lambda * integral(u'')^2."""
    return training_mse(model, y) + model.lam * integrated_curvature(model)


def compute_lemma1_lambda(n_points: int, m: int = 2) -> float:
    """Theoretically motivated smoothing scale (log(M)/M)^(2m/(2m+1))."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if m < 2:
        raise ValueError("spline order m must be at least 2")
    ratio = math.log(n_points) / n_points
    return ratio ** (2.0 * m / (2.0 * m + 1.0))


def default_lambda_grid(n_points: int, size: int = 25) -> np.ndarray:
    """Log-spaced candidate lambdas centered on the lemma-1 scale.

    Spans 1e-8 * s to 1e2 * s where s = compute_lemma1_lambda(n_points, 2).
    """
    s = compute_lemma1_lambda(n_points, 2)
    return s * np.logspace(-8.0, 2.0, size)


def select_lambda_cv(times, y, grid=None, folds: int = 5):
    """Pick lambda by k-fold cross-validation with interleaved folds.

    Point j is held out in fold j mod folds, so held-out points stay interior
    to the training grid.  Returns (best_lambda, scores) with scores in grid
    order; near-ties (within 1e-12 absolute or 1e-9 relative of the minimum)
    resolve toward the larger, smoother lambda.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    yv = np.ascontiguousarray(y, dtype=np.float64)
    if folds < 2:
        raise ValueError(f"folds must be at least 2, got {folds}")
    if grid is None:
        grid = default_lambda_grid(t.size)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("lambda grid must be non-empty")

    fold_of = np.arange(t.size) % folds
    scores = np.zeros(grid.size)
    for f in range(folds):
        held = fold_of == f
        if (~held).sum() < 3:
            raise InsufficientDataError(
                f"fold {f} leaves {(~held).sum()} training points; need at least 3")
        t_tr, y_tr = t[~held], yv[~held]
        t_va, y_va = t[held], yv[held]
        for gi, lam in enumerate(grid):
            model = fit(t_tr, y_tr, lam)
            resid = evaluate(model, t_va) - y_va
            scores[gi] += np.mean(resid ** 2)
    scores /= folds

    best = np.min(scores)
    slack = max(1e-12, 1e-9 * abs(best))
    tied = np.flatnonzero(scores <= best + slack)
    best_lam = float(grid[tied[np.argmax(grid[tied])]])
    return best_lam, scores


def write_spline(path, model: SplineModel) -> None:
    """Write a (knot, fitted_value, second_derivative) text table."""
    with open(path, "w") as fh:
        fh.write(f"# lambda {model.lam!r}\n")
        fh.write("# knot fitted_value second_derivative\n")
        for k, v, s in zip(model.knots, model.fitted_values, model.second_derivs):
            fh.write(f"{k!r} {v!r} {s!r}\n")
