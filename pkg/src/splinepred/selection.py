"""Cross-validated grid search over kernel hyperparameters.

Folds are contiguous blocks of the time-ordered rows: shuffled folds would
leak near-duplicate neighboring delay vectors between train and validation
and flatter every cell's score.  The kernel width is parameterized by the
grid value g through gamma^2 = 2*D*g, i.e. K(x, y) = exp(-||x-y||^2/(2*D*g)).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import kernels
from .embedding import DelayDataset
from .errors import InsufficientDataError, SolverError
from .kernels import LOSS_EPS, LOSS_SQUARED, _smo_solve

DEFAULT_GAMMA_OVER_2D = (0.1, 1.5, 10.0, 50.0, 100.0)
DEFAULT_LAMBDA = (1e-10, 1e-6, 1e-2, 1e2)
DEFAULT_EPSILON = (0.01, 0.05, 0.25)


@dataclass(frozen=True)
class CvGrid:
    """Hyperparameter candidates; epsilon is ignored under squared loss."""

    gamma_over_2d: tuple = DEFAULT_GAMMA_OVER_2D
    lambda_reg: tuple = DEFAULT_LAMBDA
    epsilon: tuple = DEFAULT_EPSILON
    folds: int = 5

    def __post_init__(self):
        if len(self.gamma_over_2d) == 0 or len(self.lambda_reg) == 0:
            raise ValueError("gamma_over_2d and lambda_reg grids must be non-empty")
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")


@dataclass(frozen=True)
class CellScore:
    """One grid cell of the CV table."""

    gamma_over_2d: float
    lambda_reg: float
    epsilon: float
    mean_mse: float
    fold_mses: tuple


@dataclass(frozen=True)
class BestParams:
    gamma: float
    gamma_over_2d: float
    lambda_reg: float
    epsilon: float
    mean_mse: float


def gamma_from_grid_value(g: float, dim: int) -> float:
    """Kernel width from a gamma/2D grid value: gamma = sqrt(2*dim*g)."""
    return math.sqrt(2.0 * dim * g)


def contiguous_folds(n_rows: int, folds: int):
    """Index blocks of near-equal size covering range(n_rows) in order."""
    return np.array_split(np.arange(n_rows), folds)


def _score_block(data, gamma, fold_idx, held, lam_eps_cells, loss_kind,
                 smo_tol, smo_max_iter):
    """Scores for every (lambda, epsilon) cell at one (gamma, fold)."""
    train = np.setdiff1d(np.arange(len(data)), held, assume_unique=True)
    X_tr, y_tr = data.inputs[train], data.targets[train]
    X_va, y_va = data.inputs[held], data.targets[held]
    m = train.size
    G = kernels.gram_matrix(gamma, X_tr)
    K_va = kernels.gram_matrix(gamma, X_va, X_tr)
    out = {}
    for ci, (lam, eps) in lam_eps_cells:
        try:
            if loss_kind == LOSS_SQUARED:
                A = G.copy()
                A[np.diag_indices_from(A)] += m * lam
                alphas = cho_solve(cho_factor(A, lower=True), y_tr)
                pred = K_va @ alphas
            else:
                C = 1.0 / (2.0 * m * lam)
                beta, bias, gap, _ = _smo_solve(G, y_tr, C, float(eps),
                                                smo_tol, smo_max_iter)
                if gap > smo_tol:
                    out[(ci, fold_idx)] = np.inf
                    continue
                pred = K_va @ beta + bias
            out[(ci, fold_idx)] = float(np.mean((pred - y_va) ** 2))
        except (SolverError, LinAlgError):
            out[(ci, fold_idx)] = np.inf
    return out


def cross_validate(data: DelayDataset, grid: CvGrid, loss_kind: str,
                   n_jobs: int = 1, smo_tol: float = 1e-3,
                   smo_max_iter: int = 100_000):
    """Exhaustive k-fold CV over the grid.

    Returns (best, table) where table lists every cell in grid order with its
    per-fold and mean held-out MSE.  Cells whose solver fails score +inf so a
    single ill-conditioned cell cannot abort a sweep.  Ties resolve toward
    smaller gamma, then larger lambda, then smaller epsilon.
    """
    if loss_kind not in (LOSS_SQUARED, LOSS_EPS):
        raise ValueError(f"unknown loss_kind {loss_kind!r}")
    n = len(data)
    if n < grid.folds:
        raise InsufficientDataError(f"{n} rows cannot be split into {grid.folds} folds")
    folds = contiguous_folds(n, grid.folds)
    for f, held in enumerate(folds):
        if held.size == n:
            raise InsufficientDataError(f"fold {f} leaves an empty training set")

    eps_grid = tuple(grid.epsilon) if loss_kind == LOSS_EPS else (0.0,)
    cells = [(g, lam, eps) for g in grid.gamma_over_2d
             for lam in grid.lambda_reg for eps in eps_grid]
    lam_eps = [(lam, eps) for lam in grid.lambda_reg for eps in eps_grid]
    n_le = len(lam_eps)

    tasks = []
    for gi, g in enumerate(grid.gamma_over_2d):
        gamma = gamma_from_grid_value(g, data.dim)
        cell_ids = list(enumerate(lam_eps))
        cell_ids = [(gi * n_le + k, le) for k, le in cell_ids]
        for fi, held in enumerate(folds):
            tasks.append((gamma, fi, held, cell_ids))

    scores = np.full((len(cells), grid.folds), np.nan)

    def run(task):
        gamma, fi, held, cell_ids = task
        return _score_block(data, gamma, fi, held, cell_ids, loss_kind,
                            smo_tol, smo_max_iter)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    for block in results:
        for (ci, fi), mse in block.items():
            scores[ci, fi] = mse

    means = scores.mean(axis=1)
    table = [CellScore(g, lam, eps, float(means[ci]), tuple(scores[ci]))
             for ci, (g, lam, eps) in enumerate(cells)]

    best_ci = min(range(len(cells)),
                  key=lambda ci: (means[ci], cells[ci][0], -cells[ci][1], cells[ci][2]))
    g, lam, eps = cells[best_ci]
    best = BestParams(gamma_from_grid_value(g, data.dim), g, lam, eps,
                      float(means[best_ci]))
    return best, table


def write_score_table(path, table) -> None:
    """Write the CV table as delimited text with per-fold scores."""
    n_folds = len(table[0].fold_mses) if table else 0
    cols = ["gamma_over_2d", "lambda", "epsilon", "mean_cv_mse"]
    cols += [f"fold{f}_mse" for f in range(n_folds)]
    with open(path, "w") as fh:
        fh.write("\t".join(cols) + "\n")
        for cell in table:
            vals = [repr(cell.gamma_over_2d), repr(cell.lambda_reg),
                    repr(cell.epsilon), repr(cell.mean_mse)]
            vals += [repr(v) for v in cell.fold_mses]
            fh.write("\t".join(vals) + "\n")
