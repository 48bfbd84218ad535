"""Gaussian-kernel RKHS regressors.

Kernel ridge regression minimizes (1/M) * sum (f(x_j) - y_j)^2 + L * ||f||^2
and is solved in closed form as (G + M*L*I) alpha = y.  Epsilon-insensitive
support vector regression minimizes the same functional with Vapnik's
epsilon-loss; its dual is solved by SMO-style pairwise coordinate descent
with the box constraint C = 1 / (2*M*L), so the reported L stays directly
comparable between the two losses.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .embedding import DelayDataset
from .errors import ConvergenceError, SolverError

LOSS_SQUARED = "squared"
LOSS_EPS = "epsilon_insensitive"


@dataclass(frozen=True)
class KernelModel:
    """Fitted RKHS regressor: f(x) = sum_i alphas_i K(support_i, x) + bias."""

    support_points: np.ndarray = field(repr=False)
    alphas: np.ndarray = field(repr=False)
    gamma: float
    bias: float
    loss_kind: str
    lambda_reg: float
    epsilon: float = 0.0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.support_points, dtype=np.float64)
        alp = np.ascontiguousarray(self.alphas, dtype=np.float64)
        if pts.ndim != 2 or alp.ndim != 1 or pts.shape[0] != alp.size:
            raise ValueError("support_points must be (M, D) matching alphas")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.loss_kind not in (LOSS_SQUARED, LOSS_EPS):
            raise ValueError(f"unknown loss_kind {self.loss_kind!r}")
        pts.setflags(write=False)
        alp.setflags(write=False)
        object.__setattr__(self, "support_points", pts)
        object.__setattr__(self, "alphas", alp)

    @property
    def dim(self) -> int:
        return self.support_points.shape[1]


def kernel(gamma: float, x, y) -> float:
    """Gaussian kernel exp(-||x - y||^2 / gamma^2)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.exp(-np.sum((x - y) ** 2) / gamma ** 2))


def gram_matrix(gamma: float, X, Y=None) -> np.ndarray:
    """Pairwise kernel evaluations; Y defaults to X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    return np.exp(-cdist(X, Y, "sqeuclidean") / gamma ** 2)


def fit_krr(data: DelayDataset, gamma: float, lambda_reg: float) -> KernelModel:
    """Closed-form kernel ridge regression on a delay dataset (no bias)."""
    if not lambda_reg > 0:
        raise ValueError(f"lambda_reg must be positive, got {lambda_reg}")
    X = data.inputs
    y = data.targets
    m = len(data)
    G = gram_matrix(gamma, X)
    G[np.diag_indices_from(G)] += m * lambda_reg
    try:
        alphas = cho_solve(cho_factor(G, lower=True), y)
    except LinAlgError as exc:
        raise SolverError(
            f"KRR system numerically singular (gamma={gamma:g}, "
            f"lambda={lambda_reg:g}, M={m})") from exc
    return KernelModel(X, alphas, float(gamma), 0.0, LOSS_SQUARED, float(lambda_reg))


@njit(cache=True, nogil=True)
def _smo_solve(K, y, C, eps, tol, max_iter):
    """Maximal-violating-pair SMO for the epsilon-SVR dual.

    Works on the 2M-variable split z = (alpha, alpha*), beta = alpha - alpha*,
    minimizing 0.5 beta'K beta - y'beta + eps*sum(z) subject to the box
    0 <= z <= C and sum(alpha) = sum(alpha*).  Returns (beta, bias, gap,
    iterations) with gap the final KKT violation.
    """
    m = y.shape[0]
    z = np.zeros(2 * m)
    g = np.empty(2 * m)
    for i in range(m):
        g[i] = eps - y[i]
        g[m + i] = eps + y[i]

    it = 0
    gap = np.inf
    max_lb = -np.inf
    min_ub = np.inf
    while True:
        max_lb = -np.inf
        min_ub = np.inf
        i_sel = -1
        j_sel = -1
        for k in range(2 * m):
            if k < m:
                val = -g[k]
                in_up = z[k] < C
                in_low = z[k] > 0.0
            else:
                val = g[k]
                in_up = z[k] > 0.0
                in_low = z[k] < C
            if in_up and val > max_lb:
                max_lb = val
                i_sel = k
            if in_low and val < min_ub:
                min_ub = val
                j_sel = k
        gap = max_lb - min_ub
        if gap <= tol or it >= max_iter:
            break

        i = i_sel
        j = j_sel
        mi = i if i < m else i - m
        mj = j if j < m else j - m
        si = 1.0 if i < m else -1.0
        sj = 1.0 if j < m else -1.0
        quad = 2.0 - 2.0 * K[mi, mj]
        if quad < 1e-12:
            quad = 1e-12
        zi_old = z[i]
        zj_old = z[j]
        if si != sj:
            delta = (-g[i] - g[j]) / quad
            diff = zi_old - zj_old
            zi = zi_old + delta
            zj = zj_old + delta
            if diff > 0.0:
                if zj < 0.0:
                    zj = 0.0
                    zi = diff
                if zi > C:
                    zi = C
                    zj = C - diff
            else:
                if zi < 0.0:
                    zi = 0.0
                    zj = -diff
                if zj > C:
                    zj = C
                    zi = C + diff
        else:
            delta = (g[i] - g[j]) / quad
            ssum = zi_old + zj_old
            zi = zi_old - delta
            zj = zj_old + delta
            if ssum > C:
                if zi > C:
                    zi = C
                    zj = ssum - C
                if zj > C:
                    zj = C
                    zi = ssum - C
            else:
                if zj < 0.0:
                    zj = 0.0
                    zi = ssum
                if zi < 0.0:
                    zi = 0.0
                    zj = ssum
        z[i] = zi
        z[j] = zj
        dzi = (zi - zi_old) * si
        dzj = (zj - zj_old) * sj
        Ki = K[mi]
        Kj = K[mj]
        for l in range(m):
            upd = dzi * Ki[l] + dzj * Kj[l]
            g[l] += upd
            g[m + l] -= upd
        it += 1

    bias = 0.5 * (max_lb + min_ub)
    beta = z[:m] - z[m:]
    return beta, bias, gap, it


def fit_svr(data: DelayDataset, gamma: float, lambda_reg: float, epsilon: float,
            tol: float = 1e-3, max_iter: int = 100_000) -> KernelModel:
    """Epsilon-insensitive SVR via the SMO dual solver.

    The box constraint is C = 1/(2*M*lambda_reg); the bias comes from the KKT
    multiplier of the equality constraint.  Raises ConvergenceError carrying
    the final KKT violation if the pair-update cap is reached.
    """
    if not lambda_reg > 0:
        raise ValueError(f"lambda_reg must be positive, got {lambda_reg}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    X = data.inputs
    y = data.targets
    m = len(data)
    C = 1.0 / (2.0 * m * lambda_reg)
    K = gram_matrix(gamma, X)
    beta, bias, gap, it = _smo_solve(K, y, C, float(epsilon), float(tol), max_iter)
    if gap > tol:
        raise ConvergenceError(
            f"SVR solver hit the cap of {max_iter} pair updates with KKT "
            f"violation {gap:.3e} > {tol:g}", kkt_gap=float(gap), iterations=int(it))
    return KernelModel(X, beta, float(gamma), float(bias), LOSS_EPS,
                       float(lambda_reg), float(epsilon))


def svr_dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray,
                       epsilon: float) -> float:
    """Dual objective 0.5 b'Kb - y'b + eps*||b||_1 (lower is better)."""
    return float(0.5 * beta @ K @ beta - y @ beta + epsilon * np.abs(beta).sum())


def predict(model: KernelModel, x) -> float:
    """Evaluate the representer expansion at a single delay vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != model.dim:
        raise ValueError(f"expected a vector of dimension {model.dim}, got shape {x.shape}")
    k = gram_matrix(model.gamma, x[None, :], model.support_points)[0]
    return float(k @ model.alphas + model.bias)


def predict_batch(model: KernelModel, inputs) -> np.ndarray:
    """Row-wise prediction; an empty batch yields an empty array."""
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or (X.shape[0] > 0 and X.shape[1] != model.dim):
        raise ValueError(f"expected (N, {model.dim}) inputs, got shape {X.shape}")
    if X.shape[0] == 0:
        return np.empty(0)
    k = gram_matrix(model.gamma, X, model.support_points)
    return k @ model.alphas + model.bias


def write_kernel_model(path, model: KernelModel) -> None:
    """Write header (loss, gamma, lambda, epsilon, bias, D, M) plus one
    (alpha, coordinates...) row per support point."""
    with open(path, "w") as fh:
        fh.write(f"# loss_kind {model.loss_kind}\n")
        fh.write(f"# gamma {model.gamma!r}\n")
        fh.write(f"# lambda_reg {model.lambda_reg!r}\n")
        fh.write(f"# epsilon {model.epsilon!r}\n")
        fh.write(f"# bias {model.bias!r}\n")
        fh.write(f"# dim {model.dim}\n")
        fh.write(f"# n_support {model.support_points.shape[0]}\n")
        for a, row in zip(model.alphas, model.support_points):
            fh.write(" ".join([repr(a)] + [repr(v) for v in row]) + "\n")


def read_kernel_model(path) -> KernelModel:
    """Read a model written by :func:`write_kernel_model`."""
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                header[key] = value
                continue
            rows.append([float(v) for v in line.split()])
    arr = np.array(rows)
    return KernelModel(arr[:, 1:], arr[:, 0], float(header["gamma"]),
                       float(header["bias"]), header["loss_kind"],
                       float(header["lambda_reg"]), float(header["epsilon"]))
