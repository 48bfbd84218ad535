"""The three end-to-end predictors and their evaluation.

svr_noisy   -- epsilon-SVR on delay coordinates of the noisy signal.
krr_noisy   -- kernel ridge regression on the same noisy delay coordinates.
spline_krr  -- cubic smoothing-spline denoising (lambda by interleaved CV)
               followed by kernel ridge regression on delay coordinates of
               the smoothed signal.

All hyperparameters are selected by k-fold cross-validation.  Multi-step
prediction is available both directly (a model trained for the full
lookahead) and by iterating a 1-step model through a rolling buffer.
Evaluation always scores against a noise-free stretch of signal that is
disjoint in time from the training data.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import embedding, kernels, spline
from .embedding import DelayDataset
from .errors import GridMismatchError, InsufficientDataError
from .kernels import KernelModel, LOSS_EPS, LOSS_SQUARED
from .selection import CvGrid, cross_validate
from .signals import SampledSignal

METHOD_SVR_NOISY = "svr_noisy"
METHOD_KRR_NOISY = "krr_noisy"
METHOD_SPLINE_KRR = "spline_krr"
METHODS = (METHOD_SVR_NOISY, METHOD_KRR_NOISY, METHOD_SPLINE_KRR)

MIN_EVAL_ROWS = 100


@dataclass(frozen=True)
class PredictorSpec:
    """Which method to fit, with embedding and selection settings.

    row_stride thins the training rows to every row_stride-th sample time, so
    a densely sampled signal (which helps the spline stage) can still train
    the kernel stage on rows spread over a long stretch of trajectory.
    """

    method: str
    tau: float
    dim: int
    lookahead: float
    cv_grid: CvGrid = CvGrid()
    spline_folds: int = 5
    row_stride: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.row_stride < 1:
            raise ValueError(f"row_stride must be positive, got {self.row_stride}")


@dataclass(frozen=True)
class SelectedParams:
    """Hyperparameters chosen by cross-validation during fitting."""

    gamma: float
    gamma_over_2d: float
    lambda_reg: float
    epsilon: Optional[float] = None
    spline_lambda: Optional[float] = None


@dataclass(frozen=True)
class FittedPredictor:
    spec: PredictorSpec
    kernel_model: KernelModel
    selected: SelectedParams
    train_t_start: float
    train_t_end: float


def fit_predictor(noisy: SampledSignal, spec: PredictorSpec,
                  n_jobs: int = 1) -> FittedPredictor:
    """Fit one method on a noisy training signal.

    svr_noisy and krr_noisy embed the noisy samples directly, select their
    hyperparameters by CV and refit on all rows.  spline_krr first selects
    the smoothing parameter by interleaved CV on the raw samples, fits the
    spline, embeds the smoothed values on the same sample grid, and then
    proceeds like krr_noisy.
    """
    h = noisy.h
    tau_steps = int(round(spec.tau / h))
    la_steps = int(round(spec.lookahead / h))
    n_rows = embedding.row_count(len(noisy), tau_steps, spec.dim, la_steps)
    n_used = max(0, -(-n_rows // spec.row_stride))
    if n_used < spec.cv_grid.folds * spec.dim:
        raise InsufficientDataError(
            f"signal admits {n_used} training rows; need at least folds*dim = "
            f"{spec.cv_grid.folds * spec.dim}")

    spline_lambda = None
    if spec.method == METHOD_SPLINE_KRR:
        times = noisy.times
        spline_lambda, _ = spline.select_lambda_cv(times, noisy.values,
                                                   folds=spec.spline_folds)
        model = spline.fit(times, noisy.values, spline_lambda)
        data = embedding.build_from_spline(model, times, spec.tau, spec.dim,
                                           spec.lookahead)
    else:
        data = embedding.build(noisy, spec.tau, spec.dim, spec.lookahead)
    if spec.row_stride > 1:
        data = data.take(np.arange(0, len(data), spec.row_stride))

    loss = LOSS_EPS if spec.method == METHOD_SVR_NOISY else LOSS_SQUARED
    best, _ = cross_validate(data, spec.cv_grid, loss, n_jobs=n_jobs)
    if loss == LOSS_EPS:
        kernel_model = kernels.fit_svr(data, best.gamma, best.lambda_reg, best.epsilon)
        epsilon = best.epsilon
    else:
        kernel_model = kernels.fit_krr(data, best.gamma, best.lambda_reg)
        epsilon = None

    selected = SelectedParams(best.gamma, best.gamma_over_2d, best.lambda_reg,
                              epsilon, spline_lambda)
    return FittedPredictor(spec, kernel_model, selected, noisy.t0, noisy.t_end)


def predict_direct(predictor: FittedPredictor, x) -> float:
    """Single kernel-model evaluation on one delay vector."""
    return kernels.predict(predictor.kernel_model, x)


def _buffer_window(dim: int, stride: int) -> int:
    return (dim - 1) * stride + 1


def _iterate(model: KernelModel, buffer: np.ndarray, stride: int, k: int) -> np.ndarray:
    """Advance each row's rolling buffer k prediction steps; returns the
    final column.  buffer has one column per history sample, newest last."""
    dim = model.dim
    w = buffer.shape[1]
    for _ in range(k):
        cols = w - 1 - stride * np.arange(dim)
        preds = kernels.predict_batch(model, buffer[:, cols])
        buffer = np.hstack([buffer[:, 1:], preds[:, None]])
    return buffer[:, -1]


def predict_iterated(predictor: FittedPredictor, history, k: int) -> float:
    """Iterate a 1-step predictor k times from a history buffer.

    history holds samples spaced by the predictor's own lookahead, oldest
    first; it must cover (dim-1)*tau/lookahead + 1 values so a full delay
    vector can be formed.  Each iteration appends one predicted step; the
    k-th appended value is returned.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    spec = predictor.spec
    stride_f = spec.tau / spec.lookahead
    stride = int(round(stride_f))
    if abs(stride_f - stride) > 1e-9 * max(1.0, abs(stride_f)) or stride < 1:
        raise GridMismatchError(
            f"tau={spec.tau!r} is not an integer multiple of the prediction "
            f"step {spec.lookahead!r}")
    hist = np.asarray(history, dtype=np.float64)
    need = _buffer_window(spec.dim, stride)
    if hist.ndim != 1 or hist.size < need:
        raise InsufficientDataError(
            f"history needs at least {need} samples at the prediction-step "
            f"spacing, got {hist.size}")
    final = _iterate(predictor.kernel_model, hist[None, -need:].copy(), stride, k)
    return float(final[0])


def evaluate(predictor: FittedPredictor, clean: SampledSignal,
             mode: str = "direct", lookahead: Optional[float] = None) -> float:
    """RMS prediction error over every admissible row of a noise-free stretch.

    In direct mode the model's own lookahead is scored.  In iterated mode the
    model must be a 1-step predictor (its lookahead dividing the requested
    one); each row's prediction composes it lookahead/step times through a
    rolling buffer.  The clean stretch must not overlap the training window.
    """
    spec = predictor.spec
    tf = spec.lookahead if lookahead is None else lookahead
    if mode not in ("direct", "iterated"):
        raise ValueError(f"unknown mode {mode!r}")
    if not (clean.t0 > predictor.train_t_end or clean.t_end < predictor.train_t_start):
        raise ValueError(
            f"evaluation stretch [{clean.t0:g}, {clean.t_end:g}] overlaps the "
            f"training window [{predictor.train_t_start:g}, {predictor.train_t_end:g}]")

    data = embedding.build(clean, spec.tau, spec.dim, tf)
    if len(data) < MIN_EVAL_ROWS:
        raise InsufficientDataError(
            f"evaluation stretch admits only {len(data)} rows; need {MIN_EVAL_ROWS}")

    if mode == "direct":
        if abs(tf - spec.lookahead) > 1e-9 * max(1.0, abs(tf)):
            raise GridMismatchError(
                f"direct evaluation at lookahead {tf!r} needs a model trained "
                f"for it (model lookahead {spec.lookahead!r})")
        preds = kernels.predict_batch(predictor.kernel_model, data.inputs)
    else:
        k_f = tf / spec.lookahead
        k = int(round(k_f))
        if abs(k_f - k) > 1e-9 * max(1.0, abs(k_f)) or k < 1:
            raise GridMismatchError(
                f"iterated lookahead {tf!r} must be an integer multiple of the "
                f"model's step {spec.lookahead!r}")
        h = clean.h
        step = int(round(spec.lookahead / h))
        stride = int(round(spec.tau / spec.lookahead))
        if abs(spec.tau / spec.lookahead - stride) > 1e-9:
            raise GridMismatchError(
                f"tau={spec.tau!r} is not an integer multiple of the model's "
                f"step {spec.lookahead!r}")
        w = _buffer_window(spec.dim, stride)
        tau_steps = int(round(spec.tau / h))
        span = (spec.dim - 1) * tau_steps
        first = span + np.arange(len(data))
        cols = first[:, None] + step * (np.arange(w)[None, :] - (w - 1))
        buffer = clean.values[cols]
        preds = _iterate(predictor.kernel_model, buffer, stride, k)

    return float(np.sqrt(np.mean((preds - data.targets) ** 2)))
