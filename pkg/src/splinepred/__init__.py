"""Prediction of noisy dynamical time series on delay coordinates.

Three predictors are provided and benchmarked against each other:
epsilon-SVR on noisy delay coordinates, kernel ridge regression on noisy
delay coordinates, and cubic smoothing-spline denoising followed by kernel
ridge regression.  See the bench module / `splinepred` CLI for the
Mackey-Glass and Lorenz experiment harness.
"""

from .embedding import DelayDataset, build, build_from_spline
from .errors import (ConfigError, ConvergenceError, GridMismatchError,
                     InsufficientDataError, IntegrationDivergedError,
                     InvalidDataError, InvalidGridError, SolverError,
                     SplinepredError)
from .kernels import (KernelModel, fit_krr, fit_svr, gram_matrix, kernel,
                      predict, predict_batch)
from .predictors import (FittedPredictor, PredictorSpec, evaluate,
                         fit_predictor, predict_direct, predict_iterated)
from .selection import BestParams, CellScore, CvGrid, cross_validate
from .signals import (NoiseSpec, SampledSignal, add_noise,
                      generate_lorenz, generate_mackey_glass, signal_stats)
from .spline import (SplineModel, compute_lemma1_lambda, default_lambda_grid,
                     fit, select_lambda_cv)
from .spline import evaluate as evaluate_spline

__version__ = "0.1.0"

__all__ = [
    "BestParams", "CellScore", "ConfigError", "ConvergenceError", "CvGrid",
    "DelayDataset", "FittedPredictor", "GridMismatchError",
    "InsufficientDataError", "IntegrationDivergedError", "InvalidDataError",
    "InvalidGridError", "KernelModel", "NoiseSpec", "PredictorSpec",
    "SampledSignal", "SolverError", "SplineModel", "SplinepredError",
    "add_noise", "build", "build_from_spline", "compute_lemma1_lambda",
    "cross_validate", "default_lambda_grid", "evaluate", "evaluate_spline",
    "fit", "fit_krr", "fit_predictor", "fit_svr", "generate_lorenz",
    "generate_mackey_glass", "gram_matrix", "kernel", "predict",
    "predict_batch", "predict_direct", "predict_iterated", "select_lambda_cv",
    "signal_stats",
]
