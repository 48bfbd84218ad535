"""Delay-coordinate datasets: inputs (u(t), u(t-tau), ..., u(t-(D-1)tau)),
targets u(t + lookahead)."""

from dataclasses import dataclass, field

import numpy as np

from . import spline
from .errors import GridMismatchError, InsufficientDataError
from .signals import SampledSignal


@dataclass(frozen=True)
class DelayDataset:
    """Matrix of delay vectors with scalar lookahead targets.

    Row i holds (u(t_i), u(t_i - tau), ..., u(t_i - (dim-1)*tau)) and
    target i is u(t_i + lookahead), with t_i = t_first + i*h.
    """

    inputs: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)
    tau: float
    dim: int
    lookahead: float
    h: float
    t_first: float

    def __post_init__(self):
        inputs = np.ascontiguousarray(self.inputs, dtype=np.float64)
        targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        if inputs.ndim != 2 or targets.ndim != 1 or inputs.shape[0] != targets.size:
            raise ValueError("inputs must be (N, D) with N matching targets")
        if inputs.shape[0] < 1:
            raise ValueError("dataset must hold at least one row")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self):
        return self.targets.size

    @property
    def row_times(self) -> np.ndarray:
        return self.t_first + self.h * np.arange(len(self))

    def take(self, rows) -> "DelayDataset":
        """New dataset restricted to the given row indices (bookkeeping kept)."""
        rows = np.asarray(rows)
        return DelayDataset(self.inputs[rows], self.targets[rows], self.tau,
                           self.dim, self.lookahead, self.h, self.t_first)


def _steps_of(value, h, name):
    steps = value / h
    n = int(round(steps))
    if n < 1 or abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
        raise GridMismatchError(
            f"{name}={value!r} is not a positive integer multiple of the step h={h!r}")
    return n


def row_count(n_samples: int, tau_steps: int, dim: int, lookahead_steps: int) -> int:
    """Number of admissible rows for a signal of n_samples."""
    return n_samples - (dim - 1) * tau_steps - lookahead_steps


def _embed(values: np.ndarray, t0: float, h: float, tau: float, dim: int,
           lookahead: float) -> DelayDataset:
    tau_steps = _steps_of(tau, h, "tau")
    la_steps = _steps_of(lookahead, h, "lookahead")
    if dim < 1:
        raise ValueError(f"embedding dimension must be positive, got {dim}")
    span = (dim - 1) * tau_steps
    n_rows = row_count(values.size, tau_steps, dim, la_steps)
    if n_rows < 1:
        raise InsufficientDataError(
            f"signal of {values.size} samples admits no rows with "
            f"tau={tau}, dim={dim}, lookahead={lookahead}")
    base = span + np.arange(n_rows)
    cols = base[:, None] - tau_steps * np.arange(dim)[None, :]
    inputs = values[cols]
    targets = values[base + la_steps]
    return DelayDataset(inputs, targets, float(tau), int(dim), float(lookahead),
                       float(h), float(t0 + span * h))


def build(signal: SampledSignal, tau: float, dim: int, lookahead: float) -> DelayDataset:
    """Embed a sampled signal; tau and lookahead must be multiples of its step."""
    return _embed(signal.values, signal.t0, signal.h, tau, dim, lookahead)


def build_from_spline(model: spline.SplineModel, times, tau: float, dim: int,
                      lookahead: float) -> DelayDataset:
    """Embed spline values evaluated on a uniform grid of times.

    The grid must lie inside the spline's knot range so that no row or target
    is taken from the extrapolated region.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    if t.size < 2:
        raise InsufficientDataError("need at least two grid times")
    steps = np.diff(t)
    h = steps[0]
    if h <= 0 or np.any(np.abs(steps - h) > 1e-9 * max(1.0, abs(h))):
        raise GridMismatchError("grid times must be uniformly increasing")
    tol = 1e-9 * max(1.0, abs(h))
    if t[0] < model.knots[0] - tol or t[-1] > model.knots[-1] + tol:
        raise ValueError("grid times extend beyond the spline's knot range")
    values = spline.evaluate(model, t)
    return _embed(values, t[0], h, tau, dim, lookahead)


def write_dataset(path, dataset: DelayDataset) -> None:
    """Write the dataset as delimited text: D lag columns then the target."""
    names = [f"lag{d * dataset.tau:g}" for d in range(dataset.dim)] + ["target"]
    with open(path, "w") as fh:
        fh.write("\t".join(names) + "\n")
        for row, tgt in zip(dataset.inputs, dataset.targets):
            fh.write("\t".join(repr(v) for v in row) + f"\t{tgt!r}\n")
