"""Benchmark harness: configured sweeps over (seed, snr, lookahead, method).

A sweep generates one clean signal per configuration, adds noise once per
(seed, snr) so every method trains on identical data, fits each requested
method, and scores it on a noise-free stretch that follows the training
window after a safety gap.  Results are persisted incrementally as
delimited text so partial runs survive interruption; the completed file is
canonically ordered and byte-stable across rerun and across --jobs.
"""

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from . import signals
from .errors import ConfigError, SplinepredError
from .predictors import METHODS, PredictorSpec, evaluate, fit_predictor
from .selection import CvGrid
from .signals import NoiseSpec, SampledSignal, add_noise

SYSTEM_MACKEY_GLASS = "mackey_glass"
SYSTEM_LORENZ = "lorenz"

RESULT_COLUMNS = ("system", "method", "snr", "tf", "h", "seed", "rms", "gamma",
                  "lambda", "epsilon", "spline_lambda", "wall_time")

_SYSTEM_DEFAULTS = {
    SYSTEM_MACKEY_GLASS: dict(h=1.0, tau=6.0, dim=6, transient=1000.0,
                              snr_list=(0.2215,), tf_list=(1.0,)),
    SYSTEM_LORENZ: dict(h=0.01, tau=1.0, dim=10, transient=100.0,
                        snr_list=(0.2,), tf_list=(0.01,)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one benchmark sweep."""

    system: str
    h: float
    tau: float
    dim: int
    n_train: int = 1000
    n_test: int = 1000
    transient: float = 1000.0
    mg_dt: float = 0.1
    snr_list: tuple = (0.2215,)
    tf_list: tuple = (1.0,)
    methods: tuple = METHODS
    seeds: tuple = (0, 1, 2, 3, 4)
    output_dir: str = "bench_out"
    cv_grid: CvGrid = field(default_factory=CvGrid)
    spline_folds: int = 5
    row_stride: int = 1

    def tf_steps(self, tf: float) -> int:
        return int(round(tf / self.h))

    @property
    def tau_steps(self) -> int:
        return int(round(self.tau / self.h))

    @property
    def span(self) -> int:
        return (self.dim - 1) * self.tau_steps

    def validate(self) -> "ExperimentConfig":
        if self.system not in _SYSTEM_DEFAULTS:
            raise ConfigError(f"unknown system {self.system!r}")
        if not self.snr_list or not self.tf_list or not self.seeds or not self.methods:
            raise ConfigError("snr_list, tf_list, seeds and methods must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected subset of {METHODS}")
        for name, value in (("tau", self.tau),) + tuple(("tf", tf) for tf in self.tf_list):
            steps = value / self.h
            if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)) or round(steps) < 1:
                raise ConfigError(
                    f"{name}={value!r} is not a positive integer multiple of h={self.h!r}")
        if self.system == SYSTEM_MACKEY_GLASS:
            factor = self.h / self.mg_dt
            if abs(factor - round(factor)) > 1e-9 or round(factor) < 1:
                raise ConfigError(
                    f"h={self.h!r} must be a positive integer multiple of mg_dt={self.mg_dt!r}")
        if any(s < 0 for s in self.snr_list):
            raise ConfigError("snr values must be nonnegative")
        if self.row_stride < 1:
            raise ConfigError(f"row_stride must be positive, got {self.row_stride}")
        return self


def default_config(system: str, **overrides) -> ExperimentConfig:
    """Config with the documented per-system defaults applied.

    For lorenz, tf defaults to the sample step and the training rows default
    to 0.1-time-unit spacing (row_stride = 0.1/h), so sweeps over h compare
    sampling densities over the same stretch of trajectory.
    """
    if system not in _SYSTEM_DEFAULTS:
        raise ConfigError(f"unknown system {system!r}")
    base = dict(_SYSTEM_DEFAULTS[system])
    if system == SYSTEM_LORENZ:
        h_eff = overrides.get("h", base["h"])
        if "tf_list" not in overrides:
            base["tf_list"] = (h_eff,)
        if "row_stride" not in overrides:
            base["row_stride"] = max(1, int(round(0.1 / h_eff)))
    base.update(overrides)
    return ExperimentConfig(system=system, **base).validate()


@dataclass(frozen=True)
class ResultRecord:
    """Outcome of one (seed, snr, tf, method) cell; rms None marks failure."""

    system: str
    method: str
    snr: float
    tf: float
    h: float
    seed: int
    rms: Optional[float]
    gamma: Optional[float] = None
    lambda_reg: Optional[float] = None
    epsilon: Optional[float] = None
    spline_lambda: Optional[float] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.rms is None

    def sort_key(self):
        return (self.system, self.method, self.snr, self.tf, self.h, self.seed)


def _opt(value) -> str:
    return "" if value is None else repr(value)


def _record_row(r: ResultRecord) -> str:
    rms = f"failed:{r.error}" if r.failed else repr(r.rms)
    cells = (r.system, r.method, repr(r.snr), repr(r.tf), repr(r.h), str(r.seed),
             rms, _opt(r.gamma), _opt(r.lambda_reg), _opt(r.epsilon),
             _opt(r.spline_lambda), f"{r.wall_time:.3f}")
    return "\t".join(cells)


def write_records(path, records) -> None:
    with open(path, "w") as fh:
        fh.write("\t".join(RESULT_COLUMNS) + "\n")
        for r in sorted(records, key=ResultRecord.sort_key):
            fh.write(_record_row(r) + "\n")


def read_records(path):
    """Read a results table written by this module."""
    records = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != RESULT_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            rms_cell = cells[6]
            failed = rms_cell.startswith("failed")
            opt = lambda s: None if s == "" else float(s)
            records.append(ResultRecord(
                system=cells[0], method=cells[1], snr=float(cells[2]),
                tf=float(cells[3]), h=float(cells[4]), seed=int(cells[5]),
                rms=None if failed else float(rms_cell),
                gamma=opt(cells[7]), lambda_reg=opt(cells[8]),
                epsilon=opt(cells[9]), spline_lambda=opt(cells[10]),
                wall_time=float(cells[11]),
                error=rms_cell.partition(":")[2] if failed else None))
    return records


def _noise_seed(seed: int, snr: float) -> int:
    """Stable 64-bit noise seed derived from (seed, snr)."""
    snr_bits = int(np.float64(snr).view(np.uint64))
    return int(np.random.SeedSequence([int(seed), snr_bits]).generate_state(1)[0])


@lru_cache(maxsize=8)
def _clean_signal(system: str, h: float, mg_dt: float, transient: float,
                  n_samples: int) -> SampledSignal:
    """Clean source signal at step h with n_samples samples."""
    if system == SYSTEM_MACKEY_GLASS:
        factor = int(round(h / mg_dt))
        fine = signals.generate_mackey_glass(mg_dt, (n_samples - 1) * factor + 1,
                                             transient)
        return fine.downsample(factor)
    return signals.generate_lorenz(h, n_samples, transient)


def _windows(config: ExperimentConfig):
    """(train window length, gap length, total samples), sized for max tf.

    The training window admits exactly n_train rows at the configured row
    stride; the test window admits at least n_test rows at every tf.
    """
    tf_max = max(config.tf_steps(tf) for tf in config.tf_list)
    train_len = config.span + (config.n_train - 1) * config.row_stride + tf_max + 1
    gap_len = config.span + tf_max
    test_len = config.n_test + config.span + tf_max
    return train_len, gap_len, train_len + gap_len + test_len


def _noisy_train_window(config: ExperimentConfig, seed: int, snr: float) -> SampledSignal:
    train_len, _, total = _windows(config)
    clean = _clean_signal(config.system, config.h, config.mg_dt,
                          config.transient, total)
    train = clean.segment(0, train_len)
    return add_noise(train, NoiseSpec(snr, _noise_seed(seed, snr)))


def _test_stretch(config: ExperimentConfig) -> SampledSignal:
    train_len, gap_len, total = _windows(config)
    clean = _clean_signal(config.system, config.h, config.mg_dt,
                          config.transient, total)
    return clean.segment(train_len + gap_len, total)


def run_cell(config: ExperimentConfig, seed: int, snr: float, tf: float,
             method: str) -> ResultRecord:
    """Fit one method on the shared noisy data for (seed, snr) and score it."""
    start = time.perf_counter()
    try:
        noisy = _noisy_train_window(config, seed, snr)
        tf_steps = config.tf_steps(tf)
        need = config.span + (config.n_train - 1) * config.row_stride + tf_steps + 1
        noisy = noisy.segment(0, need)
        spec = PredictorSpec(method, config.tau, config.dim, tf,
                             cv_grid=config.cv_grid, spline_folds=config.spline_folds,
                             row_stride=config.row_stride)
        fitted = fit_predictor(noisy, spec)
        rms = evaluate(fitted, _test_stretch(config), mode="direct")
        sel = fitted.selected
        return ResultRecord(config.system, method, snr, tf, config.h, seed, rms,
                            gamma=sel.gamma, lambda_reg=sel.lambda_reg,
                            epsilon=sel.epsilon, spline_lambda=sel.spline_lambda,
                            wall_time=time.perf_counter() - start)
    except SplinepredError as exc:
        return ResultRecord(config.system, method, snr, tf, config.h, seed,
                            rms=None, wall_time=time.perf_counter() - start,
                            error=type(exc).__name__)


def _cell_worker(args):
    return run_cell(*args)


def noisy_signal_hash(config: ExperimentConfig, seed: int, snr: float) -> str:
    """SHA-256 of the shared noisy training window for one (seed, snr)."""
    noisy = _noisy_train_window(config, seed, snr)
    digest = hashlib.sha256()
    digest.update(np.float64(noisy.t0).tobytes())
    digest.update(np.float64(noisy.h).tobytes())
    digest.update(noisy.values.tobytes())
    return digest.hexdigest()


def run_experiment(config: ExperimentConfig, jobs: int = 1, log=None):
    """Run the sweep, persisting records and noisy-data hashes incrementally.

    Cells already present in an existing results file are not recomputed, so
    an interrupted sweep resumes where it stopped.  On completion the file is
    rewritten in canonical (method, snr, tf, seed) order; the same config and
    seeds produce a byte-identical table regardless of jobs.
    """
    config = config.validate()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.tsv"
    hashes_path = out_dir / "noisy_hashes.txt"

    existing = []
    if results_path.exists():
        existing = read_records(results_path)
    done = {(r.seed, r.snr, r.tf, r.method) for r in existing}

    cells = sorted(((seed, snr, tf, method)
                    for seed in config.seeds for snr in config.snr_list
                    for tf in config.tf_list for method in config.methods),
                   key=lambda c: (c[3], c[1], c[2], c[0]))
    todo = [c for c in cells if c not in done]

    with open(hashes_path, "w") as fh:
        for seed in sorted(set(config.seeds)):
            for snr in sorted(set(config.snr_list)):
                fh.write(f"seed={seed} snr={snr!r} "
                         f"sha256={noisy_signal_hash(config, seed, snr)}\n")

    records = list(existing)
    mode = "a" if existing else "w"
    with open(results_path, mode) as fh:
        if not existing:
            fh.write("\t".join(RESULT_COLUMNS) + "\n")
        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_cell_worker, (config,) + c) for c in todo]
                for future in futures:
                    record = future.result()
                    records.append(record)
                    fh.write(_record_row(record) + "\n")
                    fh.flush()
                    if log:
                        log(record)
        else:
            for c in todo:
                record = run_cell(config, *c)
                records.append(record)
                fh.write(_record_row(record) + "\n")
                fh.flush()
                if log:
                    log(record)

    write_records(results_path, records)
    return sorted(records, key=ResultRecord.sort_key)


def _parse_floats(value):
    return tuple(float(v) for v in value.split(","))


def _parse_ints(value):
    return tuple(int(v) for v in value.split(","))


def _parse_strings(value):
    return tuple(v.strip() for v in value.split(","))


# (section, key) -> (config field, converter); cv_grid/spline keys are folded
# into their sub-configs after parsing.
_CONFIG_KEYS = {
    ("experiment", "system"): ("system", str),
    ("experiment", "h"): ("h", float),
    ("experiment", "tau"): ("tau", float),
    ("experiment", "dim"): ("dim", int),
    ("experiment", "n_train"): ("n_train", int),
    ("experiment", "n_test"): ("n_test", int),
    ("experiment", "transient"): ("transient", float),
    ("experiment", "mg_dt"): ("mg_dt", float),
    ("experiment", "snr_list"): ("snr_list", _parse_floats),
    ("experiment", "tf_list"): ("tf_list", _parse_floats),
    ("experiment", "methods"): ("methods", _parse_strings),
    ("experiment", "seeds"): ("seeds", _parse_ints),
    ("experiment", "output_dir"): ("output_dir", str),
    ("cv_grid", "gamma_over_2d"): ("gamma_over_2d", _parse_floats),
    ("cv_grid", "lambda_reg"): ("lambda_reg", _parse_floats),
    ("cv_grid", "epsilon"): ("epsilon", _parse_floats),
    ("cv_grid", "folds"): ("cv_folds", int),
    ("spline", "folds"): ("spline_folds", int),
}

_SECTIONS = ("experiment", "cv_grid", "spline")


def parse_config_text(text: str, name: str = "<config>") -> ExperimentConfig:
    """Parse key=value lines with optional [section] headers.

    Keys outside any header belong to [experiment].  Unknown sections, unknown
    keys, duplicate keys and malformed lines are errors carrying the line
    number.  Any key not present takes the documented per-system default.
    """
    section = "experiment"
    seen = {}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"{name}:{lineno}: unknown section [{section}]")
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"{name}:{lineno}: malformed line {raw!r}")
        if (section, key) not in _CONFIG_KEYS:
            raise ConfigError(f"{name}:{lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in seen:
            raise ConfigError(f"{name}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {seen[(section, key)]})")
        seen[(section, key)] = lineno
        field_name, converter = _CONFIG_KEYS[(section, key)]
        try:
            values[field_name] = converter(value)
        except ValueError as exc:
            raise ConfigError(f"{name}:{lineno}: bad value for {key!r}: {exc}") from exc

    if "system" not in values:
        raise ConfigError(f"{name}: missing required key 'system'")
    system = values.pop("system")
    if system not in _SYSTEM_DEFAULTS:
        raise ConfigError(f"{name}: unknown system {system!r}")

    grid_overrides = {k: values.pop(k)
                      for k in ("gamma_over_2d", "lambda_reg", "epsilon")
                      if k in values}
    if "cv_folds" in values:
        grid_overrides["folds"] = values.pop("cv_folds")
    if grid_overrides:
        values["cv_grid"] = CvGrid(**grid_overrides)
    try:
        return default_config(system, **values)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_config(path) -> ExperimentConfig:
    """Parse a configuration file; see :func:`parse_config_text`."""
    with open(path) as fh:
        return parse_config_text(fh.read(), name=str(path))
