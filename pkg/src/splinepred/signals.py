"""Generation of benchmark signals and additive Gaussian noise.

Two sources are provided: the Mackey-Glass delay differential equation
(observed directly) and the x-coordinate of the Lorenz system.  Both are
integrated with fixed-step RK4 so that repeated calls are bit-identical.
Noise is injected at a prescribed noise-to-signal variance ratio using an
explicitly seeded PCG64 generator.
"""

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import IntegrationDivergedError

MG_DELAY = 17.0


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled scalar signal; sample j sits at time t0 + j*h."""

    t0: float
    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step size must be positive, got {self.h}")
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (self.values.size - 1)

    def segment(self, start: int, stop: int) -> "SampledSignal":
        """Index-based sub-signal with the start time shifted accordingly."""
        if not 0 <= start < stop <= self.values.size:
            raise ValueError(f"bad segment [{start}, {stop}) of {self.values.size} samples")
        return SampledSignal(self.t0 + start * self.h, self.h, self.values[start:stop])

    def downsample(self, factor: int) -> "SampledSignal":
        """Keep every factor-th sample, starting at the first."""
        if factor < 1 or factor != int(factor):
            raise ValueError(f"downsample factor must be a positive integer, got {factor}")
        return SampledSignal(self.t0, self.h * factor, self.values[::factor])


@dataclass(frozen=True)
class NoiseSpec:
    """Noise-to-signal variance ratio plus the generator seed."""

    snr: float
    seed: int

    def __post_init__(self):
        if not self.snr >= 0:
            raise ValueError(f"snr must be nonnegative, got {self.snr}")


SignalStats = namedtuple("SignalStats", ["mean", "variance", "std"])


@njit(cache=True)
def _mg_integrate(dt, n_total, hist0, delay):
    """RK4 for dx/dt = -0.1 x(t) + 0.2 x(t-delay) / (1 + x(t-delay)^10).

    The delayed term at off-grid times comes from cubic Hermite interpolation
    of the stored values and stored derivatives; for t <= 0 the history is the
    constant hist0.  Returns (values, derivatives, fail_index) where
    fail_index >= 0 flags the first non-finite state.
    """
    xs = np.empty(n_total)
    ds = np.empty(n_total)
    xs[0] = hist0

    def rhs(x, xd):
        return -0.1 * x + 0.2 * xd / (1.0 + xd ** 10)

    def lookup(tq):
        if tq <= 0.0:
            return hist0
        s = tq / dt
        j = int(np.floor(s))
        frac = s - j
        # snap to the grid so stored samples are reproduced exactly
        if frac < 1e-9:
            return xs[j]
        if frac > 1.0 - 1e-9:
            return xs[j + 1]
        f2 = frac * frac
        f3 = f2 * frac
        h00 = 2.0 * f3 - 3.0 * f2 + 1.0
        h10 = f3 - 2.0 * f2 + frac
        h01 = -2.0 * f3 + 3.0 * f2
        h11 = f3 - f2
        return h00 * xs[j] + h10 * dt * ds[j] + h01 * xs[j + 1] + h11 * dt * ds[j + 1]

    ds[0] = rhs(xs[0], lookup(-delay))
    for k in range(n_total - 1):
        t = k * dt
        x = xs[k]
        xd0 = lookup(t - delay)
        xdm = lookup(t + 0.5 * dt - delay)
        xd1 = lookup(t + dt - delay)
        k1 = rhs(x, xd0)
        k2 = rhs(x + 0.5 * dt * k1, xdm)
        k3 = rhs(x + 0.5 * dt * k2, xdm)
        k4 = rhs(x + dt * k3, xd1)
        xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(xn):
            return xs, ds, k + 1
        xs[k + 1] = xn
        ds[k + 1] = rhs(xn, xd1)
    return xs, ds, -1


@njit(cache=True)
def _lorenz_integrate(h, nsub, n_total, x0, y0, z0):
    """Fixed-step RK4 for the Lorenz system, observing x every nsub substeps."""
    out = np.empty(n_total)
    x, y, z = x0, y0, z0
    out[0] = x
    hs = h / nsub
    for k in range(1, n_total):
        for _ in range(nsub):
            k1x = 10.0 * (y - x)
            k1y = 28.0 * x - y - x * z
            k1z = -8.0 * z / 3.0 + x * y
            x2 = x + 0.5 * hs * k1x
            y2 = y + 0.5 * hs * k1y
            z2 = z + 0.5 * hs * k1z
            k2x = 10.0 * (y2 - x2)
            k2y = 28.0 * x2 - y2 - x2 * z2
            k2z = -8.0 * z2 / 3.0 + x2 * y2
            x3 = x + 0.5 * hs * k2x
            y3 = y + 0.5 * hs * k2y
            z3 = z + 0.5 * hs * k2z
            k3x = 10.0 * (y3 - x3)
            k3y = 28.0 * x3 - y3 - x3 * z3
            k3z = -8.0 * z3 / 3.0 + x3 * y3
            x4 = x + hs * k3x
            y4 = y + hs * k3y
            z4 = z + hs * k3z
            k4x = 10.0 * (y4 - x4)
            k4y = 28.0 * x4 - y4 - x4 * z4
            k4z = -8.0 * z4 / 3.0 + x4 * y4
            x = x + hs / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y = y + hs / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z = z + hs / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            return out, k
        out[k] = x
    return out, -1


def generate_mackey_glass(dt: float, n_samples: int, transient: float = 1000.0,
                          history_value: float = 1.2) -> SampledSignal:
    """Integrate the Mackey-Glass equation and return post-transient samples.

    The initial history is the constant ``history_value`` on [-17, 0].  The
    delayed term needed at RK4 mid-stages is obtained by cubic Hermite
    interpolation of the stored solution, keeping the history access
    compatible with the O(dt^4) step error.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > MG_DELAY:
        raise ValueError(f"dt must not exceed the delay {MG_DELAY}")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if transient < 0:
        raise ValueError("transient must be nonnegative")
    n_skip = int(round(transient / dt))
    xs, _, fail = _mg_integrate(float(dt), n_skip + int(n_samples),
                                float(history_value), MG_DELAY)
    if fail >= 0:
        raise IntegrationDivergedError(
            f"Mackey-Glass state became non-finite at step {fail} (t={fail * dt:g})")
    return SampledSignal(0.0, float(dt), xs[n_skip:])


def generate_lorenz(dt: float, n_samples: int, transient: float = 100.0,
                    initial_state=(1.0, 1.0, 1.0),
                    substep_max: float = 0.005) -> SampledSignal:
    """Integrate the Lorenz system and return the x-coordinate samples.

    The output step dt is subdivided into equal RK4 substeps no larger than
    ``substep_max``; the transient prefix is discarded.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if transient < 0:
        raise ValueError("transient must be nonnegative")
    nsub = max(1, int(np.ceil(dt / substep_max - 1e-12)))
    n_skip = int(round(transient / dt))
    x0, y0, z0 = (float(v) for v in initial_state)
    out, fail = _lorenz_integrate(float(dt), nsub, n_skip + int(n_samples), x0, y0, z0)
    if fail >= 0:
        raise IntegrationDivergedError(
            f"Lorenz state became non-finite at step {fail} (t={fail * dt:g})")
    return SampledSignal(0.0, float(dt), out[n_skip:])


def add_noise(signal: SampledSignal, spec: NoiseSpec) -> SampledSignal:
    """Add i.i.d. zero-mean Gaussian noise of variance snr * Var(signal).

    Var(signal) is the unbiased sample variance of the input values, so the
    realized noise level is reproducible from the data actually in hand.  The
    draw uses numpy's PCG64 generator seeded with spec.seed.
    """
    values = signal.values
    var = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    sigma = np.sqrt(spec.snr * var)
    rng = np.random.default_rng(spec.seed)
    noisy = values + rng.normal(0.0, sigma, values.size)
    return SampledSignal(signal.t0, signal.h, noisy)


def signal_stats(signal: SampledSignal) -> SignalStats:
    """Mean, unbiased sample variance, and standard deviation."""
    values = signal.values
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return SignalStats(mean, var, float(np.sqrt(var)))


def write_signal(path, signal: SampledSignal) -> None:
    """Write a two-column (time, value) text table with a '#' header."""
    with open(path, "w") as fh:
        fh.write(f"# t0 {signal.t0!r}\n")
        fh.write(f"# h {signal.h!r}\n")
        for t, v in zip(signal.times, signal.values):
            fh.write(f"{t!r} {v!r}\n")


def read_signal(path) -> SampledSignal:
    """Read a signal written by :func:`write_signal`."""
    t0 = None
    h = None
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] in ("t0", "h"):
                    if parts[0] == "t0":
                        t0 = float(parts[1])
                    else:
                        h = float(parts[1])
                continue
            values.append(float(line.split()[1]))
    if t0 is None or h is None:
        raise ValueError(f"{path}: missing '# t0' or '# h' header line")
    return SampledSignal(t0, h, np.array(values))
