"""Built-in property suite behind `splinepred selftest`.

Quick desk checks of the numerical core: one line per property, nonzero
exit if anything fails.  The pytest suite in the repository covers the same
ground (and much more); this runs without test files installed.
"""

import numpy as np
from scipy.linalg import cho_factor

from . import embedding, kernels, spline
from .embedding import DelayDataset
from .signals import SampledSignal


def _checks():
    rng = np.random.default_rng(20240817)

    def spline_interpolation():
        t = np.linspace(0.0, 5.0, 40)
        y = rng.normal(size=40)
        model = spline.fit(t, y, 0.0)
        return np.max(np.abs(model.fitted_values - y)) < 1e-10

    def spline_affine_exact():
        t = np.linspace(0.0, 3.0, 25)
        y = 0.7 * t - 1.3
        model = spline.fit(t, y, 3.7)
        return np.max(np.abs(model.fitted_values - y)) < 1e-9

    def spline_lambda_monotone():
        t = np.linspace(0.0, 4.0, 60)
        y = np.sin(2.0 * t) + 0.2 * rng.normal(size=60)
        mses, curvatures = [], []
        for lam in (1e-6, 1e-3, 1e0, 1e3):
            m = spline.fit(t, y, lam)
            mses.append(spline.training_mse(m, y))
            curvatures.append(spline.integrated_curvature(m))
        return (np.all(np.diff(mses) >= -1e-12)
                and np.all(np.diff(curvatures) <= 1e-12))

    def spline_linearity():
        t = np.linspace(0.0, 2.0, 30)
        y1 = rng.normal(size=30)
        y2 = rng.normal(size=30)
        a, b = 1.7, -0.4
        lhs = spline.fit(t, a * y1 + b * y2, 0.05).fitted_values
        rhs = (a * spline.fit(t, y1, 0.05).fitted_values
               + b * spline.fit(t, y2, 0.05).fitted_values)
        return np.max(np.abs(lhs - rhs)) < 1e-10

    def kernel_symmetry():
        for _ in range(20):
            x, y = rng.normal(size=3), rng.normal(size=3)
            if abs(kernels.kernel(1.3, x, y) - kernels.kernel(1.3, y, x)) > 1e-15:
                return False
        return kernels.kernel(2.0, np.ones(4), np.ones(4)) == 1.0

    def gram_psd_with_jitter():
        X = rng.normal(size=(40, 5))
        G = kernels.gram_matrix(1.1, X)
        G[np.diag_indices_from(G)] += 1e-10
        cho_factor(G, lower=True)
        return True

    def krr_matches_dense():
        X = rng.normal(size=(30, 4))
        y = rng.normal(size=30)
        ds = DelayDataset(X, y, 1.0, 4, 1.0, 1.0, 0.0)
        model = kernels.fit_krr(ds, 1.5, 1e-3)
        G = kernels.gram_matrix(1.5, X)
        ref = np.linalg.solve(G + 30 * 1e-3 * np.eye(30), y)
        return np.max(np.abs(model.alphas - ref)) / np.max(np.abs(ref)) < 1e-8

    def svr_kkt():
        X = rng.normal(size=(25, 2))
        y = np.sin(X[:, 0]) + 0.1 * rng.normal(size=25)
        ds = DelayDataset(X, y, 1.0, 2, 1.0, 1.0, 0.0)
        eps, lam = 0.05, 1e-3
        model = kernels.fit_svr(ds, 1.5, lam, eps)
        beta = model.alphas
        C = 1.0 / (2.0 * 25 * lam)
        resid = y - kernels.predict_batch(model, X)
        tol = 1e-3
        ok = abs(beta.sum()) <= 1e-9 and np.all(np.abs(beta) <= C + 1e-12)
        for b, r in zip(beta, resid):
            if b == 0.0:
                ok &= abs(r) <= eps + tol
            elif b >= C - 1e-12:
                ok &= r >= eps - tol
            elif b <= -C + 1e-12:
                ok &= r <= -eps + tol
            elif b > 0:
                ok &= abs(r - eps) <= tol
            else:
                ok &= abs(r + eps) <= tol
            if abs(r) < eps - tol:  # strictly inside the tube
                ok &= b == 0.0
        return bool(ok)

    def embedding_row_count():
        for _ in range(50):
            n = int(rng.integers(5, 40))
            tau_steps = int(rng.integers(1, 4))
            dim = int(rng.integers(1, 4))
            la = int(rng.integers(1, 4))
            values = rng.normal(size=n)
            sig = SampledSignal(0.0, 1.0, values)
            expected = sum(
                1 for i in range(n)
                if i - (dim - 1) * tau_steps >= 0 and i + la < n)
            try:
                ds = embedding.build(sig, float(tau_steps), dim, float(la))
                got = len(ds)
            except Exception:
                got = 0
            if got != max(expected, 0):
                return False
        return True

    def lemma1_values():
        a = spline.compute_lemma1_lambda(1000, 2)
        b = (np.log(1000.0) / 1000.0) ** 0.8
        return abs(a - b) < 1e-15 and abs(spline.compute_lemma1_lambda(3, 2)
                                          - (np.log(3.0) / 3.0) ** 0.8) < 1e-15

    return [
        ("spline lambda=0 interpolates", spline_interpolation),
        ("spline reproduces affine data", spline_affine_exact),
        ("spline MSE/curvature monotone in lambda", spline_lambda_monotone),
        ("spline smoother is linear in the data", spline_linearity),
        ("kernel symmetric, K(x,x)=1", kernel_symmetry),
        ("gram matrix PSD with 1e-10 jitter", gram_psd_with_jitter),
        ("KRR matches dense solve", krr_matches_dense),
        ("SVR KKT, box, sum and tube conditions", svr_kkt),
        ("embedding row count matches enumeration", embedding_row_count),
        ("lemma-1 lambda schedule values", lemma1_values),
    ]


def run_selftest() -> int:
    failures = 0
    for name, check in _checks():
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, keep going
            ok = False
            name = f"{name} (raised {type(exc).__name__}: {exc})"
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += not ok
    print(f"{'all checks passed' if not failures else f'{failures} check(s) FAILED'}")
    return 1 if failures else 0
