"""Scalar asymmetric-norm machinery: asymmetric norms, expectiles, tau-variance.

The expectile of a sample is computed with the classical asymmetric weighted
least squares iteration: assign weight tau to points above the current
iterate, 1-tau to the rest, recompute the weighted mean, repeat until the
weight assignment is stable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "ExpectileResult",
    "asym_norm",
    "asym_loss",
    "expectile",
    "expectile_value",
    "tau_variance",
]


def check_level(tau):
    """Validate an expectile level; must lie strictly inside (0, 1)."""
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"expectile level must satisfy 0 < tau < 1, got {tau}")
    return tau


def _check_sample(values):
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if x.size == 0:
        raise ValueError("sample must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample must be finite")
    return x


def asym_norm(x, tau, alpha=2):
    """Asymmetric l_alpha norm of a scalar: |x|^alpha weighted by tau on
    x >= 0 and by 1-tau on x < 0."""
    if alpha not in (1, 2):
        raise ValueError(f"alpha must be 1 or 2, got {alpha}")
    tau = check_level(tau)
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("x must be finite")
    w = tau if x >= 0 else 1.0 - tau
    return abs(x) ** alpha * w


def asym_loss(x, e, tau):
    """Sum of asymmetric squared deviations of the sample `x` from `e`."""
    d = np.asarray(x, dtype=float) - e
    w = np.where(d >= 0, tau, 1.0 - tau)
    return float(np.sum(w * d * d))


@dataclass
class ExpectileResult:
    """Converged expectile with the weight assignment that produced it.

    `weights[i]` is tau exactly when the sample element lies strictly above
    `value`, else 1-tau.
    """

    value: float
    weights: np.ndarray
    iterations: int
    converged: bool


def expectile(sample, tau, max_iter=100):
    """Sample tau-expectile via asymmetric weighted least squares.

    Starts with every weight equal to tau (first iterate is the mean) and
    stops when the weight vector repeats the previous iteration. A revisited
    weight configuration without convergence is a cycle; the best-loss
    iterate is returned flagged converged=False.

    Raises ConvergenceError (with the last iterate attached) if the weights
    keep changing for `max_iter` iterations.
    """
    x = _check_sample(sample)
    tau = check_level(tau)
    n = x.size
    if np.ptp(x) == 0.0:
        # Constant sample: nothing strictly above the value.
        return ExpectileResult(float(x[0]), np.full(n, 1.0 - tau), 0, True)

    plus = np.ones(n, dtype=bool)
    seen = {plus.tobytes()}
    best_loss = np.inf
    best_e = np.nan
    e = np.nan
    for t in range(1, max_iter + 1):
        n_plus = int(plus.sum())
        denom = tau * n_plus + (1.0 - tau) * (n - n_plus)
        e = (tau * x[plus].sum() + (1.0 - tau) * x[~plus].sum()) / denom
        loss = asym_loss(x, e, tau)
        if loss < best_loss:
            best_loss, best_e = loss, e
        new_plus = x > e
        if np.array_equal(new_plus, plus):
            weights = np.where(new_plus, tau, 1.0 - tau)
            return ExpectileResult(float(e), weights, t, True)
        key = new_plus.tobytes()
        if key in seen:
            # Cycle between configurations with equal loss; keep the best.
            weights = np.where(x > best_e, tau, 1.0 - tau)
            return ExpectileResult(float(best_e), weights, t, False)
        seen.add(key)
        plus = new_plus

    last = ExpectileResult(float(e), np.where(x > e, tau, 1.0 - tau), max_iter, False)
    raise ConvergenceError(
        f"expectile did not converge within {max_iter} iterations", last=last
    )


def expectile_value(sample, tau, max_iter=100):
    """Convenience wrapper returning only the expectile value."""
    return expectile(sample, tau, max_iter=max_iter).value


def tau_variance(sample, tau, max_iter=100):
    """Mean asymmetric squared deviation of the sample from its tau-expectile."""
    x = _check_sample(sample)
    e = expectile(x, tau, max_iter=max_iter).value
    return asym_loss(x, e, tau) / x.size
