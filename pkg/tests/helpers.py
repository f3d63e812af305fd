"""Independent oracles shared by the test modules.

These deliberately avoid the library's own solvers: the expectile oracle is a
golden-section search on the asymmetric squared loss, and the direction
oracle is a brute-force scan over an angular grid.
"""

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def asym_sq_loss(x, e, tau):
    d = np.asarray(x, float) - e
    w = np.where(d >= 0, tau, 1.0 - tau)
    return float(np.sum(w * d * d))


def golden_section_expectile(x, tau, tol=1e-12):
    """Minimize the asymmetric squared loss over [min(x), max(x)].

    Golden section alone stalls at ~sqrt(eps) accuracy because loss
    differences near the minimum drop below rounding noise, so the bracketed
    quadratic piece (weights frozen by the bracket midpoint) is finished off
    in closed form. The refinement is repeated in case the bracket midpoint
    sat on the wrong side of a data point.
    """
    x = np.asarray(x, float)
    a, b = float(x.min()), float(x.max())
    while b - a > tol:
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        if asym_sq_loss(x, c, tau) < asym_sq_loss(x, d, tau):
            b = d
        else:
            a = c
    e = 0.5 * (a + b)
    for _ in range(3):
        w = np.where(x > e, tau, 1.0 - tau)
        e = float(np.sum(w * x) / np.sum(w))
    return e


def batch_expectiles(S, tau, max_iter=200):
    """Row-wise expectiles of S via the weighted-mean fixed point, vectorized.

    Used only to make the 3600-direction brute-force oracle affordable; it is
    the same fixed-point characterization, evaluated independently of the
    library code.
    """
    S = np.asarray(S, float)
    m, n = S.shape
    plus = np.ones((m, n), dtype=bool)
    e = np.empty(m)
    for _ in range(max_iter):
        n_plus = plus.sum(axis=1)
        denom = tau * n_plus + (1.0 - tau) * (n - n_plus)
        e = (tau * np.where(plus, S, 0.0).sum(axis=1)
             + (1.0 - tau) * np.where(plus, 0.0, S).sum(axis=1)) / denom
        new_plus = S > e[:, None]
        if np.array_equal(new_plus, plus):
            break
        plus = new_plus
    return e


def angular_objective_max(Y, tau, n_angles=3600):
    """Max tau-variance of the projection over an angular grid (p must be 2)."""
    assert Y.shape[0] == 2
    ang = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    dirs = np.vstack([np.cos(ang), np.sin(ang)])
    S = dirs.T @ Y
    e = batch_expectiles(S, tau)
    D = S - e[:, None]
    W = np.where(D >= 0, tau, 1.0 - tau)
    obj = (W * D * D).mean(axis=1)
    return float(obj.max())


def skewed_mixture(rng, n=250, n_outlier=25, axis=None, spread=0.4):
    """Dense near-origin cluster plus a sparse large-amplitude cluster."""
    if axis is None:
        theta = rng.uniform(0, 2 * np.pi)
        axis = np.array([np.cos(theta), np.sin(theta)])
    dense = rng.standard_normal((2, n - n_outlier)) * 0.5
    far = axis[:, None] * rng.uniform(3.0, 5.0, n_outlier) + rng.standard_normal(
        (2, n_outlier)
    ) * spread
    return np.hstack([dense, far])
