"""M-spline basis evaluation.

M-splines are non-negative piecewise polynomials, each integrating to one
over its support, built by the standard recursion

    M_{i,1}(x) = 1 / (t_{i+1} - t_i)                     on [t_i, t_{i+1})
    M_{i,k}(x) = k [ (x - t_i) M_{i,k-1}(x)
                   + (t_{i+k} - x) M_{i+1,k-1}(x) ]
                 / [ (k - 1) (t_{i+k} - t_i) ]

With non-negative coefficients, any linear combination stays non-negative.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SplineBasis", "mspline_basis", "uniform_knots"]


def uniform_knots(span_minutes=1440, spacing_minutes=60):
    """Evenly spaced breakpoints over [0, span]."""
    if spacing_minutes <= 0 or span_minutes % spacing_minutes:
        raise ValueError("spacing must be positive and divide the span")
    return np.arange(0, span_minutes + spacing_minutes, spacing_minutes, dtype=float)


def _design(ext_knots, order, x):
    t = ext_knots
    x = np.asarray(x, dtype=float)
    n_int = len(t) - 1
    M = np.zeros((x.size, n_int))
    # Last interval with positive width also owns the right endpoint.
    widths = np.diff(t)
    pos = np.flatnonzero(widths > 0)
    last = pos[-1] if pos.size else -1
    for i in pos:
        inside = (x >= t[i]) & (x < t[i + 1])
        if i == last:
            inside |= x == t[i + 1]
        M[inside, i] = 1.0 / widths[i]
    for k in range(2, order + 1):
        Mk = np.zeros((x.size, len(t) - k))
        for i in range(len(t) - k):
            denom = (k - 1) * (t[i + k] - t[i])
            if denom > 0:
                Mk[:, i] = k * ((x - t[i]) * M[:, i] + (t[i + k] - x) * M[:, i + 1]) / denom
        M = Mk
    return M


@dataclass
class SplineBasis:
    """M-spline basis of a given degree on a breakpoint sequence.

    `basis_matrix` holds the basis evaluated at `eval_points`; `design`
    re-evaluates it on any other points inside the knot range.
    """

    knots: np.ndarray
    degree: int
    eval_points: np.ndarray
    basis_matrix: np.ndarray

    @property
    def n_basis(self):
        return self.basis_matrix.shape[1]

    def design(self, x):
        order = self.degree + 1
        ext = np.concatenate(
            [np.full(self.degree, self.knots[0]), self.knots, np.full(self.degree, self.knots[-1])]
        )
        return _design(ext, order, x)


def mspline_basis(knots, degree=3, eval_points=None):
    """Build an M-spline basis on the given breakpoints.

    Boundary knots are repeated `degree` times so the basis spans the full
    range; with L breakpoints this yields L + degree - 1 basis functions.
    """
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or knots.size < degree + 2:
        raise ValueError(f"need at least degree+2 = {degree + 2} knots")
    if np.any(np.diff(knots) < 0):
        raise ValueError("knots must be non-decreasing")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if eval_points is None:
        eval_points = knots
    eval_points = np.asarray(eval_points, dtype=float)
    if eval_points.min() < knots[0] or eval_points.max() > knots[-1]:
        raise ValueError("eval_points must lie inside the knot range")
    basis = SplineBasis(knots=knots, degree=degree, eval_points=eval_points, basis_matrix=None)
    basis.basis_matrix = basis.design(eval_points)
    return basis
