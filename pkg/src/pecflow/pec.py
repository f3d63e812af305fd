"""Principal expectile components.

Fits unit directions that maximize the asymmetric (tau-weighted) variance of
the projected data. Each direction is a fixed point of an alternating
iteration: the current weight partition induces an asymmetrically weighted
covariance matrix, its leading eigenvector induces new projection scores, and
the scores' expectile induces the next partition. Higher-order components are
obtained by deflating the data and refitting.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, DegenerateDataError
from .expectiles import asym_loss, check_level, expectile

__all__ = [
    "ProfileMatrix",
    "WeightPartition",
    "PecComponent",
    "PecModel",
    "FitOptions",
    "weighted_center",
    "weighted_cov",
    "largest_eigenvector",
    "pec_first",
    "deflate",
    "fit",
    "project",
]


@dataclass
class ProfileMatrix:
    """A p x n matrix whose columns are profile curves on a common grid."""

    data: np.ndarray
    row_grid: np.ndarray = None
    column_ids: list = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.size == 0:
            raise ValueError("data must be a non-empty 2-D array")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("data must be finite")
        p, n = self.data.shape
        if self.row_grid is None:
            self.row_grid = np.arange(p, dtype=float)
        self.row_grid = np.asarray(self.row_grid, dtype=float)
        if self.row_grid.shape != (p,):
            raise ValueError(f"row_grid must have length {p}")
        if p > 1 and not np.all(np.diff(self.row_grid) > 0):
            raise ValueError("row_grid must be strictly increasing")
        if self.column_ids is None:
            self.column_ids = [f"c{i}" for i in range(n)]
        if len(self.column_ids) != n:
            raise ValueError(f"column_ids must have length {n}")

    @property
    def p(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]


@dataclass
class WeightPartition:
    """Split of column indices into the tau-weighted plus set and its complement."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        self.plus = np.asarray(self.plus, dtype=int)
        self.minus = np.asarray(self.minus, dtype=int)
        both = np.concatenate([self.plus, self.minus])
        n = both.size
        if n and not np.array_equal(np.sort(both), np.arange(n)):
            raise ValueError("plus and minus sets must partition 0..n-1")

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        idx = np.arange(mask.size)
        return cls(idx[mask], idx[~mask])

    def mask(self, n):
        m = np.zeros(n, dtype=bool)
        m[self.plus] = True
        return m

    @property
    def n_plus(self):
        return self.plus.size

    @property
    def n_minus(self):
        return self.minus.size


@dataclass
class PecComponent:
    """One fitted principal expectile direction with its diagnostics."""

    order: int
    tau: float
    direction: np.ndarray
    scores: np.ndarray
    expectile: float
    center: np.ndarray
    partition: WeightPartition
    objective: float
    iterations: int
    converged: bool

    def to_dict(self):
        return {
            "order": self.order,
            "tau": self.tau,
            "direction": self.direction.tolist(),
            "scores": self.scores.tolist(),
            "expectile": self.expectile,
            "center": self.center.tolist(),
            "plus_set": self.partition.plus.tolist(),
            "minus_set": self.partition.minus.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass
class FitOptions:
    """Tuning knobs for the fixed-point iteration."""

    restarts: int = 8
    max_iter: int = 200
    seed: int = 0
    deflation: str = "paper"  # "paper" | "projection-only"
    expectile_max_iter: int = 100
    on_nonconverged: str = "raise"  # "raise" | "keep"

    def __post_init__(self):
        if self.deflation not in ("paper", "projection-only"):
            raise ValueError(f"unknown deflation mode {self.deflation!r}")
        if self.on_nonconverged not in ("raise", "keep"):
            raise ValueError(f"unknown on_nonconverged policy {self.on_nonconverged!r}")


@dataclass
class PecModel:
    """K stacked components fitted at one expectile level."""

    components: list
    tau: float
    p: int
    n: int
    column_ids: list = None
    options: FitOptions = field(default_factory=FitOptions)

    @property
    def k(self):
        return len(self.components)

    def to_dict(self):
        return {
            "tau": self.tau,
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "column_ids": [
                [str(part) for part in c] if isinstance(c, tuple) else str(c)
                for c in self.column_ids
            ],
            "deflation": self.options.deflation,
            "options": {
                "restarts": self.options.restarts,
                "max_iter": self.options.max_iter,
                "seed": self.options.seed,
            },
            "components": [c.to_dict() for c in self.components],
        }


def _center(Y, plus_mask, tau):
    n_plus = int(plus_mask.sum())
    n_minus = Y.shape[1] - n_plus
    denom = tau * n_plus + (1.0 - tau) * n_minus
    return (
        tau * Y[:, plus_mask].sum(axis=1) + (1.0 - tau) * Y[:, ~plus_mask].sum(axis=1)
    ) / denom


def _cov(Y, plus_mask, tau, center):
    n = Y.shape[1]
    Yc = Y - center[:, None]
    w = np.where(plus_mask, tau, 1.0 - tau)
    return (Yc * w) @ Yc.T / n


def weighted_center(Q, part, level):
    """Asymmetrically weighted mean of the columns of Q."""
    tau = check_level(level)
    mask = part.mask(Q.n)
    return _center(Q.data, mask, tau)


def weighted_cov(Q, part, level, center):
    """Asymmetrically weighted sample covariance of the columns of Q about `center`."""
    tau = check_level(level)
    center = np.asarray(center, dtype=float)
    if center.shape != (Q.p,):
        raise ValueError(f"center must have length {Q.p}")
    mask = part.mask(Q.n)
    return _cov(Q.data, mask, tau, center)


def _fix_sign(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def largest_eigenvector(C):
    """Leading eigenpair of a symmetric matrix.

    Ties in the top eigenvalue are resolved deterministically by projecting
    the first standard basis vector with a non-vanishing projection onto the
    top eigenspace; the sign makes the first nonzero coordinate positive.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("C must be square")
    scale = max(1.0, float(np.abs(C).max()))
    if np.abs(C - C.T).max() > 1e-10 * scale:
        raise ValueError("C must be symmetric")
    C = 0.5 * (C + C.T)
    vals, vecs = np.linalg.eigh(C)
    lam = vals[-1]
    top = vals >= lam - 1e-8 * max(1.0, abs(lam))
    V = vecs[:, top]
    if V.shape[1] == 1:
        return _fix_sign(V[:, 0].copy()), float(lam)
    # Degenerate spectrum: pick a canonical representative of the eigenspace.
    for j in range(C.shape[0]):
        v = V @ V[j, :]
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return _fix_sign(v / norm), float(lam)
    return _fix_sign(V[:, -1].copy()), float(lam)


def _expectile_value(s, tau, max_iter):
    try:
        return expectile(s, tau, max_iter=max_iter).value
    except ConvergenceError as err:  # keep going with the last iterate
        return err.last.value


def _orient(Y, phi, tau, max_iter):
    """Pick the sign of phi maximizing the tau-variance of the projection."""
    s = phi @ Y
    obj_plus = asym_loss(s, _expectile_value(s, tau, max_iter), tau) / s.size
    obj_minus = asym_loss(-s, _expectile_value(-s, tau, max_iter), tau) / s.size
    if obj_minus > obj_plus * (1 + 1e-12) + 1e-300:
        return -phi, obj_minus
    if obj_plus > obj_minus * (1 + 1e-12) + 1e-300:
        return phi, obj_plus
    return _fix_sign(phi), obj_plus


def _pc1(Y):
    Yc = Y - Y.mean(axis=1, keepdims=True)
    v, _ = largest_eigenvector(Yc @ Yc.T / Y.shape[1])
    return v


def _fixed_point(Y, tau, phi0, opts):
    """Run the alternating iteration from one starting direction.

    Returns a dict with the fixed point (or, for a cycling run, the
    best-objective iterate) and diagnostics.
    """
    n = Y.shape[1]
    emax = opts.expectile_max_iter
    phi, obj0 = _orient(Y, phi0 / np.linalg.norm(phi0), tau, emax)
    s = phi @ Y
    e = _expectile_value(s, tau, emax)
    plus = s > e
    seen = {plus.tobytes()}
    best = {
        "direction": phi,
        "scores": s,
        "expectile": e,
        "plus": plus,
        "objective": obj0,
    }
    converged = False
    t = 0
    for t in range(1, opts.max_iter + 1):
        center = _center(Y, plus, tau)
        C = _cov(Y, plus, tau, center)
        phi, _ = largest_eigenvector(C)
        phi, obj = _orient(Y, phi, tau, emax)
        s = phi @ Y
        e = _expectile_value(s, tau, emax)
        new_plus = s > e
        if obj > best["objective"]:
            best = {
                "direction": phi,
                "scores": s,
                "expectile": e,
                "plus": new_plus,
                "objective": obj,
            }
        if np.array_equal(new_plus, plus):
            converged = True
            best = {
                "direction": phi,
                "scores": s,
                "expectile": e,
                "plus": new_plus,
                "objective": obj,
            }
            break
        key = new_plus.tobytes()
        if key in seen:
            break
        seen.add(key)
        plus = new_plus
    best["center"] = _center(Y, best["plus"], tau)
    best["iterations"] = t
    best["converged"] = converged
    return best


def pec_first(Q, level, opts=None):
    """First principal expectile component of Q.

    The alternating iteration is started from the classical PCA direction
    plus `opts.restarts` random unit directions; the fixed point with the
    largest attained objective wins. If no start converges, behaviour follows
    `opts.on_nonconverged`: raise ConvergenceError (with the best iterate
    attached as a PecComponent) or keep the best iterate flagged
    converged=False.
    """
    tau = check_level(level)
    opts = opts or FitOptions()
    Y = Q.data
    if np.all(Y == Y[:, :1]):
        raise DegenerateDataError("all columns are identical")
    rng = np.random.default_rng(opts.seed)
    starts = [_pc1(Y)]
    for _ in range(opts.restarts):
        v = rng.standard_normal(Q.p)
        starts.append(v / np.linalg.norm(v))
    runs = [_fixed_point(Y, tau, phi0, opts) for phi0 in starts]
    best = max(runs, key=lambda r: (r["objective"], r["converged"]))
    comp = PecComponent(
        order=1,
        tau=tau,
        direction=best["direction"],
        scores=best["scores"],
        expectile=float(best["expectile"]),
        center=best["center"],
        partition=WeightPartition.from_mask(best["plus"]),
        objective=float(best["objective"]),
        iterations=best["iterations"],
        converged=best["converged"],
    )
    if not any(r["converged"] for r in runs) and opts.on_nonconverged == "raise":
        raise ConvergenceError(
            "no restart reached a fixed point", last=comp
        )
    return comp


def deflate(Q, comp, mode="paper"):
    """Remove a fitted component from Q before fitting the next one.

    "paper" subtracts phi * (phi^T q_i + e_hat), which leaves every residual
    with projection -e_hat on phi; "projection-only" drops the expectile
    shift and removes just the projection.
    """
    if comp.direction.shape != (Q.p,):
        raise ValueError("component dimension does not match matrix")
    s = comp.direction @ Q.data
    shift = s + comp.expectile if mode == "paper" else s
    R = Q.data - np.outer(comp.direction, shift)
    return ProfileMatrix(R, row_grid=Q.row_grid, column_ids=Q.column_ids)


def fit(Q, level, K, opts=None):
    """Fit K principal expectile components by repeated deflation."""
    tau = check_level(level)
    opts = opts or FitOptions()
    if not 1 <= K <= Q.p:
        raise ValueError(f"K must be in 1..{Q.p}, got {K}")
    components = []
    Qk = Q
    for k in range(1, K + 1):
        comp = pec_first(Qk, tau, replace(opts, seed=opts.seed + k - 1))
        comp.order = k
        components.append(comp)
        if k < K:
            Qk = deflate(Qk, comp, mode=opts.deflation)
    return PecModel(
        components=components,
        tau=tau,
        p=Q.p,
        n=Q.n,
        column_ids=list(Q.column_ids),
        options=opts,
    )


def project(model, Q_new):
    """Score new profiles on a fitted model, replaying the stored deflations.

    Returns a K x m matrix whose row k holds the order-(k+1) scores.
    """
    X = np.asarray(Q_new.data if isinstance(Q_new, ProfileMatrix) else Q_new, dtype=float)
    if X.ndim != 2 or X.shape[0] != model.p:
        raise ValueError(f"profiles must have {model.p} rows")
    X = X.copy()
    S = np.empty((model.k, X.shape[1]))
    for k, comp in enumerate(model.components):
        s = comp.direction @ X
        S[k] = s
        if k + 1 < model.k:
            shift = s + comp.expectile if model.options.deflation == "paper" else s
            X -= np.outer(comp.direction, shift)
    return S
