"""Elastic-net regression by cyclic coordinate descent.

Minimizes

    (1/2n) ||y - a - X b||^2 + lam * (alpha ||b||_1 + (1-alpha)/2 ||b||_2^2)

with the intercept a left unpenalized. Columns are NOT standardized
internally; the penalty acts on the coefficients as given. The solver
works on centered second moments (Gram form), so a Gram matrix shared
across many responses can be reused via solve_gram.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DomainError, ShapeError

# Tolerances are relative to the problem scale (max of 1, |cross|_inf and
# the largest Gram diagonal). 1e-10 rather than the looser 1e-7 a sweep
# test alone would need: the returned coefficients must agree with the
# normal-equations solution to 1e-8 and a 1e-7 stationarity residual
# cannot certify that.
COEF_TOL = 1e-10
KKT_TOL = 1e-10
MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class PenaltyConfig:
    """Mixing weight alpha in [0, 1] and overall strength lam >= 0."""

    alpha: float
    lam: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (self.lam >= 0.0 and np.isfinite(self.lam)):
            raise ConfigError(f"lam must be finite and >= 0, got {self.lam}")


@dataclass
class ElasticNetFit:
    coefficients: np.ndarray
    intercept: float
    objective: float
    sweeps: int
    converged: bool
    kkt_residual: float
    objective_path: list | None = None


def _soft(z: float, thr: float) -> float:
    if z > thr:
        return z - thr
    if z < -thr:
        return z + thr
    return 0.0


def penalty_value(b: np.ndarray, penalty: PenaltyConfig) -> float:
    """lam * (alpha ||b||_1 + (1-alpha)/2 ||b||_2^2)."""
    l1 = float(np.abs(b).sum())
    l2 = float(b @ b)
    return penalty.lam * (penalty.alpha * l1 + 0.5 * (1.0 - penalty.alpha) * l2)


def _gram_objective(b, gram, cross, y_var, penalty):
    # (1/2n)||y_c - X_c b||^2 expressed through centered moments
    quad = 0.5 * (y_var - 2.0 * float(cross @ b) + float(b @ gram @ b))
    return quad + penalty_value(b, penalty)


def _kkt_residual(b, gram, cross, penalty):
    grad = gram @ b - cross + penalty.lam * (1.0 - penalty.alpha) * b
    thr = penalty.lam * penalty.alpha
    res = 0.0
    for j in range(b.size):
        if b[j] != 0.0:
            res = max(res, abs(grad[j] + thr * np.sign(b[j])))
        else:
            res = max(res, max(0.0, abs(grad[j]) - thr))
    return float(res)


def solve_gram(
    gram: np.ndarray,
    cross: np.ndarray,
    y_var: float,
    penalty: PenaltyConfig,
    tol: float = COEF_TOL,
    max_sweeps: int = MAX_SWEEPS,
    kkt_tol: float = KKT_TOL,
    b0: np.ndarray | None = None,
    track_objective: bool = False,
) -> ElasticNetFit:
    """Coordinate descent on centered moments.

    gram is X_c^T X_c / n, cross is X_c^T y_c / n, y_var is y_c^T y_c / n.
    The returned intercept is 0; callers with uncentered data add it back.
    Exact zeros come from the soft-threshold update. A sweep ends the loop
    only when the coefficient change is below tol AND the subgradient
    residual is below kkt_tol; hitting max_sweeps returns converged=False.
    """
    m = gram.shape[0]
    b = np.zeros(m) if b0 is None else np.array(b0, dtype=float, copy=True)
    thr = penalty.lam * penalty.alpha
    denom = np.diag(gram) + penalty.lam * (1.0 - penalty.alpha)
    scale = max(1.0, float(np.abs(cross).max(initial=0.0)), float(np.diag(gram).max(initial=0.0)))
    tol_eff = tol * scale
    kkt_eff = kkt_tol * scale
    path = [] if track_objective else None
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        delta = 0.0
        for j in range(m):
            bj_old = b[j]
            # partial residual correlation with column j
            g = cross[j] - float(gram[j] @ b) + gram[j, j] * bj_old
            if denom[j] > 0.0:
                bj = _soft(g, thr) / denom[j]
            else:
                bj = 0.0  # degenerate column: no variance and no penalty curvature
            if bj != bj_old:
                b[j] = bj
                delta = max(delta, abs(bj - bj_old))
        if path is not None:
            path.append(_gram_objective(b, gram, cross, y_var, penalty))
        if delta < tol_eff:
            if _kkt_residual(b, gram, cross, penalty) <= kkt_eff:
                converged = True
                break
            # stationarity not yet certified: keep sweeping
    kkt = _kkt_residual(b, gram, cross, penalty)
    obj = _gram_objective(b, gram, cross, y_var, penalty)
    if not np.isfinite(obj):
        raise DomainError("elastic net objective is non-finite")
    return ElasticNetFit(b, 0.0, obj, sweeps, converged, kkt, path)


def solve(
    design: np.ndarray,
    response: np.ndarray,
    penalty: PenaltyConfig,
    tol: float = COEF_TOL,
    max_sweeps: int = MAX_SWEEPS,
    kkt_tol: float = KKT_TOL,
    track_objective: bool = False,
) -> ElasticNetFit:
    """Fit the penalized regression of response on design with an intercept."""
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"design must be 2-d, got shape {x.shape}")
    n = x.shape[0]
    if y.shape != (n,):
        raise ShapeError(f"response must have shape ({n},), got {y.shape}")
    if n < 2:
        raise ShapeError("need at least 2 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("design or response contains non-finite values")
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    xc = x - x_mean
    yc = y - y_mean
    gram = xc.T @ xc / n
    cross = xc.T @ yc / n
    y_var = float(yc @ yc) / n
    fit = solve_gram(gram, cross, y_var, penalty, tol, max_sweeps, kkt_tol,
                     track_objective=track_objective)
    # unpenalized intercept recovered from the centering identity
    fit.intercept = y_mean - float(x_mean @ fit.coefficients)
    return fit


def lambda_max(design: np.ndarray, response: np.ndarray, alpha: float) -> float:
    """Smallest lam at which the all-zero coefficient vector is optimal.

    max_j |x_j^T (y - ybar)| / (n * alpha), using centered columns.
    """
    if alpha <= 0.0:
        raise DomainError("lambda_max needs alpha > 0 (pure ridge never zeroes out)")
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    peak = float(np.abs(xc.T @ yc / n).max())
    lam = peak / alpha
    # nudge up by ulps so lam * alpha >= peak holds in float arithmetic,
    # making "b = 0 at every lam >= lambda_max" exact rather than approximate
    while lam * alpha < peak:
        lam = np.nextafter(lam, np.inf)
    return float(lam)
