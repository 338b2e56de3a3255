"""Variance-reduction objective and incremental marginal gains.

For a measurement set ``S`` and prediction point ``y`` the variance reduction
is ``f_y(S) = b_y(S)^T C(S)^{-1} b_y(S)``; the objective is the sum over the
prediction set. All solves go through a Cholesky factor of ``C(S)``.

The incremental gain of a candidate ``x`` given ``A`` is::

    T_x * sum_y (R_xy - phi(|x - y|))**2
    T_x  = 1 / (sigma0**2 + noise_var - b_x^T C^{-1} b_x)
    R_xy = b_x^T C^{-1} b_y

With ``V = L^{-1} B_X`` and ``W = L^{-1} B_Omega`` (``L`` the Cholesky factor),
``b_x^T C^{-1} b_x`` is the squared column norm of ``V`` and ``R = V^T W``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from . import kernels
from .covariance import CovarianceModel, as_points, cov_matrix, cross_cov

# candidate rows per chunk in sweeps, keeps the (chunk, |Omega|) temporaries bounded
_SWEEP_CHUNK_ELEMS = 4_000_000


class NumericalError(ArithmeticError):
    """A covariance quantity that must be positive was not (a broken state)."""


def _chol(C: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("covariance matrix is not positive definite") from exc


def variance_reduction_single(model: CovarianceModel, y, S) -> float:
    """Variance reduction at one prediction point; 0 for an empty ``S``."""
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return 0.0
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    S = as_points(S, y.size)
    b = cross_cov(model, S, y.reshape(1, -1))[:, 0]
    factor = cho_factor(cov_matrix(model, S), lower=True)
    return float(b @ cho_solve(factor, b))


def objective(model: CovarianceModel, omega, S) -> float:
    """Total variance reduction ``f(S)`` over the prediction set ``omega``."""
    omega = as_points(omega)
    if omega.shape[0] == 0:
        raise ValueError("prediction set must be non-empty")
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return 0.0
    S = as_points(S, omega.shape[1])
    L = _chol(cov_matrix(model, S))
    W = solve_triangular(L, cross_cov(model, S, omega), lower=True, check_finite=False)
    return float(np.einsum("ij,ij->", W, W))


def total_mse(model: CovarianceModel, omega, S) -> float:
    """Sum of a-priori mean-squared errors: ``|omega| * sigma0**2 - f(S)``."""
    omega = as_points(omega)
    return omega.shape[0] * model.prior_var - objective(model, omega, S)


@dataclass(frozen=True)
class MarginalGainTerms:
    """``t_x`` and the vector ``r_xy`` over the prediction set for one candidate."""

    t_x: float
    r_xy: np.ndarray

    def __post_init__(self):
        if not self.t_x > 0:
            raise NumericalError(f"t_x must be positive, got {self.t_x}")


@dataclass(frozen=True, eq=False)
class SelectionState:
    """Chosen points with a cached Cholesky factor of ``C(points)``.

    Attributes
    ----------
    model, omega
        The covariance model and prediction set the state is bound to.
    points : (k, d) array
        Selected locations in selection order (repeats allowed).
    chol : (k, k) array
        Lower Cholesky factor of ``cov_matrix(points)``.
    pred_cross : (k, |omega|) array
        Columns ``b_y(points)`` for every prediction point ``y``.
    pred_white : (k, |omega|) array
        ``chol^{-1} @ pred_cross``; its squared column norms are the ``f_y``.
    objective : float
        Current ``f(points)``.
    """

    model: CovarianceModel
    omega: np.ndarray
    points: np.ndarray
    chol: np.ndarray
    pred_cross: np.ndarray
    pred_white: np.ndarray
    objective: float = 0.0

    def __post_init__(self):
        for arr in (self.omega, self.points, self.chol, self.pred_cross, self.pred_white):
            arr.setflags(write=False)

    @classmethod
    def empty(cls, model: CovarianceModel, omega) -> "SelectionState":
        omega = as_points(omega).copy()
        if omega.shape[0] == 0:
            raise ValueError("prediction set must be non-empty")
        n, d = omega.shape
        return cls(
            model=model,
            omega=omega,
            points=np.zeros((0, d)),
            chol=np.zeros((0, 0)),
            pred_cross=np.zeros((0, n)),
            pred_white=np.zeros((0, n)),
            objective=0.0,
        )

    @classmethod
    def from_points(cls, model: CovarianceModel, omega, S) -> "SelectionState":
        """Batch construction; the reference the incremental path must agree with."""
        state = cls.empty(model, omega)
        S = np.asarray(S, dtype=np.float64)
        if S.size == 0:
            return state
        S = as_points(S, state.dim).copy()
        L = _chol(cov_matrix(model, S))
        B = cross_cov(model, S, state.omega)
        W = solve_triangular(L, B, lower=True, check_finite=False)
        return cls(model, state.omega, S, L, B, W, float(np.einsum("ij,ij->", W, W)))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.omega.shape[1]

    def whiten(self, B: np.ndarray) -> np.ndarray:
        """``chol^{-1} @ B`` for a ``(k, m)`` cross-covariance block."""
        if self.size == 0:
            return np.zeros((0, B.shape[1]))
        return solve_triangular(self.chol, B, lower=True, check_finite=False)

    def total_mse(self) -> float:
        return self.omega.shape[0] * self.model.prior_var - self.objective


def marginal_gain_terms(state: SelectionState, x) -> MarginalGainTerms:
    x = as_points(np.atleast_1d(np.asarray(x, dtype=np.float64)), state.dim)
    v = state.whiten(cross_cov(state.model, state.points, x))[:, 0]
    denom = state.model.prior_var + state.model.noise_var - float(v @ v)
    if denom <= 0:
        raise NumericalError(f"non-positive conditional variance {denom}")
    return MarginalGainTerms(t_x=1.0 / denom, r_xy=v @ state.pred_white)


def marginal_gain_sweep(state: SelectionState, candidates) -> np.ndarray:
    """``f(A + {x}) - f(A)`` for every candidate row, without refactorizing ``C``."""
    X = as_points(candidates, state.dim)
    if X.shape[0] == 0:
        raise ValueError("candidate set must be non-empty")
    model = state.model
    n = state.omega.shape[0]
    m = X.shape[0]
    gains = np.empty(m)
    chunk = max(1, _SWEEP_CHUNK_ELEMS // max(n, 1))
    for start in range(0, m, chunk):
        Xc = X[start:start + chunk]
        V = state.whiten(cross_cov(model, state.points, Xc))
        denom = model.prior_var + model.noise_var - np.einsum("ij,ij->j", V, V)
        if np.any(denom <= 0):
            raise NumericalError("non-positive conditional variance in sweep")
        rowsq = np.empty(Xc.shape[0])
        Phi = cross_cov(model, Xc, state.omega)
        kernels.residual_rowsq(Phi, np.ascontiguousarray(V), np.ascontiguousarray(state.pred_white), rowsq)
        gains[start:start + chunk] = rowsq / denom
    return gains


def extend(state: SelectionState, x) -> SelectionState:
    """Append one point: O(k^2) factor update plus O(k |omega|) for the cached rows."""
    model = state.model
    x = as_points(np.atleast_1d(np.asarray(x, dtype=np.float64)), state.dim)
    k = state.size
    b_x = cross_cov(model, state.points, x)[:, 0]
    l_row = state.whiten(b_x[:, None])[:, 0]
    diag_sq = model.prior_var + model.noise_var - float(l_row @ l_row)
    if diag_sq <= 0:
        raise NumericalError(f"non-positive conditional variance {diag_sq}")
    l_kk = np.sqrt(diag_sq)

    L = np.zeros((k + 1, k + 1))
    L[:k, :k] = state.chol
    L[k, :k] = l_row
    L[k, k] = l_kk

    phi = cross_cov(model, x, state.omega)[0]
    w_new = (phi - l_row @ state.pred_white) / l_kk
    gain = float(w_new @ w_new)
    return SelectionState(
        model=model,
        omega=state.omega,
        points=np.vstack([state.points, x]),
        chol=L,
        pred_cross=np.vstack([state.pred_cross, phi]),
        pred_white=np.vstack([state.pred_white, w_new]),
        objective=state.objective + gain,
    )
