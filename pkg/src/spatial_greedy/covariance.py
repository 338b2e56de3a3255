"""Squared-exponential covariance and covariance assembly between point sets.

Point sets are ``(n, d)`` float arrays throughout the package; a single point
may be passed as a length-``d`` vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class CovarianceModel:
    """Kernel hyperparameters plus measurement-noise variance.

    Parameters
    ----------
    sigma0 : float
        Field standard deviation; the prior variance is ``sigma0**2``.
    length_scale : float
        Length scale ``L`` of the squared-exponential kernel.
    noise_var : float
        Variance of the (uncorrelated) measurement noise.
    """

    sigma0: float
    length_scale: float
    noise_var: float

    def __post_init__(self):
        for name in ("sigma0", "length_scale", "noise_var"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def prior_var(self) -> float:
        return self.sigma0 * self.sigma0

    @property
    def edge_threshold(self) -> float:
        """Separation below which two prediction points share an edge (sqrt(2) * L)."""
        return math.sqrt(2.0) * self.length_scale

    def to_dict(self) -> dict:
        return {"sigma0": self.sigma0, "length_scale": self.length_scale, "noise_var": self.noise_var}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` of measurement locations."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be non-empty and of equal length")
        if any(not (math.isfinite(a) and math.isfinite(b)) for a, b in zip(lo, hi)):
            raise ValueError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box lower corner {lo} exceeds upper corner {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def square(cls, side: float, dim: int = 2) -> "Box":
        return cls((0.0,) * dim, (float(side),) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    def contains(self, points, atol: float = 1e-9) -> np.ndarray:
        pts = as_points(points, self.dim)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((pts >= lo - atol) & (pts <= hi + atol), axis=1)


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite ``(n, d)`` float array, checking ``d`` when given.

    >>> as_points([0.0, 0.5]).shape
    (2, 1)
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        # a flat vector is a set of 1-D points unless it matches a known d > 1
        arr = arr.reshape(1, -1) if dim is not None and dim > 1 and arr.size == dim else arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[0] and arr.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def se_cov(model: CovarianceModel, r):
    """``sigma0**2 * exp(-r**2 / (2 L**2))``; accepts scalars or arrays of distances."""
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0) or not np.all(np.isfinite(r_arr)):
        raise ValueError("distance must be finite and non-negative")
    out = model.prior_var * np.exp(-(r_arr * r_arr) / (2.0 * model.length_scale**2))
    return float(out) if out.ndim == 0 else out


def cross_cov(model: CovarianceModel, X, Y) -> np.ndarray:
    """Covariance matrix between point sets X (rows) and Y (columns)."""
    X = as_points(X)
    Y = as_points(Y, X.shape[1] if X.shape[0] else None)
    if X.shape[0] and Y.shape[0] and X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return kernels.se_cross(X, Y, model.prior_var, model.length_scale)


def cov_vector(model: CovarianceModel, x, S) -> np.ndarray:
    """Covariances between the point ``x`` and each point of ``S``, in order."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return np.zeros(0)
    S = as_points(S, x.size)
    return cross_cov(model, x.reshape(1, -1), S)[0]


def cov_matrix(model: CovarianceModel, S) -> np.ndarray:
    """Noisy covariance ``C(S)``: kernel matrix plus ``noise_var`` on the diagonal."""
    S = as_points(S)
    if S.shape[0] == 0:
        raise ValueError("cov_matrix needs at least one point")
    C = cross_cov(model, S, S)
    # mirror the upper triangle so the result is exactly symmetric
    iu = np.triu_indices(S.shape[0], 1)
    C[(iu[1], iu[0])] = C[iu]
    C[np.diag_indices_from(C)] = model.prior_var + model.noise_var
    return C
