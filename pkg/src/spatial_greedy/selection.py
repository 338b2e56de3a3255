"""Cardinality-constrained greedy selection over a finite ground set.

``greedy_select`` runs the plain greedy rule over any ground set;
``grid_greedy`` feeds it a uniform grid over the box and ``centroid_greedy``
feeds it the prediction points plus the centroids of greedy maximal cliques.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .covariance import Box, CovarianceModel, as_points
from .estimation import NumericalError, objective
from .geometry import GridSpec, dedupe_points, make_grid, maximal_clique_centroids

GAIN_FLOOR = 1e-12
# residual cache (|ground set| x |omega| doubles) is kept in memory up to this size
CACHE_BYTES = 512 * 2**20


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    box: Box
    omega: np.ndarray
    budget: int
    model: CovarianceModel

    def __post_init__(self):
        omega = as_points(self.omega, self.box.dim).copy()
        if omega.shape[0] == 0:
            raise ValueError("prediction set must be non-empty")
        if int(self.budget) != self.budget or self.budget < 1:
            raise ValueError(f"budget must be a positive integer, got {self.budget!r}")
        outside = ~self.box.contains(omega)
        if outside.any():
            raise ValueError(f"{int(outside.sum())} prediction point(s) lie outside the box")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "budget", int(self.budget))

    @property
    def dim(self) -> int:
        return self.box.dim

    def to_dict(self) -> dict:
        return {
            "box": {"lo": list(self.box.lo), "hi": list(self.box.hi)},
            "omega": self.omega.tolist(),
            "budget": self.budget,
            "model": self.model.to_dict(),
        }


@dataclass
class SelectionReport:
    method: str
    selected: np.ndarray
    objective: float
    total_mse: float
    gains: list
    ground_set_size: int
    elapsed: float
    rho: int | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "rho": self.rho,
            "selected": np.asarray(self.selected).tolist(),
            "objective": self.objective,
            "total_mse": self.total_mse,
            "gains": list(self.gains),
            "ground_set_size": self.ground_set_size,
            "elapsed": self.elapsed,
            "notes": list(self.notes),
        }


class GreedyEngine:
    """Incremental greedy over a fixed ground set.

    Keeps the whitened cross-covariances ``V`` (rows added one per step),
    ``W`` for the prediction set, the running ``b^T C^{-1} b`` per candidate,
    and, when it fits in ``cache_bytes``, the residual ``D = Phi - V^T W``. A
    step then costs one fused rank-1 update of ``D`` instead of a fresh
    ``O(k |X| |omega|)`` product. Without the cache the row sums of squares
    are updated from ``D w`` for the new row ``w``, which needs one fused
    covariance-vector product over the ground set.
    """

    def __init__(self, model: CovarianceModel, omega, ground_set, max_steps: int,
                 cache_bytes: int = CACHE_BYTES):
        self.model = model
        self.omega = as_points(omega)
        self.X = np.ascontiguousarray(as_points(ground_set, self.omega.shape[1]))
        m, n = self.X.shape[0], self.omega.shape[0]
        if m == 0:
            raise ValueError("ground set must be non-empty")
        self.total_var = model.prior_var + model.noise_var
        self.V = np.zeros((max_steps, m))
        self.W = np.zeros((max_steps, n))
        self.q = np.zeros(m)
        self.rowsq = np.empty(m)
        self.steps = 0
        self.cached = m * n * 8 <= cache_bytes
        if self.cached:
            self.D = kernels.se_cross(self.X, self.omega, model.prior_var, model.length_scale)
            np.einsum("ij,ij->i", self.D, self.D, out=self.rowsq)
        else:
            self.D = None
            self._chunk = max(1, (cache_bytes // 8) // max(n, 1))
            self._refresh_rowsq()

    def _refresh_rowsq(self):
        r = self.steps
        for start in range(0, self.X.shape[0], self._chunk):
            sl = slice(start, start + self._chunk)
            Phi = kernels.se_cross(self.X[sl], self.omega, self.model.prior_var, self.model.length_scale)
            out = np.empty(Phi.shape[0])
            kernels.residual_rowsq(Phi, np.ascontiguousarray(self.V[:r, sl]), self.W[:r], out)
            self.rowsq[sl] = out

    def gains(self) -> np.ndarray:
        denom = self.total_var - self.q
        if np.any(denom <= 0):
            raise NumericalError("non-positive conditional variance during greedy step")
        return self.rowsq / denom

    def add(self, j: int) -> float:
        """Commit ground-set element ``j``; returns the realized gain."""
        r = self.steps
        model = self.model
        l_row = self.V[:r, j].copy()
        diag_sq = self.total_var - self.q[j]
        if diag_sq <= 0:
            raise NumericalError(f"non-positive conditional variance {diag_sq}")
        l_kk = math.sqrt(diag_sq)
        xj = self.X[j:j + 1]
        v_new = (kernels.se_cross(xj, self.X, model.prior_var, model.length_scale)[0] - l_row @ self.V[:r]) / l_kk
        w_new = (kernels.se_cross(xj, self.omega, model.prior_var, model.length_scale)[0] - l_row @ self.W[:r]) / l_kk
        if self.cached:
            kernels.rank1_downdate_rowsq(self.D, v_new, w_new, self.rowsq)
        else:
            Dw = kernels.se_cross_matvec(self.X, self.omega, model.prior_var, model.length_scale, w_new)
            Dw -= (self.W[:r] @ w_new) @ self.V[:r]
            self.rowsq += v_new * (v_new * float(w_new @ w_new) - 2.0 * Dw)
            np.maximum(self.rowsq, 0.0, out=self.rowsq)
        self.V[r] = v_new
        self.W[r] = w_new
        self.q += v_new * v_new
        self.steps = r + 1
        return float(w_new @ w_new)


def greedy_select(instance: ProblemInstance, ground_set, method: str = "custom",
                  rho: int | None = None, cache_bytes: int = CACHE_BYTES) -> SelectionReport:
    """Pick ``instance.budget`` points from ``ground_set`` by maximal marginal gain.

    Selected points stay eligible (a repeat measurement still reduces noise).
    Ties go to the lowest ground-set index. Stops early once the best gain is
    at or below ``GAIN_FLOOR``.
    """
    X = as_points(ground_set, instance.dim)
    if X.shape[0] == 0:
        raise ValueError("ground set must be non-empty")
    t0 = time.perf_counter()
    engine = GreedyEngine(instance.model, instance.omega, X, instance.budget, cache_bytes)
    picks, gains = [], []
    notes = []
    for _ in range(instance.budget):
        g = engine.gains()
        j = int(np.argmax(g))
        if not g[j] > GAIN_FLOOR:
            notes.append(f"stopped early after {len(picks)} picks: best gain {g[j]:.3e}")
            break
        gains.append(engine.add(j))
        picks.append(j)
    elapsed = time.perf_counter() - t0
    return _report(instance, X, picks, gains, method, elapsed, rho, notes)


def _report(instance, X, picks, gains, method, elapsed, rho, notes) -> SelectionReport:
    selected = X[picks] if picks else np.zeros((0, instance.dim))
    obj = objective(instance.model, instance.omega, selected)
    mse = instance.omega.shape[0] * instance.model.prior_var - obj
    return SelectionReport(
        method=method,
        selected=selected,
        objective=obj,
        total_mse=mse,
        gains=[float(g) for g in gains],
        ground_set_size=int(X.shape[0]),
        elapsed=elapsed,
        rho=rho,
        notes=notes,
    )


def matched_rho(n_pred: int) -> int:
    """Grid side giving ``rho**2 >= 2 * n_pred`` points: ``ceil(sqrt(2 n))``."""
    if n_pred < 1:
        raise ValueError("n_pred must be positive")
    rho = math.isqrt(2 * n_pred)
    return rho if rho * rho == 2 * n_pred else rho + 1


def grid_greedy(instance: ProblemInstance, rho: int, **kw) -> SelectionReport:
    spec = GridSpec(rho=rho, box=instance.box)
    t0 = time.perf_counter()
    grid = make_grid(spec)
    setup = time.perf_counter() - t0
    report = greedy_select(instance, grid, method="grid", rho=int(rho), **kw)
    report.elapsed += setup
    return report


def centroid_ground_set(instance: ProblemInstance) -> np.ndarray:
    cents = maximal_clique_centroids(instance.model, instance.omega)
    return dedupe_points(np.vstack([cents, instance.omega]))


def centroid_greedy(instance: ProblemInstance, **kw) -> SelectionReport:
    t0 = time.perf_counter()
    ground = centroid_ground_set(instance)
    setup = time.perf_counter() - t0
    report = greedy_select(instance, ground, method="centroid", **kw)
    report.elapsed += setup
    return report
