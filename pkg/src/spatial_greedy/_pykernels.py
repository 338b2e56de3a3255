"""Pure NumPy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, and as the
reference the compiled versions are tested against.
"""

import numpy as np
from scipy.spatial.distance import cdist


def se_cross(X, Y, sigma0_sq, length_scale):
    """Squared-exponential covariance between every row of X and every row of Y."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        return np.zeros((X.shape[0], Y.shape[0]))
    sq = cdist(X, Y, "sqeuclidean")
    sq *= -0.5 / (length_scale * length_scale)
    np.exp(sq, out=sq)
    sq *= sigma0_sq
    return sq


def rank1_downdate_rowsq(D, v, w, rowsq):
    """In place: ``D -= outer(v, w)``; ``rowsq[i] = sum_j D[i, j]**2``."""
    D -= np.outer(v, w)
    np.einsum("ij,ij->i", D, D, out=rowsq)


def residual_rowsq(Phi, V, W, rowsq):
    """``rowsq[i] = sum_j (Phi[i, j] - (V.T @ W)[i, j])**2`` without touching Phi."""
    if V.shape[0]:
        D = Phi - V.T @ W
    else:
        D = Phi
    np.einsum("ij,ij->i", D, D, out=rowsq)


def greedy_cliques(adj):
    """Grow one clique from each vertex, admitting vertices in ascending index order.

    Returns a list of sorted index arrays, one per seed (duplicates kept).
    """
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    out = []
    for v in range(n):
        members = [v]
        cand = adj[v].copy()
        cand[v] = False
        while True:
            u = int(np.argmax(cand))
            if not cand[u]:
                break
            members.append(u)
            cand &= adj[u]
            cand[u] = False
        out.append(np.array(sorted(members), dtype=np.intp))
    return out


def se_cross_matvec(X, Y, sigma0_sq, length_scale, w):
    """``se_cross(X, Y) @ w`` in row blocks, never holding the full matrix."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    out = np.empty(X.shape[0])
    block = max(1, 2_000_000 // max(Y.shape[0], 1))
    for start in range(0, X.shape[0], block):
        out[start:start + block] = se_cross(X[start:start + block], Y, sigma0_sq, length_scale) @ w
    return out
