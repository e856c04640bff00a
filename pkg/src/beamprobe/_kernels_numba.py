"""Numba-jitted hot kernels.

Import this module only through :mod:`beamprobe._accel`, which falls back to
the pure-numpy twin in :mod:`beamprobe._kernels_numpy` when numba is missing
or disabled via ``BEAMPROBE_DISABLE_NUMBA``.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLITMIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SPLITMIX_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def fill_cost_matrix(a, b, out):
    """Fill ``out[:len(a)+1, :len(b)+1]`` with unit-cost edit distances.

    ``out[i, j]`` is the Levenshtein distance between ``a[:i]`` and ``b[:j]``.
    Returns the full distance ``out[len(a), len(b)]``.
    """
    la = a.shape[0]
    lb = b.shape[0]
    for j in range(lb + 1):
        out[0, j] = j
    for i in range(1, la + 1):
        out[i, 0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            c = out[i - 1, j - 1]
            if ai != b[j - 1]:
                c += 1
            d = out[i - 1, j] + 1
            if d < c:
                c = d
            e = out[i, j - 1] + 1
            if e < c:
                c = e
            out[i, j] = c
    return out[la, lb]


@njit(cache=True)
def _levenshtein_costs(a, b):
    out = np.empty((a.shape[0] + 1, b.shape[0] + 1), dtype=np.int32)
    fill_cost_matrix(a, b, out)
    return out


def levenshtein_costs(a, b):
    """Full (len(a)+1) x (len(b)+1) cost matrix for unit-cost edits."""
    return _levenshtein_costs(a, b)


@njit(cache=True)
def _edit_distance(a, b):
    la = a.shape[0]
    lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.empty(lb + 1, dtype=np.int32)
    cur = np.empty(lb + 1, dtype=np.int32)
    for j in range(lb + 1):
        prev[j] = j
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            c = prev[j - 1]
            if ai != b[j - 1]:
                c += 1
            d = prev[j] + 1
            if d < c:
                c = d
            e = cur[j - 1] + 1
            if e < c:
                c = e
            cur[j] = c
        tmp = prev
        prev = cur
        cur = tmp
    return prev[lb]


def edit_distance(a, b):
    """Unit-cost edit distance without materializing the cost matrix."""
    return int(_edit_distance(a, b))


@njit(cache=True)
def _pairwise_sq_distances(x):
    n = x.shape[0]
    d = x.shape[1]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                s += diff * diff
            out[i, j] = s
            out[j, i] = s
    return out


def pairwise_sq_distances(x):
    """Dense matrix of squared euclidean distances between rows of ``x``."""
    return _pairwise_sq_distances(np.ascontiguousarray(x, dtype=np.float64))


@njit(cache=True)
def _gaussian_conditional_probs(d2, target_perplexity, tol, max_iter):
    n = d2.shape[0]
    p = np.zeros((n, n), dtype=np.float64)
    betas = np.empty(n, dtype=np.float64)
    target_h = np.log2(target_perplexity)
    row = np.empty(n, dtype=np.float64)
    for i in range(n):
        beta = 1.0
        beta_lo = -1.0
        beta_hi = -1.0
        for _ in range(max_iter):
            # conditional distribution over j != i at this precision
            s = 0.0
            for j in range(n):
                if j == i:
                    row[j] = 0.0
                else:
                    v = np.exp(-d2[i, j] * beta)
                    row[j] = v
                    s += v
            h = 0.0
            if s > 0.0:
                for j in range(n):
                    if j != i and row[j] > 0.0:
                        pj = row[j] / s
                        h -= pj * np.log2(pj)
            diff = h - target_h
            if abs(2.0 ** h - target_perplexity) <= tol:
                break
            if diff > 0.0:
                # too flat: raise precision
                beta_lo = beta
                if beta_hi < 0.0:
                    beta *= 2.0
                else:
                    beta = (beta_lo + beta_hi) / 2.0
            else:
                beta_hi = beta
                if beta_lo < 0.0:
                    beta /= 2.0
                else:
                    beta = (beta_lo + beta_hi) / 2.0
        s = 0.0
        for j in range(n):
            if j == i:
                row[j] = 0.0
            else:
                v = np.exp(-d2[i, j] * beta)
                row[j] = v
                s += v
        for j in range(n):
            if j != i and s > 0.0:
                p[i, j] = row[j] / s
        betas[i] = beta
    return p, betas


def gaussian_conditional_probs(d2, target_perplexity, tol=1e-5, max_iter=200):
    """Per-point Gaussian conditional distributions calibrated by bisection.

    Returns ``(p, betas)`` where row ``i`` of ``p`` is the conditional
    distribution over neighbors of point ``i`` whose perplexity (2**entropy)
    matches ``target_perplexity`` within ``tol``, and ``betas`` holds the
    fitted precisions ``1 / (2 * sigma_i**2)``.
    """
    return _gaussian_conditional_probs(
        np.ascontiguousarray(d2, dtype=np.float64),
        float(target_perplexity),
        float(tol),
        int(max_iter),
    )


@njit(cache=True)
def _tsne_kl_grad(p, y):
    n = y.shape[0]
    num = np.zeros((n, n), dtype=np.float64)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = y[i, 0] - y[j, 0]
            dy = y[i, 1] - y[j, 1]
            v = 1.0 / (1.0 + dx * dx + dy * dy)
            num[i, j] = v
            num[j, i] = v
            total += 2.0 * v
    kl = 0.0
    grad = np.zeros((n, 2), dtype=np.float64)
    eps = 1e-300
    for i in range(n):
        gx = 0.0
        gy = 0.0
        for j in range(n):
            if j == i:
                continue
            q = num[i, j] / total
            if q < 1e-12:
                q = 1e-12
            pij = p[i, j]
            if pij > eps:
                kl += pij * np.log(pij / q)
            m = (pij - q) * num[i, j]
            gx += m * (y[i, 0] - y[j, 0])
            gy += m * (y[i, 1] - y[j, 1])
        grad[i, 0] = 4.0 * gx
        grad[i, 1] = 4.0 * gy
    return kl, grad


def tsne_kl_grad(p, y):
    """KL divergence and gradient of the Student-t embedding objective."""
    return _tsne_kl_grad(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
    )


@njit(cache=True, inline="always")
def _splitmix64_next(state):
    state = state + _SPLITMIX_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _SPLITMIX_M1
    z = (z ^ (z >> np.uint64(27))) * _SPLITMIX_M2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _perm_abs_exceed_count(rx_c, ry_c, abs_obs, denom, n_perm, seed):
    n = rx_c.shape[0]
    buf = ry_c.copy()
    state = np.uint64(seed)
    count = 0
    for _ in range(n_perm):
        # Fisher-Yates on buf
        for i in range(n - 1, 0, -1):
            state, z = _splitmix64_next(state)
            j = int(z % np.uint64(i + 1))
            tmp = buf[i]
            buf[i] = buf[j]
            buf[j] = tmp
        s = 0.0
        for i in range(n):
            s += rx_c[i] * buf[i]
        rho = s / denom
        if abs(rho) >= abs_obs:
            count += 1
    return count


def perm_abs_exceed_count(rx_c, ry_c, abs_obs, denom, n_perm, seed):
    """Count permutations whose |correlation| reaches the observed value.

    ``rx_c`` and ``ry_c`` are centered rank vectors; ``denom`` is the product
    of their norms. The shuffle stream comes from a splitmix64 generator so
    the numba and numpy backends count identically for the same seed.
    """
    return int(
        _perm_abs_exceed_count(
            np.ascontiguousarray(rx_c, dtype=np.float64),
            np.ascontiguousarray(ry_c, dtype=np.float64),
            float(abs_obs),
            float(denom),
            int(n_perm),
            np.uint64(seed),
        )
    )
