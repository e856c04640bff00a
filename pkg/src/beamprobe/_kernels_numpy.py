"""Pure-numpy fallback kernels, same contracts as :mod:`_kernels_numba`."""

import numpy as np

BACKEND_NAME = "numpy"

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_M1 = 0xBF58476D1CE4E5B9
_SPLITMIX_M2 = 0x94D049BB133111EB


def levenshtein_costs(a, b):
    """Full (len(a)+1) x (len(b)+1) cost matrix for unit-cost edits.

    Rows are computed with vectorized numpy; the in-row insert dependency is
    resolved with the running-minimum identity
    ``out[i, j] = j + min_{k <= j}(base[k] - k)``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    la = a.shape[0]
    lb = b.shape[0]
    out = np.empty((la + 1, lb + 1), dtype=np.int32)
    cols = np.arange(lb + 1, dtype=np.int32)
    out[0] = cols
    base = np.empty(lb + 1, dtype=np.int32)
    for i in range(1, la + 1):
        prev = out[i - 1]
        base[0] = i
        np.minimum(prev[:-1] + (a[i - 1] != b), prev[1:] + 1, out=base[1:])
        out[i] = np.minimum.accumulate(base - cols) + cols
    return out


def edit_distance(a, b):
    """Unit-cost edit distance."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] == 0:
        return int(b.shape[0])
    if b.shape[0] == 0:
        return int(a.shape[0])
    return int(levenshtein_costs(a, b)[a.shape[0], b.shape[0]])


def pairwise_sq_distances(x):
    """Dense matrix of squared euclidean distances between rows of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def gaussian_conditional_probs(d2, target_perplexity, tol=1e-5, max_iter=200):
    """Per-point Gaussian conditional distributions calibrated by bisection.

    Same contract as the numba twin: returns ``(p, betas)`` with row
    perplexities within ``tol`` of ``target_perplexity`` where reachable.
    """
    d2 = np.asarray(d2, dtype=np.float64)
    n = d2.shape[0]
    p = np.zeros((n, n), dtype=np.float64)
    betas = np.empty(n, dtype=np.float64)
    target_h = np.log2(target_perplexity)
    for i in range(n):
        di = np.delete(d2[i], i)
        beta = 1.0
        beta_lo = -1.0
        beta_hi = -1.0
        row = None
        for _ in range(max_iter):
            row = np.exp(-di * beta)
            s = row.sum()
            if s > 0.0:
                q = row / s
                nz = q > 0.0
                h = -np.sum(q[nz] * np.log2(q[nz]))
            else:
                h = 0.0
            if abs(2.0 ** h - target_perplexity) <= tol:
                break
            if h > target_h:
                beta_lo = beta
                beta = beta * 2.0 if beta_hi < 0.0 else (beta_lo + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = beta / 2.0 if beta_lo < 0.0 else (beta_lo + beta_hi) / 2.0
        row = np.exp(-di * beta)
        s = row.sum()
        if s > 0.0:
            cond = row / s
        else:
            cond = row
        p[i, :i] = cond[:i]
        p[i, i + 1:] = cond[i:]
        betas[i] = beta
    return p, betas


def tsne_kl_grad(p, y):
    """KL divergence and gradient of the Student-t embedding objective."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    d2 = pairwise_sq_distances(y)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    total = num.sum()
    q = np.maximum(num / total, 1e-12)
    mask = ~np.eye(n, dtype=bool) & (p > 1e-300)
    kl = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    pq_num = (p - q) * num
    np.fill_diagonal(pq_num, 0.0)
    grad = 4.0 * (np.diag(pq_num.sum(axis=1)) @ y - pq_num @ y)
    return kl, grad


def _splitmix64_next(state):
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SPLITMIX_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SPLITMIX_M2) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def perm_abs_exceed_count(rx_c, ry_c, abs_obs, denom, n_perm, seed):
    """Count permutations whose |correlation| reaches the observed value.

    Bit-compatible with the numba backend: identical splitmix64 shuffle
    stream, identical accumulation order.
    """
    rx_c = np.asarray(rx_c, dtype=np.float64)
    buf = np.array(ry_c, dtype=np.float64)
    n = buf.shape[0]
    state = int(seed) & _MASK64
    count = 0
    for _ in range(int(n_perm)):
        for i in range(n - 1, 0, -1):
            state, z = _splitmix64_next(state)
            j = z % (i + 1)
            buf[i], buf[j] = buf[j], buf[i]
        s = 0.0
        for i in range(n):
            s += rx_c[i] * buf[i]
        rho = s / denom
        if abs(rho) >= abs_obs:
            count += 1
    return count
