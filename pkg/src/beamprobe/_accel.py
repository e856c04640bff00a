"""Kernel backend selection.

The hot numeric kernels ship in two flavors: numba-jitted
(:mod:`beamprobe._kernels_numba`) and pure numpy
(:mod:`beamprobe._kernels_numpy`). The numba flavor is used when numba
imports cleanly and the environment variable ``BEAMPROBE_DISABLE_NUMBA`` is
unset/falsy. Both flavors implement the same function contracts;
``benchmarks/bench_kernels.py`` compares them head to head.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_disabled() -> bool:
    return os.environ.get("BEAMPROBE_DISABLE_NUMBA", "").strip().lower() not in _FALSY


if not _numba_disabled():
    try:
        from . import _kernels_numba as _impl
    except ImportError:  # pragma: no cover - exercised only without numba
        from . import _kernels_numpy as _impl
else:
    from . import _kernels_numpy as _impl

BACKEND = _impl.BACKEND_NAME

levenshtein_costs = _impl.levenshtein_costs
edit_distance = _impl.edit_distance
pairwise_sq_distances = _impl.pairwise_sq_distances
gaussian_conditional_probs = _impl.gaussian_conditional_probs
tsne_kl_grad = _impl.tsne_kl_grad
perm_abs_exceed_count = _impl.perm_abs_exceed_count
