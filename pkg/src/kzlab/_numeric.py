"""Small numerical helpers: worker pools, ordered reductions, quadrature nodes."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

# Work is always split into chunks of this many items, independent of the
# worker count, so reductions happen in the same order for any pool size.
CHUNK = 256


def default_workers() -> int:
    env = os.environ.get("KZLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def ordered_map(func, items, workers=None):
    """Map ``func`` over ``items`` and return results in input order."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunked(n: int, size: int = CHUNK):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def pairwise_sum(values) -> complex:
    """Sum a 1-d array by recursive halving (fixed association order)."""
    v = np.asarray(values)
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.concatenate([v, np.zeros(1, dtype=v.dtype)])
        v = v[0::2] + v[1::2]
    return v[0]


def parallel_sum(func, n: int, workers=None) -> complex:
    """Evaluate ``func(slice)`` on fixed chunks of ``range(n)`` and sum.

    ``func`` must return an array of per-item contributions; the reduction
    is pairwise over the concatenated result, so the answer does not depend
    on the number of workers.
    """
    parts = ordered_map(func, chunked(n), workers)
    if not parts:
        return 0.0
    return pairwise_sum(np.concatenate([np.atleast_1d(p) for p in parts]))


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def segment_nodes(a: float, b: float, step: float, order: int = 8):
    """Composite Gauss-Legendre nodes on [a, b] with segments of length <= step."""
    nseg = max(1, int(math.ceil((b - a) / step - 1e-12)))
    edges = np.linspace(a, b, nseg + 1)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def trapezoid_nodes(a: float, b: float, step: float):
    n = max(1, int(math.ceil((b - a) / step - 1e-12)))
    nodes = np.linspace(a, b, n + 1)
    h = (b - a) / n
    weights = np.full(n + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    return nodes, weights
