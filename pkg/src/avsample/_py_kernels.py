"""Pure-numpy implementations of the hot kernels.

Drop-in twins of the compiled extension in ``_kernels.pyx``; the active set
is chosen once at import by ``_backend``. Every kernel reduces each segment
(or query) independently in a fixed order, so results are bit-identical for
any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BACKEND_NAME = "python"


def _chunk_bounds(m: int, threads: int) -> list[tuple[int, int]]:
    n_chunks = min(threads, m)
    edges = np.linspace(0, m, n_chunks + 1).astype(np.int64)
    return [(int(edges[i]), int(edges[i + 1])) for i in range(n_chunks) if edges[i] < edges[i + 1]]


def segment_sum(values: np.ndarray, order: np.ndarray, starts: np.ndarray, threads: int = 1) -> np.ndarray:
    """Sum rows of ``values`` per segment.

    ``order`` lists row indices grouped by segment; ``starts`` (length M+1)
    marks each segment's slice in that listing. Rows accumulate in listing
    order within each segment regardless of ``threads``.
    """
    m = starts.shape[0] - 1
    sorted_vals = values[order]
    out = np.empty((m, values.shape[1]), dtype=np.float64)

    def run(g0: int, g1: int) -> None:
        lo, hi = starts[g0], starts[g1]
        idx = starts[g0:g1] - lo
        out[g0:g1] = np.add.reduceat(sorted_vals[lo:hi], idx, axis=0)

    if threads <= 1 or m < 2:
        run(0, m)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run(*b), _chunk_bounds(m, threads)))
    return out


def segment_max(
    values: np.ndarray, order: np.ndarray, starts: np.ndarray, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment columnwise max and the smallest input row attaining it."""
    m = starts.shape[0] - 1
    r, c = values.shape
    sorted_vals = values[order]
    out = np.empty((m, c), dtype=np.float64)
    argrows = np.empty((m, c), dtype=np.int64)

    def run(g0: int, g1: int) -> None:
        lo, hi = starts[g0], starts[g1]
        idx = starts[g0:g1] - lo
        block = sorted_vals[lo:hi]
        maxv = np.maximum.reduceat(block, idx, axis=0)
        lens = np.diff(starts[g0 : g1 + 1])
        spread = np.repeat(maxv, lens, axis=0)
        rows = order[lo:hi, None]
        cand = np.where(block == spread, rows, r)
        out[g0:g1] = maxv
        argrows[g0:g1] = np.minimum.reduceat(cand, idx, axis=0)

    if threads <= 1 or m < 2:
        run(0, m)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run(*b), _chunk_bounds(m, threads)))
    return out, argrows


def fps_select(coords: np.ndarray, m: int, seed_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Greedy max-min selection of m points; ties go to the smallest index.

    Selected entries are held at -1 so the argmax only ever picks unselected
    points (duplicate coordinates would otherwise re-select at distance 0).
    """
    selected = np.empty(m, dtype=np.int64)
    selected[0] = seed_index
    d2 = ((coords - coords[seed_index]) ** 2).sum(axis=1)
    d2[seed_index] = -1.0
    for j in range(1, m):
        i = int(np.argmax(d2))
        selected[j] = i
        np.minimum(d2, ((coords - coords[i]) ** 2).sum(axis=1), out=d2)
        d2[i] = -1.0
    return selected, np.sqrt(np.maximum(d2, 0.0))


def _knn_small(d2: np.ndarray, k: int) -> np.ndarray:
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def _knn_partitioned(d2: np.ndarray, k: int) -> np.ndarray:
    # argpartition is tie-arbitrary at the k-th boundary; rebuild the boundary
    # so equal distances resolve to the smallest reference indices.
    q, n = d2.shape
    ar = np.arange(n, dtype=np.int64)
    part = np.argpartition(d2, k - 1, axis=1)[:, :k]
    boundary = np.take_along_axis(d2, part, axis=1).max(axis=1)

    lt = d2 < boundary[:, None]
    n_lt = lt.sum(axis=1)
    lt_idx = np.where(lt, ar[None, :], n)
    lt_sorted = np.sort(np.partition(lt_idx, k - 1, axis=1)[:, :k], axis=1)

    tie_idx = np.where(d2 == boundary[:, None], ar[None, :], n)
    tie_sorted = np.sort(np.partition(tie_idx, k - 1, axis=1)[:, :k], axis=1)

    pos = np.arange(k, dtype=np.int64)[None, :]
    from_tie = np.take_along_axis(tie_sorted, np.maximum(pos - n_lt[:, None], 0), axis=1)
    sel = np.where(pos < n_lt[:, None], lt_sorted, from_tie)

    inner = np.argsort(np.take_along_axis(d2, sel, axis=1), axis=1, kind="stable")
    return np.take_along_axis(sel, inner, axis=1)


def knn_brute(
    queries: np.ndarray, refs: np.ndarray, k: int, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest references per query, ascending (distance, index)."""
    q, n = queries.shape[0], refs.shape[0]
    idx = np.empty((q, k), dtype=np.int64)
    dist = np.empty((q, k), dtype=np.float64)
    chunk = max(1, int(4e6) // max(n, 1))

    def run(q0: int, q1: int) -> None:
        for c0 in range(q0, q1, chunk):
            c1 = min(c0 + chunk, q1)
            diff = queries[c0:c1, None, :] - refs[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            sel = _knn_small(d2, k) if n <= 4096 else _knn_partitioned(d2, k)
            idx[c0:c1] = sel
            dist[c0:c1] = np.sqrt(np.take_along_axis(d2, sel, axis=1))

    if threads <= 1 or q < 2:
        run(0, q)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run(*b), _chunk_bounds(q, threads)))
    return idx, dist
