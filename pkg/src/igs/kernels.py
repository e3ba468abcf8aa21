"""Hot numeric loops: BFS, ball profiles, greedy ball covering, matrix-product
Lyapunov sums.

Every kernel exists twice, as a numba ``@njit`` function and as a pure-numpy
function with the same signature and the same results. The public names at the
bottom dispatch to numba unless it is missing or ``IGS_DISABLE_NUMBA`` is set.
Graphs are passed in CSR form (``indptr``, ``indices``) over the undirected view.
"""
from __future__ import annotations

import heapq

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ._accel import NUMBA_AVAILABLE, njit

# --------------------------------------------------------------------------- numba


@njit(cache=True)
def _nb_bfs(indptr, indices, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1
    return dist


@njit(cache=True)
def _nb_eccentricities(indptr, indices, sources):
    n = indptr.shape[0] - 1
    out = np.empty(sources.shape[0], dtype=np.int32)
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    for s in range(sources.shape[0]):
        src = sources[s]
        dist[src] = 0
        queue[0] = src
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if dist[v] < 0:
                    dist[v] = du
                    queue[tail] = v
                    tail += 1
        out[s] = dist[queue[tail - 1]]
        for i in range(tail):
            dist[queue[i]] = -1
    return out


@njit(cache=True)
def _nb_ball_profile(indptr, indices, rmax):
    n = indptr.shape[0] - 1
    prof = np.zeros((n, rmax + 1), dtype=np.int32)
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    for src in range(n):
        dist[src] = 0
        queue[0] = src
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            if du > rmax:
                continue
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if dist[v] < 0:
                    dist[v] = du
                    queue[tail] = v
                    tail += 1
        for i in range(tail):
            prof[src, dist[queue[i]]] += 1
            dist[queue[i]] = -1
        for r in range(1, rmax + 1):
            prof[src, r] += prof[src, r - 1]
    return prof


@njit(cache=True)
def _nb_ball_count(indptr, indices, src, radius, covered, dist, queue, mark_box):
    # counts uncovered nodes within `radius`; when mark_box >= 0 they are
    # assigned to that box. `dist` is returned all -1.
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        if du > radius:
            continue
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1
    count = 0
    for i in range(tail):
        w = queue[i]
        if covered[w] < 0:
            count += 1
            if mark_box >= 0:
                covered[w] = mark_box
        dist[w] = -1
    return count


@njit(cache=True)
def _nb_heap_push(heap, size, item):
    i = size
    heap[i] = item
    while i > 0:
        parent = (i - 1) // 2
        if heap[parent] <= heap[i]:
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return size + 1


@njit(cache=True)
def _nb_heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and heap[left + 1] < heap[left]:
            child = left + 1
        if heap[i] <= heap[child]:
            break
        heap[i], heap[child] = heap[child], heap[i]
        i = child
    return top, size


@njit(cache=True)
def _nb_vgbc(indptr, indices, radius, init_keys):
    n = indptr.shape[0] - 1
    covered = np.full(n, -1, dtype=np.int32)
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    heap = np.empty(n, dtype=np.int64)
    centers = np.empty(n, dtype=np.int32)
    size = 0
    # key packs (most uncovered first, then smallest id) into one int64
    for v in range(n):
        size = _nb_heap_push(heap, size, np.int64(n - init_keys[v]) * n + v)
    nboxes = 0
    remaining = n
    while remaining > 0:
        item, size = _nb_heap_pop(heap, size)
        v = np.int32(item % n)
        if covered[v] >= 0:
            continue
        c = _nb_ball_count(indptr, indices, v, radius, covered, dist, queue, -1)
        fresh = np.int64(n - c) * n + v
        if size == 0 or fresh <= heap[0]:
            _nb_ball_count(indptr, indices, v, radius, covered, dist, queue, nboxes)
            centers[nboxes] = v
            nboxes += 1
            remaining -= c
        else:
            size = _nb_heap_push(heap, size, fresh)
    return nboxes, covered, centers[:nboxes].copy()


@njit(cache=True)
def _nb_lyapunov_sums(members, idx, x0, burn):
    trials, steps = idx.shape
    k = x0.shape[0]
    out = np.empty(trials, dtype=np.float64)
    x = np.empty(k, dtype=np.float64)
    y = np.empty(k, dtype=np.float64)
    s0 = 0.0
    for i in range(k):
        s0 += x0[i]
    for t in range(trials):
        for i in range(k):
            x[i] = x0[i] / s0
        acc = 0.0
        for s in range(steps):
            m = members[idx[t, s]]
            tot = 0.0
            for j in range(k):
                a = 0.0
                for i in range(k):
                    a += x[i] * m[i, j]
                y[j] = a
                tot += a
            if s >= burn:
                acc += np.log(tot)
            for j in range(k):
                x[j] = y[j] / tot
        out[t] = acc / (steps - burn)
    return out


# --------------------------------------------------------------------------- numpy

_CHUNK = 256  # sources per csgraph call; bounds the dense distance block


def _csgraph(indptr, indices):
    n = indptr.shape[0] - 1
    return csr_matrix((np.ones(indices.shape[0], dtype=np.int8), indices, indptr), shape=(n, n))


def _sp_dist(graph, sources, limit=np.inf):
    """Unweighted hop distances from ``sources`` (rows), ``inf`` beyond ``limit``."""
    return dijkstra(graph, directed=False, unweighted=True, indices=sources, limit=limit)


def _np_bfs(indptr, indices, src):
    d = _sp_dist(_csgraph(indptr, indices), int(src))
    return np.where(np.isinf(d), -1, d).astype(np.int32)


def _np_eccentricities(indptr, indices, sources):
    graph = _csgraph(indptr, indices)
    out = np.empty(len(sources), dtype=np.int32)
    for k in range(0, len(sources), _CHUNK):
        d = _sp_dist(graph, sources[k:k + _CHUNK])
        out[k:k + _CHUNK] = np.where(np.isinf(d), -1, d).max(axis=1)
    return out


def _np_ball_profile(indptr, indices, rmax):
    n = indptr.shape[0] - 1
    graph = _csgraph(indptr, indices)
    prof = np.zeros((n, rmax + 1), dtype=np.int32)
    for k in range(0, n, _CHUNK):
        d = _sp_dist(graph, np.arange(k, min(n, k + _CHUNK)), rmax)
        m = d.shape[0]
        # histogram each row's distances (rmax + 1 collects "farther") in one bincount
        bins = np.where(np.isinf(d), rmax + 1, d).astype(np.int64)
        bins += (rmax + 2) * np.arange(m)[:, None]
        hist = np.bincount(bins.ravel(), minlength=m * (rmax + 2)).reshape(m, rmax + 2)
        prof[k:k + m] = np.cumsum(hist[:, :rmax + 1], axis=1)
    return prof


def _py_ball(indptr, indices, src, radius, seen):
    """Nodes within ``radius`` of ``src``; ``seen`` is scratch and is reset."""
    ball, frontier = [src], [src]
    seen[src] = True
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for v in indices[indptr[u]:indptr[u + 1]]:
                if not seen[v]:
                    seen[v] = True
                    nxt.append(v)
        if not nxt:
            break
        ball += nxt
        frontier = nxt
    for u in ball:
        seen[u] = False
    return ball


def _np_vgbc(indptr, indices, radius, init_keys):
    n = indptr.shape[0] - 1
    covered = np.full(n, -1, dtype=np.int32)
    ptr, nbrs, seen = indptr.tolist(), indices.tolist(), [False] * n
    heap = [(n - int(init_keys[v])) * n + v for v in range(n)]
    heapq.heapify(heap)
    centers = []
    remaining = n
    while remaining > 0:
        item = heapq.heappop(heap)
        v = item % n
        if covered[v] >= 0:
            continue
        ball = np.array(_py_ball(ptr, nbrs, v, radius, seen), dtype=np.int64)
        fresh_nodes = ball[covered[ball] < 0]
        c = fresh_nodes.size
        fresh = (n - c) * n + v
        if not heap or fresh <= heap[0]:
            covered[fresh_nodes] = len(centers)
            centers.append(v)
            remaining -= c
        else:
            heapq.heappush(heap, fresh)
    return len(centers), covered, np.array(centers, dtype=np.int32)


def _np_lyapunov_sums(members, idx, x0, burn):
    trials, steps = idx.shape
    x = np.tile(x0 / x0.sum(), (trials, 1))
    acc = np.zeros(trials)
    for s in range(steps):
        y = np.einsum("ti,tij->tj", x, members[idx[:, s]])
        tot = y.sum(axis=1)
        if s >= burn:
            acc += np.log(tot)
        x = y / tot[:, None]
    return acc / (steps - burn)


# --------------------------------------------------------------------------- dispatch

IMPLEMENTATIONS = {
    "numpy": {
        "bfs": _np_bfs,
        "eccentricities": _np_eccentricities,
        "ball_profile": _np_ball_profile,
        "vgbc": _np_vgbc,
        "lyapunov_sums": _np_lyapunov_sums,
    },
}
if NUMBA_AVAILABLE:
    IMPLEMENTATIONS["numba"] = {
        "bfs": _nb_bfs,
        "eccentricities": _nb_eccentricities,
        "ball_profile": _nb_ball_profile,
        "vgbc": _nb_vgbc,
        "lyapunov_sums": _nb_lyapunov_sums,
    }

_ACTIVE = IMPLEMENTATIONS["numba" if NUMBA_AVAILABLE else "numpy"]


def bfs(indptr, indices, src):
    """Hop distances from ``src``; -1 for unreachable nodes."""
    return _ACTIVE["bfs"](indptr, indices, src)


def eccentricities(indptr, indices, sources):
    return _ACTIVE["eccentricities"](indptr, indices, np.asarray(sources, dtype=np.int64))


def ball_profile(indptr, indices, rmax):
    """``prof[v, r]`` = number of nodes within distance ``r`` of ``v``."""
    return _ACTIVE["ball_profile"](indptr, indices, int(rmax))


def vgbc(indptr, indices, radius, init_keys):
    """Lazy volume-greedy ball covering.

    ``init_keys[v]`` must upper-bound the uncovered ball size of ``v``. Returns
    ``(n_boxes, box_of_node, centers)``; the chosen centers are exactly those
    of the eager greedy rule (max uncovered count, ties to the smallest id).
    """
    return _ACTIVE["vgbc"](indptr, indices, int(radius), np.asarray(init_keys, dtype=np.int64))


def lyapunov_sums(members, idx, x0, burn=0):
    """Per-trial mean log l1 growth factor of ``x0 @ X_idx[0] @ X_idx[1] ...``,
    averaged over the steps after the first ``burn``."""
    return _ACTIVE["lyapunov_sums"](
        np.ascontiguousarray(members, dtype=np.float64),
        np.ascontiguousarray(idx, dtype=np.int64),
        np.asarray(x0, dtype=np.float64),
        int(burn),
    )
