"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version.  The public names at the bottom of the module point at one or the
other; set ``WEAVELAB_DISABLE_NUMBA=1`` to force the numpy path (also used
automatically when numba cannot be imported).  Both paths must return
identical results, which the test suite checks.
"""
import os
from collections import deque

import numpy as np

try:
    import numba
    from numba import njit, prange
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
else:
    # the built-in layer is always present and skips the TBB version probe
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "workqueue"

_DISABLE = os.environ.get("WEAVELAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = numba is not None and not _DISABLE
BACKEND = "numba" if USE_NUMBA else "numpy"

_ONE = np.uint64(1)


def pack_rows(mat):
    """Pack a boolean (n, m) matrix into (n, ceil(m/64)) uint64 words, bit j = column j."""
    mat = np.ascontiguousarray(mat, dtype=bool)
    n, m = mat.shape
    words = max(1, (m + 63) // 64)
    packed = np.packbits(mat, axis=1, bitorder="little")
    out = np.zeros((n, words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view("<u8").astype(np.uint64, copy=False).reshape(n, words)


# ---------------------------------------------------------------- numpy path


def _lowbit_index_np(w):
    low = w & (~w + _ONE)
    return np.log2(low.astype(np.float64)).astype(np.int64)


def corner_table_np(bits, order):
    """Unique-minimum table over packed bound sets.

    ``bits[x]`` holds the bound set of ``x`` (up-set for joins) in rank
    coordinates, i.e. bit ``r`` stands for element ``order[r]`` and ``order``
    is a linear extension in which minima of bound sets come first.
    Returns an int32 (n, n) table with -1 where no unique minimum exists.
    """
    n, _ = bits.shape
    out = np.full((n, n), -1, dtype=np.int32)
    for a in range(n):
        common = bits[a] & bits
        nz = common != 0
        has = nz.any(axis=1)
        rows = np.nonzero(has)[0]
        if rows.size == 0:
            continue
        k = nz[rows].argmax(axis=1)
        w = common[rows, k]
        cand = order[k * 64 + _lowbit_index_np(w)]
        ok = (bits[cand] == common[rows]).all(axis=1)
        out[a, rows[ok]] = cand[ok]
    return out


def cover_matrix_np(up_bits, down_bits):
    """Boolean cover matrix from packed strict up/down sets (natural coordinates)."""
    n, _ = up_bits.shape
    cov = np.zeros((n, n), dtype=bool)
    for a in range(n):
        ups = up_bits[a]
        if not ups.any():
            continue
        cand = np.nonzero(np.unpackbits(ups.view(np.uint8), bitorder="little")[:n])[0]
        between = (down_bits[cand] & ups).any(axis=1)
        cov[a, cand[~between]] = True
    return cov


def woven_witness_np(join, meet, member):
    """First pair (i, j) of members with neither corner a member, else (-1, -1)."""
    idx = np.nonzero(member)[0]
    if idx.size < 2:
        return -1, -1
    ext = np.append(member, False)
    jn = join[np.ix_(idx, idx)]
    mt = meet[np.ix_(idx, idx)]
    bad = ~(ext[jn] | ext[mt])
    hits = np.argwhere(np.triu(bad, 1))
    if hits.size == 0:
        return -1, -1
    i, j = hits[0]
    return int(idx[i]), int(idx[j])


def woven_mask_table_np(join, meet):
    """Wovenness flag for every subset mask of an n-element lattice."""
    n = join.shape[0]
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.ones(1 << n, dtype=bool)
    bit = [(masks >> i) & 1 for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            both = (bit[i] & bit[j]).astype(bool)
            ok = np.zeros(1 << n, dtype=bool)
            if join[i, j] >= 0:
                ok |= bit[join[i, j]].astype(bool)
            if meet[i, j] >= 0:
                ok |= bit[meet[i, j]].astype(bool)
            out &= ~both | ok
    return out


def unravel_table_np(woven):
    """``table[mask]`` is True iff ``mask`` admits a full unravelling inside ``woven``."""
    size = woven.shape[0]
    n = size.bit_length() - 1
    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for i in range(n):
        pop += (masks >> i) & 1
    table = np.zeros(size, dtype=bool)
    table[0] = bool(woven[0])
    for k in range(1, n + 1):
        layer = masks[pop == k]
        reach = np.zeros(layer.size, dtype=bool)
        for i in range(n):
            has = ((layer >> i) & 1).astype(bool)
            reach |= has & table[layer ^ (1 << i)]
        table[layer] = reach & woven[layer]
    return table


def girth_np(indptr, indices):
    """Shortest cycle length of a simple graph in CSR form; -1 for forests."""
    n = indptr.shape[0] - 1
    best = -1
    for root in range(n):
        dist = [-1] * n
        parent = [-1] * n
        dist[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if best >= 0 and 2 * dist[u] + 1 >= best:
                break
            for p in range(indptr[u], indptr[u + 1]):
                v = int(indices[p])
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif v != parent[u]:
                    length = dist[u] + dist[v] + 1
                    if best < 0 or length < best:
                        best = length
    return best


def short_cycle_edges_np(indptr, indices, g):
    """Per BFS root, a closing edge of a cycle of length <= g within radius g // 2.

    Returns an (n, 2) int64 array, rows of -1 where the root sees no such cycle.
    """
    n = indptr.shape[0] - 1
    out = np.full((n, 2), -1, dtype=np.int64)
    depth = g // 2
    for root in range(n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            hit = False
            for p in range(indptr[u], indptr[u + 1]):
                v = int(indices[p])
                if v not in dist:
                    if dist[u] < depth:
                        dist[v] = dist[u] + 1
                        parent[v] = u
                        queue.append(v)
                elif v != parent[u] and dist[u] + dist[v] + 1 <= g:
                    out[root] = (u, v)
                    hit = True
                    break
            if hit:
                break
    return out


# ---------------------------------------------------------------- numba path

if numba is not None:

    @njit(cache=True, inline="always")
    def _ctz(w):
        k = 0
        if (w & np.uint64(0xFFFFFFFF)) == 0:
            w >>= np.uint64(32)
            k += 32
        if (w & np.uint64(0xFFFF)) == 0:
            w >>= np.uint64(16)
            k += 16
        if (w & np.uint64(0xFF)) == 0:
            w >>= np.uint64(8)
            k += 8
        if (w & np.uint64(0xF)) == 0:
            w >>= np.uint64(4)
            k += 4
        if (w & np.uint64(0x3)) == 0:
            w >>= np.uint64(2)
            k += 2
        if (w & np.uint64(0x1)) == 0:
            k += 1
        return k

    @njit(cache=True, parallel=True)
    def corner_table_nb(bits, order):
        n, words = bits.shape
        out = np.full((n, n), -1, dtype=np.int32)
        for a in prange(n):
            tmp = np.empty(words, dtype=np.uint64)
            for b in range(n):
                first = -1
                for k in range(words):
                    w = bits[a, k] & bits[b, k]
                    tmp[k] = w
                    if first < 0 and w != 0:
                        first = k * 64 + _ctz(w)
                if first < 0:
                    continue
                c = order[first]
                ok = True
                for k in range(words):
                    if bits[c, k] != tmp[k]:
                        ok = False
                        break
                if ok:
                    out[a, b] = c
        return out

    @njit(cache=True)
    def cover_matrix_nb(up_bits, down_bits):
        n, words = up_bits.shape
        cov = np.zeros((n, n), dtype=np.bool_)
        for a in range(n):
            for b in range(n):
                if (up_bits[a, b >> 6] >> np.uint64(b & 63)) & _ONE == 0:
                    continue
                between = False
                for k in range(words):
                    if down_bits[b, k] & up_bits[a, k]:
                        between = True
                        break
                if not between:
                    cov[a, b] = True
        return cov

    @njit(cache=True)
    def _woven_witness_nb(join, meet, member):
        n = member.shape[0]
        for i in range(n):
            if not member[i]:
                continue
            for j in range(i + 1, n):
                if not member[j]:
                    continue
                jn = join[i, j]
                mt = meet[i, j]
                if jn >= 0 and member[jn]:
                    continue
                if mt >= 0 and member[mt]:
                    continue
                return i, j
        return -1, -1

    def woven_witness_nb(join, meet, member):
        i, j = _woven_witness_nb(join, meet, member)
        return int(i), int(j)

    @njit(cache=True)
    def woven_mask_table_nb(join, meet):
        n = join.shape[0]
        size = 1 << n
        out = np.ones(size, dtype=np.bool_)
        for mask in range(size):
            done = False
            for i in range(n):
                if done:
                    break
                if not (mask >> i) & 1:
                    continue
                for j in range(i + 1, n):
                    if not (mask >> j) & 1:
                        continue
                    jn = join[i, j]
                    mt = meet[i, j]
                    if jn >= 0 and (mask >> jn) & 1:
                        continue
                    if mt >= 0 and (mask >> mt) & 1:
                        continue
                    out[mask] = False
                    done = True
                    break
        return out

    @njit(cache=True)
    def unravel_table_nb(woven):
        size = woven.shape[0]
        n = 0
        while (1 << n) < size:
            n += 1
        table = np.zeros(size, dtype=np.bool_)
        table[0] = woven[0]
        # a mask's one-smaller submasks are numerically smaller
        for mask in range(1, size):
            if not woven[mask]:
                continue
            for i in range(n):
                if (mask >> i) & 1 and table[mask ^ (1 << i)]:
                    table[mask] = True
                    break
        return table

    @njit(cache=True)
    def girth_nb(indptr, indices):
        n = indptr.shape[0] - 1
        best = -1
        dist = np.empty(n, dtype=np.int64)
        parent = np.empty(n, dtype=np.int64)
        queue = np.empty(n, dtype=np.int64)
        for root in range(n):
            dist[:] = -1
            parent[:] = -1
            dist[root] = 0
            head = 0
            tail = 0
            queue[tail] = root
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                if best >= 0 and 2 * dist[u] + 1 >= best:
                    break
                for p in range(indptr[u], indptr[u + 1]):
                    v = indices[p]
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        parent[v] = u
                        queue[tail] = v
                        tail += 1
                    elif v != parent[u]:
                        length = dist[u] + dist[v] + 1
                        if best < 0 or length < best:
                            best = length
        return best


    @njit(cache=True)
    def short_cycle_edges_nb(indptr, indices, g):
        n = indptr.shape[0] - 1
        out = np.full((n, 2), -1, dtype=np.int64)
        depth = g // 2
        dist = np.empty(n, dtype=np.int64)
        parent = np.empty(n, dtype=np.int64)
        queue = np.empty(n, dtype=np.int64)
        for root in range(n):
            dist[:] = -1
            dist[root] = 0
            parent[root] = -1
            head = 0
            tail = 1
            queue[0] = root
            hit = False
            while head < tail and not hit:
                u = queue[head]
                head += 1
                for p in range(indptr[u], indptr[u + 1]):
                    v = indices[p]
                    if dist[v] < 0:
                        if dist[u] < depth:
                            dist[v] = dist[u] + 1
                            parent[v] = u
                            queue[tail] = v
                            tail += 1
                    elif v != parent[u] and dist[u] + dist[v] + 1 <= g:
                        out[root, 0] = u
                        out[root, 1] = v
                        hit = True
                        break
        return out


if USE_NUMBA:
    corner_table = corner_table_nb
    cover_matrix = cover_matrix_nb
    woven_witness = woven_witness_nb
    woven_mask_table = woven_mask_table_nb
    unravel_table = unravel_table_nb
    girth_csr = girth_nb
    short_cycle_edges = short_cycle_edges_nb
else:
    corner_table = corner_table_np
    cover_matrix = cover_matrix_np
    woven_witness = woven_witness_np
    woven_mask_table = woven_mask_table_np
    unravel_table = unravel_table_np
    girth_csr = girth_np
    short_cycle_edges = short_cycle_edges_np


def set_threads(count):
    """Cap numba's worker pool; a no-op on the numpy path."""
    if USE_NUMBA and count:
        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))
