"""Compiled IFT passes.

All three kernels extract sites in ``(cost, counter)`` order, where the
counter is bumped on every insertion or cost decrease. Equal costs therefore
leave the queue first-in-first-out, and the three queues produce the same
extraction order.
"""
import numpy as np
from numba import njit

WHITE, GRAY, BLACK = 0, 1, 2


@njit(cache=True, inline="always")
def _coords(p, dims):
    nx, ny = dims[0], dims[1]
    return p % nx, (p // nx) % ny, p // (nx * ny)


@njit(cache=True, inline="always")
def _neighbor(x, y, z, j, dims, offsets):
    nx, ny, nz = dims[0], dims[1], dims[2]
    qx = x + offsets[j, 0]
    qy = y + offsets[j, 1]
    qz = z + offsets[j, 2]
    if qx < 0 or qx >= nx or qy < 0 or qy >= ny or qz < 0 or qz >= nz:
        return -1
    return qx + nx * (qy + ny * qz)


@njit(cache=True, inline="always")
def _edge_cost(cs, t, ref_idx, step, colors, ref, variant, alpha, beta, grad):
    if variant == 2:
        g = float(grad[t])
        return cs if cs > g else g
    d0 = colors[t, 0] - ref[ref_idx, 0]
    d1 = colors[t, 1] - ref[ref_idx, 1]
    d2 = colors[t, 2] - ref[ref_idx, 2]
    diff = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    return cs + (diff * alpha) ** beta + step


@njit(cache=True)
def _init(n, seeds):
    cost = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    root = np.arange(n, dtype=np.int64)
    label = np.zeros(n, dtype=np.int64)
    state = np.zeros(n, dtype=np.int8)
    cnt = np.zeros(n, dtype=np.int64)
    for j in range(seeds.size):
        s = seeds[j]
        cost[s] = 0.0
        label[s] = j + 1
    return cost, pred, root, label, state, cnt


@njit(cache=True)
def _sift_up(hnode, hcost, hcnt, hpos, i):
    node, c, k = hnode[i], hcost[i], hcnt[i]
    while i > 0:
        parent = (i - 1) >> 1
        pc = hcost[parent]
        if c < pc or (c == pc and k < hcnt[parent]):
            hnode[i] = hnode[parent]
            hcost[i] = pc
            hcnt[i] = hcnt[parent]
            hpos[hnode[i]] = i
            i = parent
        else:
            break
    hnode[i], hcost[i], hcnt[i] = node, c, k
    hpos[node] = i


@njit(cache=True)
def _sift_down(hnode, hcost, hcnt, hpos, size, i):
    node, c, k = hnode[i], hcost[i], hcnt[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        r = child + 1
        if r < size and (
            hcost[r] < hcost[child] or (hcost[r] == hcost[child] and hcnt[r] < hcnt[child])
        ):
            child = r
        cc = hcost[child]
        if cc < c or (cc == c and hcnt[child] < k):
            hnode[i] = hnode[child]
            hcost[i] = cc
            hcnt[i] = hcnt[child]
            hpos[hnode[i]] = i
            i = child
        else:
            break
    hnode[i], hcost[i], hcnt[i] = node, c, k
    hpos[node] = i


@njit(cache=True)
def ift_heap(colors, dims, offsets, steps, seeds, ref, variant, alpha, beta, grad):
    """IFT with an indexed binary heap and true decrease-key."""
    n = colors.shape[0]
    cost, pred, root, label, state, cnt = _init(n, seeds)
    hnode = np.empty(n, dtype=np.int64)
    hcost = np.empty(n)
    hcnt = np.empty(n, dtype=np.int64)
    hpos = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    size = 0
    counter = 0
    for j in range(seeds.size):
        s = seeds[j]
        hnode[size], hcost[size], hcnt[size] = s, 0.0, counter
        counter += 1
        size += 1
        _sift_up(hnode, hcost, hcnt, hpos, size - 1)
        state[s] = GRAY
    nout = 0
    while size > 0:
        s = hnode[0]
        size -= 1
        if size > 0:
            hnode[0], hcost[0], hcnt[0] = hnode[size], hcost[size], hcnt[size]
            _sift_down(hnode, hcost, hcnt, hpos, size, 0)
        hpos[s] = -1
        state[s] = BLACK
        order[nout] = s
        nout += 1
        ridx = label[s] - 1
        x, y, z = _coords(s, dims)
        for j in range(offsets.shape[0]):
            t = _neighbor(x, y, z, j, dims, offsets)
            if t < 0 or state[t] == BLACK:
                continue
            c = _edge_cost(cost[s], t, ridx, steps[j], colors, ref, variant, alpha, beta, grad)
            if c < cost[t]:
                pred[t] = s
                root[t] = root[s]
                cost[t] = c
                label[t] = label[s]
                if state[t] == GRAY:
                    i = hpos[t]
                else:
                    i = size
                    size += 1
                    state[t] = GRAY
                hnode[i], hcost[i], hcnt[i] = t, c, counter
                counter += 1
                _sift_up(hnode, hcost, hcnt, hpos, i)
    return cost, pred, root, label, state, order[:nout]


@njit(cache=True)
def _lazy_less(i, j, ecost, ecnt):
    return ecost[i] < ecost[j] or (ecost[i] == ecost[j] and ecnt[i] < ecnt[j])


@njit(cache=True)
def ift_lazy(colors, dims, offsets, steps, seeds, ref, variant, alpha, beta, grad):
    """IFT with a plain binary heap; decreased keys are re-pushed, stale entries skipped."""
    n = colors.shape[0]
    cost, pred, root, label, state, cnt = _init(n, seeds)
    cap = n * (offsets.shape[0] + 1) + seeds.size + 1
    ecost = np.empty(cap)
    ecnt = np.empty(cap, dtype=np.int64)
    enode = np.empty(cap, dtype=np.int64)
    heap = np.empty(cap, dtype=np.int64)  # entry ids
    order = np.empty(n, dtype=np.int64)
    size = 0
    nent = 0
    counter = 0

    for j in range(seeds.size):
        s = seeds[j]
        cnt[s] = counter
        state[s] = GRAY
        ecost[nent] = 0.0
        ecnt[nent] = counter
        enode[nent] = s
        counter += 1
        i = size
        heap[size] = nent
        size += 1
        while i > 0:
            p = (i - 1) >> 1
            if _lazy_less(heap[i], heap[p], ecost, ecnt):
                tmp = heap[i]
                heap[i] = heap[p]
                heap[p] = tmp
                i = p
            else:
                break
        nent += 1

    nout = 0
    while size > 0:
        e = heap[0]
        size -= 1
        if size > 0:
            heap[0] = heap[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and _lazy_less(heap[c + 1], heap[c], ecost, ecnt):
                    c += 1
                if _lazy_less(heap[c], heap[i], ecost, ecnt):
                    tmp = heap[i]
                    heap[i] = heap[c]
                    heap[c] = tmp
                    i = c
                else:
                    break
        s = enode[e]
        if state[s] == BLACK or ecnt[e] != cnt[s]:
            continue
        state[s] = BLACK
        order[nout] = s
        nout += 1
        ridx = label[s] - 1
        x, y, z = _coords(s, dims)
        for j in range(offsets.shape[0]):
            t = _neighbor(x, y, z, j, dims, offsets)
            if t < 0 or state[t] == BLACK:
                continue
            c2 = _edge_cost(cost[s], t, ridx, steps[j], colors, ref, variant, alpha, beta, grad)
            if c2 < cost[t]:
                pred[t] = s
                root[t] = root[s]
                cost[t] = c2
                label[t] = label[s]
                cnt[t] = counter
                state[t] = GRAY
                ecost[nent] = c2
                ecnt[nent] = counter
                enode[nent] = t
                counter += 1
                i = size
                heap[size] = nent
                size += 1
                while i > 0:
                    p = (i - 1) >> 1
                    if _lazy_less(heap[i], heap[p], ecost, ecnt):
                        tmp = heap[i]
                        heap[i] = heap[p]
                        heap[p] = tmp
                        i = p
                    else:
                        break
                nent += 1
    return cost, pred, root, label, state, order[:nout]


@njit(cache=True)
def ift_bucket(n, dims, offsets, seeds, grad, maxval):
    """IFT for integer max-gradient costs with FIFO buckets ``0..maxval``."""
    cost, pred, root, label, state, cnt = _init(n, seeds)
    nb = maxval + 1
    head = np.full(nb, -1, dtype=np.int64)
    tail = np.full(nb, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)

    for j in range(seeds.size):
        s = seeds[j]
        state[s] = GRAY
        if tail[0] < 0:
            head[0] = s
        else:
            nxt[tail[0]] = s
            prv[s] = tail[0]
        tail[0] = s

    cur = 0
    nout = 0
    while cur < nb:
        s = head[cur]
        if s < 0:
            cur += 1
            continue
        head[cur] = nxt[s]
        if nxt[s] >= 0:
            prv[nxt[s]] = -1
        else:
            tail[cur] = -1
        nxt[s] = -1
        state[s] = BLACK
        order[nout] = s
        nout += 1
        x, y, z = _coords(s, dims)
        for j in range(offsets.shape[0]):
            t = _neighbor(x, y, z, j, dims, offsets)
            if t < 0 or state[t] == BLACK:
                continue
            g = grad[t]
            c = cost[s] if cost[s] > g else float(g)
            if c < cost[t]:
                if state[t] == GRAY:
                    b = int(cost[t])
                    if prv[t] >= 0:
                        nxt[prv[t]] = nxt[t]
                    else:
                        head[b] = nxt[t]
                    if nxt[t] >= 0:
                        prv[nxt[t]] = prv[t]
                    else:
                        tail[b] = prv[t]
                pred[t] = s
                root[t] = root[s]
                cost[t] = c
                label[t] = label[s]
                state[t] = GRAY
                b = int(c)
                nxt[t] = -1
                prv[t] = tail[b]
                if tail[b] < 0:
                    head[b] = t
                else:
                    nxt[tail[b]] = t
                tail[b] = t
    return cost, pred, root, label, state, order[:nout]
