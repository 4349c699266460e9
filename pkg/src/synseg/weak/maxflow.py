"""Exact s-t min cut on integer capacities (Dinic's algorithm).

Nodes ``0..n-1`` are regular vertices; the source and sink are implicit.
Every node may carry a source capacity (``s -> p``) and a sink capacity
(``p -> t``); pairwise edges carry independent forward and backward
capacities.  Capacities are ``int64`` so the returned cut is exactly
minimal.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _dinic(num_nodes, offsets, to, cap, rev, s, t):
    flow = 0
    level = np.empty(num_nodes, np.int64)
    current = np.empty(num_nodes, np.int64)
    queue = np.empty(num_nodes, np.int64)
    path = np.empty(num_nodes, np.int64)
    while True:
        level[:] = -1
        level[s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            for a in range(offsets[u], offsets[u + 1]):
                v = to[a]
                if cap[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[tail] = v
                    tail += 1
        if level[t] < 0:
            break
        current[:] = offsets[:num_nodes]
        while True:
            # walk a shortest augmenting path using the current-arc pointers
            depth = 0
            u = s
            while u != t:
                advanced = False
                while current[u] < offsets[u + 1]:
                    a = current[u]
                    v = to[a]
                    if cap[a] > 0 and level[v] == level[u] + 1:
                        path[depth] = a
                        depth += 1
                        u = v
                        advanced = True
                        break
                    current[u] += 1
                if not advanced:
                    if depth == 0:
                        break
                    level[u] = -1
                    depth -= 1
                    u = to[rev[path[depth]]]
                    current[u] += 1
            if u != t:
                break
            bottleneck = cap[path[0]]
            for i in range(1, depth):
                if cap[path[i]] < bottleneck:
                    bottleneck = cap[path[i]]
            for i in range(depth):
                a = path[i]
                cap[a] -= bottleneck
                cap[rev[a]] += bottleneck
            flow += bottleneck
    return flow


@njit(cache=True, nogil=True)
def _source_side(num_nodes, offsets, to, cap, s):
    seen = np.zeros(num_nodes, np.bool_)
    stack = np.empty(num_nodes, np.int64)
    seen[s] = True
    stack[0] = s
    top = 1
    while top > 0:
        top -= 1
        u = stack[top]
        for a in range(offsets[u], offsets[u + 1]):
            v = to[a]
            if cap[a] > 0 and not seen[v]:
                seen[v] = True
                stack[top] = v
                top += 1
    return seen


def mincut(source_cap, sink_cap, edge_u=None, edge_v=None, cap_uv=None, cap_vu=None):
    """Solve the min cut of a graph with terminal and pairwise edges.

    Args:
        source_cap: ``(n,)`` capacities of ``s -> p``, paid when ``p`` ends
            on the sink side.
        sink_cap: ``(n,)`` capacities of ``p -> t``, paid when ``p`` ends on
            the source side.
        edge_u, edge_v: endpoints of pairwise edges.
        cap_uv, cap_vu: capacity of ``u -> v`` (paid when u is source-side
            and v sink-side) and of ``v -> u``.

    Returns:
        ``(cut_value, source_side)`` where ``source_side`` is a boolean
        ``(n,)`` array.
    """
    source_cap = np.asarray(source_cap, dtype=np.int64)
    sink_cap = np.asarray(sink_cap, dtype=np.int64)
    n = source_cap.shape[0]
    if sink_cap.shape != (n,):
        raise ValueError("terminal capacity arrays must have the same length")
    if edge_u is None:
        edge_u = edge_v = cap_uv = cap_vu = np.zeros(0, np.int64)
    edge_u = np.asarray(edge_u, dtype=np.int64)
    edge_v = np.asarray(edge_v, dtype=np.int64)
    cap_uv = np.broadcast_to(np.asarray(cap_uv, dtype=np.int64), edge_u.shape)
    cap_vu = np.broadcast_to(np.asarray(cap_vu, dtype=np.int64), edge_u.shape)
    if (source_cap < 0).any() or (sink_cap < 0).any() or (cap_uv < 0).any() or (cap_vu < 0).any():
        raise ValueError("capacities must be non-negative")
    if edge_u.size and (min(edge_u.min(), edge_v.min()) < 0 or max(edge_u.max(), edge_v.max()) >= n):
        raise ValueError("edge endpoint out of range")

    # flow through s -> p -> t can be pushed directly
    direct = np.minimum(source_cap, sink_cap)
    src = source_cap - direct
    snk = sink_cap - direct
    s, t = n, n + 1

    nodes = np.arange(n, dtype=np.int64)
    tails = np.concatenate([np.full(n, s), nodes, nodes, np.full(n, t), edge_u, edge_v])
    heads = np.concatenate([nodes, np.full(n, s), np.full(n, t), nodes, edge_v, edge_u])
    caps = np.concatenate([src, np.zeros(n, np.int64), snk, np.zeros(n, np.int64), cap_uv, cap_vu])
    k = edge_u.shape[0]
    # index of each arc's reverse, in the unsorted arc order above
    pair = np.concatenate([
        np.arange(n, 2 * n), np.arange(0, n),          # s->p  <-> p->s
        np.arange(3 * n, 4 * n), np.arange(2 * n, 3 * n),  # p->t <-> t->p
        np.arange(4 * n + k, 4 * n + 2 * k), np.arange(4 * n, 4 * n + k),
    ]).astype(np.int64)

    order = np.argsort(tails, kind="stable")
    position = np.empty_like(order)
    position[order] = np.arange(order.shape[0])
    to = heads[order]
    cap = caps[order].copy()
    rev = position[pair[order]]
    offsets = np.zeros(n + 3, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=n + 2), out=offsets[1:])

    flow = _dinic(n + 2, offsets, to, cap, rev, s, t)
    side = _source_side(n + 2, offsets, to, cap, s)
    return int(direct.sum() + flow), side[:n]
