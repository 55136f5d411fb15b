"""Exact optimal transport between two small discrete distributions.

Solved as min-cost flow (successive shortest paths with Bellman-Ford) on the
bipartite graph source -> supply -> demand -> sink.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-15


@dataclass
class TransportResult:
    cost: float
    plan: np.ndarray


class _Graph:
    def __init__(self, n: int):
        self.n = n
        self.to: list[int] = []
        self.cap: list[float] = []
        self.cost: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add(self, u: int, v: int, cap: float, cost: float) -> int:
        e = len(self.to)
        for a, b, c, w in ((u, v, cap, cost), (v, u, 0.0, -cost)):
            self.adj[a].append(len(self.to))
            self.to.append(b)
            self.cap.append(c)
            self.cost.append(w)
        return e

    def shortest_path(self, s: int, t: int) -> list[int] | None:
        dist = [np.inf] * self.n
        via = [-1] * self.n
        dist[s] = 0.0
        for _ in range(self.n - 1):
            changed = False
            for u in range(self.n):
                if dist[u] == np.inf:
                    continue
                for e in self.adj[u]:
                    if self.cap[e] > _EPS and dist[u] + self.cost[e] < dist[self.to[e]] - 1e-14:
                        dist[self.to[e]] = dist[u] + self.cost[e]
                        via[self.to[e]] = e
                        changed = True
            if not changed:
                break
        if dist[t] == np.inf:
            return None
        path = []
        v = t
        while v != s:
            e = via[v]
            path.append(e)
            v = self.to[e ^ 1]
        return path


def optimal_transport(p, q, cost) -> TransportResult:
    """Minimum-cost plan moving mass ``p`` onto ``q``.

    ``p`` and ``q`` must be non-negative with equal totals (within 1e-9).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n, m = len(p), len(q)
    if cost.shape != (n, m):
        raise ValueError(f"cost shape {cost.shape} does not match ({n}, {m})")
    if (p < 0).any() or (q < 0).any():
        raise ValueError("masses must be non-negative")
    if abs(p.sum() - q.sum()) > 1e-9:
        raise ValueError(f"unbalanced masses: {p.sum()} vs {q.sum()}")

    s, t = n + m, n + m + 1
    g = _Graph(n + m + 2)
    for i in range(n):
        g.add(s, i, float(p[i]), 0.0)
    for j in range(m):
        g.add(n + j, t, float(q[j]), 0.0)
    edge = np.empty((n, m), dtype=int)
    for i in range(n):
        for j in range(m):
            edge[i, j] = g.add(i, n + j, np.inf, float(cost[i, j]))

    while True:
        path = g.shortest_path(s, t)
        if path is None:
            break
        push = min(g.cap[e] for e in path)
        for e in path:
            g.cap[e] -= push
            g.cap[e ^ 1] += push

    plan = np.array([[g.cap[edge[i, j] ^ 1] for j in range(m)] for i in range(n)])
    return TransportResult(float((plan * cost).sum()), plan)
