"""Min-cost transportation with the basepoint absorbing the mass imbalance.

Successive shortest paths on the bipartite residual graph.  The arithmetic is
whatever the inputs carry, so Fraction inputs give an exact optimum.
"""

from __future__ import annotations

from typing import Mapping

from .metric import FiniteSpace


def _is_zero(v, eps) -> bool:
    return v <= eps


def transport_cost(space: FiniteSpace, coeff: Mapping[int, object], eps: float | None = None):
    """Optimal cost of moving the positive part of ``coeff`` onto its negative part.

    The basepoint supplies or absorbs whatever is missing.  Returns
    ``(cost, plan)`` with ``plan`` a dict ``(src, dst) -> mass``.
    """
    items = [(i, c) for i, c in coeff.items() if c != 0 and i != space.base]
    if not items:
        return 0, {}
    exact = space.exact and all(isinstance(c, int) or hasattr(c, "denominator") for _, c in items)
    total = sum(c for _, c in items)
    sources = [(i, c) for i, c in items if c > 0]
    sinks = [(i, -c) for i, c in items if c < 0]
    if total > 0:
        sinks.append((space.base, total))
    elif total < 0:
        sources.append((space.base, -total))
    if eps is None:
        scale = sum(abs(c) for _, c in items)
        eps = 0 if exact else 1e-13 * float(scale)
    d = space.dist
    # relaxations must beat the current label by more than rounding noise,
    # otherwise float labels can creep around a zero-cost cycle forever
    tol = 0 if exact else 1e-12 * max(float(max(row)) for row in d)
    S = [i for i, _ in sources]
    T = [j for j, _ in sinks]
    supply = [c for _, c in sources]
    demand = [c for _, c in sinks]
    cost = [[d[i][j] for j in T] for i in S]
    flow = [[0] * len(T) for _ in S]
    ns, nt = len(S), len(T)
    while True:
        live_s = [a for a in range(ns) if not _is_zero(supply[a], eps)]
        live_t = [b for b in range(nt) if not _is_zero(demand[b], eps)]
        if not live_s or not live_t:
            break
        # Bellman-Ford from all live sources; nodes 0..ns-1 sources, ns.. sinks
        dist = [None] * (ns + nt)
        prev = [None] * (ns + nt)
        for a in live_s:
            dist[a] = 0 * cost[a][0]
        for _ in range(ns + nt):
            changed = False
            for a in range(ns):
                if dist[a] is None:
                    continue
                for b in range(nt):
                    nd = dist[a] + cost[a][b]
                    if dist[ns + b] is None or nd < dist[ns + b] - tol:
                        dist[ns + b] = nd
                        prev[ns + b] = a
                        changed = True
            for b in range(nt):
                if dist[ns + b] is None:
                    continue
                for a in range(ns):
                    if not _is_zero(flow[a][b], eps):
                        nd = dist[ns + b] - cost[a][b]
                        if dist[a] is None or nd < dist[a] - tol:
                            dist[a] = nd
                            prev[a] = ns + b
                            changed = True
            if not changed:
                break
        target = min((b for b in live_t if dist[ns + b] is not None), key=lambda b: (dist[ns + b], b))
        amount = demand[target]
        node = ns + target
        edges = []
        seen = set()
        while True:
            if node in seen:
                raise RuntimeError("cycle in the shortest-path tree")  # pragma: no cover
            seen.add(node)
            a = prev[node]
            edges.append((a, node - ns, +1))
            if prev[a] is None:
                start = a
                break
            b_node = prev[a]
            edges.append((a, b_node - ns, -1))
            node = b_node
        amount = min(amount, supply[start])
        for a, b, sign in edges:
            if sign < 0:
                amount = min(amount, flow[a][b])
        for a, b, sign in edges:
            flow[a][b] += sign * amount
        supply[start] -= amount
        demand[target] -= amount
    total_cost = 0
    plan = {}
    for a in range(ns):
        for b in range(nt):
            if not _is_zero(flow[a][b], eps):
                total_cost += flow[a][b] * cost[a][b]
                plan[(S[a], T[b])] = flow[a][b]
    return total_cost, plan
