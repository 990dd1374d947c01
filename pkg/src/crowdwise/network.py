"""Influence networks: validation, graph structure and eigenvector centrality.

Agents are indexed ``0 .. n-1`` throughout the library. An edge ``(i, j)``
of the network graph exists iff ``P[i, j] > 0`` exactly; no threshold is
applied to small weights.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    NotAperiodic,
    NotStochastic,
    NotStronglyConnected,
    SolverFailure,
    TooSmall,
)

ROW_SUM_TOL = 1e-9


class Digraph(NamedTuple):
    """Plain directed graph on an explicit node set."""

    nodes: frozenset
    edges: frozenset

    def out_degree(self, u):
        return sum(1 for a, _ in self.edges if a == u)

    def in_degree(self, v):
        return sum(1 for _, b in self.edges if b == v)


def _adjacency(P) -> list[list[int]]:
    return [[int(j) for j in np.flatnonzero(row > 0)] for row in P]


def _reaches_all(adj, start=0) -> bool:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(adj)


def is_strongly_connected(adj) -> bool:
    """Forward and backward reachability from node 0 both cover the graph."""
    reverse = [[] for _ in adj]
    for u, succ in enumerate(adj):
        for v in succ:
            reverse[v].append(u)
    return _reaches_all(adj) and _reaches_all(reverse)


def period(adj) -> int:
    """Period of a strongly connected graph.

    BFS levels from node 0 give ``level(v) <= level(u) + 1`` on every edge;
    the gcd of ``level(u) + 1 - level(v)`` over all edges equals the gcd of
    all cycle lengths.
    """
    level = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u, succ in enumerate(adj):
        for v in succ:
            g = gcd(g, level[u] + 1 - level[v])
    return g


@dataclass(frozen=True, eq=False)
class InfluenceNetwork:
    """A validated row-stochastic, irreducible, aperiodic influence matrix.

    Build instances with :func:`validate_network`; the matrix is stored
    read-only.
    """

    P: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @cached_property
    def adjacency(self) -> list[list[int]]:
        return _adjacency(self.P)

    @cached_property
    def centrality(self) -> np.ndarray:
        pi = stationary_distribution(self)
        pi.setflags(write=False)
        return pi

    def __repr__(self):
        return f"InfluenceNetwork(n={self.n})"


def validate_network(P) -> InfluenceNetwork:
    """Check ``P`` and wrap it as an :class:`InfluenceNetwork`.

    Raises
    ------
    TooSmall
        fewer than two agents.
    NotStochastic
        non-square or non-finite input, a negative entry, an entry above 1,
        or a row sum off by more than ``1e-9``.
    NotStronglyConnected, NotAperiodic
        the graph of positive entries fails the corresponding property.
    """
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotStochastic(f"P must be square, got shape {P.shape}")
    n = P.shape[0]
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")
    if not np.all(np.isfinite(P)):
        raise NotStochastic("P has non-finite entries")
    if np.any(P < 0) or np.any(P > 1):
        i, j = np.argwhere((P < 0) | (P > 1))[0]
        raise NotStochastic(f"P[{i},{j}] = {P[i, j]!r} is outside [0, 1]")
    dev = np.abs(P.sum(axis=1) - 1.0)
    if np.any(dev > ROW_SUM_TOL):
        i = int(np.argmax(dev))
        raise NotStochastic(f"row {i} sums to {P[i].sum()!r}")
    adj = _adjacency(P)
    if not is_strongly_connected(adj):
        raise NotStronglyConnected("graph of P is not strongly connected")
    if period(adj) != 1:
        raise NotAperiodic(f"graph of P has period {period(adj)}")
    P.setflags(write=False)
    return InfluenceNetwork(P)


def stationary_distribution(net: InfluenceNetwork) -> np.ndarray:
    """Centrality vector: the unique probability vector with ``P' pi = pi``.

    Solved directly from ``(P' - I) pi = 0`` with the last equation replaced
    by the normalisation ``sum(pi) = 1``, followed by one step of iterative
    refinement.
    """
    n = net.n
    A = net.P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(A, rhs)
        pi = pi + np.linalg.solve(A, rhs - A @ pi)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"centrality solve failed: {exc}") from exc
    residual = np.max(np.abs(net.P.T @ pi - pi))
    if not np.all(np.isfinite(pi)) or np.any(pi <= 0) or residual > 1e-9:
        raise SolverFailure(f"centrality solve broke down (residual {residual:.3g})")
    return pi / pi.sum()


def reachable_members(net: InfluenceNetwork, source: int, S: Iterable[int]) -> set[int]:
    """Members of ``S`` reachable from ``source`` with no intermediate node in ``S``.

    The search starts from the out-neighbours of ``source`` and never expands
    a node of ``S``. ``source`` itself counts as reached only if a cycle
    leads back to it under the same restriction.
    """
    S = set(S)
    adj = net.adjacency
    hit = set()
    seen = set()
    queue = deque(adj[source])
    while queue:
        v = queue.popleft()
        if v in seen:
            continue
        seen.add(v)
        if v in S:
            hit.add(v)
            continue
        queue.extend(adj[v])
    return hit


def restricted_graph(net: InfluenceNetwork, S: Iterable[int], loops: bool = False) -> Digraph:
    """Graph on ``S`` linking ``i -> j`` when a path avoids other ``S`` nodes.

    With ``loops=False`` (the default, used for ring tests) only pairs
    ``i != j`` are considered. ``loops=True`` also adds ``(i, i)`` when a
    cycle through ``i`` avoids every other member of ``S``.
    """
    S = frozenset(int(s) for s in S)
    if not S:
        raise ValueError("restricted graph needs a nonempty node set")
    edges = set()
    for i in S:
        for j in reachable_members(net, i, S):
            if j != i or loops:
                edges.add((i, j))
    return Digraph(S, frozenset(edges))


def is_directed_ring(g: Digraph) -> bool:
    """True iff ``g`` is 1-regular and strongly connected.

    Two nodes joined in both directions count as a ring.
    """
    if not g.nodes:
        return False
    if any(g.out_degree(u) != 1 or g.in_degree(u) != 1 for u in g.nodes):
        return False
    succ = {a: b for a, b in g.edges}
    start = next(iter(g.nodes))
    u, visited = succ[start], {start}
    while u != start:
        visited.add(u)
        u = succ[u]
    return visited == set(g.nodes)
