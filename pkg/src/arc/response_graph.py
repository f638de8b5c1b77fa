"""Game graph and response graph over joint strategy profiles.

Both graphs share one edge-list representation: parallel arrays of source,
target, deviating player and the deviator's utility change. The game graph
keeps every single-player deviation; the response graph keeps only those
whose utility change is >= -tie_tol.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import GameSpecError


@dataclass(frozen=True)
class GameGraph:
    """All single-player deviations, with the deviator's payoff delta."""

    strategy_counts: tuple
    src: np.ndarray
    dst: np.ndarray
    player: np.ndarray
    delta: np.ndarray

    @property
    def n_nodes(self):
        return int(np.prod(self.strategy_counts))

    @property
    def n_edges(self):
        return len(self.src)

    def out_degrees(self):
        return np.bincount(self.src, minlength=self.n_nodes)

    def adjacency(self, node):
        """List of (neighbor, deviating player, delta) for one node."""
        mask = self.src == node
        return list(zip(self.dst[mask].tolist(),
                        self.player[mask].tolist(),
                        self.delta[mask].tolist()))


@dataclass(frozen=True)
class ResponseGraph(GameGraph):
    """Subgraph of the game graph keeping non-worsening deviations."""

    tie_tol: float = 0.0


def build_game_graph(game):
    """Enumerate every edge (s, s') differing in one player's strategy."""
    counts = game.strategy_counts
    n = game.n_profiles
    idx = np.arange(n)
    strides = np.ones(len(counts), dtype=np.int64)
    for i in range(len(counts) - 2, -1, -1):
        strides[i] = strides[i + 1] * counts[i + 1]

    srcs, dsts, players, deltas = [], [], [], []
    for i, n_i in enumerate(counts):
        if n_i == 1:
            continue
        coord_i = (idx // strides[i]) % n_i
        u_i = game.payoffs[i]
        for b in range(n_i):
            mask = coord_i != b
            rows = idx[mask]
            cols = rows + (b - coord_i[mask]) * strides[i]
            srcs.append(rows)
            dsts.append(cols)
            players.append(np.full(len(rows), i, dtype=np.int32))
            deltas.append(u_i[cols] - u_i[rows])
    if srcs:
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
        player = np.concatenate(players)
        delta = np.concatenate(deltas)
    else:
        src = dst = np.empty(0, dtype=np.int64)
        player = np.empty(0, dtype=np.int32)
        delta = np.empty(0)
    return GameGraph(counts, src, dst, player, delta)


def build_response_graph(graph, tie_tol=0.0):
    """Keep edges whose deviator does not lose more than ``tie_tol``."""
    if tie_tol < 0:
        raise GameSpecError("tie_tol must be >= 0")
    keep = graph.delta >= -tie_tol
    return ResponseGraph(graph.strategy_counts,
                         graph.src[keep], graph.dst[keep],
                         graph.player[keep], graph.delta[keep],
                         tie_tol=tie_tol)


def _adjacency_matrix(graph):
    n = graph.n_nodes
    data = np.ones(graph.n_edges, dtype=np.int8)
    return sp.csr_matrix((data, (graph.src, graph.dst)), shape=(n, n))


def sink_components(rg):
    """Strongly connected components with no edge leaving them.

    Returned as sorted index arrays, ordered by smallest member.
    """
    n = rg.n_nodes
    adj = _adjacency_matrix(rg)
    n_comp, labels = connected_components(adj, directed=True,
                                          connection="strong")
    # A component is a sink iff none of its edges crosses to another one.
    has_exit = np.zeros(n_comp, dtype=bool)
    cross = labels[rg.src] != labels[rg.dst]
    has_exit[labels[rg.src[cross]]] = True
    sinks = []
    for c in range(n_comp):
        if not has_exit[c]:
            sinks.append(np.flatnonzero(labels == c))
    sinks.sort(key=lambda members: members[0])
    return sinks
