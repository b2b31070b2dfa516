"""Exposure metrics over a connectivity graph.

Distances are hop counts on the unweighted digraph; edge weights only
enter ENICE.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .connectivity import ConnectivityGraph


class UndefinedMetricError(ValueError):
    pass


@dataclass
class ExposureReport:
    enice: int
    global_clustering: Optional[float]
    mean_path_length: Optional[float]
    diameter: Optional[int]
    infinity_fraction: float
    tinr: int
    avg_out_degree: float
    avg_closeness: float
    vertex_count: int = 0
    edge_count: int = 0
    out_degree_per_node: dict = field(default_factory=dict)
    closeness_per_node: dict = field(default_factory=dict)
    path_length_histogram: dict = field(default_factory=dict)

    def scalars(self) -> dict:
        d = asdict(self)
        for key in ("out_degree_per_node", "closeness_per_node", "path_length_histogram"):
            d.pop(key)
        return d

    def to_dict(self) -> dict:
        d = asdict(self)
        d["path_length_histogram"] = {str(k): v for k, v in sorted(self.path_length_histogram.items())}
        return d


def enice(g: ConnectivityGraph) -> int:
    return sum(g.weights.values())


def hop_distances(g: ConnectivityGraph) -> np.ndarray:
    """All-pairs BFS hop counts; -1 marks unreachable pairs, 0 on the diagonal.

    All sources advance together one level per step, so a level costs one
    matrix product.
    """
    n = len(g.vertices)
    adj = g.adjacency().astype(np.float32)
    dist = np.full((n, n), -1, dtype=np.int64)
    if n == 0:
        return dist
    reached = np.eye(n, dtype=bool)
    frontier = reached.astype(np.float32)
    np.fill_diagonal(dist, 0)
    level = 0
    while True:
        level += 1
        nxt = (frontier @ adj > 0) & ~reached
        if not nxt.any():
            break
        dist[nxt] = level
        reached |= nxt
        frontier = nxt.astype(np.float32)
    return dist


def global_clustering(g: ConnectivityGraph) -> float:
    """Closed triplets over all triplets on the undirected projection."""
    n = len(g.vertices)
    if n < 3:
        raise UndefinedMetricError("global clustering needs at least 3 vertices")
    a = g.adjacency()
    u = (a | a.T).astype(np.float64)
    deg = u.sum(axis=1)
    triplets = float((deg * (deg - 1)).sum())  # ordered neighbour pairs per centre
    if triplets == 0:
        return 0.0
    closed = float(((u @ u) * u).sum())  # = trace(u^3)
    return closed / triplets


def shortest_path_stats(g: ConnectivityGraph, count_vertices: bool = False, dist: Optional[np.ndarray] = None):
    """Return (mean_path_length, diameter, infinity_fraction, histogram).

    Mean and diameter run over reachable ordered pairs and are None when
    no pair is reachable. With `count_vertices` a path's length is its
    vertex count (hops + 1).
    """
    n = len(g.vertices)
    if n < 2:
        raise UndefinedMetricError("path statistics need at least 2 vertices")
    if dist is None:
        dist = hop_distances(g)
    off = ~np.eye(n, dtype=bool)
    d = dist[off]
    reach = d[d > 0]
    if count_vertices:
        reach = reach + 1
    inf_frac = float((d < 0).sum()) / d.size
    if reach.size == 0:
        return None, None, inf_frac, {}
    hist = {int(k): int(c) for k, c in zip(*np.unique(reach, return_counts=True))}
    return float(reach.mean()), int(reach.max()), inf_frac, hist


def tinr(g: ConnectivityGraph, dist: Optional[np.ndarray] = None) -> int:
    """Edge count of the transitive closure, self pairs excluded."""
    if dist is None:
        dist = hop_distances(g)
    return int((dist > 0).sum())


def out_degree_stats(g: ConnectivityGraph):
    counts = Counter(x for x, _ in g.weights)
    per_node = {v: counts.get(v, 0) for v in g.vertices}
    avg = sum(per_node.values()) / len(per_node) if per_node else 0.0
    return avg, per_node


def closeness_stats(g: ConnectivityGraph, dist: Optional[np.ndarray] = None):
    """Wasserman-Faust closeness per node and its mean.

    CL(v) = ((r-1)/(n-1)) * ((r-1)/sum of distances to reachable nodes),
    r counting v itself; 0 for a node reaching nothing.
    """
    n = len(g.vertices)
    if n < 2:
        raise UndefinedMetricError("closeness needs at least 2 vertices")
    if dist is None:
        dist = hop_distances(g)
    per_node = {}
    for i, v in enumerate(g.vertices):
        row = dist[i]
        reach = row[row > 0]
        if reach.size == 0:
            per_node[v] = 0.0
            continue
        r1 = reach.size
        per_node[v] = (r1 / (n - 1)) * (r1 / float(reach.sum()))
    return sum(per_node.values()) / n, per_node


def exposure_report(g: ConnectivityGraph, count_vertices: bool = False) -> ExposureReport:
    dist = hop_distances(g)
    try:
        gc = global_clustering(g)
    except UndefinedMetricError:
        gc = None
    if len(g.vertices) >= 2:
        mpl, diameter, inf_frac, hist = shortest_path_stats(g, count_vertices, dist)
        ac, closeness = closeness_stats(g, dist)
    else:
        mpl, diameter, inf_frac, hist = None, None, 0.0, {}
        ac, closeness = 0.0, {v: 0.0 for v in g.vertices}
    avod, out_deg = out_degree_stats(g)
    return ExposureReport(
        enice=enice(g),
        global_clustering=gc,
        mean_path_length=mpl,
        diameter=diameter,
        infinity_fraction=inf_frac,
        tinr=tinr(g, dist),
        avg_out_degree=avod,
        avg_closeness=ac,
        vertex_count=len(g.vertices),
        edge_count=len(g.weights),
        out_degree_per_node=out_deg,
        closeness_per_node=closeness,
        path_length_histogram=hist,
    )
