"""Path-based and non-path-based robustness metrics of an attack graph.

Shortest attack paths run from configuration leaves to privilege (OR)
nodes and are measured in edges. Every step out of an OR node passes
through exactly one AND node, so shortest-path counts between privileges
are computed on the contracted OR-to-OR multigraph (one unit = two edges)
and leaves are attached afterwards. Leaves sharing the same set of
conclusions are evaluated once.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .attackgraph import AND, LEAF, OR, AttackGraph

_EXACT_FLOAT = 2.0 ** 52


@dataclass
class RobustnessReport:
    nsp: Optional[int]
    mspl: Optional[int]
    cmpl: Optional[int]
    mean_path_length: Optional[float]
    cmc: int
    aod: Optional[float]
    mod: Optional[int]
    avg_betweenness: Optional[float]
    node_count: int = 0
    privilege_count: int = 0
    betweenness_per_node: dict = field(default_factory=dict)
    out_degree_per_node: dict = field(default_factory=dict)
    attack_path_length_histogram: dict = field(default_factory=dict)

    def scalars(self) -> dict:
        d = asdict(self)
        for key in ("betweenness_per_node", "out_degree_per_node", "attack_path_length_histogram"):
            d.pop(key)
        return d

    def to_dict(self) -> dict:
        d = asdict(self)
        d["attack_path_length_histogram"] = {
            str(k): v for k, v in sorted(self.attack_path_length_histogram.items())
        }
        return d


def cmc(g: AttackGraph) -> int:
    return sum(1 for k in g.kinds if k == LEAF)


def privilege_out_degree(g: AttackGraph):
    """(AOD, MOD) over privilege nodes, or (None, None) when there are none."""
    degs = [len(g.succs[i]) for i in g.privileges]
    if not degs:
        return None, None
    return sum(degs) / len(degs), max(degs)


class _Contracted:
    """All-pairs shortest-path distance and count between OR nodes."""

    def __init__(self, g: AttackGraph):
        self.ors = g.privileges
        self.pos = {n: i for i, n in enumerate(self.ors)}
        m = len(self.ors)
        mult = np.zeros((m, m), dtype=np.int64)
        for a in g.steps:
            head = self.pos[g.succs[a][0]]
            for p in g.preds[a]:
                if g.kinds[p] == OR:
                    mult[self.pos[p], head] += 1
        self.dist, self.count = _bfs_counts(mult)


def _bfs_counts(mult: np.ndarray):
    """Level-synchronous BFS with path counting from every source at once.

    Returns (dist, count): dist[i, j] is the number of contracted steps
    (-1 if unreachable), count[i, j] the number of shortest walks.
    """
    m = mult.shape[0]
    dist = np.full((m, m), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    count = np.eye(m, dtype=object)
    if m == 0:
        return dist, count
    reached = np.eye(m, dtype=bool)
    frontier = np.eye(m, dtype=object)
    row_max = int(mult.sum(axis=1).max()) if m else 0
    mult_f = mult.astype(np.float64)
    mult_o = mult.astype(object)
    level = 0
    while True:
        level += 1
        peak = max((int(v) for v in frontier[frontier != 0]), default=0)
        if peak * max(row_max, 1) < _EXACT_FLOAT:
            prod = (frontier.astype(np.float64) @ mult_f).round().astype(np.int64).astype(object)
        else:
            prod = frontier.dot(mult_o)
        new = (prod != 0) & ~reached
        if not new.any():
            break
        dist[new] = level
        count[new] = prod[new]
        reached |= new
        frontier = np.where(new, prod, 0).astype(object)
    return dist, count


def _leaf_signatures(g: AttackGraph, pos: dict) -> Counter:
    sigs: Counter = Counter()
    for r in g.roots:
        heads = tuple(sorted(pos[g.succs[a][0]] for a in g.succs[r]))
        if heads:
            sigs[heads] += 1
    return sigs


def _from_heads(heads: tuple, dist: np.ndarray, count: np.ndarray):
    """Edge distance and shortest-path count from a leaf to every OR node."""
    rows = dist[list(heads)]
    reach = rows >= 0
    big = np.where(reach, rows, np.iinfo(np.int64).max)
    best = big.min(axis=0)
    ok = best != np.iinfo(np.int64).max
    sel = reach & (big == best)
    sigma = np.where(sel, count[list(heads)], 0).sum(axis=0)
    d = np.where(ok, 2 + 2 * np.where(ok, best, 0), -1)
    return d, sigma


def shortest_attack_paths(g: AttackGraph, contracted: Optional[_Contracted] = None):
    """Return (nsp, mspl, cmpl, histogram) over all (leaf, privilege) pairs.

    nsp, mspl and cmpl are None when no leaf reaches any privilege.
    """
    c = contracted or _Contracted(g)
    hist: Counter = Counter()
    for heads, mult in _leaf_signatures(g, c.pos).items():
        d, sigma = _from_heads(heads, c.dist, c.count)
        for length, s in zip(d[d > 0], sigma[d > 0]):
            hist[int(length)] += int(s) * mult
    if not hist:
        return None, None, None, {}
    mspl = min(hist)
    return sum(hist.values()), mspl, hist[mspl], dict(sorted(hist.items()))


def betweenness(g: AttackGraph, contracted: Optional[_Contracted] = None):
    """Return (AB, {privilege label: BN}).

    BN(n) sums, over leaf/privilege pairs (r, l) with l != n, the share of
    shortest r->l paths passing through n. AB is None without privileges.
    """
    c = contracted or _Contracted(g)
    m = len(c.ors)
    if m == 0:
        return None, {}
    bn = np.zeros(m)
    two_d = np.where(c.dist >= 0, 2 * c.dist, -1)
    pair_ok = c.dist > 0  # excludes n == l
    count_f = c.count.astype(np.float64)
    for heads, mult in _leaf_signatures(g, c.pos).items():
        d, sigma = _from_heads(heads, c.dist, c.count)
        src = d >= 0
        if not src.any():
            continue
        sig_f = sigma.astype(np.float64)
        on_path = pair_ok & src[:, None] & src[None, :] & (d[:, None] + two_d == d[None, :])
        denom = np.where(src, sig_f, 1.0)
        share = np.where(on_path, sig_f[:, None] * count_f / denom[None, :], 0.0)
        bn += mult * share.sum(axis=1)
    per_node = {g.labels[n]: float(bn[i]) for i, n in enumerate(c.ors)}
    return float(bn.mean()), per_node


def robustness_report(g: AttackGraph) -> RobustnessReport:
    c = _Contracted(g)
    nsp, mspl, cmpl, hist = shortest_attack_paths(g, c)
    ab, bn = betweenness(g, c)
    aod, mod = privilege_out_degree(g)
    mean_len = sum(k * v for k, v in hist.items()) / nsp if nsp else None
    return RobustnessReport(
        nsp=nsp,
        mspl=mspl,
        cmpl=cmpl,
        mean_path_length=mean_len,
        cmc=cmc(g),
        aod=aod,
        mod=mod,
        avg_betweenness=ab,
        node_count=len(g),
        privilege_count=len(c.ors),
        betweenness_per_node=bn,
        out_degree_per_node={g.labels[n]: len(g.succs[n]) for n in c.ors},
        attack_path_length_histogram=hist,
    )
