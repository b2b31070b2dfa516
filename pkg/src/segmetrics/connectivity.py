"""Weighted directed connectivity graph of permitted host-to-host traffic.

An edge (x, y) means x may open connections to y; its weight counts the
distinct (protocol, port) services x may use towards y.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .model import MAX_PORT, WILDCARD, NetworkSpec, PolicySet, SpecError, protocol_universe


@dataclass(frozen=True)
class ConnectivityGraph:
    vertices: tuple[str, ...]
    weights: dict = field(default_factory=dict)  # (src, dst) -> int

    def __post_init__(self):
        for (x, y), w in self.weights.items():
            if x == y:
                raise ValueError(f"self edge on {x!r}")
            if w < 1:
                raise ValueError(f"edge {x}->{y} has weight {w}")

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted(self.weights)

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def adjacency(self) -> np.ndarray:
        """Boolean adjacency matrix in vertex order."""
        idx = self.index()
        a = np.zeros((len(self.vertices), len(self.vertices)), dtype=bool)
        if self.weights:
            rows, cols = zip(*((idx[x], idx[y]) for x, y in self.weights))
            a[list(rows), list(cols)] = True
        return a

    def successors(self) -> dict[str, list[str]]:
        out = {v: [] for v in self.vertices}
        for x, y in sorted(self.weights):
            out[x].append(y)
        return out

    def without_edge(self, x: str, y: str) -> "ConnectivityGraph":
        w = dict(self.weights)
        del w[(x, y)]
        return ConnectivityGraph(self.vertices, w)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["src", "dst", "weight"])
        for (x, y) in sorted(self.weights):
            out.writerow([x, y, self.weights[(x, y)]])
        return buf.getvalue()


def interval_union_size(intervals: Iterable[tuple[int, int]]) -> int:
    """Number of integers covered by a set of inclusive intervals."""
    total, end = 0, None
    for lo, hi in sorted(intervals):
        if end is None or lo > end:
            total += hi - lo + 1
            end = hi
        elif hi > end:
            total += hi - end
            end = hi
    return total


def build_flat(spec: NetworkSpec, universe: Iterable[str] = protocol_universe(),
               port_space: int = MAX_PORT) -> ConnectivityGraph:
    """Complete digraph on the internal hosts, every edge at full weight."""
    universe = tuple(universe)
    if not universe:
        raise SpecError("empty protocol universe")
    hosts = spec.internal_hosts
    w = len(universe) * port_space
    weights = {(x, y): w for x in hosts for y in hosts if x != y}
    return ConnectivityGraph(hosts, weights)


def allowed_services(spec: NetworkSpec, policy: PolicySet, universe: Iterable[str] = protocol_universe(),
                     include_perimeter: bool = False) -> dict:
    """Map (src, dst) -> {protocol: [(low, high), ...]} for every allowed pair.

    Wildcards expand over internal hosts only; the internet host takes part
    only where a rule names it and `include_perimeter` is set.
    """
    universe = tuple(universe)
    if not universe:
        raise SpecError("empty protocol universe")
    known = set(spec.host_ids)
    internal = spec.internal_hosts
    internet = spec.internet_host
    allowed: dict = defaultdict(lambda: defaultdict(list))
    for r in policy.rules:
        for end in (r.src, r.dst):
            if end != WILDCARD and end not in known:
                raise SpecError(f"rule references unknown host {end!r}")
        if not include_perimeter and internet in (r.src, r.dst):
            continue
        srcs = internal if r.src == WILDCARD else (r.src,)
        dsts = internal if r.dst == WILDCARD else (r.dst,)
        protos = universe if r.protocol == WILDCARD else (r.protocol,)
        for x in srcs:
            for y in dsts:
                if x == y:
                    continue
                for p in protos:
                    allowed[(x, y)][p].append((r.low, r.high))
    return allowed


def build_segmented(spec: NetworkSpec, policy: PolicySet, universe: Iterable[str] = protocol_universe(),
                    include_perimeter: bool = False) -> ConnectivityGraph:
    """Connectivity implied by an allow-only rule set (default deny)."""
    if policy.mode != "segmented":
        raise SpecError(f"build_segmented needs a segmented policy, got {policy.mode!r}")
    return build_from_rules(spec, policy, universe, include_perimeter)


def build_from_rules(spec: NetworkSpec, policy: PolicySet, universe: Iterable[str] = protocol_universe(),
                     include_perimeter: bool = False) -> ConnectivityGraph:
    allowed = allowed_services(spec, policy, universe, include_perimeter)
    weights = {}
    for pair, per_proto in allowed.items():
        w = sum(interval_union_size(iv) for iv in per_proto.values())
        if w:
            weights[pair] = w
    vertices = spec.host_ids if include_perimeter else spec.internal_hosts
    return ConnectivityGraph(vertices, weights)


def build(spec: NetworkSpec, policy: PolicySet, universe: Optional[Iterable[str]] = None,
          include_perimeter: bool = False) -> ConnectivityGraph:
    """Dispatch on the policy mode."""
    universe = tuple(universe) if universe is not None else protocol_universe()
    if policy.mode == "flat":
        return build_flat(spec, universe, policy.port_space)
    return build_segmented(spec, policy, universe, include_perimeter)
