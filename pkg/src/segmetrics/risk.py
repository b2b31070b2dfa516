"""Cumulative compromise probability of privilege nodes.

Each AND node carries an independent local success event; LEAF facts
always hold. A privilege holds when at least one of its acyclic
derivations has every AND event succeed, so premises shared by several
derivations are shared events rather than independent draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional

import numpy as np

from .attackgraph import AND, LEAF, OR, AttackGraph
from .model import ScanDocument, VulnerabilityRecord

DEFAULT_BUDGET = 20
TOLERANCE = 1e-9
MAX_ITERATIONS = 100_000


@dataclass
class RiskReport:
    values: dict = field(default_factory=dict)  # privilege label -> probability
    method: str = "exact"

    @property
    def mean(self) -> Optional[float]:
        return sum(self.values.values()) / len(self.values) if self.values else None

    def to_csv(self) -> str:
        lines = ["privilege_node,probability,method"]
        for label, p in self.values.items():
            lines.append(f'"{label}",{p:.12g},{self.method}')
        return "\n".join(lines) + "\n"


def exploit_probability(v: VulnerabilityRecord) -> float:
    return v.cvss_base / 10.0


def assign_probabilities(g: AttackGraph, scan: Optional[ScanDocument] = None,
                         access_probability: float = 1.0) -> dict[int, float]:
    """Per-AND success probability.

    Exploit steps take the CVSS-derived probability of their vulnerability
    premise; pure reachability steps take `access_probability`.
    """
    scores = {}
    if scan is not None:
        scores = {(r.host, r.vuln_id): exploit_probability(r) for r in scan.records}
    probs = {}
    for a in g.steps:
        p = access_probability
        for q in g.preds[a]:
            f = g.facts.get(q)
            if f is not None and f.predicate == "vulExists":
                p = scores.get((f.args[0], f.args[1]), 1.0)
        probs[a] = p
    return probs


def _check_probs(g: AttackGraph, probs: Mapping[int, float]) -> None:
    for a in g.steps:
        if a not in probs:
            raise KeyError(f"no exploit probability for AND node {g.labels[a]!r}")
        if not 0.0 <= probs[a] <= 1.0:
            raise ValueError(f"probability {probs[a]} for {g.labels[a]!r} outside [0,1]")


def _minimize(sets: Iterable[frozenset]) -> list[frozenset]:
    out: list[frozenset] = []
    for s in sorted(set(sets), key=len):
        if not any(t <= s for t in out):
            out.append(s)
    return out


def derivation_sets(g: AttackGraph) -> dict[int, list[frozenset]]:
    """Minimal AND-event sets supporting each privilege via acyclic derivations."""
    heads = {o: [a for a in g.preds[o]] for o in g.privileges}
    memo: dict = {}

    def derive(o: int, stack: frozenset) -> list[frozenset]:
        key = (o, stack)
        if key in memo:
            return memo[key]
        inner = stack | {o}
        found = []
        for a in heads[o]:
            combos = [frozenset((a,))]
            for q in g.preds[a]:
                if g.kinds[q] != OR:
                    continue
                if q in inner:
                    combos = []
                    break
                subs = derive(q, inner)
                combos = _minimize(c | s for c in combos for s in subs)
                if not combos:
                    break
            found.extend(combos)
        memo[key] = result = _minimize(found)
        return result

    return {o: derive(o, frozenset()) for o in g.privileges}


def union_probability(sets: list[frozenset], probs: Mapping[int, float]) -> float:
    """P(at least one set has all its events succeed), events independent.

    Inclusion-exclusion applied one set at a time, absorbing supersets as it
    goes: P(A1 | ... | An) = P(An) + P(A1..An-1) - P((A1&An) | ... | (An-1&An)).
    """

    @lru_cache(maxsize=None)
    def prob(family: frozenset) -> float:
        if not family:
            return 0.0
        members = sorted(family, key=lambda s: (len(s), sorted(s)))
        last, rest = members[-1], members[:-1]
        p_last = float(np.prod([probs[a] for a in last])) if last else 1.0
        joined = frozenset(_minimize(s | last for s in rest))
        return p_last + prob(frozenset(rest)) - prob(joined)

    return prob(frozenset(_minimize(sets)))


def _exact(g: AttackGraph, probs: Mapping[int, float]) -> dict[int, float]:
    sets = derivation_sets(g)
    return {o: min(1.0, max(0.0, union_probability(sets[o], probs))) for o in g.privileges}


def _iterative(g: AttackGraph, probs: Mapping[int, float], tol: float = TOLERANCE) -> dict[int, float]:
    """Noisy-OR propagation iterated to a fixed point from zero.

    AND value = local probability times the product of its OR premises;
    OR value = 1 - prod(1 - AND values). Cycles read the previous sweep.
    """
    ors = g.privileges
    if not ors:
        return {}
    pos = {o: i for i, o in enumerate(ors)}
    steps = g.steps
    m = len(ors)
    sentinel = m  # index of a constant 1.0
    gather, offsets = [], []
    for a in steps:
        offsets.append(len(gather))
        gather.extend(pos[q] for q in g.preds[a] if g.kinds[q] == OR)
        gather.append(sentinel)
    gather = np.asarray(gather, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    local = np.asarray([probs[a] for a in steps])
    head = np.asarray([pos[g.succs[a][0]] for a in steps], dtype=np.int64)

    v = np.zeros(m + 1)
    v[sentinel] = 1.0
    for _ in range(MAX_ITERATIONS):
        and_vals = local * np.multiply.reduceat(v[gather], offsets)
        fail = np.ones(m)
        np.multiply.at(fail, head, 1.0 - and_vals)
        new = 1.0 - fail
        delta = float(np.abs(new - v[:m]).max())
        v[:m] = np.maximum(new, v[:m])
        if delta < tol:
            break
    return {o: float(v[pos[o]]) for o in ors}


def cumulative_risk(g: AttackGraph, probs: Mapping[int, float], method: str = "auto",
                    budget: int = DEFAULT_BUDGET) -> RiskReport:
    """Probability that each privilege is obtained.

    `method` is "exact", "iterative" or "auto"; auto picks exact when the
    graph has at most `budget` AND plus OR nodes.
    """
    _check_probs(g, probs)
    if method == "auto":
        size = sum(1 for k in g.kinds if k != LEAF)
        method = "exact" if size <= budget else "iterative"
    if method == "exact":
        values = _exact(g, probs)
    elif method == "iterative":
        values = _iterative(g, probs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RiskReport({g.labels[o]: values[o] for o in g.privileges}, method)
