"""Fact compilation and AND/OR attack-graph derivation.

Four interaction rules are applied to a least fixed point:

R1  netAccess(H,Proto,Port) <- attackerLocated(Z), hacl(Z,H,Proto,Port)
R2  netAccess(H,Proto,Port) <- execCode(H0,_), hacl(H0,H,Proto,Port)
R3  execCode(H,Perm) <- netAccess(H,Proto,Port),
        networkServiceInfo(H,SW,Proto,Port,Perm),
        vulExists(H,_,SW,remoteExploit,privEscalation)
R4  execCode(H,root) <- execCode(H,user),
        vulExists(H,_,SW,localExploit,privEscalation)

Every input fact becomes a LEAF node, every rule instance an AND node and
every derived literal an OR node.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .model import WILDCARD, NetworkSpec, PolicySet, ScanDocument, SpecError, protocol_universe

LEAF, AND, OR = "LEAF", "AND", "OR"

PREDICATE_ARITY = {
    "hacl": 4,
    "networkServiceInfo": 5,
    "vulExists": 5,
    "hasAccount": 3,
    "attackerLocated": 1,
}


class Fact(NamedTuple):
    predicate: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(map(str, self.args))})"


def fact(predicate: str, *args) -> Fact:
    if PREDICATE_ARITY.get(predicate) != len(args):
        raise ValueError(f"bad fact {predicate}{args}")
    return Fact(predicate, tuple(str(a) for a in args))


def literal(predicate: str, *args) -> Fact:
    return Fact(predicate, tuple(str(a) for a in args))


@dataclass
class AttackGraph:
    kinds: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    preds: list = field(default_factory=list)
    succs: list = field(default_factory=list)
    rules: dict = field(default_factory=dict)  # AND node -> rule name
    facts: dict = field(default_factory=dict)  # LEAF node -> Fact

    @classmethod
    def from_edges(cls, kinds: Iterable[str], edges: Iterable[tuple[int, int]],
                   labels: Optional[Iterable[str]] = None) -> "AttackGraph":
        kinds = list(kinds)
        g = cls(kinds, list(labels) if labels is not None else [f"{k.lower()}{i}" for i, k in enumerate(kinds)],
                [[] for _ in kinds], [[] for _ in kinds])
        for u, v in edges:
            g.add_edge(u, v)
        g.check()
        return g

    def add_node(self, kind: str, label: str) -> int:
        self.kinds.append(kind)
        self.labels.append(label)
        self.preds.append([])
        self.succs.append([])
        return len(self.kinds) - 1

    def add_edge(self, u: int, v: int) -> None:
        self.succs[u].append(v)
        self.preds[v].append(u)

    def __len__(self) -> int:
        return len(self.kinds)

    @property
    def roots(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == LEAF]

    @property
    def privileges(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == OR]

    @property
    def steps(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == AND]

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.succs)

    def node_set(self) -> set[tuple[str, str]]:
        return set(zip(self.kinds, self.labels))

    def check(self) -> None:
        """Raise ValueError unless the AND/OR structural invariants hold.

        LEAF nodes have no predecessors; AND nodes have a single OR
        conclusion and only LEAF/OR premises; OR nodes are concluded by
        at least one AND node and feed only AND nodes.
        """
        for i, k in enumerate(self.kinds):
            preds = [self.kinds[p] for p in self.preds[i]]
            succs = [self.kinds[s] for s in self.succs[i]]
            if k == LEAF:
                if preds:
                    raise ValueError(f"LEAF {self.labels[i]} has predecessors")
                if any(s != AND for s in succs):
                    raise ValueError(f"LEAF {self.labels[i]} feeds a non-AND node")
            elif k == AND:
                if len(succs) != 1 or succs[0] != OR:
                    raise ValueError(f"AND {self.labels[i]} must conclude exactly one OR node")
                if not preds or any(p == AND for p in preds):
                    raise ValueError(f"AND {self.labels[i]} has bad premises")
            elif k == OR:
                if not preds or any(p != AND for p in preds):
                    raise ValueError(f"OR {self.labels[i]} must be concluded by AND nodes")
                if any(s != AND for s in succs):
                    raise ValueError(f"OR {self.labels[i]} feeds a non-AND node")
            else:
                raise ValueError(f"unknown node kind {k!r}")

    def to_json(self) -> str:
        nodes = [{"id": i, "kind": k, "label": l, **({"rule": self.rules[i]} if i in self.rules else {})}
                 for i, (k, l) in enumerate(zip(self.kinds, self.labels))]
        edges = [[u, v] for u, vs in enumerate(self.succs) for v in vs]
        return json.dumps({"nodes": nodes, "edges": edges}, indent=1) + "\n"

    def to_dot(self) -> str:
        shape = {LEAF: "box", AND: "ellipse", OR: "diamond"}
        lines = ["digraph attack_graph {"]
        for i, (k, l) in enumerate(zip(self.kinds, self.labels)):
            text = l.replace('"', r'\"')
            lines.append(f'  n{i} [label="{text}", shape={shape[k]}];')
        for u, vs in enumerate(self.succs):
            for v in vs:
                lines.append(f"  n{u} -> n{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def compile_facts(spec: NetworkSpec, policy: PolicySet, scan: Optional[ScanDocument] = None,
                  universe: Optional[Iterable[str]] = None) -> frozenset[Fact]:
    """Translate network, policy and scan into ground configuration facts.

    One hacl fact is emitted per (source, destination service) pair the
    policy lets through; wildcard endpoints cover internal hosts only.
    """
    internet = spec.internet_host
    if internet is None:
        raise SpecError("network has no internet-zone host (attacker location)")
    universe = tuple(universe) if universe is not None else protocol_universe()
    scan = scan or ScanDocument()
    known = set(spec.host_ids)
    internal = spec.internal_hosts
    facts = {fact("attackerLocated", internet)}

    services = list(dict.fromkeys((*spec.services, *scan.services)))
    for s in services:
        facts.add(fact("networkServiceInfo", s.host, s.software, s.protocol, s.port, s.privilege))

    for r in policy.rules:
        for end in (r.src, r.dst):
            if end != WILDCARD and end not in known:
                raise SpecError(f"rule references unknown host {end!r}")
    for s in services:
        sources = set()
        for r in policy.rules:
            if r.dst == WILDCARD:
                if s.host not in internal:
                    continue
            elif r.dst != s.host:
                continue
            if r.protocol != WILDCARD and r.protocol != s.protocol:
                continue
            if r.protocol == WILDCARD and s.protocol not in universe:
                continue
            if not r.low <= s.port <= r.high:
                continue
            if r.src == WILDCARD:
                sources.update(internal)
            else:
                sources.add(r.src)
        sources.discard(s.host)
        for src in sources:
            facts.add(fact("hacl", src, s.host, s.protocol, s.port))

    for v in scan.records:
        facts.add(fact("vulExists", v.host, v.vuln_id, v.software, v.range, v.consequence))
    for a in spec.accounts:
        facts.add(fact("hasAccount", a.principal, a.host, a.privilege))
    return frozenset(facts)


def derive(facts: Iterable[Fact]) -> AttackGraph:
    """Least fixed point of R1-R4 over `facts` as an AND/OR graph."""
    facts = sorted(set(facts))
    g = AttackGraph()
    leaf: dict[Fact, int] = {}
    for f in facts:
        leaf[f] = g.add_node(LEAF, str(f))
        g.facts[leaf[f]] = f

    hacl_by_src = defaultdict(list)
    nsi_by_port = defaultdict(list)
    remote_vulns = defaultdict(list)
    local_vulns = defaultdict(list)
    attackers = []
    for f in facts:
        p, a = f
        if p == "hacl":
            hacl_by_src[a[0]].append(f)
        elif p == "networkServiceInfo":
            nsi_by_port[(a[0], a[2], a[3])].append(f)
        elif p == "vulExists" and a[4] == "privEscalation":
            if a[3] == "remoteExploit":
                remote_vulns[(a[0], a[2])].append(f)
            elif a[3] == "localExploit":
                local_vulns[a[0]].append(f)
        elif p == "attackerLocated":
            attackers.append(f)

    derived: dict[Fact, int] = {}
    queue: deque[Fact] = deque()

    def conclude(rule: str, premises: list[int], head: Fact) -> None:
        node = derived.get(head)
        if node is None:
            node = derived[head] = g.add_node(OR, str(head))
            queue.append(head)
        step = g.add_node(AND, f"{rule}[{'|'.join(g.labels[p] for p in premises)}]")
        g.rules[step] = rule
        for p in premises:
            g.add_edge(p, step)
        g.add_edge(step, node)

    for att in attackers:
        for h in hacl_by_src.get(att.args[0], ()):
            conclude("R1", [leaf[att], leaf[h]], literal("netAccess", h.args[1], h.args[2], h.args[3]))

    while queue:
        lit = queue.popleft()
        node = derived[lit]
        if lit.predicate == "netAccess":
            host, proto, port = lit.args
            for nsi in nsi_by_port.get((host, proto, port), ()):
                for vul in remote_vulns.get((host, nsi.args[1]), ()):
                    conclude("R3", [node, leaf[nsi], leaf[vul]], literal("execCode", host, nsi.args[4]))
        else:
            host, perm = lit.args
            for h in hacl_by_src.get(host, ()):
                conclude("R2", [node, leaf[h]], literal("netAccess", h.args[1], h.args[2], h.args[3]))
            if perm == "user":
                for vul in local_vulns.get(host, ()):
                    conclude("R4", [node, leaf[vul]], literal("execCode", host, "root"))
    return g


def configuration_facts_for(g: AttackGraph, host: str) -> list[str]:
    """Labels of configuration leaves (hacl, service, account facts) naming `host`."""
    out = []
    for i in g.roots:
        f = g.facts.get(i)
        if f is None:
            continue
        p, a = f
        if (p == "hacl" and host in a[:2]) or (p == "networkServiceInfo" and a[0] == host) \
                or (p == "hasAccount" and a[1] == host):
            out.append(g.labels[i])
    return out

