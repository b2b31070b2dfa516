"""Core domain types: hosts, services, firewall rules, vulnerabilities."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

WILDCARD = "*"
MAX_PORT = 65535
DEFAULT_PROTOCOLS = ("tcp", "udp", "sctp")

ZONES = ("internal", "internet")
TIERS = ("user", "web", "app", "database", "management")
PRIVILEGES = ("user", "root")
RANGES = ("remoteExploit", "localExploit")
CONSEQUENCES = ("privEscalation",)
MODES = ("flat", "segmented")


def protocol_universe(size: int = 3) -> tuple[str, ...]:
    """Return a protocol universe with `size` members.

    The first three names are the usual transport protocols; further
    members get synthetic labels ``proto4``, ``proto5``, ...
    """
    if size < 1:
        raise ValueError("protocol universe must be non-empty")
    names = list(DEFAULT_PROTOCOLS[:size])
    names.extend(f"proto{i}" for i in range(len(names) + 1, size + 1))
    return tuple(names)


@dataclass(frozen=True)
class Host:
    id: str
    name: str = ""
    zone: str = "internal"
    tier: Optional[str] = None
    addresses: tuple[str, ...] = ()

    @property
    def is_internet(self) -> bool:
        return self.zone == "internet"


@dataclass(frozen=True)
class ServiceEndpoint:
    host: str
    software: str
    protocol: str
    port: int
    privilege: str = "user"


@dataclass(frozen=True)
class Account:
    host: str
    principal: str
    privilege: str = "user"


@dataclass(frozen=True)
class NetworkSpec:
    hosts: tuple[Host, ...]
    services: tuple[ServiceEndpoint, ...] = ()
    accounts: tuple[Account, ...] = ()

    def host(self, host_id: str) -> Host:
        for h in self.hosts:
            if h.id == host_id:
                return h
        raise KeyError(host_id)

    @property
    def host_ids(self) -> tuple[str, ...]:
        return tuple(h.id for h in self.hosts)

    @property
    def internal_hosts(self) -> tuple[str, ...]:
        return tuple(h.id for h in self.hosts if not h.is_internet)

    @property
    def internet_host(self) -> Optional[str]:
        for h in self.hosts:
            if h.is_internet:
                return h.id
        return None

    def services_on(self, host_id: str) -> tuple[ServiceEndpoint, ...]:
        return tuple(s for s in self.services if s.host == host_id)


@dataclass(frozen=True)
class FirewallRule:
    src: str
    dst: str
    protocol: str
    low: int = 1
    high: int = MAX_PORT

    @property
    def ports(self) -> tuple[int, int]:
        return (self.low, self.high)

    def port_token(self, port_space: int = MAX_PORT) -> str:
        if self.low == 1 and self.high == port_space:
            return WILDCARD
        if self.low == self.high:
            return str(self.low)
        return f"{self.low}-{self.high}"


@dataclass(frozen=True)
class PolicySet:
    mode: str
    rules: tuple[FirewallRule, ...] = ()
    port_space: int = MAX_PORT

    def without(self, index: int) -> "PolicySet":
        """Copy of this policy with the rule at `index` removed."""
        rules = self.rules[:index] + self.rules[index + 1:]
        return PolicySet(self.mode, rules, self.port_space)


@dataclass(frozen=True)
class VulnerabilityRecord:
    host: str
    vuln_id: str
    software: str
    range: str = "remoteExploit"
    cvss_base: float = 0.0
    consequence: str = "privEscalation"


@dataclass(frozen=True)
class ScanDocument:
    records: tuple[VulnerabilityRecord, ...] = ()
    services: tuple[ServiceEndpoint, ...] = ()
    warnings: tuple[str, ...] = ()
    dropped: int = 0


@dataclass(frozen=True)
class Violation:
    record: str
    invariant: str
    message: str = ""


class SpecError(ValueError):
    """Raised when an input document or configuration is unusable."""


class ValidationError(SpecError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        text = "; ".join(f"{v.record}: {v.message or v.invariant}" for v in violations)
        super().__init__(text)


def _dupes(items: Iterable) -> list:
    return sorted((k for k, n in Counter(items).items() if n > 1), key=repr)


def validate(spec: NetworkSpec, universe: Optional[Iterable[str]] = None) -> list[Violation]:
    """Check every type invariant of a network spec.

    Violations are returned as data; an empty list means the network description is usable
    by every builder downstream.
    """
    out: list[Violation] = []
    for hid in _dupes(h.id for h in spec.hosts):
        out.append(Violation(hid, "unique-host-id", f"duplicate host id {hid!r}"))
    for h in spec.hosts:
        if not h.id:
            out.append(Violation(repr(h), "host-id", "empty host id"))
        if h.zone not in ZONES:
            out.append(Violation(h.id, "zone", f"unknown zone {h.zone!r}"))
        if h.tier is not None and h.tier not in TIERS:
            out.append(Violation(h.id, "tier", f"unknown tier {h.tier!r}"))
    internet = sorted(h.id for h in spec.hosts if h.zone == "internet")
    if len(internet) > 1:
        out.append(Violation(",".join(internet), "single-attacker-location",
                             f"{len(internet)} internet-zone hosts"))

    known = {h.id for h in spec.hosts}
    protos = set(universe) if universe is not None else None
    for s in spec.services:
        label = f"{s.host}:{s.protocol}/{s.port}"
        if s.host not in known:
            out.append(Violation(label, "service-host", f"unknown host {s.host!r}"))
        if not 1 <= s.port <= MAX_PORT:
            out.append(Violation(label, "port-range", f"port {s.port} outside 1..{MAX_PORT}"))
        if s.privilege not in PRIVILEGES:
            out.append(Violation(label, "privilege", f"unknown privilege {s.privilege!r}"))
        if not s.protocol:
            out.append(Violation(label, "protocol", "empty protocol"))
        elif protos is not None and s.protocol not in protos:
            out.append(Violation(label, "protocol", f"protocol {s.protocol!r} not in universe"))
    for key in _dupes((s.host, s.protocol, s.port) for s in spec.services):
        out.append(Violation(f"{key[0]}:{key[1]}/{key[2]}", "unique-endpoint",
                             "duplicate (host, protocol, port)"))
    for a in spec.accounts:
        if a.host not in known:
            out.append(Violation(a.principal, "account-host", f"unknown host {a.host!r}"))
    return sorted(out, key=lambda v: (v.invariant, v.record))


def validate_scan(scan: ScanDocument, spec: NetworkSpec) -> list[Violation]:
    out: list[Violation] = []
    known = {h.id for h in spec.hosts}
    for r in scan.records:
        label = f"{r.host}:{r.vuln_id}"
        if r.host not in known:
            out.append(Violation(label, "vuln-host", f"unknown host {r.host!r}"))
        if not 0.0 <= r.cvss_base <= 10.0:
            out.append(Violation(label, "cvss-range", f"cvss {r.cvss_base} outside [0,10]"))
        if r.range not in RANGES:
            out.append(Violation(label, "range", f"unknown range {r.range!r}"))
    for key in _dupes((r.host, r.vuln_id) for r in scan.records):
        out.append(Violation(f"{key[0]}:{key[1]}", "unique-vuln", "duplicate (host, vuln_id)"))
    return sorted(out, key=lambda v: (v.invariant, v.record))


def validate_policy(policy: PolicySet, spec: Optional[NetworkSpec] = None) -> list[Violation]:
    out: list[Violation] = []
    if policy.mode not in MODES:
        out.append(Violation("policy", "mode", f"unknown mode {policy.mode!r}"))
    known = {h.id for h in spec.hosts} if spec is not None else None
    for i, r in enumerate(policy.rules):
        label = f"rule[{i}]"
        if r.src == r.dst and r.src != WILDCARD:
            out.append(Violation(label, "src-ne-dst", f"self rule on {r.src!r}"))
        if not 1 <= r.low <= r.high <= policy.port_space:
            out.append(Violation(label, "port-range", f"bad range {r.low}-{r.high}"))
        if known is not None:
            for end in (r.src, r.dst):
                if end != WILDCARD and end not in known:
                    out.append(Violation(label, "rule-host", f"unknown host {end!r}"))
    if policy.mode == "flat":
        internet = spec.internet_host if spec is not None else None
        generic = [r for r in policy.rules if is_generic_rule(r, policy.port_space)]
        others = [r for r in policy.rules if not is_generic_rule(r, policy.port_space)]
        if len(generic) != 1:
            out.append(Violation("policy", "flat-generic-rule",
                                 f"flat policy needs exactly one generic rule, found {len(generic)}"))
        for r in others:
            if internet is None or internet not in (r.src, r.dst):
                out.append(Violation(f"{r.src}->{r.dst}", "flat-perimeter-only",
                                     "flat policy may only add perimeter rules"))
    return out


def is_generic_rule(rule: FirewallRule, port_space: int = MAX_PORT) -> bool:
    """True for the allow-everything-internal rule ``*,*,*,1-port_space``."""
    return (rule.src == WILDCARD and rule.dst == WILDCARD and rule.protocol == WILDCARD
            and rule.low == 1 and rule.high == port_space)
