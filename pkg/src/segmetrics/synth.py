"""Synthetic multi-tier enterprise networks.

Each application service has a web tier, an optional application tier and
a database tier. Users reach web servers, web servers reach application
servers (or databases for 2-tier services) and application servers reach
databases. Management servers connect to every internal host on one agent
port each. The flat policy is the generic allow-all rule plus the same
perimeter rules (internet to web servers).
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from typing import Optional

from .ingest import flat_policy
from .model import (
    Account,
    FirewallRule,
    Host,
    NetworkSpec,
    PolicySet,
    ScanDocument,
    ServiceEndpoint,
    SpecError,
    VulnerabilityRecord,
    WILDCARD,
)

TIER_SERVICES = {
    "web": ("httpd", "tcp", 443),
    "app": ("tomcat", "tcp", 8080),
    "database": ("mssql", "tcp", 1433),
}
AGENT_BASE_PORT = 9000
INTERNET = "internet"


@dataclass(frozen=True)
class SynthConfig:
    host_count: int = 40
    service_count: int = 3
    # probability that a service is 3-tier (otherwise web and app are merged)
    three_tier_share: float = 1.0
    management_service_count: int = 1
    shared_infrastructure_ratio: float = 0.0
    vuln_density: float = 0.3
    seed: int = 0
    web_servers: int = 1
    app_servers: int = 1
    db_servers: int = 3
    # number of services each user reaches; None means all of them
    user_fanout: Optional[int] = None
    cvss_range: tuple = (4.0, 9.8)

    def __post_init__(self):
        if self.host_count < 4:
            raise SpecError("host_count must be at least 4")
        for name in ("three_tier_share", "shared_infrastructure_ratio", "vuln_density"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SpecError(f"{name} must lie in [0,1], got {v}")
        if self.service_count < 1 or self.management_service_count < 0:
            raise SpecError("need at least one service and a non-negative management count")
        if min(self.web_servers, self.app_servers, self.db_servers) < 1:
            raise SpecError("every tier needs at least one server")

    @classmethod
    def from_json(cls, text: str) -> "SynthConfig":
        doc = json.loads(text)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise SpecError(f"unknown synth config field(s): {', '.join(sorted(unknown))}")
        if "cvss_range" in doc:
            doc["cvss_range"] = tuple(doc["cvss_range"])
        return cls(**doc)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1) + "\n"


@dataclass
class SynthNetwork:
    spec: NetworkSpec
    flat: PolicySet
    segmented: PolicySet
    scan: ScanDocument
    tiers: dict = field(default_factory=dict)  # service name -> {tier: [host ids]}

    def __iter__(self):
        return iter((self.spec, self.flat, self.segmented, self.scan))


def generate(cfg: SynthConfig) -> SynthNetwork:
    rng = random.Random(cfg.seed)
    layouts = []
    for _ in range(cfg.service_count):
        three = rng.random() < cfg.three_tier_share
        layouts.append(("web", "app", "database") if three else ("web", "database"))
    per_tier = {"web": cfg.web_servers, "app": cfg.app_servers, "database": cfg.db_servers}
    servers = sum(per_tier[t] for lay in layouts for t in lay)
    users = cfg.host_count - servers - cfg.management_service_count
    if users < 1:
        raise SpecError(
            f"host_count={cfg.host_count} too small: {servers} servers and "
            f"{cfg.management_service_count} management hosts leave no user hosts")

    hosts = [Host(INTERNET, INTERNET, "internet", None)]
    services: list[ServiceEndpoint] = []
    mgmt = [f"mgmt{i + 1}" for i in range(cfg.management_service_count)]
    for m in mgmt:
        hosts.append(Host(m, m, "internal", "management"))
    tiers: dict = {}
    for s, layout in enumerate(layouts, start=1):
        name = f"svc{s}"
        tiers[name] = {}
        for tier in layout:
            ids = [f"{name}-{tier[:3]}{k + 1}" for k in range(per_tier[tier])]
            tiers[name][tier] = ids
            sw, proto, port = TIER_SERVICES[tier]
            for hid in ids:
                hosts.append(Host(hid, hid, "internal", tier))
                services.append(ServiceEndpoint(hid, sw, proto, port, "user"))
    user_ids = [f"user{k + 1:03d}" for k in range(users)]
    hosts.extend(Host(u, u, "internal", "user") for u in user_ids)

    internal = [h.id for h in hosts if h.zone == "internal"]
    for i, m in enumerate(mgmt):
        port = AGENT_BASE_PORT + i
        for hid in internal:
            if hid != m:
                services.append(ServiceEndpoint(hid, f"mgmt-agent{i + 1}", "tcp", port, "root"))
    accounts = tuple(Account(hid, f"{hid}-user", "user") for hid in internal)
    spec = NetworkSpec(tuple(hosts), tuple(services), accounts)

    perimeter, rules = [], []
    for name in tiers:
        for web in tiers[name]["web"]:
            perimeter.append(FirewallRule(INTERNET, web, "tcp", 443, 443))

    names = list(tiers)
    for u in user_ids:
        reach = names if cfg.user_fanout is None else rng.sample(names, min(cfg.user_fanout, len(names)))
        for name in sorted(reach):
            for web in tiers[name]["web"]:
                rules.append(FirewallRule(u, web, "tcp", 443, 443))

    shared_n = round(cfg.shared_infrastructure_ratio * len(names))
    shared = set(rng.sample(names, shared_n)) if shared_n >= 2 else set()
    pool = [db for name in names if name in shared for db in tiers[name]["database"]]
    db_port = TIER_SERVICES["database"][2]
    app_port = TIER_SERVICES["app"][2]
    for name in names:
        t = tiers[name]
        front = t["app"] if "app" in t else t["web"]
        if "app" in t:
            for web in t["web"]:
                for app in t["app"]:
                    rules.append(FirewallRule(web, app, "tcp", app_port, app_port))
        dbs = pool if name in shared else t["database"]
        for f in front:
            for db in dbs:
                rules.append(FirewallRule(f, db, "tcp", db_port, db_port))
    for a in pool:
        for b in pool:
            if a != b:
                rules.append(FirewallRule(a, b, "tcp", db_port, db_port))
    for i, m in enumerate(mgmt):
        port = AGENT_BASE_PORT + i
        rules.append(FirewallRule(m, WILDCARD, "tcp", port, port))

    segmented = PolicySet("segmented", tuple(perimeter + rules))
    flat = flat_policy(perimeter)
    scan = _seed_vulns(rng, cfg, spec, tiers)
    return SynthNetwork(spec, flat, segmented, scan, tiers)


def _seed_vulns(rng: random.Random, cfg: SynthConfig, spec: NetworkSpec, tiers: dict) -> ScanDocument:
    lo, hi = cfg.cvss_range
    records = []
    counter = 0

    def cve() -> str:
        nonlocal counter
        counter += 1
        return f"CVE-2099-{cfg.seed % 1000:03d}{counter:05d}"

    def score() -> float:
        return round(rng.uniform(lo, hi), 1)

    for name in tiers:
        for tier in ("web", "app"):
            for hid in tiers[name].get(tier, ()):
                sw = TIER_SERVICES[tier][0]
                records.append(VulnerabilityRecord(hid, cve(), sw, "remoteExploit", score()))
    for hid in spec.internal_hosts:
        if rng.random() < cfg.vuln_density:
            records.append(VulnerabilityRecord(hid, cve(), "kernel", "localExploit", score()))
    return ScanDocument(tuple(records))
