"""Readers and writers for network specs, rule tables and scan documents.

Formats:

* network spec: JSON ``{"hosts": [{id, name, zone, tier, services: [...]}]}``
* rule table: CSV with header ``src,dst,protocol,port``; an optional first
  line ``#mode=flat`` or ``#mode=segmented``
* scan: JSON ``{"findings": [{host, cve, software, range, cvss}]}`` or a
  Nessus v2 XML subset (ReportHost / ReportItem with ``cve`` and
  ``cvss3_base_score`` children)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import xml.etree.ElementTree as ET
from typing import Iterable, Optional

from .model import (
    MAX_PORT,
    MODES,
    RANGES,
    WILDCARD,
    Account,
    FirewallRule,
    Host,
    NetworkSpec,
    PolicySet,
    ScanDocument,
    ServiceEndpoint,
    SpecError,
    ValidationError,
    VulnerabilityRecord,
    is_generic_rule,
    protocol_universe,
    validate,
    validate_scan,
)

log = logging.getLogger(__name__)


class ParseError(SpecError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


_HOST_FIELDS = {"id", "name", "zone", "tier", "services", "accounts", "addresses"}
_SERVICE_FIELDS = {"software", "protocol", "port", "privilege"}
_FINDING_FIELDS = {"host", "cve", "software", "range", "cvss"}


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _warn_unknown(record: dict, allowed: set, where: str) -> None:
    extra = sorted(set(record) - allowed)
    if extra:
        log.warning("%s: ignoring unknown field(s) %s", where, ", ".join(extra))


def _int(value, where: str) -> int:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected integer, got {value!r}") from None


# -- network spec ----------------------------------------------------------

def parse_network(text: str, universe: Optional[Iterable[str]] = None) -> NetworkSpec:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("hosts"), list):
        raise ParseError("network document must be an object with a 'hosts' list")
    hosts, services, accounts = [], [], []
    for i, rec in enumerate(doc["hosts"]):
        where = f"hosts[{i}]"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: expected an object")
        if "id" not in rec:
            raise ParseError(f"{where}: missing required field 'id'")
        _warn_unknown(rec, _HOST_FIELDS, where)
        hid = str(rec["id"])
        hosts.append(Host(
            id=hid,
            name=str(rec.get("name", hid)),
            zone=rec.get("zone", "internal"),
            tier=rec.get("tier"),
            addresses=tuple(rec.get("addresses", ())),
        ))
        for j, svc in enumerate(rec.get("services", ())):
            swhere = f"{where}.services[{j}]"
            for key in ("protocol", "port"):
                if key not in svc:
                    raise ParseError(f"{swhere}: missing required field {key!r}")
            _warn_unknown(svc, _SERVICE_FIELDS, swhere)
            services.append(ServiceEndpoint(
                host=hid,
                software=str(svc.get("software", "")),
                protocol=str(svc["protocol"]),
                port=_int(svc["port"], swhere),
                privilege=svc.get("privilege", "user"),
            ))
        for acc in rec.get("accounts", ()):
            accounts.append(Account(hid, str(acc["principal"]), acc.get("privilege", "user")))
    spec = NetworkSpec(tuple(hosts), tuple(services), tuple(accounts))
    violations = validate(spec, universe)
    if violations:
        raise ValidationError(violations)
    return spec


def emit_network(spec: NetworkSpec) -> str:
    hosts = []
    for h in spec.hosts:
        rec = {"id": h.id, "name": h.name, "zone": h.zone, "tier": h.tier}
        if h.addresses:
            rec["addresses"] = list(h.addresses)
        rec["services"] = [
            {"software": s.software, "protocol": s.protocol, "port": s.port, "privilege": s.privilege}
            for s in spec.services if s.host == h.id
        ]
        accs = [a for a in spec.accounts if a.host == h.id]
        if accs:
            rec["accounts"] = [{"principal": a.principal, "privilege": a.privilege} for a in accs]
        hosts.append(rec)
    return json.dumps({"hosts": hosts}, indent=1) + "\n"


# -- rule tables -----------------------------------------------------------

def parse_port(token: str, port_space: int = MAX_PORT) -> tuple[int, int]:
    token = token.strip()
    if token == WILDCARD:
        return 1, port_space
    try:
        if "-" in token:
            lo, hi = (int(t) for t in token.split("-", 1))
        else:
            lo = hi = int(token)
    except ValueError:
        raise SpecError(f"bad port token {token!r}") from None
    for p in (lo, hi):
        if not 1 <= p <= port_space:
            raise SpecError(f"port {p} outside 1..{port_space}")
    if lo > hi:
        raise SpecError(f"empty port range {token!r}")
    return lo, hi


def parse_rules(
    text: str,
    universe: Optional[Iterable[str]] = None,
    mode: Optional[str] = None,
    port_space: int = MAX_PORT,
) -> PolicySet:
    """Parse a CSV rule table into a policy.

    `mode` (the CLI flag) overrides a ``#mode=`` directive; with neither,
    a table holding the generic ``*,*,*,*`` rule is flat.
    """
    protos = tuple(universe) if universe is not None else protocol_universe()
    lines = text.splitlines()
    directive = None
    start = 0
    while start < len(lines) and lines[start].startswith("#"):
        key, _, value = lines[start][1:].partition("=")
        if key.strip() == "mode":
            directive = value.strip()
            if directive not in MODES:
                raise ParseError(f"unknown mode {directive!r}", start + 1)
        start += 1
    reader = csv.reader(lines[start:])
    try:
        header = [c.strip() for c in next(reader)]
    except StopIteration:
        raise ParseError("missing header row", start + 1) from None
    if header != ["src", "dst", "protocol", "port"]:
        raise ParseError(f"expected header src,dst,protocol,port, got {','.join(header)}", start + 1)
    rules = []
    for offset, row in enumerate(reader, start=start + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", offset)
        src, dst, proto, port = (c.strip() for c in row)
        if proto != WILDCARD and proto not in protos:
            raise ParseError(f"unknown protocol {proto!r}; declared universe: {', '.join(protos)}", offset)
        try:
            lo, hi = parse_port(port, port_space)
        except SpecError as exc:
            raise ParseError(str(exc), offset) from None
        if src == dst and src != WILDCARD:
            raise ParseError(f"rule source and destination are both {src!r}", offset)
        rules.append(FirewallRule(src, dst, proto, lo, hi))
    if mode is None:
        mode = directive
    if mode is None:
        mode = "flat" if any(is_generic_rule(r, port_space) for r in rules) else "segmented"
    return PolicySet(mode, tuple(rules), port_space)


def emit_rules(policy: PolicySet) -> str:
    buf = io.StringIO()
    buf.write(f"#mode={policy.mode}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst", "protocol", "port"])
    for r in policy.rules:
        w.writerow([r.src, r.dst, r.protocol, r.port_token(policy.port_space)])
    return buf.getvalue()


def flat_policy(perimeter: Iterable[FirewallRule] = (), port_space: int = MAX_PORT) -> PolicySet:
    """The generic allow-all-internal policy plus the given perimeter rules."""
    generic = FirewallRule(WILDCARD, WILDCARD, WILDCARD, 1, port_space)
    return PolicySet("flat", (generic, *perimeter), port_space)


# -- scans -----------------------------------------------------------------

_RANGE_ALIASES = {
    "remote": "remoteExploit", "remoteexploit": "remoteExploit", "remote-exploit": "remoteExploit",
    "local": "localExploit", "localexploit": "localExploit", "local-exploit": "localExploit",
}


def _range(value: str, where: str) -> str:
    if value in RANGES:
        return value
    try:
        return _RANGE_ALIASES[str(value).lower()]
    except KeyError:
        raise ParseError(f"{where}: unknown exploit range {value!r}") from None


def _resolver(spec: Optional[NetworkSpec]):
    if spec is None:
        return lambda ref: ref
    table = {}
    for h in spec.hosts:
        for key in (*h.addresses, h.name, h.id):
            table[key] = h.id

    def resolve(ref: str) -> str:
        try:
            return table[ref]
        except KeyError:
            raise SpecError(f"scan references unknown host {ref!r}") from None
    return resolve


def _cvss(value, where: str) -> float:
    try:
        score = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: bad cvss score {value!r}") from None
    if not 0.0 <= score <= 10.0:
        raise ParseError(f"{where}: cvss {score} outside [0,10]")
    return score


def parse_scan(text: str, spec: Optional[NetworkSpec] = None) -> ScanDocument:
    """Parse a JSON scan or a Nessus v2 XML file.

    With `spec`, host references (id, name or address) are resolved to host
    ids; an unresolvable reference is an error.
    """
    if text.lstrip().startswith("<"):
        scan = _parse_nessus(text, _resolver(spec))
    else:
        scan = _parse_json_scan(text, _resolver(spec))
    if spec is not None:
        violations = validate_scan(scan, spec)
        if violations:
            raise ValidationError(violations)
    return scan


def _parse_json_scan(text: str, resolve) -> ScanDocument:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("findings", []), list):
        raise ParseError("scan document must be an object with a 'findings' list")
    records, dropped = [], 0
    for i, rec in enumerate(doc.get("findings", [])):
        where = f"findings[{i}]"
        _warn_unknown(rec, _FINDING_FIELDS, where)
        if "host" not in rec:
            raise ParseError(f"{where}: missing required field 'host'")
        if not rec.get("cve"):
            dropped += 1
            continue
        records.append(VulnerabilityRecord(
            host=resolve(str(rec["host"])),
            vuln_id=str(rec["cve"]),
            software=str(rec.get("software", "")),
            range=_range(rec.get("range", "remoteExploit"), where),
            cvss_base=_cvss(rec.get("cvss", 0.0), where),
        ))
    return _finish(records, (), dropped)


def _parse_nessus(text: str, resolve) -> ScanDocument:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc}", line, col) from None
    records, services, dropped = [], [], 0
    for rh in root.iter("ReportHost"):
        host = resolve(rh.get("name", ""))
        for item in rh.iter("ReportItem"):
            port = int(item.get("port", "0"))
            proto = item.get("protocol", "tcp")
            software = item.get("svc_name", "")
            if port > 0:
                services.append(ServiceEndpoint(host, software, proto, port, "user"))
            cves = [c.text.strip() for c in item.findall("cve") if c.text and c.text.strip()]
            if not cves:
                dropped += 1
                continue
            score_el = item.find("cvss3_base_score")
            if score_el is None:
                score_el = item.find("cvss_base_score")
            score = _cvss(score_el.text if score_el is not None else 0.0,
                          f"{host}:{item.get('pluginID', '?')}")
            rng = "remoteExploit" if port > 0 else "localExploit"
            for cve in dict.fromkeys(cves):
                records.append(VulnerabilityRecord(host, cve, software, rng, score))
    return _finish(records, services, dropped)


def _finish(records, services, dropped) -> ScanDocument:
    warnings = ()
    if dropped:
        msg = f"dropped {dropped} finding(s) without a CVE"
        log.warning(msg)
        warnings = (msg,)
    services = tuple(dict.fromkeys(services))
    return ScanDocument(tuple(records), services, warnings, dropped)


def emit_scan(scan: ScanDocument) -> str:
    findings = [
        {"host": r.host, "cve": r.vuln_id, "software": r.software, "range": r.range, "cvss": r.cvss_base}
        for r in scan.records
    ]
    return json.dumps({"findings": findings}, indent=1) + "\n"


def emit_nessus(scan: ScanDocument) -> str:
    """Write a scan as a minimal Nessus v2 document.

    Remote findings are attached to the matching discovered service when one
    exists on the same host and software; local findings use port 0.
    """
    root = ET.Element("NessusClientData_v2")
    report = ET.SubElement(root, "Report", name="segmetrics")
    hosts: dict[str, ET.Element] = {}

    def host_el(hid):
        if hid not in hosts:
            hosts[hid] = ET.SubElement(report, "ReportHost", name=hid)
        return hosts[hid]

    used = set()
    for r in scan.records:
        port, proto = "0", "tcp"
        if r.range == "remoteExploit":
            for s in scan.services:
                if s.host == r.host and s.software == r.software:
                    port, proto = str(s.port), s.protocol
                    used.add(s)
                    break
        item = ET.SubElement(host_el(r.host), "ReportItem", port=port, protocol=proto,
                             svc_name=r.software, pluginID="0")
        ET.SubElement(item, "cve").text = r.vuln_id
        ET.SubElement(item, "cvss3_base_score").text = repr(r.cvss_base)
    for s in scan.services:
        if s not in used:
            ET.SubElement(host_el(s.host), "ReportItem", port=str(s.port), protocol=s.protocol,
                          svc_name=s.software, pluginID="0")
    return ET.tostring(root, encoding="unicode")
