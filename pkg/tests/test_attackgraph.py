import json
import random

import pytest

from conftest import target_host_network
from segmetrics.attackgraph import (
    AND,
    LEAF,
    OR,
    AttackGraph,
    compile_facts,
    configuration_facts_for,
    derive,
    fact,
)
from segmetrics.ingest import flat_policy
from segmetrics.model import FirewallRule, Host, NetworkSpec, PolicySet, ScanDocument, SpecError, VulnerabilityRecord

ATT = fact("attackerLocated", "internet")
HACL = fact("hacl", "internet", "web", "tcp", 80)
NSI = fact("networkServiceInfo", "web", "httpd", "tcp", 80, "user")
VUL = fact("vulExists", "web", "CVE-X", "httpd", "remoteExploit", "privEscalation")
HACL_DB = fact("hacl", "web", "db", "tcp", 1433)
NSI_DB = fact("networkServiceInfo", "db", "mssql", "tcp", 1433, "user")
VUL_DB = fact("vulExists", "db", "CVE-Y", "mssql", "remoteExploit", "privEscalation")

WEB_NODES = {
    (LEAF, "attackerLocated(internet)"),
    (LEAF, "hacl(internet,web,tcp,80)"),
    (LEAF, "networkServiceInfo(web,httpd,tcp,80,user)"),
    (LEAF, "vulExists(web,CVE-X,httpd,remoteExploit,privEscalation)"),
    (AND, "R1[attackerLocated(internet)|hacl(internet,web,tcp,80)]"),
    (OR, "netAccess(web,tcp,80)"),
    (AND, "R3[netAccess(web,tcp,80)|networkServiceInfo(web,httpd,tcp,80,user)"
          "|vulExists(web,CVE-X,httpd,remoteExploit,privEscalation)]"),
    (OR, "execCode(web,user)"),
}

DB_NODES = WEB_NODES | {
    (LEAF, "hacl(web,db,tcp,1433)"),
    (LEAF, "networkServiceInfo(db,mssql,tcp,1433,user)"),
    (LEAF, "vulExists(db,CVE-Y,mssql,remoteExploit,privEscalation)"),
    (AND, "R2[execCode(web,user)|hacl(web,db,tcp,1433)]"),
    (OR, "netAccess(db,tcp,1433)"),
    (AND, "R3[netAccess(db,tcp,1433)|networkServiceInfo(db,mssql,tcp,1433,user)"
          "|vulExists(db,CVE-Y,mssql,remoteExploit,privEscalation)]"),
    (OR, "execCode(db,user)"),
}


def test_web_exploit_fixture():
    g = derive([ATT, HACL, NSI, VUL])
    assert g.node_set() == WEB_NODES
    assert g.edge_count == 7
    assert [g.labels[i] for i in g.privileges] == ["netAccess(web,tcp,80)", "execCode(web,user)"]


def test_no_entry_point():
    g = derive([ATT, NSI, VUL])
    assert g.privileges == [] and len(g.roots) == 3


def test_pivot_to_db():
    g = derive([ATT, HACL, NSI, VUL, HACL_DB, NSI_DB, VUL_DB])
    assert g.node_set() == DB_NODES


def test_local_escalation_needs_user():
    kernel = fact("vulExists", "web", "CVE-K", "kernel", "localExploit", "privEscalation")
    g = derive([ATT, HACL, NSI, VUL, kernel])
    assert (OR, "execCode(web,root)") in g.node_set()
    root_nsi = fact("networkServiceInfo", "web", "httpd", "tcp", 80, "root")
    assert (OR, "execCode(web,root)") not in derive([ATT, HACL, root_nsi, kernel]).node_set()


def test_derivation_is_order_independent():
    facts = [ATT, HACL, NSI, VUL, HACL_DB, NSI_DB, VUL_DB]
    reference = derive(facts)
    rng = random.Random(1)
    for _ in range(10):
        rng.shuffle(facts)
        g = derive(facts)
        assert g.node_set() == reference.node_set()
        assert g.to_json() == reference.to_json()


def test_derivation_is_monotone():
    facts = [ATT, HACL, NSI, VUL, HACL_DB, NSI_DB, VUL_DB]
    full = derive(facts).node_set()
    for i in range(len(facts)):
        assert derive(facts[:i] + facts[i + 1:]).node_set() <= full


def test_structure_checked():
    with pytest.raises(ValueError, match="exactly one OR"):
        AttackGraph.from_edges([LEAF, AND, OR, OR], [(0, 1), (1, 2), (1, 3)])
    with pytest.raises(ValueError):
        AttackGraph.from_edges([LEAF, OR], [(0, 1)])


def test_compile_three_hosts_flat(three_hosts):
    facts = compile_facts(three_hosts, flat_policy((FirewallRule("internet", "web", "tcp", 80, 80),)))
    hacl = sorted(f.args for f in facts if f.predicate == "hacl")
    # each internal host reaches the two services it does not run, plus the perimeter rule
    assert len(hacl) == 7
    assert ("internet", "web", "tcp", "80") in hacl


def test_compile_requires_internet():
    spec = NetworkSpec((Host("a"), Host("b")))
    with pytest.raises(SpecError, match="internet"):
        compile_facts(spec, PolicySet("segmented", ()))


def test_vul_facts_per_cve():
    scan = ScanDocument(tuple(VulnerabilityRecord("V", f"CVE-{i}", "sdk", "localExploit", 5.6) for i in range(4)))
    spec, _, seg = target_host_network()
    facts = compile_facts(spec, seg, scan)
    assert sum(f.predicate == "vulExists" for f in facts) == 4


def test_target_host_configuration_counts():
    spec, flat, seg = target_host_network()
    seg_facts = configuration_facts_for(derive(compile_facts(spec, seg)), "V")
    assert sorted(seg_facts) == [
        "hacl(internet,V,tcp,445)",
        "hasAccount(V-user,V,user)",
        "networkServiceInfo(V,sdk,tcp,445,user)",
    ]
    assert len(configuration_facts_for(derive(compile_facts(spec, flat)), "V")) == 37


def test_exports():
    g = derive([ATT, HACL, NSI, VUL])
    doc = json.loads(g.to_json())
    assert len(doc["nodes"]) == 8 and len(doc["edges"]) == 7
    assert g.to_dot().startswith("digraph")
