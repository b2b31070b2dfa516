import random

from hypothesis import given, strategies as st

from segmetrics.model import (
    FirewallRule,
    Host,
    NetworkSpec,
    PolicySet,
    ServiceEndpoint,
    protocol_universe,
    validate,
    validate_policy,
)


def test_well_formed_spec_has_no_violations(three_hosts):
    assert validate(three_hosts) == []


def test_duplicate_host_id_named():
    spec = NetworkSpec((Host("a"), Host("b"), Host("a")))
    violations = validate(spec)
    assert len(violations) == 1
    assert violations[0].record == "a"
    assert violations[0].invariant == "unique-host-id"


def test_two_internet_hosts():
    spec = NetworkSpec((Host("i1", zone="internet"), Host("i2", zone="internet"), Host("a")))
    violations = validate(spec)
    assert [v.invariant for v in violations] == ["single-attacker-location"]


def test_endpoint_invariants():
    spec = NetworkSpec((Host("a"),), (
        ServiceEndpoint("a", "x", "tcp", 80),
        ServiceEndpoint("a", "y", "tcp", 80),
        ServiceEndpoint("a", "z", "tcp", 70000),
        ServiceEndpoint("ghost", "z", "gre", 1),
    ))
    kinds = sorted(v.invariant for v in validate(spec, protocol_universe()))
    assert kinds == ["port-range", "protocol", "service-host", "unique-endpoint"]


def test_protocol_universe():
    assert protocol_universe() == ("tcp", "udp", "sctp")
    assert protocol_universe(5)[3:] == ("proto4", "proto5")


def test_flat_policy_shape():
    spec = NetworkSpec((Host("internet", zone="internet"), Host("a"), Host("b")))
    generic = FirewallRule("*", "*", "*", 1, 65535)
    ok = PolicySet("flat", (generic, FirewallRule("internet", "a", "tcp", 80, 80)))
    assert validate_policy(ok, spec) == []
    bad = PolicySet("flat", (generic, FirewallRule("a", "b", "tcp", 80, 80)))
    assert [v.invariant for v in validate_policy(bad, spec)] == ["flat-perimeter-only"]


host_ids = st.lists(st.sampled_from("abcdef"), min_size=1, max_size=8)


@given(host_ids, st.integers(0, 2**16))
def test_validate_is_order_insensitive_and_idempotent(ids, seed):
    hosts = [Host(i, zone="internet" if i == "f" else "internal") for i in ids]
    spec = NetworkSpec(tuple(hosts))
    shuffled = hosts[:]
    random.Random(seed).shuffle(shuffled)
    first = validate(spec)
    assert first == validate(NetworkSpec(tuple(shuffled)))
    assert first == validate(spec)
