import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from segmetrics.model import FirewallRule, Host, NetworkSpec, ServiceEndpoint  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Register a one-line pass/fail verdict for the acceptance summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        verdict = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{verdict}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def three_hosts():
    return NetworkSpec((
        Host("internet", "internet", "internet"),
        Host("web", "web", "internal", "web"),
        Host("app", "app", "internal", "app"),
        Host("db", "db", "internal", "database"),
    ), (
        ServiceEndpoint("web", "httpd", "tcp", 80),
        ServiceEndpoint("app", "tomcat", "tcp", 8080),
        ServiceEndpoint("db", "mssql", "tcp", 1433),
    ))


def complete_spec(n: int) -> NetworkSpec:
    hosts = tuple(Host(f"h{i:03d}", f"h{i:03d}") for i in range(n))
    return NetworkSpec((Host("internet", "internet", "internet"),) + hosts)


def target_host_network(others: int = 17):
    """Host V (sdk on tcp/445) among `others` web hosts, plus flat and segmented policies.

    The segmented policy only opens internet -> V:445 towards V.
    """
    from segmetrics.ingest import flat_policy
    from segmetrics.model import Account, PolicySet

    peers = [f"h{i:02d}" for i in range(others)]
    hosts = (Host("internet", "internet", "internet"), Host("V", "V")) + tuple(Host(p, p) for p in peers)
    services = (ServiceEndpoint("V", "sdk", "tcp", 445),) + tuple(
        ServiceEndpoint(p, "httpd", "tcp", 80) for p in peers)
    spec = NetworkSpec(hosts, services, (Account("V", "V-user", "user"),))
    perimeter = (FirewallRule("internet", "V", "tcp", 445, 445),)
    peer_rules = tuple(FirewallRule(a, b, "tcp", 80, 80) for a, b in zip(peers, peers[1:]))
    return spec, flat_policy(perimeter), PolicySet("segmented", perimeter + peer_rules)
