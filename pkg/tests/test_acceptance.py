"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed together
in the "acceptance criteria" section of the pytest summary.
"""

import random
import time

import pytest

import oracles
from conftest import complete_spec, target_host_network
from test_attackgraph import ATT, DB_NODES, HACL, HACL_DB, NSI, NSI_DB, VUL, VUL_DB, WEB_NODES
from test_exposure import _check_against_oracles
from test_risk import series_parallel
from test_robustness import check_against_oracle
from segmetrics.attackgraph import AND, LEAF, OR, AttackGraph, compile_facts, configuration_facts_for, derive
from segmetrics.cli import main
from segmetrics.connectivity import build, build_flat
from segmetrics.exposure import enice, exposure_report
from segmetrics.model import PolicySet
from segmetrics.pipeline import analyze, compare
from segmetrics.risk import DEFAULT_BUDGET, cumulative_risk
from segmetrics.synth import SynthConfig, generate

ENTERPRISE = SynthConfig(host_count=40, service_count=3, seed=0)


def test_c01_flat_enice_exact(record_criterion):
    start = time.perf_counter()
    got = {n: enice(build_flat(complete_spec(n))) for n in (300, 238)}
    elapsed = time.perf_counter() - start
    ok = got == {300: 17_635_468_500, 238: 11_089_701_630} and elapsed < 5
    record_criterion(1, "flat ENICE exactness", ok, f"300 -> {got[300]:,}, 238 -> {got[238]:,}, {elapsed:.2f}s")
    assert ok


def test_c02_complete_graph_suite(record_criterion):
    failures = []
    for n in (5, 50, 300):
        r = exposure_report(build_flat(complete_spec(n)))
        got = (r.global_clustering, r.mean_path_length, r.diameter, r.infinity_fraction,
               r.avg_out_degree, r.avg_closeness, r.tinr)
        if got != (1.0, 1.0, 1, 0.0, n - 1, 1.0, n * (n - 1)):
            failures.append((n, got))
    ok = not failures
    record_criterion(2, "complete-graph exposure suite", ok, "N in {5, 50, 300}" if ok else str(failures))
    assert ok


def test_c03_tiered_segmentation(record_criterion):
    net = generate(ENTERPRISE)
    flat = exposure_report(build(net.spec, net.flat))
    seg = exposure_report(build(net.spec, net.segmented))
    enice_imp = 100 * (flat.enice - seg.enice) / flat.enice
    gc_imp = 100 * (flat.global_clustering - seg.global_clustering) / flat.global_clustering
    ok = (2 <= seg.mean_path_length <= 3 and seg.diameter == 3 and enice_imp >= 99 and gc_imp >= 60)
    record_criterion(3, "tiered segmentation behaviour", ok,
                     f"MPL {seg.mean_path_length:.3f}, diameter {seg.diameter}, "
                     f"ENICE -{enice_imp:.5f}%, GC -{gc_imp:.1f}%")
    assert ok


def test_c04_exposure_oracles(record_criterion):
    rng = random.Random(2024)
    start = time.perf_counter()
    failures = 0
    for _ in range(200):
        vertices, edges = oracles.random_digraph(rng, rng.randint(2, 12), rng.random())
        try:
            _check_against_oracles(vertices, edges)
        except AssertionError:
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 30
    record_criterion(4, "exposure oracle equivalence", ok, f"200 digraphs, {failures} mismatches, {elapsed:.1f}s")
    assert ok


def test_c05_robustness_oracles(record_criterion):
    rng = random.Random(7)
    start = time.perf_counter()
    failures = 0
    for _ in range(100):
        kinds, edges = oracles.random_attack_graph(rng, max_nodes=30)
        assert len(kinds) <= 30
        try:
            check_against_oracle(kinds, edges)
        except AssertionError:
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 60
    record_criterion(5, "robustness oracle equivalence", ok, f"100 graphs, {failures} mismatches, {elapsed:.1f}s")
    assert ok


def test_c06_derivation(record_criterion):
    fixtures_ok = (derive([ATT, HACL, NSI, VUL]).node_set() == WEB_NODES
                   and derive([ATT, NSI, VUL]).privileges == []
                   and derive([ATT, HACL, NSI, VUL, HACL_DB, NSI_DB, VUL_DB]).node_set() == DB_NODES)
    spec, flat, seg = target_host_network()
    n_seg = len(configuration_facts_for(derive(compile_facts(spec, seg)), "V"))
    n_flat = len(configuration_facts_for(derive(compile_facts(spec, flat)), "V"))
    ok = fixtures_ok and n_seg == 3 and n_flat >= 10
    record_criterion(6, "derivation correctness", ok,
                     f"fixtures {'match' if fixtures_ok else 'differ'}, V facts flat {n_flat} vs segmented {n_seg}")
    assert ok


def test_c07_risk_semantics(record_criterion):
    chain = AttackGraph.from_edges([LEAF, AND, OR, AND, OR], [(0, 1), (1, 2), (2, 3), (3, 4)])
    serial = cumulative_risk(chain, {1: 0.8, 3: 0.8}, "exact").values[chain.labels[4]]
    par = AttackGraph.from_edges([LEAF, LEAF, AND, AND, OR], [(0, 2), (1, 3), (2, 4), (3, 4)])
    parallel = cumulative_risk(par, {2: 0.5, 3: 0.5}, "exact").values[par.labels[4]]

    rng = random.Random(99)
    brute_err = 0.0
    for _ in range(60):
        kinds, edges = oracles.random_attack_graph(rng, max_nodes=28)
        g = AttackGraph.from_edges(kinds, edges)
        assert len(g.steps) <= 15
        probs = {a: rng.random() for a in g.steps}
        expected = oracles.risk_brute_force(kinds, g.preds, probs)
        got = cumulative_risk(g, probs, "exact").values
        brute_err = max([brute_err] + [abs(got[g.labels[o]] - expected[o]) for o in g.privileges])

    iter_err = 0.0
    for _ in range(60):
        while True:
            kinds, edges, probs = series_parallel(rng)
            if sum(k != LEAF for k in kinds) <= DEFAULT_BUDGET:
                break
        g = AttackGraph.from_edges(kinds, edges)
        e = cumulative_risk(g, probs, "exact").values
        i = cumulative_risk(g, probs, "iterative").values
        iter_err = max([iter_err] + [abs(e[k] - i[k]) for k in e])

    ok = serial == pytest.approx(0.64, abs=1e-12) and parallel == pytest.approx(0.75, abs=1e-12) \
        and brute_err <= 1e-9 and iter_err <= 1e-6
    record_criterion(7, "risk semantics", ok,
                     f"serial {serial:.12g}, parallel {parallel:.12g}, "
                     f"exact vs brute {brute_err:.1e}, exact vs iterative {iter_err:.1e}")
    assert ok


def _monotonicity_trials(n_mutations=500, seed=8):
    """Delete random rules one at a time and compare each policy with its predecessor."""
    rng = random.Random(seed)
    violations = {k: 0 for k in ("ENICE", "TINR", "AVOD", "NSP", "CMC", "risk", "MPL")}
    done = 0
    example = None
    while done < n_mutations:
        net = generate(SynthConfig(host_count=rng.randint(12, 18), service_count=rng.randint(1, 2),
                                   shared_infrastructure_ratio=rng.choice([0.0, 1.0]),
                                   vuln_density=0.5, seed=rng.randrange(10**6)))
        rules = list(net.segmented.rules)
        prev = analyze(net.spec, net.segmented, net.scan)
        while rules and done < n_mutations:
            rules.pop(rng.randrange(len(rules)))
            cur = analyze(net.spec, PolicySet("segmented", tuple(rules)), net.scan)
            done += 1
            pe, ce = prev.exposure, cur.exposure
            pr, cr = prev.robustness, cur.robustness
            checks = {
                "ENICE": ce.enice <= pe.enice,
                "TINR": ce.tinr <= pe.tinr,
                "AVOD": ce.avg_out_degree <= pe.avg_out_degree,
                "NSP": (cr.nsp or 0) <= (pr.nsp or 0),
                "CMC": cr.cmc <= pr.cmc,
                "risk": all(v <= prev.risk.values.get(k, 0.0) + 1e-9 for k, v in cur.risk.values.items()),
                "MPL": ce.mean_path_length is None or pe.mean_path_length is None
                       or ce.mean_path_length >= pe.mean_path_length - 1e-12,
            }
            for k, good in checks.items():
                if not good:
                    violations[k] += 1
                    if k == "MPL" and example is None:
                        example = (pe.mean_path_length, ce.mean_path_length)
            prev = cur
    return violations, example


@pytest.mark.slow
def test_c08_monotonicity(record_criterion):
    violations, example = _monotonicity_trials()
    ok = not any(violations.values())
    detail = ", ".join(f"{k} {v}" for k, v in violations.items()) + " violations in 500 deletions"
    if example:
        detail += f"; e.g. MPL {example[0]:.3f} -> {example[1]:.3f}"
    record_criterion(8, "rule-deletion monotonicity", ok, detail)
    assert ok, detail


def test_c09_attack_graph_directionality(record_criterion):
    net = generate(ENTERPRISE)
    cmp = compare(net.spec, net.flat, net.segmented, net.scan)
    f, s = cmp.flat.robustness, cmp.segmented.robustness
    pairs = {"CMC": (f.cmc, s.cmc), "NSP": (f.nsp, s.nsp), "AOD": (f.aod, s.aod),
             "AB": (f.avg_betweenness, s.avg_betweenness)}
    ok = all(sv < fv for fv, sv in pairs.values())
    record_criterion(9, "attack-graph directionality", ok,
                     ", ".join(f"{k} {fv:.4g} -> {sv:.4g}" for k, (fv, sv) in pairs.items()))
    assert ok


@pytest.mark.slow
def test_c10_end_to_end_runtime(record_criterion, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(SynthConfig(host_count=300, service_count=20, management_service_count=2, seed=1).to_json())
    gen, out = tmp_path / "gen", tmp_path / "out"
    start = time.perf_counter()
    code = main(["synth", "--config", str(cfg), "--out", str(gen)])
    code |= main(["compare", "--network", str(gen / "network.json"), "--flat-rules", str(gen / "rules_flat.csv"),
                  "--seg-rules", str(gen / "rules_segmented.csv"), "--scan", str(gen / "scan.json"),
                  "--out", str(out)])
    elapsed = time.perf_counter() - start
    ok = code == 0 and (out / "comparison.json").exists() and elapsed < 60
    record_criterion(10, "300-host end-to-end runtime", ok, f"{elapsed:.1f}s")
    assert ok
