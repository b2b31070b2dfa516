"""End-to-end analysis of one policy and flat-versus-segmented comparison."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import attackgraph, connectivity, exposure, risk, robustness
from .model import MAX_PORT, NetworkSpec, PolicySet, ScanDocument, protocol_universe

log = logging.getLogger(__name__)

# Orientation of each headline metric: True when a lower segmented value is better.
DECREASE_IS_BETTER = {
    "exposure.enice": True,
    "exposure.global_clustering": True,
    "exposure.mean_path_length": False,
    "exposure.diameter": False,
    "exposure.infinity_fraction": False,
    "exposure.tinr": True,
    "exposure.avg_out_degree": True,
    "exposure.avg_closeness": True,
    "robustness.cmc": True,
    "robustness.nsp": True,
    "robustness.mean_path_length": False,
    "robustness.mspl": False,
    "robustness.cmpl": True,
    "robustness.aod": True,
    "robustness.mod": True,
    "robustness.avg_betweenness": True,
    "risk.mean": True,
}


@dataclass
class MetricReport:
    mode: str
    exposure: exposure.ExposureReport
    robustness: Optional[robustness.RobustnessReport] = None
    risk: Optional[risk.RiskReport] = None
    graph: Optional[connectivity.ConnectivityGraph] = None
    attack_graph: Optional[attackgraph.AttackGraph] = None

    def metric(self, key: str):
        section, name = key.split(".", 1)
        if section == "risk":
            return self.risk.mean if self.risk is not None else None
        obj = getattr(self, section)
        return getattr(obj, name) if obj is not None else None

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "exposure": self.exposure.to_dict()}
        if self.robustness is not None:
            out["robustness"] = self.robustness.to_dict()
        if self.risk is not None:
            out["risk"] = {"method": self.risk.method, "mean": self.risk.mean, "values": self.risk.values}
        return out


def improvement(key: str, flat, segmented) -> Optional[float]:
    """Percentage improvement of `segmented` over `flat` for metric `key`.

    (flat - seg) / flat for decrease-is-better metrics, (seg - flat) / flat
    otherwise; None when either side is absent or flat is zero.
    """
    if flat is None or segmented is None or flat == 0:
        return None
    if DECREASE_IS_BETTER[key]:
        return 100.0 * (flat - segmented) / flat
    return 100.0 * (segmented - flat) / flat


@dataclass
class ComparisonReport:
    flat: MetricReport
    segmented: MetricReport
    improvement_percentages: dict = field(default_factory=dict)

    @classmethod
    def build(cls, flat: MetricReport, segmented: MetricReport) -> "ComparisonReport":
        imp = {}
        for key in DECREASE_IS_BETTER:
            imp[key] = improvement(key, flat.metric(key), segmented.metric(key))
        return cls(flat, segmented, imp)

    def to_dict(self) -> dict:
        return {
            "flat": self.flat.to_dict(),
            "segmented": self.segmented.to_dict(),
            "improvement_percentages": self.improvement_percentages,
        }


def analyze(spec: NetworkSpec, policy: PolicySet, scan: Optional[ScanDocument] = None,
            universe: Optional[Iterable[str]] = None, count_vertices: bool = False,
            risk_method: str = "auto", risk_budget: int = risk.DEFAULT_BUDGET,
            access_probability: float = 1.0) -> MetricReport:
    """Exposure metrics always; robustness and risk only when a scan is given."""
    universe = tuple(universe) if universe is not None else protocol_universe()
    g = connectivity.build(spec, policy, universe)
    report = MetricReport(policy.mode, exposure.exposure_report(g, count_vertices), graph=g)
    if scan is None:
        log.warning("no scan supplied: %s analysis is exposure-only", policy.mode)
        return report
    ag = attackgraph.derive(attackgraph.compile_facts(spec, policy, scan, universe))
    report.attack_graph = ag
    report.robustness = robustness.robustness_report(ag)
    probs = risk.assign_probabilities(ag, scan, access_probability)
    report.risk = risk.cumulative_risk(ag, probs, risk_method, risk_budget)
    return report


def compare(spec: NetworkSpec, flat: PolicySet, segmented: PolicySet, scan: Optional[ScanDocument] = None,
            **kwargs) -> ComparisonReport:
    return ComparisonReport.build(analyze(spec, flat, scan, **kwargs),
                                  analyze(spec, segmented, scan, **kwargs))
