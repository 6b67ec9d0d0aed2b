"""Failure scenarios and the unavailability they cause.

A scenario fails whole grids: either an explicit set (regional outages
from weather or targeted attacks) or every grid reaching poleward of a
latitude threshold (solar-storm model). Components in no grid are never
failed - their grid exposure is unknown. A link is unavailable as soon
as either mapped endpoint sits in a failed grid; links with both ends
unmapped survive every scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import MalformedDocument, UnknownWasg
from .geo import band_overlap
from .grid_model import AggregateResult, WasgRegistry
from .ingest import InfraComponent, IpLink
from .overlap import az_collapse

MODES = ("regional", "latitude_band")

# Component kinds surfaced as report metrics, in report order.
_KIND_METRICS = (("ixp", "ixps"), ("dns_root", "dns_roots"), ("router", "routers"))


@dataclass(frozen=True)
class FailureScenario:
    """A named outage: explicit grid ids or a latitude threshold."""

    name: str
    mode: str
    failed: frozenset[str] = frozenset()
    threshold_deg: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"scenario {self.name!r}: unknown mode {self.mode!r}")
        if self.mode == "regional":
            if not self.failed:
                raise ValueError(f"scenario {self.name!r}: regional mode needs a non-empty failed set")
        else:
            if self.threshold_deg is None or not 0.0 < self.threshold_deg < 90.0:
                raise ValueError(f"scenario {self.name!r}: threshold_deg must lie in (0, 90)")


def scenario_from_dict(doc: Mapping) -> FailureScenario:
    try:
        return FailureScenario(
            name=str(doc["name"]),
            mode=str(doc["mode"]),
            failed=frozenset(str(w) for w in doc.get("failed", [])),
            threshold_deg=float(doc["threshold_deg"]) if "threshold_deg" in doc else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad scenario document: {exc}") from exc


def load_scenario(path) -> FailureScenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise MalformedDocument(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(scenario: FailureScenario) -> dict:
    doc: dict = {"name": scenario.name, "mode": scenario.mode}
    if scenario.mode == "regional":
        doc["failed"] = sorted(scenario.failed)
    else:
        doc["threshold_deg"] = scenario.threshold_deg
    return doc


def resolve_scenario(scenario: FailureScenario, registry: WasgRegistry) -> frozenset[str]:
    """The grid ids a scenario fails.

    Raises:
        UnknownWasg: regional mode naming an id absent from the registry.
    """
    if scenario.mode == "regional":
        for wasg_id in scenario.failed:
            if wasg_id not in registry:
                raise UnknownWasg(f"scenario {scenario.name!r} fails unknown grid {wasg_id!r}")
        return frozenset(scenario.failed)
    return frozenset(
        region.id
        for region in registry
        if region.boundary and band_overlap(region, scenario.threshold_deg)
    )


@dataclass
class MetricDetail:
    """One metric's numerator and both denominators (all vs zoned-only)."""

    unavailable: float
    total: float
    zoned_total: float

    @property
    def fraction(self) -> float:
        return self.unavailable / self.total if self.total else 0.0

    @property
    def fraction_zoned(self) -> float:
        return self.unavailable / self.zoned_total if self.zoned_total else 0.0


@dataclass
class UnavailabilityReport:
    """Unreachable fractions per metric under one resolved scenario.

    Primary fractions use the mapped+unmapped universe as denominator;
    ``details`` also carries the zoned-only denominator for each metric.
    """

    scenario: str
    failed_wasgs: tuple[str, ...]
    fractions: dict[str, float]
    details: dict[str, MetricDetail]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "failed_wasgs": list(self.failed_wasgs),
            "fractions": dict(sorted(self.fractions.items())),
            "details": {
                metric: {
                    "unavailable": d.unavailable,
                    "total": d.total,
                    "zoned_total": d.zoned_total,
                    "fraction": d.fraction,
                    "fraction_zoned": d.fraction_zoned,
                }
                for metric, d in sorted(self.details.items())
            },
        }


def unavailability(
    scenario: FailureScenario,
    registry: WasgRegistry,
    components: Sequence[InfraComponent] = (),
    links: Sequence[IpLink] = (),
    stats: AggregateResult | None = None,
) -> UnavailabilityReport:
    """Evaluate a scenario over resolved components, annotated links, and stats.

    Metrics appear only for the inputs supplied: component kinds and
    datacenter zones need ``components``, the links metric needs
    categorized ``links``, internet_users needs ``stats``.
    """
    failed = resolve_scenario(scenario, registry)
    details: dict[str, MetricDetail] = {}

    if components:
        for kind, metric in _KIND_METRICS:
            of_kind = [c for c in components if c.kind == kind]
            if not of_kind:
                continue
            details[metric] = MetricDetail(
                unavailable=sum(1 for c in of_kind if c.zone in failed),
                total=len(of_kind),
                zoned_total=sum(1 for c in of_kind if c.zone is not None),
            )
        datacenters = [c for c in components if c.kind == "datacenter"]
        if datacenters:
            collapse = az_collapse(datacenters)
            details["datacenter_zones"] = MetricDetail(
                unavailable=sum(1 for zone in collapse.groups if zone in failed),
                total=collapse.zone_count,
                zoned_total=len(collapse.groups),
            )

    if links:
        unavailable_links = 0
        zoned_links = 0
        for link in links:
            mapped_zones = [z for z in (link.zone_a, link.zone_b) if z is not None]
            if mapped_zones:
                zoned_links += 1
            if any(z in failed for z in mapped_zones):
                unavailable_links += 1
        details["links"] = MetricDetail(
            unavailable=unavailable_links,
            total=len(links),
            zoned_total=zoned_links,
        )

    if stats is not None:
        world = stats.world_totals()
        zoned_users = sum(t.internet_users for t in stats.per_wasg.values())
        details["internet_users"] = MetricDetail(
            unavailable=sum(stats.per_wasg[w].internet_users for w in failed if w in stats.per_wasg),
            total=world.internet_users,
            zoned_total=zoned_users,
        )

    return UnavailabilityReport(
        scenario=scenario.name,
        failed_wasgs=tuple(sorted(failed)),
        fractions={metric: d.fraction for metric, d in details.items()},
        details=details,
    )
