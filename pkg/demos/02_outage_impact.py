"""What fraction of users and infrastructure goes dark when a grid fails?

Two scenario flavors: an explicit regional blackout (extreme weather,
EMP, cyberattack) and a solar-storm latitude band that fails every grid
reaching poleward of a threshold - including grids that dip far below
it, which is exactly why storm damage exceeds naive geographic
estimates.

Run: python demos/02_outage_impact.py
"""

from netwattzap import (
    AdminStatRecord,
    FailureScenario,
    GeoPoint,
    InfraComponent,
    WasgRegion,
    WasgRegistry,
    aggregate_stats,
    resolve_components,
    resolve_scenario,
    unavailability,
)


def square(rid, abbrev, lon0, lat0, size, members):
    ring = (
        (lon0, lat0), (lon0 + size, lat0), (lon0 + size, lat0 + size),
        (lon0, lat0 + size), (lon0, lat0),
    )
    return WasgRegion(
        id=rid, name=rid, abbrev=abbrev, members=frozenset(members),
        boundary=((ring,),), population=0, internet_users=0,
        area_km2=size * size * 12000,
    )


# POLARSPAN stretches from latitude 30 up to 65: a mid-latitude storm
# takes it down entirely, even the equator-facing half.
registry = WasgRegistry([
    square("POLARSPAN", "PS", -120.0, 30.0, 35.0, ["PS1"]),
    square("TROPIC", "TR", -60.0, -10.0, 25.0, ["TR1"]),
    square("MIDLANDS", "MD", 10.0, 35.0, 12.0, ["MD1"]),
])

stats = aggregate_stats(registry, [
    AdminStatRecord(code="PS1", population=300_000_000, internet_users=280_000_000),
    AdminStatRecord(code="TR1", population=500_000_000, internet_users=250_000_000),
    AdminStatRecord(code="MD1", population=200_000_000, internet_users=180_000_000),
])

components = resolve_components([
    InfraComponent(id="ixp-ps", kind="ixp", geo=GeoPoint(33.0, -110.0)),
    InfraComponent(id="ixp-ps2", kind="ixp", geo=GeoPoint(60.0, -100.0)),
    InfraComponent(id="ixp-tr", kind="ixp", geo=GeoPoint(0.0, -50.0)),
    InfraComponent(id="ixp-md", kind="ixp", geo=GeoPoint(40.0, 15.0)),
    InfraComponent(id="dc-ps", kind="datacenter", geo=GeoPoint(35.0, -115.0)),
    InfraComponent(id="dc-tr", kind="datacenter", geo=GeoPoint(-5.0, -45.0)),
    InfraComponent(id="dc-md", kind="datacenter", geo=GeoPoint(42.0, 18.0)),
    InfraComponent(id="root-a", kind="dns_root", geo=GeoPoint(50.0, -105.0)),
    InfraComponent(id="root-b", kind="dns_root", geo=GeoPoint(-8.0, -55.0)),
], registry)

scenarios = [
    FailureScenario(name="POLARSPAN blackout", mode="regional", failed=frozenset({"POLARSPAN"})),
    FailureScenario(name="solar storm, 45 deg", mode="latitude_band", threshold_deg=45.0),
    FailureScenario(
        name="simultaneous TROPIC + MIDLANDS attack",
        mode="regional",
        failed=frozenset({"TROPIC", "MIDLANDS"}),
    ),
]

for scenario in scenarios:
    failed = resolve_scenario(scenario, registry)
    report = unavailability(scenario, registry, components=components, stats=stats)
    print(f"\n{scenario.name}")
    print(f"  failed grids: {', '.join(sorted(failed)) or 'none'}")
    for metric, fraction in sorted(report.fractions.items()):
        detail = report.details[metric]
        print(f"  {metric:17s} {fraction:6.1%}  ({detail.unavailable:.0f} of {detail.total:.0f})")

print("\nNote the 45-degree storm: MIDLANDS tops out at 47N, so the whole")
print("grid fails and drags its equator-side infrastructure down with it.")
