"""Where does Internet infrastructure sit relative to power-grid failure zones?

Builds a toy world of four synchronous grids, scatters infrastructure
components over it, and shows how the overlap report answers questions
like "how many grids cover 80% of the IXPs?".

Run: python demos/01_grid_failure_zones.py
"""

import random

from netwattzap import (
    GeoPoint,
    InfraComponent,
    WasgRegion,
    WasgRegistry,
    distribution_report,
    resolve_components,
    smallest_k,
)


def square(rid, abbrev, lon0, lat0, size, members):
    ring = (
        (lon0, lat0),
        (lon0 + size, lat0),
        (lon0 + size, lat0 + size),
        (lon0, lat0 + size),
        (lon0, lat0),
    )
    return WasgRegion(
        id=rid, name=f"{rid} interconnection", abbrev=abbrev,
        members=frozenset(members), boundary=((ring,),),
        population=0, internet_users=0, area_km2=size * size * 12000,
    )


# Four grids of very different sizes: one continental, three regional.
registry = WasgRegistry([
    square("EAST", "E", -100.0, 25.0, 30.0, ["E1", "E2"]),
    square("WEST", "W", -140.0, 30.0, 20.0, ["W1"]),
    square("NORTH", "N", 0.0, 45.0, 15.0, ["N1"]),
    square("ISLAND", "I", 30.0, 10.0, 5.0, ["I1"]),
])

# Scatter components: the eastern grid dominates, as real topologies do.
rng = random.Random(0)
weights = {"EAST": 0.55, "WEST": 0.2, "NORTH": 0.15, "ISLAND": 0.05, None: 0.05}
boxes = {
    "EAST": (-100.0, 25.0, 30.0),
    "WEST": (-140.0, 30.0, 20.0),
    "NORTH": (0.0, 45.0, 15.0),
    "ISLAND": (30.0, 10.0, 5.0),
    None: (-60.0, -40.0, 20.0),  # open ocean, no grid
}
components = []
for i in range(400):
    bucket = rng.choices(list(weights), weights=list(weights.values()))[0]
    lon0, lat0, size = boxes[bucket]
    kind = rng.choice(["ixp", "router", "dns_root", "datacenter"])
    components.append(InfraComponent(
        id=f"c{i:03d}", kind=kind,
        geo=GeoPoint(lat0 + rng.uniform(0.1, size - 0.1), lon0 + rng.uniform(0.1, size - 0.1)),
    ))

resolved = resolve_components(components, registry)
report = distribution_report(resolved, registry)

print("Components per grid (zone = containing failure zone):")
for wasg_id in registry.ids:
    row = report.per_wasg[wasg_id]
    print(f"  {wasg_id:7s} ixp={row['ixp']:3d} router={row['router']:3d} "
          f"dns_root={row['dns_root']:3d} datacenter={row['datacenter']:3d}")
print(f"  outside any grid: {report.uncovered['components']} components")

print("\nConcentration, sorted by combined component count:")
for entry in report.rankings["components"]:
    print(f"  {entry.wasg_id:7s} {entry.value:4.0f} components, "
          f"cumulative {entry.cumulative_fraction:5.1%}")

for fraction in (0.5, 0.8, 0.95):
    k = smallest_k(report, "components", fraction)
    shown = k if k is not None else "unreachable (unzoned remainder)"
    print(f"Smallest number of grids covering {fraction:.0%} of components: {shown}")
