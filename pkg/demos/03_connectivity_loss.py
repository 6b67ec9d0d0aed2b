"""How much inter-grid connectivity survives a grid failure?

The grid graph weighs each edge by the number of IP links between two
grids. All-pairs max flow comes from a Gomory-Hu tree (one max-flow
call per non-root node instead of one per pair); removing a failed grid
and recomputing gives the per-pair and mean flow reduction.

Run: python demos/03_connectivity_loss.py
"""

from netwattzap import build_graph, flow_reduction, gomory_hu, max_flow

# Inter-grid IP-link counts, shaped like a hub-and-spoke world: HUB-A
# and HUB-B carry most transit; STUB reaches everything through them.
pair_counts = {
    ("HUB-A", "HUB-B"): 1600,
    ("HUB-A", "ASIA"): 850,
    ("HUB-B", "ASIA"): 420,
    ("HUB-A", "SOUTH"): 300,
    ("HUB-B", "SOUTH"): 240,
    ("ASIA", "SOUTH"): 60,
    ("HUB-A", "STUB"): 90,
    ("HUB-B", "STUB"): 40,
    ("HUB-A", "HUB-A"): 500,  # same-grid links are dropped by build_graph
}

graph = build_graph(pair_counts)
print(f"Grid graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges, "
      f"average degree {graph.average_degree():.1f}")

tree = gomory_hu(graph)
print("\nAll-pairs max flow (min edge on the Gomory-Hu tree path):")
for u, v, flow in tree.all_pairs():
    print(f"  {u:6s} - {v:6s} {flow:5d}   (direct check: {max_flow(graph, u, v)})")

for failed in (["STUB"], ["HUB-A"], ["HUB-A", "HUB-B"]):
    report = flow_reduction(graph, failed)
    print(f"\nFailing {', '.join(failed)}: mean reduction {report.mean_reduction:.1%} "
          f"over {len(report.pairs)} surviving pairs")
    for p in report.pairs:
        print(f"  {p.u:6s} - {p.v:6s} {p.flow_before:5d} -> {p.flow_after:5d} "
              f"({p.reduction:.1%})")
