"""Topology, component, and statistics parsers."""

from __future__ import annotations

import io

import pytest

from netwattzap.errors import DanglingLinkEndpoint, MalformedLine, MalformedRow
from netwattzap.ingest import (
    components_to_csv,
    parse_components,
    parse_stats,
    parse_topology,
)

NODES = """\
# comment line
node N1:  1.2.3.4 5.6.7.8
node N2:  224.0.0.5 9.9.9.9
node N3:  230.1.2.3
node N4:  10.0.0.1
"""

GEO = """\
# node.geo lines: continent country region city lat lon
node.geo N1: NA US TX Dallas 32.78 -96.80
node.geo N2: EU DE BE Berlin 52.52 13.40
node.geo N3: EU FR __ Paris 48.85 2.35
"""

LINKS = """\
link L1: N1:1.2.3.4 N2:9.9.9.9
link L2: N1:1.2.3.4 N3:230.1.2.3
link L3: N3 N4
link L4: N2 N4 N1
link L5: N1 N99
"""


class TestParseTopology:
    def test_cleaning_pipeline(self):
        topo = parse_topology(io.StringIO(NODES), io.StringIO(GEO), io.StringIO(LINKS))
        by_id = {n.node_id: n for n in topo.nodes}
        # N2 keeps one interface, N3 loses its only interface and drops.
        assert by_id[2].interfaces == ("9.9.9.9",)
        assert 3 not in by_id
        assert topo.report.input_nodes == 4
        assert topo.report.removed_nodes == 1
        assert topo.report.removed_interfaces == 2
        assert topo.report.kept_nodes == 3
        # L2 and L3 reference dropped N3; L5 dangles on N99.
        assert [l.link_id for l in topo.links] == [1, 4]
        assert topo.report.input_links == 5
        assert topo.report.removed_links == 2
        assert topo.report.dangling_links == 1
        assert topo.report.kept_links == 2

    def test_counts_reconcile_exactly(self):
        topo = parse_topology(io.StringIO(NODES), io.StringIO(GEO), io.StringIO(LINKS))
        assert len(topo.nodes) == topo.report.input_nodes - topo.report.removed_nodes
        assert len(topo.links) == (
            topo.report.input_links
            - topo.report.removed_links
            - topo.report.self_links
            - topo.report.dangling_links
        )

    def test_geo_attachment_and_unknown_geo(self):
        topo = parse_topology(io.StringIO(NODES), io.StringIO(GEO), io.StringIO(LINKS))
        by_id = {n.node_id: n for n in topo.nodes}
        assert by_id[1].geo.lat == pytest.approx(32.78)
        assert by_id[4].geo is None
        # N3's geo line targets a dropped node.
        assert topo.report.geo_for_unknown_nodes == 1

    def test_cleaning_idempotent(self):
        topo = parse_topology(io.StringIO(NODES), io.StringIO(GEO), io.StringIO(LINKS))
        nodes_text = "\n".join(
            f"node N{n.node_id}: " + " ".join(n.interfaces) for n in topo.nodes
        )
        links_text = "\n".join(f"link L{l.link_id}: N{l.a} N{l.b}" for l in topo.links)
        again = parse_topology(io.StringIO(nodes_text), None, io.StringIO(links_text))
        assert [(n.node_id, n.interfaces) for n in again.nodes] == [
            (n.node_id, n.interfaces) for n in topo.nodes
        ]
        assert [(l.link_id, l.a, l.b) for l in again.links] == [
            (l.link_id, l.a, l.b) for l in topo.links
        ]
        assert again.report.removed_interfaces == 0
        assert again.report.removed_nodes == 0
        assert again.report.removed_links == 0

    def test_strict_dangling_raises(self):
        with pytest.raises(DanglingLinkEndpoint):
            parse_topology(io.StringIO(NODES), io.StringIO(GEO), io.StringIO(LINKS), strict=True)

    def test_self_link_dropped(self):
        topo = parse_topology(io.StringIO("node N1: 1.2.3.4\nnode N2: 2.3.4.5"), None, io.StringIO("link L1: N1 N1\nlink L2: N1 N2"))
        assert [l.link_id for l in topo.links] == [2]
        assert topo.report.self_links == 1

    def test_hyperedge_uses_first_two_refs(self):
        topo = parse_topology(
            io.StringIO("node N1: 1.1.1.1\nnode N2: 2.2.2.2\nnode N3: 3.3.3.3"),
            None,
            io.StringIO("link L1: N2:2.2.2.2 N3 N1"),
        )
        assert (topo.links[0].a, topo.links[0].b) == (2, 3)

    def test_ipv6_passthrough(self):
        topo = parse_topology(io.StringIO("node N1: 2001:db8::1 1.2.3.4"), None, None)
        assert topo.nodes[0].interfaces == ("2001:db8::1", "1.2.3.4")
        assert topo.report.ipv6_interfaces == 1

    def test_malformed_lines(self):
        with pytest.raises(MalformedLine) as err:
            parse_topology(io.StringIO("node N1 1.2.3.4"), None, None)
        assert err.value.lineno == 1
        with pytest.raises(MalformedLine):
            parse_topology(io.StringIO("node N1: not-an-ip"), None, None)
        with pytest.raises(MalformedLine):
            parse_topology(io.StringIO("node N1: 1.2.3.4"), io.StringIO("node.geo N1: NA US"), None)
        with pytest.raises(MalformedLine):
            parse_topology(io.StringIO("node N1: 1.2.3.4"), io.StringIO("node.geo N1: NA US XX City 95.0 10.0"), None)
        with pytest.raises(MalformedLine):
            parse_topology(io.StringIO("node N1: 1.2.3.4"), None, io.StringIO("link L1: N1"))

    def test_tab_separated_geo_with_spaced_city(self):
        geo = "node.geo N1:\tNA\tUS\tNY\tNew York\t40.71\t-74.00\textra"
        topo = parse_topology(io.StringIO("node N1: 1.2.3.4"), io.StringIO(geo), None)
        assert topo.nodes[0].geo.lon == pytest.approx(-74.0)


COMPONENTS_CSV = """\
id,kind,lat,lon,weight,attrs_json
ix1,ixp,10.5,20.25,,
ix2,,48.85,2.35,,"{""az_count"": 3}"
dc1,datacenter,1.5,103.8,2.0,
skipme,ixp,,,,
"""


class TestParseComponents:
    def test_three_valid_rows(self):
        parsed = parse_components(io.StringIO(COMPONENTS_CSV), kind="ixp")
        assert [c.id for c in parsed.components] == ["ix1", "ix2", "dc1"]
        assert parsed.components[1].kind == "ixp"
        assert parsed.components[1].attr("az_count") == 3
        assert parsed.components[2].weight == 2.0
        assert parsed.skipped == [(5, "missing geolocation")]

    def test_out_of_range_latitude(self):
        csv_doc = "id,kind,lat,lon,weight,attrs_json\nbad,ixp,95,0,,\n"
        with pytest.raises(MalformedRow):
            parse_components(io.StringIO(csv_doc))

    def test_negative_weight(self):
        csv_doc = "id,kind,lat,lon,weight,attrs_json\nbad,ixp,5,0,-2,\n"
        with pytest.raises(MalformedRow):
            parse_components(io.StringIO(csv_doc))

    def test_unknown_kind(self):
        csv_doc = "id,kind,lat,lon,weight,attrs_json\nbad,teapot,5,0,,\n"
        with pytest.raises(MalformedRow):
            parse_components(io.StringIO(csv_doc))

    def test_missing_header_column(self):
        with pytest.raises(MalformedRow):
            parse_components(io.StringIO("id,kind,lat,lon\n"))

    def test_round_trip(self):
        parsed = parse_components(io.StringIO(COMPONENTS_CSV), kind="ixp")
        again = parse_components(io.StringIO(components_to_csv(parsed.components)))
        assert again.components == parsed.components


STATS_CSV = """\
code,population,internet_users,penetration,area_km2
US,331000000,307000000,,9833520
US-CA,39500000,,0.93,423970
"""


class TestParseStats:
    def test_absent_cells(self):
        records = parse_stats(io.StringIO(STATS_CSV))
        assert records[0].penetration is None
        assert records[0].internet_users == 307000000
        assert records[1].internet_users is None
        assert records[1].effective_internet_users() == int(round(39500000 * 0.93))

    def test_negative_population(self):
        with pytest.raises(MalformedRow):
            parse_stats(io.StringIO("code,population,internet_users,penetration,area_km2\nX,-5,1,,\n"))

    def test_missing_users_and_penetration(self):
        with pytest.raises(MalformedRow):
            parse_stats(io.StringIO("code,population,internet_users,penetration,area_km2\nX,5,,,\n"))

    def test_file_source(self, tmp_path):
        path = tmp_path / "stats.csv"
        path.write_text(STATS_CSV, encoding="utf-8")
        assert len(parse_stats(path)) == 2


def test_duplicate_node_id_rejected():
    with pytest.raises(MalformedLine):
        parse_topology(io.StringIO("node N1: 1.2.3.4\nnode N1: 2.3.4.5"), None, None)


def test_link_category_must_match_zones():
    from netwattzap.ingest import IpLink

    with pytest.raises(ValueError):
        IpLink(link_id=1, a=1, b=2, zone_a="A", zone_b=None, category="both_mapped")
    IpLink(link_id=1, a=1, b=2, zone_a="A", zone_b=None, category="one_mapped")


def test_datacenter_az_count_validated():
    from netwattzap.geo import GeoPoint
    from netwattzap.ingest import InfraComponent

    with pytest.raises(ValueError):
        InfraComponent(id="d", kind="datacenter", geo=GeoPoint(0, 0), attrs=(("az_count", 0),))
    InfraComponent(id="d", kind="datacenter", geo=GeoPoint(0, 0), attrs=(("az_count", 3),))
