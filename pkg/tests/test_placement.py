"""Placement model and solver against an exhaustive enumeration oracle.

The oracle below enumerates every admissible subset, checks feasibility
with its own code, evaluates objectives with its own code (same
documented summation order as the library), and applies the same
lexicographic tie-break. It never touches the solver.
"""

from __future__ import annotations

import itertools
import json
import random

import pytest

from netwattzap.errors import UnsatisfiableStructure
from netwattzap.geo import GeoPoint, haversine_km
from netwattzap.placement import (
    Candidate,
    DemandPoint,
    LocationRule,
    PlacementProblem,
    SelectCount,
    build_ilp,
    check_feasible,
    latency_matrix,
    load_problem,
    objective_value,
    problem_from_dict,
    solution_to_dict,
    solve,
    solve_pairwise,
    solve_problem,
)

PAIRWISE = ("min_pairwise_distance_sum", "max_pairwise_distance_sum")


# ---------------------------------------------------------------- oracle


def oracle_zone(candidate: Candidate) -> str:
    return candidate.zone if candidate.zone is not None else f"#solo#{candidate.id}"


def oracle_feasible(problem: PlacementProblem, picked: tuple[Candidate, ...], lat, index) -> bool:
    zones: dict[str, int] = {}
    for c in picked:
        z = oracle_zone(c)
        zones[z] = zones.get(z, 0) + 1
        if zones[z] > problem.zone_cap:
            return False
    for rule in problem.location_rules:
        if sum(1 for c in picked if rule.matches(c)) < rule.min_count:
            return False
    bounds = dict(problem.latency_bounds or {})
    if problem.objective == "min_weighted_nearest":
        if problem.demands and not picked:
            return False
        for j, d in enumerate(problem.demands):
            if d.id in bounds and not any(lat[j][index[c.id]] <= bounds[d.id] for c in picked):
                return False
    elif bounds:
        for j, d in enumerate(problem.demands):
            if d.id not in bounds:
                continue
            if any(lat[j][index[c.id]] > bounds[d.id] for c in picked):
                return False
    return True


def oracle_value(problem: PlacementProblem, picked: tuple[Candidate, ...], lat, dist, index) -> float | None:
    if problem.objective == "min_cost":
        total = 0.0
        for c in picked:
            total += c.cost
        return total
    if problem.objective in PAIRWISE:
        total = 0.0
        for a in range(len(picked)):
            for b in range(a + 1, len(picked)):
                total += dist[index[picked[a].id]][index[picked[b].id]]
        return total
    if problem.objective == "min_weighted_sum_all":
        total = 0.0
        for c in picked:
            inner = 0.0
            for j, d in enumerate(problem.demands):
                inner += d.weight * lat[j][index[c.id]]
            total += inner
        return total
    bounds = dict(problem.latency_bounds or {})
    total = 0.0
    for j, d in enumerate(problem.demands):
        best = None
        for c in picked:
            l = lat[j][index[c.id]]
            if d.id in bounds and l > bounds[d.id]:
                continue
            if best is None or l < best:
                best = l
        if best is None:
            return None
        total += d.weight * best
    return total


def enumerate_optimum(problem: PlacementProblem):
    """(value, chosen ids) of the exhaustive optimum, or None if infeasible."""
    order = sorted(problem.candidates, key=lambda c: c.id)
    index = {c.id: i for i, c in enumerate(order)}
    lat = latency_matrix(problem)
    dist = [[haversine_km(a.geo, b.geo) for b in order] for a in order]
    n = problem.select_count.n
    sizes = [n] if problem.select_count.mode == "exactly" else list(range(0, n + 1))
    maximize = problem.objective == "max_pairwise_distance_sum"
    best = None
    best_ids = None
    for size in sizes:
        for picked in itertools.combinations(order, size):
            if not oracle_feasible(problem, picked, lat, index):
                continue
            value = oracle_value(problem, picked, lat, dist, index)
            if value is None:
                continue
            key = -value if maximize else value
            ids = tuple(c.id for c in picked)
            if best is None or key < best or (key == best and ids < best_ids):
                best = key
                best_ids = ids
    if best is None:
        return None
    return (-best if maximize else best), best_ids


# ------------------------------------------------------- fixture helpers


def cand(cid, lat=0.0, lon=0.0, zone=None, cost=None, country=None):
    return Candidate(id=cid, geo=GeoPoint(lat, lon), zone=zone, cost=cost, country=country)


def demand(did, lat=0.0, lon=0.0, weight=1.0):
    return DemandPoint(id=did, geo=GeoPoint(lat, lon), weight=weight)


def eq_fixture(mode="exactly"):
    """Three candidates, two sharing a grid, override latencies 10/20/30."""
    return PlacementProblem(
        candidates=(
            cand("c1", 10.0, 10.0, zone="Z1"),
            cand("c2", 20.0, 20.0, zone="Z1"),
            cand("c3", 30.0, 30.0, zone="Z2"),
        ),
        demands=(demand("d1", 0.0, 0.0, weight=1.0),),
        objective="min_weighted_sum_all",
        select_count=SelectCount(mode=mode, n=2),
        zone_cap=1,
        latency_override={"d1": {"c1": 10.0, "c2": 20.0, "c3": 30.0}},
    )


def random_problem(rng: random.Random) -> PlacementProblem:
    m = rng.randint(4, 12)
    zones = [f"Z{i}" for i in range(rng.randint(2, 5))]
    candidates = []
    for i in range(m):
        zone = rng.choice(zones + [None])
        candidates.append(
            Candidate(
                id=f"c{i:02d}",
                geo=GeoPoint(rng.uniform(-60, 60), rng.uniform(-150, 150)),
                zone=zone,
                cost=round(rng.uniform(1, 50), 3),
                country=rng.choice(["US", "DE", "JP", None]),
            )
        )
    demands = tuple(
        DemandPoint(id=f"d{j}", geo=GeoPoint(rng.uniform(-60, 60), rng.uniform(-150, 150)), weight=rng.randint(1, 9))
        for j in range(rng.randint(1, 4))
    )
    objective = rng.choice(
        ["min_weighted_sum_all", "min_weighted_nearest", "min_cost"] + list(PAIRWISE)
    )
    n = rng.randint(2 if objective in PAIRWISE else 1, min(4, m))
    mode = rng.choice(["exactly", "at_most"])
    rules = []
    if rng.random() < 0.4:
        kind = rng.choice(["hemisphere", "bbox", "country_codes"])
        if kind == "hemisphere":
            rule = LocationRule(kind="hemisphere", value=rng.choice(["northern", "southern"]), min_count=1)
        elif kind == "bbox":
            rule = LocationRule(kind="bbox", value=(-160.0, -70.0, 0.0, 70.0), min_count=1)
        else:
            rule = LocationRule(kind="country_codes", value=frozenset({"US", "DE"}), min_count=1)
        rules.append(rule)
    latency_bounds = None
    if demands and rng.random() < 0.35 and objective in ("min_weighted_sum_all", "min_weighted_nearest", "min_cost"):
        latency_bounds = {demands[0].id: rng.uniform(10.0, 60.0)}
    try:
        return PlacementProblem(
            candidates=tuple(candidates),
            demands=demands,
            objective=objective,
            select_count=SelectCount(mode=mode, n=n),
            zone_cap=rng.choice([1, 1, 2]),
            location_rules=tuple(rules),
            latency_bounds=latency_bounds,
        )
    except ValueError:
        return random_problem(rng)


# ----------------------------------------------------------------- tests


class TestBuildIlp:
    def test_cardinality_plus_one_conflict(self):
        model = build_ilp(eq_fixture())
        assert len(model.x_constraints) == 2
        tags = [c.tag for c in model.x_constraints]
        assert tags[0] == "select_count"
        assert tags[1] == "zone_conflict[Z1:c1,c2]"
        assert model.x_constraints[0].sense == "=="

    def test_at_most_mode_uses_inequality(self):
        model = build_ilp(eq_fixture(mode="at_most"))
        assert model.x_constraints[0].sense == "<="

    def test_group_sum_for_cap_two(self):
        problem = PlacementProblem(
            candidates=(
                cand("a", 0.0, 0.0, zone="Z", cost=1.0),
                cand("b", 1.0, 0.0, zone="Z", cost=1.0),
                cand("c", 2.0, 0.0, zone="Z", cost=1.0),
            ),
            demands=(),
            objective="min_cost",
            select_count=SelectCount(mode="at_most", n=2),
            zone_cap=2,
        )
        model = build_ilp(problem)
        assert any(c.tag == "zone_cap[Z]" and c.rhs == 2.0 for c in model.x_constraints)

    def test_pigeonhole_unsatisfiable(self):
        candidates = tuple(
            cand(f"c{i}", float(i), float(i), zone="Z1" if i < 3 else "Z2") for i in range(5)
        )
        problem = PlacementProblem(
            candidates=candidates,
            demands=(),
            objective="min_weighted_sum_all",
            select_count=SelectCount(mode="exactly", n=3),
            zone_cap=1,
        )
        with pytest.raises(UnsatisfiableStructure):
            build_ilp(problem)

    def test_location_rule_too_few_matches(self):
        problem = PlacementProblem(
            candidates=(
                cand("a", 10.0, 0.0, cost=1.0),
                cand("b", 20.0, 0.0, cost=1.0),
            ),
            demands=(),
            objective="min_cost",
            select_count=SelectCount(mode="exactly", n=1),
            location_rules=(LocationRule(kind="hemisphere", value="southern", min_count=1),),
        )
        with pytest.raises(UnsatisfiableStructure):
            build_ilp(problem)

    def test_dump_contains_tags_and_binaries(self):
        model = build_ilp(eq_fixture())
        text = model.dump()
        assert "Minimize" in text and "Binaries" in text
        assert "select_count:" in text and "zone_conflict[Z1:c1,c2]:" in text
        assert "x[c1]" in text

    def test_nearest_model_has_assignment_vars(self):
        problem = PlacementProblem(
            candidates=(cand("a", 10.0, 10.0, zone="Z1"), cand("b", 40.0, 40.0, zone="Z2")),
            demands=(demand("d1", 12.0, 12.0),),
            objective="min_weighted_nearest",
            select_count=SelectCount(mode="exactly", n=1),
        )
        model = build_ilp(problem)
        assert any(v.startswith("y[") for v in model.variables())
        assert any(c.tag == "assign[d1]" for c in model.aux_constraints)
        dump = model.dump()
        assert "Bounds" in dump and "0 <= y[d1,a] <= 1" in dump


class TestSolveFixtures:
    def test_eq_fixture_chooses_one_and_three(self):
        problem = eq_fixture()
        oracle = enumerate_optimum(problem)
        assert oracle == (40.0, ("c1", "c3"))
        solution = solve_problem(problem)
        assert solution.proof == "optimal"
        assert solution.chosen == ("c1", "c3")
        assert solution.objective_value == 40.0

    def test_single_selection_nearest_reduces_to_argmin(self):
        problem = PlacementProblem(
            candidates=(cand("far", 50.0, 50.0), cand("near", 1.0, 1.0)),
            demands=(demand("d1", 0.0, 0.0),),
            objective="min_weighted_nearest",
            select_count=SelectCount(mode="exactly", n=1),
        )
        solution = solve_problem(problem)
        assert solution.chosen == ("near",)
        assert solution.assignment == {"d1": "near"}

    def test_equidistant_tie_breaks_lexicographically(self):
        problem = PlacementProblem(
            candidates=(
                cand("b", 10.0, 0.0, zone="Z1"),
                cand("a", -10.0, 0.0, zone="Z2"),
                cand("d", 0.0, 10.0, zone="Z1"),
                cand("c", 0.0, -10.0, zone="Z2"),
            ),
            demands=(demand("d1", 0.0, 0.0),),
            objective="min_weighted_sum_all",
            select_count=SelectCount(mode="exactly", n=2),
            zone_cap=1,
        )
        solution = solve_problem(problem)
        assert solution.chosen == ("a", "b")

    def test_forced_pair_with_two_candidates(self):
        for objective in PAIRWISE:
            problem = PlacementProblem(
                candidates=(cand("a", 0.0, 0.0, zone="Z1"), cand("b", 1.0, 1.0, zone="Z2")),
                demands=(),
                objective=objective,
                select_count=SelectCount(mode="exactly", n=2),
            )
            solution = solve_pairwise(problem)
            assert solution.chosen == ("a", "b")

    def test_square_corners_max_picks_diagonal_min_picks_side(self):
        corners = (
            cand("sw", 0.0, 0.0, zone="Z1"),
            cand("se", 0.0, 1.0, zone="Z2"),
            cand("nw", 1.0, 0.0, zone="Z3"),
            cand("ne", 1.0, 1.0, zone="Z4"),
        )
        for objective in PAIRWISE:
            problem = PlacementProblem(
                candidates=corners,
                demands=(),
                objective=objective,
                select_count=SelectCount(mode="exactly", n=2),
            )
            oracle = enumerate_optimum(problem)
            solution = solve_pairwise(problem)
            assert solution.objective_value == oracle[0]
            assert solution.chosen == oracle[1]
            chosen = set(solution.chosen)
            if objective == "max_pairwise_distance_sum":
                assert chosen in ({"sw", "ne"}, {"se", "nw"})
            else:
                # The 1-degree lon side at lat 1 is marginally shorter.
                assert chosen == {"ne", "nw"}

    def test_solve_pairwise_rejects_other_objectives(self):
        with pytest.raises(ValueError):
            solve_pairwise(eq_fixture())

    def test_time_limit_returns_incumbent_flag(self):
        solution = solve_problem(eq_fixture(), time_limit=0.0)
        assert solution.proof == "time_limit"

    def test_latency_bound_excludes_candidate_globally(self):
        problem = PlacementProblem(
            candidates=(
                cand("near", 1.0, 1.0, zone="Z1"),
                cand("far", 50.0, 50.0, zone="Z2"),
                cand("mid", 5.0, 5.0, zone="Z3"),
            ),
            demands=(demand("d1", 0.0, 0.0),),
            objective="min_weighted_sum_all",
            select_count=SelectCount(mode="exactly", n=2),
            latency_bounds={"d1": 10.0},
        )
        model = build_ilp(problem)
        assert "far" in model.excluded
        solution = solve(model)
        assert solution.proof == "optimal"
        assert "far" not in solution.chosen

    def test_latency_bound_nearest_constrains_assignment(self):
        problem = PlacementProblem(
            candidates=(
                cand("near", 1.0, 1.0, zone="Z1"),
                cand("far", 50.0, 50.0, zone="Z2"),
            ),
            demands=(demand("d1", 0.0, 0.0), demand("d2", 49.0, 49.0)),
            objective="min_weighted_nearest",
            select_count=SelectCount(mode="exactly", n=2),
            latency_bounds={"d1": 10.0},
        )
        model = build_ilp(problem)
        assert model.excluded == frozenset()
        solution = solve(model)
        assert solution.proof == "optimal"
        assert solution.assignment["d1"] == "near"

    def test_infeasible_by_search(self):
        # Structural checks pass, but the rule and the zone conflict collide.
        problem = PlacementProblem(
            candidates=(
                cand("a", 10.0, 0.0, zone="Z1", cost=1.0),
                cand("b", 20.0, 0.0, zone="Z1", cost=1.0),
                cand("c", -10.0, 0.0, zone="Z2", cost=1.0),
            ),
            demands=(),
            objective="min_cost",
            select_count=SelectCount(mode="exactly", n=2),
            zone_cap=1,
            location_rules=(LocationRule(kind="hemisphere", value="northern", min_count=2),),
        )
        solution = solve_problem(problem)
        assert solution.proof == "infeasible"
        assert enumerate_optimum(problem) is None


class TestRandomInstances:
    def test_solver_matches_enumeration(self):
        rng = random.Random(2024)
        infeasible_seen = 0
        for _ in range(120):
            problem = random_problem(rng)
            oracle = enumerate_optimum(problem)
            try:
                solution = solve_problem(problem)
            except UnsatisfiableStructure:
                # Pre-solve detection must be sound.
                assert oracle is None
                infeasible_seen += 1
                continue
            if oracle is None:
                infeasible_seen += 1
                assert solution.proof == "infeasible"
                continue
            assert solution.proof == "optimal"
            assert solution.objective_value == oracle[0]
            assert solution.chosen == oracle[1]
            ok, violations = check_feasible(problem, solution.chosen)
            assert ok, violations
        assert infeasible_seen < 40

    def test_weight_scaling_leaves_argmin_unchanged(self):
        rng = random.Random(31)
        for _ in range(20):
            problem = random_problem(rng)
            if problem.objective not in ("min_weighted_sum_all", "min_weighted_nearest"):
                continue
            if not problem.demands:
                continue
            try:
                base = solve_problem(problem)
            except UnsatisfiableStructure:
                continue
            if base.proof != "optimal":
                continue
            scaled = PlacementProblem(
                candidates=problem.candidates,
                demands=tuple(
                    DemandPoint(id=d.id, geo=d.geo, weight=d.weight * 7.5) for d in problem.demands
                ),
                objective=problem.objective,
                select_count=problem.select_count,
                zone_cap=problem.zone_cap,
                location_rules=problem.location_rules,
                latency_bounds=problem.latency_bounds,
                latency_override=problem.latency_override,
            )
            assert solve_problem(scaled).chosen == base.chosen

    def test_zone_cap_relaxation_never_worsens(self):
        rng = random.Random(47)
        tried = 0
        for _ in range(40):
            problem = random_problem(rng)
            if problem.objective == "max_pairwise_distance_sum":
                continue
            try:
                base = solve_problem(problem)
            except UnsatisfiableStructure:
                continue
            if base.proof != "optimal":
                continue
            relaxed_problem = PlacementProblem(
                candidates=problem.candidates,
                demands=problem.demands,
                objective=problem.objective,
                select_count=problem.select_count,
                zone_cap=problem.zone_cap + 1,
                location_rules=problem.location_rules,
                latency_bounds=problem.latency_bounds,
                latency_override=problem.latency_override,
            )
            relaxed = solve_problem(relaxed_problem)
            assert relaxed.proof == "optimal"
            assert relaxed.objective_value <= base.objective_value + 1e-12
            tried += 1
        assert tried >= 5

    def test_objective_value_recomputation(self):
        rng = random.Random(63)
        for _ in range(30):
            problem = random_problem(rng)
            try:
                solution = solve_problem(problem)
            except UnsatisfiableStructure:
                continue
            if solution.proof != "optimal":
                continue
            recomputed = objective_value(problem, solution.chosen)
            assert solution.objective_value == pytest.approx(recomputed, rel=1e-9, abs=1e-12)


class TestProblemIo:
    def test_round_trip(self, tmp_path):
        doc = {
            "candidates": [
                {"id": "c1", "lat": 10.0, "lon": 10.0, "zone": "Z1"},
                {"id": "c2", "lat": 20.0, "lon": 20.0, "zone": "Z1", "cost": 4.0},
                {"id": "c3", "lat": 30.0, "lon": 30.0, "country": "US"},
            ],
            "demands": [{"id": "d1", "lat": 0.0, "lon": 0.0, "weight": 2.0}],
            "select_count": {"mode": "exactly", "n": 2},
            "zone_cap": 1,
            "location_rules": [{"predicate": {"hemisphere": "northern"}, "min_count": 1}],
            "latency_bounds": {"d1": 500.0},
            "objective": "min_weighted_sum_all",
        }
        problem = problem_from_dict(doc)
        assert problem.candidates[2].country == "US"
        assert problem.location_rules[0].kind == "hemisphere"
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        assert load_problem(path) == problem

    def test_bad_documents(self):
        from netwattzap.errors import MalformedDocument

        with pytest.raises(MalformedDocument):
            problem_from_dict({"candidates": []})
        with pytest.raises(MalformedDocument):
            problem_from_dict(
                {
                    "candidates": [{"id": "a", "lat": 0, "lon": 0}, {"id": "a", "lat": 1, "lon": 1}],
                    "objective": "min_cost",
                    "select_count": {"mode": "exactly", "n": 1},
                }
            )

    def test_solution_serialization_hides_wall_time(self):
        solution = solve_problem(eq_fixture())
        doc = solution_to_dict(solution)
        assert "wall_time_s" not in doc["solve_stats"]
        assert doc["chosen"] == ["c1", "c3"]
        timed = solution_to_dict(solution, include_wall_time=True)
        assert "wall_time_s" in timed["solve_stats"]


class TestCheckFeasible:
    def test_flags_every_violation_kind(self):
        problem = eq_fixture()
        ok, _ = check_feasible(problem, ("c1", "c3"))
        assert ok
        ok, violations = check_feasible(problem, ("c1", "c2"))
        assert not ok and any("zone cap" in v for v in violations)
        ok, violations = check_feasible(problem, ("c1",))
        assert not ok and any("cardinality" in v for v in violations)
        ok, violations = check_feasible(problem, ("c1", "zz"))
        assert not ok and any("unknown" in v for v in violations)
