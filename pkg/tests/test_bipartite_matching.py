from fractions import Fraction

import allure
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from market_base.bipartite_matching import (
    Matching,
    WeightedBipartiteGraph,
    enumerate_matchings,
    hall_witness,
    solve_constrained_matching,
)
from market_base.exceptions import EnumerationGuardError, MatchingInfeasibleError


def best_by_enumeration(graph, required):
    """Reference optimum: weight, then cardinality, then smallest sorted edge list."""
    candidates = [m for m in enumerate_matchings(graph) if set(required) <= m.matched_buyers]
    return min(
        candidates,
        key=lambda m: (-graph.total_weight(m), -len(m), sorted(graph.edge_key(e) for e in m)),
    )


@st.composite
def weighted_graphs(draw, max_side=4):
    sellers = tuple(str(k + 1) for k in range(draw(st.integers(1, max_side))))
    buyers = tuple(str(k + 1) for k in range(draw(st.integers(1, max_side))))
    edges = draw(st.sets(st.sampled_from([(i, j) for i in sellers for j in buyers])))
    weights = {edge: Fraction(draw(st.integers(0, 3)), draw(st.sampled_from([1, 2]))) for edge in edges}
    graph = WeightedBipartiteGraph(sellers, buyers, weights)
    # required buyers are taken from some feasible matching so the instance is solvable
    seed_matching = draw(st.sampled_from(list(enumerate_matchings(graph))))
    required = draw(st.sets(st.sampled_from(sorted(seed_matching.matched_buyers)))) if len(seed_matching) else set()
    return graph, frozenset(required)


@allure.suite("Bipartite Matching Suite")
@allure.feature("Constrained Matching")
class TestBipartiteMatching:

    @allure.story("Constrained Optimum")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("Weight first, then cardinality, then the lexicographically smallest edge list.")
    @pytest.mark.parametrize(
        "weights, required, expected",
        [
            ({("1", "1"): 0}, set(), {("1", "1")}),
            ({("1", "1"): 0, ("2", "1"): 1}, {"1"}, {("2", "1")}),
            ({("1", "1"): 1, ("2", "1"): 1}, {"1"}, {("1", "1")}),
        ],
    )
    def test_solve_constrained_matching(self, weights, required, expected, logger):
        graph = WeightedBipartiteGraph(("1", "2"), ("1",), weights)
        matching = solve_constrained_matching(graph, frozenset(required))
        logger.info(f"Matching: {sorted(matching.pairs)}")
        assert matching.pairs == frozenset(expected)

    def test_cardinality_breaks_weight_ties(self):
        # one heavy edge versus two edges of the same total
        graph = WeightedBipartiteGraph(
            ("1", "2"), ("1", "2"), {("1", "1"): 2, ("1", "2"): 1, ("2", "1"): 1}
        )
        assert solve_constrained_matching(graph).pairs == {("1", "2"), ("2", "1")}

    def test_required_buyers_override_weight(self):
        graph = WeightedBipartiteGraph(("1",), ("1", "2"), {("1", "1"): 5, ("1", "2"): 0})
        assert solve_constrained_matching(graph, frozenset({"2"})).pairs == {("1", "2")}

    def test_float_weights_within_eps_tie(self):
        graph = WeightedBipartiteGraph(("1", "2"), ("1",), {("1", "1"): 0.5, ("2", "1"): 0.5 + 1e-12})
        assert solve_constrained_matching(graph, eps=1e-9).pairs == {("1", "1")}

    def test_empty_graph_gives_empty_matching(self):
        graph = WeightedBipartiteGraph(("1",), ("1",), {})
        assert len(solve_constrained_matching(graph)) == 0

    # -------------------------------------------------------------------------

    @allure.story("Infeasibility Witness")
    @allure.severity(allure.severity_level.NORMAL)
    @allure.description("Uncoverable required buyers raise an error carrying a Hall-deficient set.")
    def test_infeasible_required_set_raises_with_witness(self):
        graph = WeightedBipartiteGraph(("1", "2"), ("1", "2"), {("1", "1"): 1, ("1", "2"): 1})
        with pytest.raises(MatchingInfeasibleError) as info:
            solve_constrained_matching(graph, frozenset({"1", "2"}))
        assert set(info.value.deficient_buyers) == {"1", "2"}
        assert info.value.neighbours == ("1",)

    def test_hall_witness_is_empty_when_feasible(self):
        graph = WeightedBipartiteGraph(("1", "2"), ("1", "2"), {("1", "1"): 1, ("2", "2"): 1})
        assert hall_witness(graph, {"1", "2"}) == frozenset()

    def test_hall_witness_leaves_out_placeable_buyers(self):
        # buyers 1 and 2 compete for seller 1; buyer 3 has two sellers of its own
        graph = WeightedBipartiteGraph(
            ("1", "2", "3"),
            ("1", "2", "3"),
            {("1", "1"): 1, ("1", "2"): 1, ("2", "3"): 1, ("3", "3"): 1},
        )
        witness = hall_witness(graph, {"1", "2", "3"})
        assert witness == {"1", "2"}
        neighbours = {seller for buyer in witness for seller in graph.neighbours(buyer)}
        assert len(neighbours) < len(witness)

    def test_hall_witness_reports_isolated_buyer(self):
        graph = WeightedBipartiteGraph(("1",), ("1", "2"), {("1", "1"): 1})
        assert hall_witness(graph, {"1", "2"}) == {"2"}
        with pytest.raises(MatchingInfeasibleError) as info:
            solve_constrained_matching(graph, frozenset({"2"}))
        assert info.value.deficient_buyers == ("2",)
        assert info.value.neighbours == ()

    def test_lexicographic_tie_break_on_a_full_graph(self):
        # all 25 edges weigh the same, so the smallest sorted perfect matching is the diagonal
        ids = tuple(str(k) for k in range(1, 6))
        graph = WeightedBipartiteGraph(ids, ids, {(i, j): 1 for i in ids for j in ids})
        assert solve_constrained_matching(graph).pairs == {(k, k) for k in ids}

    # -------------------------------------------------------------------------

    @allure.story("Enumeration")
    @allure.severity(allure.severity_level.NORMAL)
    @allure.description("Every matching is produced exactly once, the empty one included.")
    @pytest.mark.parametrize(
        "sellers, buyers, edges, expected",
        [
            (("1",), ("1",), [("1", "1")], 2),
            (("1", "2"), ("1",), [("1", "1"), ("2", "1")], 3),
            (("1", "2"), ("1", "2"), [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")], 7),
        ],
    )
    def test_enumerate_matchings(self, sellers, buyers, edges, expected):
        graph = WeightedBipartiteGraph(sellers, buyers, {edge: 0 for edge in edges})
        matchings = list(enumerate_matchings(graph))
        assert len(matchings) == expected
        assert len(set(matchings)) == expected

    def test_enumeration_guard(self):
        sellers = tuple(str(k) for k in range(6))
        buyers = tuple(str(k) for k in range(5))
        graph = WeightedBipartiteGraph(sellers, buyers, {(i, j): 1 for i in sellers for j in buyers})
        with pytest.raises(EnumerationGuardError):
            list(enumerate_matchings(graph))

    def test_matching_rejects_shared_agents(self):
        with pytest.raises(ValueError):
            Matching(frozenset({("1", "1"), ("2", "1")}))

    # -------------------------------------------------------------------------

    @allure.story("Optimality Property")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("The solver agrees with exhaustive enumeration on random small graphs.")
    @given(case=weighted_graphs())
    @settings(max_examples=150, deadline=None)
    def test_solver_matches_enumeration(self, case):
        graph, required = case
        assert solve_constrained_matching(graph, required) == best_by_enumeration(graph, required)
