"""
Constrained matching subproblem solved at every pass of the price-adjustment loop.

Among the matchings of a weighted bipartite graph that cover a required buyer set,
`solve_constrained_matching` returns the one ranked first by

    1. total weight (largest first),
    2. cardinality (largest first),
    3. sorted (seller index, buyer index) edge list (lexicographically smallest first).

The ranking is folded into one exact integer profit per edge and handed to networkx's
maximum-weight matching, so no floating comparison ever decides between two candidates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterator, Mapping, Optional

import networkx as nx
from networkx.algorithms import bipartite

from market_base.exceptions import EnumerationGuardError, MatchingInfeasibleError
from market_base.settings import get_settings
from market_base.valuations import Number

Edge = tuple[Hashable, Hashable]

# node tags keep seller and buyer ids apart inside networkx graphs
_SELLER, _BUYER = "s", "b"


@dataclass(frozen=True)
class Matching:
    """A set of seller-buyer pairs in which every agent appears at most once."""

    pairs: frozenset = frozenset()
    buyer_of: Mapping = field(default_factory=dict, compare=False, repr=False)
    seller_of: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        pairs = frozenset(self.pairs)
        buyer_of, seller_of = {}, {}
        for seller, buyer in pairs:
            if seller in buyer_of or buyer in seller_of:
                raise ValueError(f"Agent appears twice in matching at ({seller},{buyer})")
            buyer_of[seller] = buyer
            seller_of[buyer] = seller
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "buyer_of", buyer_of)
        object.__setattr__(self, "seller_of", seller_of)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __iter__(self):
        return iter(self.pairs)

    @property
    def matched_sellers(self) -> frozenset:
        return frozenset(self.buyer_of)

    @property
    def matched_buyers(self) -> frozenset:
        return frozenset(self.seller_of)


@dataclass(frozen=True)
class WeightedBipartiteGraph:
    sellers: tuple
    buyers: tuple
    weights: Mapping[Edge, Number]

    def __post_init__(self):
        object.__setattr__(self, "sellers", tuple(self.sellers))
        object.__setattr__(self, "buyers", tuple(self.buyers))
        object.__setattr__(self, "weights", dict(self.weights))
        sellers, buyers = set(self.sellers), set(self.buyers)
        for (seller, buyer), weight in self.weights.items():
            if seller not in sellers or buyer not in buyers:
                raise ValueError(f"Edge ({seller},{buyer}) has an endpoint outside the graph")
            if weight < 0:
                raise ValueError(f"Edge ({seller},{buyer}) has negative weight {weight}")

    def edge_key(self, edge: Edge) -> tuple[int, int]:
        return self.sellers.index(edge[0]), self.buyers.index(edge[1])

    @property
    def edges(self) -> list[Edge]:
        return sorted(self.weights, key=self.edge_key)

    def neighbours(self, buyer) -> list:
        return [seller for seller, b in self.edges if b == buyer]

    def total_weight(self, matching: Matching) -> Number:
        return sum((self.weights[pair] for pair in matching), Fraction(0))


# -----------------------------------------------------------------------------
# Brute force
# -----------------------------------------------------------------------------
def enumerate_matchings(graph: WeightedBipartiteGraph, max_edges: Optional[int] = None) -> Iterator[Matching]:
    """Yields every matching of the graph exactly once, the empty one included."""
    limit = get_settings().max_enumeration_edges if max_edges is None else max_edges
    edges = graph.edges
    if len(edges) > limit:
        raise EnumerationGuardError(f"Refusing to enumerate matchings of {len(edges)} edges (limit {limit})")

    def extend(start: int, used_sellers: frozenset, used_buyers: frozenset, chosen: tuple):
        yield Matching(frozenset(chosen))
        for k in range(start, len(edges)):
            seller, buyer = edges[k]
            if seller in used_sellers or buyer in used_buyers:
                continue
            yield from extend(k + 1, used_sellers | {seller}, used_buyers | {buyer}, chosen + (edges[k],))

    yield from extend(0, frozenset(), frozenset(), ())


# -----------------------------------------------------------------------------
# Infeasibility witness
# -----------------------------------------------------------------------------
def hall_witness(graph: WeightedBipartiteGraph, required_buyers) -> frozenset:
    """
    Returns a set of required buyers with fewer admissible sellers than members, or
    an empty set when the required buyers can all be matched at once.

    The set is read off a minimum vertex cover of the required buyers' subgraph: the
    buyers left outside the cover only have neighbours inside it.
    """
    required = [b for b in graph.buyers if b in set(required_buyers)]
    top = [(_BUYER, buyer) for buyer in required]
    subgraph = nx.Graph()
    subgraph.add_nodes_from(top)
    subgraph.add_edges_from(
        ((_BUYER, buyer), (_SELLER, seller)) for buyer in required for seller in graph.neighbours(buyer)
    )

    matching = bipartite.hopcroft_karp_matching(subgraph, top_nodes=top)
    if all(node in matching for node in top):
        return frozenset()
    cover = bipartite.to_vertex_cover(subgraph, matching, top_nodes=top)
    return frozenset(buyer for buyer in required if (_BUYER, buyer) not in cover)


# -----------------------------------------------------------------------------
# Exact optimisation
# -----------------------------------------------------------------------------
def _integer_weights(weights: Mapping[Edge, Number], eps: float) -> dict[Edge, int]:
    """Scales weights to integers; float weights are snapped to the eps grid first."""
    if any(isinstance(w, float) for w in weights.values()):
        return {edge: round(Fraction(w) / Fraction(eps)) for edge, w in weights.items()}
    exact = {edge: Fraction(w) for edge, w in weights.items()}
    scale = math.lcm(*(w.denominator for w in exact.values())) if exact else 1
    return {edge: int(w * scale) for edge, w in exact.items()}


def solve_constrained_matching(
    graph: WeightedBipartiteGraph,
    required_buyers=frozenset(),
    eps: Optional[float] = None,
) -> Matching:
    """
    Best matching covering every required buyer under the (weight, cardinality,
    lexicographic) ranking.

    Raises:
        MatchingInfeasibleError: no matching covers the required buyers.
    """
    eps = get_settings().eps if eps is None else eps
    required = frozenset(required_buyers)
    unknown = required - set(graph.buyers)
    if unknown:
        raise MatchingInfeasibleError(sorted(unknown, key=str), ())

    edges = graph.edges
    if not edges:
        if required:
            raise MatchingInfeasibleError(sorted(required, key=str), ())
        return Matching()

    # objective layers, each strictly dominating everything below it
    weights = _integer_weights(graph.weights, eps)
    n_edges = len(edges)
    size = max(len(graph.sellers), len(graph.buyers))
    lex_bonus = {edge: 1 << (n_edges - 1 - rank) for rank, edge in enumerate(edges)}
    card_unit = 1 << n_edges
    weight_unit = (size + 1) * card_unit
    cover_unit = (sum(weights.values()) + 1) * weight_unit + weight_unit

    # integer profits keep max_weight_matching on exact integer arithmetic
    lifted = nx.Graph()
    for seller, buyer in edges:
        edge = (seller, buyer)
        lifted.add_edge(
            (_SELLER, seller),
            (_BUYER, buyer),
            weight=(cover_unit if buyer in required else 0)
            + weights[edge] * weight_unit
            + card_unit
            + lex_bonus[edge],
        )

    chosen = []
    for u, v in nx.max_weight_matching(lifted, maxcardinality=False, weight="weight"):
        seller_node, buyer_node = (u, v) if u[0] == _SELLER else (v, u)
        chosen.append((seller_node[1], buyer_node[1]))
    matching = Matching(frozenset(chosen))

    if not required <= matching.matched_buyers:
        deficient = hall_witness(graph, required)
        neighbours = {seller for buyer in deficient for seller in graph.neighbours(buyer)}
        raise MatchingInfeasibleError(
            [b for b in graph.buyers if b in deficient],
            [s for s in graph.sellers if s in neighbours],
        )
    return matching
