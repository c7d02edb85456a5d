import itertools
import json
import random

import pytest

from graphgen import random_connected_graph
from nbcover.errors import TooLarge
from nbcover.graph import bouquet, canonical_form, complete_graph, from_edge_list, iter_injections, order, theta_graph
from nbcover.spectral import mu1
from nbcover.tangles import (
    TangleSpec,
    candidate_types,
    has_tangle,
    has_tangle_bruteforce,
    is_tangle,
    minimal_tangles,
    shortest_snbc,
)


def embeds(a, b):
    return next(iter_injections(a, b), None) is not None


def test_candidate_counts():
    assert len(candidate_types(2)) == 7
    with pytest.raises(TooLarge):
        candidate_types(4)


def test_minimal_tangles_at_three():
    spec = minimal_tangles(3.0, 2)
    assert spec.verified and len(spec.generators) == 1
    assert canonical_form(spec.generators[0]) == canonical_form(bouquet(2))
    assert minimal_tangles(4.0, 2).generators == []


def test_minimal_tangles_at_one_point_eight():
    spec = minimal_tangles(1.8, 2)
    assert spec.verified and len(spec.generators) == 6
    for g in spec.generators:
        assert is_tangle(g, 1.8, 2)
    for a, b in itertools.permutations(spec.generators, 2):
        assert not embeds(a, b)
    forms = {canonical_form(g) for g in spec.generators}
    assert canonical_form(theta_graph((1, 1, 1))) in forms
    assert canonical_form(from_edge_list([0, 1], [(0, 0), (0, 1), (1, 1)])) in forms


def test_minimality_by_single_edge_deletion():
    spec = minimal_tangles(1.5, 2)
    assert spec.verified and len(spec.generators) == 21
    for g in spec.generators:
        for e in g.edge_orbits:
            sub = g.delete_edges([e])
            for comp in sub.component_subgraphs():
                assert not (comp.n_edges and order(comp) >= 1 and mu1(comp) >= 1.5)


def test_trivial_ranges():
    assert minimal_tangles(1.8, 1).generators == []
    with pytest.raises(ValueError):
        minimal_tangles(1.0, 2)


def test_has_tangle_agrees_with_bruteforce():
    rng = random.Random(11)
    spec = minimal_tangles(1.8, 2)
    for _ in range(40):
        g = random_connected_graph(rng, 10)
        assert has_tangle(g, spec) == has_tangle_bruteforce(g, 1.8, 2)


def test_k4():
    assert has_tangle(complete_graph(4), minimal_tangles(2.0, 3))
    assert not has_tangle_bruteforce(complete_graph(4), 2.1, 3)
    assert not has_tangle(complete_graph(4), minimal_tangles(2.1, 3))


def test_spec_round_trip_and_anchor():
    spec = minimal_tangles(1.8, 2)
    back = TangleSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert [canonical_form(g) for g in back.generators] == [canonical_form(g) for g in spec.generators]
    for i, g in enumerate(spec.generators):
        d, c = spec.anchor(i)
        assert d in g.dedges and c == shortest_snbc(g)[1]
