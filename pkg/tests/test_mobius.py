import random
from fractions import Fraction

import pytest

from nbcover.covers import realize, sample_cover
from nbcover.errors import GeneratorNotPositive
from nbcover.graph import bouquet, count_injections, cycle_graph, identity_bgraph, order, theta_graph
from nbcover.mobius import (
    as_generators,
    b_structures,
    derived_classes,
    indicator_bound,
    meets,
    psi_image,
    truncated_indicator,
)


def test_b_structure_counts():
    base = bouquet(2)
    assert len(b_structures(bouquet(2), base)) == 3
    assert len(b_structures(theta_graph((1, 1, 1)), base)) == 10


def test_generators_must_be_positive():
    with pytest.raises(GeneratorNotPositive):
        as_generators([cycle_graph(2)], bouquet(2))


def test_single_generator_tables():
    eight = identity_bgraph(bouquet(2))
    t = derived_classes([eight], 2)
    assert len(t.classes) == 1 and list(t.mobius.values()) == [Fraction(1)]
    assert derived_classes([eight], 1).classes == {}
    t4 = derived_classes([eight], 4)
    assert len(t4.classes) == 10 and t4.check_identity()
    assert {order(s) for s in t4.classes.values()} == {1, 2, 3}


def test_mobius_values_for_two_copies():
    eight = identity_bgraph(bouquet(2))
    t = derived_classes([eight], 3)
    # the disjoint pair of eights: N(eight, pair) = 2, so mu = (1 - 2) / Aut = -1/2
    pair = [s for s in t.classes.values() if s.graph.n_vertices == 2 and s.graph.n_edges == 4]
    label = next(k for k, v in t.classes.items() if v is pair[0])
    assert t.mobius[label] == Fraction(-1, 2)
    assert t.check_identity()


def test_indicator_on_random_covers():
    base = bouquet(2)
    gens = b_structures(bouquet(2), base)[:2]
    table = derived_classes(gens, 3)
    seen = set()
    for j in range(40):
        n = random.Random(j).choice([1, 2, 3])
        g = realize(sample_cover(base, n, "permutation", 2, stream=(j,)))
        _, o = psi_image(g, table)
        if o < 3:
            seen.add(o)
            assert truncated_indicator(g, table, table=table) == (1 if meets(g, table) else 0)
    assert 1 in seen and 0 in seen


def test_indicator_bound_holds():
    base = bouquet(2)
    eight = identity_bgraph(base)
    for j in range(10):
        g = realize(sample_cover(base, 2, "permutation", 8, stream=(j,)))
        value, bound = indicator_bound(g, [eight], 2)
        target = 1 if meets(g, [eight]) else 0
        assert abs(value - target) <= bound


def test_table_serialization():
    t = derived_classes([identity_bgraph(bouquet(2))], 3)
    d = t.to_dict()
    assert len(d["classes"]) == len(t.classes)
    for c in d["classes"]:
        assert Fraction(*c["mobius"]) in set(t.mobius.values())
    assert all(count_injections(s, s) >= 1 for s in t.classes.values())
