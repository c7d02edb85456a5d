import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from graphgen import random_graph, small_types
from nbcover.errors import ToleranceAmbiguous
from nbcover.graph import OrderedGraph, bouquet, complete_graph, cycle_graph, path_graph, theta_graph
from nbcover.spectral import (
    adjacency_matrix,
    compare_mu1,
    compare_shannon,
    exact_int_det,
    hashimoto_matrix,
    mu1,
    shannon_mu1,
    trace_hashimoto_pow,
)
from nbcover.walks import LengthedType, build_vlg, count_snbc


def lengthed(g, vec):
    ot = OrderedGraph(g, g.vertices, g.edge_orbits)
    return LengthedType(ot, dict(zip(ot.orientation, vec)))


def bouquet_radius(lengths):
    """Independent oracle: for a bouquet of loops, 1/mu1 solves sum 2 x^k/(1+x^k) = 1."""
    f = lambda x: sum(2 * x ** k / (1 + x ** k) for k in lengths) - 1
    return 1.0 / brentq(f, 1e-9, 1 - 1e-12, xtol=1e-15)


def test_small_traces():
    assert trace_hashimoto_pow(cycle_graph(3), 3) == 6
    assert trace_hashimoto_pow(cycle_graph(3), 2) == 0
    assert [trace_hashimoto_pow(bouquet(2), k) for k in (1, 2, 4)] == [4, 12, 84]
    assert trace_hashimoto_pow(complete_graph(4), 3) == 24


def test_trace_uses_exact_integers_for_large_powers():
    k = 60
    # bouquet(2): eigenvalues 3, 1 (x3), -1 (x... ) so Tr = 3^k + 3 + (-1)^k * 0? check against walks via H
    exact = trace_hashimoto_pow(bouquet(2), k)
    assert isinstance(exact, int)
    h = [[int(x) for x in row] for row in hashimoto_matrix(bouquet(2)).astype(int)]
    m = [[int(i == j) for j in range(4)] for i in range(4)]
    for _ in range(k):
        m = [[sum(m[i][t] * h[t][j] for t in range(4)) for j in range(4)] for i in range(4)]
    assert exact == sum(m[i][i] for i in range(4))
    assert exact > 2 ** 63


def test_hashimoto_definition():
    g = bouquet(1, 1)
    h = hashimoto_matrix(g)
    t, hd, iv, _ = g.arrays
    for a, b in itertools.product(range(g.n_dedges), repeat=2):
        assert h[a, b] == (1 if hd[a] == t[b] and iv[a] != b else 0)


def test_adjacency_counts_loops():
    a = adjacency_matrix(bouquet(1, 1))
    assert a.shape == (1, 1) and a[0, 0] == 3


def test_mu1_known_values():
    assert mu1(bouquet(2)) == pytest.approx(3.0, abs=1e-12)
    assert mu1(cycle_graph(7)) == pytest.approx(1.0, abs=1e-12)
    assert mu1(complete_graph(4)) == pytest.approx(2.0, abs=1e-12)
    assert mu1(theta_graph((2, 2, 2))) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert mu1(path_graph(4)) == 0.0
    assert mu1(build_vlg(lengthed(bouquet(0, 0), ()))) == 0.0


@pytest.mark.parametrize("lengths,frozen", [
    ((1, 2), 2.1303954347672804),
    ((1, 3), 1.8105357137661373),
    ((2, 3), 1.559533693867138),
])
def test_mu1_eight_against_bouquet_equation(lengths, frozen):
    oracle = bouquet_radius(lengths)
    assert oracle == pytest.approx(frozen, abs=1e-12)
    g = build_vlg(lengthed(bouquet(2), lengths))
    assert mu1(g) == pytest.approx(oracle, abs=1e-10)
    assert shannon_mu1(lengthed(bouquet(2), lengths)) == pytest.approx(oracle, abs=1e-10)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_mu1_matches_dense_eigenvalues(seed):
    g = random_graph(random.Random(seed), 9)
    if g.n_dedges == 0:
        return
    dense = max(abs(np.linalg.eigvals(hashimoto_matrix(g))))
    assert mu1(g) == pytest.approx(dense, abs=1e-8)


def test_compare_mu1_exact_tie():
    assert compare_mu1(bouquet(2), 3) == 0
    assert compare_mu1(bouquet(2), 2.5) == 1
    assert compare_mu1(complete_graph(4), 2) == 0
    assert compare_mu1(cycle_graph(4), 1) == 0


def test_compare_mu1_non_integral_band_is_ambiguous():
    with pytest.raises(ToleranceAmbiguous):
        compare_mu1(theta_graph((2, 2, 2)), math.sqrt(2))


def test_compare_shannon_matches_compare_mu1():
    for g in small_types(3):
        for vec in itertools.product((1, 2, 3), repeat=len(g.edge_orbits)):
            vec = tuple(1 if g.inv[e] == e else x for e, x in zip(g.edge_orbits, vec))
            lt = lengthed(g, vec)
            for nu in (1.3, 1.8, 2.5):
                assert compare_shannon(lt, nu) == compare_mu1(build_vlg(lt), nu)


def test_exact_int_det():
    assert exact_int_det([[2, 0], [0, 3]]) == 6
    assert exact_int_det([[1, 2], [2, 4]]) == 0
    assert exact_int_det([[0, 1], [1, 0]]) == -1


def test_shannon_of_cycle_and_empty():
    assert shannon_mu1(lengthed(bouquet(1), (5,))) == pytest.approx(1.0)
    assert trace_hashimoto_pow(bouquet(1), 5) == count_snbc(bouquet(1), 5) == 2
