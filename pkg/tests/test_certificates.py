import itertools
import json
import random

import pytest

from graphgen import random_graph, small_types
from nbcover.certificates import (
    CertificateSet,
    cert_trace_direct,
    cert_trace_incl_excl,
    certificates_within,
    in_upper_set,
    minimal_certificates,
)
from nbcover.errors import CapUnverified
from nbcover.graph import OrderedGraph, bouquet, complete_graph, cycle_graph
from nbcover.spectral import mu1
from nbcover.walks import LengthedType, build_vlg, count_snbc


def explicit_member(ot, vec, nu, strict):
    v = mu1(build_vlg(LengthedType(ot, dict(zip(ot.orientation, vec)))))
    return v < nu if strict else v <= nu


def brute_minima(ot, nu, strict, cap):
    """Independent oracle: minimal members of U on the grid, via explicit eigenvalues."""
    free = [i for i, e in enumerate(ot.orientation) if ot.graph.inv[e] != e]
    members = set()
    for xs in itertools.product(range(1, cap + 1), repeat=len(free)):
        vec = [1] * len(ot.orientation)
        for i, x in zip(free, xs):
            vec[i] = x
        if explicit_member(ot, vec, nu, strict):
            members.add(tuple(vec))
    return sorted(m for m in members
                  if not any(o != m and all(a <= b for a, b in zip(o, m)) for o in members))


def eight():
    g = bouquet(2)
    return OrderedGraph(g, g.vertices, g.edge_orbits)


def test_eight_certificates():
    res = minimal_certificates(eight(), 3.0, strict=True)
    assert set(res.minima) == {(1, 2), (2, 1)} and res.verified
    assert minimal_certificates(eight(), 3.0, strict=False).minima == ((1, 1),)
    res = minimal_certificates(eight(), 1.0)
    assert res.minima == () and res.verified


def test_eight_certificates_at_one_and_a_half():
    res = minimal_certificates(eight(), 1.5, cap=12)
    assert res.minima == ((1, 6), (2, 4), (3, 3), (4, 2), (6, 1))
    assert res.verified


@pytest.mark.parametrize("nu", [1.4, 1.8, 2.5])
def test_minima_match_brute_force(nu):
    for g in small_types(3):
        ot = OrderedGraph(g, g.vertices, g.edge_orbits)
        for strict in (True, False):
            res = minimal_certificates(ot, nu, strict, cap=6)
            assert list(res.minima) == brute_minima(ot, nu, strict, 6)


def test_in_upper_set_is_monotone():
    ot = eight()
    for a, b in itertools.product(range(1, 7), repeat=2):
        if in_upper_set(ot, (a, b), 1.7):
            assert in_upper_set(ot, (a + 1, b), 1.7)
            assert in_upper_set(ot, (a, b + 1), 1.7)


def test_certificates_within_agrees_with_capped_minima():
    ot = eight()
    full = minimal_certificates(ot, 1.5, cap=12).minima
    for budget in range(2, 14):
        assert certificates_within(ot, 1.5, True, budget) == tuple(m for m in full if sum(m) <= budget)


def test_cap_unverified():
    with pytest.raises(CapUnverified) as info:
        minimal_certificates(eight(), 1.5, cap=3, require_verified=True)
    assert not info.value.result.verified


def test_serialization_round_trip():
    res = minimal_certificates(eight(), 1.5)
    back = CertificateSet.from_dict(json.loads(json.dumps(res.to_dict())))
    assert back == res
    assert back.contains((3, 4)) and not back.contains((2, 3))


def test_cert_trace_small_cases():
    c6 = cycle_graph(6)
    assert cert_trace_direct(c6, 2.0, 1, 6) == cert_trace_incl_excl(c6, 2.0, 1, 6) == 12
    g = bouquet(2)
    assert cert_trace_direct(g, 2.0, 5, 2) == cert_trace_incl_excl(g, 2.0, 5, 2) == 4
    k4 = complete_graph(4)
    for k in range(3, 9):
        assert cert_trace_direct(k4, 1.8, 3, k) == cert_trace_incl_excl(k4, 1.8, 3, k)


def test_cert_trace_bounds():
    rng = random.Random(5)
    for _ in range(20):
        g = random_graph(rng, 6)
        for k in range(1, 6):
            strict = cert_trace_direct(g, 1.8, 2, k)
            weak = cert_trace_direct(g, 1.8, 2, k, strict=False)
            assert 0 <= strict <= weak <= count_snbc(g, k)
