"""Random and exhaustive graph generators shared by the test suites."""

import itertools
import random

from nbcover.graph import canonical_form, canonical_relabel, from_edge_list


def random_graph(rng: random.Random, max_edges: int, halves: bool = True, min_edges: int = 1,
                 max_vertices: int | None = None, max_degree: int | None = None):
    """Multigraph with loops (and optionally half-loops) and at most ``max_edges`` edges.

    With ``max_degree`` graphs are redrawn until every degree is within it.
    """
    while True:
        g = _random_graph(rng, max_edges, halves, min_edges, max_vertices)
        if max_degree is None or all(g.degree(v) <= max_degree for v in g.vertices):
            return g


def _random_graph(rng, max_edges, halves, min_edges, max_vertices):
    m = rng.randint(min_edges, max_edges)
    nv = rng.randint(1, max_vertices or max(1, m))
    edges, hl = [], []
    for _ in range(m):
        x = rng.random()
        if halves and x < 0.12:
            hl.append(rng.randrange(nv))
        elif x < 0.3:
            v = rng.randrange(nv)
            edges.append((v, v))
        else:
            edges.append((rng.randrange(nv), rng.randrange(nv)))
    return from_edge_list(range(nv), edges, hl)


def random_connected_graph(rng: random.Random, max_edges: int, halves: bool = True):
    """Connected multigraph: a random tree plus extra edges and loops."""
    m = rng.randint(1, max_edges)
    nv = rng.randint(1, max(1, (m + 1) // 2 + 1))
    nv = min(nv, m + 1)
    edges = [(rng.randrange(v), v) for v in range(1, nv)]
    hl = []
    while len(edges) + len(hl) < m:
        x = rng.random()
        if halves and x < 0.15:
            hl.append(rng.randrange(nv))
        elif x < 0.35:
            v = rng.randrange(nv)
            edges.append((v, v))
        else:
            edges.append((rng.randrange(nv), rng.randrange(nv)))
    return from_edge_list(range(nv), edges, hl)


def small_types(max_edges: int) -> list:
    """Connected pruned graphs without beads and with at most ``max_edges`` edges.

    A single vertex with one whole-loop (the cycle type) is included.
    """
    seen = {}
    for ne in range(1, max_edges + 1):
        for nv in range(1, ne + 1):
            slots = ([("h", v) for v in range(nv)] + [("w", v) for v in range(nv)]
                     + [("p", u, v) for u in range(nv) for v in range(u + 1, nv)])
            for combo in itertools.combinations_with_replacement(slots, ne):
                deg = [0] * nv
                loop = [False] * nv
                edges, hl = [], []
                for sl in combo:
                    if sl[0] == "h":
                        deg[sl[1]] += 1
                        loop[sl[1]] = True
                        hl.append(sl[1])
                    elif sl[0] == "w":
                        deg[sl[1]] += 2
                        loop[sl[1]] = True
                        edges.append((sl[1], sl[1]))
                    else:
                        deg[sl[1]] += 1
                        deg[sl[2]] += 1
                        edges.append((sl[1], sl[2]))
                if min(deg) < 2 or any(d == 2 and not lp for d, lp in zip(deg, loop)):
                    continue
                g = from_edge_list(range(nv), edges, hl)
                if not g.is_connected():
                    continue
                cf = canonical_form(g)
                if cf not in seen:
                    seen[cf] = canonical_relabel(g)
    return [seen[k] for k in sorted(seen)]
