"""Tangle detection and minimal-tangle enumeration.

A (>=nu, <r)-tangle is a connected graph with ``mu1 >= nu`` and order
``< r``.  A minimal tangle has no proper subgraph that is a tangle.
Every minimal tangle is ``VLG(T, k)`` for a bead-free pruned connected type
``T`` of order in ``[1, r)``, and its proper pruned subgraphs are exactly
the ``VLG(T - E', k)``, so minimality reduces to single-edge deletions.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .certificates import _oracle
from .errors import TooLarge
from .graph import (
    Graph,
    OrderedGraph,
    _as_graph,
    build_graph,
    canonical_form,
    canonical_relabel,
    from_edge_list,
    is_pruned,
    iter_injections,
    order,
    prune,
)
from .spectral import compare_mu1
from .walks import LengthedType, build_vlg, iter_snbc

__all__ = [
    "TangleSpec",
    "candidate_types",
    "minimal_tangles",
    "has_tangle",
    "has_tangle_bruteforce",
    "is_tangle",
    "shortest_snbc",
]

MAX_R = 3


@dataclass
class TangleSpec:
    nu: float
    r: int
    generators: list
    cap: int
    verified: bool
    _anchors: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "r": self.r,
            "cap": self.cap,
            "verified": self.verified,
            "generators": [g.to_dict() for g in self.generators],
        }

    @classmethod
    def from_dict(cls, d) -> "TangleSpec":
        return cls(float(d["nu"]), int(d["r"]), [build_graph(g) for g in d["generators"]],
                   int(d["cap"]), bool(d["verified"]))

    @property
    def max_edges(self) -> int:
        return max((g.n_edges for g in self.generators), default=0)

    def anchor(self, i: int):
        """``(dedge, walk_length)`` of a shortest SNBC walk in generator ``i``."""
        if i not in self._anchors:
            self._anchors[i] = shortest_snbc(self.generators[i])
        return self._anchors[i]


def shortest_snbc(g: Graph):
    """First dedge and length of a shortest SNBC walk in ``g`` (None if none)."""
    for k in range(1, 2 * g.n_edges + 2):
        for seq in iter_snbc(g, k):
            return g.dedges[seq[0]], k
    return None


def _bead_free(g: Graph) -> bool:
    t, h, iv, out = g.arrays
    for v in range(g.n_vertices):
        if len(out[v]) == 2:
            if not any(t[d] == h[d] for d in out[v]):
                return False
    return True


def candidate_types(r: int) -> list:
    """Bead-free pruned connected graphs of order in ``[1, r)``, one per class.

    Half-loops and whole-loops are allowed.  Such graphs satisfy
    ``#V <= 2*ord`` and ``#E <= 3*ord``.
    """
    if r > MAX_R:
        raise TooLarge(f"type enumeration is limited to r <= {MAX_R}")
    seen = {}
    for o in range(1, r):
        for nv in range(1, 2 * o + 1):
            ne = nv + o
            slots = ([("h", v) for v in range(nv)] + [("w", v) for v in range(nv)]
                     + [("p", u, v) for u in range(nv) for v in range(u + 1, nv)])
            for combo in itertools.combinations_with_replacement(range(len(slots)), ne):
                deg = [0] * nv
                for s in combo:
                    sl = slots[s]
                    if sl[0] == "h":
                        deg[sl[1]] += 1
                    elif sl[0] == "w":
                        deg[sl[1]] += 2
                    else:
                        deg[sl[1]] += 1
                        deg[sl[2]] += 1
                if min(deg) < 2:
                    continue
                edges, halves = [], []
                for s in combo:
                    sl = slots[s]
                    if sl[0] == "h":
                        halves.append(sl[1])
                    elif sl[0] == "w":
                        edges.append((sl[1], sl[1]))
                    else:
                        edges.append((sl[1], sl[2]))
                g = from_edge_list(range(nv), edges, halves)
                if not g.is_connected() or not _bead_free(g):
                    continue
                cf = canonical_form(g)
                if cf not in seen:
                    seen[cf] = canonical_relabel(g)
    return [seen[k] for k in sorted(seen)]


def _scan_type(t: Graph, nu: float, cap: int):
    """Minimal tangles VLG(t, k) with k <= cap, and whether the cap is proven."""
    otype = OrderedGraph(t, t.vertices, t.edge_orbits)
    orc = _oracle(otype, nu)
    m = len(orc.free)
    start = orc.full((1,) * m)
    if orc.sign(start) < 0:
        return [], True
    found = []
    verified = True
    seen = {(1,) * m}
    queue = deque([(1,) * m])
    while queue:
        fv = queue.popleft()
        vec = orc.full(fv)
        over = frozenset(orc.free[i] for i, x in enumerate(fv) if x > cap)
        if over:
            # beyond the cap: need the deleted-edge graph to be a tangle already
            if orc.limit_sign(over, vec) < 0:
                verified = False
        else:
            if all(orc.limit_sign(frozenset([i]), vec) < 0 for i in range(len(orc.half))):
                found.append(LengthedType(otype, dict(zip(otype.orientation, vec))))
        for i in range(m):
            if fv[i] > cap:
                continue
            nxt = fv[:i] + (fv[i] + 1,) + fv[i + 1:]
            if nxt not in seen and orc.sign(orc.full(nxt)) >= 0:
                seen.add(nxt)
                queue.append(nxt)
    return found, verified


def minimal_tangles(nu: float, r: int, cap: int = 8) -> TangleSpec:
    """All minimal (>=nu, <r)-tangles whose type lengths are ``<= cap``.

    ``verified`` is True when no minimal tangle can need a length above
    ``cap``.
    """
    if nu <= 1:
        raise ValueError("nu must exceed 1")
    if r <= 1:
        return TangleSpec(float(nu), int(r), [], int(cap), True)
    gens = {}
    verified = True
    for t in candidate_types(r):
        found, ok = _scan_type(t, nu, cap)
        verified = verified and ok
        for lt in found:
            g = build_vlg(lt)
            cf = canonical_form(g)
            if cf not in gens:
                gens[cf] = canonical_relabel(g)
    generators = [gens[k] for k in sorted(gens, key=lambda c: (c[1], c[2], c))]
    return TangleSpec(float(nu), int(r), generators, int(cap), verified)


def _embeds(psi: Graph, g: Graph, anchor=None, candidates=None) -> bool:
    if psi.n_edges > g.n_edges or psi.n_vertices > g.n_vertices:
        return False
    first = anchor[0] if anchor else None
    it = iter_injections(psi, g, first=first, first_candidates=candidates)
    return next(it, None) is not None


def has_tangle(g, spec: TangleSpec) -> bool:
    """True iff some generator of ``spec`` embeds in ``g``."""
    host = prune(_as_graph(g))
    if host.n_edges == 0:
        return False
    return any(_embeds(psi, host) for psi in spec.generators)


def is_tangle(g, nu: float, r: int) -> bool:
    g = _as_graph(g)
    return g.n_edges > 0 and g.is_connected() and order(g) < r and compare_mu1(g, nu) >= 0


def has_tangle_bruteforce(g, nu: float, r: int, max_edges: int = 40) -> bool:
    """Exhaustive search over connected pruned subgraphs of order in ``[1, r)``."""
    host = prune(_as_graph(g))
    if host.n_edges > max_edges:
        raise TooLarge(f"{host.n_edges} edges exceed the brute-force limit {max_edges}")
    t, h, iv, out = host.arrays
    orbits = [d for d in range(host.n_dedges) if iv[d] >= d]
    inc = {}
    for d in orbits:
        for v in {t[d], h[d]}:
            inc.setdefault(v, []).append(d)
    seen = set()
    stack = []
    for d in orbits:
        s = frozenset([d])
        seen.add(s)
        stack.append((s, frozenset([t[d], h[d]])))
    while stack:
        edges, verts = stack.pop()
        o = len(edges) - len(verts)
        if o >= 1:
            sub = host.subgraph([host.dedges[d] for d in edges])
            if is_pruned(sub) and compare_mu1(sub, nu) >= 0:
                return True
        for v in verts:
            for d in inc[v]:
                if d in edges:
                    continue
                ne = edges | {d}
                if ne in seen:
                    continue
                nv = verts | {t[d], h[d]}
                if len(ne) - len(nv) >= r:
                    continue
                seen.add(ne)
                stack.append((ne, nv))
    return False
