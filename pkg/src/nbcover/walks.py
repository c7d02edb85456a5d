"""Non-backtracking walks, visited subgraphs, bead suppression and VLGs.

Homotopy types are identified by the encoding of their ordered graph:
``(n_vertices, ((tail_pos, head_pos, is_half_loop), ...))`` with edges in
order.  Ordered-graph isomorphisms are unique, so this encoding is a
canonical label and a walk's type plus its edge lengths can be compared
with plain tuple equality.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .errors import ComponentSwallowed, NotABead
from .graph import BGraph, Graph, OrderedGraph, _as_graph, order

__all__ = [
    "Walk",
    "LengthedType",
    "iter_snbc",
    "count_snbc",
    "count_snbc_order_split",
    "snbc_by_visited_edges",
    "visited_subgraph",
    "visited_bgraph",
    "bead_suppress",
    "build_vlg",
    "homotopy_class_and_lengths",
    "snbc_type_table",
    "count_snbc_by_type",
    "type_from_key",
    "type_order",
]


class Walk:
    """A walk given by its dedge sequence in ``host`` (Graph or BGraph)."""

    def __init__(self, host, dedges: Sequence[str], start: str | None = None):
        self.host = host
        g = _as_graph(host)
        self.dedges = tuple(dedges)
        if self.dedges:
            for a, b in zip(self.dedges, self.dedges[1:]):
                if g.head[a] != g.tail[b]:
                    raise ValueError(f"dedges {a!r} and {b!r} are not consecutive")
            self.vertices = (g.tail[self.dedges[0]],) + tuple(g.head[e] for e in self.dedges)
        else:
            if start is None:
                raise ValueError("an empty walk needs a start vertex")
            self.vertices = (start,)

    @classmethod
    def from_indices(cls, host, idx: Sequence[int]) -> "Walk":
        g = _as_graph(host)
        return cls(host, [g.dedges[i] for i in idx])

    @property
    def length(self) -> int:
        return len(self.dedges)

    def is_nonbacktracking(self) -> bool:
        inv = _as_graph(self.host).inv
        return all(inv[a] != b for a, b in zip(self.dedges, self.dedges[1:]))

    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def is_snbc(self) -> bool:
        if not self.dedges or not self.is_closed() or not self.is_nonbacktracking():
            return False
        return _as_graph(self.host).inv[self.dedges[-1]] != self.dedges[0]

    def __repr__(self):
        return f"Walk({list(self.dedges)!r})"


@dataclass(frozen=True)
class LengthedType:
    """Ordered homotopy type plus a positive length per edge.

    ``lengths`` is keyed by the oriented dedge of each edge.
    """

    otype: OrderedGraph
    lengths: Mapping[str, int] = field(hash=False)

    @property
    def graph(self) -> Graph:
        return self.otype.graph

    @property
    def key(self) -> tuple:
        return self.otype.encode()

    def length_vector(self) -> tuple:
        return tuple(int(self.lengths[e]) for e in self.otype.orientation)

    def with_lengths(self, vec: Sequence[int]) -> "LengthedType":
        return LengthedType(self.otype, dict(zip(self.otype.orientation, map(int, vec))))

    def __hash__(self):
        return hash((self.key, self.length_vector()))

    def __eq__(self, other):
        return (isinstance(other, LengthedType) and self.key == other.key
                and self.length_vector() == other.length_vector())


def type_from_key(key: tuple) -> OrderedGraph:
    """Ordered graph realizing an encoding; vertices ``"0".."n-1"``, edges ``t{i}``/``t{i}r``."""
    nv, edges = key
    verts = [str(i) for i in range(nv)]
    tail, head, inv = {}, {}, {}
    orient = []
    for i, (a, b, half) in enumerate(edges):
        e = f"t{i}"
        tail[e], head[e] = str(a), str(b)
        orient.append(e)
        if half:
            inv[e] = e
        else:
            r = f"t{i}r"
            inv[e], inv[r] = r, e
            tail[r], head[r] = str(b), str(a)
    vorder = sorted(verts, key=int)
    g = Graph(verts, list(tail), tail, head, inv)
    return OrderedGraph(g, vorder, orient)


def type_order(key: tuple) -> int:
    return len(key[1]) - key[0]


# -- enumeration -------------------------------------------------------------


def iter_snbc(g, k: int) -> Iterator[tuple]:
    """Yield every SNBC walk of length ``k`` as a tuple of dedge indices.

    Each starting dedge is counted separately, so the number of walks is
    ``Tr(H^k)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = _as_graph(g)
    t, h, iv, out = g.arrays
    nxt = [[f for f in out[h[e]] if f != iv[e]] for e in range(g.n_dedges)]
    path = [0] * k

    def rec(i, e):
        if i == k:
            first = path[0]
            if h[e] == t[first] and iv[e] != first:
                yield tuple(path)
            return
        for f in nxt[e]:
            path[i] = f
            yield from rec(i + 1, f)

    for s in range(g.n_dedges):
        path[0] = s
        yield from rec(1, s)


def count_snbc(g, k: int) -> int:
    """Number of SNBC walks of length ``k``, counted path by path from each start dedge."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = _as_graph(g)
    t, h, iv, out = g.arrays
    nxt = [[f for f in out[h[e]] if f != iv[e]] for e in range(g.n_dedges)]
    total = 0
    for s in range(g.n_dedges):
        # count NB paths s -> ... -> e of length k with closing condition
        frontier = {s: 1}
        for _ in range(k - 1):
            new = {}
            for e, c in frontier.items():
                for f in nxt[e]:
                    new[f] = new.get(f, 0) + c
            frontier = new
        for e, c in frontier.items():
            if h[e] == t[s] and iv[e] != s:
                total += c
    return total


def _visited_order(seq, t, h, iv):
    """Order of the subgraph visited by a walk given as indices."""
    vs = {t[seq[0]]}
    es = set()
    for d in seq:
        vs.add(h[d])
        es.add(min(d, iv[d]))
    return len(es) - len(vs)


def snbc_by_visited_edges(g, k: int) -> Counter:
    """Counter mapping the set of visited edges (orbit representatives) to walk counts.

    Counts SNBC walks of length ``k`` by dynamic programming over
    ``(current dedge, visited edges)`` instead of listing walks, so the cost
    depends on the number of distinct visited sets.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = _as_graph(g)
    t, h, iv, out = g.arrays
    orbits = [min(d, iv[d]) for d in range(g.n_dedges)]
    bit = [1 << o for o in orbits]
    nxt = [[f for f in out[h[e]] if f != iv[e]] for e in range(g.n_dedges)]
    closing = Counter()
    for s in range(g.n_dedges):
        frontier = {(s, bit[s]): 1}
        for _ in range(k - 1):
            new = {}
            for (e, m), c in frontier.items():
                for f in nxt[e]:
                    key = (f, m | bit[f])
                    new[key] = new.get(key, 0) + c
            frontier = new
        for (e, m), c in frontier.items():
            if h[e] == t[s] and iv[e] != s:
                closing[m] += c
    out_counter = Counter()
    for m, c in closing.items():
        out_counter[frozenset(d for d in range(g.n_dedges) if m >> d & 1)] += c
    return out_counter


def _mask_order(g: Graph, orbit_set) -> int:
    t, h, _, _ = g.arrays
    vs = {t[d] for d in orbit_set} | {h[d] for d in orbit_set}
    return len(orbit_set) - len(vs)


def count_snbc_order_split(g, k: int, r: int) -> tuple:
    """``(below, at_or_above)``: SNBC k-walks split by visited-subgraph order vs ``r``."""
    g = _as_graph(g)
    below = above = 0
    for orbit_set, c in snbc_by_visited_edges(g, k).items():
        if _mask_order(g, orbit_set) < r:
            below += c
        else:
            above += c
    return below, above


def visited_subgraph(w: Walk) -> OrderedGraph:
    """ViSu of ``w`` with the first-encountered ordering."""
    g = _as_graph(w.host)
    vorder = []
    seen_v = set()
    orient = []
    seen_e = set()
    for v in w.vertices:
        if v not in seen_v:
            seen_v.add(v)
            vorder.append(v)
    for e in w.dedges:
        orbit = min(e, g.inv[e])
        if orbit not in seen_e:
            seen_e.add(orbit)
            orient.append(e)
    sub = g.subgraph(w.dedges, w.vertices)
    return OrderedGraph(sub, vorder, orient)


def visited_bgraph(w: Walk) -> BGraph:
    if not isinstance(w.host, BGraph):
        raise TypeError("walk host is not a BGraph")
    return w.host.subgraph(w.dedges, w.vertices)


# -- bead suppression ----------------------------------------------------------


def _reduce(nv, edges, keep, vertex_names=None):
    """Suppress every vertex outside ``keep``.

    ``edges`` lists ``(tail, head, half)`` in edge order (orientation as
    given).  Returns ``(kept, new_edges)`` where each new edge is
    ``(tail, head, half, path)`` and ``path`` lists ``(edge_index, forward)``
    in the direction of the new edge.
    """
    inc = [[] for _ in range(nv)]
    deg = [0] * nv
    loop = [False] * nv
    for i, (a, b, half) in enumerate(edges):
        if half:
            deg[a] += 1
            loop[a] = True
            continue
        inc[a].append((i, 0))
        inc[b].append((i, 1))
        deg[a] += 1
        deg[b] += 1
        if a == b:
            loop[a] = True
    for v in range(nv):
        if v not in keep and (deg[v] != 2 or loop[v]):
            name = vertex_names[v] if vertex_names else v
            raise NotABead(f"vertex {name!r} is not a bead")

    def step(i, fwd):
        """Vertex reached by traversing edge i in the given direction."""
        a, b, _ = edges[i]
        return b if fwd else a

    def other(v, i):
        for j, end in inc[v]:
            if j != i:
                return j, end == 0  # leaving v along j: forward iff v is its tail
        raise AssertionError

    absorbed = [False] * len(edges)
    new_edges = []
    for i, (a, b, half) in enumerate(edges):
        if absorbed[i]:
            continue
        absorbed[i] = True
        if half:
            new_edges.append((a, a, True, [(i, True)]))
            continue
        forward = [(i, True)]
        v = b
        while v not in keep:
            j, fwd = other(v, forward[-1][0])
            if j == i:
                raise ComponentSwallowed("a cycle of beads has no kept vertex")
            absorbed[j] = True
            forward.append((j, fwd))
            v = step(j, fwd)
        end = v
        backward = []
        v = a
        last = i
        while v not in keep:
            j, fwd = other(v, last)
            absorbed[j] = True
            backward.append((j, not fwd))
            last = j
            v = step(j, fwd)
        start = v
        path = backward[::-1] + forward
        new_edges.append((start, end, False, path))
    kept = [v for v in range(nv) if v in keep]
    return kept, new_edges


def bead_suppress(s: OrderedGraph, keep) -> LengthedType:
    """Suppress every vertex of ``s`` outside ``keep``; all must be beads.

    The reduction keeps the induced vertex order; each new edge takes the
    orientation and position of its earliest original edge.  Its dedge ids
    are the first dedge of the path and the inverse of the last one.
    """
    g = s.graph
    vpos = {v: i for i, v in enumerate(s.vertex_order)}
    keep_pos = {vpos[v] for v in keep}
    edges = [(vpos[g.tail[e]], vpos[g.head[e]], g.inv[e] == e) for e in s.orientation]
    kept, new_edges = _reduce(len(vpos), edges, keep_pos, s.vertex_order)
    tail, head, inv = {}, {}, {}
    orient = []
    lengths = {}
    for a, b, half, path in new_edges:
        first_j, first_f = path[0]
        last_j, last_f = path[-1]
        e0 = s.orientation[first_j]
        fid = e0 if first_f else g.inv[e0]
        el = s.orientation[last_j]
        lid = el if last_f else g.inv[el]
        rid = g.inv[lid]
        va, vb = s.vertex_order[a], s.vertex_order[b]
        tail[fid], head[fid] = va, vb
        if half:
            inv[fid] = fid
        else:
            inv[fid], inv[rid] = rid, fid
            tail[rid], head[rid] = vb, va
        orient.append(fid)
        lengths[fid] = len(path)
    verts = [s.vertex_order[v] for v in kept]
    red = Graph(verts, list(tail), tail, head, inv, validate=False)
    return LengthedType(OrderedGraph(red, verts, orient), lengths)


def build_vlg(t: LengthedType, ordered: bool = False):
    """Replace each edge ``e`` of the type by a path of ``k(e)`` edges.

    Whole-loops become cycles through their vertex.  Half-loops must have
    length 1.  With ``ordered=True`` an :class:`OrderedGraph` is returned,
    ordered along the edge order of ``t``.
    """
    g = t.otype.graph
    tail, head, inv = {}, {}, {}
    vorder = list(t.otype.vertex_order)
    orient = []
    for e in t.otype.orientation:
        k = int(t.lengths[e])
        if k < 1:
            raise ValueError("lengths must be >= 1")
        if g.inv[e] == e:
            if k != 1:
                raise ValueError("half-loops only admit length 1")
            tail[e] = head[e] = g.tail[e]
            inv[e] = e
            orient.append(e)
            continue
        if k == 1:
            r = g.inv[e]
            tail[e], head[e], tail[r], head[r] = g.tail[e], g.head[e], g.head[e], g.tail[e]
            inv[e], inv[r] = r, e
            orient.append(e)
            continue
        chain = [g.tail[e]] + [f"{e}~{j}" for j in range(1, k)] + [g.head[e]]
        vorder.extend(chain[1:-1])
        for j in range(k):
            a, b = f"{e}~{j}+", f"{e}~{j}-"
            tail[a], head[a] = chain[j], chain[j + 1]
            tail[b], head[b] = chain[j + 1], chain[j]
            inv[a], inv[b] = b, a
            orient.append(a)
    out = Graph(vorder, list(tail), tail, head, inv, validate=False)
    if ordered:
        return OrderedGraph(out, vorder, orient)
    return out


# -- walk types ---------------------------------------------------------------


def _walk_key(seq, t, h, iv):
    """Homotopy-type key and length vector of an SNBC walk given by indices."""
    vpos = {t[seq[0]]: 0}
    epos = {}
    edges = []
    for d in seq:
        b = h[d]
        if b not in vpos:
            vpos[b] = len(vpos)
        orbit = d if d <= iv[d] else iv[d]
        if orbit not in epos:
            epos[orbit] = len(edges)
            edges.append((vpos[t[d]], vpos[b], iv[d] == d))
    nv = len(vpos)
    deg = [0] * nv
    loop = [False] * nv
    for a, b, half in edges:
        if half or a == b:
            loop[a] = True
        deg[a] += 1
        if not half:
            deg[b] += 1
    keep = {v for v in range(nv) if v == 0 or deg[v] != 2 or loop[v]}
    if len(keep) == nv:
        return (nv, tuple(edges)), (1,) * len(edges)
    kept, new_edges = _reduce(nv, edges, keep)
    rank = {v: i for i, v in enumerate(kept)}
    key = (len(kept), tuple((rank[a], rank[b], half) for a, b, half, _ in new_edges))
    return key, tuple(len(p) for *_, p in new_edges)


def homotopy_class_and_lengths(w: Walk) -> tuple:
    """``(type_key, lengths)`` of a non-backtracking walk; the start vertex is kept."""
    g = _as_graph(w.host)
    t, h, iv, _ = g.arrays
    di = g.dindex
    return _walk_key([di[e] for e in w.dedges], t, h, iv)


def snbc_type_table(g, k: int) -> Counter:
    """Counter of ``(type_key, lengths)`` over all SNBC walks of length ``k``."""
    g = _as_graph(g)
    t, h, iv, _ = g.arrays
    table = Counter()
    for seq in iter_snbc(g, k):
        table[_walk_key(seq, t, h, iv)] += 1
    return table


def _as_key(t):
    if isinstance(t, LengthedType):
        return t.key
    if isinstance(t, OrderedGraph):
        return t.encode()
    return t


def count_snbc_by_type(g, k_total: int, t, floor=None, table: Counter | None = None) -> int:
    """SNBC walks of length ``k_total`` of type ``t`` with lengths ``>= floor``.

    ``floor`` is a vector in the type's edge order (or a mapping keyed by
    its oriented dedges when ``t`` is a :class:`LengthedType`).
    """
    key = _as_key(t)
    if table is None:
        table = snbc_type_table(g, k_total)
    if floor is None:
        floor = (1,) * len(key[1])
    elif isinstance(floor, Mapping):
        floor = tuple(floor[e] for e in t.otype.orientation)
    total = 0
    for (tk, lengths), c in table.items():
        if tk == key and all(a >= b for a, b in zip(lengths, floor)):
            total += c
    return total
