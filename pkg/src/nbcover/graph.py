"""Graphs with half-loops and whole-loops, B-graphs and ordered graphs.

A :class:`Graph` is a set of vertices, a set of directed edges ("dedges")
with tails and heads, and an involution ``inv`` on the dedges with
``tail(inv(e)) == head(e)``.  A dedge fixed by ``inv`` is a half-loop; an
``inv``-pair of dedges with equal endpoints is a whole-loop.

Ids are opaque strings.  Vertex and dedge sets are kept in lexicographic
order, which makes every derived quantity deterministic.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DanglingReference, InvalidInvolution, InvalidMorphism

__all__ = [
    "Graph",
    "BGraph",
    "OrderedGraph",
    "build_graph",
    "order",
    "euler_char",
    "prune",
    "is_pruned",
    "is_positive",
    "canonical_form",
    "canonical_hash",
    "canonical_relabel",
    "iter_injections",
    "count_injections",
    "aut_count",
    "fibre_counts",
    "from_edge_list",
    "cycle_graph",
    "path_graph",
    "bouquet",
    "complete_graph",
    "theta_graph",
    "disjoint_union",
    "identity_bgraph",
]

HALF, WHOLE, PLAIN = 0, 1, 2  # dedge kinds: half-loop, whole-loop, other


class Graph:
    """Immutable graph in the involution-on-dedges sense.

    Parameters
    ----------
    vertices : iterable of str
    dedges : iterable of str
    tail, head, inv : mapping from dedge id
    validate : bool
        Check the involution axioms (raises :class:`InvalidInvolution` or
        :class:`DanglingReference`).
    """

    def __init__(self, vertices, dedges, tail, head, inv, validate=True):
        self.vertices = tuple(sorted(set(vertices)))
        self.dedges = tuple(sorted(set(dedges)))
        self.tail = {e: tail[e] for e in self.dedges} if not validate else {}
        self.head = {e: head[e] for e in self.dedges} if not validate else {}
        self.inv = {e: inv[e] for e in self.dedges} if not validate else {}
        if validate:
            self._validate(tail, head, inv)

    def _validate(self, tail, head, inv):
        vset = set(self.vertices)
        dset = set(self.dedges)
        for e in self.dedges:
            for name, m in (("tail", tail), ("head", head), ("inv", inv)):
                if e not in m:
                    raise DanglingReference(f"dedge {e!r} has no {name}")
            if tail[e] not in vset or head[e] not in vset:
                raise DanglingReference(f"dedge {e!r} references a missing vertex")
            if inv[e] not in dset:
                raise DanglingReference(f"inv({e!r}) = {inv[e]!r} is not a dedge")
            self.tail[e] = tail[e]
            self.head[e] = head[e]
            self.inv[e] = inv[e]
        for e in self.dedges:
            f = inv[e]
            if inv[f] != e:
                raise InvalidInvolution(f"inv(inv({e!r})) != {e!r}")
            if tail[f] != head[e]:
                raise InvalidInvolution(f"tail(inv({e!r})) != head({e!r})")

    # -- index representation -------------------------------------------

    @cached_property
    def vindex(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def dindex(self) -> dict:
        return {e: i for i, e in enumerate(self.dedges)}

    @cached_property
    def arrays(self):
        """``(t, h, iv, out)`` integer lists; ``out[v]`` lists dedges leaving v."""
        vi, di = self.vindex, self.dindex
        t = [vi[self.tail[e]] for e in self.dedges]
        h = [vi[self.head[e]] for e in self.dedges]
        iv = [di[self.inv[e]] for e in self.dedges]
        out = [[] for _ in self.vertices]
        for i, v in enumerate(t):
            out[v].append(i)
        return t, h, iv, out

    @cached_property
    def kinds(self) -> list:
        t, h, iv, _ = self.arrays
        return [HALF if iv[i] == i else (WHOLE if t[i] == h[i] else PLAIN)
                for i in range(len(t))]

    # -- basic counts -----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_dedges(self) -> int:
        return len(self.dedges)

    @cached_property
    def n_edges(self) -> int:
        iv = self.arrays[2]
        return sum(1 for i, j in enumerate(iv) if j >= i)

    def is_half_loop(self, e: str) -> bool:
        return self.inv[e] == e

    def degree(self, v: str) -> int:
        """Number of dedges with tail ``v``: whole-loops count 2, half-loops 1."""
        return len(self.arrays[3][self.vindex[v]])

    @cached_property
    def edge_orbits(self) -> tuple:
        """One representative dedge per ``inv``-orbit (the smaller id)."""
        return tuple(e for e in self.dedges if e <= self.inv[e])

    @cached_property
    def has_half_loops(self) -> bool:
        return any(k == HALF for k in self.kinds)

    # -- structure --------------------------------------------------------

    def subgraph(self, dedges: Iterable[str] = (), vertices: Iterable[str] = ()) -> "Graph":
        """Subgraph spanned by ``dedges`` (closed under inv) plus ``vertices``."""
        ds = set()
        for e in dedges:
            ds.add(e)
            ds.add(self.inv[e])
        vs = set(vertices)
        for e in ds:
            vs.add(self.tail[e])
            vs.add(self.head[e])
        return Graph(vs, ds, self.tail, self.head, self.inv, validate=False)

    def delete_edges(self, dedges: Iterable[str]) -> "Graph":
        drop = set()
        for e in dedges:
            drop.add(e)
            drop.add(self.inv[e])
        keep = [e for e in self.dedges if e not in drop]
        return Graph(self.vertices, keep, self.tail, self.head, self.inv, validate=False)

    def components(self) -> list:
        """Connected components as sorted tuples of vertex ids."""
        t, h, iv, out = self.arrays
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for d in out[v]:
                    w = h[d]
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        queue.append(w)
            comps.append(tuple(sorted(self.vertices[i] for i in comp)))
        return comps

    def component_subgraphs(self) -> list:
        out = []
        for comp in self.components():
            cs = set(comp)
            ds = [e for e in self.dedges if self.tail[e] in cs]
            out.append(Graph(comp, ds, self.tail, self.head, self.inv, validate=False))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def relabel(self, vmap: Mapping[str, str], dmap: Mapping[str, str]) -> "Graph":
        return Graph(
            [vmap[v] for v in self.vertices],
            [dmap[e] for e in self.dedges],
            {dmap[e]: vmap[self.tail[e]] for e in self.dedges},
            {dmap[e]: vmap[self.head[e]] for e in self.dedges},
            {dmap[e]: dmap[self.inv[e]] for e in self.dedges},
            validate=False,
        )

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "dedges": [
                {"id": e, "tail": self.tail[e], "head": self.head[e], "inv": self.inv[e]}
                for e in self.dedges
            ],
        }

    @classmethod
    def from_dict(cls, spec: Mapping) -> "Graph":
        return build_graph(spec)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    # -- dunder -----------------------------------------------------------

    def _key(self):
        return (self.vertices, tuple((e, self.tail[e], self.head[e], self.inv[e]) for e in self.dedges))

    def __eq__(self, other):
        return isinstance(other, Graph) and not isinstance(other, BGraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Graph(|V|={self.n_vertices}, |E|={self.n_edges}, |Edir|={self.n_dedges})"


def build_graph(spec: Mapping) -> Graph:
    """Build and validate a :class:`Graph` from its JSON-style description.

    ``spec`` is ``{"vertices": [...], "dedges": [{"id", "tail", "head", "inv"}, ...]}``.
    """
    try:
        vertices = [str(v) for v in spec["vertices"]]
        records = list(spec["dedges"])
    except (KeyError, TypeError) as exc:
        raise DanglingReference(f"malformed graph description: {exc}") from None
    ids = [str(r["id"]) for r in records]
    if len(set(ids)) != len(ids):
        raise InvalidInvolution("duplicate dedge ids")
    if len(set(vertices)) != len(vertices):
        raise DanglingReference("duplicate vertex ids")
    tail = {str(r["id"]): str(r["tail"]) for r in records}
    head = {str(r["id"]): str(r["head"]) for r in records}
    inv = {str(r["id"]): str(r["inv"]) for r in records}
    return Graph(vertices, ids, tail, head, inv)


# -- B-graphs and ordered graphs ------------------------------------------


class BGraph:
    """A graph together with a morphism to a base graph ``base``."""

    def __init__(self, graph: Graph, base: Graph, vmap: Mapping[str, str],
                 emap: Mapping[str, str], validate=True):
        self.graph = graph
        self.base = base
        self.vmap = {v: vmap[v] for v in graph.vertices}
        self.emap = {e: emap[e] for e in graph.dedges}
        if validate:
            self._validate()

    def _validate(self):
        g, b = self.graph, self.base
        bv, bd = set(b.vertices), set(b.dedges)
        for v, bvx in self.vmap.items():
            if bvx not in bv:
                raise InvalidMorphism(f"vertex {v!r} maps to unknown base vertex {bvx!r}")
        for e, be in self.emap.items():
            if be not in bd:
                raise InvalidMorphism(f"dedge {e!r} maps to unknown base dedge {be!r}")
            if b.tail[be] != self.vmap[g.tail[e]] or b.head[be] != self.vmap[g.head[e]]:
                raise InvalidMorphism(f"dedge {e!r}: structure map does not intertwine tails/heads")
            if self.emap[g.inv[e]] != b.inv[be]:
                raise InvalidMorphism(f"dedge {e!r}: structure map does not respect inv")

    # convenience passthroughs
    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def dedges(self):
        return self.graph.dedges

    def subgraph(self, dedges=(), vertices=()) -> "BGraph":
        sub = self.graph.subgraph(dedges, vertices)
        return BGraph(sub, self.base, self.vmap, self.emap, validate=False)

    def with_graph(self, sub: Graph) -> "BGraph":
        return BGraph(sub, self.base, self.vmap, self.emap, validate=False)

    def relabel(self, vmap, dmap) -> "BGraph":
        return BGraph(
            self.graph.relabel(vmap, dmap), self.base,
            {vmap[v]: self.vmap[v] for v in self.graph.vertices},
            {dmap[e]: self.emap[e] for e in self.graph.dedges},
            validate=False,
        )

    def to_dict(self) -> dict:
        d = self.graph.to_dict()
        d["base"] = self.base.to_dict()
        d["vmap"] = dict(self.vmap)
        d["emap"] = dict(self.emap)
        return d

    @classmethod
    def from_dict(cls, spec: Mapping) -> "BGraph":
        graph = build_graph(spec)
        base = build_graph(spec["base"])
        try:
            vmap = {str(k): str(v) for k, v in spec["vmap"].items()}
            emap = {str(k): str(v) for k, v in spec["emap"].items()}
            return cls(graph, base, vmap, emap)
        except KeyError as exc:
            raise DanglingReference(f"structure map missing entry {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    def _key(self):
        return (self.graph._key(), self.base._key(),
                tuple(sorted(self.vmap.items())), tuple(sorted(self.emap.items())))

    def __eq__(self, other):
        return isinstance(other, BGraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        g = self.graph
        return f"BGraph(|V|={g.n_vertices}, |E|={g.n_edges}, base |E|={self.base.n_edges})"


def identity_bgraph(base: Graph) -> BGraph:
    return BGraph(base, base, {v: v for v in base.vertices}, {e: e for e in base.dedges})


class OrderedGraph:
    """A graph with an orientation and total orders on vertices and edges.

    ``orientation`` lists one dedge per inv-orbit (every half-loop
    included) in edge order; ``vertex_order`` lists all vertices in order.
    """

    def __init__(self, graph: Graph, vertex_order: Sequence[str], orientation: Sequence[str]):
        self.graph = graph
        self.vertex_order = tuple(vertex_order)
        self.orientation = tuple(orientation)
        if sorted(self.vertex_order) != list(graph.vertices):
            raise InvalidMorphism("vertex_order must list every vertex exactly once")
        seen = set()
        for e in self.orientation:
            if e not in graph.tail:
                raise DanglingReference(f"orientation names unknown dedge {e!r}")
            orbit = frozenset((e, graph.inv[e]))
            if orbit in seen:
                raise InvalidMorphism("orientation repeats an edge")
            seen.add(orbit)
        if len(seen) != graph.n_edges:
            raise InvalidMorphism("orientation must contain one dedge of every edge")

    @property
    def edge_order(self):
        return self.orientation

    def encode(self) -> tuple:
        """Label-free encoding; equal encodings iff isomorphic as ordered graphs."""
        g = self.graph
        vpos = {v: i for i, v in enumerate(self.vertex_order)}
        return (
            len(self.vertex_order),
            tuple((vpos[g.tail[e]], vpos[g.head[e]], g.inv[e] == e) for e in self.orientation),
        )

    def isomorphisms_to(self, other: "OrderedGraph") -> list:
        """All ordered-graph isomorphisms (at most one) as ``(vmap, dmap)`` pairs."""
        if self.encode() != other.encode():
            return []
        vmap = dict(zip(self.vertex_order, other.vertex_order))
        dmap = {}
        for e, f in zip(self.orientation, other.orientation):
            dmap[e] = f
            dmap[self.graph.inv[e]] = other.graph.inv[f]
        return [(vmap, dmap)]

    def canonical(self) -> tuple:
        return self.encode()

    def __eq__(self, other):
        return (isinstance(other, OrderedGraph) and self.graph == other.graph
                and self.vertex_order == other.vertex_order and self.orientation == other.orientation)

    def __hash__(self):
        return hash((self.graph, self.vertex_order, self.orientation))

    def __repr__(self):
        return f"OrderedGraph({self.encode()!r})"


# -- constructors ----------------------------------------------------------


def from_edge_list(vertices: Iterable, edges: Iterable = (), half_loops: Iterable = ()) -> Graph:
    """Graph from ``(u, v)`` pairs (whole edges) and half-loop vertices.

    Edge ``i`` becomes dedges ``e{i}+`` (u to v) and ``e{i}-``; half-loop
    ``j`` becomes the self-inverse dedge ``h{j}``.
    """
    vertices = [str(v) for v in vertices]
    tail, head, inv = {}, {}, {}
    for i, (u, v) in enumerate(edges):
        a, b = f"e{i}+", f"e{i}-"
        tail[a], head[a], inv[a] = str(u), str(v), b
        tail[b], head[b], inv[b] = str(v), str(u), a
    for j, v in enumerate(half_loops):
        h = f"h{j}"
        tail[h] = head[h] = str(v)
        inv[h] = h
    return Graph(vertices, list(tail), tail, head, inv)


def cycle_graph(m: int) -> Graph:
    if m == 1:
        return bouquet(1)
    return from_edge_list(range(m), [(i, (i + 1) % m) for i in range(m)])


def path_graph(m: int) -> Graph:
    """Path with ``m`` edges."""
    return from_edge_list(range(m + 1), [(i, i + 1) for i in range(m)])


def bouquet(whole: int, half: int = 0) -> Graph:
    """One vertex carrying ``whole`` whole-loops and ``half`` half-loops."""
    return from_edge_list(["0"], [(0, 0)] * whole, [0] * half)


def complete_graph(n: int) -> Graph:
    return from_edge_list(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def theta_graph(lengths: Sequence[int]) -> Graph:
    """Two branch vertices joined by internally disjoint paths of the given lengths."""
    verts = ["a", "b"]
    edges = []
    for p, ln in enumerate(lengths):
        prev = "a"
        for s in range(1, ln):
            v = f"p{p}_{s}"
            verts.append(v)
            edges.append((prev, v))
            prev = v
        edges.append((prev, "b"))
    return from_edge_list(verts, edges)


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    a = g1.relabel({v: f"0:{v}" for v in g1.vertices}, {e: f"0:{e}" for e in g1.dedges})
    b = g2.relabel({v: f"1:{v}" for v in g2.vertices}, {e: f"1:{e}" for e in g2.dedges})
    tail = {**a.tail, **b.tail}
    head = {**a.head, **b.head}
    inv = {**a.inv, **b.inv}
    return Graph(a.vertices + b.vertices, a.dedges + b.dedges, tail, head, inv, validate=False)


# -- order, Euler characteristic, pruning ---------------------------------


def _as_graph(g) -> Graph:
    if isinstance(g, BGraph):
        return g.graph
    if isinstance(g, OrderedGraph):
        return g.graph
    return g


def order(g) -> int:
    """``#E - #V``; half-loops and whole-loops each count as one edge."""
    g = _as_graph(g)
    return g.n_edges - g.n_vertices


def euler_char(g) -> Fraction:
    """``#V - #Edir/2`` as an exact rational."""
    g = _as_graph(g)
    return Fraction(g.n_vertices) - Fraction(g.n_dedges, 2)


def _pruned_dedges(g: Graph):
    t, h, iv, out = g.arrays
    deg = [len(o) for o in out]
    alive_v = [True] * g.n_vertices
    alive_d = [True] * g.n_dedges
    stack = [v for v in range(g.n_vertices) if deg[v] < 2]
    while stack:
        v = stack.pop()
        if not alive_v[v]:
            continue
        alive_v[v] = False
        for d in out[v]:
            if not alive_d[d]:
                continue
            r = iv[d]
            alive_d[d] = False
            alive_d[r] = False
            w = h[d]
            if w != v:
                deg[w] -= 1
                if alive_v[w] and deg[w] < 2:
                    stack.append(w)
    return alive_v, alive_d


def prune(g):
    """Maximal subgraph with every vertex of degree at least two.

    Works on :class:`Graph` and :class:`BGraph` (the structure map is
    restricted).
    """
    gr = _as_graph(g)
    alive_v, alive_d = _pruned_dedges(gr)
    vs = [v for v, a in zip(gr.vertices, alive_v) if a]
    ds = [e for e, a in zip(gr.dedges, alive_d) if a]
    sub = Graph(vs, ds, gr.tail, gr.head, gr.inv, validate=False)
    if isinstance(g, BGraph):
        return g.with_graph(sub)
    return sub


def is_pruned(g) -> bool:
    gr = _as_graph(g)
    return all(len(o) >= 2 for o in gr.arrays[3])


def is_positive(g) -> bool:
    """Pruned, and every connected component has positive order."""
    gr = _as_graph(g)
    if not is_pruned(gr):
        return False
    return all(order(c) >= 1 for c in gr.component_subgraphs())


def fibre_counts(s: BGraph):
    """Fibre sizes ``(a, b)``: ``a[e]`` over base dedges, ``b[v]`` over base vertices."""
    a = {e: 0 for e in s.base.dedges}
    b = {v: 0 for v in s.base.vertices}
    for e in s.graph.dedges:
        a[s.emap[e]] += 1
    for v in s.graph.vertices:
        b[s.vmap[v]] += 1
    return a, b


# -- canonical labelling ----------------------------------------------------


def _labels(x):
    g = _as_graph(x)
    if isinstance(x, BGraph):
        vl = [x.vmap[v] for v in g.vertices]
        dl = [x.emap[e] for e in g.dedges]
    else:
        vl = [""] * g.n_vertices
        dl = [""] * g.n_dedges
    return g, vl, dl


def _refine(colors, t, h, iv, out, nv):
    """Equitable-style refinement; colour ids stay consistent with old ones."""
    n_old = len(set(colors))
    while True:
        sigs = []
        for v in range(nv):
            sigs.append((colors[v], tuple(sorted(colors[nv + d] for d in out[v]))))
        for d in range(len(t)):
            sigs.append((colors[nv + d], (colors[t[d]], colors[h[d]], colors[nv + iv[d]])))
        rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [rank[s] for s in sigs]
        n_new = len(rank)
        colors = new
        if n_new == n_old:
            return colors
        n_old = n_new


def _canonical_search(x):
    g, vl, dl = _labels(x)
    t, h, iv, out = g.arrays
    nv, nd = g.n_vertices, g.n_dedges
    kinds = g.kinds
    keys = [(0, vl[v]) for v in range(nv)] + [(1, dl[d], kinds[d]) for d in range(nd)]
    rank = {k: i for i, k in enumerate(sorted(set(keys)))}
    colors = _refine([rank[k] for k in keys], t, h, iv, out, nv)

    n_el = nv + nd
    first, best = {}, {}
    autos = []  # automorphisms found so far, as element permutations

    def leaf(cols):
        vorder = sorted(range(nv), key=lambda v: cols[v])
        dorder = sorted(range(nd), key=lambda d: cols[nv + d])
        vpos = {v: i for i, v in enumerate(vorder)}
        dpos = {d: i for i, d in enumerate(dorder)}
        enc = (
            tuple(vl[v] for v in vorder),
            tuple((vpos[t[d]], vpos[h[d]], dpos[iv[d]], dl[d]) for d in dorder),
        )
        return enc, vorder, dorder, vorder + [nv + d for d in dorder]

    def common(a, b):
        i = 0
        while i < min(len(a), len(b)) and a[i] == b[i]:
            i += 1
        return i

    def orbit_rep(path):
        parent = list(range(n_el))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for gam in autos:
            if all(gam[p] == p for p in path):
                for a in range(n_el):
                    ra, rb = find(a), find(gam[a])
                    if ra != rb:
                        parent[ra] = rb
        return find

    def search(cols, path):
        """Returns a depth to jump back to once an equivalent subtree was seen."""
        counts = {}
        for c in cols:
            counts[c] = counts.get(c, 0) + 1
        target = None
        for c in sorted(counts):
            if counts[c] > 1:
                target = c
                break
        if target is None:
            enc, vorder, dorder, elems = leaf(cols)
            if not first:
                first.update(enc=enc, elems=elems, path=path)
                best.update(enc=enc, order=(vorder, dorder), elems=elems, path=path)
                return None
            for ref in (first, best):
                if enc == ref["enc"]:
                    gam = [0] * n_el
                    for a, b in zip(ref["elems"], elems):
                        gam[a] = b
                    autos.append(gam)
                    return common(path, ref["path"])
            if enc < best["enc"]:
                best.update(enc=enc, order=(vorder, dorder), elems=elems, path=path)
            return None
        members = [i for i, c in enumerate(cols) if c == target]
        tried = []
        for m in members:
            if tried:
                find = orbit_rep(path)
                if any(find(m) == find(o) for o in tried):
                    continue
            tried.append(m)
            new = [2 * c for c in cols]
            new[m] = 2 * target - 1
            jump = search(_refine(new, t, h, iv, out, nv), path + [m])
            if jump is not None and jump < len(path):
                return jump
        return None

    search(colors, [])
    return (nv, nd) + best["enc"], best["order"]


def canonical_form(x) -> tuple:
    """Canonical label: equal iff isomorphic (as graphs, or as B-graphs).

    For an :class:`OrderedGraph` the label is its order-respecting encoding.
    """
    if isinstance(x, OrderedGraph):
        return ("ordered",) + x.encode()
    tag = "bgraph" if isinstance(x, BGraph) else "graph"
    label, _ = _canonical_search(x)
    if isinstance(x, BGraph):
        return (tag, x.base._key()) + label
    return (tag,) + label


def canonical_hash(x) -> str:
    """Short stable hex digest of :func:`canonical_form`."""
    return hashlib.sha256(repr(canonical_form(x)).encode()).hexdigest()[:16]


def canonical_relabel(x):
    """Isomorphic copy with vertices ``v0..`` and dedges ``d0..`` in canonical order."""
    _, (vorder, dorder) = _canonical_search(x)
    g = _as_graph(x)
    vmap = {g.vertices[v]: f"v{i}" for i, v in enumerate(vorder)}
    dmap = {g.dedges[d]: f"d{i}" for i, d in enumerate(dorder)}
    return x.relabel(vmap, dmap)


# -- injective morphisms ------------------------------------------------------


def _search_plan(g: Graph, first=None):
    """Order pattern edge-orbits so each one touches an earlier vertex.

    Returns a list of dedge indices (each oriented so that its tail is
    already placed, except the first of each component) and the isolated
    vertices.
    """
    t, h, iv, out = g.arrays
    nv = g.n_vertices
    placed = [False] * nv
    done = [False] * g.n_dedges
    plan = []
    starts = list(range(nv))
    if first is not None:
        starts = [t[first]] + [v for v in starts if v != t[first]]
    else:
        starts.sort(key=lambda v: -len(out[v]))
    isolated = []
    for s in starts:
        if placed[s]:
            continue
        placed[s] = True
        if not out[s]:
            isolated.append(s)
            continue
        queue = deque([s])
        first_here = first if (first is not None and t[first] == s) else None
        while queue:
            v = queue.popleft()
            order_ds = sorted(out[v], key=lambda d: (d != first_here,))
            for d in order_ds:
                if done[d]:
                    continue
                done[d] = done[iv[d]] = True
                plan.append(d)
                w = h[d]
                if not placed[w]:
                    placed[w] = True
                    queue.append(w)
    return plan, isolated


def _falling(n, k):
    r = 1
    for i in range(k):
        r *= n - i
    return r


def _check_same_base(s, g):
    if isinstance(s, BGraph) != isinstance(g, BGraph):
        raise TypeError("injections need both arguments to be Graphs or both BGraphs")
    if isinstance(s, BGraph) and s.base._key() != g.base._key():
        raise InvalidMorphism("B-graphs over different bases")


def _injection_search(s, g, count_only, first=None, first_candidates=None):
    _check_same_base(s, g)
    sg, svl, sdl = _labels(s)
    gg, gvl, gdl = _labels(g)
    st, sh, siv, _ = sg.arrays
    gt, gh, giv, gout = gg.arrays
    skind, gkind = sg.kinds, gg.kinds
    if sg.n_vertices > gg.n_vertices or sg.n_dedges > gg.n_dedges:
        return 0 if count_only else iter(())
    plan, isolated = _search_plan(sg, first)
    by_label = {}
    for d in range(gg.n_dedges):
        by_label.setdefault((gdl[d], gkind[d]), []).append(d)
    vmap = [-1] * sg.n_vertices
    used_v = [False] * gg.n_vertices
    used_d = [False] * gg.n_dedges
    dmap = [-1] * sg.n_dedges
    iso_labels = {}
    for v in isolated:
        iso_labels.setdefault(svl[v], []).append(v)

    def candidates(i):
        d = plan[i]
        u = vmap[st[d]]
        key = (sdl[d], skind[d])
        if u >= 0:
            pool = [f for f in gout[u] if gdl[f] == sdl[d] and gkind[f] == skind[d]]
        elif i == 0 and first_candidates is not None:
            pool = [f for f in first_candidates if gdl[f] == sdl[d] and gkind[f] == skind[d]]
        else:
            pool = by_label.get(key, ())
        w = vmap[sh[d]]
        res = []
        for f in pool:
            if used_d[f] or used_d[giv[f]]:
                continue
            if u < 0:
                if used_v[gt[f]] or gvl[gt[f]] != svl[st[d]]:
                    continue
            if w >= 0:
                if gh[f] != w:
                    continue
            elif st[d] != sh[d]:
                if used_v[gh[f]] or gh[f] == gt[f] or gvl[gh[f]] != svl[sh[d]]:
                    continue
            res.append(f)
        return res

    def assign(d, f):
        newly = []
        for sv, gv in ((st[d], gt[f]), (sh[d], gh[f])):
            if vmap[sv] < 0:
                vmap[sv] = gv
                used_v[gv] = True
                newly.append(sv)
        dmap[d] = f
        dmap[siv[d]] = giv[f]
        used_d[f] = used_d[giv[f]] = True
        return newly

    def unassign(d, f, newly):
        for sv in newly:
            used_v[vmap[sv]] = False
            vmap[sv] = -1
        dmap[d] = dmap[siv[d]] = -1
        used_d[f] = used_d[giv[f]] = False

    def iso_count():
        total = 1
        for lab, vs in iso_labels.items():
            free = sum(1 for v in range(gg.n_vertices) if not used_v[v] and gvl[v] == lab)
            total *= _falling(free, len(vs))
            if total == 0:
                break
        return total

    if count_only:
        def rec(i):
            if i == len(plan):
                return iso_count()
            d = plan[i]
            total = 0
            for f in candidates(i):
                newly = assign(d, f)
                total += rec(i + 1)
                unassign(d, f, newly)
            return total
        return rec(0)

    def gen_iso(j):
        if j == len(isolated):
            yield (
                {sg.vertices[v]: gg.vertices[vmap[v]] for v in range(sg.n_vertices)},
                {sg.dedges[d]: gg.dedges[dmap[d]] for d in range(sg.n_dedges)},
            )
            return
        v = isolated[j]
        for x in range(gg.n_vertices):
            if not used_v[x] and gvl[x] == svl[v]:
                vmap[v] = x
                used_v[x] = True
                yield from gen_iso(j + 1)
                used_v[x] = False
                vmap[v] = -1

    def gen(i):
        if i == len(plan):
            yield from gen_iso(0)
            return
        d = plan[i]
        for f in candidates(i):
            newly = assign(d, f)
            yield from gen(i + 1)
            unassign(d, f, newly)

    return gen(0)


def iter_injections(s, g, first: str | None = None, first_candidates: Iterable[str] | None = None) -> Iterator:
    """Yield every injective morphism ``s -> g`` as ``(vertex_map, dedge_map)``.

    Both arguments are :class:`Graph` or both :class:`BGraph` over the same
    base (then the maps respect the structure maps).  ``first`` may name a
    pattern dedge whose image is restricted to ``first_candidates``.
    """
    sg, gg = _as_graph(s), _as_graph(g)
    fi = sg.dindex[first] if first is not None else None
    fc = None
    if first_candidates is not None:
        fc = sorted(gg.dindex[e] for e in first_candidates)
    return _injection_search(s, g, False, fi, fc)


def count_injections(s, g) -> int:
    """Number of injective morphisms ``s -> g`` (``1`` when ``s`` is empty)."""
    return _injection_search(s, g, True)


def aut_count(s) -> int:
    """``#Aut(s)``, i.e. ``count_injections(s, s)``."""
    return count_injections(s, s)
