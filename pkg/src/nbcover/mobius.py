"""Derived B-graph classes, their Moebius function, and truncated indicators.

For a set of generator B-graphs ``psi`` the derived classes are the
isomorphism classes of unions of embedded generator copies.  Keeping
those of order ``< r`` gives a finite poset under injection; its Moebius
function ``mu`` satisfies ``sum_{S <= T} N(S, T) mu[S] = 1`` for every ``T``,
and ``I_r(psi, G) = sum_S N(S, G) mu[S]`` is the truncated indicator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import GeneratorNotPositive
from .graph import (
    BGraph,
    Graph,
    canonical_form,
    canonical_hash,
    canonical_relabel,
    count_injections,
    is_positive,
    iter_injections,
    order,
)

__all__ = [
    "IsoClassTable",
    "b_structures",
    "as_generators",
    "amalgams",
    "derived_classes",
    "mobius_function",
    "psi_image",
    "meets",
    "truncated_indicator",
    "indicator_bound",
]


def _size(s: BGraph) -> int:
    return s.graph.n_vertices + s.graph.n_dedges


def b_structures(s: Graph, base: Graph) -> list:
    """Every B-structure on ``s`` (morphisms ``s -> base``), one per isomorphism class."""
    t, h, iv, out = s.arrays
    bt, bh, biv, _ = base.arrays
    vmap = [-1] * s.n_vertices
    dmap = [-1] * s.n_dedges
    orbits = [d for d in range(s.n_dedges) if iv[d] >= d]
    found = {}

    def rec(i):
        if i == len(orbits):
            free = [v for v in range(s.n_vertices) if vmap[v] < 0]
            for choice in itertools.product(range(base.n_vertices), repeat=len(free)):
                vm = list(vmap)
                for v, c in zip(free, choice):
                    vm[v] = c
                bg = BGraph(s, base,
                            {s.vertices[v]: base.vertices[vm[v]] for v in range(s.n_vertices)},
                            {s.dedges[d]: base.dedges[dmap[d]] for d in range(s.n_dedges)},
                            validate=False)
                cf = canonical_form(bg)
                if cf not in found:
                    found[cf] = bg
            return
        d = orbits[i]
        for b in range(base.n_dedges):
            if iv[d] == d and biv[b] != b:
                continue
            saved = (vmap[t[d]], vmap[h[d]])
            if vmap[t[d]] >= 0 and vmap[t[d]] != bt[b]:
                continue
            if vmap[h[d]] >= 0 and vmap[h[d]] != bh[b]:
                continue
            if t[d] == h[d] and bt[b] != bh[b]:
                continue
            vmap[t[d]] = bt[b]
            vmap[h[d]] = bh[b]
            dmap[d], dmap[iv[d]] = b, biv[b]
            rec(i + 1)
            dmap[d] = dmap[iv[d]] = -1
            vmap[t[d]], vmap[h[d]] = saved

    rec(0)
    return [found[k] for k in sorted(found)]


def as_generators(psi: Iterable, base: Graph | None = None) -> list:
    """Normalize generators to canonical BGraphs; plain graphs get all B-structures."""
    out = {}
    for p in psi:
        if isinstance(p, BGraph):
            items = [p]
        else:
            if base is None:
                raise ValueError("plain graph generators need a base graph")
            items = b_structures(p, base)
        for q in items:
            if q.graph.n_edges == 0 or not is_positive(q.graph):
                raise GeneratorNotPositive("generators must be nonempty, pruned, and of positive order")
            cf = canonical_form(q)
            if cf not in out:
                out[cf] = canonical_relabel(q)
    return [out[k] for k in sorted(out)]


def _subgraphs(psi: BGraph):
    """Every subgraph of ``psi`` (closed under inv, endpoints included)."""
    g = psi.graph
    orbits = list(g.edge_orbits)
    for mask in range(1 << len(orbits)):
        ds = [orbits[i] for i in range(len(orbits)) if mask >> i & 1]
        ends = set()
        for e in ds:
            ends.add(g.tail[e])
            ends.add(g.head[e])
        rest = [v for v in g.vertices if v not in ends]
        for vm in range(1 << len(rest)):
            extra = [rest[i] for i in range(len(rest)) if vm >> i & 1]
            yield psi.subgraph(ds, list(ends) + extra)


def _glue(x: BGraph, psi: BGraph, part: BGraph, vphi: dict, dphi: dict) -> BGraph:
    xg, pg = x.graph, psi.graph
    pv, pd = set(part.graph.vertices), set(part.graph.dedges)

    def v_new(v):
        return vphi[v] if v in pv else f"g:{v}"

    def d_new(e):
        return dphi[e] if e in pd else f"g:{e}"

    verts = list(xg.vertices) + [f"g:{v}" for v in pg.vertices if v not in pv]
    tail, head, inv = dict(xg.tail), dict(xg.head), dict(xg.inv)
    vmap, emap = dict(x.vmap), dict(x.emap)
    for v in pg.vertices:
        if v not in pv:
            vmap[f"g:{v}"] = psi.vmap[v]
    for e in pg.dedges:
        if e in pd:
            continue
        ne = f"g:{e}"
        tail[ne] = v_new(pg.tail[e])
        head[ne] = v_new(pg.head[e])
        inv[ne] = d_new(pg.inv[e])
        emap[ne] = psi.emap[e]
    g = Graph(verts, list(tail), tail, head, inv, validate=False)
    return BGraph(g, x.base, vmap, emap, validate=False)


def amalgams(x: BGraph, psi: BGraph):
    """All B-graphs ``x ∪ psi'`` for copies ``psi'`` glued to ``x`` along a common subgraph."""
    for part in _subgraphs(psi):
        if part.graph.n_dedges == psi.graph.n_dedges and part.graph.n_vertices == psi.graph.n_vertices:
            continue  # psi' inside x adds nothing
        for vphi, dphi in iter_injections(part, x):
            yield _glue(x, psi, part, vphi, dphi)


@dataclass
class IsoClassTable:
    """Classes of the derived poset with injection counts and Moebius values."""

    generators: list
    r: int
    classes: dict = field(default_factory=dict)        # label -> BGraph
    injection_counts: dict = field(default_factory=dict)  # (label, label) -> int
    mobius: dict = field(default_factory=dict)          # label -> Fraction

    @property
    def labels(self) -> list:
        """Labels sorted by size (vertices plus dedges), then label."""
        return sorted(self.classes, key=lambda k: (_size(self.classes[k]), k))

    def n(self, s, t) -> int:
        return self.injection_counts.get((s, t), 0)

    def leq(self, s, t) -> bool:
        return self.n(s, t) > 0

    def check_identity(self) -> bool:
        """``sum_{S <= T} N(S,T) mu[S] == 1`` exactly for every class ``T``."""
        for t in self.classes:
            total = sum((self.n(s, t) * self.mobius[s] for s in self.classes), Fraction(0))
            if total != 1:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "classes": [
                {
                    "label": canonical_hash(self.classes[k]),
                    "graph": self.classes[k].to_dict(),
                    "order": order(self.classes[k]),
                    "mobius": [self.mobius[k].numerator, self.mobius[k].denominator],
                }
                for k in self.labels
            ],
        }


def _fill_counts(table: IsoClassTable) -> None:
    labels = table.labels
    for i, s in enumerate(labels):
        for t in labels[i:]:
            c = count_injections(table.classes[s], table.classes[t])
            if c:
                table.injection_counts[(s, t)] = c
    for s in labels:
        for t in labels:
            if s != t and table.n(s, t) and table.n(t, s):
                raise AssertionError("injection order is not antisymmetric")


def derived_classes(psi: Iterable, r: int, base: Graph | None = None) -> IsoClassTable:
    """Classes of unions of generator copies with order ``< r``, with Moebius values."""
    gens = as_generators(psi, base)
    table = IsoClassTable(gens, int(r))
    frontier = []
    for g in gens:
        if order(g) < r:
            cf = canonical_form(g)
            if cf not in table.classes:
                table.classes[cf] = g
                frontier.append(g)
    while frontier:
        x = frontier.pop()
        for g in gens:
            for y in amalgams(x, g):
                if order(y) >= r:
                    continue
                cf = canonical_form(y)
                if cf not in table.classes:
                    rep = canonical_relabel(y)
                    table.classes[cf] = rep
                    frontier.append(rep)
    _fill_counts(table)
    table.mobius = mobius_function(table)
    return table


def mobius_function(table: IsoClassTable) -> dict:
    """``mu[T] = (1 - sum_{S < T} N(S,T) mu[S]) / N(T,T)`` by increasing size."""
    mu = {}
    for t in table.labels:
        acc = Fraction(1)
        for s in mu:
            n = table.n(s, t)
            if n:
                acc -= n * mu[s]
        mu[t] = acc / table.n(t, t)
    return mu


def psi_image(g: BGraph, psi: Sequence) -> tuple:
    """Union of all embedded generator copies in ``g``, and its order."""
    gens = psi.generators if isinstance(psi, IsoClassTable) else list(psi)
    ds, vs = set(), set()
    for p in gens:
        for vphi, dphi in iter_injections(p, g):
            ds.update(dphi.values())
            vs.update(vphi.values())
    image = g.subgraph(ds, vs)
    return image, order(image)


def meets(g: BGraph, psi: Sequence) -> bool:
    gens = psi.generators if isinstance(psi, IsoClassTable) else list(psi)
    return any(next(iter_injections(p, g), None) is not None for p in gens)


def truncated_indicator(g: BGraph, psi, r: int | None = None, table: IsoClassTable | None = None) -> Fraction:
    """``I_r(psi, g) = sum_S N(S, g) mu[S]`` over derived classes of order ``< r``."""
    if table is None:
        if isinstance(psi, IsoClassTable):
            table = psi
        else:
            table = derived_classes(psi, r, getattr(g, "base", None))
    total = Fraction(0)
    for label, s in table.classes.items():
        n = count_injections(s, g)
        if n:
            total += n * table.mobius[label]
    return total


def indicator_bound(g: BGraph, psi, r: int, s: int | None = None) -> tuple:
    """``(I_r, bound)`` where ``bound = C * sum_{psi'} #([psi'] in g)``.

    ``psi'`` ranges over derived classes of order in ``[r, r+s)`` and
    ``C = max_{psi'} sum_S |mu[S]| N(S, psi')``; ``s`` defaults to the
    largest generator edge count.
    """
    gens = as_generators(psi, getattr(g, "base", None))
    if s is None:
        s = max(p.graph.n_edges for p in gens)
    low = derived_classes(gens, r)
    high = derived_classes(gens, r + s)
    extra = [high.classes[k] for k in high.labels if k not in low.classes]
    c = Fraction(0)
    for big in extra:
        val = sum((abs(low.mobius[k]) * count_injections(low.classes[k], big) for k in low.classes),
                  Fraction(0))
        c = max(c, val)
    copies = sum((Fraction(count_injections(big, g), count_injections(big, big)) for big in extra),
                 Fraction(0))
    return truncated_indicator(g, gens, table=low), c * copies
