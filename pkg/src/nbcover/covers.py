"""Random coordinatized covers of a base graph.

A degree-``n`` cover is encoded by a permutation ``sigma(e)`` of
``range(n)`` for each base dedge ``e`` in the orientation (the smaller id
of every inv-orbit).  The reverse dedge carries the inverse permutation;
for a half-loop ``sigma(e)`` is an involution.

Randomness comes from numpy's counter-based Philox generator.  Every
base edge gets its own stream ``SeedSequence(seed, spawn_key=stream + (edge,))``
so draws are independent per edge and reproducible in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import HalfLoopUnsupported, ParityMismatch
from .graph import BGraph, Graph, _as_graph

__all__ = [
    "MODEL_KINDS",
    "CoverModel",
    "CoverSample",
    "edge_rng",
    "sample_cover",
    "realize",
    "validate_cover",
    "check_sample",
    "is_single_cycle",
    "cycle_type",
]

MODEL_KINDS = (
    "permutation",
    "cyclic",
    "permutation-involution-even",
    "permutation-involution-odd",
    "cyclic-involution-even",
    "cyclic-involution-odd",
)


@dataclass(frozen=True)
class CoverModel:
    kind: str = "permutation"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")

    @property
    def cyclic(self) -> bool:
        return self.kind.startswith("cyclic")

    @property
    def involution(self) -> bool:
        return "involution" in self.kind

    @property
    def parity(self) -> int | None:
        if self.kind.endswith("-even"):
            return 0
        if self.kind.endswith("-odd"):
            return 1
        return None

    def admits(self, n: int) -> bool:
        return n >= 1 and (self.parity is None or n % 2 == self.parity)

    def check(self, base: Graph, n: int) -> None:
        base = _as_graph(base)
        if base.has_half_loops and not self.involution:
            raise HalfLoopUnsupported(f"model {self.kind!r} cannot cover a base with half-loops")
        if n < 1:
            raise ParityMismatch("degree must be >= 1")
        if not self.admits(n):
            raise ParityMismatch(f"model {self.kind!r} does not admit degree {n}")

    @classmethod
    def coerce(cls, model) -> "CoverModel":
        if isinstance(model, CoverModel):
            return model
        if isinstance(model, Mapping):
            return cls(model["kind"])
        return cls(str(model))


@dataclass
class CoverSample:
    base: Graph
    n: int
    sigma: dict  # oriented base dedge -> permutation array
    model: CoverModel

    def perm(self, e: str) -> np.ndarray:
        """``sigma(e)`` for any base dedge (inverse on reverse orientations)."""
        if e in self.sigma:
            return self.sigma[e]
        p = self.sigma[self.base.inv[e]]
        inv = np.empty_like(p)
        inv[p] = np.arange(len(p))
        return inv

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "n": self.n,
            "kind": self.model.kind,
            "sigma": {e: [int(x) for x in p] for e, p in sorted(self.sigma.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CoverSample":
        from .graph import build_graph

        base = build_graph(d["base"])
        sigma = {e: np.asarray(p, dtype=np.int64) for e, p in d["sigma"].items()}
        return cls(base, int(d["n"]), sigma, CoverModel(d.get("kind", "permutation")))


def edge_rng(seed: int, stream: tuple, edge: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream) + (int(edge),))
    return np.random.Generator(np.random.Philox(ss))


def _uniform_cycle(rng, n):
    # random cycle notation: a uniform ordering read as one n-cycle
    order = rng.permutation(n)
    p = np.empty(n, dtype=np.int64)
    p[order] = np.roll(order, -1)
    return p


def _matching(rng, n):
    order = rng.permutation(n)
    p = np.arange(n, dtype=np.int64)
    a, b = order[0:n - 1:2], order[1:n:2]
    m = min(len(a), len(b))
    p[a[:m]] = b[:m]
    p[b[:m]] = a[:m]
    return p


def sample_cover(base: Graph, n: int, model="permutation", seed: int = 0,
                 stream: tuple = ()) -> CoverSample:
    """Draw ``sigma`` for every oriented base edge from the model's law.

    ``stream`` extends the seed's spawn key, which lets callers draw many
    independent samples (e.g. ``stream=(n, i)`` for the i-th sample).
    """
    base = _as_graph(base)
    model = CoverModel.coerce(model)
    model.check(base, n)
    kinds = base.kinds
    sigma = {}
    for idx, e in enumerate(base.edge_orbits):
        rng = edge_rng(seed, stream, idx)
        kind = kinds[base.dindex[e]]
        if kind == 0:
            sigma[e] = _matching(rng, n)
        elif kind == 1 and model.cyclic:
            sigma[e] = _uniform_cycle(rng, n)
        else:
            sigma[e] = rng.permutation(n).astype(np.int64)
    return CoverSample(base, n, sigma, model)


def realize(c: CoverSample) -> BGraph:
    """The cover as a B-graph on vertices ``"v:i"`` and dedges ``"e:i"``."""
    base, n = c.base, c.n
    perms = {e: c.perm(e) for e in base.dedges}
    verts = [f"{v}:{i}" for v in base.vertices for i in range(n)]
    tail, head, inv = {}, {}, {}
    vmap, emap = {}, {}
    for e in base.dedges:
        p = perms[e]
        te, he, ie = base.tail[e], base.head[e], base.inv[e]
        for i in range(n):
            d = f"{e}:{i}"
            j = int(p[i])
            tail[d] = f"{te}:{i}"
            head[d] = f"{he}:{j}"
            inv[d] = f"{ie}:{j}"
            emap[d] = e
    for v in base.vertices:
        for i in range(n):
            vmap[f"{v}:{i}"] = v
    g = Graph(verts, list(tail), tail, head, inv, validate=False)
    return BGraph(g, base, vmap, emap, validate=False)


def validate_cover(g: BGraph) -> bool:
    """True iff the structure map is a covering map of some degree ``n >= 1``."""
    gr, base = g.graph, g.base
    fib_v = {}
    for v in gr.vertices:
        fib_v[g.vmap[v]] = fib_v.get(g.vmap[v], 0) + 1
    fib_e = {}
    for e in gr.dedges:
        fib_e[g.emap[e]] = fib_e.get(g.emap[e], 0) + 1
    sizes = {fib_v.get(v, 0) for v in base.vertices} | {fib_e.get(e, 0) for e in base.dedges}
    if len(sizes) != 1 or sizes == {0}:
        return False
    # local bijectivity on tails and heads
    out_seen, in_seen = set(), set()
    for e in gr.dedges:
        be = g.emap[e]
        kt = (gr.tail[e], be)
        kh = (gr.head[e], be)
        if kt in out_seen or kh in in_seen:
            return False
        out_seen.add(kt)
        in_seen.add(kh)
    for v in gr.vertices:
        bv = g.vmap[v]
        for be in base.dedges:
            if base.tail[be] == bv and (v, be) not in out_seen:
                return False
            if base.head[be] == bv and (v, be) not in in_seen:
                return False
    return True


def cycle_type(p: np.ndarray) -> list:
    """Sorted cycle lengths of a permutation array."""
    n = len(p)
    seen = np.zeros(n, dtype=bool)
    out = []
    for s in range(n):
        if seen[s]:
            continue
        ln = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = int(p[x])
            ln += 1
        out.append(ln)
    return sorted(out)


def is_single_cycle(p: np.ndarray) -> bool:
    return cycle_type(p) == [len(p)]


def check_sample(c: CoverSample) -> bool:
    """Structural checks on ``sigma`` for the sample's model."""
    base, n = c.base, c.n
    ident = np.arange(n)
    kinds = base.kinds
    for e in base.edge_orbits:
        p = c.sigma[e]
        if p.shape != (n,) or not np.array_equal(np.sort(p), ident):
            return False
        q = c.perm(base.inv[e])
        if not np.array_equal(q[p], ident):
            return False
        kind = kinds[base.dindex[e]]
        if kind == 0:
            if not np.array_equal(p[p], ident):
                return False
            if int(np.sum(p == ident)) != n % 2:
                return False
        elif kind == 1 and c.model.cyclic and not is_single_cycle(p):
            return False
    return True
