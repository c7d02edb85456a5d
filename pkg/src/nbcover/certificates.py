"""Certificates for length vectors and certified traces.

For an ordered type ``T`` and threshold ``nu`` the set
``U = {k : mu1(VLG(T, k)) < nu}`` (``<= nu`` when ``strict=False``) is an
upper set of length vectors.  Its minimal elements are the certificates.
Half-loops always have length 1, so their coordinates are fixed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import CapUnverified
from .graph import Graph, OrderedGraph, _as_graph
from .spectral import compare_mu1, compare_shannon, mu1, shannon_mu1
from .walks import (
    LengthedType,
    build_vlg,
    count_snbc_by_type,
    snbc_by_visited_edges,
    snbc_type_table,
    type_from_key,
    type_order,
)

__all__ = [
    "CertificateSet",
    "as_ordered",
    "in_upper_set",
    "minimal_certificates",
    "certificates_within",
    "cert_trace_direct",
    "cert_trace_incl_excl",
]

FALLBACK_BAND = 1e-6


def as_ordered(t) -> OrderedGraph:
    """Accept an OrderedGraph, LengthedType, type key, or plain Graph."""
    if isinstance(t, OrderedGraph):
        return t
    if isinstance(t, LengthedType):
        return t.otype
    if isinstance(t, Graph):
        return OrderedGraph(t, t.vertices, t.edge_orbits)
    return type_from_key(tuple(t))


@dataclass
class CertificateSet:
    type_key: tuple
    nu: float
    strict: bool
    minima: tuple
    cap_used: int
    verified: bool

    def contains(self, k: Sequence[int]) -> bool:
        """Membership in U as witnessed by the certificates."""
        return any(all(a >= b for a, b in zip(k, xi)) for xi in self.minima)

    def to_dict(self) -> dict:
        nv, edges = self.type_key
        return {
            "type": {"n_vertices": nv, "edges": [list(e) for e in edges]},
            "nu": self.nu,
            "strict": self.strict,
            "minima": [list(x) for x in self.minima],
            "cap_used": self.cap_used,
            "verified": self.verified,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CertificateSet":
        key = (int(d["type"]["n_vertices"]),
               tuple((int(a), int(b), bool(h)) for a, b, h in d["type"]["edges"]))
        return cls(key, float(d["nu"]), bool(d["strict"]),
                   tuple(tuple(int(x) for x in m) for m in d["minima"]),
                   int(d["cap_used"]), bool(d["verified"]))


class _Oracle:
    """Memoized sign of ``mu1(VLG(T, k)) - nu`` for one type."""

    def __init__(self, otype: OrderedGraph, nu: float):
        self.otype = otype
        self.nu = nu
        self.g = otype.graph
        self.half = tuple(self.g.inv[e] == e for e in otype.orientation)
        self.free = tuple(i for i, h in enumerate(self.half) if not h)
        self.cache = {}
        self.limit_cache = {}

    def full(self, free_vec) -> tuple:
        vec = [1] * len(self.half)
        for i, x in zip(self.free, free_vec):
            vec[i] = int(x)
        return tuple(vec)

    def sign(self, vec: tuple) -> int:
        s = self.cache.get(vec)
        if s is None:
            lengths = dict(zip(self.otype.orientation, vec))
            val = shannon_mu1(self.otype, lengths)
            if abs(val - self.nu) < FALLBACK_BAND:
                s = compare_mu1(build_vlg(LengthedType(self.otype, lengths)), self.nu)
            else:
                s = 1 if val > self.nu else -1
            self.cache[vec] = s
        return s

    def member(self, vec: tuple, strict: bool) -> bool:
        s = self.sign(vec)
        return s < 0 if strict else s <= 0

    def limit_sign(self, dropped: frozenset, vec: tuple) -> int:
        """Sign for the graph with the ``dropped`` coordinates deleted."""
        kept = tuple(x for i, x in enumerate(vec) if i not in dropped)
        key = (dropped, kept)
        s = self.limit_cache.get(key)
        if s is None:
            drop = [self.otype.orientation[i] for i in dropped]
            sub = self.g.delete_edges(drop)
            lengths = {e: x for i, (e, x) in enumerate(zip(self.otype.orientation, vec))
                       if i not in dropped}
            s = compare_shannon(sub, self.nu, lengths)
            self.limit_cache[key] = s
        return s


_ORACLES: dict = {}


def _oracle(otype: OrderedGraph, nu: float) -> _Oracle:
    key = (otype.encode(), float(nu))
    orc = _ORACLES.get(key)
    if orc is None:
        if len(_ORACLES) > 4096:
            _ORACLES.clear()
        orc = _ORACLES[key] = _Oracle(otype, nu)
    return orc


def _vec(otype: OrderedGraph, k) -> tuple:
    if isinstance(k, Mapping):
        return tuple(int(k[e]) for e in otype.orientation)
    return tuple(int(x) for x in k)


def in_upper_set(t, k, nu: float, strict: bool = True) -> bool:
    """``mu1(VLG(t, k)) < nu`` (or ``<= nu`` when not strict)."""
    otype = as_ordered(t)
    vec = _vec(otype, k)
    if any(x < 1 for x in vec):
        raise ValueError("lengths must be >= 1")
    return _oracle(otype, nu).member(vec, strict)


def _minima_on_grid(orc: _Oracle, strict: bool, cap: int) -> list:
    m = len(orc.free)
    if m == 0:
        v = orc.full(())
        return [v] if orc.member(v, strict) else []

    def thr(prefix):
        # least last coordinate in [1, cap] that lands in U, else None
        lo, hi = 1, cap
        if not orc.member(orc.full(prefix + (hi,)), strict):
            return None
        while lo < hi:
            mid = (lo + hi) // 2
            if orc.member(orc.full(prefix + (mid,)), strict):
                hi = mid
            else:
                lo = mid + 1
        return lo

    table = {}
    for prefix in itertools.product(range(1, cap + 1), repeat=m - 1):
        table[prefix] = thr(prefix)
    minima = []
    for prefix, x in table.items():
        if x is None:
            continue
        ok = True
        for i, p in enumerate(prefix):
            if p >= 2:
                below = prefix[:i] + (p - 1,) + prefix[i + 1:]
                y = table[below]
                if y is not None and y <= x:
                    ok = False
                    break
        if ok:
            minima.append(orc.full(prefix + (x,)))
    return sorted(minima)


def _verify_cap(orc: _Oracle, strict: bool, cap: int) -> bool:
    """Prove that no minimal element has a free coordinate above ``cap``.

    For a nonempty set ``D`` of free coordinates and values ``x <= cap``
    elsewhere, either ``(x, cap on D)`` is already in U (so nothing above it
    is minimal), or every vector above stays outside U because it contains
    the graph with ``D`` deleted, whose mu1 is already too large.
    """
    g = orc.g
    has_cycle = mu1(g) >= 1.0
    floor_ok = has_cycle and (1.0 >= orc.nu if strict else 1.0 > orc.nu)
    m = len(orc.free)
    for size in range(1, m + 1):
        for dset in itertools.combinations(range(m), size):
            rest = [i for i in range(m) if i not in dset]
            dropped = frozenset(orc.free[i] for i in dset)
            for vals in itertools.product(range(1, cap + 1), repeat=len(rest)):
                free_vec = [cap] * m
                for i, v in zip(rest, vals):
                    free_vec[i] = v
                vec = orc.full(free_vec)
                if orc.member(vec, strict):
                    continue
                if floor_ok:
                    continue
                s = orc.limit_sign(dropped, vec)
                if (s >= 0) if strict else (s > 0):
                    continue
                return False
    return True


def minimal_certificates(t, nu: float, strict: bool = True, cap: int = 12,
                         require_verified: bool = False) -> CertificateSet:
    """Minimal elements of U with every coordinate at most ``cap``.

    ``verified`` is True when no minimal element can have a coordinate
    above ``cap``.  With ``require_verified`` an unverified result raises
    :class:`CapUnverified` (the partial set is attached as ``.result``).
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    otype = as_ordered(t)
    orc = _oracle(otype, nu)
    minima = _minima_on_grid(orc, strict, cap)
    verified = _verify_cap(orc, strict, cap)
    res = CertificateSet(otype.encode(), float(nu), bool(strict), tuple(minima), cap, verified)
    if require_verified and not verified:
        err = CapUnverified(f"certificates beyond cap {cap} cannot be excluded")
        err.result = res
        raise err
    return res


def certificates_within(t, nu: float, strict: bool, budget: int) -> tuple:
    """All minimal elements of U whose coordinate sum is at most ``budget``.

    Exact without any cap argument: minimality only looks downward.
    """
    otype = as_ordered(t)
    orc = _oracle(otype, nu)
    nfixed = len(orc.half) - len(orc.free)
    free_budget = budget - nfixed
    m = len(orc.free)
    out = []
    if m == 0:
        v = orc.full(())
        return (v,) if free_budget >= 0 and orc.member(v, strict) else ()

    def rec(prefix, left):
        if len(prefix) == m:
            vec = orc.full(prefix)
            if not orc.member(vec, strict):
                return
            for i, x in enumerate(prefix):
                if x >= 2:
                    down = prefix[:i] + (x - 1,) + prefix[i + 1:]
                    if orc.member(orc.full(down), strict):
                        return
            out.append(vec)
            return
        remaining = m - len(prefix) - 1
        for x in range(1, left - remaining + 1):
            rec(prefix + (x,), left - x)

    if free_budget >= m:
        rec((), free_budget)
    return tuple(sorted(out))


def _accept(sign: int, strict: bool) -> bool:
    return sign < 0 if strict else sign <= 0


def cert_trace_direct(g, nu: float, r: int, k: int, strict: bool = True) -> int:
    """SNBC k-walks whose visited subgraph has ``mu1 < nu`` (or ``<=``) and order ``< r``."""
    g = _as_graph(g)
    t, h, _, _ = g.arrays
    total = 0
    for orbits, c in snbc_by_visited_edges(g, k).items():
        verts = {t[d] for d in orbits} | {h[d] for d in orbits}
        if len(orbits) - len(verts) >= r:
            continue
        sub = g.subgraph([g.dedges[d] for d in orbits])
        if _accept(compare_mu1(sub, nu), strict):
            total += c
    return total


def cert_trace_incl_excl(g, nu: float, r: int, k: int, strict: bool = True,
                         require_verified: bool = False) -> int:
    """Certified trace by inclusion-exclusion over certificates of each walk type.

    Sums ``(-1)**(1+|M|) * snbc(T, >= xi^M; g, k)`` over nonempty sets ``M``
    of certificates, ``xi^M`` being their componentwise maximum.  Only
    certificates with coordinate sum ``<= k`` can contribute, and those are
    found exactly; ``require_verified`` additionally demands a verified
    certificate set at ``cap = k``.
    """
    g = _as_graph(g)
    table = snbc_type_table(g, k)
    total = 0
    for key in sorted({tk for tk, _ in table}):
        if type_order(key) >= r:
            continue
        if require_verified:
            minimal_certificates(key, nu, strict, cap=k, require_verified=True)
        certs = certificates_within(key, nu, strict, k)

        def rec(start, current, size):
            acc = 0
            for j in range(start, len(certs)):
                xi = certs[j] if current is None else tuple(map(max, current, certs[j]))
                if sum(xi) > k:
                    continue
                sign = 1 if size % 2 == 0 else -1  # (-1)^(1+|M|) with |M| = size+1
                acc += sign * count_snbc_by_type(g, k, key, xi, table)
                acc += rec(j + 1, xi, size + 1)
            return acc

        total += rec(0, None, 0)
    return total
