"""Adjacency and Hashimoto matrices, exact traces, and the PF value mu1.

Dense matrices are indexed by ``g.vertices`` or ``g.dedges`` in their
stored (lexicographic) order.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import csgraph

from .errors import RootBracketFailure, ToleranceAmbiguous
from .graph import Graph, _as_graph

__all__ = [
    "adjacency_matrix",
    "hashimoto_matrix",
    "hashimoto_sparse",
    "trace_hashimoto_pow",
    "mu1",
    "compare_mu1",
    "shannon_mu1",
    "compare_shannon",
    "shannon_matrix",
    "exact_int_det",
    "AMBIGUITY_BAND",
]

AMBIGUITY_BAND = 1e-9
DENSE_LIMIT = 400


def adjacency_matrix(g) -> np.ndarray:
    g = _as_graph(g)
    t, h, _, _ = g.arrays
    a = np.zeros((g.n_vertices, g.n_vertices), dtype=np.int64)
    np.add.at(a, (t, h), 1)
    return a


def _nb_arcs(g: Graph):
    t, h, iv, out = g.arrays
    rows, cols = [], []
    for e in range(g.n_dedges):
        for f in out[h[e]]:
            if f != iv[e]:
                rows.append(e)
                cols.append(f)
    return rows, cols


def hashimoto_sparse(g) -> sparse.csr_matrix:
    g = _as_graph(g)
    rows, cols = _nb_arcs(g)
    d = g.n_dedges
    return sparse.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(d, d))


def hashimoto_matrix(g) -> np.ndarray:
    """``H[e1, e2] = 1`` iff ``head(e1) == tail(e2)`` and ``inv(e1) != e2``."""
    return hashimoto_sparse(g).toarray()


def trace_hashimoto_pow(g, k: int) -> int:
    """Exact ``Tr(H^k)``; switches to Python integers when int64 could overflow."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = _as_graph(g)
    d = g.n_dedges
    if d == 0:
        return 0
    h = hashimoto_matrix(g)
    rowmax = int(h.sum(axis=1).max()) if d else 0
    if rowmax == 0:
        return 0
    if math.log2(d) + k * math.log2(max(rowmax, 1)) < 62:
        return int(np.trace(np.linalg.matrix_power(h, k)))
    m = h.astype(object)
    result = None
    base = m
    while k:
        if k & 1:
            result = base if result is None else result.dot(base)
        k >>= 1
        if k:
            base = base.dot(base)
    return int(np.trace(result))


# -- PF value ---------------------------------------------------------------


def _blocks(rows, cols, n):
    """Strong components of the arc set, with their internal arc counts."""
    if n == 0:
        return []
    m = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, labels = csgraph.connected_components(m, directed=True, connection="strong")
    members = [[] for _ in range(ncomp)]
    for i, c in enumerate(labels):
        members[c].append(i)
    outdeg = [0] * n
    for r, c in zip(rows, cols):
        if labels[r] == labels[c]:
            outdeg[r] += 1
    blocks = []
    for mem in members:
        internal = sum(outdeg[i] for i in mem)
        if internal == 0:
            continue
        is_cycle = all(outdeg[i] == 1 for i in mem)
        blocks.append((mem, is_cycle))
    return blocks


def _power_radius(m: sparse.csr_matrix, tol=1e-12, maxiter=100_000) -> float:
    """Spectral radius of an irreducible nonnegative matrix by shifted power iteration.

    Iterates on ``m + I`` (primitive) and stops once the Collatz-Wielandt
    bracket is narrower than ``tol``.
    """
    n = m.shape[0]
    x = np.ones(n)
    shifted = m + sparse.identity(n, format="csr")
    lo, hi = 0.0, math.inf
    for _ in range(maxiter):
        y = shifted @ x
        ratio = y / x
        lo, hi = ratio.min() - 1.0, ratio.max() - 1.0
        x = y / y.max()
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _block_radius(g: Graph, rows, cols, mem) -> float:
    idx = {e: i for i, e in enumerate(mem)}
    br, bc = [], []
    for r, c in zip(rows, cols):
        if r in idx and c in idx:
            br.append(idx[r])
            bc.append(idx[c])
    n = len(mem)
    if n <= DENSE_LIMIT:
        a = np.zeros((n, n))
        a[br, bc] = 1.0
        return float(np.max(np.abs(np.linalg.eigvals(a))))
    m = sparse.csr_matrix((np.ones(len(br)), (br, bc)), shape=(n, n))
    return _power_radius(m)


def _mu1_blocks(g: Graph):
    rows, cols = _nb_arcs(g)
    out = []
    for mem, is_cycle in _blocks(rows, cols, g.n_dedges):
        out.append((1.0 if is_cycle else _block_radius(g, rows, cols, mem), mem))
    return out, rows, cols


def mu1(g) -> float:
    """Perron-Frobenius eigenvalue of the Hashimoto matrix (0 when nilpotent)."""
    g = _as_graph(g)
    blocks, _, _ = _mu1_blocks(g)
    return max((v for v, _ in blocks), default=0.0)


def exact_int_det(rows: list) -> int:
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _integral(nu: float):
    return float(nu).is_integer()


def compare_mu1(g, nu: float) -> int:
    """Sign of ``mu1(g) - nu``, with exact tie detection.

    Values within the ambiguity band are resolved exactly: an eigenvalue
    of an integer matrix can only equal a rational ``nu`` when ``nu`` is an
    integer, in which case ``det(nu*I - H)`` decides.  Otherwise
    :class:`ToleranceAmbiguous` is raised.
    """
    g = _as_graph(g)
    blocks, rows, cols = _mu1_blocks(g)
    val = max((v for v, _ in blocks), default=0.0)
    if abs(val - nu) >= AMBIGUITY_BAND:
        return 1 if val > nu else -1
    if _integral(nu):
        p = int(nu)
        top = max(blocks, key=lambda b: b[0])[1] if blocks else []
        idx = {e: i for i, e in enumerate(top)}
        mat = [[0] * len(top) for _ in top]
        for i in range(len(top)):
            mat[i][i] = p
        for r, c in zip(rows, cols):
            if r in idx and c in idx:
                mat[idx[r]][idx[c]] -= 1
        if exact_int_det(mat) == 0:
            return 0
    raise ToleranceAmbiguous(f"mu1 = {val!r} is within {AMBIGUITY_BAND} of nu = {nu!r}")


# -- Shannon's determinant method -------------------------------------------


def _unpack_lengthed(t, lengths):
    if lengths is None:
        lengths = t.lengths
        t = t.otype
    g = _as_graph(t)
    full = {}
    for e in g.dedges:
        if e in lengths:
            full[e] = int(lengths[e])
        elif g.inv[e] in lengths:
            full[e] = int(lengths[g.inv[e]])
        else:
            raise KeyError(f"no length for dedge {e!r}")
        if full[e] < 1:
            raise ValueError("lengths must be >= 1")
    return g, full


def shannon_matrix(t, lengths=None, z: float = 1.0) -> np.ndarray:
    """``M(z)`` with ``M[e, e'] = z**k(e)`` on non-backtracking steps of ``t``."""
    g, k = _unpack_lengthed(t, lengths)
    rows, cols = _nb_arcs(g)
    m = np.zeros((g.n_dedges, g.n_dedges))
    kv = np.array([k[e] for e in g.dedges], dtype=float)
    m[rows, cols] = z ** kv[rows]
    return m


def _shannon_blocks(t, lengths):
    g, k = _unpack_lengthed(t, lengths)
    rows, cols = _nb_arcs(g)
    kv = np.array([k[e] for e in g.dedges], dtype=float)
    out = []
    for mem, is_cycle in _blocks(rows, cols, g.n_dedges):
        idx = {e: i for i, e in enumerate(mem)}
        br, bc = [], []
        for r, c in zip(rows, cols):
            if r in idx and c in idx:
                br.append(idx[r])
                bc.append(idx[c])
        out.append((mem, is_cycle, np.array(br), np.array(bc), kv[mem]))
    return out, k, g


def _block_root(n, br, bc, kb) -> float:
    """Smallest positive z with rho(M_block(z)) = 1 (the root is simple)."""
    a = np.zeros((n, n))

    def rho_minus_one(z):
        a[br, bc] = z ** kb[br]
        return float(np.max(np.abs(np.linalg.eigvals(a)))) - 1.0

    a[br, bc] = 1.0
    rho_t = float(np.max(np.abs(np.linalg.eigvals(a))))
    lo = 1.0 / rho_t
    hi = min(1.0, rho_t ** (-1.0 / kb.max()))
    flo, fhi = rho_minus_one(lo), rho_minus_one(hi)
    if abs(flo) < 1e-15:
        return lo
    if abs(fhi) < 1e-15:
        return hi
    if flo > 0 or fhi < 0:
        lo2, hi2 = lo * 0.5, min(1.0, hi * 1.5)
        flo, fhi = rho_minus_one(lo2), rho_minus_one(hi2)
        if flo > 0 or fhi < 0:
            raise RootBracketFailure("cannot bracket the PF root of det(I - M(z))")
        lo, hi = lo2, hi2
    return optimize.brentq(rho_minus_one, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def shannon_mu1(t, lengths=None) -> float:
    """mu1 of the variable-length graph ``VLG(t, lengths)`` from ``t`` alone.

    ``1/z*`` for the smallest positive root ``z*`` of ``det(I - M(z))``,
    found per strong component of the non-backtracking step relation (where
    the root is simple).  Returns 0 when there is no root in ``(0, 1]``.
    ``t`` may be a lengthed type (with ``.graph``/``.lengths``) or a graph
    with ``lengths`` keyed by dedge (either orientation).
    """
    blocks, _, _ = _shannon_blocks(t, lengths)
    best = 0.0
    for mem, is_cycle, br, bc, kb in blocks:
        if is_cycle:
            val = 1.0
        else:
            val = 1.0 / _block_root(len(mem), br, bc, kb)
        best = max(best, val)
    return best


def compare_shannon(t, nu: float, lengths=None) -> int:
    """Sign of ``mu1(VLG) - nu`` with the same tie rule as :func:`compare_mu1`."""
    blocks, _, _ = _shannon_blocks(t, lengths)
    vals = []
    for mem, is_cycle, br, bc, kb in blocks:
        vals.append(1.0 if is_cycle else 1.0 / _block_root(len(mem), br, bc, kb))
    val = max(vals, default=0.0)
    if abs(val - nu) >= AMBIGUITY_BAND:
        return 1 if val > nu else -1
    if _integral(nu) and vals:
        p = int(nu)
        i = int(np.argmax(vals))
        mem, _, br, bc, kb = blocks[i]
        n = len(mem)
        # det(I - M(1/p)) scaled row-wise by p**k(e): integer matrix
        mat = [[0] * n for _ in range(n)]
        for r in range(n):
            mat[r][r] = p ** int(kb[r])
        for r, c in zip(br, bc):
            mat[r][c] -= 1
        if exact_int_det(mat) == 0:
            return 0
    raise ToleranceAmbiguous(f"mu1 = {val!r} is within {AMBIGUITY_BAND} of nu = {nu!r}")
