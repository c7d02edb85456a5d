"""Monte Carlo estimates over random covers and fits in powers of 1/n.

Per-sample quantities are computed from the permutation assignment
directly instead of building each cover as a graph.  A closed
non-backtracking walk in a cover projects to an SNBC word ``w`` in the base,
and its lifts are the fixed points of the composed permutation
``sigma(w)``.  A depth-first search over base words, carried out for a
whole batch of samples at once with numpy, therefore yields traces of
``H^k``, every short closed walk (used to anchor subgraph searches), and
the walks whose visited subgraph has positive order.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .certificates import _oracle
from .covers import CoverModel, sample_cover
from .errors import GuardViolated, IllConditioned
from .graph import BGraph, Graph, _as_graph, build_graph, iter_injections
from .spectral import trace_hashimoto_pow
from .tangles import TangleSpec, minimal_tangles, shortest_snbc
from .walks import _walk_key, iter_snbc, type_from_key, type_order

__all__ = [
    "TRACE_KINDS",
    "ExperimentConfig",
    "ExpansionReport",
    "ExpansionRegressor",
    "reference_c0",
    "sample_functionals",
    "estimate_functional",
    "fit_expansion",
    "estimate_subgraph_prob",
    "estimate_high_order_snbc",
    "loglog_slope",
    "run_experiment",
]

TRACE_KINDS = (
    "plain",
    "certified_strict",
    "certified_weak",
    "tanglefree_plain",
    "hastangles_certified",
    "tanglefree_prob",
    "subgraph_presence",
    "high_order",
)


def reference_c0(base, k: int) -> int:
    """``sum over divisors d of k of Tr(H_B^d)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(trace_hashimoto_pow(base, d) for d in range(1, k + 1) if k % d == 0)


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


# -- batched evaluation --------------------------------------------------------


class _Batch:
    """Permutation arrays ``P[d]`` of shape ``(S, n)`` for every base dedge."""

    def __init__(self, base: Graph, samples: list, n: int):
        self.base = base
        self.n = n
        self.S = len(samples)
        d = base.n_dedges
        self.P = [None] * d
        for e in base.edge_orbits:
            i = base.dindex[e]
            arr = np.stack([s.sigma[e] for s in samples]).astype(np.intp)
            self.P[i] = arr
            j = base.dindex[base.inv[e]]
            if j != i:
                invp = np.empty_like(arr)
                np.put_along_axis(invp, arr, np.broadcast_to(np.arange(n), arr.shape), axis=1)
                self.P[j] = invp

        # flat versions: position s*n + i maps to s*n + sigma(d)[s, i]
        offs = (np.arange(self.S, dtype=np.int64) * n)[:, None]
        self.flat = [(p + offs).ravel().astype(np.int32) for p in self.P]

    def step(self, d: int, q: np.ndarray) -> np.ndarray:
        return self.flat[d].take(q)


@dataclass
class _Needs:
    k_list: tuple = ()
    walks: bool = False          # classify walks of positive order
    nu: float = 2.0
    r: int = 1
    tangles: TangleSpec | None = None
    pattern: BGraph | None = None


def _local_graph(batch: _Batch, s: int, seeds: set, radius: int, labelled: bool):
    """Ball of the given radius around ``seeds`` (vertex codes ``v*n+i``)."""
    base, n = batch.base, batch.n
    bt, bh, biv, bout = base.arrays
    dist = {c: 0 for c in seeds}
    queue = deque(seeds)
    while queue:
        c = queue.popleft()
        if dist[c] == radius:
            continue
        v, i = divmod(c, n)
        for d in bout[v]:
            w = bh[d] * n + int(batch.P[d][s, i])
            if w not in dist:
                dist[w] = dist[c] + 1
                queue.append(w)
    verts, tail, head, inv, vmap, emap = [], {}, {}, {}, {}, {}
    for c in dist:
        v, i = divmod(c, n)
        vid = f"{base.vertices[v]}:{i}"
        verts.append(vid)
        vmap[vid] = base.vertices[v]
        for d in bout[v]:
            j = int(batch.P[d][s, i])
            if bh[d] * n + j not in dist:
                continue
            did = f"{base.dedges[d]}:{i}"
            tail[did] = vid
            head[did] = f"{base.vertices[bh[d]]}:{j}"
            inv[did] = f"{base.dedges[biv[d]]}:{j}"
            emap[did] = base.dedges[d]
    g = Graph(verts, list(tail), tail, head, inv, validate=False)
    if labelled:
        return BGraph(g, base, vmap, emap, validate=False)
    return g


def _ecc(g: Graph, v: str) -> int:
    t, h, iv, out = g.arrays
    start = g.vindex[v]
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for d in out[x]:
            if h[d] not in dist:
                dist[h[d]] = dist[x] + 1
                queue.append(h[d])
    return max(dist.values())


def _pattern_anchor(pattern: BGraph):
    """Shortest SNBC walk of the pattern: its first dedge and base word."""
    g = pattern.graph
    for k in range(1, 2 * g.n_edges + 2):
        for seq in iter_snbc(g, k):
            word = tuple(pattern.base.dindex[pattern.emap[g.dedges[d]]] for d in seq)
            return g.dedges[seq[0]], word
    return None


def _evaluate(batch: _Batch, needs: _Needs) -> dict:
    """Per-sample arrays for everything requested in ``needs``."""
    base, n, S = batch.base, batch.n, batch.S
    bt, bh, biv, bout = base.arrays
    D = base.n_dedges
    k_set = set(needs.k_list)
    out = {"trace": {k: np.zeros(S, dtype=np.int64) for k in k_set}}
    if needs.walks:
        out["high"] = {k: np.zeros(S, dtype=np.int64) for k in k_set}
        out["uncert_strict"] = {k: np.zeros(S, dtype=np.int64) for k in k_set}
        out["uncert_weak"] = {k: np.zeros(S, dtype=np.int64) for k in k_set}
        walk_memo = {}
        orc_memo = {}

    # anchors: length -> per-sample list of anchor dedge codes
    tangle_anchor_len = {}
    if needs.tangles is not None:
        for gi, psi in enumerate(needs.tangles.generators):
            a = needs.tangles.anchor(gi)
            if a is not None:
                tangle_anchor_len[gi] = a
    anchor_lengths = {c for _, c in tangle_anchor_len.values()}
    anchors = {c: [[] for _ in range(S)] for c in anchor_lengths}
    pat = None
    if needs.pattern is not None:
        pat = _pattern_anchor(needs.pattern)
        pat_hits = [[] for _ in range(S)]
    kmax = max(list(k_set) + list(anchor_lengths) + ([len(pat[1])] if pat else []) + [0])

    ident = np.arange(S * n, dtype=np.int32)
    stack = [ident]
    word = []

    def analyse(ell):
        F = stack[-1] == ident
        if ell in k_set:
            out["trace"][ell] += F.reshape(S, n).sum(axis=1)
        need_anchor = ell in anchors
        need_pat = pat is not None and tuple(word) == pat[1]
        need_walks = needs.walks and ell in k_set
        if not (need_anchor or need_pat or need_walks):
            return
        flat_idx = np.flatnonzero(F)
        if len(flat_idx) == 0:
            return
        s_idx, i_idx = np.divmod(flat_idx, n)
        if need_anchor:
            code0 = word[0] * n
            lst = anchors[ell]
            for s, i in zip(s_idx.tolist(), i_idx.tolist()):
                lst[s].append(code0 + i)
        if need_pat:
            for s, i in zip(s_idx.tolist(), i_idx.tolist()):
                pat_hits[s].append(word[0] * n + i)
        if need_walks:
            _classify(ell, flat_idx, s_idx)

    def _classify(ell, flat_idx, s_idx):
        pos = np.stack([stack[j][flat_idx] for j in range(ell)], axis=1) - (s_idx * n)[:, None]
        w = np.array(word, dtype=np.int64)
        vcodes = np.array([bt[d] for d in word], dtype=np.int64) * n + pos
        dcodes = w * n + pos
        period = np.full(len(s_idx), ell)
        undecided = np.ones(len(s_idx), dtype=bool)
        for q in _divisors(ell)[:-1]:
            same = np.all(dcodes == np.roll(dcodes, -q, axis=1), axis=1) & undecided
            period[same] = q
            undecided &= ~same
        revisit = np.zeros(len(s_idx), dtype=bool)
        for q in set(period.tolist()):
            rows = period == q
            vs = np.sort(vcodes[rows][:, :q], axis=1)
            revisit[rows] = np.any(vs[:, 1:] == vs[:, :-1], axis=1) if q > 1 else False
        for row in np.nonzero(revisit)[0].tolist():
            s = int(s_idx[row])
            seq_codes = dcodes[row].tolist()
            key = tuple(seq_codes) + (s,)
            res = walk_memo.get(key)
            if res is None:
                res = _walk_class(batch, s, seq_codes, needs.nu, orc_memo)
                walk_memo[key] = res
            o, sign = res
            if o >= needs.r:
                out["high"][ell][s] += 1
                out["uncert_strict"][ell][s] += 1
                out["uncert_weak"][ell][s] += 1
            else:
                if sign >= 0:
                    out["uncert_strict"][ell][s] += 1
                if sign > 0:
                    out["uncert_weak"][ell][s] += 1

    def dfs():
        ell = len(word)
        if ell >= 1 and bh[word[-1]] == bt[word[0]] and biv[word[-1]] != word[0]:
            analyse(ell)
        if ell == kmax:
            return
        choices = range(D) if ell == 0 else [f for f in bout[bh[word[-1]]] if f != biv[word[-1]]]
        for f in choices:
            word.append(f)
            stack.append(batch.step(f, stack[-1]))
            dfs()
            stack.pop()
            word.pop()

    if kmax > 0:
        dfs()

    if needs.tangles is not None:
        out["tangled"] = _tangle_flags(batch, needs.tangles, tangle_anchor_len, anchors)
    if needs.pattern is not None:
        out["present"] = _pattern_flags(batch, needs.pattern, pat, pat_hits if pat else None)
    return out


def _walk_class(batch: _Batch, s: int, seq_codes, nu: float, orc_memo) -> tuple:
    """``(order, sign(mu1 - nu))`` of the visited subgraph of one lifted walk."""
    base, n = batch.base, batch.n
    bt, bh, biv, _ = base.arrays
    local = {}
    codes = []
    for c in seq_codes:
        d, i = divmod(c, n)
        j = int(batch.P[d][s, i])
        codes.append(c)
        codes.append(biv[d] * n + j)
    for c in codes:
        if c not in local:
            local[c] = len(local)
    t, h, iv = [0] * len(local), [0] * len(local), [0] * len(local)
    for c, idx in local.items():
        d, i = divmod(c, n)
        j = int(batch.P[d][s, i])
        t[idx] = bt[d] * n + i
        h[idx] = bh[d] * n + j
        iv[idx] = local[biv[d] * n + j]
    key, lengths = _walk_key([local[c] for c in seq_codes], t, h, iv)
    o = type_order(key)
    memo_key = (key, lengths)
    sign = orc_memo.get(memo_key)
    if sign is None:
        orc = _oracle(type_from_key(key), nu)
        sign = orc.sign(tuple(lengths))
        orc_memo[memo_key] = sign
    return o, sign


def _tangle_flags(batch: _Batch, spec: TangleSpec, anchor_of: dict, anchors: dict) -> np.ndarray:
    from .tangles import _embeds

    flags = np.zeros(batch.S, dtype=bool)
    n = batch.n
    base = batch.base
    radius = 1
    for gi, (d0, c) in anchor_of.items():
        psi = spec.generators[gi]
        radius = max(radius, _ecc(psi, psi.tail[d0]), c)
    for s in range(batch.S):
        seeds = set()
        for c in anchors:
            for code in anchors[c][s]:
                d, i = divmod(code, n)
                seeds.add(base.arrays[0][d] * n + i)
        if not seeds:
            continue
        local = _local_graph(batch, s, seeds, radius, labelled=False)
        for gi, psi in enumerate(spec.generators):
            if gi not in anchor_of:
                continue
            d0, c = anchor_of[gi]
            cands = [f"{base.dedges[code // n]}:{code % n}" for code in anchors[c][s]]
            if cands and _embeds(psi, local, (d0,), cands):
                flags[s] = True
                break
    return flags


def _pattern_flags(batch: _Batch, pattern: BGraph, pat, hits) -> np.ndarray:
    flags = np.zeros(batch.S, dtype=bool)
    base, n = batch.base, batch.n
    if pattern.base._key() != base._key():
        raise ValueError("pattern is a B-graph over a different base")
    if pat is None:
        # no closed walk to anchor on: realize and search directly
        from .covers import CoverSample, realize
        for s in range(batch.S):
            sigma = {e: batch.P[base.dindex[e]][s] for e in base.edge_orbits}
            g = realize(CoverSample(base, n, sigma, CoverModel()))
            flags[s] = next(iter_injections(pattern, g), None) is not None
        return flags
    d0, word = pat
    radius = max(1, _ecc(pattern.graph, pattern.graph.tail[d0]))
    for s in range(batch.S):
        if not hits[s]:
            continue
        seeds = {base.arrays[0][code // n] * n + code % n for code in hits[s]}
        local = _local_graph(batch, s, seeds, radius, labelled=True)
        cands = [f"{base.dedges[code // n]}:{code % n}" for code in hits[s]]
        it = iter_injections(pattern, local, first=d0, first_candidates=cands)
        flags[s] = next(it, None) is not None
    return flags


# -- experiments ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    base: Graph
    model: CoverModel = field(default_factory=CoverModel)
    nu: float = 1.8
    r: int = 2
    k_list: Sequence[int] = (1, 2, 3, 4)
    n_list: Sequence[int] = (64, 128, 256, 512)
    samples_per_n: int = 1000
    seed: int = 0
    trace_kind: str = "plain"
    C: float = 1.0
    tangle_cap: int = 8
    subgraph: BGraph | None = None
    chunk: int = 500

    def __post_init__(self):
        self.model = CoverModel.coerce(self.model)
        if self.trace_kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace_kind {self.trace_kind!r}")
        self.k_list = tuple(int(k) for k in self.k_list)
        self.n_list = tuple(int(n) for n in self.n_list)
        for n in self.n_list:
            self.model.check(self.base, n)
        if self.trace_kind == "subgraph_presence" and self.subgraph is None:
            raise ValueError("subgraph_presence needs a subgraph")

    def to_dict(self) -> dict:
        d = {
            "base": self.base.to_dict(),
            "kind": self.model.kind,
            "nu": self.nu,
            "r": self.r,
            "k_list": list(self.k_list),
            "n_list": list(self.n_list),
            "samples_per_n": self.samples_per_n,
            "seed": self.seed,
            "trace_kind": self.trace_kind,
            "C": self.C,
            "tangle_cap": self.tangle_cap,
        }
        if self.subgraph is not None:
            d["subgraph"] = self.subgraph.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExperimentConfig":
        keys = ("nu", "r", "k_list", "n_list", "samples_per_n", "seed", "trace_kind", "C", "tangle_cap")
        kw = {k: d[k] for k in keys if k in d}
        sub = d.get("subgraph")
        return cls(base=build_graph(d["base"]), model=CoverModel(d.get("kind", "permutation")),
                   subgraph=BGraph.from_dict(sub) if sub else None, **kw)


@dataclass
class ExpansionReport:
    config: dict
    raw: dict                      # (k, n) -> (mean, se, count)
    coefficients: dict = field(default_factory=dict)   # (k, i) -> (estimate, se)
    reference_c0: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    fit_residuals: dict = field(default_factory=dict)  # k -> residual per n

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "raw": [{"k": k, "n": n, "mean": m, "se": se, "count": c}
                    for (k, n), (m, se, c) in sorted(self.raw.items())],
            "coefficients": [{"k": k, "i": i, "estimate": e, "se": se}
                             for (k, i), (e, se) in sorted(self.coefficients.items())],
            "reference_c0": {str(k): v for k, v in sorted(self.reference_c0.items())},
            "flags": list(self.flags),
            "fit_residuals": {str(k): v for k, v in sorted(self.fit_residuals.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExpansionReport":
        raw = {(int(x["k"]), int(x["n"])): (float(x["mean"]), float(x["se"]), int(x["count"]))
               for x in d["raw"]}
        coefs = {(int(x["k"]), int(x["i"])): (float(x["estimate"]), float(x["se"]))
                 for x in d.get("coefficients", [])}
        return cls(dict(d.get("config", {})), raw, coefs,
                   {int(k): int(v) for k, v in d.get("reference_c0", {}).items()},
                   list(d.get("flags", [])),
                   {int(k): list(v) for k, v in d.get("fit_residuals", {}).items()})

    def to_csv(self) -> str:
        lines = ["k,n,mean,se"]
        for (k, n), (m, se, _) in sorted(self.raw.items()):
            lines.append(f"{k},{n},{m!r},{se!r}")
        return "\n".join(lines) + "\n"


_WALK_KINDS = ("certified_strict", "certified_weak", "hastangles_certified", "high_order")


def sample_functionals(base: Graph, model, n: int, samples: int, seed: int,
                       k_list: Sequence[int] = (), nu: float = 1.8, r: int = 2,
                       spec: TangleSpec | None = None, pattern: BGraph | None = None,
                       walks: bool = False, chunk: int = 500, start: int = 0,
                       jobs: int = 1) -> dict:
    """Per-sample arrays for ``samples`` covers of degree ``n``.

    Sample ``j`` is ``sample_cover(base, n, model, seed, stream=(n, j))``.
    Returned keys: ``trace``, and when requested ``high``,
    ``cert_strict``, ``cert_weak`` (dicts over k), ``tangled``, ``present``.
    """
    base = _as_graph(base)
    model = CoverModel.coerce(model)
    needs = _Needs(k_list=tuple(k_list), walks=walks, nu=nu, r=r, tangles=spec, pattern=pattern)
    tasks = [(base, model, n, seed, lo, min(lo + chunk, start + samples), needs)
             for lo in range(start, start + samples, chunk)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_chunk, tasks))
    else:
        parts = [_chunk(t) for t in tasks]
    out = {"trace": {k: np.concatenate([p["trace"][k] for p in parts]) for k in needs.k_list}}
    if walks:
        for name in ("high", "uncert_strict", "uncert_weak"):
            out[name] = {k: np.concatenate([p[name][k] for p in parts]) for k in needs.k_list}
        out["cert_strict"] = {k: out["trace"][k] - out["uncert_strict"][k] for k in needs.k_list}
        out["cert_weak"] = {k: out["trace"][k] - out["uncert_weak"][k] for k in needs.k_list}
        if r < 1:
            for k in needs.k_list:
                out["cert_strict"][k][:] = 0
                out["cert_weak"][k][:] = 0
                out["high"][k] = out["trace"][k].copy()
    for name in ("tangled", "present"):
        if parts and name in parts[0]:
            out[name] = np.concatenate([p[name] for p in parts])
    return out


def _chunk(task) -> dict:
    base, model, n, seed, lo, hi, needs = task
    covers = [sample_cover(base, n, model, seed, stream=(n, j)) for j in range(lo, hi)]
    return _evaluate(_Batch(base, covers, n), needs)


def _select(kind: str, vals: dict, k: int) -> np.ndarray:
    if kind == "plain":
        return vals["trace"][k]
    if kind == "certified_strict":
        return vals["cert_strict"][k]
    if kind == "certified_weak":
        return vals["cert_weak"][k]
    if kind == "tanglefree_plain":
        return np.where(vals["tangled"], 0, vals["trace"][k])
    if kind == "hastangles_certified":
        return np.where(vals["tangled"], vals["cert_strict"][k], 0)
    if kind == "tanglefree_prob":
        return (~vals["tangled"]).astype(np.int64)
    if kind == "subgraph_presence":
        return vals["present"].astype(np.int64)
    if kind == "high_order":
        return vals["high"][k]
    raise ValueError(kind)


def _mean_se(x: np.ndarray) -> tuple:
    x = np.asarray(x, dtype=np.float64)
    m = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return m, se, int(len(x))


def estimate_functional(cfg: ExperimentConfig, jobs: int = 1) -> ExpansionReport:
    """Sample mean and standard error of the configured functional per ``(k, n)``."""
    flags = []
    for n in cfg.n_list:
        bad = [k for k in cfg.k_list if k > math.sqrt(n) / cfg.C]
        if bad:
            warnings.warn(f"k = {bad} outside the sqrt(n)/C window for n = {n}", GuardViolated)
            flags.append(f"guard_violated:n={n}:k={bad}")
    spec = None
    if cfg.trace_kind in ("tanglefree_plain", "hastangles_certified", "tanglefree_prob"):
        spec = minimal_tangles(cfg.nu, cfg.r, cfg.tangle_cap)
        if not spec.verified:
            flags.append("tangle_spec_unverified")
    raw = {}
    k_eval = cfg.k_list if cfg.trace_kind not in ("tanglefree_prob", "subgraph_presence") else ()
    for n in cfg.n_list:
        vals = sample_functionals(
            cfg.base, cfg.model, n, cfg.samples_per_n, cfg.seed, k_eval, cfg.nu, cfg.r,
            spec, cfg.subgraph, walks=cfg.trace_kind in _WALK_KINDS, chunk=cfg.chunk, jobs=jobs)
        for k in cfg.k_list:
            raw[(k, n)] = _mean_se(_select(cfg.trace_kind, vals, k))
    report = ExpansionReport(cfg.to_dict(), raw, flags=flags)
    if cfg.trace_kind in ("plain", "certified_strict", "certified_weak", "tanglefree_plain"):
        report.reference_c0 = {k: reference_c0(cfg.base, k) for k in cfg.k_list}
    return report


# -- fitting ---------------------------------------------------------------------


class ExpansionRegressor(RegressorMixin, BaseEstimator):
    """Weighted least squares of ``y`` on ``1, 1/n, ..., 1/n**(r-1)``.

    ``X`` is a single column of degrees ``n``.  After ``fit``,
    ``coef_[i]`` estimates the coefficient of ``n**-i`` and ``coef_se_``
    holds standard errors from the weighted normal equations.
    """

    def __init__(self, r: int = 2, cond_limit: float = 1e12):
        self.r = r
        self.cond_limit = cond_limit

    def _design(self, X):
        n = X[:, 0].astype(float)
        return np.column_stack([n ** (-i) for i in range(self.r)])

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("X must be one column of degrees n")
        if np.any(X[:, 0] <= 0):
            raise ValueError("degrees must be positive")
        if len(np.unique(X[:, 0])) < self.r:
            raise IllConditioned(f"need at least {self.r} distinct n values")
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        A = self._design(X)
        sw = np.sqrt(w)
        Aw = A * sw[:, None]
        if np.linalg.cond(Aw) > self.cond_limit:
            raise IllConditioned("design matrix is ill-conditioned; spread out the n values")
        coef, *_ = np.linalg.lstsq(Aw, y * sw, rcond=None)
        cov = np.linalg.inv(Aw.T @ Aw)
        self.coef_ = coef
        self.coef_se_ = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        self.residuals_ = y - A @ coef
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return self._design(X) @ self.coef_


def fit_expansion(raw, r: int) -> tuple:
    """Per-k weighted fit of ``mean(k, n)`` with weights ``1/se**2``.

    ``raw`` maps ``(k, n)`` to ``(mean, se[, count])`` (an
    :class:`ExpansionReport` is accepted too).  Returns
    ``(coefficients, residuals)`` with ``coefficients[(k, i)] = (estimate, se)``.
    Zero standard errors (deterministic cells) are replaced by the
    smallest positive one, or all weights are equal if none is positive.
    """
    if isinstance(raw, ExpansionReport):
        raw = raw.raw
    ks = sorted({k for k, _ in raw})
    coefs, resid = {}, {}
    for k in ks:
        ns = sorted(n for kk, n in raw if kk == k)
        if len(ns) < r + 1:
            raise IllConditioned(f"k = {k}: fitting {r} coefficients needs at least {r + 1} n values")
        y = np.array([raw[(k, n)][0] for n in ns])
        se = np.array([raw[(k, n)][1] for n in ns])
        pos = se[se > 0]
        if len(pos) == 0:
            w = np.ones(len(ns))
        else:
            se = np.where(se > 0, se, pos.min())
            w = 1.0 / se ** 2
        est = ExpansionRegressor(r=r).fit(np.array(ns, dtype=float)[:, None], y, sample_weight=w)
        for i in range(r):
            coefs[(k, i)] = (float(est.coef_[i]), float(est.coef_se_[i]))
        resid[k] = [float(x) for x in est.residuals_]
    return coefs, resid


def run_experiment(cfg: ExperimentConfig, fit_r: int | None = None, jobs: int = 1) -> ExpansionReport:
    """``estimate_functional`` followed by ``fit_expansion`` (``fit_r`` coefficients)."""
    report = estimate_functional(cfg, jobs)
    if fit_r:
        report.coefficients, report.fit_residuals = fit_expansion(report.raw, fit_r)
    return report


def estimate_subgraph_prob(base, model, s: BGraph, n_list, samples: int, seed: int,
                           chunk: int = 500) -> dict:
    """Empirical ``Prob[some B-subgraph of G is isomorphic to s]`` per ``n``."""
    base = _as_graph(base)
    out = {}
    for n in n_list:
        vals = sample_functionals(base, model, n, samples, seed, (), pattern=s, chunk=chunk)
        out[n] = _mean_se(vals["present"].astype(np.int64))[:2]
    return out


def estimate_high_order_snbc(base, model, r: int, k: int, n_list, samples: int, seed: int,
                             chunk: int = 500) -> dict:
    """Empirical mean of the number of SNBC k-walks with visited order ``>= r``."""
    base = _as_graph(base)
    out = {}
    for n in n_list:
        vals = sample_functionals(base, model, n, samples, seed, (k,), r=r, walks=True, chunk=chunk)
        out[n] = _mean_se(vals["high"][k])[:2]
    return out


def loglog_slope(table: Mapping) -> tuple:
    """Weighted least-squares slope of ``log mean`` against ``log n``.

    ``table`` maps ``n`` to ``(mean, se)``; the log-scale standard error
    is ``se/mean``.  Returns ``(slope, slope_se)``.
    """
    ns = sorted(table)
    x = np.log(np.array(ns, dtype=float))
    m = np.array([table[n][0] for n in ns], dtype=float)
    se = np.array([table[n][1] for n in ns], dtype=float)
    if np.any(m <= 0):
        raise ValueError("log-log slope needs positive means")
    sl = np.where(se > 0, se / m, np.nan)
    if np.all(np.isnan(sl)):
        w = np.ones(len(ns))
    else:
        sl = np.where(np.isnan(sl), np.nanmin(sl), sl)
        w = 1.0 / sl ** 2
    A = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], np.log(m) * sw, rcond=None)
    cov = np.linalg.inv((A * sw[:, None]).T @ (A * sw[:, None]))
    return float(coef[1]), float(math.sqrt(cov[1, 1]))
