"""Command line front end.

Every subcommand prints one JSON object (keys sorted) on standard output.
Exit codes: 0 success, 2 invalid input, 3 unverified cap under ``--strict-cap``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from .certificates import (
    as_ordered,
    cert_trace_direct,
    cert_trace_incl_excl,
    minimal_certificates,
)
from .covers import CoverModel, MODEL_KINDS, realize, sample_cover
from .errors import CapUnverified, GuardViolated, NBCoverError
from .expansion import (
    TRACE_KINDS,
    ExpansionReport,
    ExperimentConfig,
    estimate_subgraph_prob,
    fit_expansion,
    reference_c0,
    run_experiment,
)
from .graph import BGraph, Graph, OrderedGraph, build_graph
from .mobius import derived_classes, meets, psi_image, truncated_indicator
from .spectral import compare_mu1, mu1, trace_hashimoto_pow
from .tangles import TangleSpec, has_tangle, minimal_tangles
from .walks import LengthedType, bead_suppress, build_vlg, count_snbc, count_snbc_order_split

EXIT_OK, EXIT_INVALID, EXIT_UNVERIFIED = 0, 2, 3


class _Unverified(Exception):
    def __init__(self, payload):
        self.payload = payload


# -- input helpers ------------------------------------------------------------


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_any_graph(path: str):
    d = _read_json(path)
    if "base" in d and "vmap" in d:
        return BGraph.from_dict(d)
    return build_graph(d)


def _load_graph(path: str) -> Graph:
    g = _load_any_graph(path)
    return g.graph if isinstance(g, BGraph) else g


def _load_type(path: str) -> OrderedGraph:
    """A graph file (edge order = orientation) or a ``{"n_vertices", "edges"}`` key."""
    d = _read_json(path)
    if "type" in d and "lengths" not in d:
        d = d["type"]
    if "n_vertices" in d:
        key = (int(d["n_vertices"]), tuple((int(a), int(b), bool(h)) for a, b, h in d["edges"]))
        return as_ordered(key)
    if "graph" in d and "orientation" in d:
        g = build_graph(d["graph"])
        return OrderedGraph(g, d.get("vertex_order", g.vertices), d["orientation"])
    return as_ordered(build_graph(d))


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _lengthed_to_dict(t: LengthedType) -> dict:
    return {
        "graph": t.graph.to_dict(),
        "vertex_order": list(t.otype.vertex_order),
        "orientation": list(t.otype.orientation),
        "lengths": {e: int(t.lengths[e]) for e in t.otype.orientation},
    }


def _load_generators(path: str) -> list:
    d = _read_json(path)
    items = d["generators"] if isinstance(d, dict) else d
    out = []
    for g in items:
        out.append(BGraph.from_dict(g) if "base" in g and "vmap" in g else build_graph(g))
    return out


def _load_spec(path: str) -> TangleSpec:
    return TangleSpec.from_dict(_read_json(path))


# -- subcommands ---------------------------------------------------------------


def cmd_mu1(a):
    g = _load_graph(a.graph)
    out = {"mu1": mu1(g)}
    if a.nu is not None:
        out["compare"] = compare_mu1(g, a.nu)
    return out


def cmd_trace(a):
    return {"trace": trace_hashimoto_pow(_load_graph(a.graph), a.k)}


def cmd_snbc(a):
    g = _load_graph(a.graph)
    out = {"snbc": count_snbc(g, a.k)}
    if a.r is not None:
        below, above = count_snbc_order_split(g, a.k, a.r)
        out["below"], out["at_or_above"] = below, above
    return out


def cmd_suppress(a):
    s = _load_type(a.graph)
    g = s.graph
    if a.keep is not None:
        keep = [v for v in a.keep.split(",") if v]
    else:
        t, h, iv, out = g.arrays
        keep = [v for v in g.vertices
                if len(out[g.vindex[v]]) != 2 or any(t[d] == h[d] for d in out[g.vindex[v]])]
        if not keep:
            keep = [s.vertex_order[0]]
    return _lengthed_to_dict(bead_suppress(s, keep))


def cmd_vlg(a):
    otype = _load_type(a.type)
    vec = _ints(a.lengths)
    if len(vec) != len(otype.orientation):
        raise ValueError(f"expected {len(otype.orientation)} lengths, got {len(vec)}")
    return build_vlg(LengthedType(otype, dict(zip(otype.orientation, vec)))).to_dict()


def cmd_certificates(a):
    res = minimal_certificates(_load_type(a.type), a.nu, a.strict, a.cap)
    if a.strict_cap and not res.verified:
        raise _Unverified(res.to_dict())
    return res.to_dict()


def cmd_cert_trace(a):
    g = _load_graph(a.graph)
    if a.method == "direct":
        val = cert_trace_direct(g, a.nu, a.r, a.k, a.strict)
    else:
        val = cert_trace_incl_excl(g, a.nu, a.r, a.k, a.strict, require_verified=a.strict_cap)
    return {"cert_trace": val}


def cmd_tangles(a):
    spec = minimal_tangles(a.nu, a.r, a.cap)
    if a.strict_cap and not spec.verified:
        raise _Unverified(spec.to_dict())
    return spec.to_dict()


def cmd_has_tangle(a):
    if a.spec:
        spec = _load_spec(a.spec)
    elif a.nu is not None and a.r is not None:
        spec = minimal_tangles(a.nu, a.r, a.cap)
    else:
        raise ValueError("give --spec or both --nu and --r")
    return {"has_tangle": has_tangle(_load_graph(a.graph), spec), "spec_verified": spec.verified}


def _frac(x: Fraction) -> list:
    return [x.numerator, x.denominator]


def cmd_mobius(a):
    base = _load_graph(a.base) if a.base else None
    return derived_classes(_load_generators(a.generators), a.r, base).to_dict()


def cmd_indicator(a):
    g = _load_any_graph(a.graph)
    if not isinstance(g, BGraph):
        raise ValueError("indicator needs a B-graph (with base, vmap, emap)")
    table = derived_classes(_load_generators(a.generators), a.r, g.base)
    _, ord_psi = psi_image(g, table)
    return {
        "indicator": _frac(truncated_indicator(g, table, table=table)),
        "meets": meets(g, table),
        "ord_psi": ord_psi,
        "exact_regime": ord_psi < a.r,
    }


def cmd_sample_cover(a):
    c = sample_cover(_load_graph(a.base), a.n, a.kind, a.seed)
    if a.realize:
        return realize(c).to_dict()
    d = c.to_dict()
    d["seed"] = a.seed
    return d


def _config_from_args(a) -> ExperimentConfig:
    if a.config:
        d = dict(_read_json(a.config))
        if a.seed is not None:
            d["seed"] = a.seed
        return ExperimentConfig.from_dict(d)
    if not a.base:
        raise ValueError("give --config or --base")
    sub = BGraph.from_dict(_read_json(a.subgraph)) if a.subgraph else None
    return ExperimentConfig(
        base=_load_graph(a.base), model=CoverModel(a.kind), nu=a.nu, r=a.r,
        k_list=_ints(a.k), n_list=_ints(a.n), samples_per_n=a.samples, seed=a.seed,
        trace_kind=a.trace_kind, C=a.C, tangle_cap=a.cap, subgraph=sub)


def cmd_estimate(a):
    if a.seed is None:
        raise ValueError("--seed is required")
    cfg = _config_from_args(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GuardViolated)  # recorded in the report flags
        report = run_experiment(cfg, a.fit, a.jobs)
    if a.csv:
        with open(a.csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    return report.to_dict()


def cmd_fit(a):
    report = ExpansionReport.from_dict(_read_json(a.report))
    report.coefficients, report.fit_residuals = fit_expansion(report.raw, a.r)
    return report.to_dict()


def cmd_subgraph_prob(a):
    s = BGraph.from_dict(_read_json(a.subgraph))
    table = estimate_subgraph_prob(_load_graph(a.base), a.kind, s, _ints(a.n), a.samples, a.seed)
    return {"prob": [{"n": n, "p": p, "se": se} for n, (p, se) in sorted(table.items())]}


def cmd_c0(a):
    return {"c0": reference_c0(_load_graph(a.base), a.k)}


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nbcover", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    def strictness(sp):
        grp = sp.add_mutually_exclusive_group()
        grp.add_argument("--strict", dest="strict", action="store_true", default=True,
                         help="use mu1 < nu (default)")
        grp.add_argument("--weak", dest="strict", action="store_false", help="use mu1 <= nu")

    sp = add("mu1", cmd_mu1, "spectral radius of the non-backtracking matrix")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--nu", type=float, help="also report sign(mu1 - nu)")

    sp = add("trace", cmd_trace, "Tr(H^k)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, required=True)

    sp = add("snbc", cmd_snbc, "count SNBC walks of length k")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--r", type=int, help="split by visited-subgraph order")

    sp = add("suppress", cmd_suppress, "bead suppression of an ordered graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--keep", help="comma-separated vertices to keep (default: all non-beads)")

    sp = add("vlg", cmd_vlg, "variable-length graph of a type")
    sp.add_argument("--type", required=True)
    sp.add_argument("--lengths", required=True, help="comma-separated, in edge order")

    sp = add("certificates", cmd_certificates, "minimal certificates of a type")
    sp.add_argument("--type", required=True)
    sp.add_argument("--nu", type=float, required=True)
    strictness(sp)
    sp.add_argument("--cap", type=int, default=12)
    sp.add_argument("--strict-cap", action="store_true", help="exit 3 when the cap is not verified")

    sp = add("cert-trace", cmd_cert_trace, "certified trace")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    strictness(sp)
    sp.add_argument("--method", choices=("direct", "incl-excl"), default="direct")
    sp.add_argument("--strict-cap", action="store_true")

    sp = add("tangles", cmd_tangles, "minimal tangles")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--cap", type=int, default=8)
    sp.add_argument("--strict-cap", action="store_true")

    sp = add("has-tangle", cmd_has_tangle, "tangle detection")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--spec", help="tangle spec JSON from the tangles command")
    sp.add_argument("--nu", type=float)
    sp.add_argument("--r", type=int)
    sp.add_argument("--cap", type=int, default=8)

    sp = add("mobius", cmd_mobius, "derived classes and their Moebius function")
    sp.add_argument("--generators", required=True, help="JSON list of B-graphs or graphs")
    sp.add_argument("--base", help="base graph for plain-graph generators")
    sp.add_argument("--r", type=int, required=True)

    sp = add("indicator", cmd_indicator, "truncated indicator of a B-graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--generators", required=True)
    sp.add_argument("--r", type=int, required=True)

    sp = add("sample-cover", cmd_sample_cover, "draw a random cover")
    sp.add_argument("--base", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--kind", choices=MODEL_KINDS, default="permutation")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--realize", action="store_true", help="emit the cover as a B-graph")

    sp = add("estimate", cmd_estimate, "Monte Carlo estimate of an expectation functional")
    sp.add_argument("--config", help="experiment config JSON (flags below are then ignored)")
    sp.add_argument("--base")
    sp.add_argument("--kind", choices=MODEL_KINDS, default="permutation")
    sp.add_argument("--nu", type=float, default=1.8)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--k", default="1,2,3,4")
    sp.add_argument("--n", default="64,128,256,512")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--trace-kind", choices=TRACE_KINDS, default="plain")
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--cap", type=int, default=8)
    sp.add_argument("--subgraph", help="B-graph JSON for subgraph_presence")
    sp.add_argument("--fit", type=int, metavar="R", help="also fit R coefficients")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--csv", help="also write (k, n, mean, se) rows here")

    sp = add("fit", cmd_fit, "fit expansion coefficients to an estimate report")
    sp.add_argument("--report", required=True)
    sp.add_argument("--r", type=int, required=True)

    sp = add("subgraph-prob", cmd_subgraph_prob, "probability that a B-subgraph occurs")
    sp.add_argument("--base", required=True)
    sp.add_argument("--kind", choices=MODEL_KINDS, default="permutation")
    sp.add_argument("--subgraph", required=True)
    sp.add_argument("--n", default="64,128,256,512")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("c0", cmd_c0, "sum of Tr(H_B^d) over divisors d of k")
    sp.add_argument("--base", required=True)
    sp.add_argument("--k", type=int, required=True)
    return p


def _emit(obj, stream) -> None:
    stream.write(json.dumps(obj, sort_keys=True) + "\n")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        result = args.fn(args)
    except _Unverified as exc:
        _emit({"error": {"code": CapUnverified.code, "message": "cap not verified"},
               "result": exc.payload}, stdout)
        return EXIT_UNVERIFIED
    except CapUnverified as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, stdout)
        return EXIT_UNVERIFIED
    except NBCoverError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, stdout)
        return EXIT_INVALID
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        _emit({"error": {"code": "invalid_input", "message": str(exc)}}, stdout)
        return EXIT_INVALID
    _emit(result, stdout)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
