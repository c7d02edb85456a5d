"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Statistical criteria use fixed seeds; their outcome is reported as is.
"""

import itertools
import math
import random
import time

from graphgen import random_connected_graph, random_graph, small_types
from acceptance_log import record

from nbcover.certificates import cert_trace_direct, cert_trace_incl_excl
from nbcover.covers import MODEL_KINDS, CoverModel, check_sample, realize, sample_cover, validate_cover
from nbcover.expansion import (
    ExperimentConfig,
    estimate_functional,
    estimate_high_order_snbc,
    estimate_subgraph_prob,
    fit_expansion,
    loglog_slope,
    reference_c0,
)
from nbcover.graph import (
    OrderedGraph,
    bouquet,
    from_edge_list,
    identity_bgraph,
    iter_injections,
    theta_graph,
)
from nbcover.mobius import b_structures, derived_classes, meets, psi_image, truncated_indicator
from nbcover.spectral import mu1, shannon_mu1, trace_hashimoto_pow
from nbcover.tangles import has_tangle, has_tangle_bruteforce, minimal_tangles
from nbcover.walks import LengthedType, build_vlg, count_snbc, count_snbc_order_split

SEED = 1
N_GRID = (64, 128, 256, 512)
MC_SAMPLES = 10_000


def test_criterion_1_trace_equals_walk_count():
    rng = random.Random(SEED)
    start = time.time()
    bad = 0
    for _ in range(200):
        g = random_graph(rng, 10)
        for k in range(1, 9):
            bad += count_snbc(g, k) != trace_hashimoto_pow(g, k)
    elapsed = time.time() - start
    ok = bad == 0 and elapsed < 60
    record(1, ok, f"{bad} mismatches over 200 graphs x k<=8, {elapsed:.1f}s")
    assert ok


def test_criterion_2_shannon_matches_explicit():
    start = time.time()
    worst, count = 0.0, 0
    for g in small_types(4):
        ot = OrderedGraph(g, g.vertices, g.edge_orbits)
        free = [e for e in ot.orientation if g.inv[e] != e]
        for vec in itertools.product(range(1, 7), repeat=len(free)):
            lengths = {e: 1 for e in ot.orientation}
            lengths.update(zip(free, vec))
            lt = LengthedType(ot, lengths)
            worst = max(worst, abs(shannon_mu1(lt) - mu1(build_vlg(lt))))
            count += 1
    elapsed = time.time() - start
    ok = worst <= 1e-7 and elapsed < 120
    record(2, ok, f"max deviation {worst:.2e} over {count} lengthed types, {elapsed:.1f}s")
    assert ok


def test_criterion_3_vlg_monotone():
    rng = random.Random(SEED)
    types = small_types(4)
    bad = 0
    for _ in range(500):
        g = rng.choice(types)
        ot = OrderedGraph(g, g.vertices, g.edge_orbits)
        k, k2 = {}, {}
        for e in ot.orientation:
            if g.inv[e] == e:
                k[e] = k2[e] = 1
            else:
                k[e] = rng.randint(1, 8)
                k2[e] = k[e] + rng.choice([0, 0, 1, 2, 5])
        a = shannon_mu1(LengthedType(ot, k))
        b = shannon_mu1(LengthedType(ot, k2))
        bad += a < b - 1e-9
    record(3, bad == 0, f"{bad} violations over 500 pairs")
    assert bad == 0


def test_criterion_4_inclusion_exclusion():
    rng = random.Random(SEED)
    bad, checks = 0, 0
    for _ in range(100):
        g = random_graph(rng, 8, max_vertices=5, max_degree=4)
        nu = rng.choice([1.5, 1.8, 2.5])
        r = rng.randint(1, 3)
        for k in range(1, 9):
            bad += cert_trace_incl_excl(g, nu, r, k) != cert_trace_direct(g, nu, r, k)
            checks += 1
    record(4, bad == 0, f"{bad} mismatches over {checks} (graph, nu, r, k)")
    assert bad == 0


def test_criterion_5_tangle_free_certified_trace():
    rng = random.Random(SEED)
    specs = {(nu, r): minimal_tangles(nu, r) for nu, r in [(1.8, 2), (2.5, 2), (1.8, 3)]}
    bases = [bouquet(2), bouquet(1, 1)]
    found, bad, draws = 0, 0, 0
    while found < 100:
        draws += 1
        (nu, r), spec = rng.choice(sorted(specs.items()))
        base = rng.choice(bases)
        kind = "permutation" if not base.has_half_loops else "permutation-involution-even"
        n = 2 * rng.randint(3, 15)
        g = realize(sample_cover(base, n, kind, SEED, stream=(5, draws))).graph
        if has_tangle(g, spec):
            continue
        found += 1
        for k in range(1, 9):
            bad += cert_trace_direct(g, nu, r, k) != count_snbc_order_split(g, k, r)[0]
    record(5, bad == 0, f"{bad} mismatches on {found} tangle-free covers ({draws} drawn), k<=8")
    assert bad == 0


def _is_antichain(gens) -> bool:
    for a, b in itertools.permutations(gens, 2):
        if a.n_edges <= b.n_edges and next(iter_injections(a, b), None) is not None:
            return False
    return True


def test_criterion_6_minimal_tangles_and_detection():
    spec = minimal_tangles(3.0, 2, cap=8)
    antichain = _is_antichain(spec.generators)
    rng = random.Random(SEED)
    specs = {p: minimal_tangles(*p) for p in [(3.0, 2), (2.0, 2), (1.8, 2), (1.5, 2), (1.8, 3)]}
    bad = 0
    for _ in range(100):
        g = random_connected_graph(rng, 14)
        nu, r = rng.choice(sorted(specs))
        bad += has_tangle(g, specs[(nu, r)]) != has_tangle_bruteforce(g, nu, r)
    ok = spec.verified and antichain and bad == 0
    record(6, ok, f"{len(spec.generators)} generators, verified={spec.verified}, "
                  f"antichain={antichain}, {bad} detection mismatches over 100 graphs")
    assert ok


def _generator_pool(base):
    eight12 = from_edge_list([0, 1], [(0, 0), (0, 1), (1, 0)])
    dumbbell = from_edge_list([0, 1], [(0, 0), (0, 1), (1, 1)])
    pool = []
    for g in (bouquet(2), theta_graph((1, 1, 1)), eight12, dumbbell):
        pool.extend(b_structures(g, base))
    return pool


def test_criterion_7_mobius():
    rng = random.Random(SEED)
    base = bouquet(2)
    pool = _generator_pool(base)
    tables = []
    for _ in range(10):
        gens = rng.sample(pool, rng.randint(1, 2))
        tables.append(derived_classes(gens, rng.choice([2, 3])))
    identity_ok = all(t.check_identity() for t in tables)
    n_classes = sum(len(t.classes) for t in tables)
    instances, bad, draws = 0, 0, 0
    while instances < 200:
        draws += 1
        table = tables[draws % len(tables)]
        n = rng.randint(1, 4)
        g = realize(sample_cover(base, n, "permutation", SEED, stream=(7, draws)))
        orbits = list(g.graph.edge_orbits)
        keep = [e for e in orbits if rng.random() < 0.8]
        g = g.subgraph(keep + [g.graph.inv[e] for e in keep])
        _, ord_psi = psi_image(g, table)
        if ord_psi >= table.r:
            continue
        instances += 1
        want = 1 if meets(g, table) else 0
        bad += truncated_indicator(g, table, table=table) != want
    ok = identity_ok and bad == 0
    record(7, ok, f"identity holds on {n_classes} classes of 10 tables: {identity_ok}; "
                  f"{bad} indicator mismatches over {instances} instances")
    assert ok


def test_criterion_8_zeroth_coefficient():
    base = bouquet(2)
    cfg = ExperimentConfig(base=base, model=CoverModel("permutation"), nu=1.8, r=2,
                           k_list=range(1, 7), n_list=N_GRID, samples_per_n=MC_SAMPLES,
                           seed=SEED, trace_kind="tanglefree_plain")
    start = time.time()
    report = estimate_functional(cfg)
    coefs, _ = fit_expansion(report.raw, 2)
    elapsed = time.time() - start
    # the verdict uses the two-term fit; the three-term one is reported alongside
    coefs3, _ = fit_expansion(report.raw, 3)
    parts, extra, ok = [], [], True
    for k in range(1, 7):
        est, se = coefs[(k, 0)]
        ref = reference_c0(base, k)
        z = (est - ref) / se
        ok = ok and abs(z) <= 3
        parts.append(f"k={k}: {est:.2f}+-{se:.2f} vs {ref} (z={z:+.2f})")
        extra.append(f"{(coefs3[(k, 0)][0] - ref) / coefs3[(k, 0)][1]:+.2f}")
    ok = ok and elapsed < 1800
    record(8, ok, "; ".join(parts) + f"; {elapsed:.0f}s; three-term fit z: {', '.join(extra)}")
    assert ok


def test_criterion_9_tangle_and_subgraph_decay():
    base = bouquet(2)
    cfg = ExperimentConfig(base=base, model=CoverModel("permutation"), nu=1.8, r=2,
                           k_list=(1,), n_list=N_GRID, samples_per_n=MC_SAMPLES,
                           seed=SEED, trace_kind="tanglefree_prob")
    report = estimate_functional(cfg)
    has = {n: (1.0 - report.raw[(1, n)][0], report.raw[(1, n)][1]) for n in N_GRID}
    s1, e1 = loglog_slope(has)
    eight = identity_bgraph(base)
    pres = estimate_subgraph_prob(base, "permutation", eight, N_GRID, MC_SAMPLES, SEED)
    s2, e2 = loglog_slope(pres)
    ok = abs(s1 + 1) <= 0.15 and abs(s2 + 1) <= 0.15
    record(9, ok, f"HasTangles slope {s1:.3f}+-{e1:.3f} (p={[round(has[n][0], 4) for n in N_GRID]}); "
                  f"figure-eight slope {s2:.3f}+-{e2:.3f} (p={[round(pres[n][0], 4) for n in N_GRID]})")
    assert ok


def test_criterion_10_high_order_walks_decay():
    base = bouquet(2)
    table = estimate_high_order_snbc(base, "permutation", 1, 2, N_GRID, MC_SAMPLES, SEED)
    slope, se = loglog_slope(table)
    ok = abs(slope + 1) <= 0.15
    record(10, ok, f"slope {slope:.3f}+-{se:.3f}, n*mean={[round(n * table[n][0], 2) for n in N_GRID]}")
    assert ok


def test_criterion_11_cover_models_valid():
    rng = random.Random(SEED)
    bad, total = 0, 0
    for kind in MODEL_KINDS:
        model = CoverModel(kind)
        base = bouquet(1, 1) if model.involution else bouquet(2)
        for j in range(MC_SAMPLES):
            n = rng.randint(1, 12)
            if not model.admits(n):
                n += 1
            c = sample_cover(base, n, model, SEED, stream=(11, j))
            bad += not (check_sample(c) and validate_cover(realize(c)))
            total += 1
    record(11, bad == 0, f"{bad} failures over {total} samples, {len(MODEL_KINDS)} model kinds")
    assert bad == 0


def test_reference_values_are_exact():
    assert [reference_c0(bouquet(2), k) for k in (1, 4, 6)] == [4, 100, 776]
    assert math.isclose(mu1(bouquet(2)), 3.0)
