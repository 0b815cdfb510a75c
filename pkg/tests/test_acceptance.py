"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s`` to see only the
criterion lines; the lines are also printed live under a normal ``pytest -v``.
"""

import itertools
import math
import time
from contextlib import contextmanager

import networkx as nx
import numpy as np
import pytest

from classical_oracle import CLASSICAL, h2, h2_inverse
from tmcodes.algebra import bitmatrix_rank, gf, pack_columns
from tmcodes.bounds import (
    inv_entropy,
    plotkin_size_bound,
    punctured_plotkin_size_bound,
    sphere_volume_bounds,
    sweep_bounds,
)
from tmcodes.concat import build_concat_code, chunked_noise, concat_encode, gmd_experiment, received_distance
from tmcodes.gvcodes import (
    AmbiguousDecoding,
    certify_codebook,
    draw_generator,
    gv_construct_coherent,
    gv_construct_noncoherent,
    linear_distance_check,
    linear_gv_dimension,
    md_decode,
    md_decode_batch,
)
from tmcodes.metric import build_coset_table, check_metric_axioms, transform_distance
from tmcodes.network import enumerate_noise_supports, instance_from_matrix, noise_budget, transmit
from tmcodes.reedsolomon import RSCode, rs_decode_errors_erasures


@contextmanager
def criterion(capsys, number, title, limit):
    """Time the block, enforce the runtime limit and print one verdict line."""
    detail = {}
    start = time.perf_counter()
    ok = False
    try:
        yield detail
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        info = " ".join(f"{k}={v}" for k, v in detail.items())
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}: {title} "
                  f"[{elapsed:.2f}s / {limit}s] {info}")


def three_edge_gf4():
    inst = instance_from_matrix(gf(2), [[1, 0, 1], [0, 1, 2]])
    assert inst.mds_certified
    return inst


# 1 ---------------------------------------------------------------------------


def test_criterion_1_classical_reduction(capsys):
    with criterion(capsys, 1, "classical reduction at C=E=m=1", 1.0) as info:
        grid = np.linspace(0, 0.25, 100)
        curve = sweep_bounds(1, 1, 1, grid)
        pairs = {"hamming": "hamming", "plotkin": "plotkin", "elias_bassalygo": "elias_bassalygo",
                 "gv_coherent": "gv", "zyablov": "zyablov"}
        worst = 0.0
        for ours, theirs in pairs.items():
            ref = np.array([CLASSICAL[theirs](float(p)) for p in grid])
            worst = max(worst, float(np.max(np.abs(curve.rates[ours] - ref))))
        info["max_abs_diff"] = f"{worst:.2e}"
        assert worst <= 1e-9


# 2 ---------------------------------------------------------------------------


@pytest.mark.parametrize("C,E,m", [(4, 8, 2), (2, 9, 3)])
def test_criterion_2_curve_shapes(capsys, C, E, m):
    with criterion(capsys, 2, f"bound curve shapes at E={E} C={C} m={m}", 1.0) as info:
        p0 = inv_entropy(C / E) / 2
        grid = np.unique(np.concatenate([np.linspace(0, 0.25, 201), [p0 - 1e-6, p0, p0 + 1e-6]]))
        curve = sweep_bounds(C, E, m, grid)
        r = curve.rates
        valid = curve.asserted["hamming"] & curve.asserted["elias_bassalygo"]
        upper = np.minimum.reduce([r["hamming"], r["elias_bassalygo"], r["plotkin"]])
        tol = 1e-12
        assert np.all(r["zyablov"][valid] <= r["gv_coherent"][valid] + tol)
        assert np.all(r["gv_coherent"][valid] <= upper[valid] + tol)
        for name in ("hamming", "plotkin", "elias_bassalygo", "gv_coherent", "gv_noncoherent", "zyablov"):
            assert r[name][0] == 1.0, name
        if (C, E) == (4, 8):
            assert np.array_equal(r["plotkin"], np.maximum(0.0, 1 - 4 * grid))
            assert r["plotkin"][grid == 0.25][0] == 0.0
        # zero crossing of the GV curve, cross-checked with an independent root finder
        i = int(np.flatnonzero(grid == p0)[0])
        assert r["gv_coherent"][i - 1] > 0 and r["gv_coherent"][i + 1] == 0
        assert abs(r["gv_coherent"][i]) <= 1e-6
        assert abs(p0 - h2_inverse(C / E) / 2) <= 1e-9
        info["valid_points"] = int(valid.sum())
        info["gv_zero_at"] = f"{p0:.9f}"


# 3 ---------------------------------------------------------------------------


def subset_weights(B):
    """Fewest columns of B per syndrome, by listing the XOR of every column subset."""
    cols = [int(c) for c in pack_columns(B)]
    xors = np.zeros(1 << len(cols), dtype=np.int64)
    for j, c in enumerate(cols):
        xors[1 << j: 2 << j] = xors[: 1 << j] ^ c
    sizes = np.array([bin(i).count("1") for i in range(1 << len(cols))])
    best = np.full(1 << B.shape[0], np.iinfo(np.int64).max)
    np.minimum.at(best, xors, sizes)
    return best


def test_criterion_3_transform_metric(capsys):
    with criterion(capsys, 3, "transform distance vs subset oracle and metric axioms", 30.0) as info:
        rng = np.random.default_rng(3)
        mismatches = violations = triples = 0
        for trial in range(1000):
            a = int(rng.integers(1, 9))
            c = int(rng.integers(a, 13))
            while True:
                B = rng.integers(0, 2, size=(a, c), dtype=np.uint8)
                if bitmatrix_rank(B) == a:
                    break
            table = build_coset_table(B)
            oracle = subset_weights(B)
            n = int(rng.integers(1, 6))
            M1, M2 = rng.integers(0, 2, size=(2, a, n), dtype=np.uint8)
            expected = int(oracle[pack_columns(M1 ^ M2)].sum())
            mismatches += transform_distance(table, M1, M2) != expected
            mismatches += not np.array_equal(table.weights, oracle)
            report = check_metric_axioms(table, samples=10, seed=trial)
            violations += sum(report.violations.values())
            triples += report.samples
        info["generators"] = 1000
        info["mismatches"] = mismatches
        info["triples"] = triples
        info["axiom_violations"] = violations
        assert mismatches == 0 and violations == 0 and triples == 10_000


# 4 ---------------------------------------------------------------------------


def test_criterion_4_gv_unique_decoding(capsys, relay_instance):
    with criterion(capsys, 4, "coherent GV codes decode every pattern within budget", 300.0) as info:
        cases = [(relay_instance, 3, 2), (relay_instance, 4, 2), (relay_instance, 4, 1),
                 (three_edge_gf4(), 4, 2)]
        checked = failures = ambiguities = 0
        for inst, n, budget in cases:
            Em = inst.E * inst.m
            assert inst.C * inst.m <= 6 and Em <= 9 and n <= 4 and budget <= 2
            p = budget / (Em * n)
            assert noise_budget(p, inst.E, inst.m, n) == budget
            book = gv_construct_coherent(inst, p, n, seed=0)
            hat = pack_columns(inst.T_hat)
            supports = list(enumerate_noise_supports(budget, Em, n))
            noise = np.zeros((len(supports), n), dtype=np.int64)
            for i, sup in enumerate(supports):
                for flat in sup:
                    noise[i, flat % n] ^= hat[flat // n]
            W = book.transformed_columns(inst)
            for j in range(len(book)):
                idx, _, ties = md_decode_batch(book, inst, W[j][None, :] ^ noise)
                checked += len(noise)
                failures += int(np.count_nonzero((idx != j) & ~ties))
                ambiguities += int(np.count_nonzero(ties))
            # the scalar decoder agrees on a sample of explicit transmissions
            rng = np.random.default_rng(n)
            for _ in range(50):
                j = int(rng.integers(len(book)))
                Z = np.zeros(Em * n, dtype=np.uint8)
                Z[list(supports[int(rng.integers(len(supports)))])] = 1
                try:
                    failures += md_decode(book, inst, transmit(inst, book.matrix(j), Z.reshape(Em, n))) != j
                except AmbiguousDecoding:
                    ambiguities += 1
        info["received_words"] = checked
        info["failures"] = failures
        info["ambiguities"] = ambiguities
        assert failures == 0 and ambiguities == 0


# 5 ---------------------------------------------------------------------------


LINEAR_CASES = [
    # (label, instance factory, n, budget, k - C)
    ("classical C=E=m=1", lambda: instance_from_matrix(gf(1), [[1]]), 16, 1, 4),
    ("C=2 E=3 m=1", lambda: instance_from_matrix(gf(1), [[1, 0, 1], [0, 1, 1]]), 12, 1, 4),
    ("relay C=2 E=4 m=2", None, 12, 1, 4),
]


@pytest.mark.parametrize("label,factory,n,budget,extra", LINEAR_CASES, ids=[c[0] for c in LINEAR_CASES])
def test_criterion_5_linear_gv(capsys, relay_instance, label, factory, n, budget, extra):
    with criterion(capsys, 5, f"linear GV failure rate, {label}", 300.0) as info:
        inst = factory() if factory else relay_instance
        C, E, m = inst.C, inst.E, inst.m
        N = E * m * n
        p = budget / N
        # choose epsilon so that k - C = (1 - (E/C) H(2p) - epsilon) n is an exact integer
        epsilon = 1 - E / C * h2(2 * p) - extra / n
        k = linear_gv_dimension(C, E, p, n, epsilon)
        assert k - C == extra
        d = 2 * budget + 1
        bound = (2 * p * N + 1) * 2.0 ** (-epsilon * C * m * n)
        seeds = 1000
        failed = 0
        for seed in range(seeds):
            G = draw_generator(np.random.default_rng(seed), k * m, n)
            failed += not linear_distance_check(inst, G, k, d)[0]
        rate = failed / seeds
        b = min(bound, 1.0)
        slack = 3 * math.sqrt(b * (1 - b) / seeds)
        info["epsilon"] = f"{epsilon:.4f}"
        info["failure_rate"] = rate
        info["bound"] = f"{bound:.4g}"
        info["slack"] = f"{slack:.4g}"
        assert rate <= bound + slack


# 6 ---------------------------------------------------------------------------


def test_criterion_6_rs_errors_and_erasures(capsys):
    with criterion(capsys, 6, "RS [6,2] errors-and-erasures exhaustive", 60.0) as info:
        ctx = gf(3)
        rs = RSCode(ctx, 6, 2)
        rng = np.random.default_rng(6)
        decoded = wrong = 0
        for _ in range(20):
            msg = rng.integers(0, ctx.size, size=2)
            word = rs.encode(msg)
            patterns = [(None, ())]
            patterns += [(pos, ()) for pos in range(6)]
            patterns += [(None, er) for s in (1, 2) for er in itertools.combinations(range(6), s)]
            patterns += [(pos, er) for pos in range(6) for s in (1, 2)
                         for er in itertools.combinations([i for i in range(6) if i != pos], s)]
            for pos, erased in patterns:
                values = range(1, ctx.size) if pos is not None else [0]
                for value in values:
                    e, s = int(pos is not None), len(erased)
                    assert 2 * e + s < rs.d
                    r = word.copy()
                    if pos is not None:
                        r[pos] ^= value
                    r[list(erased)] = rng.integers(0, ctx.size, size=s)
                    got = rs_decode_errors_erasures(rs, r, list(erased))
                    decoded += 1
                    wrong += not np.array_equal(got, msg)
        info["decodes"] = decoded
        info["wrong"] = wrong
        assert wrong == 0


# 7 ---------------------------------------------------------------------------


def test_criterion_7_gmd(capsys, relay_instance):
    with criterion(capsys, 7, "randomized GMD mean(2e+s) < d_out, sweep GMD always succeeds", 600.0) as info:
        code = build_concat_code(relay_instance, b=3, d_in=3, K_out=2, seed=0, N_out=6)
        report = gmd_experiment(code, 10_000, seed=7, modes=("randomized", "sweep"))
        weights = {r.noise_weight for r in report.records}
        assert max(weights) < code.d_out * code.d_in / 2
        # spot check the received distance itself on a few trials
        rng = np.random.default_rng(0)
        for _ in range(20):
            msg = rng.integers(0, 2, size=code.message_bits)
            Y = transmit(code.instance, concat_encode(code, msg), chunked_noise(code, max(weights), rng))
            assert received_distance(code, msg, Y) < code.d_out * code.d_in / 2
        mean, upper = report.mean_upper_confidence("randomized")
        sweep = report.success_rate("sweep")
        info["d_out"] = code.d_out
        info["mean_2e_plus_s"] = f"{mean:.4f}"
        info["upper99"] = f"{upper:.4f}"
        info["sweep_success"] = sweep
        info["randomized_success"] = report.success_rate("randomized")
        assert len(report.by_mode("randomized")) == 10_000
        assert upper < code.d_out
        assert sweep == 1.0


# 8 ---------------------------------------------------------------------------


def enumerated_ball_sizes(inst, n):
    """Distinct T_hat Z for every Z, grouped by weight: list of cumulative counts."""
    hat = [int(c) for c in pack_columns(inst.T_hat)]
    Em, Cm = len(hat), inst.C * inst.m
    N = Em * n
    images = np.zeros(1 << N, dtype=np.int64)
    for bit in range(N):
        row, col = divmod(bit, n)
        images[1 << bit: 2 << bit] = images[: 1 << bit] ^ (hat[row] << (col * Cm))
    weights = np.array([bin(i).count("1") for i in range(1 << N)])
    return [np.unique(images[weights <= r]).size for r in range(N + 1)]


def test_criterion_8_sphere_sandwich(capsys, relay_instance):
    with criterion(capsys, 8, "sphere volume sandwich on tiny certified instances", 60.0) as info:
        cases = [(relay_instance, (1, 2)), (three_edge_gf4(), (1, 2)),
                 (instance_from_matrix(gf(1), [[1, 0, 1], [0, 1, 1]]), (1, 2, 3, 4)),
                 (instance_from_matrix(gf(1), [[1]]), (1, 2, 3, 4, 8))]
        lower_checked = upper_checked = 0
        for inst, ns in cases:
            C, E, m = inst.C, inst.E, inst.m
            for n in ns:
                sizes = enumerated_ball_sizes(inst, n)
                for radius, size in enumerate(sizes):
                    vol = sphere_volume_bounds(radius, C, E, m, n, inst)
                    assert vol.exact == size
                    if vol.lower_valid:
                        assert vol.log2_lower <= math.log2(size) + 1e-12
                        lower_checked += 1
                    if vol.upper_valid:
                        assert math.log2(size) <= vol.log2_upper + 1e-12
                        upper_checked += 1
        info["lower_checks"] = lower_checked
        info["upper_checks"] = upper_checked
        assert lower_checked > 0 and upper_checked > 0


# 9 ---------------------------------------------------------------------------


def maximum_code_size(inst, n, d):
    """Largest code with pairwise transform distance >= d, by exact clique search."""
    Cm = inst.C * inst.m
    table = inst.table
    space = np.arange(1 << (Cm * n), dtype=np.int64)
    cols = np.stack([(space >> (i * Cm)) & ((1 << Cm) - 1) for i in range(n)], axis=1)
    W = inst.transfer_map()[cols]
    graph = nx.Graph()
    graph.add_nodes_from(range(space.size))
    for i in range(space.size):
        dist = table.column_weights(W[i] ^ W[i + 1:]).sum(axis=1)
        graph.add_edges_from((i, i + 1 + j) for j in np.flatnonzero(dist >= d))
    return len(nx.max_weight_clique(graph, weight=None)[0])


def test_criterion_9_plotkin_type_sizes(capsys, relay_instance):
    with criterion(capsys, 9, "maximal codebooks within Plotkin-type size bounds", 600.0) as info:
        cases = [
            ("wire", instance_from_matrix(gf(1), [[1]]), range(2, 9)),
            ("two wires", instance_from_matrix(gf(1), [[1, 0], [0, 1]]), range(1, 4)),
            ("mixed pair", instance_from_matrix(gf(1), [[1, 1], [0, 1]]), range(1, 4)),
            ("split C=1 E=2", instance_from_matrix(gf(1), [[1, 1]]), range(2, 9)),
            ("C=2 E=3", instance_from_matrix(gf(1), [[1, 0, 1], [0, 1, 1]]), range(1, 5)),
            ("relay", relay_instance, range(1, 4)),
        ]
        high = low = exact_runs = unreachable = 0
        for _, inst, ns in cases:
            C, E, m = inst.C, inst.E, inst.m
            for n in ns:
                top = n * int(inst.table.covering_radius)
                for d in range(1, top + 2):
                    sizes = []
                    for seed in range(3):
                        book = gv_construct_noncoherent([inst], 0.0, n, seed, min_distance=d)
                        assert certify_codebook(book, inst) >= d or len(book) == 1
                        sizes.append(len(book))
                    if (1 << (C * m * n)) <= 64:
                        sizes.append(maximum_code_size(inst, n, d))
                        exact_runs += 1
                    biggest = max(sizes)
                    hi = plotkin_size_bound(d, C, E, m, n)
                    lo = punctured_plotkin_size_bound(d, C, E, m, n)
                    if hi is not None:
                        assert biggest <= hi
                        high += 1
                    elif E >= 2 * C:
                        unreachable += 1
                    if lo is not None:
                        assert biggest <= lo
                        low += 1
        info["high_distance_checks"] = high
        info["punctured_checks"] = low
        info["exact_maxima"] = exact_runs
        info["E>=2C_high_regime_unreached"] = unreachable
        assert high > 0 and low > 0
