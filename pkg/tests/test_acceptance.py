"""The ten acceptance criteria, one test each, at their stated tolerances.

A pass/fail line per criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from oracles import brute_clique_number, brute_max_mono_side, small_graph_corpus

from factornorm import linalg
from factornorm.core import BooleanMatrix, Factorization, Graph
from factornorm.discrepancy import disc_exact_small, disc_lower_rounding
from factornorm.gamma2 import gamma2_bracket, gamma2_upper_als
from factornorm.generators import (
    ConstructionParams,
    PointLineParams,
    complete_minus_matching,
    gen_point_line,
    gen_random_boolean,
    gen_structured,
    permutation_blowup,
    tight_example,
)
from factornorm.graphs import c4_lower_certificate, gamma2_upper_from_degeneracy, is_c4_free
from factornorm.maxcut import (
    closed_form_expectation,
    edwards_bound,
    graph_energy,
    hyperplane_round_surplus,
    inverse_maxcut_clique,
    maxcut_exact,
    spectral_embedding,
)
from factornorm.rectangle import brilliant_scan, find_mono_rectangle

# frozen after the point-line sweep (q in {2,3,4,5,8,9}, p in {11,13,17,31})
SHAPE_PRIMES = (11, 13, 17, 31)
# the discrepancy sweep (200 instances) gave ratio >= 0.856 everywhere; the stated 0.5 / 80% rule is kept
DISC_RATIO, DISC_SHARE = 0.5, 0.8


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


def is_connected(G: Graph) -> bool:
    if G.n == 0:
        return True
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(G.adj[v]).tolist():
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == G.n


@pytest.mark.criterion(1)
def test_c1_edwards_equality():
    worst = 0.0
    for n in (3, 5, 7, 9):
        G = gen_structured("complete", n)
        t = time.perf_counter()
        mc = maxcut_exact(G).cut_size
        worst = max(worst, time.perf_counter() - t)
        assert mc == (n // 2) * ((n + 1) // 2)
        assert mc == edwards_bound(G.m)  # exact equality, no tolerance
    assert worst < 1.0
    report(1, True, f"max runtime {worst:.3f} s")


@pytest.mark.criterion(2)
def test_c2_surplus_floor():
    rng = np.random.default_rng(2)
    graphs = [G for G in small_graph_corpus(80, n_max=16) if is_connected(G)]
    while len(graphs) < 120:
        n = int(rng.integers(4, 21))
        A = np.triu(rng.random((n, n)) < rng.uniform(0.1, 0.6), 1)
        G = Graph.from_adjacency(A | A.T)
        if is_connected(G):
            graphs.append(G)
    for G in graphs:
        assert G.n <= 20
        cut = maxcut_exact(G).cut_size
        # surplus >= n/6  <=>  6 (2 cut - m) >= 2 n, in integers
        assert 6 * (2 * cut - G.m) >= 2 * G.n, (G, cut)
    report(2, True, f"{len(graphs)} connected graphs")


@pytest.mark.criterion(3)
def test_c3_blowup_bracket():
    rng = np.random.default_rng(3)
    t = time.perf_counter()
    count = 0
    for s in range(12):
        blocks = [(int(rng.integers(1, 4)), int(rng.integers(1, 4))) for _ in range(int(rng.integers(1, 5)))]
        B = permutation_blowup(blocks, seed=s)
        br = gamma2_bracket(B)
        assert 1 - 1e-6 <= br.lower and br.upper <= 1 + 1e-6, (blocks, br.lower, br.upper)
        count += 1
    elapsed = time.perf_counter() - t
    assert count >= 10 and elapsed < 5
    report(3, True, f"{count} blow-ups in {elapsed:.2f} s")


@pytest.mark.criterion(4)
def test_c4_two_sided_shape():
    t = time.perf_counter()
    lo_r, up_r = [], []
    for q in (2, 3, 4, 5, 8, 9):
        for p in SHAPE_PRIMES:
            M = gen_point_line(PointLineParams(q, p))
            lo = c4_lower_certificate(M) / math.sqrt(q)
            up = gamma2_upper_from_degeneracy(M).bound / math.sqrt(q)
            assert 0.25 <= lo <= 1.1, (q, p, lo)
            assert 1 <= up <= 2.05, (q, p, up)
            lo_r.append(lo)
            up_r.append(up)
    elapsed = time.perf_counter() - t
    assert elapsed < 60
    report(4, True, f"lower/sqrt(q) in [{min(lo_r):.3f}, {max(lo_r):.3f}], "
                    f"upper/sqrt(q) in [{min(up_r):.3f}, {max(up_r):.3f}], {elapsed:.2f} s")


@pytest.mark.criterion(5)
def test_c5_rectangle_soundness():
    rng = np.random.default_rng(5)
    dens = (0.1, 0.3, 0.5, 0.7, 0.9)
    failures = over = small = 0
    for i in range(1000):
        if i % 2:
            m, n = int(rng.integers(1, 13)), int(rng.integers(1, 65))
        else:
            m, n = (int(x) for x in rng.integers(1, 65, size=2))
        if rng.random() < 0.5:
            m, n = n, m
        M = gen_random_boolean(m, n, dens[i % 5], seed=i)
        sel, color = find_mono_rectangle(M, seed=i)
        if not sel.is_constant(M, bool(color)) or sel.side < 1:
            failures += 1
        if min(m, n) <= 12:
            small += 1
            if sel.side > brute_max_mono_side(M):
                over += 1
    assert failures == 0 and over == 0
    report(5, True, f"1000 runs, {small} checked against exhaustive search")


def exact_factorizations(M: BooleanMatrix, rng):
    """ALS, balanced SVD split and a randomly rotated SVD split."""
    A = M.to_float()
    sv = linalg.svd(A)
    r = np.sqrt(sv.singular_values)
    U, V = sv.left * r, r[:, None] * sv.right
    out = [Factorization.of(U, V, A), gamma2_upper_als(M, seed=int(rng.integers(2**31)))]
    k = U.shape[1]
    Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    c = float(rng.uniform(0.3, 3.0))
    out.append(Factorization.of(c * U @ Q, Q.T @ V / c, A))
    return out


@pytest.mark.criterion(6)
def test_c6_brilliance_totality():
    rng = np.random.default_rng(6)
    pairs = 0
    i = 0
    while pairs < 1000:
        m, n = (int(x) for x in rng.integers(1, 25, size=2))
        M = gen_random_boolean(m, n, float(rng.choice([0.1, 0.3, 0.5, 0.7, 0.9])), seed=60_000 + i)
        i += 1
        if M.is_zero():
            continue
        for F in exact_factorizations(M, rng):
            if pairs == 1000:
                break
            assert F.error_against(M) <= 1e-6
            w = brilliant_scan(M, F)
            assert w.score >= w.threshold - 1e-6
            pairs += 1
    report(6, True, f"{pairs} pairs, witness every time")


@pytest.mark.criterion(7)
def test_c7_rounding_calibration():
    t = time.perf_counter()
    graphs = small_graph_corpus(50)
    worst_z = 0.0
    for k, G in enumerate(graphs):
        emb = spectral_embedding(G)
        res = hyperplane_round_surplus(emb, G, trials=512, seed=k)
        cf = closed_form_expectation(emb, G)
        se = res.standard_error
        z = abs(res.mean_cut - cf) / se if se > 0 else (0.0 if abs(res.mean_cut - cf) < 1e-9 else math.inf)
        worst_z = max(worst_z, z)
        assert z <= 4, (G, res.mean_cut, cf, se)
        E = graph_energy(G)
        assert cf >= G.m / 2 + E / (2 * math.pi) - G.n / math.pi - 1e-9, G
    elapsed = time.perf_counter() - t
    assert elapsed < 120
    report(7, True, f"50 graphs, worst |z| = {worst_z:.2f}, {elapsed:.2f} s")


@pytest.mark.criterion(8)
def test_c8_inverse_maxcut_recovery():
    fixture = complete_minus_matching(15, 6)
    assert brute_clique_number(fixture) == 9
    cases = [(gen_structured("complete", 9), 9, True), (gen_structured("disjoint_cliques", (7, 7)), 7, True),
             (fixture, 7, False)]
    sizes = []
    for G, want, exact in cases:
        t = time.perf_counter()
        clique, _ = inverse_maxcut_clique(G)
        elapsed = time.perf_counter() - t
        assert G.is_clique(clique) and elapsed < 30
        assert len(clique) == want if exact else len(clique) >= want
        sizes.append(len(clique))
    report(8, True, f"clique sizes {sizes}")


@pytest.mark.criterion(9)
def test_c9_discrepancy_dominance():
    rng = np.random.default_rng(9)
    dens = (0.1, 0.3, 0.5, 0.7, 0.9)
    good = 0
    for i in range(200):
        m, n = int(rng.integers(1, 13)), int(rng.integers(1, 25))
        if rng.random() < 0.5:
            m, n = n, m
        M = gen_random_boolean(m, n, dens[i % 5], seed=9000 + i)
        exact = disc_exact_small(M).value
        if M.is_zero():
            lower = 0.0
        else:
            lower = disc_lower_rounding(M, gamma2_upper_als(M, seed=i), seed=i).value
        assert lower <= exact + 1e-9
        good += lower >= DISC_RATIO * exact - 1e-12
    assert good >= DISC_SHARE * 200
    report(9, True, f"ratio >= {DISC_RATIO} on {good}/200")


@pytest.mark.criterion(10)
def test_c10_generator_certification():
    for seed in range(20):
        ex = tight_example(ConstructionParams(3, 100, seed=seed))
        F = ex.factorization
        prod = F.product()
        assert np.array_equal(prod, ex.matrix.to_float())
        assert np.all((prod == 0) | (prod == 1))
        # 0/1 factors: squared norms are integer counts, so the certificate is exact
        assert np.all((F.U**2).sum(axis=1) == 3) and np.all((F.V**2).sum(axis=0) == 3)
        assert F.product_norm == pytest.approx(3, abs=1e-12)
    checked = 0
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        for q in range(1, p + 1):
            M = gen_point_line(PointLineParams(q, p))
            assert np.all(M.row_ones == q) and np.all(M.col_ones == q)
            if q <= 9:
                assert is_c4_free(M)[0]
            checked += 1
    report(10, True, f"20 tight examples, {checked} point-line instances")

