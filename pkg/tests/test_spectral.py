import itertools
import math

import numpy as np
import pytest

from hdxlab.buildings import (
    complete_complex,
    complex_view,
    sb_type_a,
    sb_type_c,
)
from hdxlab.dist import PartiteDistribution, bipartite_graph, tripartite_graph
from hdxlab.spectral import (
    bipartite_operator,
    epsilon_product_audit,
    lambda2_signed,
    local_spectral_audit,
    mixing_check,
    power_iteration_sigma2,
    restriction_blowup_estimate,
    sampling_check,
    second_singular_value,
    trickling_down_bound,
    tripartite_second_singular,
)


def _product_dist(sizes):
    labels = tuple(range(1, len(sizes) + 1))
    rows = list(itertools.product(*[range(s) for s in sizes]))
    return PartiteDistribution.from_rows(labels, rows)


def fano_graph():
    return bipartite_graph(sb_type_a(2, 2), (1,), (2,))


def test_top_singular_value_is_one():
    g = fano_graph()
    s, _, _ = bipartite_operator(g)
    sv = np.linalg.svd(s, compute_uv=False)
    assert abs(sv[0] - 1.0) < 1e-9


def test_product_bipartite_sigma2_zero():
    g = bipartite_graph(_product_dist([3, 4]), (1,), (2,))
    assert second_singular_value(g) < 1e-9


def test_fano_sigma2_closed_form():
    # point-line incidence of PG(2,2): B B^T = 2I + J, so sigma2 = sqrt(2)/3
    g = fano_graph()
    assert abs(second_singular_value(g) - math.sqrt(2) / 3) < 1e-9


def test_grassmann_incidence_trend_in_q():
    vals = {}
    for q in (2, 3, 5):
        g = bipartite_graph(sb_type_a(2, q), (1,), (2,))
        vals[q] = second_singular_value(g)
        # PG(2, q) incidence: sigma2 = sqrt(q)/(q+1), closed form
        assert abs(vals[q] - math.sqrt(q) / (q + 1)) < 1e-9
    assert vals[2] > vals[3] > vals[5]


def test_power_iteration_matches_dense():
    for g in (fano_graph(), bipartite_graph(sb_type_a(2, 3), (1,), (2,))):
        s, _, _ = bipartite_operator(g)
        dense = np.linalg.svd(s, compute_uv=False)[1]
        pi = power_iteration_sigma2(s)
        assert abs(dense - pi) < 1e-6


def test_tripartite_product_exactly_half():
    g = tripartite_graph(_product_dist([2, 3, 2]), (1,), (2,), (3,))
    assert abs(tripartite_second_singular(g) - 0.5) < 1e-9


def test_tripartite_single_vertex_parts_degenerate():
    # single-vertex parts form a K_3, which is itself an exact product
    # distribution: sigma2 = 1/2 exactly, and nothing crashes
    g = tripartite_graph(_product_dist([1, 1, 1]), (1,), (2,), (3,))
    assert abs(tripartite_second_singular(g) - 0.5) < 1e-9
    # a two-vertex union graph is genuinely degenerate: sigma2 = 0
    g2 = tripartite_graph(_product_dist([1, 1]), (), (1,), (2,))
    assert tripartite_second_singular(g2) >= 0.0


def test_audit_product_distribution_zero():
    res = epsilon_product_audit(_product_dist([2, 3, 2]))
    assert res.certified
    assert res.eps < 1e-9


def test_audit_monotone_in_conditioning():
    mu = sb_type_a(2, 3)
    full = epsilon_product_audit(mu)
    v = mu.marginal((1,)).rows[0]  # already a 1-tuple
    cond = epsilon_product_audit(mu.condition((1,), v))
    assert cond.eps <= full.eps + 1e-12


def test_audit_building_range_and_decrease():
    vals = []
    for q in (2, 3):
        res = epsilon_product_audit(sb_type_a(3, q))
        assert 0.0 < res.eps < 0.8
        vals.append(res.eps)
    assert vals[1] < vals[0]


def test_mixing_check_trivial_and_random():
    g = fano_graph()
    left, right = g.parts
    assert mixing_check(g, set(left), set(right[:3])) >= -1e-9
    assert mixing_check(g, set(), set(right[:2])) >= -1e-9
    rng = np.random.default_rng(0)
    lam = second_singular_value(g)
    for _ in range(100):
        a = {v for v in left if rng.random() < 0.5}
        b = {v for v in right if rng.random() < 0.5}
        assert mixing_check(g, a, b, lam=lam) >= -1e-9


def test_sampling_check_trivial_and_random():
    g = fano_graph()
    left = g.parts[0]
    tail, bound = sampling_check(g, set(), 0.1)
    assert tail == 0.0
    tail, bound = sampling_check(g, set(left), 0.1)
    assert tail == 0.0
    rng = np.random.default_rng(1)
    lam = second_singular_value(g)
    for _ in range(50):
        b = {v for v in left if rng.random() < 0.4}
        tail, bound = sampling_check(g, b, 0.25, lam=lam)
        assert tail <= bound + 1e-9


def test_trickling_down_product_zero():
    mu = _product_dist([3, 3])
    x = complex_view(mu)
    assert abs(trickling_down_bound(x)) < 1e-9


def test_trickling_down_building():
    x = complex_view(sb_type_c(2, 3))
    bound = trickling_down_bound(x)
    gamma = local_spectral_audit(x)
    assert gamma <= bound + 1e-9


def test_trickling_down_monotone_formula():
    f = lambda lam, d: lam / (1 - (d - 1) * lam)
    assert f(0.1, 3) < f(0.2, 3)


def test_local_spectral_audit_complete_complex():
    # dense eigensolve oracle: every link skeleton is a complete graph K_m
    # with lambda2 = -1/(m-1); the max is the full skeleton K_n, -1/(n-1)
    x = complete_complex(10, 4)
    gamma = local_spectral_audit(x)
    assert abs(gamma - (-1.0 / 9.0)) < 1e-9
    assert abs(gamma) <= 1.0 / (10 - 4)


def test_local_spectral_audit_plain_graph():
    # a 2-dimensional complex is just a weighted graph: gamma = lambda2
    x = complete_complex(6, 2)
    gamma = local_spectral_audit(x)
    assert abs(gamma - lambda2_signed(x.skeleton())) < 1e-12


def test_restriction_blowup_zero_function():
    rng = np.random.default_rng(2)
    mu = _product_dist([3, 3, 3, 3])
    est, ref = restriction_blowup_estimate(mu, lambda row: False, 2, 0.5, 200, rng)
    assert est == 0.0


def test_restriction_blowup_pinned_coordinate():
    # f = indicator of one value of coordinate 1; conditioning that pins the
    # coordinate forces the restricted mean into {0, 1}
    rng = np.random.default_rng(3)
    mu = _product_dist([101, 3, 3, 3])
    f = lambda row: row[0] == 0
    est, ref = restriction_blowup_estimate(mu, f, 1, 0.995, 400, rng)
    # mean(f) = 1/101; restriction hits coordinate 1 w.p. 1/4 and then pins
    # the conditional mean to 1 w.p. 1/101
    assert est <= 0.05
    expected = 0.25 / 101
    assert abs(est - expected) < 0.02


def test_restriction_blowup_precondition():
    rng = np.random.default_rng(4)
    mu = _product_dist([2, 2])
    with pytest.raises(ValueError):
        restriction_blowup_estimate(mu, lambda row: True, 1, 0.5, 10, rng)


def test_disjoint_set_singular_value_tracks_audit():
    # second singular value of A(L, R) for larger index sets stays small as
    # the audited epsilon shrinks with q (monotone-in-epsilon check; no
    # constant is asserted)
    pairs = []
    for q in (2, 3):
        mu = sb_type_a(3, q)
        eps = epsilon_product_audit(mu).eps
        g = bipartite_graph(mu, (1,), (2, 3))
        pairs.append((eps, second_singular_value(g)))
    (e2, s2), (e3, s3) = pairs
    assert e3 < e2
    assert s3 < s2
