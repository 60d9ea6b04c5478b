import math

import numpy as np
import pytest

from hdxlab.buildings import complete_complex
from hdxlab.dpt import corrupt, decode_majority, encode, level_faces, run_tester


def _encoded(n=8, d=5, k=4, seed=0):
    x = complete_complex(n, d)
    rng = np.random.default_rng(seed)
    f = {v: int(rng.integers(0, 2)) for v in range(n)}
    return x, f, encode(f, x, k)


def test_level_faces_closed_form_matches_enumeration():
    x = complete_complex(7, 4)
    faces, w = level_faces(x, 3)
    generic = x.level_distribution(3)
    assert set(faces) == set(generic.keys())
    for face, wt in zip(faces, w):
        assert abs(wt - generic[face]) < 1e-12


def test_encode_all_zero_and_roundtrip():
    x = complete_complex(6, 4)
    zero = {v: 0 for v in range(6)}
    t0 = encode(zero, x, 3)
    assert all(v == 0 for v in t0.table.values())
    _, f, table = _encoded()
    dec, eta = decode_majority(table, 0.0)
    assert dec == f
    assert eta == 1.0


def test_encode_requires_total_function():
    x = complete_complex(6, 4)
    with pytest.raises(ValueError):
        encode({0: 1}, x, 3)


def test_tester_completeness_exact_mode():
    x, f, table = _encoded(8, 5, 4)
    # exact mode: 56 * C(5,2) * C(3,2) = 1680 tuples
    acc = run_tester(table, t=2)
    assert acc == 1.0


def test_tester_completeness_sampled_mode():
    x, f, table = _encoded(12, 8, 5, seed=3)
    acc = run_tester(table, t=2, samples=2000,
                     rng=np.random.default_rng(1), exact_budget=10)
    assert acc == 1.0


def test_tester_t_zero():
    x, f, table = _encoded()
    assert run_tester(table, t=0) == 1.0


def test_random_table_acceptance_near_collision_corrected_rate():
    # fully resampled table: entries are independent uniform bit strings,
    # so acceptance = p_coll + (1 - p_coll) 2^{-t} with
    # p_coll = 1/C(d-t, k-t) the probability the two faces coincide
    x = complete_complex(10, 7)
    k, t = 4, 2
    rng = np.random.default_rng(2)
    f = {v: 0 for v in range(10)}
    table = corrupt(encode(f, x, k), "face-resample", 1.0, rng)
    acc = run_tester(table, t=t, rng=rng)
    p_coll = 1.0 / math.comb(7 - t, k - t)
    expected = p_coll + (1 - p_coll) * 2.0 ** (-t)
    assert abs(acc - expected) < 0.02


def test_corrupt_rate_zero_identity():
    _, f, table = _encoded()
    rng = np.random.default_rng(3)
    for model in ("iid-bit-flip", "face-resample", "adversarial-block"):
        out = corrupt(table, model, 0.0, rng)
        assert out.table == table.table


def test_corrupt_iid_mean_hamming():
    _, f, table = _encoded(10, 6, 5, seed=4)
    rng = np.random.default_rng(5)
    rho = 0.2
    out = corrupt(table, "iid-bit-flip", rho, rng)
    dist = [((a ^ b).bit_count()) for a, b in
            zip(table.table.values(), out.table.values())]
    assert abs(np.mean(dist) - rho * 5) < 0.15


def test_corrupt_block_complements():
    _, f, table = _encoded()
    rng = np.random.default_rng(6)
    out = corrupt(table, "adversarial-block", 0.25, rng)
    changed = sum(1 for a, b in zip(table.table.values(), out.table.values()) if a != b)
    assert changed == math.ceil(0.25 * len(table.table))


def test_tester_monotone_in_corruption():
    x, f, table = _encoded(10, 7, 4, seed=7)
    accs = []
    for rho in (0.0, 0.1, 0.3):
        vals = []
        for seed in range(5):
            rng = np.random.default_rng(100 + seed)
            out = corrupt(table, "iid-bit-flip", rho, rng)
            vals.append(run_tester(out, t=2, samples=4000, rng=rng))
        accs.append(np.mean(vals))
    assert accs[0] >= accs[1] - 0.02 >= accs[2] - 0.04


def test_decode_after_iid_corruption():
    x, f, table = _encoded(16, 9, 6, seed=8)
    rng = np.random.default_rng(9)
    out = corrupt(table, "iid-bit-flip", 0.1, rng)
    dec, eta = decode_majority(out, 0.34)  # eps k just above 2 flips
    assert dec == f  # majority over many faces recovers f exactly
    # binomial-tail oracle: P[Bin(6, 0.1) <= 2] = 0.98415
    tail = sum(math.comb(6, i) * 0.1 ** i * 0.9 ** (6 - i) for i in range(3))
    assert abs(eta - tail) < 0.02


def test_decode_random_table_eta_matches_binomial():
    x = complete_complex(12, 8)
    rng = np.random.default_rng(10)
    f0 = {v: 0 for v in range(12)}
    table = corrupt(encode(f0, x, 5), "face-resample", 1.0, rng)
    dec, eta = decode_majority(table, 0.4)  # threshold 2 bits of 5
    # against the decoded f, entries are uniform: eta ~ P[Bin(5,1/2) <= 2]
    tail = sum(math.comb(5, i) for i in range(3)) / 2 ** 5
    assert abs(eta - tail) < 0.05


def test_tester_seed_symmetry():
    x, f, table = _encoded(10, 7, 4, seed=11)
    rng = np.random.default_rng(12)
    out = corrupt(table, "face-resample", 0.5, rng)
    a1 = run_tester(out, t=2, samples=3000, rng=np.random.default_rng(0))
    a2 = run_tester(out, t=2, samples=3000, rng=np.random.default_rng(0))
    assert a1 == a2


def test_table_json_roundtrip():
    from hdxlab.dpt import table_from_json, table_to_json
    x, f, table = _encoded(8, 5, 4, seed=12)
    rng = np.random.default_rng(13)
    table = corrupt(table, "face-resample", 0.5, rng)
    back = table_from_json(table_to_json(table), x)
    assert back.k == table.k
    assert back.table == table.table
