"""The canonical 2-query direct product tester: encode a boolean function on
vertices as a table on k-faces, corrupt it, test agreement on random
intersections, and decode by weighted majority.

Table entries are bitmasks; bit i of F[A] corresponds to the i-th vertex of
the face A in canonical sorted order.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import SimplicialComplexView, decode_value, encode_value, vertex_sort_key

__all__ = ["DPTable", "encode", "corrupt", "run_tester", "decode_majority",
           "level_faces", "table_to_json", "table_from_json"]

EXACT_BUDGET = 10_000_000


def level_faces(x: SimplicialComplexView, k: int, budget=5_000_000):
    """Faces of X(k) with their mu_k weights.  Complete complexes use the
    closed form (all k-subsets, uniform); everything else enumerates."""
    if x.meta.get("family") == "complete":
        n = x.meta["n"]
        faces = list(itertools.combinations(range(n), k))
        return faces, np.ones(len(faces)) / len(faces)
    muk = x.level_distribution(k, budget=budget)
    faces = sorted(muk.keys(), key=vertex_sort_key)
    return faces, np.array([muk[f] for f in faces])


@dataclass
class DPTable:
    x: SimplicialComplexView
    k: int
    table: dict = field(default_factory=dict)   # face -> bitmask

    def bits(self, face) -> int:
        return self.table[face]

    def copy(self) -> "DPTable":
        return DPTable(self.x, self.k, dict(self.table))


def encode(f: dict, x: SimplicialComplexView, k: int) -> DPTable:
    """F[A] = (f(a_1), ..., f(a_k)) for the canonically ordered face A."""
    faces, _ = level_faces(x, k)
    table = {}
    for face in faces:
        mask = 0
        for i, v in enumerate(face):
            if v not in f:
                raise ValueError("encoding requires f to be total on vertices")
            if f[v]:
                mask |= 1 << i
        table[face] = mask
    return DPTable(x, k, table)


def corrupt(table: DPTable, model: str, rate: float, rng: np.random.Generator) -> DPTable:
    """Corruption models: iid-bit-flip(rate), face-resample(rate), and
    adversarial-block(frac) which complements a `rate`-fraction of faces."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    out = table.copy()
    k = table.k
    full = (1 << k) - 1
    faces = list(out.table.keys())
    if model == "iid-bit-flip":
        for face in faces:
            flips = rng.random(k) < rate
            if flips.any():
                mask = 0
                for i, hit in enumerate(flips):
                    if hit:
                        mask |= 1 << i
                out.table[face] ^= mask
    elif model == "face-resample":
        for face in faces:
            if rng.random() < rate:
                out.table[face] = int(rng.integers(0, full + 1))
    elif model == "adversarial-block":
        n_bad = int(math.ceil(rate * len(faces)))
        idx = rng.choice(len(faces), size=n_bad, replace=False)
        for i in idx:
            out.table[faces[i]] ^= full
    else:
        raise ValueError("unknown corruption model %r" % model)
    return out


def _restrict_bits(face, mask, positions_of) -> int:
    out = 0
    for j, pos in enumerate(positions_of):
        if (mask >> pos) & 1:
            out |= 1 << j
    return out


def run_tester(table: DPTable, t: int = None, samples: int = 100_000,
               rng: np.random.Generator = None, exact_budget: int = EXACT_BUDGET):
    """Acceptance probability of the canonical 2-query test: sample a top
    face D, an intersection I of size t inside D, and two independent
    k-faces A, A' with I <= A, A' <= D; accept when F[A] and F[A'] agree
    on I.

    Runs by exact enumeration when |X(d)| C(d,t) C(d-t,k-t) fits the budget,
    else by Monte Carlo with the given sample count.
    """
    x, k = table.x, table.k
    d = x.d
    if t is None:
        t = math.isqrt(k)
        if t * t < k:
            t += 1
    if not (0 <= t <= k <= d):
        raise ValueError("need t <= k <= d")
    if t == 0:
        return 1.0
    rng = rng if rng is not None else np.random.default_rng(0)
    n_tops = len(x.top_faces)
    exact_cost = n_tops * math.comb(d, t) * math.comb(d - t, k - t)
    if exact_cost <= exact_budget:
        return _tester_exact(table, t)
    return _tester_sampled(table, t, samples, rng)


def _tester_exact(table: DPTable, t: int) -> float:
    # accumulate the rejection mass so that a perfect table gives exactly 1.0
    x, k = table.x, table.k
    d = x.d
    reject = 0.0
    for top, w in zip(x.top_faces, x.weights):
        n_i = math.comb(d, t)
        for i_idx in itertools.combinations(range(d), t):
            i_set = set(i_idx)
            rest = [j for j in range(d) if j not in i_set]
            counts = {}
            n_a = 0
            for a_rest in itertools.combinations(rest, k - t):
                a_idx = tuple(sorted(i_idx + a_rest))
                face = tuple(top[j] for j in a_idx)
                positions = [a_idx.index(j) for j in i_idx]
                pat = _restrict_bits(face, table.bits(face), positions)
                counts[pat] = counts.get(pat, 0) + 1
                n_a += 1
            agree = sum(c * c for c in counts.values())
            if agree != n_a * n_a:
                reject += w * (n_a * n_a - agree) / (n_a * n_a) / n_i
    return 1.0 - reject


def _tester_sampled(table: DPTable, t: int, samples: int,
                    rng: np.random.Generator) -> float:
    x, k = table.x, table.k
    d = x.d
    tops = x.top_faces
    wts = x.weights
    hits = 0
    for _ in range(samples):
        top = tops[int(rng.choice(len(tops), p=wts))]
        perm = rng.permutation(d)
        i_idx = sorted(int(j) for j in perm[:t])
        rest = [j for j in range(d) if j not in i_idx]
        pick = rng.permutation(len(rest))
        a_idx = tuple(sorted(i_idx + [rest[int(j)] for j in pick[: k - t]]))
        pick2 = rng.permutation(len(rest))
        b_idx = tuple(sorted(i_idx + [rest[int(j)] for j in pick2[: k - t]]))
        fa = tuple(top[j] for j in a_idx)
        fb = tuple(top[j] for j in b_idx)
        pa = _restrict_bits(fa, table.bits(fa), [a_idx.index(j) for j in i_idx])
        pb = _restrict_bits(fb, table.bits(fb), [b_idx.index(j) for j in i_idx])
        if pa == pb:
            hits += 1
    return hits / samples


def decode_majority(table: DPTable, eps: float):
    """f(v) = mu_k-weighted majority of F[A]_v over faces containing v (ties
    toward 0); eta = Pr_{A ~ mu_k}[Hamming(F[A], f|_A) <= eps k].

    Returns (f, eta)."""
    x, k = table.x, table.k
    faces, weights = level_faces(x, k)
    votes = {}
    for face, w in zip(faces, weights):
        mask = table.bits(face)
        for i, v in enumerate(face):
            ones, tot = votes.get(v, (0.0, 0.0))
            votes[v] = (ones + w * ((mask >> i) & 1), tot + w)
    f = {v: 1 if ones > tot / 2 else 0 for v, (ones, tot) in votes.items()}
    thresh = eps * k
    far = 0.0  # mass of faces beyond the radius; exact 0 for encoded tables
    for face, w in zip(faces, weights):
        mask = table.bits(face)
        ref = 0
        for i, v in enumerate(face):
            if f[v]:
                ref |= 1 << i
        if (mask ^ ref).bit_count() > thresh:
            far += w
    return f, 1.0 - far


def table_to_json(table: DPTable) -> str:
    """Serialize as face -> hex-packed bits, faces in canonical order."""
    faces = sorted(table.table.keys(), key=vertex_sort_key)
    return json.dumps({
        "schema": "hdxlab.dpt.v1",
        "k": table.k,
        "faces": [[encode_value(v) for v in face] for face in faces],
        "bits": ["%x" % table.table[f] for f in faces],
    })


def table_from_json(s: str, x: SimplicialComplexView) -> DPTable:
    obj = json.loads(s)
    if obj.get("schema") != "hdxlab.dpt.v1":
        raise ValueError("not a direct product table document")
    table = {}
    for face_enc, hexbits in zip(obj["faces"], obj["bits"]):
        face = tuple(decode_value(v) for v in face_enc)
        table[face] = int(hexbits, 16)
    return DPTable(x, obj["k"], table)
