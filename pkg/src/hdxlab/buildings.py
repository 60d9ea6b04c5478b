"""Concrete complexes: spherical buildings of type A and C over GF(p),
their tensor products, Grassmann/symplectic tripartite graphs, Johnson
graphs, and complete complexes.

Flag coordinates are labeled by dimension (1..d).  All enumerations are
canonical (RREF subspaces) and guarded by an explicit tuple budget;
beyond the budget only sampler mode is available.
"""

from __future__ import annotations

import itertools

import numpy as np

from .dist import (
    PartiteDistribution,
    SimplicialComplexView,
    TupleSampler,
    WeightedGraph,
    edge_key,
    triangle_key,
    tripartite_graph,
)
from .gf import Subspace, random_gl, rref, symplectic_complement

DEFAULT_BUDGET = 5_000_000

__all__ = [
    "BudgetError",
    "gaussian_binomial",
    "isotropic_count",
    "enumerate_subspaces",
    "enumerate_isotropic",
    "extensions",
    "isotropic_extensions",
    "sb_type_a",
    "sb_type_c",
    "flag_sampler_a",
    "flag_sampler_c",
    "tensor",
    "chain_distribution_a",
    "chain_distribution_c",
    "grassmann_tripartite",
    "symplectic_tripartite",
    "johnson_graph",
    "complete_complex",
    "complex_view",
]


class BudgetError(Exception):
    """Enumeration would exceed the configured tuple budget."""


def gaussian_binomial(n: int, k: int, p: int) -> int:
    """Number of k-dimensional subspaces of GF(p)^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def isotropic_count(two_d: int, p: int, k: int) -> int:
    """Number of k-dimensional isotropic subspaces of GF(p)^{2d}."""
    d = two_d // 2
    if k < 0 or k > d:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (2 * (d - i)) - 1
        den *= p ** (i + 1) - 1
    return num // den


def _projective_points(k: int, p: int):
    """Projective representatives of GF(p)^k: first nonzero entry is 1."""
    for lead in range(k):
        head = [0] * lead + [1]
        for tail in itertools.product(range(p), repeat=k - lead - 1):
            yield np.array(head + list(tail), dtype=np.int64)


def enumerate_subspaces(n: int, p: int, k: int, budget=DEFAULT_BUDGET):
    """All k-dim subspaces of GF(p)^n, canonical, via RREF pivot patterns."""
    count = gaussian_binomial(n, k, p)
    if count > budget:
        raise BudgetError("%d subspaces exceed budget %d" % (count, budget))
    if k == 0:
        return [Subspace.zero(n, p)]
    out = []
    for pivots in itertools.combinations(range(n), k):
        free = []
        for i, pc in enumerate(pivots):
            for j in range(pc + 1, n):
                if j not in pivots:
                    free.append((i, j))
        base = np.zeros((k, n), dtype=np.int64)
        for i, pc in enumerate(pivots):
            base[i, pc] = 1
        for vals in itertools.product(range(p), repeat=len(free)):
            m = base.copy()
            for (i, j), v in zip(free, vals):
                m[i, j] = v
            m.flags.writeable = False
            out.append(Subspace(p, n, m))
    assert len(out) == count
    return out


def enumerate_isotropic(two_d: int, p: int, k: int, budget=DEFAULT_BUDGET):
    """All k-dim isotropic subspaces under the fixed symplectic form."""
    if k > two_d // 2:
        raise ValueError("no isotropic subspace of dimension %d in 2d=%d" % (k, two_d))
    target = isotropic_count(two_d, p, k)
    if target > budget:
        raise BudgetError("isotropic enumeration exceeds budget")
    # Grow isotropic flags one dimension at a time, deduping each level.
    level = {Subspace.zero(two_d, p)}
    for _ in range(k):
        nxt = set()
        for v in level:
            for ext in isotropic_extensions(v):
                nxt.add(ext)
        level = nxt
    out = sorted(level, key=lambda s: s.key())
    assert len(out) == target
    return out


def _complement_basis(v: Subspace) -> np.ndarray:
    """Standard-basis complement of v inside the full space."""
    pivots = set()
    for row in v.basis:
        pivots.add(int(np.nonzero(row)[0][0]))
    rows = [j for j in range(v.ambient) if j not in pivots]
    c = np.zeros((len(rows), v.ambient), dtype=np.int64)
    for i, j in enumerate(rows):
        c[i, j] = 1
    return c


def extensions(v: Subspace):
    """All (dim+1)-dim subspaces containing v, each exactly once."""
    comp = _complement_basis(v)
    for coeff in _projective_points(comp.shape[0], v.p):
        w = (coeff @ comp) % v.p
        yield Subspace.from_rows(np.concatenate([v.basis, w.reshape(1, -1)]), v.ambient, v.p)


def _complement_within(v: Subspace, w: Subspace) -> np.ndarray:
    """Rows extending v's basis to a basis of w (v must be inside w)."""
    rows = []
    cur = v.basis
    rank = v.dim
    for row in w.basis:
        stacked = np.concatenate([cur, row.reshape(1, -1)])
        r, rk = rref(stacked, v.p)
        if rk > rank:
            rows.append(row)
            cur = r[:rk]
            rank = rk
    return np.array(rows, dtype=np.int64).reshape(len(rows), v.ambient)


def isotropic_extensions(v: Subspace):
    """All isotropic (dim+1)-dim subspaces containing isotropic v."""
    symp = symplectic_complement(v)
    comp = _complement_within(v, symp)
    for coeff in _projective_points(comp.shape[0], v.p):
        w = (coeff @ comp) % v.p
        if v.contains_vector(w):
            continue
        yield Subspace.from_rows(np.concatenate([v.basis, w.reshape(1, -1)]), v.ambient, v.p)


def _chains(starts, dims, extender):
    """Enumerate chains hitting the sorted dims, extending one dim at a time."""
    chains = [(s,) for s in starts]
    for prev_dim, next_dim in zip(dims, dims[1:]):
        new = []
        for chain in chains:
            # grow the top element of the chain up to next_dim, deduping
            level = {chain[-1]}
            for _ in range(next_dim - prev_dim):
                level = {e for v in level for e in extender(v)}
            new.extend(chain + (top,) for top in sorted(level, key=lambda s: s.key()))
        chains = new
    return chains


def chain_distribution_a(d: int, p: int, dims, budget=DEFAULT_BUDGET) -> PartiteDistribution:
    """Uniform distribution over chains V_{dims[0]} < ... < V_{dims[-1]} of
    subspaces of GF(p)^d, labeled by dimension."""
    dims = tuple(sorted(dims))
    if not dims or dims[-1] > d:
        raise ValueError("chain dimensions must lie in 1..%d" % d)
    count = gaussian_binomial(d, dims[0], p)
    for a, b in zip(dims, dims[1:]):
        count *= gaussian_binomial(d - a, b - a, p)
    if count > budget:
        raise BudgetError("%d chains exceed budget %d" % (count, budget))
    starts = enumerate_subspaces(d, p, dims[0], budget)
    rows = _chains(starts, dims, extensions)
    assert len(rows) == count
    return PartiteDistribution.from_rows(dims, rows)


def chain_distribution_c(d: int, p: int, dims, budget=DEFAULT_BUDGET) -> PartiteDistribution:
    """Uniform distribution over chains of isotropic subspaces of GF(p)^{2d}."""
    dims = tuple(sorted(dims))
    if not dims or dims[-1] > d:
        raise ValueError("isotropic chain dims must lie in 1..%d" % d)
    starts = enumerate_isotropic(2 * d, p, dims[0], budget)
    rows = _chains(starts, dims, isotropic_extensions)
    if len(rows) > budget:
        raise BudgetError("%d chains exceed budget %d" % (len(rows), budget))
    return PartiteDistribution.from_rows(dims, rows)


def sb_type_a(d: int, p: int, budget=DEFAULT_BUDGET) -> PartiteDistribution:
    """Spherical building of type A: uniform complete flags in GF(p)^{d+1}."""
    mu = chain_distribution_a(d + 1, p, tuple(range(1, d + 1)), budget)
    mu.meta = {"family": "typeA", "d": d, "p": p}
    return mu


def sb_type_c(d: int, p: int, budget=DEFAULT_BUDGET) -> PartiteDistribution:
    """Spherical building of type C: uniform complete isotropic flags in GF(p)^{2d}."""
    mu = chain_distribution_c(d, p, tuple(range(1, d + 1)), budget)
    mu.meta = {"family": "typeC", "d": d, "p": p}
    return mu


def flag_sampler_a(d: int, p: int) -> TupleSampler:
    """Sampler for SB^A_d(F_p): prefix spans of a random invertible matrix."""

    def draw(rng):
        g = random_gl(d + 1, p, rng)
        return tuple(Subspace.from_rows(g[: i + 1], d + 1, p) for i in range(d))

    return TupleSampler(tuple(range(1, d + 1)), draw)


def flag_sampler_c(d: int, p: int) -> TupleSampler:
    """Sampler for SB^C_d(F_p): iterated uniform isotropic extension."""

    def draw(rng):
        v = Subspace.zero(2 * d, p)
        out = []
        for _ in range(d):
            symp = symplectic_complement(v)
            comp = _complement_within(v, symp)
            while True:
                coeff = rng.integers(0, p, size=comp.shape[0])
                if not coeff.any():
                    continue
                w = (coeff @ comp) % p
                if not v.contains_vector(w):
                    break
            v = Subspace.from_rows(np.concatenate([v.basis, w.reshape(1, -1)]), 2 * d, p)
            out.append(v)
        return tuple(out)

    return TupleSampler(tuple(range(1, d + 1)), draw)


def tensor(mu1: PartiteDistribution, mu2: PartiteDistribution,
           budget=DEFAULT_BUDGET) -> PartiteDistribution:
    """Independent product; the second factor's labels are shifted past the
    first factor's so integer labels stay distinct."""
    offset = max(mu1.labels) if mu1.labels else 0
    labels2 = tuple(l + offset for l in mu2.labels)
    if set(mu1.labels) & set(labels2):
        raise ValueError("label clash after relabeling")
    if len(mu1) * len(mu2) > budget:
        raise BudgetError("tensor support exceeds budget")
    labels = mu1.labels + labels2
    rows, weights = [], []
    for r1, w1 in zip(mu1.rows, mu1.weights):
        for r2, w2 in zip(mu2.rows, mu2.weights):
            rows.append(r1 + r2)
            weights.append(w1 * w2)
    out = PartiteDistribution(labels, rows, np.array(weights))
    out.meta = {"family": "tensor",
                "factors": (getattr(mu1, "meta", {}), getattr(mu2, "meta", {}))}
    return out


def grassmann_tripartite(d: int, p: int, k1: int, k2: int, k3: int,
                         budget=DEFAULT_BUDGET) -> WeightedGraph:
    """Gr_d(k1,k2,k3): tripartite graph on subspaces of GF(p)^d of the three
    dimensions; triangles are uniform chains V1 < V2 < V3."""
    if not (0 < k1 < k2 < k3 <= d):
        raise ValueError("need 0 < k1 < k2 < k3 <= d")
    mu = chain_distribution_a(d, p, (k1, k2, k3), budget)
    g = tripartite_graph(mu, (k1,), (k2,), (k3,),
                         meta={"family": "grassmann", "d": d, "p": p,
                               "dims": (k1, k2, k3)})
    return g


def symplectic_tripartite(d: int, p: int, k1: int, k2: int, k3=None,
                          budget=DEFAULT_BUDGET) -> WeightedGraph:
    """S_d(k1,k2,k3): tripartite graph on isotropic subspaces of GF(p)^{2d};
    triangles are uniform isotropic chains.  k3=None degenerates to the
    bipartite (k1, k2) inclusion graph."""
    if k3 is None:
        mu = chain_distribution_c(d, p, (k1, k2), budget)
        from .dist import bipartite_graph
        g = bipartite_graph(mu, (k1,), (k2,),
                            meta={"family": "symplectic", "d": d, "p": p,
                                  "dims": (k1, k2)})
        return g
    if not (0 < k1 < k2 < k3 <= d):
        raise ValueError("need 0 < k1 < k2 < k3 <= d")
    mu = chain_distribution_c(d, p, (k1, k2, k3), budget)
    g = tripartite_graph(mu, (k1,), (k2,), (k3,),
                         meta={"family": "symplectic", "d": d, "p": p,
                               "dims": (k1, k2, k3)})
    return g


def johnson_graph(n: int, k: int) -> WeightedGraph:
    """J(n, k): k-subsets of [n], edges between sets meeting in k-1 points,
    uniform edges and uniform triangles."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    verts = list(itertools.combinations(range(n), k))
    vset = set(verts)
    edges = {}
    for v in verts:
        rest = [x for x in range(n) if x not in v]
        for drop in v:
            for add in rest:
                u = tuple(sorted(set(v) - {drop} | {add}))
                if u > v:
                    edges[edge_key(v, u)] = 1.0
    ne = len(edges)
    edges = {e: 1.0 / ne for e in edges}
    adj = {v: set() for v in verts}
    for (a, b) in edges:
        adj[a].add(b)
        adj[b].add(a)
    triangles = {}
    for (a, b) in edges:
        for c in adj[a] & adj[b]:
            triangles[triangle_key(a, b, c)] = 1.0
    nt = len(triangles)
    triangles = {t: 1.0 / nt for t in triangles}
    meas = np.ones(len(verts)) / len(verts)
    return WeightedGraph([verts], [meas], edges, triangles,
                         meta={"family": "johnson", "n": n, "k": k})


def complete_complex(n: int, d: int) -> SimplicialComplexView:
    """All d-subsets of [n], uniform."""
    if d > n:
        raise ValueError("need d <= n")
    tops = list(itertools.combinations(range(n), d))
    return SimplicialComplexView(tops, np.ones(len(tops)),
                                 meta={"family": "complete", "n": n, "d": d})


def complex_view(mu: PartiteDistribution) -> SimplicialComplexView:
    """Partite distribution as a simplicial complex: vertices are
    (label, value) pairs, top faces the support tuples."""
    tops = []
    for row in mu.rows:
        tops.append(tuple((lab, val) for lab, val in zip(mu.labels, row)))
    return SimplicialComplexView(tops, mu.weights.copy(),
                                 meta=dict(getattr(mu, "meta", {})))
