"""Spectral measurements: singular values of bipartite averaging operators,
eigenvalues of walks and link skeletons, epsilon-product audits, mixing and
sampling slack checks, the trickling-down bound, and the restriction-blowup
estimator.

Operators are normalized in the measure inner product: a bipartite joint
matrix W with row/column marginals muL/muR is symmetrized to
D_L^{-1/2} W D_R^{-1/2}, whose top singular value is 1 with the sqrt-measure
singular vectors.  All tolerances below refer to this normalization.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dist import (
    PartiteDistribution,
    SimplicialComplexView,
    WeightedGraph,
    bipartite_graph,
)

DENSE_CUTOFF = 4000

__all__ = [
    "SpectralReport",
    "bipartite_operator",
    "second_singular_value",
    "power_iteration_sigma2",
    "tripartite_second_singular",
    "AuditResult",
    "epsilon_product_audit",
    "mixing_check",
    "sampling_check",
    "lambda2_signed",
    "trickling_down_bound",
    "local_spectral_audit",
    "restriction_blowup_estimate",
]


@dataclass
class SpectralReport:
    operator_id: str
    sigma1: float
    sigma2: float
    method: str
    tolerance: float

    @property
    def gap(self):
        return self.sigma1 - self.sigma2

    def row(self):
        return {
            "operator": self.operator_id,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "gap": self.gap,
            "method": self.method,
            "tolerance": self.tolerance,
        }


def _require_explicit(g: WeightedGraph):
    if g.meta.get("sampled"):
        raise ValueError("spectral operation requires an explicit (non-sampled) graph")


def bipartite_operator(g: WeightedGraph, parts=(0, 1)):
    """Measure-normalized operator D_L^{-1/2} W D_R^{-1/2} between two parts."""
    _require_explicit(g)
    i, j = parts
    left, right = g.parts[i], g.parts[j]
    li = {v: a for a, v in enumerate(left)}
    ri = {v: a for a, v in enumerate(right)}
    w = np.zeros((len(left), len(right)))
    for (u, v), wt in g.edges.items():
        if u in li and v in ri:
            w[li[u], ri[v]] += wt
        elif v in li and u in ri:
            w[li[v], ri[u]] += wt
    mul = w.sum(axis=1)
    mur = w.sum(axis=0)
    if (mul <= 0).any() or (mur <= 0).any():
        raise ValueError("part vertex with no edge mass")
    s = w / np.sqrt(mul)[:, None] / np.sqrt(mur)[None, :]
    return s, mul / mul.sum(), mur / mur.sum()


def second_singular_value(g: WeightedGraph, parts=(0, 1)) -> float:
    """sigma_2 of the normalized averaging operator between two parts."""
    s, _, _ = bipartite_operator(g, parts)
    if min(s.shape) < 2:
        return 0.0
    if max(s.shape) > DENSE_CUTOFF:
        return power_iteration_sigma2(s)
    sv = np.linalg.svd(s, compute_uv=False)
    return float(sv[1])


def power_iteration_sigma2(s: np.ndarray, tol=1e-8, max_iter=10_000, seed=7) -> float:
    """sigma_2 of s by power iteration on s^T s, deflating the known top
    singular pair (the sqrt-marginal vectors)."""
    # Top right-singular vector of the normalized operator is sqrt(col mass).
    v1 = np.sqrt((s * s).sum(axis=0))
    v1 = v1 / np.linalg.norm(v1)
    # Use exact top vectors: s v1 = u1 with singular value 1 for stochastic
    # normalizations; deflate by projecting v1 out.
    rng = np.random.default_rng(seed)
    x = rng.normal(size=s.shape[1])
    x -= (x @ v1) * v1
    x /= np.linalg.norm(x)
    last = 0.0
    for _ in range(max_iter):
        y = s.T @ (s @ x)
        y -= (y @ v1) * v1
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        if abs(norm - last) < tol * max(1.0, norm):
            break
        last = norm
    return float(np.sqrt(norm))


def _union_adjacency(g: WeightedGraph):
    verts = list(g.vertices())
    vi = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    w = np.zeros((n, n))
    for (u, v), wt in g.edges.items():
        w[vi[u], vi[v]] += wt
        if u != v:
            w[vi[v], vi[u]] += wt
    d = w.sum(axis=1)
    keep = d > 0
    return w[np.ix_(keep, keep)], d[keep], [v for v, k in zip(verts, keep) if k]


def tripartite_second_singular(g: WeightedGraph) -> float:
    """sigma_2 of the normalized adjacency of the union graph (all parts)."""
    _require_explicit(g)
    w, d, _ = _union_adjacency(g)
    if w.shape[0] < 2:
        return 0.0
    n = w / np.sqrt(d)[:, None] / np.sqrt(d)[None, :]
    sv = np.linalg.svd(n, compute_uv=False)
    return float(sv[1])


def lambda2_signed(g: WeightedGraph) -> float:
    """Second largest (signed) eigenvalue of the normalized adjacency of the
    union graph."""
    w, d, _ = _union_adjacency(g)
    if w.shape[0] < 2:
        return -1.0
    n = w / np.sqrt(d)[:, None] / np.sqrt(d)[None, :]
    ev = np.sort(np.linalg.eigvalsh(n))[::-1]
    return float(ev[1])


def _is_connected(g: WeightedGraph) -> bool:
    verts = list(g.vertices())
    if not verts:
        return True
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        v = stack.pop()
        for u, _ in g.neighbors(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(verts)


@dataclass
class AuditResult:
    eps: float
    certified: bool
    n_conditionals: int
    worst: tuple = None

    def __float__(self):
        return self.eps


def epsilon_product_audit(mu: PartiteDistribution, budget=20_000,
                          samples=200, rng=None) -> AuditResult:
    """Certified epsilon: the max over all conditionals mu|X_S=V
    (|S| <= |I|-2) and coordinate pairs i != j of the skeleton sigma_2.

    Falls back to a sampled audit (certified=False) when the number of
    (S, V) conditionals exceeds the budget.
    """
    labels = mu.labels
    r = len(labels)
    conds = []
    n_total = 0
    subsets = []
    for size in range(0, r - 1):
        for s in itertools.combinations(labels, size):
            subsets.append(s)
    for s in subsets:
        n_total += 1 if not s else len(mu.marginal(s))
    certified = n_total <= budget
    if certified:
        for s in subsets:
            if not s:
                conds.append((s, ()))
            else:
                for v in mu.marginal(s).rows:
                    conds.append((s, v))
    else:
        rng = rng or np.random.default_rng(0)
        for _ in range(samples):
            size = int(rng.integers(0, r - 1))
            s = tuple(sorted(rng.choice(labels, size=size, replace=False))) if size else ()
            row = mu.sample(rng)
            v = tuple(row[labels.index(l)] for l in s)
            conds.append((s, v))
    eps = 0.0
    worst = None
    for s, v in conds:
        cond = mu if not s else mu.condition(s, v)
        rest = [l for l in labels if l not in s]
        for ai in range(len(rest)):
            for bi in range(ai + 1, len(rest)):
                pair = (rest[ai], rest[bi])
                sub = cond.marginal(tuple(sorted(pair)))
                if len(sub) == 0:
                    continue
                g = bipartite_graph(sub, (pair[0],), (pair[1],))
                s2 = second_singular_value(g)
                if s2 > eps:
                    eps = s2
                    worst = (s, v, pair)
    return AuditResult(eps, certified, len(conds), worst)


def mixing_check(g: WeightedGraph, a_set, b_set, lam=None) -> float:
    """Expander-mixing slack RHS - |LHS| (nonnegative when the lemma holds):
    |Pr[u in A, v in B] - mu(A)mu(B)| <= lam sqrt(mu(A)(1-mu(A))mu(B)(1-mu(B)))."""
    if lam is None:
        lam = second_singular_value(g)
    a_set = set(a_set)
    b_set = set(b_set)
    left, right = g.parts[0], g.parts[1]
    mul = {v: 0.0 for v in left}
    mur = {v: 0.0 for v in right}
    hit = 0.0
    for (u, v), w in g.edges.items():
        if u not in mul:
            u, v = v, u
        mul[u] += w
        mur[v] += w
        if u in a_set and v in b_set:
            hit += w
    mua = sum(mul[v] for v in a_set)
    mub = sum(mur[v] for v in b_set)
    lhs = abs(hit - mua * mub)
    rhs = lam * math.sqrt(max(0.0, mua * (1 - mua) * mub * (1 - mub)))
    return rhs - lhs


def sampling_check(g: WeightedGraph, b_set, eps: float, lam=None):
    """Sampling-lemma check: returns (measured tail, bound).

    tail = Pr_v[ Pr_{u ~ v}[u in B] > Pr[B] + eps ],  bound = lam^2 Pr[B] / eps^2.
    """
    if lam is None:
        lam = second_singular_value(g)
    b_set = set(b_set)
    left, right = g.parts[0], g.parts[1]
    mul = {v: 0.0 for v in left}
    mur = {v: 0.0 for v in right}
    hitv = {v: 0.0 for v in right}
    for (u, v), w in g.edges.items():
        if u not in mul:
            u, v = v, u
        mul[u] += w
        mur[v] += w
        if u in b_set:
            hitv[v] += w
    delta = sum(mul[v] for v in b_set)
    tail = 0.0
    for v in right:
        if mur[v] > 0 and hitv[v] / mur[v] > delta + eps:
            tail += mur[v]
    bound = lam * lam * delta / (eps * eps)
    return tail, bound


def trickling_down_bound(x: SimplicialComplexView, budget=5_000_000) -> float:
    """lambda/(1-(d-1)lambda) from the worst link-skeleton eigenvalue at
    codimension 2; raises on a disconnected link skeleton."""
    d = x.d
    lam = -1.0
    if d < 2:
        raise ValueError("complex dimension must be >= 2")
    faces = [()] if d == 2 else list(x.level_distribution(d - 2, budget=budget).keys())
    for f in faces:
        sub = x if not f else x.link(f)
        sk = sub.skeleton()
        if not _is_connected(sk):
            raise ValueError("disconnected link skeleton at %r" % (f,))
        lam = max(lam, lambda2_signed(sk))
    denom = 1.0 - (d - 1) * lam
    if denom <= 0:
        return float("inf")
    return max(0.0, lam) / denom if lam >= 0 else lam / denom


def local_spectral_audit(x: SimplicialComplexView, budget=5_000_000) -> float:
    """gamma: max over all links of size <= d-2 (including the empty face)
    of the second eigenvalue of the link's weighted 1-skeleton."""
    gamma = -1.0
    for level in range(0, x.d - 1):
        faces = [()] if level == 0 else list(x.level_distribution(level, budget=budget).keys())
        for f in faces:
            sub = x if not f else x.link(f)
            if sub.d < 2:
                continue
            gamma = max(gamma, lambda2_signed(sub.skeleton()))
    return gamma


def restriction_blowup_estimate(mu: PartiteDistribution, f, k: int, eta: float,
                                samples: int, rng: np.random.Generator):
    """Monte Carlo estimate of Pr_{S subset_k, x ~ mu^S}[mu_{S->x}(f) >= eta]
    together with the reference rate (k/d)(mu(f)/eta)log(1/eta)/loglog(1/eta).

    f is a predicate on support rows; requires E[f] <= eta/100.
    """
    labels = mu.labels
    d = len(labels)
    fvals = np.array([1.0 if f(row) else 0.0 for row in mu.rows])
    mean = float(fvals @ mu.weights)
    if mean > eta / 100 + 1e-15:
        raise ValueError("precondition E[f] <= eta/100 violated (E[f]=%g)" % mean)
    hits = 0
    for _ in range(samples):
        idx = rng.choice(d, size=k, replace=False)
        s = tuple(sorted(labels[i] for i in idx))
        row = mu.sample(rng)
        pos = [labels.index(l) for l in s]
        x = tuple(row[p] for p in pos)
        ids = mu.matching_rows(s, x)
        w = mu.weights[ids]
        cond_mean = float(fvals[ids] @ w) / float(w.sum())
        if cond_mean >= eta:
            hits += 1
    estimate = hits / samples
    if eta >= 1.0 / math.e:
        ref = (k / d) * (mean / eta)
    else:
        ref = (k / d) * (mean / eta) * math.log(1 / eta) / math.log(math.log(1 / eta))
    return estimate, ref
