"""Affine unique games over the symmetric group S_m.

Permutations are tuples of images; composition is a left action with the
right factor applied first: compose(s, t)(x) = s[t[x]].  The affine shift
(A . pi)(v) = A(v) * pi is right-composition.  Constraints satisfy
pi[v,u] = pi[u,v]^{-1} and an edge (u, v) is satisfied by an assignment A
when A(u) = pi[u,v] * A(v).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .dist import (
    WeightedGraph,
    edge_key,
    graph_from_json,
    graph_to_json,
    vertex_sort_key,
)

__all__ = [
    "identity",
    "compose",
    "invert",
    "random_permutation",
    "all_permutations",
    "PlantedOracle",
    "UGInstance",
    "FailureWitness",
    "value",
    "viol",
    "incons",
    "plant",
    "brute_force_solve",
    "best_shift",
    "tree_propagate_solve",
    "restrict_instance",
]


def identity(m: int):
    return tuple(range(m))


def compose(s, t):
    """(s . t)(x) = s(t(x)); the right factor acts first."""
    return tuple(s[t[x]] for x in range(len(s)))


def invert(s):
    out = [0] * len(s)
    for i, v in enumerate(s):
        out[v] = i
    return tuple(out)


def random_permutation(m: int, rng: np.random.Generator):
    return tuple(int(x) for x in rng.permutation(m))


def all_permutations(m: int):
    return [tuple(p) for p in itertools.permutations(range(m))]


def _stable_bytes(v) -> bytes:
    return repr(vertex_sort_key(v)).encode()


class PlantedOracle:
    """Deterministic constraint generator for (possibly sampled) graphs.

    g(v) is a pseudorandom permutation derived from the vertex key and the
    seed; each unordered edge is independently corrupted with probability
    delta to a uniform permutation.  Total over all vertex pairs, so
    induced sub-instances can query edges that were never sampled.
    """

    def __init__(self, m: int, seed: int, delta: float = 0.0):
        self.m = m
        self.seed = seed
        self.delta = delta
        self._g = {}

    def _rng_for(self, tag: bytes) -> np.random.Generator:
        h = hashlib.sha256(str(self.seed).encode() + b"|" + tag).digest()
        return np.random.default_rng(int.from_bytes(h[:8], "little"))

    def g(self, v):
        if v not in self._g:
            rng = self._rng_for(b"v|" + _stable_bytes(v))
            self._g[v] = random_permutation(self.m, rng)
        return self._g[v]

    def constraint(self, u, v):
        a, b = edge_key(u, v)
        base = compose(self.g(a), invert(self.g(b)))
        if self.delta > 0:
            rng = self._rng_for(b"e|" + _stable_bytes(a) + b"#" + _stable_bytes(b))
            if rng.random() < self.delta:
                base = random_permutation(self.m, rng)
        if (a, b) == (u, v):
            return base
        return invert(base)


@dataclass
class FailureWitness:
    """A non-trivial cocycle: the non-tree edge whose fundamental cycle has
    holonomy != id under spanning-tree propagation."""

    edge: tuple
    holonomy: tuple
    assignment: dict


class UGInstance:
    """Weighted graph + permutation constraints, one per ordered edge."""

    def __init__(self, graph: WeightedGraph, m: int, constraints=None, oracle=None):
        self.graph = graph
        self.m = m
        self.constraints = dict(constraints) if constraints else {}
        self.oracle = oracle
        if not self.constraints and oracle is None:
            raise ValueError("instance needs constraints or an oracle")

    def constraint(self, u, v):
        key = (u, v)
        if key in self.constraints:
            return self.constraints[key]
        if self.oracle is not None:
            return self.oracle.constraint(u, v)
        raise KeyError("no constraint for edge %r" % (key,))

    def check_antisymmetry(self, tol_edges=None):
        edges = list(self.graph.edges)
        for (u, v) in edges if tol_edges is None else edges[:tol_edges]:
            if compose(self.constraint(u, v), self.constraint(v, u)) != identity(self.m):
                raise AssertionError("constraint antisymmetry broken at %r" % ((u, v),))
        return True


def viol(inst: UGInstance, assignment: dict) -> float:
    """Violated edge mass; an all-satisfied assignment gives exactly 0.0."""
    bad = 0.0
    for (u, v), w in inst.graph.edges.items():
        if assignment[u] != compose(inst.constraint(u, v), assignment[v]):
            bad += w
    return bad


def value(inst: UGInstance, assignment: dict) -> float:
    """Satisfied edge mass: Pr_(u,v)~E[A(u) = pi_(u,v) A(v)]."""
    return 1.0 - viol(inst, assignment)


def incons(inst: UGInstance) -> float:
    """Triangle mass whose oriented constraint product is not the identity."""
    if not inst.graph.triangles:
        raise ValueError("instance has no triangle distribution")
    bad = 0.0
    for (u, v, w), wt in inst.graph.triangles.items():
        prod = compose(compose(inst.constraint(u, v), inst.constraint(v, w)),
                       inst.constraint(w, u))
        if prod != identity(inst.m):
            bad += wt
    return bad


def plant(graph: WeightedGraph, g: dict, m: int, delta: float,
          rng: np.random.Generator) -> UGInstance:
    """Constraints pi_(u,v) = g(u) g(v)^{-1}; each unordered edge is then
    independently replaced by a uniform permutation with probability delta
    (both orientations kept inverse-consistent)."""
    constraints = {}
    for (u, v) in graph.edges:
        pi = compose(g[u], invert(g[v]))
        if delta > 0 and rng.random() < delta:
            pi = random_permutation(m, rng)
        constraints[(u, v)] = pi
        constraints[(v, u)] = invert(pi)
    return UGInstance(graph, m, constraints)


def random_global_assignment(graph: WeightedGraph, m: int, rng) -> dict:
    return {v: random_permutation(m, rng) for v in graph.vertices()}


def brute_force_solve(inst: UGInstance, budget: int = 2_000_000):
    """Exact maximum-value assignment by exhaustion, fixing the max-weight
    vertex to id (shift invariance); ties broken by lexicographic
    assignment order.  Returns (assignment, val)."""
    verts = sorted(inst.graph.vertices(), key=vertex_sort_key)
    if not verts:
        return {}, 1.0
    root = max(verts, key=lambda v: (inst.graph.vertex_measure(v),
                                     tuple(reversed(vertex_sort_key(v)))))
    others = [v for v in verts if v != root]
    perms = all_permutations(inst.m)
    cost = len(perms) ** len(others)
    if cost > budget:
        raise ValueError("brute force budget exceeded (%d assignments)" % cost)
    if not inst.graph.edges:
        return {v: identity(inst.m) for v in verts}, 1.0
    best, best_val = None, -1.0
    for combo in itertools.product(perms, repeat=len(others)):
        a = {root: identity(inst.m)}
        a.update(zip(others, combo))
        val = value(inst, a)
        if val > best_val + 1e-15:
            best, best_val = a, val
    return best, best_val


def best_shift(x: dict, y: dict, weights=None):
    """The shift pi minimizing Pr_v[x(v) != y(v) pi] over the common domain,
    exhaustively over S_m; ties go to the lexicographically smallest pi.

    Returns (pi, disagreement).  With y = x . sigma^{-1} the result is
    (sigma, 0).  weights maps vertices to nonnegative masses (default
    uniform over the common domain).
    """
    domain = [v for v in x if v in y]
    if not domain:
        raise ValueError("assignments share no vertices")
    m = len(next(iter(x.values())))
    if weights is None:
        w = {v: 1.0 for v in domain}
    else:
        w = {v: weights[v] for v in domain}
    total = sum(w.values())
    best_pi, best_dis = None, None
    for pi in all_permutations(m):
        dis = sum(w[v] for v in domain if x[v] != compose(y[v], pi)) / total
        if best_dis is None or dis < best_dis - 1e-15:
            best_pi, best_dis = pi, dis
    return best_pi, best_dis


def _bfs_tree(graph: WeightedGraph, root):
    order = [root]
    parent = {root: None}
    queue = [root]
    while queue:
        v = queue.pop(0)
        for u, _ in sorted(graph.neighbors(v), key=lambda t: vertex_sort_key(t[0])):
            if u not in parent:
                parent[u] = v
                order.append(u)
                queue.append(u)
    return order, parent


def tree_propagate_solve(inst: UGInstance, root=None):
    """Spanning-tree propagation from the max-weight vertex.

    Returns a perfect assignment when every non-tree edge checks out, else
    a FailureWitness holding the first violated edge (in canonical order)
    and its holonomy.  Raises on a disconnected graph.
    """
    verts = sorted(inst.graph.vertices(), key=vertex_sort_key)
    if root is None:
        root = max(verts, key=lambda v: (inst.graph.vertex_measure(v),
                                         tuple(reversed(vertex_sort_key(v)))))
    order, parent = _bfs_tree(inst.graph, root)
    if len(order) != len(verts):
        raise ValueError("graph is disconnected (%d of %d reached)" % (len(order), len(verts)))
    a = {root: identity(inst.m)}
    for v in order[1:]:
        p = parent[v]
        a[v] = compose(inst.constraint(v, p), a[p])
    for (u, v) in sorted(inst.graph.edges, key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1]))):
        if u == v:
            continue
        holonomy = compose(invert(a[u]), compose(inst.constraint(u, v), a[v]))
        if holonomy != identity(inst.m):
            return FailureWitness((u, v), holonomy, a)
    return a


def restrict_instance(inst: UGInstance, keep) -> UGInstance:
    """Induced instance on vertices passing the predicate; edge and triangle
    weights renormalized, constraints carried over."""
    survivors = {v for v in inst.graph.vertices() if keep(v)}
    edges = {e: w for e, w in inst.graph.edges.items()
             if e[0] in survivors and e[1] in survivors}
    total = sum(edges.values())
    if total <= 0:
        raise ValueError("restriction has no surviving edge mass")
    edges = {e: w / total for e, w in edges.items()}
    triangles = None
    if inst.graph.triangles:
        triangles = {t: w for t, w in inst.graph.triangles.items()
                     if all(v in survivors for v in t)}
        tt = sum(triangles.values())
        triangles = {t: w / tt for t, w in triangles.items()} if tt > 0 else None
    parts, measures = [], []
    for p, m in zip(inst.graph.parts, inst.graph.part_measures):
        kept = [(v, mm) for v, mm in zip(p, m) if v in survivors]
        parts.append([v for v, _ in kept])
        sub = np.array([mm for _, mm in kept], dtype=np.float64)
        if sub.size and sub.sum() > 0:
            sub = sub / sub.sum()
        measures.append(sub)
    g = WeightedGraph(parts, measures, edges, triangles,
                      meta=dict(inst.graph.meta, restricted=True))
    if inst.oracle is not None and not inst.constraints:
        return UGInstance(g, inst.m, oracle=inst.oracle)
    constraints = {}
    for (u, v) in edges:
        constraints[(u, v)] = inst.constraint(u, v)
        constraints[(v, u)] = inst.constraint(v, u)
    return UGInstance(g, inst.m, constraints, oracle=inst.oracle)


def instance_to_json(inst: UGInstance) -> str:
    """UG instance schema: the graph plus one permutation image array per
    canonically oriented edge (the reverse orientation is the inverse)."""
    verts = list(inst.graph.vertices())
    vid = {v: i for i, v in enumerate(verts)}
    cons = []
    for (u, v) in sorted(inst.graph.edges,
                         key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1]))):
        cons.append([vid[u], vid[v], list(inst.constraint(u, v))])
    return json.dumps({
        "schema": "hdxlab.ug.v1",
        "m": inst.m,
        "graph": json.loads(graph_to_json(inst.graph)),
        "constraints": cons,
    })


def instance_from_json(s: str) -> UGInstance:
    obj = json.loads(s)
    if obj.get("schema") != "hdxlab.ug.v1":
        raise ValueError("not a UG instance document")
    graph = graph_from_json(json.dumps(obj["graph"]))
    verts = list(graph.vertices())
    constraints = {}
    for ui, vi, images in obj["constraints"]:
        u, v = verts[ui], verts[vi]
        pi = tuple(images)
        constraints[(u, v)] = pi
        constraints[(v, u)] = invert(pi)
    return UGInstance(graph, obj["m"], constraints)
