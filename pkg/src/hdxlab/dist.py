"""Distributions over products of coordinate spaces, and the weighted
graphs derived from them.

A PartiteDistribution holds an explicit table of (tuple, weight) rows over
an ordered set of integer coordinate labels.  Marginals and conditionals
are exact.  Vertices of derived graphs are (labels, values) pairs so that
a vertex remembers which coordinates it assigns; the empty restriction
((), ()) serves as the apex vertex when a side of a graph is built from
no coordinates.

Large supports that cannot be enumerated are handled by samplers (see
TupleSampler); graph-spectral operations require the explicit backing.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .gf import Subspace

NORM_TOL = 1e-12
APEX = ((), ())

__all__ = [
    "PartiteDistribution",
    "TupleSampler",
    "WeightedGraph",
    "SimplicialComplexView",
    "bipartite_graph",
    "tripartite_graph",
    "graph_G_r",
    "partite_graph_G_r",
    "up_down_operators",
    "vertex_sort_key",
    "encode_value",
    "decode_value",
]


def vertex_sort_key(v):
    """Total order for graph vertices of any supported value type."""
    if isinstance(v, Subspace):
        return (1, v.key())
    if isinstance(v, tuple):
        return (2, tuple(vertex_sort_key(x) for x in v))
    if isinstance(v, (int, np.integer)):
        return (0, int(v))
    return (3, repr(v))


class PartiteDistribution:
    """Explicit distribution over prod_{i in labels} X_i.

    rows are tuples with one entry per label (labels kept sorted
    ascending); weights are positive and sum to 1.
    """

    def __init__(self, labels, rows, weights):
        self.labels = tuple(labels)
        if list(self.labels) != sorted(self.labels):
            raise ValueError("labels must be sorted ascending")
        self.rows = list(rows)
        self.weights = np.asarray(weights, dtype=np.float64)
        if len(self.rows) != self.weights.shape[0]:
            raise ValueError("rows/weights length mismatch")
        if len(self.rows) and (self.weights <= 0).any():
            raise ValueError("weights must be positive")
        total = float(self.weights.sum()) if len(self.rows) else 0.0
        if len(self.rows) and abs(total - 1.0) > NORM_TOL:
            self.weights = self.weights / total
        self.meta = {}
        self._index = None  # label -> value -> sorted np.ndarray of row ids
        self._marg_cache = {}

    @staticmethod
    def from_rows(labels, rows, weights=None):
        """Build from possibly-duplicated rows, aggregating weights."""
        labels = tuple(labels)
        if weights is None:
            weights = [1.0] * len(rows)
        agg = {}
        for r, w in zip(rows, weights):
            r = tuple(r)
            if len(r) != len(labels):
                raise ValueError("row arity != number of labels")
            agg[r] = agg.get(r, 0.0) + float(w)
        rows = list(agg.keys())
        w = np.array([agg[r] for r in rows], dtype=np.float64)
        if len(rows):
            w = w / w.sum()
        return PartiteDistribution(labels, rows, w)

    def __len__(self):
        return len(self.rows)

    def _positions(self, s):
        pos = []
        for lab in s:
            try:
                pos.append(self.labels.index(lab))
            except ValueError:
                raise ValueError("label %r not in index set %r" % (lab, self.labels))
        return pos

    def _build_index(self):
        if self._index is not None:
            return
        idx = {lab: {} for lab in self.labels}
        for i, row in enumerate(self.rows):
            for pos, lab in enumerate(self.labels):
                idx[lab].setdefault(row[pos], []).append(i)
        self._index = {
            lab: {v: np.asarray(ids, dtype=np.int64) for v, ids in d.items()}
            for lab, d in idx.items()
        }

    def matching_rows(self, s, a) -> np.ndarray:
        """Sorted row ids with X_s = a (s a label subset, a a value tuple)."""
        s = tuple(s)
        a = tuple(a)
        if not s:
            return np.arange(len(self.rows), dtype=np.int64)
        self._build_index()
        ids = None
        for lab, val in zip(s, a):
            if lab not in self._index:
                raise ValueError("label %r not in index set" % (lab,))
            cur = self._index[lab].get(val)
            if cur is None:
                return np.empty(0, dtype=np.int64)
            ids = cur if ids is None else np.intersect1d(ids, cur, assume_unique=True)
            if ids.shape[0] == 0:
                return ids
        return ids

    def marginal(self, s) -> "PartiteDistribution":
        """Exact marginal onto the coordinates of s (sorted ascending);
        results are memoized on the parent."""
        s = tuple(sorted(s))
        cached = self._marg_cache.get(s)
        if cached is not None:
            return cached
        pos = self._positions(s)
        agg = {}
        for row, w in zip(self.rows, self.weights):
            key = tuple(row[p] for p in pos)
            agg[key] = agg.get(key, 0.0) + w
        rows = list(agg.keys())
        out = PartiteDistribution(s, rows, np.array([agg[r] for r in rows]))
        self._marg_cache[s] = out
        return out

    def conditional_marginal(self, s, a, target) -> "PartiteDistribution":
        """Marginal of (self | X_s = a) on `target`, touching only matching
        rows (no intermediate conditioned table)."""
        ids = self.matching_rows(tuple(s), tuple(a))
        if ids.shape[0] == 0:
            raise ValueError("restriction outside support: X_%r = %r" % (s, a))
        target = tuple(sorted(target))
        pos = self._positions(target)
        agg = {}
        for i in ids:
            row = self.rows[i]
            key = tuple(row[p] for p in pos)
            agg[key] = agg.get(key, 0.0) + self.weights[i]
        rows = list(agg.keys())
        w = np.array([agg[r] for r in rows])
        return PartiteDistribution(target, rows, w / w.sum())

    def condition(self, s, a) -> "PartiteDistribution":
        """The distribution conditioned on X_s = a, over the full index set."""
        s = tuple(s)
        a = tuple(a)
        if len(s) != len(a):
            raise ValueError("restriction arity mismatch")
        if not s:
            return self
        ids = self.matching_rows(s, a)
        if ids.shape[0] == 0:
            raise ValueError("restriction outside support: X_%r = %r" % (s, a))
        rows = [self.rows[i] for i in ids]
        w = self.weights[ids]
        return PartiteDistribution(self.labels, rows, w / w.sum())

    def support(self, s):
        """Support of the marginal on s as a list of value tuples."""
        return self.marginal(s).rows

    def sample(self, rng: np.random.Generator):
        i = rng.choice(len(self.rows), p=self.weights)
        return self.rows[int(i)]

    def weight_of(self, s, a) -> float:
        ids = self.matching_rows(s, a)
        return float(self.weights[ids].sum())

    def is_product(self, s1, s2, tol=1e-9) -> bool:
        """True if the (s1 u s2)-marginal factors as a product."""
        m12 = self.marginal(tuple(sorted(tuple(s1) + tuple(s2))))
        m1 = self.marginal(s1)
        m2 = self.marginal(s2)
        w1 = dict(zip(m1.rows, m1.weights))
        w2 = dict(zip(m2.rows, m2.weights))
        if len(m12) != len(m1) * len(m2):
            return False
        pos1 = [m12.labels.index(l) for l in m1.labels]
        pos2 = [m12.labels.index(l) for l in m2.labels]
        for row, w in zip(m12.rows, m12.weights):
            k1 = tuple(row[p] for p in pos1)
            k2 = tuple(row[p] for p in pos2)
            if abs(w - w1[k1] * w2[k2]) > tol:
                return False
        return True


class TupleSampler:
    """Sampler backing for supports too large to enumerate.

    draw(rng) returns one tuple over `labels`.  marginal() projects the
    sampler; explicit operations are obtained by materializing an
    empirical table with `table(n, rng)`.
    """

    def __init__(self, labels, draw_fn):
        self.labels = tuple(labels)
        self._draw = draw_fn

    def draw(self, rng):
        return self._draw(rng)

    def marginal(self, s) -> "TupleSampler":
        s = tuple(sorted(s))
        pos = [self.labels.index(lab) for lab in s]

        def project(rng, _pos=tuple(pos)):
            row = self._draw(rng)
            return tuple(row[p] for p in _pos)

        return TupleSampler(s, project)

    def table(self, n, rng) -> PartiteDistribution:
        rows = [self._draw(rng) for _ in range(n)]
        return PartiteDistribution.from_rows(self.labels, rows)


class WeightedGraph:
    """Weighted graph with one, two, or three vertex parts, an edge
    distribution summing to 1, and (optionally) a triangle distribution.

    Vertices are hashable; edge keys are sorted pairs, triangle keys
    sorted triples (vertex_sort_key order).
    """

    def __init__(self, parts, part_measures, edges, triangles=None, meta=None):
        self.parts = [list(p) for p in parts]
        self.part_measures = [np.asarray(m, dtype=np.float64) for m in part_measures]
        self.edges = dict(edges)
        self.triangles = dict(triangles) if triangles else None
        self.meta = dict(meta) if meta else {}
        self._part_of = {}
        self._measure_of = {}
        for pi, (vs, ms) in enumerate(zip(self.parts, self.part_measures)):
            if len(vs) != ms.shape[0]:
                raise ValueError("part/measure length mismatch")
            for v, m in zip(vs, ms):
                self._part_of[v] = pi
                self._measure_of[v] = float(m)
        total = sum(self.edges.values())
        if self.edges and abs(total - 1.0) > 1e-9:
            raise ValueError("edge weights must sum to 1 (got %r)" % total)
        for (u, v) in self.edges:
            if u not in self._part_of or v not in self._part_of:
                raise ValueError("edge endpoint not a declared vertex")
        if self.triangles:
            ttot = sum(self.triangles.values())
            if abs(ttot - 1.0) > 1e-9:
                raise ValueError("triangle weights must sum to 1")

    @property
    def n_vertices(self):
        return sum(len(p) for p in self.parts)

    def vertices(self):
        for p in self.parts:
            yield from p

    def part_of(self, v) -> int:
        return self._part_of[v]

    def vertex_measure(self, v) -> float:
        return self._measure_of[v]

    def edge_weight(self, u, v) -> float:
        return self.edges.get(edge_key(u, v), 0.0)

    def neighbors(self, v):
        if not hasattr(self, "_adj"):
            adj = {}
            for (a, b), w in self.edges.items():
                adj.setdefault(a, []).append((b, w))
                adj.setdefault(b, []).append((a, w))
            self._adj = adj
        return self._adj.get(v, [])

    def check_consistency(self, tol=1e-9):
        """Edge/triangle marginal consistency; raises on violation."""
        if self.triangles:
            from_tri = {}
            for (a, b, c), w in self.triangles.items():
                for e in (edge_key(a, b), edge_key(b, c), edge_key(a, c)):
                    from_tri[e] = from_tri.get(e, 0.0) + w / 3.0
            for e, w in from_tri.items():
                if abs(self.edges.get(e, 0.0) - w) > tol:
                    raise AssertionError("triangle marginal != edge weight at %r" % (e,))
        # Vertex mass from edges matches part measures up to the part-count factor.
        nparts = len(self.parts)
        factor = 1.0 if nparts <= 2 else 2.0 / 3.0
        mass = {}
        for (a, b), w in self.edges.items():
            mass[a] = mass.get(a, 0.0) + w
            mass[b] = mass.get(b, 0.0) + w
        if nparts >= 2:
            for v, m in mass.items():
                if abs(m - factor * self._measure_of[v]) > 1e-6:
                    raise AssertionError("edge marginal inconsistent at %r" % (v,))
        return True


def edge_key(u, v):
    return (u, v) if vertex_sort_key(u) <= vertex_sort_key(v) else (v, u)


def triangle_key(u, v, w):
    return tuple(sorted((u, v, w), key=vertex_sort_key))


def _part_vertices(mu: PartiteDistribution, s):
    s = tuple(sorted(s))
    if not s:
        return [APEX], np.array([1.0])
    m = mu.marginal(s)
    order = sorted(range(len(m)), key=lambda i: vertex_sort_key(m.rows[i]))
    verts = [(s, m.rows[i]) for i in order]
    meas = m.weights[order]
    return verts, meas


def bipartite_graph(mu: PartiteDistribution, left, right, meta=None) -> WeightedGraph:
    """The bipartite graph A(L, R; mu): edge (X_L, X_R) weighted by mu."""
    left = tuple(sorted(left))
    right = tuple(sorted(right))
    if set(left) & set(right):
        raise ValueError("left/right coordinate sets overlap")
    if not left or not right:
        raise ValueError("bipartite sides must be nonempty")
    lv, lm = _part_vertices(mu, left)
    rv, rm = _part_vertices(mu, right)
    joint = mu.marginal(tuple(sorted(left + right)))
    lpos = [joint.labels.index(l) for l in left]
    rpos = [joint.labels.index(l) for l in right]
    edges = {}
    for row, w in zip(joint.rows, joint.weights):
        u = (left, tuple(row[p] for p in lpos))
        v = (right, tuple(row[p] for p in rpos))
        k = edge_key(u, v)
        edges[k] = edges.get(k, 0.0) + w
    m = dict(meta or {})
    m.setdefault("kind", "bipartite")
    m["part_labels"] = (left, right)
    g = WeightedGraph([lv, rv], [lm, rm], edges, meta=m)
    g.dist = mu
    return g


def tripartite_graph(mu: PartiteDistribution, s1, s2, s3, meta=None) -> WeightedGraph:
    """T(S1, S2, S3; mu): triangle distribution mu^{S1 u S2 u S3}, edges the
    1/3-mixture of the three pair projections.  Empty parts contribute a
    single apex vertex."""
    sets = [tuple(sorted(s)) for s in (s1, s2, s3)]
    for i in range(3):
        for j in range(i + 1, 3):
            if set(sets[i]) & set(sets[j]):
                raise ValueError("parts must be pairwise disjoint")
    union = tuple(sorted(sets[0] + sets[1] + sets[2]))
    parts, measures = [], []
    for s in sets:
        v, m = _part_vertices(mu, s)
        parts.append(v)
        measures.append(m)
    joint = mu.marginal(union) if union else None
    pos = []
    for s in sets:
        pos.append([union.index(l) for l in s] if union else [])

    def vert(row, i):
        if not sets[i]:
            return APEX
        return (sets[i], tuple(row[p] for p in pos[i]))

    edges, triangles = {}, {}
    if joint is None:
        raise ValueError("at least one part must be nonempty")
    for row, w in zip(joint.rows, joint.weights):
        vs = [vert(row, i) for i in range(3)]
        tk = triangle_key(*vs)
        triangles[tk] = triangles.get(tk, 0.0) + w
        for i in range(3):
            for j in range(i + 1, 3):
                k = edge_key(vs[i], vs[j])
                edges[k] = edges.get(k, 0.0) + w / 3.0
    m = dict(meta or {})
    m.setdefault("kind", "tripartite")
    m["part_labels"] = tuple(sets)
    g = WeightedGraph(parts, measures, edges, triangles, meta=m)
    g.dist = mu
    return g


@dataclass
class SimplicialComplexView:
    """A pure d-dimensional complex given by its weighted top faces.

    Faces are canonically sorted tuples of vertices.  mu_k is realized by
    down-sampling: draw a top face, then a uniform k-subset.
    """

    top_faces: list
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.top_faces = [tuple(sorted(f, key=vertex_sort_key)) for f in self.top_faces]
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.weights = self.weights / self.weights.sum()
        dims = {len(f) for f in self.top_faces}
        if len(dims) != 1:
            raise ValueError("complex must be pure (all top faces the same size)")
        self.d = dims.pop()

    def level_distribution(self, k, budget=5_000_000):
        """Exact mu_k as {face: weight}; cost |top| * C(d, k)."""
        if k > self.d:
            raise ValueError("k exceeds complex dimension")
        n_terms = len(self.top_faces) * math.comb(self.d, k)
        if n_terms > budget:
            raise ValueError("level enumeration budget exceeded (%d terms)" % n_terms)
        denom = math.comb(self.d, k)
        out = {}
        for f, w in zip(self.top_faces, self.weights):
            share = w / denom
            for sub in itertools.combinations(f, k):
                out[sub] = out.get(sub, 0.0) + share
        return out

    def link(self, face) -> "SimplicialComplexView":
        face = tuple(sorted(face, key=vertex_sort_key))
        fs = set(face)
        tops, ws = [], []
        for f, w in zip(self.top_faces, self.weights):
            if fs.issubset(f):
                tops.append(tuple(x for x in f if x not in fs))
                ws.append(w)
        if not tops:
            raise ValueError("face not in complex: %r" % (face,))
        return SimplicialComplexView(tops, np.asarray(ws), meta={"link_of": face})

    def skeleton(self) -> WeightedGraph:
        """The weighted 1-skeleton (vertices mu_1, edges mu_2)."""
        mu2 = self.level_distribution(2)
        mu1 = self.level_distribution(1)
        verts = sorted((f[0] for f in mu1), key=vertex_sort_key)
        meas = np.array([mu1[(v,)] for v in verts])
        edges = {edge_key(a, b): w for (a, b), w in mu2.items()}
        return WeightedGraph([verts], [meas], edges, meta={"kind": "skeleton"})


def graph_G_r(x: SimplicialComplexView, r: int, budget=5_000_000) -> WeightedGraph:
    """The graph on X(r) whose triangles are mu_{3r} faces split into three
    r-sets uniformly."""
    if 3 * r > x.d:
        raise ValueError("need 3r <= d")
    mu3r = x.level_distribution(3 * r, budget=budget)
    mur = x.level_distribution(r, budget=budget)
    n_splits = math.comb(3 * r, r) * math.comb(2 * r, r)
    edges, triangles = {}, {}
    for face, w in mu3r.items():
        share = w / n_splits
        for u_idx in itertools.combinations(range(3 * r), r):
            rest = [i for i in range(3 * r) if i not in u_idx]
            for v_rel in itertools.combinations(range(2 * r), r):
                v_idx = [rest[i] for i in v_rel]
                w_idx = [i for i in rest if i not in v_idx]
                u = tuple(face[i] for i in u_idx)
                v = tuple(face[i] for i in v_idx)
                ww = tuple(face[i] for i in w_idx)
                tk = triangle_key(u, v, ww)
                triangles[tk] = triangles.get(tk, 0.0) + share
                for a, b in ((u, v), (v, ww), (u, ww)):
                    k = edge_key(a, b)
                    edges[k] = edges.get(k, 0.0) + share / 3.0
    verts = sorted(mur.keys(), key=vertex_sort_key)
    meas = np.array([mur[v] for v in verts])
    g = WeightedGraph([verts], [meas], edges, triangles, meta={"kind": "G_r", "r": r})
    return g


def partite_graph_G_r(mu, r: int, sample_budget: int, rng) -> WeightedGraph:
    """Sampled realization of the (|I| choose r)-partite graph: vertices are
    (S, x_S) pairs, triangles drawn by sampling disjoint S1, S2, S3 and
    x ~ mu.  Works with explicit or sampler backing."""
    labels = mu.labels
    if 3 * r > len(labels):
        raise ValueError("need r <= |I|/3")
    draws = []
    for _ in range(sample_budget):
        perm = rng.permutation(len(labels))
        s1 = tuple(sorted(labels[i] for i in perm[:r]))
        s2 = tuple(sorted(labels[i] for i in perm[r: 2 * r]))
        s3 = tuple(sorted(labels[i] for i in perm[2 * r: 3 * r]))
        row = mu.sample(rng) if isinstance(mu, PartiteDistribution) else mu.draw(rng)
        pos = {lab: i for i, lab in enumerate(labels)}
        vs = tuple(
            (s, tuple(row[pos[l]] for l in s)) for s in (s1, s2, s3)
        )
        draws.append(vs)
    triangles, edges, vmass = {}, {}, {}
    for vs in draws:
        tk = triangle_key(*vs)
        triangles[tk] = triangles.get(tk, 0.0) + 1.0 / sample_budget
        for i in range(3):
            vmass[vs[i]] = vmass.get(vs[i], 0.0) + 1.0 / (3 * sample_budget)
            for j in range(i + 1, 3):
                k = edge_key(vs[i], vs[j])
                edges[k] = edges.get(k, 0.0) + 1.0 / (3 * sample_budget)
    verts = sorted(vmass.keys(), key=vertex_sort_key)
    meas = np.array([vmass[v] for v in verts])
    meas = meas / meas.sum()
    g = WeightedGraph(
        [verts], [meas], edges, triangles,
        meta={"kind": "partite_G_r", "r": r, "sampled": True, "labels": labels},
    )
    g.dist = mu
    return g


def up_down_operators(x: SimplicialComplexView, k: int, j: int, budget=5_000_000):
    """Stochastic up/down walk matrices between levels k < j.

    Returns (U, D, faces_k, faces_j): U maps functions on X(k) to X(j)
    by averaging over k-subsets, D maps X(j) to X(k) by averaging over
    j-supersets; they are adjoint under the mu_k / mu_j inner products.
    """
    if not (0 < k < j <= x.d):
        raise ValueError("need 0 < k < j <= d")
    muj = x.level_distribution(j, budget=budget)
    faces_j = sorted(muj.keys(), key=vertex_sort_key)
    jd = {f: i for i, f in enumerate(faces_j)}
    joint = {}
    denom = math.comb(j, k)
    for f, w in muj.items():
        share = w / denom
        for sub in itertools.combinations(f, k):
            joint[(sub, f)] = joint.get((sub, f), 0.0) + share
    muk = {}
    for (sub, f), w in joint.items():
        muk[sub] = muk.get(sub, 0.0) + w
    faces_k = sorted(muk.keys(), key=vertex_sort_key)
    kd = {f: i for i, f in enumerate(faces_k)}
    u = np.zeros((len(faces_j), len(faces_k)))
    d = np.zeros((len(faces_k), len(faces_j)))
    for (sub, f), w in joint.items():
        u[jd[f], kd[sub]] += w / muj[f]
        d[kd[sub], jd[f]] += w / muk[sub]
    return u, d, faces_k, faces_j


# ---------------------------------------------------------------------------
# JSON serialization (documented schema, see README)

def encode_value(v):
    if isinstance(v, Subspace):
        return {"t": "subspace", "p": v.p, "ambient": v.ambient,
                "basis": v.basis.tolist()}
    if isinstance(v, tuple):
        return {"t": "tuple", "items": [encode_value(x) for x in v]}
    if isinstance(v, (int, np.integer)):
        return {"t": "int", "v": int(v)}
    raise TypeError("cannot encode %r" % (v,))


def decode_value(obj):
    if obj["t"] == "subspace":
        return Subspace.from_rows(np.array(obj["basis"], dtype=np.int64).reshape(-1, obj["ambient"]),
                                  obj["ambient"], obj["p"])
    if obj["t"] == "tuple":
        return tuple(decode_value(x) for x in obj["items"])
    if obj["t"] == "int":
        return obj["v"]
    raise TypeError("cannot decode %r" % (obj,))


def dist_to_json(mu: PartiteDistribution) -> str:
    return json.dumps({
        "schema": "hdxlab.dist.v1",
        "labels": list(mu.labels),
        "rows": [[encode_value(x) for x in row] for row in mu.rows],
        "weights": mu.weights.tolist(),
    })


def dist_from_json(s: str) -> PartiteDistribution:
    obj = json.loads(s)
    rows = [tuple(decode_value(x) for x in row) for row in obj["rows"]]
    return PartiteDistribution(tuple(obj["labels"]), rows, np.array(obj["weights"]))


def graph_to_json(g: WeightedGraph) -> str:
    verts = list(g.vertices())
    vid = {v: i for i, v in enumerate(verts)}
    return json.dumps({
        "schema": "hdxlab.graph.v1",
        "vertices": [encode_value(v) for v in verts],
        "parts": [[vid[v] for v in p] for p in g.parts],
        "part_measures": [m.tolist() for m in g.part_measures],
        "edges": [[vid[u], vid[v], w] for (u, v), w in sorted(
            g.edges.items(), key=lambda kv: (vertex_sort_key(kv[0][0]), vertex_sort_key(kv[0][1])))],
        "triangles": None if not g.triangles else [
            [vid[a], vid[b], vid[c], w] for (a, b, c), w in sorted(
                g.triangles.items(),
                key=lambda kv: tuple(vertex_sort_key(x) for x in kv[0]))],
        "meta": {k: v for k, v in g.meta.items() if k != "part_labels"},
    })


def graph_from_json(s: str) -> WeightedGraph:
    obj = json.loads(s)
    verts = [decode_value(v) for v in obj["vertices"]]
    parts = [[verts[i] for i in p] for p in obj["parts"]]
    measures = [np.array(m) for m in obj["part_measures"]]
    edges = {edge_key(verts[u], verts[v]): w for u, v, w in obj["edges"]}
    triangles = None
    if obj["triangles"]:
        triangles = {triangle_key(verts[a], verts[b], verts[c]): w
                     for a, b, c, w in obj["triangles"]}
    return WeightedGraph(parts, measures, edges, triangles, meta=obj.get("meta"))
