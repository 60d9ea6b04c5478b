"""Cones-method propagation: block decompositions and canonical flip paths
on Grassmann and symplectic tripartite graphs, randomized propagation under
the GL/Sp actions, and the Johnson-graph propagation.

A path from the base vertex U to a vertex V flips one basis block of U to a
block of V at a time; propagating the base label along the (group-translated)
path labels the whole graph.  Vertices whose randomized block decomposition
fails the genericness ("good") conditions after the retry budget are labeled
arbitrarily (identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dist import WeightedGraph, edge_key
from .gf import (
    Subspace,
    apply,
    is_isotropic,
    random_gl,
    random_sp,
    rref,
    subspace_intersect,
    subspace_sum,
    symplectic_complement,
)
from .ug import UGInstance, compose, identity, viol

__all__ = [
    "BlockDecomposition",
    "PathTable",
    "build_block_decomposition_gr",
    "goodness_predicates",
    "build_paths_gr",
    "build_paths_symp",
    "propagate",
    "cones_solve",
    "johnson_propagate",
]


def _sub_of(vertex) -> Subspace:
    return vertex[1][0]


def _vertex_for(graph, s: Subspace):
    return ((s.dim,), (s,))


def _span_rows(rows_list, ambient, p) -> Subspace:
    rows = np.concatenate([r for r in rows_list if r.shape[0]], axis=0) \
        if any(r.shape[0] for r in rows_list) else np.zeros((0, ambient), dtype=np.int64)
    return Subspace.from_rows(rows, ambient, p)


def _span_dim(rows_list, p) -> int:
    rows = np.concatenate(rows_list, axis=0)
    return rref(rows, p)[1]


def _random_block_refinement(v: Subspace, sizes, rng) -> list:
    """Random nested block decomposition of v: rows of a random basis of v
    grouped by the given sizes (which must sum to dim v)."""
    assert sum(sizes) == v.dim
    c = random_gl(v.dim, v.p, rng) if v.dim else np.zeros((0, 0), dtype=np.int64)
    b = (c @ v.basis) % v.p
    out, at = [], 0
    for s in sizes:
        out.append(b[at: at + s])
        at += s
    return out


def _own_sizes(grid, dim):
    """Suffix of the block grid covering `dim`, cropping the first block when
    the grid does not divide evenly (edge-case layout, best effort)."""
    sizes = []
    total = 0
    for s in reversed(grid):
        if total >= dim:
            break
        take = min(s, dim - total)
        sizes.append(take)
        total += take
    if total != dim:
        raise ValueError("block grid cannot cover dimension %d" % dim)
    return list(reversed(sizes))


@dataclass
class BlockDecomposition:
    graph: WeightedGraph
    base: Subspace
    regime: str            # "wide": k = k3-k2, blocks target k3; "narrow": k = k2-k1
    k: int
    grid: list             # block sizes of the base vertex
    base_blocks: list      # rows per block of the base
    blocks: dict = field(default_factory=dict)      # vertex -> list of row arrays
    good: dict = field(default_factory=dict)        # vertex -> bool
    assoc: dict = field(default_factory=dict)       # vertex -> associated Subspace (narrow G3)

    @property
    def t(self):
        return len(self.grid)

    @property
    def target(self):
        return self.base.dim


def _full_blocks(bd: BlockDecomposition, v) -> list:
    """All t blocks of a vertex: shared base prefix plus its own blocks."""
    own = bd.blocks[v]
    return bd.base_blocks[: bd.t - len(own)] + own


def _vertex_good(bd: BlockDecomposition, blocks) -> bool:
    p = bd.base.p
    for i in range(1, bd.t + 1):
        rows = blocks[:i] + bd.base_blocks[i:]
        if _span_dim(rows, p) != bd.target:
            return False
    return True


def build_block_decomposition_gr(graph: WeightedGraph, rng, base=None,
                                 retries: int = 32) -> BlockDecomposition:
    """Random block decomposition on Gr(k1,k2,k3) per the regime dispatch:
    base in the k3 part when k3-k2 <= k2-k1, else in the k2 part.  Each
    vertex resamples its refinement until good (up to `retries`); failures
    are marked not-good."""
    if graph.meta.get("family") not in ("grassmann", "symplectic"):
        raise ValueError("expected a building tripartite graph")
    k1, k2, k3 = graph.meta["dims"]
    p = graph.meta["p"]
    wide = (k3 - k2) <= (k2 - k1)
    if wide:
        k = k3 - k2
        base_part = 2
    else:
        k = k2 - k1
        base_part = 1
    if base is None:
        base = _sub_of(graph.parts[base_part][0])
    grid_dim = base.dim
    t = -(-grid_dim // k)
    grid = [k] * (t - 1) + [grid_dim - k * (t - 1)]
    bd = BlockDecomposition(graph, base, "wide" if wide else "narrow", k, grid,
                            _random_block_refinement(base, grid, rng))
    bd.blocks[_vertex_for(graph, base)] = bd.base_blocks
    bd.good[_vertex_for(graph, base)] = True
    for part in graph.parts:
        for vx in part:
            if vx in bd.blocks:
                continue
            v = _sub_of(vx)
            target_sub = v
            if not wide and v.dim == k3:
                # narrow regime associates a k2-dim subspace of v
                target_sub = None
            if not wide and v.dim == k1:
                own = _own_sizes(grid, v.dim + grid[0])[1:]
            else:
                own = _own_sizes(grid, v.dim if target_sub is not None else k2)
            ok = False
            for _ in range(retries):
                if target_sub is None:
                    sub = _random_subspace_inside(v, k2, rng)
                else:
                    sub = target_sub
                blocks = _random_block_refinement(sub, own, rng)
                full = bd.base_blocks[: t - len(own)] + blocks
                if _vertex_good(bd, full):
                    ok = True
                    break
            bd.blocks[vx] = blocks
            bd.good[vx] = ok
            if target_sub is None:
                bd.assoc[vx] = sub
    return bd


def _random_subspace_inside(v: Subspace, dim, rng) -> Subspace:
    c = random_gl(v.dim, v.p, rng)
    return Subspace.from_rows((c[:dim] @ v.basis) % v.p, v.ambient, v.p)


def goodness_predicates(bd: BlockDecomposition, item) -> bool:
    """Vertex goodness (cached) or edge goodness for an (V, W) pair.

    Edge condition, for W inside V: both endpoints good and for all
    j < i in [t], dim(V_{<=j}, W_{(j+1..i)}, U_{>i}) equals the target."""
    if not (isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], tuple)
            and item[0] and isinstance(item[0][0], tuple)):
        return bd.good[item]
    v, w = item
    if _sub_of(v).dim < _sub_of(w).dim:
        v, w = w, v
    if not (bd.good.get(v) and bd.good.get(w)):
        return False
    p = bd.base.p
    bv = _full_blocks(bd, v)
    bw = _full_blocks(bd, w)
    for i in range(1, bd.t + 1):
        for j in range(i):
            rows = bv[:j] + bw[j:i] + bd.base_blocks[i:]
            if _span_dim(rows, p) != bd.target:
                return False
    return True


@dataclass
class PathTable:
    graph: WeightedGraph
    base_vertex: tuple
    paths: dict                 # vertex -> list of vertices (graph members)
    good: dict                  # vertex -> bool
    meta: dict = field(default_factory=dict)
    decomposition: BlockDecomposition = None
    _edge_frac: float = field(default=None, repr=False)

    def good_vertex_fraction(self) -> float:
        tot = good = 0.0
        for part, meas in zip(self.graph.parts, self.graph.part_measures):
            for v, m in zip(part, meas):
                tot += m
                if self.good.get(v):
                    good += m
        return good / tot

    def good_edge_fraction(self) -> float:
        if self._edge_frac is None:
            good = 0.0
            for (u, v), w in self.graph.edges.items():
                if self.edge_good(u, v):
                    good += w
            self._edge_frac = good
        return self._edge_frac

    def edge_good(self, u, v) -> bool:
        if self.decomposition is not None:
            return goodness_predicates(self.decomposition, (u, v))
        return bool(self.good.get(u) and self.good.get(v))


def _check_path(graph, path):
    for a, b in zip(path, path[1:]):
        if a == b:
            raise AssertionError("path repeats a vertex consecutively")
        if edge_key(a, b) not in graph.edges:
            raise AssertionError("path step is not a graph edge: %r - %r" % (a, b))


def build_paths_gr(bd: BlockDecomposition) -> PathTable:
    """Flip paths U -> V from the block decomposition; alternates between the
    target-dimension part and the one-block-less part, with a final step down
    to V when V is not in the target part.

    In the block-divisible regime an intermediate of the wrong dimension is a
    goodness bug and raises; in the best-effort non-divisible layout such
    vertices are downgraded to not-good instead."""
    graph = bd.graph
    p = bd.base.p
    ambient = bd.base.ambient
    base_vx = _vertex_for(graph, bd.base)
    paths = {base_vx: [base_vx]}
    k1, k2, k3 = graph.meta["dims"]
    dims = {k1, k2, k3}
    divisible = len(set(bd.grid)) == 1 and all(d % bd.k == 0 for d in dims
                                               if d <= bd.target)
    good = bd.good  # downgrades must reach the edge predicates too
    for part in graph.parts:
        for vx in part:
            if vx == base_vx:
                continue
            if not good[vx]:
                continue
            blocks = _full_blocks(bd, vx)
            steps = []
            for i in range(bd.t):
                even = _span_rows(blocks[:i] + bd.base_blocks[i:], ambient, p)
                odd = _span_rows(blocks[:i] + bd.base_blocks[i + 1:], ambient, p)
                steps.extend([even, odd])
            steps.append(_span_rows(blocks, ambient, p))
            v = _sub_of(vx)
            if steps[-1] != v:
                steps.append(v)
            bad_dim = next((s.dim for s in steps if s.dim not in dims), None)
            if bad_dim is not None:
                if divisible:
                    raise AssertionError(
                        "intermediate of dimension %d is not a vertex" % bad_dim)
                good[vx] = False
                continue
            path = [_vertex_for(graph, s) for s in steps]
            dedup = [path[0]]
            for x in path[1:]:
                if x != dedup[-1]:
                    dedup.append(x)
            _check_path(graph, dedup)
            paths[vx] = dedup
    return PathTable(graph, base_vx, paths, dict(good),
                     meta={"regime": bd.regime, "k": bd.k, "t": bd.t},
                     decomposition=bd)


# ---------------------------------------------------------------------------
# Symplectic paths

def _rows_complement_in(inner: Subspace, outer: Subspace, rng=None):
    """Rows extending a basis of inner to a basis of outer, randomized when
    rng is given (outer must contain inner)."""
    p = outer.p
    if rng is not None:
        c = random_gl(outer.dim, p, rng)
        cand = (c @ outer.basis) % p
    else:
        cand = outer.basis
    rows = []
    cur = inner.basis
    rank = inner.dim
    for row in cand:
        stacked = np.concatenate([cur, row.reshape(1, -1)])
        r, rk = rref(stacked, p)
        if rk > rank:
            rows.append(row)
            cur = r[:rk]
            rank = rk
        if rank == outer.dim:
            break
    return np.array(rows, dtype=np.int64).reshape(len(rows), outer.ambient)


def _isotropic_block_step(w1_rows, w2: Subspace, size, rng) -> np.ndarray:
    """One application of the isotropic-path construction: a `size`-dim
    subspace W of w2 with W disjoint from W1 n W2 and W + W1 isotropic of
    dimension dim(W1) + size."""
    p = w2.p
    ambient = w2.ambient
    w1 = _span_rows([w1_rows], ambient, p)
    u0 = subspace_intersect(w1, w2)
    w1c = _span_rows([_rows_complement_in(u0, w1)], ambient, p)
    w2c_rows = _rows_complement_in(u0, w2, rng)
    w2c = _span_rows([w2c_rows], ambient, p)
    z = subspace_intersect(symplectic_complement(w1c), w2c)
    if z.dim < size:
        raise AssertionError("isotropic step has too little room (dim %d < %d)"
                             % (z.dim, size))
    c = random_gl(z.dim, p, rng)
    return (c[:size] @ z.basis) % p


def _blocks_by_steps(w2: Subspace, first_rows, base_blocks, grid, rng):
    """Iterate the isotropic step to refine w2 against the base blocks;
    first_rows, when given, is a pre-chosen first block (S1 case)."""
    blocks = [] if first_rows is None else [first_rows]
    start = len(blocks)
    for i in range(start, len(grid)):
        w1_rows_list = blocks[:i] + base_blocks[i + 1:]
        w1_rows = np.concatenate(w1_rows_list) if w1_rows_list else \
            np.zeros((0, w2.ambient), dtype=np.int64)
        blocks.append(_isotropic_block_step(w1_rows, w2, grid[i], rng))
    return blocks


def _random_isotropic_inside(z: Subspace, dim, rng, tries=16):
    """Random dim-dimensional isotropic subspace of z, grown greedily: each
    new vector is a random element of z n Symp(cur) outside cur."""
    p = z.p
    for _ in range(tries):
        cur = Subspace.zero(z.ambient, p)
        ok = True
        for _ in range(dim):
            room = subspace_intersect(z, symplectic_complement(cur))
            comp = _rows_complement_in(cur, room)  # cur is isotropic, so cur <= room
            if comp.shape[0] == 0:
                ok = False
                break
            coeff = rng.integers(0, p, size=comp.shape[0])
            if not coeff.any():
                coeff[int(rng.integers(0, comp.shape[0]))] = 1
            w = (coeff @ comp) % p
            cur = Subspace.from_rows(
                np.concatenate([cur.basis, w.reshape(1, -1)]), z.ambient, p)
        if ok and cur.dim == dim:
            return cur
    return None


def build_paths_symp(graph: WeightedGraph, rng, base=None, retries: int = 32) -> PathTable:
    """Paths from a base k2-dimensional vertex of S(k1,k2,k3), built by the
    constructive isotropic-step claims; good sets use the Symp-dimension
    conditions, and construction failures downgrade vertices to not-good."""
    if graph.meta.get("family") != "symplectic":
        raise ValueError("expected a symplectic tripartite graph")
    k1, k2, k3 = graph.meta["dims"]
    p = graph.meta["p"]
    two_d = 2 * graph.meta["d"]
    k = k2 - k1
    if base is None:
        base = _sub_of(graph.parts[1][0])
    t = -(-k2 // k)
    grid = [k] * (t - 1) + [k2 - k * (t - 1)]
    base_blocks = _random_block_refinement(base, grid, rng)
    base_vx = _vertex_for(graph, base)
    symp_u = symplectic_complement(base)
    symp_u_tail = [symplectic_complement(
        _span_rows(base_blocks[i:], two_d, p)) for i in range(t)]

    def good_of(v: Subspace) -> bool:
        if subspace_intersect(v, base).dim != 0:
            return False
        if v.dim == k2:
            for i in range(1, t):
                if subspace_intersect(v, symp_u_tail[i]).dim != sum(grid[:i]):
                    return False
            return True
        if v.dim == k1:
            for i in range(1, t):
                want = sum(grid[:i]) - grid[0]
                if subspace_intersect(v, symp_u_tail[i]).dim != max(0, want):
                    return False
                sv = symplectic_complement(v)
                if subspace_intersect(sv, symp_u_tail[i]).dim != \
                        two_d - k1 - k2 + sum(grid[:i]):
                    return False
            return True
        return subspace_intersect(v, symp_u).dim == k3 - k2

    paths = {base_vx: [base_vx]}
    good = {base_vx: True}
    dims = set(graph.meta["dims"])
    for part in graph.parts:
        for vx in part:
            if vx == base_vx:
                continue
            v = _sub_of(vx)
            if not good_of(v):
                good[vx] = False
                continue
            built = None
            for _ in range(retries):
                try:
                    built = _try_symp_path(v, base, base_blocks, grid, rng,
                                           symp_u, k1, k2, two_d, p)
                except AssertionError:
                    built = None
                if built is not None:
                    break
            if built is None:
                good[vx] = False
                continue
            blocks, vprime = built
            steps = []
            for i in range(t):
                even = _span_rows(blocks[:i] + base_blocks[i:], two_d, p)
                odd = _span_rows(blocks[:i] + base_blocks[i + 1:], two_d, p)
                steps.extend([even, odd])
            steps.append(vprime)
            if vprime != v:
                steps.append(v)
            bad = False
            for s in steps:
                if s.dim not in dims:
                    bad = True
                    break
            if bad:
                good[vx] = False
                continue
            path = [_vertex_for(graph, s) for s in steps]
            dedup = [path[0]]
            for x in path[1:]:
                if x != dedup[-1]:
                    dedup.append(x)
            try:
                _check_path(graph, dedup)
            except AssertionError:
                good[vx] = False
                continue
            paths[vx] = dedup
            good[vx] = True
    return PathTable(graph, base_vx, paths, good,
                     meta={"regime": "symplectic", "k": k, "t": t})


def _try_symp_path(v: Subspace, base: Subspace, base_blocks, grid, rng,
                   symp_u, k1, k2, two_d, p):
    """One randomized attempt at the block decomposition for the path U -> v.
    Returns (blocks, v_prime)."""
    if v.dim == k2:
        blocks = _blocks_by_steps(v, None, base_blocks, grid, rng)
        vprime = _span_rows(blocks, two_d, p)
        assert vprime == v
        return blocks, v
    if v.dim > k2:
        inter = subspace_intersect(v, symp_u)
        comp_rows = _rows_complement_in(inter, v, rng)
        vprime = _span_rows([comp_rows], two_d, p)
        assert vprime.dim == k2
        assert subspace_intersect(vprime, symp_u).dim == 0
        blocks = _blocks_by_steps(vprime, None, base_blocks, grid, rng)
        assert _span_rows(blocks, two_d, p) == vprime
        return blocks, vprime
    # v in the k1 part: pick a first block inside Symp(U_{>=2}) n Symp(V)
    tail = _span_rows(base_blocks[1:], two_d, p)
    z = subspace_intersect(symplectic_complement(tail), symplectic_complement(v))
    first = _random_isotropic_inside(z, grid[0], rng)
    assert first is not None
    vprime = subspace_sum(first, v)
    assert vprime.dim == k2
    u_tail_sum = subspace_sum(first, tail)
    assert u_tail_sum.dim == k2
    assert is_isotropic(vprime) and is_isotropic(u_tail_sum)
    assert subspace_intersect(first, _span_rows([base_blocks[0]], two_d, p)).dim == 0
    blocks = _blocks_by_steps(vprime, first.basis, base_blocks, grid, rng)
    assert _span_rows(blocks, two_d, p) == vprime
    return blocks, vprime


# ---------------------------------------------------------------------------
# Propagation

def _group_element(graph, rng):
    fam = graph.meta.get("family")
    p = graph.meta["p"]
    if fam == "grassmann":
        return random_gl(graph.meta["d"], p, rng)
    if fam == "symplectic":
        return random_sp(graph.meta["d"], p, rng)
    raise ValueError("no group action for graph family %r" % fam)


def propagate(inst: UGInstance, paths: PathTable, g_elem) -> dict:
    """Label f(g(U)) = id and every good V by the constraint product along
    the g-image of the path U -> V; not-good vertices get the identity."""
    if inst.graph is not paths.graph:
        raise ValueError("instance graph does not match the path table")
    m = inst.m
    cache = {}

    def img(vx):
        if vx not in cache:
            s = _sub_of(vx)
            cache[vx] = _vertex_for(inst.graph, apply(g_elem, s))
        return cache[vx]

    out = {}
    for vx in inst.graph.vertices():
        label = identity(m)
        if paths.good.get(vx) and vx in paths.paths:
            path = paths.paths[vx]
            prev = img(path[0])
            for step in path[1:]:
                cur = img(step)
                label = compose(inst.constraint(cur, prev), label)
                prev = cur
        out[img(vx)] = label
    return out


def cones_solve(inst: UGInstance, trials: int, rng, paths: PathTable = None,
                retries: int = 32):
    """Run `propagate` over random group elements; returns the min-viol
    assignment and per-trial statistics."""
    if paths is None:
        fam = inst.graph.meta.get("family")
        if fam == "grassmann":
            bd = build_block_decomposition_gr(inst.graph, rng, retries=retries)
            paths = build_paths_gr(bd)
        elif fam == "symplectic":
            paths = build_paths_symp(inst.graph, rng, retries=retries)
        else:
            raise ValueError("cones_solve needs a building tripartite graph")
    best, best_v = None, None
    viols = []
    for _ in range(trials):
        g = _group_element(inst.graph, rng)
        a = propagate(inst, paths, g)
        v = viol(inst, a)
        viols.append(v)
        if best_v is None or v < best_v:
            best, best_v = a, v
    stats = {
        "viols": viols,
        "mean_viol": float(np.mean(viols)),
        "best_viol": float(best_v),
        "good_vertex_frac": paths.good_vertex_fraction(),
        "good_edge_frac": paths.good_edge_fraction(),
    }
    return best, stats


def johnson_propagate(inst: UGInstance, rng) -> dict:
    """Propagation on J(n, k): random base vertex and random ordering of the
    ground set; the path to V swaps one element at a time in order."""
    meta = inst.graph.meta
    if meta.get("family") != "johnson":
        raise ValueError("expected a Johnson graph instance")
    n = meta["n"]
    verts = list(inst.graph.vertices())
    weights = np.array([inst.graph.vertex_measure(v) for v in verts])
    u0 = verts[int(rng.choice(len(verts), p=weights / weights.sum()))]
    order = {int(x): i for i, x in enumerate(rng.permutation(n))}
    out = {u0: identity(inst.m)}
    for v in verts:
        if v == u0:
            continue
        drop = sorted(set(u0) - set(v), key=lambda x: order[x])
        add = sorted(set(v) - set(u0), key=lambda x: order[x])
        cur = u0
        label = identity(inst.m)
        for d_el, a_el in zip(drop, add):
            nxt = tuple(sorted(set(cur) - {d_el} | {a_el}))
            label = compose(inst.constraint(nxt, cur), label)
            cur = nxt
        assert cur == v
        out[v] = label
    return out
