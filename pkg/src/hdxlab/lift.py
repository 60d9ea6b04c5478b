"""The recursive restrict-solve-align-lift solver for affine UG instances on
tripartite graphs T(R1,R2,R3;mu) and on sampled partite graphs G_r(D).

Recursion shape: condition the distribution on a pivot restriction per part,
solve each restricted sub-instance, align the solutions pairwise by affine
shifts on overlap graphs, solve the resulting instance over restrictions,
and lift.  Solution lists are kept implicit: a list is the right-coset of
its base solution, so only the base assignment is stored.

Terminal cases: an empty part (apex propagation), brute force on tiny
instances, cones propagation on recognized building tripartite graphs,
and, for singleton parts, product-structure propagation or spanning-tree
propagation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import cones_solve
from .dist import APEX, PartiteDistribution, WeightedGraph, tripartite_graph
from .ug import (
    FailureWitness,
    UGInstance,
    best_shift,
    brute_force_solve,
    compose,
    identity,
    incons,
    invert,
    restrict_instance,
    tree_propagate_solve,
    viol,
)

__all__ = [
    "SolveParams",
    "solve_tripartite",
    "solve_partite",
    "align_restrictions",
    "choose_pivots",
    "separation_check",
    "well_spread_check",
]


@dataclass
class SolveParams:
    mode: str = "easy"            # "easy": singleton pivots; "exp": 3k-sized pivot sets
    k: int = 1                    # block size for exp mode (|S_i| = 3k)
    brute_vertices: int = 12
    brute_m_max: int = 3
    brute_budget: int = 2_000_000
    cones_trials: int = 8
    tree_trials: int = 3
    lift_samples: int = 8         # per-vertex restriction samples in exp mode
    triples_budget: int = 64      # separated-triple attempts in solve_partite
    separation_factor: float = 1.0
    terminal_depth: int = 2       # recursion levels before terminal propagation
    max_depth: int = 12


def separation_check(indices, threshold) -> bool:
    """Minimum pairwise gap of the index set is at least threshold."""
    idx = sorted(indices)
    if len(idx) <= 1:
        return True
    return min(b - a for a, b in zip(idx, idx[1:])) >= threshold


def well_spread_check(r_set, interval_len, slack, universe) -> bool:
    """Every length-interval_len window of the universe holds within `slack`
    of the expected |R| * interval_len / |universe| points of R."""
    universe = sorted(universe)
    d = len(universe)
    pos = {lab: i for i, lab in enumerate(universe)}
    expected = len(r_set) * interval_len / d
    for start in range(0, d, interval_len):
        cnt = sum(1 for lab in r_set if start <= pos[lab] < start + interval_len)
        if abs(cnt - expected) > slack:
            return False
    return True


def choose_pivots(mu: PartiteDistribution, parts, mode="easy", k=1):
    """Pivot restriction sets (S1, S2, S3).

    easy mode: the median index of each part.  exp mode: 3k-sized sets drawn
    from three increasing index intervals, each meeting every part in k
    indices; falls back to easy mode when that structure is infeasible.
    """
    parts = [tuple(sorted(p)) for p in parts]
    if mode == "easy":
        return tuple((p[len(p) // 2],) for p in parts), "easy"
    union = sorted(l for p in parts for l in p)
    n = len(union)
    bounds = [0, n // 3, 2 * n // 3, n]
    intervals = [set(union[bounds[i]: bounds[i + 1]]) for i in range(3)]
    sets = []
    for interval in intervals:
        s = []
        for p in parts:
            hit = sorted(set(p) & interval)
            if len(hit) < k:
                return choose_pivots(mu, parts, "easy")
            s.extend(hit[:k])
        sets.append(tuple(sorted(s)))
    return tuple(sets), "exp"


def align_restrictions(x_a: dict, x_b: dict, weights: dict):
    """Best shift between two partial solutions on their common domain.

    Returns (pi, bad, disagreement) where x_a ~ x_b . pi off the `bad` set."""
    common = [v for v in x_a if v in x_b]
    if not common:
        raise ValueError("empty overlap between restricted solutions")
    pi, dis = best_shift({v: x_a[v] for v in common},
                         {v: x_b[v] for v in common},
                         {v: weights.get(v, 0.0) for v in common})
    bad = {v for v in common if x_a[v] != compose(x_b[v], pi)}
    return pi, bad, dis


def _project(vertex, target_labels):
    labels, values = vertex
    target = set(target_labels)
    kept = [(l, v) for l, v in zip(labels, values) if l in target]
    return (tuple(l for l, _ in kept), tuple(v for _, v in kept))


def _complete(vertex, parent_parts, child_parts, pinned):
    """Map a child-graph vertex back to the parent-graph vertex by
    re-attaching pinned coordinates."""
    labels, values = vertex
    if labels == ():
        idx = [i for i, cp in enumerate(child_parts) if len(cp) == 0]
        if len(idx) != 1:
            raise ValueError("ambiguous apex completion")
        part = idx[0]
    else:
        part = next(i for i, cp in enumerate(child_parts) if set(cp) == set(labels))
    have = dict(zip(labels, values))
    have.update({l: pinned[l] for l in parent_parts[part] if l not in have})
    full = tuple(sorted(parent_parts[part]))
    return (full, tuple(have[l] for l in full))


def _part_marginals(mu, parts, row_ids=None):
    """Per-part vertex weights, optionally restricted to given rows."""
    out = []
    if row_ids is None:
        rows, weights = mu.rows, mu.weights
    else:
        rows = [mu.rows[i] for i in row_ids]
        weights = mu.weights[row_ids]
    for p in parts:
        pos = [mu.labels.index(l) for l in p]
        agg = {}
        for row, w in zip(rows, weights):
            v = (tuple(p), tuple(row[q] for q in pos))
            agg[v] = agg.get(v, 0.0) + w
        total = sum(agg.values())
        out.append({v: w / total for v, w in agg.items()} if total else {})
    return out


def _apex_solve(inst: UGInstance):
    """Base case for an empty part: identity at the apex, one-step
    propagation everywhere else."""
    a = {APEX: identity(inst.m)}
    for v in inst.graph.vertices():
        if v == APEX:
            continue
        a[v] = compose(inst.constraint(v, APEX), a[APEX])
    return a


def _components(graph: WeightedGraph):
    seen = set()
    comps = []
    for v in graph.vertices():
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for u, _ in graph.neighbors(x):
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        seen |= comp
        comps.append(comp)
    return comps


def _tree_solve(inst: UGInstance, params: SolveParams, rng) -> dict:
    """Spanning-tree propagation per connected component, best of a few
    random roots (exact on globally consistent instances)."""
    out = {}
    for comp in _components(inst.graph):
        if len(comp) == 1:
            out[next(iter(comp))] = identity(inst.m)
            continue
        sub = restrict_instance(inst, lambda v: v in comp)
        verts = list(sub.graph.vertices())
        best, best_v = None, None
        for t in range(max(1, params.tree_trials)):
            root = verts[int(rng.integers(0, len(verts)))] if t else None
            res = tree_propagate_solve(sub, root=root)
            a = res.assignment if isinstance(res, FailureWitness) else res
            v = viol(sub, a)
            if best_v is None or v < best_v:
                best, best_v = a, v
            if best_v == 0.0:
                break
        out.update(best)
    return out


def _product_solve(inst: UGInstance, mu, parts, apex_part: int, rng):
    """Product-structure base case: fix U0 in the independent part and V0 in
    another; propagate along the star paths U0 -> V (direct edge) and
    U0 -> V0 -> U.  Tries a few root pairs and keeps the least violated.
    Returns (assignment, diameter of the cross bipartite graph)."""
    g = inst.graph
    p_i = g.parts[apex_part]
    others = [j for j in range(3) if j != apex_part]
    p_j = g.parts[others[0]]

    def star(u0, v0):
        a = {u0: identity(inst.m)}
        for j in others:
            for v in g.parts[j]:
                a[v] = compose(inst.constraint(v, u0), a[u0])
        for u in p_i:
            if u != u0:
                a[u] = compose(inst.constraint(u, v0), a[v0])
        return a

    by_mass = sorted(p_i, key=g.vertex_measure, reverse=True)
    vj_mass = sorted(p_j, key=g.vertex_measure, reverse=True)
    best, best_v = None, None
    for u0 in by_mass[:3]:
        for v0 in vj_mass[:3]:
            a = star(u0, v0)
            v = viol(inst, a)
            if best_v is None or v < best_v:
                best, best_v = a, v
            if best_v == 0.0:
                break
        if best_v == 0.0:
            break
    diam = _bipartite_diameter(g, others[0], others[1])
    return best, diam


def _bipartite_diameter(g: WeightedGraph, i: int, j: int) -> int:
    keep = set(g.parts[i]) | set(g.parts[j])
    start = g.parts[i][0]
    dist = {start: 0}
    queue = [start]
    far = 0
    while queue:
        v = queue.pop(0)
        for u, _ in g.neighbors(v):
            if u in keep and u not in dist:
                dist[u] = dist[v] + 1
                far = max(far, dist[u])
                queue.append(u)
    if len(dist) < len(keep):
        return -1  # disconnected; reported as such
    return far


def solve_tripartite(inst: UGInstance, params: SolveParams = None,
                     rng: np.random.Generator = None):
    """Solve an affine UG instance whose graph came from tripartite_graph
    (or a building tripartite); returns (assignment, report)."""
    params = params or SolveParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    mu = getattr(inst.graph, "dist", None)
    if mu is None:
        raise ValueError("solve_tripartite needs a distribution-backed graph")
    parts = inst.graph.meta["part_labels"]
    report = {"levels": []}
    a = _solve(mu, parts, inst.constraint, inst.m, params, rng, 0, report,
               graph=inst.graph)
    report["viol"] = viol(inst, a)
    return a, report


def _solve(mu, parts, constraint_fn, m, params, rng, depth, report, graph=None):
    if depth > params.max_depth:
        raise RecursionError("recursion depth exceeded")
    parts = tuple(tuple(sorted(p)) for p in parts)
    if graph is None:
        graph = tripartite_graph(mu, *parts)
    inst = UGInstance(graph, m, oracle=_FnOracle(constraint_fn))
    entry = {"depth": depth, "parts": [list(p) for p in parts],
             "n_vertices": graph.n_vertices}
    report["levels"].append(entry)

    if any(len(p) == 0 for p in parts):
        entry["base"] = "apex"
        a = _apex_solve(inst)
        entry["viol"] = viol(inst, a)
        return a

    n_assign = _perm_count(m) ** max(0, graph.n_vertices - 1)
    if graph.n_vertices <= params.brute_vertices and m <= params.brute_m_max \
            and n_assign <= params.brute_budget:
        entry["base"] = "brute"
        a, val = brute_force_solve(inst, budget=params.brute_budget)
        entry["viol"] = 1.0 - val
        return a

    if graph.meta.get("family") in ("grassmann", "symplectic") \
            and all(len(p) == 1 for p in parts):
        entry["base"] = "cones"
        a, stats = cones_solve(inst, params.cones_trials, rng)
        entry["viol"] = stats["best_viol"]
        entry["cones"] = {k: v for k, v in stats.items() if k != "viols"}
        return a

    if all(len(p) == 1 for p in parts) or depth >= params.terminal_depth:
        prod_part = _find_product_part(mu, parts) \
            if all(len(p) == 1 for p in parts) else None
        if prod_part is not None:
            entry["base"] = "product"
            a, diam = _product_solve(inst, mu, parts, prod_part, rng)
            entry["cross_diameter"] = diam
            entry["viol"] = viol(inst, a)
            return a
        entry["base"] = "tree"
        a = _tree_solve(inst, params, rng)
        entry["viol"] = viol(inst, a)
        return a

    # ----- recursive step -----
    pivots, mode = choose_pivots(mu, parts, params.mode, params.k)
    entry["pivots"] = [list(s) for s in pivots]
    entry["mode"] = mode

    solutions = {}   # (i, a_value) -> assignment on the child graph
    child_parts_of = {}
    sub_viols = []
    for i, s_i in enumerate(pivots):
        child_parts = tuple(tuple(l for l in p if l not in s_i) for p in parts)
        child_parts_of[i] = child_parts
        for a_val in mu.marginal(s_i).rows:
            mu_child = mu.condition(s_i, a_val)
            pinned = dict(zip(s_i, a_val))

            def child_cons(u, v, _pin=pinned, _cp=child_parts):
                return constraint_fn(_complete(u, parts, _cp, _pin),
                                     _complete(v, parts, _cp, _pin))

            n0 = len(report["levels"])
            sub = _solve(mu_child, child_parts, child_cons, m, params, rng,
                         depth + 1, report)
            solutions[(i, a_val)] = sub
            sub_viols.append(report["levels"][n0].get("viol", 0.0))
    entry["n_restrictions"] = len(solutions)
    entry["mean_sub_viol"] = float(np.mean(sub_viols)) if sub_viols else 0.0

    # ----- alignment between restrictions -----
    shifts = {}
    disagreements = []
    for i in range(3):
        for kk in range(i + 1, 3):
            pair_labels = tuple(sorted(pivots[i] + pivots[kk]))
            pos_i = [pair_labels.index(l) for l in pivots[i]]
            pos_k = [pair_labels.index(l) for l in pivots[kk]]
            for ab in mu.marginal(pair_labels).rows:
                a_val = tuple(ab[q] for q in pos_i)
                b_val = tuple(ab[q] for q in pos_k)
                ids = mu.matching_rows(pair_labels, ab)
                weights = {}
                proj_a, proj_b = {}, {}
                marg = _part_marginals(mu, parts, ids)
                for part_idx, wd in enumerate(marg):
                    for vx, w in wd.items():
                        weights[vx] = w / 3.0
                        pa = _project(vx, child_parts_of[i][part_idx])
                        pb = _project(vx, child_parts_of[kk][part_idx])
                        proj_a[vx] = solutions[(i, a_val)][pa]
                        proj_b[vx] = solutions[(kk, b_val)][pb]
                pi, bad, dis = align_restrictions(proj_a, proj_b, weights)
                shifts[((i, a_val), (kk, b_val))] = pi
                disagreements.append(dis)
    entry["mean_alignment_disagreement"] = float(np.mean(disagreements)) \
        if disagreements else 0.0

    # ----- instance over restrictions -----
    h_graph = tripartite_graph(mu, *pivots)
    h_cons = {}
    for ((i, a_val), (kk, b_val)), pi in shifts.items():
        u = (pivots[i], a_val)
        v = (pivots[kk], b_val)
        h_cons[(u, v)] = invert(pi)
        h_cons[(v, u)] = pi
    h_inst = UGInstance(h_graph, m, h_cons)
    entry["restriction_incons"] = incons(h_inst)
    h_assign = _solve(mu, pivots, h_inst.constraint, m, params, rng,
                      depth + 1, report, graph=h_graph)
    entry["restriction_viol"] = viol(h_inst, h_assign)

    # ----- lifting -----
    lifted = {}
    for part_idx, part in enumerate(parts):
        s_own = pivots[part_idx]
        own_is_sub = set(s_own) <= set(part)
        for vx in graph.parts[part_idx]:
            if own_is_sub:
                i, s_val = part_idx, _project(vx, s_own)[1]
            else:
                i = 0
                cond = mu.conditional_marginal(vx[0], vx[1], pivots[0])
                s_val = cond.sample(rng)
            h_vx = (pivots[i], s_val)
            base = solutions[(i, s_val)][_project(vx, child_parts_of[i][part_idx])]
            lifted[vx] = compose(base, h_assign[h_vx])

    lifted_viol = viol(inst, lifted)
    entry["lifted_viol"] = lifted_viol
    entry["events"] = _instrument_events(inst, lifted, mu, parts, pivots,
                                         child_parts_of, solutions, shifts,
                                         h_inst, h_assign)
    entry["viol"] = lifted_viol
    return lifted


def _perm_count(m):
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


class _FnOracle:
    def __init__(self, fn):
        self.fn = fn

    def constraint(self, u, v):
        return self.fn(u, v)


def _find_product_part(mu, parts):
    for i in range(3):
        others = [j for j in range(3) if j != i]
        if mu.is_product(parts[i], parts[others[0]]) and \
                mu.is_product(parts[i], parts[others[1]]):
            return i
    return None


def _instrument_events(inst, lifted, mu, parts, pivots, child_parts_of,
                       solutions, shifts, h_inst, h_assign):
    """Per-edge frequencies of the three lifting events failing (easy mode,
    deterministic): (1) the restriction-instance edge is satisfied, (2) the
    restricted solution satisfies the edge, (3) the second endpoint is
    outside Bad(a, b).  All-three-hold implies the lifted edge is satisfied,
    so the failure masses sum to at least the lifted violation."""
    part_of = {v: j for j, p in enumerate(inst.graph.parts) for v in p}
    e1 = e2 = e3 = 0.0
    deterministic = all(set(pivots[j]) <= set(parts[j]) for j in range(3))
    if not deterministic:
        return None
    for (u, v), w in inst.graph.edges.items():
        iu, iv = part_of[u], part_of[v]
        if iu == iv:
            continue
        a_val = _project(u, pivots[iu])[1]
        b_val = _project(v, pivots[iv])[1]
        ha = (pivots[iu], a_val)
        hb = (pivots[iv], b_val)
        if h_assign[ha] != compose(h_inst.constraint(ha, hb), h_assign[hb]):
            e1 += w
        x_a = solutions[(iu, a_val)]
        pu = _project(u, child_parts_of[iu][iu])
        pv_in_a = _project(v, child_parts_of[iu][iv])
        if x_a[pu] != compose(inst.constraint(u, v), x_a[pv_in_a]):
            e2 += w
        x_b = solutions[(iv, b_val)]
        pv = _project(v, child_parts_of[iv][iv])
        key = ((iu, a_val), (iv, b_val))
        if key in shifts:
            pi = shifts[key]
            bad = x_a[pv_in_a] != compose(x_b[pv], pi)
        else:
            pi = shifts[((iv, b_val), (iu, a_val))]
            bad = x_b[pv] != compose(x_a[pv_in_a], pi)
        if bad:
            e3 += w
    return {"e1": e1, "e2": e2, "e3": e3, "sum": e1 + e2 + e3}


# ---------------------------------------------------------------------------
# Partite graphs G_r(D)

def solve_partite(inst: UGInstance, params: SolveParams = None,
                  rng: np.random.Generator = None):
    """Solve a UG instance on a sampled partite graph G_r(D): choose a
    separated triple of parts, solve the induced tripartite instance, and
    lift to every vertex via a compatible restriction sample.

    Requires an oracle-backed instance (constraints must be queryable on
    edges outside the sampled multiset) and a distribution-backed graph.
    """
    params = params or SolveParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    mu = getattr(inst.graph, "dist", None)
    if mu is None:
        raise ValueError("solve_partite needs the generating distribution")
    labels = tuple(inst.graph.meta.get("labels", mu.labels))
    r = inst.graph.meta["r"]
    d = len(labels)
    threshold = max(1, int(params.separation_factor * d / (3 * r) ** 2))
    triple = None
    for _ in range(params.triples_budget):
        perm = rng.permutation(d)
        cand = [tuple(sorted(labels[i] for i in perm[j * r:(j + 1) * r]))
                for j in range(3)]
        union = [l for s in cand for l in s]
        if separation_check(union, threshold) and \
                well_spread_check(union, max(1, d // 3), max(3.0, 3 * r), labels):
            triple = tuple(cand)
            break
    if triple is None:
        raise ValueError("no separated pivot triple found within budget")

    h_graph = tripartite_graph(mu, *triple)
    h_inst = UGInstance(h_graph, inst.m, oracle=inst.oracle or
                        _FnOracle(inst.constraint))
    h_assign, h_report = solve_tripartite(h_inst, params, rng)

    s1 = triple[0]
    lifted = {}
    for vx in inst.graph.vertices():
        if tuple(vx[0]) == tuple(s1):
            lifted[vx] = h_assign[vx]  # vertex is its own restriction
        else:
            lifted[vx] = _lift_one(vx, s1, mu, inst, h_assign, rng)

    out_viol = viol(inst, lifted)
    events = _partite_events(inst, lifted, mu, s1, h_assign, rng)
    report = {
        "triple": [list(s) for s in triple],
        "separation_threshold": threshold,
        "tripartite": h_report,
        "viol": out_viol,
        "events": events,
    }
    return lifted, report


def _lift_one(vx, s1, mu, inst, h_assign, rng):
    labels, values = vx
    cond = mu.conditional_marginal(labels, values, s1)
    s_val = cond.sample(rng)
    s_vx = (tuple(s1), s_val)
    return compose(inst.constraint(vx, s_vx), h_assign[s_vx])


def _partite_events(inst, lifted, mu, s1, h_assign, rng):
    """Monte Carlo frequencies of the partite lifting events failing:
    (1)/(2) endpoint labels agree with a fresh compatible restriction's
    opinion, (3) the (s', u, v) triangle is consistent."""
    e1 = e2 = e3 = 0.0
    total = 0.0
    for (u, v), w in inst.graph.edges.items():
        joint = set(u[0]) | set(v[0])
        if set(s1) & joint:
            continue
        total += w
        labs = tuple(sorted(joint))
        have = dict(zip(u[0], u[1]))
        have.update(dict(zip(v[0], v[1])))
        vals = tuple(have[l] for l in labs)
        try:
            sp = mu.conditional_marginal(labs, vals, s1).sample(rng)
        except ValueError:
            continue
        s_vx = (tuple(s1), sp)
        gu = compose(inst.constraint(u, s_vx), h_assign[s_vx])
        gv = compose(inst.constraint(v, s_vx), h_assign[s_vx])
        if lifted[u] != gu:
            e1 += w
        if lifted[v] != gv:
            e2 += w
        tri = compose(compose(inst.constraint(s_vx, u), inst.constraint(u, v)),
                      inst.constraint(v, s_vx))
        if tri != identity(inst.m):
            e3 += w
    if total == 0:
        return None
    return {"e1": e1 / total, "e2": e2 / total, "e3": e3 / total,
            "sum": (e1 + e2 + e3) / total, "edge_mass": total}
