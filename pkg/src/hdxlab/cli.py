"""Experiment runner: config-driven construction, spectral analysis, unique
games solving, and direct product testing, with deterministic seeds and
machine-readable reports.

Subcommands: build, spectra, ug, dpt, lift.  Every run takes a TOML config
(--config), a seed (--seed), an output directory (--out), and a worker count
(--jobs).  Reports are CSV/JSON; each CSV gets a figure rendered next to it.
Exit codes: 0 success, 2 budget refusal, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import buildings, dist, dpt, lift, plots, spectral, ug
from .buildings import BudgetError

DEFAULT_CONFIG = {
    "building": {"family": "typeA", "d": 2, "p": 2, "budget": 5_000_000},
    "spectra": {"pairs": [], "audit": True, "mixing_trials": 100,
                "sampling_trials": 50, "local": False, "trickling": False,
                "eps": 0.25},
    "ug": {"m": 2, "deltas": [0.0, 0.02, 0.05], "seeds": 3,
           "solvers": ["tree"], "trials": 8, "graph": "building"},
    "dpt": {"n": 12, "d": 8, "k": 5, "t": 2, "samples": 20000,
            "models": [["iid-bit-flip", 0.1]], "eps": 0.3},
    "lift": {"mode": "easy", "parts": [], "m": 2, "delta": 0.0, "seeds": 1,
             "partite_r": 0, "sample_budget": 400},
}


def load_config(path):
    cfg = {k: dict(v) for k, v in DEFAULT_CONFIG.items()}
    if path:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        for section, table in user.items():
            cfg.setdefault(section, {}).update(table)
    return cfg


def config_hash(cfg, seed):
    blob = json.dumps(cfg, sort_keys=True, default=str) + "|seed=%d" % seed
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(x):
    if isinstance(x, float):
        return "%.10g" % x
    return str(x)


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
    return path


def build_distribution(bcfg):
    family = bcfg["family"]
    budget = bcfg.get("budget", 5_000_000)
    if family == "typeA":
        return buildings.sb_type_a(bcfg["d"], bcfg["p"], budget)
    if family == "typeC":
        return buildings.sb_type_c(bcfg["d"], bcfg["p"], budget)
    if family == "tensor":
        factors = [build_distribution(f) for f in bcfg["factors"]]
        out = factors[0]
        for f in factors[1:]:
            out = buildings.tensor(out, f, budget)
        return out
    raise ValueError("no distribution for family %r" % family)


def build_graph(bcfg):
    family = bcfg["family"]
    budget = bcfg.get("budget", 5_000_000)
    if family == "grassmann":
        k1, k2, k3 = bcfg["dims"]
        return buildings.grassmann_tripartite(bcfg["d"], bcfg["p"], k1, k2, k3, budget)
    if family == "symplectic":
        dims = list(bcfg["dims"])
        k3 = dims[2] if len(dims) > 2 else None
        return buildings.symplectic_tripartite(bcfg["d"], bcfg["p"], dims[0],
                                               dims[1], k3, budget)
    if family == "johnson":
        return buildings.johnson_graph(bcfg["n"], bcfg["k"])
    if family in ("typeA", "typeC", "tensor"):
        mu = build_distribution(bcfg)
        parts = bcfg.get("parts")
        if not parts:
            labels = mu.labels
            parts = [labels[0::3], labels[1::3], labels[2::3]]
        return dist.tripartite_graph(mu, *[tuple(p) for p in parts])
    raise ValueError("no graph for family %r" % family)


def cmd_build(cfg, seed, out, jobs):
    bcfg = cfg["building"]
    rows = []
    os.makedirs(out, exist_ok=True)
    h = config_hash(cfg, seed)
    if bcfg["family"] == "complete":
        x = buildings.complete_complex(bcfg["n"], bcfg["d"])
        rows.append({"config": h, "seed": seed, "object": "complete_complex",
                     "top_faces": len(x.top_faces), "vertices": bcfg["n"]})
    elif bcfg["family"] in ("grassmann", "symplectic", "johnson"):
        g = build_graph(bcfg)
        path = os.path.join(out, "graph.json")
        with open(path, "w") as fh:
            fh.write(dist.graph_to_json(g))
        rows.append({"config": h, "seed": seed, "object": bcfg["family"],
                     "vertices": g.n_vertices, "edges": len(g.edges),
                     "triangles": len(g.triangles or {}), "artifact": path})
    else:
        mu = build_distribution(bcfg)
        path = os.path.join(out, "dist.json")
        with open(path, "w") as fh:
            fh.write(dist.dist_to_json(mu))
        rows.append({"config": h, "seed": seed, "object": bcfg["family"],
                     "support": len(mu), "coordinates": len(mu.labels),
                     "artifact": path})
    cols = sorted({c for r in rows for c in r})
    write_csv(os.path.join(out, "build.csv"), rows, cols)
    for r in rows:
        print(" ".join("%s=%s" % (k, _fmt(v)) for k, v in sorted(r.items())))
    return 0


def cmd_spectra(cfg, seed, out, jobs):
    bcfg = cfg["building"]
    scfg = cfg["spectra"]
    h = config_hash(cfg, seed)
    rng = np.random.default_rng(seed)
    os.makedirs(out, exist_ok=True)
    mu = build_distribution(bcfg)
    rows, reports = [], []

    pairs = scfg.get("pairs") or []
    if not pairs:
        pairs = [[mu.labels[0], mu.labels[1]]] if len(mu.labels) >= 2 else []
    for left, right in pairs:
        g = dist.bipartite_graph(mu, (left,), (right,))
        s2 = spectral.second_singular_value(g)
        rep = spectral.SpectralReport("A(%s,%s)" % (left, right), 1.0, s2,
                                      "dense", 1e-9)
        reports.append(rep)
        row = dict(rep.row(), config=h, seed=seed)
        # mixing/sampling slack sweeps on this bipartite graph
        lam = s2
        slacks, tails_ok = [], True
        for _ in range(int(scfg.get("mixing_trials", 100))):
            a = {v for v in g.parts[0] if rng.random() < 0.5}
            b = {v for v in g.parts[1] if rng.random() < 0.5}
            slacks.append(spectral.mixing_check(g, a, b, lam=lam))
        for _ in range(int(scfg.get("sampling_trials", 50))):
            b = {v for v in g.parts[0] if rng.random() < 0.4}
            tail, bound = spectral.sampling_check(g, b, scfg.get("eps", 0.25), lam=lam)
            tails_ok = tails_ok and tail <= bound + 1e-9
        row["min_mixing_slack"] = min(slacks) if slacks else ""
        row["sampling_within_bound"] = int(tails_ok)
        rows.append(row)

    if len(mu.labels) >= 3 and scfg.get("tripartite", True):
        labels = mu.labels[:3]
        g3 = dist.tripartite_graph(mu, (labels[0],), (labels[1],), (labels[2],))
        s2 = spectral.tripartite_second_singular(g3)
        rep = spectral.SpectralReport("T(%s,%s,%s)" % tuple(labels), 1.0, s2,
                                      "dense", 1e-9)
        rows.append(dict(rep.row(), config=h, seed=seed))

    if scfg.get("audit", True):
        res = spectral.epsilon_product_audit(mu)
        rows.append({"operator": "epsilon_audit", "sigma1": 1.0,
                     "sigma2": res.eps, "gap": 1.0 - res.eps,
                     "method": "certified" if res.certified else "sampled",
                     "tolerance": 1e-9, "config": h, "seed": seed})

    if scfg.get("local", False) or scfg.get("trickling", False):
        x = buildings.complex_view(mu)
        if scfg.get("local", False):
            gamma = spectral.local_spectral_audit(x)
            rows.append({"operator": "local_gamma", "sigma1": 1.0,
                         "sigma2": gamma, "gap": 1.0 - gamma,
                         "method": "dense", "tolerance": 1e-9,
                         "config": h, "seed": seed})
        if scfg.get("trickling", False):
            bound = spectral.trickling_down_bound(x)
            rows.append({"operator": "trickling_bound", "sigma1": 1.0,
                         "sigma2": bound, "gap": "", "method": "dense",
                         "tolerance": 1e-9, "config": h, "seed": seed})

    rows.sort(key=lambda r: r["operator"])
    cols = ["config", "seed", "operator", "sigma1", "sigma2", "gap", "method",
            "tolerance", "min_mixing_slack", "sampling_within_bound"]
    path = write_csv(os.path.join(out, "spectra.csv"), rows, cols)
    plots.spectra_bar(rows, os.path.join(out, "spectra.png"))
    print("wrote %s (%d rows)" % (path, len(rows)))
    return 0


def _ug_point(cfg, delta, point_seed, solver):
    """One (delta, seed, solver) grid point; pure given its arguments."""
    bcfg = cfg["building"]
    ucfg = cfg["ug"]
    m = ucfg["m"]
    g = build_graph(bcfg)
    rng = np.random.default_rng(point_seed)
    truth = {v: ug.random_permutation(m, rng) for v in g.vertices()}
    inst = ug.plant(g, truth, m, delta, rng)
    params = ";".join("%s=%s" % (k, v) for k, v in sorted(bcfg.items()))
    row = {"family": bcfg["family"], "params": params,
           "q": bcfg.get("p", ""), "delta": delta, "trial": point_seed,
           "solver": solver, "incons": ug.incons(inst),
           "good_vertex_frac": "", "good_edge_frac": ""}
    if solver == "tree":
        res = ug.tree_propagate_solve(inst)
        a = res.assignment if isinstance(res, ug.FailureWitness) else res
        row["perfect"] = int(not isinstance(res, ug.FailureWitness))
        row["viol"] = ug.viol(inst, a)
    elif solver == "brute":
        a, val = ug.brute_force_solve(inst, budget=ucfg.get("brute_budget", 2_000_000))
        row["viol"] = 1.0 - val
    elif solver == "cones":
        from .cones import cones_solve
        a, stats = cones_solve(inst, ucfg.get("trials", 8), rng)
        row["viol"] = stats["mean_viol"]
        row["best_viol"] = stats["best_viol"]
        row["good_vertex_frac"] = stats["good_vertex_frac"]
        row["good_edge_frac"] = stats["good_edge_frac"]
    elif solver == "lift":
        params = lift.SolveParams(mode=ucfg.get("mode", "easy"))
        a, rep = lift.solve_tripartite(inst, params, rng)
        row["viol"] = rep["viol"]
    else:
        raise ValueError("unknown solver %r" % solver)
    return row


def cmd_ug(cfg, seed, out, jobs):
    ucfg = cfg["ug"]
    h = config_hash(cfg, seed)
    os.makedirs(out, exist_ok=True)
    grid = []
    for delta in ucfg["deltas"]:
        for s in range(int(ucfg["seeds"])):
            for solver in ucfg["solvers"]:
                grid.append((cfg, float(delta), seed + 1000 * s, solver))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_ug_point_star, grid))
    else:
        rows = [_ug_point(*args) for args in grid]
    for r in rows:
        r["config"] = h
        r["seed"] = seed
    cols = ["config", "seed", "family", "params", "q", "delta", "trial",
            "solver", "viol", "best_viol", "perfect", "incons",
            "good_vertex_frac", "good_edge_frac"]
    path = write_csv(os.path.join(out, "ug.csv"), rows, cols)
    plots.viol_curve(rows, os.path.join(out, "ug.png"))
    print("wrote %s (%d rows)" % (path, len(rows)))
    return 0


def _ug_point_star(args):
    return _ug_point(*args)


def cmd_dpt(cfg, seed, out, jobs):
    dcfg = cfg["dpt"]
    h = config_hash(cfg, seed)
    os.makedirs(out, exist_ok=True)
    rng = np.random.default_rng(seed)
    x = buildings.complete_complex(dcfg["n"], dcfg["d"])
    f = {v: int(rng.integers(0, 2)) for v in range(dcfg["n"])}
    table = dpt.encode(f, x, dcfg["k"])
    rows = []
    base = {"config": h, "seed": seed, "k": dcfg["k"], "t": dcfg["t"],
            "samples": dcfg["samples"]}
    acc = dpt.run_tester(table, t=dcfg["t"], samples=dcfg["samples"], rng=rng)
    _, eta = dpt.decode_majority(table, dcfg["eps"])
    rows.append(dict(base, model="none", rate=0.0, acceptance=acc, eta=eta))
    for model, rate in dcfg["models"]:
        bad = dpt.corrupt(table, model, float(rate), rng)
        acc = dpt.run_tester(bad, t=dcfg["t"], samples=dcfg["samples"], rng=rng)
        _, eta = dpt.decode_majority(bad, dcfg["eps"])
        rows.append(dict(base, model=model, rate=float(rate),
                         acceptance=acc, eta=eta))
    cols = ["config", "seed", "k", "t", "model", "rate", "samples",
            "acceptance", "eta"]
    path = write_csv(os.path.join(out, "dpt.csv"), rows, cols)
    plots.acceptance_curve(rows, os.path.join(out, "dpt.png"))
    print("wrote %s (%d rows)" % (path, len(rows)))
    return 0


def cmd_lift(cfg, seed, out, jobs):
    bcfg = cfg["building"]
    lcfg = cfg["lift"]
    h = config_hash(cfg, seed)
    os.makedirs(out, exist_ok=True)
    m = lcfg["m"]
    params = lift.SolveParams(mode=lcfg.get("mode", "easy"))
    rows = []
    level_reports = []
    for s in range(int(lcfg["seeds"])):
        rng = np.random.default_rng(seed + 1000 * s)
        if lcfg.get("partite_r", 0):
            mu = build_distribution(bcfg)
            g = dist.partite_graph_G_r(mu, int(lcfg["partite_r"]),
                                       int(lcfg.get("sample_budget", 400)), rng)
            oracle = ug.PlantedOracle(m, seed + 1000 * s, float(lcfg["delta"]))
            inst = ug.UGInstance(g, m, oracle=oracle)
            a, rep = lift.solve_partite(inst, params, rng)
            rep_levels = rep["tripartite"]["levels"]
        else:
            mu = build_distribution(bcfg)
            parts = lcfg.get("parts") or [mu.labels[0::3], mu.labels[1::3],
                                          mu.labels[2::3]]
            g = dist.tripartite_graph(mu, *[tuple(p) for p in parts])
            truth = {v: ug.random_permutation(m, rng) for v in g.vertices()}
            inst = ug.plant(g, truth, m, float(lcfg["delta"]), rng)
            a, rep = lift.solve_tripartite(inst, params, rng)
            rep_levels = rep["levels"]
        level_reports.append(rep)
        top = rep_levels[0] if rep_levels else {}
        rows.append({
            "config": h, "seed": seed + 1000 * s, "family": bcfg["family"],
            "delta": lcfg["delta"], "viol": rep["viol"],
            "incons": ug.incons(inst) if inst.graph.triangles else "",
            "base": top.get("base", "recursive"),
            "n_restrictions": top.get("n_restrictions", ""),
            "mean_sub_viol": top.get("mean_sub_viol", ""),
            "restriction_incons": top.get("restriction_incons", ""),
            "events_sum": (top.get("events") or {}).get("sum", ""),
        })
    with open(os.path.join(out, "lift_report.json"), "w") as fh:
        json.dump(level_reports, fh, indent=1, sort_keys=True, default=str)
    cols = ["config", "seed", "family", "delta", "viol", "incons", "base",
            "n_restrictions", "mean_sub_viol", "restriction_incons",
            "events_sum"]
    path = write_csv(os.path.join(out, "lift.csv"), rows, cols)
    levels = level_reports[0].get("levels") or \
        level_reports[0].get("tripartite", {}).get("levels", [])
    plots.events_bar(levels, os.path.join(out, "lift.png"))
    print("wrote %s (%d rows)" % (path, len(rows)))
    return 0


COMMANDS = {
    "build": cmd_build,
    "spectra": cmd_spectra,
    "ug": cmd_ug,
    "dpt": cmd_dpt,
    "lift": cmd_lift,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="hdxlab", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="TOML config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="reports")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args.seed, args.out, args.jobs)
    except BudgetError as exc:
        print("budget refusal: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
