"""Figure rendering for the report path: every CSV written by the CLI gets a
matplotlib rendering next to it."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIGSIZE = (6.0, 3.8)
DPI = 130


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def spectra_bar(rows, path):
    """Bar chart of sigma_2 per measured operator."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    labels = [r["operator"] for r in rows]
    vals = [float(r["sigma2"]) for r in rows]
    ax.bar(range(len(rows)), vals, color="#4878cf")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel(r"$\sigma_2$")
    ax.set_title("second singular values")
    return _save(fig, path)


def viol_curve(rows, path):
    """Mean violation vs corruption rate, one line per solver."""
    solvers = sorted({r["solver"] for r in rows})
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for s in solvers:
        pts = {}
        for r in rows:
            if r["solver"] != s:
                continue
            pts.setdefault(float(r["delta"]), []).append(float(r["viol"]))
        xs = sorted(pts)
        ys = [sum(pts[x]) / len(pts[x]) for x in xs]
        ax.plot(xs, ys, marker="o", label=s)
    ax.set_xlabel("plant corruption rate")
    ax.set_ylabel("violated edge mass")
    ax.set_title("solver degradation")
    ax.legend(fontsize=8)
    return _save(fig, path)


def acceptance_curve(rows, path):
    """Tester acceptance and decoding eta vs corruption rate per model."""
    models = sorted({r["model"] for r in rows})
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for m in models:
        sub = sorted((float(r["rate"]), float(r["acceptance"]), float(r["eta"]))
                     for r in rows if r["model"] == m)
        ax.plot([s[0] for s in sub], [s[1] for s in sub], marker="o",
                label="%s acceptance" % m)
        ax.plot([s[0] for s in sub], [s[2] for s in sub], marker="x",
                linestyle="--", label="%s eta" % m)
    ax.set_xlabel("corruption rate")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("direct product tester")
    ax.legend(fontsize=7)
    return _save(fig, path)


def events_bar(levels, path):
    """Lifting event failure masses per recursion level."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    xs, e1, e2, e3 = [], [], [], []
    for i, lv in enumerate(levels):
        ev = lv.get("events")
        if not ev:
            continue
        xs.append(i)
        e1.append(ev["e1"])
        e2.append(ev["e2"])
        e3.append(ev["e3"])
    w = 0.25
    ax.bar([x - w for x in xs], e1, w, label="restriction edge unsatisfied")
    ax.bar(xs, e2, w, label="local solution violates edge")
    ax.bar([x + w for x in xs], e3, w, label="endpoint misaligned")
    ax.set_xlabel("recursive level (report order)")
    ax.set_ylabel("event failure mass")
    ax.set_title("lifting events")
    ax.legend(fontsize=7)
    return _save(fig, path)
