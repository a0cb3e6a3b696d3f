"""Figure rendering for the report path.

Each experiment gets one PNG next to its results.csv; the CSV stays the
authoritative record, the figures are quick-look renderings of the same
numbers.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "figure_entropy_top",
    "figure_entropy_measure",
    "figure_balanced_measure",
    "figure_chain_volume",
    "figure_ahlfors",
    "figure_bihari",
    "figure_audit_all",
]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def figure_entropy_top(est_dict: dict, path) -> str:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for run in est_dict["per_eps"]:
        ks = np.array(run["k_values"])
        counts = np.array(run["counts"], dtype=float)
        flags = np.array(run["saturation_flags"])
        ax1.semilogy(ks, counts, "o-", label=f"eps={run['eps']:g}")
        if flags.any():
            ax1.semilogy(ks[flags], counts[flags], "rx", ms=10)
    ax1.set_xlabel("chain length k")
    ax1.set_ylabel("separated count")
    ax1.legend(fontsize=8)
    ax1.set_title("packing counts (x = saturated)")
    eps = [r["eps"] for r in est_dict["per_eps"]]
    slopes = [r["slope"] for r in est_dict["per_eps"]]
    ax2.plot(eps, slopes, "s-")
    ax2.axhline(est_dict["value"], color="k", ls="--",
                label=f"value = {est_dict['value']:.4f}")
    ax2.set_xlabel("eps")
    ax2.set_ylabel("slope (nats)")
    ax2.invert_xaxis()
    ax2.legend(fontsize=8)
    ax2.set_title("slope plateau")
    return _save(fig, path)


def figure_entropy_measure(report: dict, path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    seq = report["ks_sequence"]
    ax.plot(range(1, len(seq) + 1), seq, "o-", label="conditional entropy")
    ax.axhline(report["bound"], color="k", ls="--",
               label=f"jacobian bound = {report['bound']:.4f}")
    ax.set_xlabel("k")
    ax.set_ylabel("nats")
    ax.legend(fontsize=8)
    ax.set_title("finite-partition entropy vs jacobian bound")
    return _save(fig, path)


def figure_balanced_measure(kind: str, payload: dict, path) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    if kind == "torus":
        masses = np.array(payload["box_masses"])
        im = ax.imshow(masses, origin="lower", cmap="viridis")
        fig.colorbar(im, ax=ax, label="box mass")
        ax.set_title("dyadic box masses")
    else:
        radii = [r for r, _ in payload["pole_cap_table"]]
        masses = [m for _, m in payload["pole_cap_table"]]
        ax.plot(radii, masses, "o-")
        ax.set_xlabel("chordal pole-cap radius")
        ax.set_ylabel("mass")
        ax.set_title(f"pole caps; equator band mass = {payload['equator_band_mass']:.4f}")
    return _save(fig, path)


def figure_chain_volume(rows: list, slope: float, path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ks = [r["k"] for r in rows]
    vols = [r["volume"] for r in rows]
    ax.semilogy(ks, vols, "o-", label="H^n(chain_k)")
    ax.set_xlabel("k")
    ax.set_ylabel("volume")
    ax.set_title(f"chain volumes; lov slope = {slope:.4f}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def figure_ahlfors(scan: dict, path) -> str:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    rows = scan["rows"]
    centers = sorted({int(r[0]) for r in rows})
    for c in centers:
        rs = [r[1] for r in rows if int(r[0]) == c]
        vs = [r[2] for r in rows if int(r[0]) == c]
        ax1.loglog(rs, vs, "o-", alpha=0.6)
    ax1.set_xlabel("r")
    ax1.set_ylabel("ball volume")
    ax1.set_title(f"slope = {scan['slope']:.3f} (target {scan['dimension']})")
    for c in centers:
        rs = [r[1] for r in rows if int(r[0]) == c]
        ratios = [r[3] for r in rows if int(r[0]) == c]
        ax2.semilogx(rs, ratios, "o-", alpha=0.6)
    ax2.set_xlabel("r")
    ax2.set_ylabel("volume / r^n")
    ax2.set_title(f"ratio spread = {scan['ratio_spread']:.2f}")
    return _save(fig, path)


def figure_bihari(sample_runs: list, path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for run in sample_runs[:3]:
        t = np.array(run["t"])
        ax.plot(t, run["g"], alpha=0.7, label=f"g (n={run['n']}, C={run['C']:.2f})")
        ax.plot(t, (run["C"] / run["n"]) ** run["n"] * t ** run["n"], "--", alpha=0.7)
    ax.set_xlabel("t")
    ax.set_yscale("log")
    ax.set_title("sampled g vs (C/n)^n t^n lower bound (dashed)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def figure_audit_all(reports: list, path) -> str:
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    names = [r["name"] for r in reports]
    lhs = [r["lhs"] for r in reports]
    rhs = [r["rhs"] for r in reports]
    x = np.arange(len(names))
    ax.bar(x - 0.17, lhs, width=0.34, label="lhs")
    ax.bar(x + 0.17, rhs, width=0.34, label="rhs")
    for i, r in enumerate(reports):
        ax.text(i, max(lhs[i], rhs[i]), "pass" if r["passed"] else "FAIL",
                ha="center", va="bottom", fontsize=8,
                color="green" if r["passed"] else "red")
    ax.set_xticks(x)
    ax.set_xticklabels([n.replace("-", "\n") for n in names], fontsize=7)
    ax.legend(fontsize=8)
    ax.set_title("audit summary")
    return _save(fig, path)
