"""Experiment runner CLI.

Subcommands:

* ``uqr-lab run <config.json>``      -- execute the configured experiment,
  writing results.csv, report.json, resolved-config.json (and figures)
  into the output directory.
* ``uqr-lab validate <config.json>`` -- schema-check a config.
* ``uqr-lab schema``                 -- print the config JSON schema.

Exit codes: 0 success / all audits pass, 1 audit failure, 2 config error,
3 numerical-budget error (saturation, atom cap).  ``UQR_LAB_SEED``
overrides the config seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import audits as audits_mod
from . import figures as figures_mod
from .config import (CONFIG_SCHEMA, build_map, load_config, resolve_config,
                     validate_config)
from .dynamics import IterateMap
from .entropy_top import (BaseSource, audit_theorem_3_1, lov_estimate,
                          topological_entropy_estimate)
from .entropy_measure import (PartitionSpec, entropy_lower_bound_report,
                              ks_entropy_estimate)
from .errors import AtomBudgetExceeded, ConfigError, SaturationError, ZeroHitsError
from .graph_geometry import ahlfors_scan, chain_volumes_upto, check_pointwise_bound
from .measures import (EmpiricalMeasure, balanced_iterate, balancedness_residual,
                       default_test_family, dyadic_box_masses, equator_band_mass,
                       pole_cap_table, save_measure_csv)
from .reporting import config_digest, write_csv, write_json_atomic
from .rng import make_rng

EXIT_OK = 0
EXIT_AUDIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _base_source(f, budgets: dict, seed: int) -> BaseSource:
    if f.manifold.kind == "torus":
        return BaseSource(kind="grid", resolution=budgets["grid_resolution"],
                          seed=seed)
    return BaseSource(kind="random", count=budgets["base_samples"], seed=seed)


def _residual_tests(f, budgets: dict):
    return default_test_family(f.manifold,
                               frequency_cutoff=budgets["residual_cutoff"],
                               box_depth=budgets["box_depth"])


# ---------------------------------------------------------------------------
# experiment implementations; each returns (rows, header, report, passed, figs)


def _run_entropy_top(f, cfg):
    budgets = cfg["budgets"]
    source = _base_source(f, budgets, cfg["seed"])
    est = topological_entropy_estimate(f, budgets["eps_schedule"],
                                       budgets["k_range"],
                                       source.points(f.manifold))
    rows = []
    for run in est.per_eps:
        for k, count, flag in zip(run.k_values, run.counts, run.flags):
            rows.append([run.eps, k, count, flag, run.slope, run.residual,
                         run.reliable])
    header = ["eps", "k", "count", "saturated", "slope", "residual", "reliable"]
    report = {"entropy_estimate": est.as_dict(), "value": est.value}

    def figs(outdir):
        return [figures_mod.figure_entropy_top(est.as_dict(),
                                               outdir / "entropy_top.png")]

    return rows, header, report, True, figs


def _run_entropy_measure(f, cfg):
    budgets = cfg["budgets"]
    mu = balanced_iterate(f, budgets["tree_depth"], budgets["tree_samples"],
                          cfg["seed"], budgets["atom_cap"])
    lower = entropy_lower_bound_report(f, mu, residual_threshold=None)
    rng = make_rng(cfg["seed"], "ks-cloud")
    cloud = EmpiricalMeasure.uniform_cloud(f.manifold, budgets["ks_atoms"], rng)
    partition = PartitionSpec(f.manifold, depth=budgets["partition_depth"])
    ks = ks_entropy_estimate(f, cloud, partition, budgets["ks_kmax"])
    report = {
        "bound": lower.bound,
        "branch_mass": lower.branch_mass,
        "ks_sequence": list(ks.sequence),
        "warnings": list(lower.warnings) + list(ks.warnings),
        "log_degree": lower.log_degree,
        "ks_value": ks.value,
    }
    rows = [[k + 1, h] for k, h in enumerate(ks.sequence)]
    header = ["k", "conditional_entropy"]

    def figs(outdir):
        return [figures_mod.figure_entropy_measure(report,
                                                   outdir / "entropy_measure.png")]

    return rows, header, report, True, figs


def _run_balanced_measure(f, cfg):
    budgets = cfg["budgets"]
    mu = balanced_iterate(f, budgets["tree_depth"], budgets["tree_samples"],
                          cfg["seed"], budgets["atom_cap"])
    residual = balancedness_residual(f, mu, _residual_tests(f, budgets))
    report = {"atoms": len(mu), "total": mu.total, "residual": residual}
    if f.manifold.kind == "torus":
        masses = dyadic_box_masses(mu, budgets["box_depth"])
        report["box_masses"] = masses.tolist()
        report["box_depth"] = budgets["box_depth"]
        rows = [[*idx, m] for idx, m in np.ndenumerate(masses)]
        header = [f"box_{a}" for a in range(f.manifold.n)] + ["mass"]
        payload_kind = "torus"
        payload = {"box_masses": masses.tolist()}
    else:
        table = pole_cap_table(mu)
        band = equator_band_mass(mu, 0.1)
        report["pole_cap_table"] = table
        report["equator_band_mass"] = band
        rows = [[r, m] for r, m in table]
        header = ["pole_cap_radius", "mass"]
        payload_kind = "sphere"
        payload = {"pole_cap_table": table, "equator_band_mass": band}

    def figs(outdir):
        out = [figures_mod.figure_balanced_measure(payload_kind, payload,
                                                   outdir / "balanced_measure.png")]
        return out

    def extra(outdir):
        if cfg["export_atoms"]:
            save_measure_csv(mu, outdir / "measure.csv")
            return ["measure.csv"]
        return []

    return rows, header, report, True, figs, extra


def _run_chain_volume(f, cfg):
    budgets = cfg["budgets"]
    k_range = budgets["k_range"]
    vols = chain_volumes_upto(f, max(k_range), budgets["mc_samples"], cfg["seed"])
    lov = lov_estimate(f, k_range, budgets["mc_samples"], cfg["seed"])
    vol_rows = [{"k": v.k, "volume": v.value, "stderr": v.stderr,
                 "flagged": v.flagged} for v in vols]
    rows = [[v["k"], v["volume"], v["stderr"], v["flagged"]] for v in vol_rows]
    header = ["k", "volume", "stderr", "flagged"]
    report = {"volumes": vol_rows, "lov": lov}

    def figs(outdir):
        return [figures_mod.figure_chain_volume(vol_rows, lov["slope"],
                                                outdir / "chain_volume.png")]

    return rows, header, report, True, figs


def _run_ahlfors(f, cfg):
    budgets = cfg["budgets"]
    tols = cfg["tolerances"]
    scan = ahlfors_scan(f, budgets["chain_k"], budgets["center_samples"],
                        budgets["radii"], budgets["mc_samples"], cfg["seed"],
                        slope_tolerance=tols["slope"],
                        spread_bound=tols["spread"])
    rows = [[c, r, v, ratio] for c, r, v, ratio in scan.rows]
    header = ["center_id", "r", "volume", "ratio"]
    report = scan.as_dict()

    def figs(outdir):
        return [figures_mod.figure_ahlfors(report, outdir / "ahlfors_scan.png")]

    return rows, header, report, scan.passed, figs


def _run_bihari(cfg):
    budgets = cfg["budgets"]
    rows = []
    sample_runs = []
    all_pass = True
    instance = 0
    for n in (2, 3):
        rng = make_rng(cfg["seed"], "bihari", n)
        for _ in range(budgets["bihari_instances"]):
            c = float(rng.uniform(0.5, 3.0))
            a = float(rng.uniform(0.5, 2.0))
            t, g = audits_mod.generate_bihari_instance(
                c, n, a, budgets["bihari_points"], rng)
            rep = audits_mod.bihari_check(t, g, c, n)
            ok = rep.passed
            all_pass = all_pass and ok
            rows.append([instance, n, c, a,
                         rep.details["hypothesis_points"],
                         len(rep.details["violating_indices"]), ok])
            if len(sample_runs) < 3:
                sample_runs.append({"t": t.tolist(), "g": g.tolist(),
                                    "C": c, "n": n})
            instance += 1
    header = ["instance", "n", "C", "a", "hypothesis_points", "violations",
              "passed"]
    report = {"instances": instance, "all_passed": all_pass}

    def figs(outdir):
        return [figures_mod.figure_bihari(sample_runs, outdir / "bihari.png")]

    return rows, header, report, all_pass, figs


def _run_audit_all(f, cfg):
    budgets = cfg["budgets"]
    tols = cfg["tolerances"]
    seed = cfg["seed"]
    source = _base_source(f, budgets, seed)
    base = source.points(f.manifold)
    est = topological_entropy_estimate(f, budgets["eps_schedule"],
                                       budgets["k_range"], base)
    reports = []

    main = audits_mod.audit_main_theorem(
        f, budgets["eps_schedule"], budgets["k_range"], source,
        tree_depth=min(budgets["tree_depth"], 4),
        tree_samples=min(budgets["tree_samples"], 2000),
        atom_cap=budgets["atom_cap"], ks_atoms=budgets["ks_atoms"],
        partition_depth=budgets["partition_depth"], ks_kmax=budgets["ks_kmax"],
        distortion_samples=budgets["distortion_samples"], seed=seed,
        h_tolerance=tols["h"], ks_tolerance=tols["ks"], entropy_estimate=est)
    reports.append(main)

    three_one = audit_theorem_3_1(
        f, budgets["eps_schedule"], budgets["k_range"], base,
        mc_samples=budgets["mc_samples"],
        center_samples=budgets["center_samples"], seed=seed,
        tolerance=tols["audit"], entropy_estimate=est)
    reports.append(three_one)

    components = [IterateMap(f, j) for j in range(1, 4)]
    reports.append(check_pointwise_bound(components, sample_count=10_000,
                                         seed=seed))

    all_pass = all(r.passed for r in reports)
    rows = [[r.name, r.lhs, r.rhs, r.tolerance, r.passed] for r in reports]
    header = ["audit", "lhs", "rhs", "tolerance", "passed"]
    report = {"audits": [r.as_dict() for r in reports],
              "verdict": "pass" if all_pass else "fail"}

    def figs(outdir):
        return [figures_mod.figure_audit_all([r.as_dict() for r in reports],
                                             outdir / "audit_all.png")]

    return rows, header, report, all_pass, figs


# ---------------------------------------------------------------------------


def run_experiment(cfg: dict) -> int:
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    exp = cfg["experiment"]
    f = build_map(cfg["map"]) if "map" in cfg else None
    write_json_atomic(outdir / "resolved-config.json", cfg)

    try:
        if exp == "bihari-selftest":
            result = _run_bihari(cfg)
        elif exp == "entropy-top":
            result = _run_entropy_top(f, cfg)
        elif exp == "entropy-measure":
            result = _run_entropy_measure(f, cfg)
        elif exp == "balanced-measure":
            result = _run_balanced_measure(f, cfg)
        elif exp == "chain-volume":
            result = _run_chain_volume(f, cfg)
        elif exp == "ahlfors-scan":
            result = _run_ahlfors(f, cfg)
        elif exp == "audit-all":
            result = _run_audit_all(f, cfg)
        else:  # unreachable: schema restricts the experiment names
            raise ConfigError(f"unknown experiment {exp!r}")
    except (AtomBudgetExceeded, SaturationError, ZeroHitsError) as exc:
        print(f"numerical budget error: {exc}", file=sys.stderr)
        write_json_atomic(outdir / "report.json",
                          {"error": str(exc), "experiment": exp,
                           "config_digest": config_digest(cfg)})
        return EXIT_BUDGET

    rows, header, report, passed, figs = result[:5]
    extra = result[5] if len(result) > 5 else None

    artifacts = ["results.csv", "report.json", "resolved-config.json"]
    write_csv(outdir / "results.csv", header, rows)
    if extra is not None:
        artifacts += extra(outdir)
    if cfg.get("figures", True):
        for p in figs(outdir):
            artifacts.append(str(Path(p).name))
    report_payload = {
        "experiment": exp,
        "seed": cfg["seed"],
        "config_digest": config_digest(cfg),
        "passed": bool(passed),
        "artifacts": artifacts,
        **report,
    }
    write_json_atomic(outdir / "report.json", report_payload)
    return EXIT_OK if passed else EXIT_AUDIT_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="uqr-lab",
        description="entropy and balanced-measure experiments for "
                    "uniformly quasiregular dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", help="path to config.json")
    p_run.add_argument("--threads", type=int, default=None,
                       help="cap worker threads (results are identical at any count)")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")
    p_val = sub.add_parser("validate", help="validate a config against the schema")
    p_val.add_argument("config")
    sub.add_parser("schema", help="print the config JSON schema")

    args = parser.parse_args(argv)
    if args.command == "schema":
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return EXIT_OK
    try:
        raw = load_config(args.config)
        if args.command == "validate":
            validate_config(raw)
            print("config valid")
            return EXIT_OK
        cfg = resolve_config(raw)
        if args.threads is not None:
            cfg["threads"] = args.threads
        if args.no_figures:
            cfg["figures"] = False
        return run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
