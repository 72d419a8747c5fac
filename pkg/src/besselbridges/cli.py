"""Command-line front end: config-driven runs with CSV reports.

    besselbridges verify-mu    --config cfg.json [--seed S] [--out DIR]
    besselbridges verify-ibpf  --config cfg.json ...
    besselbridges sample       --config cfg.json ...
    besselbridges spde         --config cfg.json ...
    besselbridges distinction  --config cfg.json ...

Every command exits 0 iff all tolerances configured for it were met.  The
same config and seed produce byte-identical CSV files.  --threads (or the
BESSELBRIDGES_THREADS environment variable) bounds the compiled-kernel
thread count.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import backend, ibpf, renorm, sampler, spde, stats
from .config import ConfigError, functional_from_record, h_with_id, load_config
from .measures import h_from_record
from .specfun import POLE_GUARD

THREADS_ENV = "BESSELBRIDGES_THREADS"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".15e")
    return str(x)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _mu_phi_from_record(rec):
    kind = rec.get("kind", "exp")
    if kind == "exp":
        phi = renorm.exp_decay(rec.get("lam", 1.0))
    elif kind == "gauss":
        phi = renorm.gaussian(rec.get("c", 1.0))
    elif kind == "poly_gauss":
        phi = renorm.poly_gaussian(rec.get("poly", [1.0]), rec.get("c", 1.0),
                                   rec.get("lam", 0.0))
    else:
        raise ConfigError(f"unknown mu test function kind {kind!r}")
    return rec.get("id", kind), phi


def cmd_verify_mu(cfg, out_dir: Path) -> int:
    alphas = cfg.get("alphas", [a / 2.0 for a in range(-5, 6)])
    lambdas = cfg.get("lambdas", [0.5, 1.0, 2.0])
    if not alphas:
        raise ConfigError("empty alpha list")
    tol = cfg.get("tolerance", 1e-8)
    phis = [_mu_phi_from_record(r) for r in cfg.get("test_functions_mu", [
        {"id": "exp1", "kind": "exp", "lam": 1.0},
        {"id": "exp3", "kind": "exp", "lam": 3.0},
        {"id": "gauss1", "kind": "gauss", "c": 1.0},
        {"id": "pg", "kind": "poly_gauss", "poly": [1.0, 0.5, 0.25], "c": 2.0},
    ])]
    rows = []
    ok = True
    for alpha in alphas:
        r = round(alpha)
        guarded = r <= 0 and 0.0 < abs(alpha - r) < POLE_GUARD
        if guarded:
            rows.append(("laplace", alpha, "", float("nan"), float("nan"),
                         float("nan"), tol, "skipped: alpha inside pole guard band"))
            continue
        for lam in lambdas:
            value = renorm.pair_mu(alpha, renorm.exp_decay(lam))
            target = lam ** (-alpha)
            resid = abs(value - target)
            ok &= resid <= tol
            rows.append(("laplace", alpha, f"lambda={lam}", value, target,
                         resid, tol, "pass" if resid <= tol else "FAIL"))
        for pid, phi in phis:
            lhs = renorm.pair_mu(alpha, phi.derivative_function(1))
            rhs = renorm.pair_mu(alpha - 1.0, phi)
            resid = abs(lhs + rhs)
            ok &= resid <= tol
            rows.append(("ibpf", alpha, pid, lhs, -rhs, resid, tol,
                         "pass" if resid <= tol else "FAIL"))
    _write_csv(out_dir / "mu_report.csv",
               ["check", "alpha", "param", "value", "target", "residual",
                "tolerance", "status"], rows)
    return 0 if ok else 1


def cmd_verify_ibpf(cfg, out_dir: Path, seed: int) -> int:
    deltas = cfg["deltas"]
    functionals = [functional_from_record(r) for r in cfg["functionals"]]
    hs = [h_with_id(r) for r in cfg["test_functions"]]
    mc = cfg.get("mc", {})
    n_paths = mc.get("n_paths", 0)
    grid_points = mc.get("grid_points", 128)
    tols = cfg.get("tolerances", {})
    route_tol = tols.get("route", 1e-6)
    mc_sigmas = tols.get("mc_sigmas", 3.0)
    rng = sampler.RngStream(seed)
    rows = []
    ok = True
    for delta in deltas:
        for phi in functionals:
            for h_id, h in hs:
                report = ibpf.verify(delta, phi, h, n_paths=n_paths,
                                     rng=rng.substream(int(round(delta * 1000))),
                                     grid_points=grid_points, h_id=h_id)
                rows.extend(report.rows())
                for name in ("rhs_quadrature", "rhs_unified", "rhs_special"):
                    resid = report.residuals.get(name)
                    if resid is not None:
                        ok &= resid <= route_tol
                if report.lhs_mc is not None:
                    ok &= report.residuals["lhs_mc"] <= mc_sigmas * report.lhs_mc_se
                if report.rhs_classical is not None and report.rhs_classical_se:
                    ok &= (report.residuals["rhs_classical"]
                           <= mc_sigmas * report.rhs_classical_se)
    _write_csv(out_dir / "ibpf_report.csv",
               ["delta", "phi_id", "h_id", "route", "value", "se_or_tol",
                "residual_vs_lhs_closed"], rows)
    return 0 if ok else 1


def cmd_sample(cfg, out_dir: Path, seed: int) -> int:
    n_paths = cfg.get("n_paths", 100000)
    if n_paths <= 0:
        raise ConfigError("n_paths must be positive")
    deltas = cfg.get("deltas", [0.5, 1.0, 2.0, 3.5])
    times = cfg.get("marginal_times", [0.25, 0.5, 0.75])
    alpha = cfg.get("alpha", 0.01)
    rng = sampler.RngStream(seed)
    ok = True

    ks_rows = []
    for i, delta in enumerate(deltas):
        gen = rng.substream(i).generator()
        block = sampler.sample_besq_bridge_block(delta, times, n_paths, gen)
        crit = stats.ks_critical_value(n_paths, alpha)
        for j, r in enumerate(times):
            d = stats.ks_statistic(
                block[:, j],
                lambda x: stats.gamma_cdf(x, 0.5 * delta,
                                          1.0 / (2.0 * r * (1.0 - r))))
            ok &= d < crit
            ks_rows.append((delta, r, n_paths, d, crit,
                            "pass" if d < crit else "FAIL"))
    _write_csv(out_dir / "ks_table.csv",
               ["delta", "r", "n_paths", "ks", "critical", "status"], ks_rows)

    add_rows = []
    for i, pair in enumerate(cfg.get("additivity_pairs", [[1.0, 1.0], [1.3, 2.2]])):
        rep = sampler.additivity_check(pair[0], pair[1], times,
                                       rng.substream(100 + i), n_paths, alpha)
        ok &= rep["all_passed"]
        for row in rep["rows"]:
            add_rows.append((pair[0], pair[1], row["r"], row["ks"],
                             row["critical"],
                             "pass" if row["passed"] else "FAIL"))
    _write_csv(out_dir / "additivity.csv",
               ["delta", "delta2", "r", "ks", "critical", "status"], add_rows)

    exp_rows = []
    grid = sampler.sin_squared_grid(cfg.get("grid_points", 64))
    from .laws import bridge_expectation
    for i, rec in enumerate(cfg.get("expectations", [])):
        phi = functional_from_record(rec["functional"])
        delta = rec["delta"]
        est, se = sampler.mc_expectation(delta, phi, grid, n_paths,
                                         rng.substream(200 + i))
        target = bridge_expectation(delta, phi)
        bias = sampler.interpolation_bias_bound(delta, phi, grid)
        tol = 3.0 * se + bias
        ok &= abs(est - target) <= tol
        exp_rows.append((rec.get("id", f"phi{i}"), delta, est, se, target,
                         bias, abs(est - target), tol,
                         "pass" if abs(est - target) <= tol else "FAIL"))
    _write_csv(out_dir / "expectations.csv",
               ["id", "delta", "estimate", "se", "target", "bias_bound",
                "abs_error", "tolerance", "status"], exp_rows)

    dump = cfg.get("dump_paths", {})
    if dump.get("enabled", False):
        n_dump = dump.get("n_paths", 10)
        path_rows = []
        for pid in range(n_dump):
            p = sampler.sample_bessel_bridge(deltas[0], grid,
                                             rng.substream(300 + pid))
            for t, v in zip(p.grid, p.values):
                path_rows.append((pid, t, v))
        _write_csv(out_dir / "paths.csv", ["path_id", "t", "value"], path_rows)
    return 0 if ok else 1


def cmd_spde(cfg, out_dir: Path, seed: int) -> int:
    m = cfg.get("m_interior", 127)
    eps = cfg.get("eps", 0.05)
    dt = cfg.get("dt", 1e-5)
    t_final = cfg.get("t_final", 2.0)
    replicas = cfg.get("replicas", 32)
    burn_in = cfg.get("burn_in", 0.5 * t_final)
    record_stride = cfg.get("record_stride", 500)
    snapshot_every = cfg.get("snapshot_every", 0)
    probe_x = cfg.get("probe_x", 0.5)
    drift = cfg.get("drift", True)
    drift_mode = cfg.get("drift_mode", "explicit")
    ks_tol = cfg.get("ks_tolerance", 0.05)
    rng = sampler.RngStream(seed)
    if drift:
        u0 = spde.reflected_bridge_field(m, replicas, rng.substream(1))
        traj = spde.simulate_bessel1(u0, eps, t_final, dt, rng.substream(2),
                                     probe_x=probe_x, record_stride=record_stride,
                                     snapshot_every=snapshot_every,
                                     drift_mode=drift_mode)
        target = "folded"
    else:
        z0 = spde.brownian_bridge_field(m, replicas, rng.substream(1).generator())
        traj = spde.simulate_she(z0, t_final, dt, rng.substream(2),
                                 probe_x=probe_x, record_stride=record_stride,
                                 snapshot_every=snapshot_every)
        target = "gaussian"
    report = spde.stationarity_report(traj, burn_in, target=target)

    probe_rows = []
    for i, t in enumerate(traj.probe_times):
        for j in range(traj.n_replicas):
            probe_rows.append((j, t, traj.probe_x, traj.probe_values[i, j]))
    _write_csv(out_dir / "trajectory.csv", ["replica", "t", "x", "u"], probe_rows)

    if traj.snapshots.size:
        snap_rows = []
        for i, t in enumerate(traj.snapshot_times):
            for j in range(traj.n_replicas):
                for k, x in enumerate(traj.x_grid):
                    snap_rows.append((j, t, x, traj.snapshots[i, k, j]))
        _write_csv(out_dir / "snapshots.csv", ["replica", "t", "x", "u"], snap_rows)
        if np.any(traj.snapshot_times > burn_in):
            _write_csv(out_dir / "site_ks.csv", ["x", "ks", "n_samples"],
                       spde.site_ks_profile(traj, burn_in, target=target))

    _write_csv(out_dir / "stationarity.csv",
               ["probe_x", "target", "n_samples", "ks", "ks_tolerance",
                "autocorr_time", "neg_fraction", "status"],
               [(report["probe_x"], report["target"], report["n_samples"],
                 report["ks"], ks_tol, report["autocorr_time"],
                 report["neg_fraction"],
                 "pass" if report["ks"] <= ks_tol else "FAIL")])
    return 0 if report["ks"] <= ks_tol else 1


def _source_from_record(rec):
    kind = rec.get("kind")
    if kind == "sin":
        return rec.get("id", "sin"), spde.SinSource(rec.get("amplitudes", [1.0]))
    if kind == "poly":
        return rec.get("id", "poly"), spde.PolySource(rec.get("coeffs", [0.0]))
    if kind == "zero":
        return rec.get("id", "zero"), spde.zero_source()
    raise ConfigError(f"unknown distinction source kind {kind!r}")


def cmd_distinction(cfg, out_dir: Path) -> int:
    h_rec = cfg.get("h", {"family": "bump", "params": [0.3, 0.7]})
    h = h_from_record(h_rec)
    tol = cfg.get("tolerance", 1e-8)
    gap_floor = cfg.get("gap_floor", 1e-3)
    rows = []
    ok = True
    for rec in cfg.get("sources", [{"id": "sin1", "kind": "sin",
                                    "amplitudes": [1.0]}]):
        sid, source = _source_from_record(rec)
        j_val, l_val, gap = spde.distinction_gap(source, h, tol=tol)
        resid_half = float(spde.relation_residual(source, np.array([0.5]))[0])
        degenerate = abs(resid_half) < 1e-14 and abs(
            float(spde.relation_residual(source, np.array([0.3]))[0])) < 1e-14
        if degenerate:
            status = "pass" if abs(gap) <= 1e-10 else "FAIL"
        else:
            status = "pass" if abs(gap) >= gap_floor else "FAIL"
        ok &= status == "pass"
        rows.append((sid, h_rec["family"], j_val, l_val, gap, resid_half, status))
    _write_csv(out_dir / "distinction.csv",
               ["k_id", "h_id", "J", "L", "gap", "relation_residual_at_half",
                "status"], rows)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="besselbridges",
        description="Bessel-bridge identities, exact bridge sampling, and "
                    "regularized dynamics: config-driven verification runs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify-mu", "verify-ibpf", "sample", "spde", "distinction"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get(THREADS_ENV, "0") or 0))
    args = parser.parse_args(argv)
    command = args.command.replace("-", "_")
    try:
        cfg = load_config(args.config, command)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    backend.set_num_threads(args.threads)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out_dir = Path(args.out if args.out is not None else cfg.get("out", "out"))
    try:
        if command == "verify_mu":
            return cmd_verify_mu(cfg, out_dir)
        if command == "verify_ibpf":
            return cmd_verify_ibpf(cfg, out_dir, seed)
        if command == "sample":
            return cmd_sample(cfg, out_dir, seed)
        if command == "spde":
            return cmd_spde(cfg, out_dir, seed)
        if command == "distinction":
            return cmd_distinction(cfg, out_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
