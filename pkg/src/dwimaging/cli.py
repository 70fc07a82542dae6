"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical check failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import diagnostics as diag
from . import hilbert, imaging
from .config import ScenarioConfig, load_config
from .expansion import DensityProfile, format_float, fringe_period, shot_density
from .numerics import RngStream

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2
ATOM_TOL = 1e-6


def write_csv(path: Path, header, columns) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(v if isinstance(v, str) else format_float(v) for v in row) + "\n")


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_shots(path: Path, records) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("index,xi,phi\n")
        for r in records:
            fh.write(f"{r.index},{format_float(r.params.xi)},{format_float(r.params.phi)}\n")


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, value: float, limit: float, passed: bool) -> None:
        self.items.append({"name": name, "value": value, "limit": limit, "passed": bool(passed)})

    def atoms(self, name: str, profile: DensityProfile) -> float:
        err = diag.relative_atom_error(profile)
        self.add(f"atom-number:{name}", err, ATOM_TOL, err <= ATOM_TOL)
        return profile.integral()

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.items)


def _fringe_metrics(cfg: ScenarioConfig, profile: DensityProfile) -> dict:
    if cfg.t <= 0 or cfg.family.d == 0:
        return {}
    period = fringe_period(cfg.family, cfg.t)
    half = diag.fringe_window(cfg.family, cfg.t)
    peaks = diag.peak_positions(profile, -half, half)
    return {
        "fringe_period": period,
        "window_half_width": half,
        "contrast_central": diag.fringe_contrast(profile, period),
        "peaks_in_window": int(peaks.size),
        # periods spanned by the observed peaks
        "fringes_counted": max(int(peaks.size) - 1, 0),
        "expected_fringes_in_window": 2.0 * half / period,
    }


def _outdir(cfg: ScenarioConfig, args) -> Path:
    out = Path(args.out or cfg.output or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_seed(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if args.seed is not None:
        cfg.run = replace(cfg.run, master_seed=args.seed)
    return cfg


def cmd_shot(cfg: ScenarioConfig, args) -> int:
    state = cfg.state.build()
    if cfg.shot is not None:
        params = cfg.shot
    else:
        params = imaging.sample_shot(state, RngStream(cfg.run.master_seed, 0), cfg.run)
    prof = shot_density(cfg.family, state.N, params, cfg.t, cfg.grid)
    out = _outdir(cfg, args)
    checks = Checks()
    write_csv(out / "profile.csv", ["x", "density"], [cfg.grid.x, prof.values])
    write_shots(out / "shots.csv", [imaging.ShotRecord(0, params)])
    summary = {
        "command": "shot",
        "config": cfg.echo(),
        "shot": {"xi": params.xi, "phi": params.phi, "fixed": cfg.shot is not None},
        "integrals": {"profile": checks.atoms("profile", prof)},
        "fringes": _fringe_metrics(cfg, prof),
        "checks": checks.items,
    }
    if state.N < 10:
        summary["note"] = "single-image profile of a small-N state; read as one POVM outcome only"
    write_json(out / "summary.json", summary)
    return EXIT_OK if checks.ok else EXIT_CHECK


def cmd_run(cfg: ScenarioConfig, args) -> int:
    state = cfg.state.build()
    t0 = time.perf_counter()
    prof, records = imaging.run_monte_carlo(state, cfg.family, cfg.run, threads=args.threads)
    elapsed = time.perf_counter() - t0
    out = _outdir(cfg, args)
    checks = Checks()
    write_csv(out / "profile.csv", ["x", "density", "stderr"],
              [cfg.grid.x, prof.values, prof.stderr])
    write_shots(out / "shots.csv", records)
    if cfg.run.keep_profiles:
        write_csv(out / "shot_profiles.csv", ["x"] + [f"shot_{r.index}" for r in records],
                  [cfg.grid.x] + [r.profile.values for r in records])
    summary = {
        "command": "run",
        "config": cfg.echo(),
        "integrals": {"profile": checks.atoms("profile", prof)},
        "fringes": _fringe_metrics(cfg, prof),
        "max_stderr": float(prof.stderr.max()),
    }
    k = state.fock_index()
    if k is not None and cfg.run.n_shots > 1:
        closed = imaging.povm_average_fock_closed(state.N, k, cfg.family, cfg.t, cfg.grid)
        inside = np.abs(prof.values - closed.values) <= 3.0 * prof.stderr
        summary["closed_form"] = {
            "fraction_within_3_stderr": float(inside.mean()),
            "l2_error": diag.l2_distance(prof, closed),
            "integral": checks.atoms("povm_closed", closed),
        }
    summary["checks"] = checks.items
    write_json(out / "summary.json", summary)
    write_json(out / "timing.json", {"seconds": elapsed, "threads": args.threads})
    return EXIT_OK if checks.ok else EXIT_CHECK


def cmd_compare(cfg: ScenarioConfig, args) -> int:
    if cfg.state.kind != "fock":
        raise imaging.ConfigurationError("compare needs a Fock state (state.kind: fock)")
    N, k = cfg.state.N, cfg.state.k
    fam, t, grid = cfg.family, cfg.t, cfg.grid
    closed = imaging.povm_average_fock_closed(N, k, fam, t, grid)
    trace = imaging.trace_average_fock(N, k, fam, t, grid)
    diff = imaging.density_difference(N, k, fam, t, grid)
    quad = imaging.povm_average_quadrature(cfg.state.build(), fam, t, grid, cfg.quadrature)
    out = _outdir(cfg, args)
    write_csv(out / "compare.csv",
              ["x", "povm_closed", "operator", "difference", "povm_quadrature"],
              [grid.x, closed.values, trace.values, diff.values, quad.values])
    checks = Checks()
    max_dev = float(np.max(np.abs(closed.values - quad.values)))
    checks.add("closed-vs-quadrature", max_dev, 1e-8, max_dev <= 1e-8)
    c1, c2 = imaging.difference_coefficients(N, k)
    summary = {
        "command": "compare",
        "config": cfg.echo(),
        "povm_coefficients": list(imaging.povm_fock_coefficients(N, k)),
        "operator_coefficients": [float(k), float(N - k)],
        "difference_coefficients": [c1, c2],
        "max_abs_closed_minus_quadrature": max_dev,
        "integrals": {
            "povm_closed": checks.atoms("povm_closed", closed),
            "operator": checks.atoms("operator", trace),
            "difference": checks.atoms("difference", diff),
            "povm_quadrature": checks.atoms("povm_quadrature", quad),
        },
    }
    summary["checks"] = checks.items
    write_json(out / "summary.json", summary)
    return EXIT_OK if checks.ok else EXIT_CHECK


def cmd_sample_dist(cfg: ScenarioConfig, args) -> int:
    state = cfg.state.build()
    xi, phi = imaging.sample_outcomes(state, cfg.run)
    n = xi.size
    out = _outdir(cfg, args)
    edges = np.linspace(0.0, 1.0, 51)
    counts, _ = np.histogram(xi, bins=edges)
    width = np.diff(edges)
    k = state.fock_index()
    if k is not None:
        a, b = k + 1, state.N - k + 1
        expected = np.diff(stats.beta.cdf(edges, a, b)) / width
    else:
        expected = imaging.xi_marginal(state, 0.5 * (edges[:-1] + edges[1:]))
    write_csv(out / "xi_hist.csv", ["xi_lo", "xi_hi", "count", "density", "expected"],
              [edges[:-1], edges[1:], [str(c) for c in counts], counts / (n * width), expected])
    pedges = np.linspace(0.0, 2.0 * math.pi, 33)
    pcounts, _ = np.histogram(phi, bins=pedges)
    write_csv(out / "phi_hist.csv", ["phi_lo", "phi_hi", "count", "density"],
              [pedges[:-1], pedges[1:], [str(c) for c in pcounts], pcounts / (n * np.diff(pedges))])
    summary = {"command": "sample-dist", "config": cfg.echo(), "n_samples": int(n),
               "xi_mean": float(xi.mean()), "xi_std": float(xi.std())}
    checks = Checks()
    if k is not None:
        ks = diag.ks_beta(xi, k + 1, state.N - k + 1)
        pval = diag.uniform_phase_pvalue(phi)
        summary.update(xi_mean_expected=(k + 1) / (state.N + 2), ks_statistic=ks,
                       ks_limit=1.63 / math.sqrt(n), phase_chi2_pvalue=pval)
        checks.add("ks-beta", ks, 1.63 / math.sqrt(n), ks <= 1.63 / math.sqrt(n))
        checks.add("phase-uniform", pval, 1e-3, pval >= 1e-3)
    summary["checks"] = checks.items
    write_json(out / "summary.json", summary)
    return EXIT_OK if checks.ok else EXIT_CHECK


def cmd_ground_state(cfg: ScenarioConfig, args) -> int:
    if cfg.state.kind != "ground":
        raise imaging.ConfigurationError("ground-state needs state.kind: ground")
    from .trap import ground_energy

    state = cfg.state.build()
    N = state.N
    c = state.coeffs
    out = _outdir(cfg, args)
    write_csv(out / "coeffs.csv", ["k", "re", "im", "probability"],
              [[str(i) for i in range(N + 1)], c.real, c.imag, np.abs(c) ** 2])
    obm = hilbert.one_body_matrix(state)
    coh = hilbert.coherent_state(N, hilbert.CoherentParams(0.5, 0.0))
    summary = {
        "command": "ground-state",
        "config": cfg.echo(),
        "energy": ground_energy(N, cfg.state.trap),
        "one_body": {"n1": obm.n1, "n2": obm.n2, "coh_re": obm.coh.real, "coh_im": obm.coh.imag},
        "fidelity_coherent_half": abs(hilbert.overlap(state, coh)) ** 2,
        "fidelity_fock_half": (abs(hilbert.overlap(state, hilbert.fock_state(N, N // 2))) ** 2
                               if N % 2 == 0 else None),
        "checks": [],
    }
    write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest()
    print(f"{failures} failure(s)")
    return EXIT_OK if failures == 0 else EXIT_CHECK


COMMANDS = {
    "shot": cmd_shot,
    "run": cmd_run,
    "compare": cmd_compare,
    "sample-dist": cmd_sample_dist,
    "ground-state": cmd_ground_state,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dwimaging",
                                description="Absorption-imaging simulator for bosons in a double well")
    sub = p.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["selftest"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "selftest", help="scenario YAML file")
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for shot accumulation")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args)
    try:
        if args.threads < 1:
            raise imaging.ConfigurationError("--threads must be >= 1")
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise imaging.ConfigurationError("--seed must be an unsigned 64-bit integer")
        cfg = _apply_seed(load_config(args.config), args)
        code = COMMANDS[args.command](cfg, args)
    except imaging.ConfigurationError as exc:
        print(f"dwimaging: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_CHECK:
        print("dwimaging: numerical check failed; see summary.json", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
