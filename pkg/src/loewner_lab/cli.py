"""Command-line runner: ``loewner-lab <command> --config FILE [--seed N] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, svg
from .config import COMMANDS, ExperimentConfig, load_config
from .errors import ConfigInvalid, LoewnerLabError

log = logging.getLogger("loewner_lab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class RunManifest:
    config: dict
    version: str
    wall_time: float
    input_hashes: dict
    outputs: list

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "version": self.version,
                           "wall_time": self.wall_time, "input_hashes": self.input_hashes,
                           "outputs": self.outputs}, indent=2, sort_keys=True, default=str)


def _num(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class _Out:
    """Collects the files of one run under the output directory."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list = []
        root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return p

    def csv(self, name: str, header: str, rows) -> Path:
        p = self.path(name)
        lines = [header] + [",".join(_num(v) for v in row) for row in rows]
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return p


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _driving(cfg: ExperimentConfig, p: dict, stream: int = 0):
    from .core_flow import DrivingTerm
    from .sle_stats import SleParams, sample_sle_driving

    kind = p.get("driving", "sle")
    if kind == "zero":
        return DrivingTerm.constant(p["geometry"], p["T"], p["dt"])
    if kind == "constant":
        return DrivingTerm.constant(p["geometry"], p["T"], p["dt"], p["value"])
    if kind == "file":
        return read_driving(p["driving_file"], p["geometry"])
    return sample_sle_driving(SleParams(p["kappa"], p["T"], p["dt"], cfg.seed), p["geometry"],
                              stream=stream, rotate=p.get("rotate", False))


def write_driving(out: _Out, name: str, d) -> None:
    out.csv(name, "t,xi", zip(d.t_grid, d.xi))


def read_driving(path, geometry):
    from .core_flow import DrivingTerm

    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[0] < 2:
        raise ConfigInvalid("params.driving_file", "needs at least two samples")
    return DrivingTerm(geometry, float(rows[1, 0] - rows[0, 0]), rows[:, 1])


def _curve_plot(out: _Out, name: str, curves, title: str) -> None:
    svg.curve_overlay(curves, out.path(name), title)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_trace(cfg, p, out):
    from .trace import trace_curve, write_curve

    d = _driving(cfg, p)
    c = trace_curve(d, p["d_cut"])
    write_curve(c, out.path("curve.csv"))
    _curve_plot(out, "curve.svg", [("curve", c.points)], f"{p['geometry']} trace")


def cmd_extract(cfg, p, out):
    from .trace import extract_driving, read_curve

    c = read_curve(p["curve_file"])
    d = extract_driving(c, p["elementary"])
    write_driving(out, "driving.csv", d)
    svg.plot([("xi", d.t_grid, d.xi)], out.path("driving.svg"), "extracted driving", "t", "xi",
             markers=False)


def cmd_compare(cfg, p, out):
    from .compare import composite_bound_check, perturb

    d1 = _driving(cfg, dict(p, driving="sle"))
    d2 = perturb(d1, p["eps"], p["mode"], cfg.seed)
    chk = composite_bound_check(d1, d2, p["beta"], p["r"], p["p"], p["rho"], p["eps"],
                                d_cut=p["d_cut"], raise_on_fail=False)
    rows = [("measured", chk.measured, ""), ("bound", chk.bound, "")]
    for k in sorted(chk.hypotheses):
        ok, val, thr = chk.hypotheses[k]
        rows.append((f"hypothesis_{k}", val, f"{'pass' if ok else 'fail'} (limit {thr!r})"))
    out.csv("compare.csv", "quantity,value,note", rows)
    from .trace import trace_curve

    c1, c2 = trace_curve(d1, p["d_cut"]), trace_curve(d2, p["d_cut"])
    _curve_plot(out, "overlay.svg", [("W", c1.points), ("W + perturbation", c2.points)],
                "curve overlay")
    print(f"sup distance {chk.measured:.6g}, bound {chk.bound:.6g}")


def cmd_perturb_scan(cfg, p, out):
    from .compare import perturbation_scan

    base = _driving(cfg, p)
    fit = perturbation_scan(base, p["eps_list"], p["rho"], p["p"], p["mode"], cfg.seed)
    out.csv("perturb_scan.csv", "eps,d,distance,gronwall_term,tip_gap_1,tip_gap_2", fit.rows)
    svg.plot([("distance", fit.xs, fit.ys)], out.path("perturb_scan.svg"),
             f"slope {fit.slope:.3f}", "eps", "sup distance", logx=True, logy=True)
    print(f"slope {fit.slope:.4f} (r2 {fit.r2:.4f})")


def cmd_eta_tip(cfg, p, out):
    from .geometry import domain_for_curve, eta_tip
    from .trace import read_curve, trace_curve

    if p["curve_file"] is not None:
        c = read_curve(p["curve_file"])
    else:
        c = trace_curve(_driving(cfg, dict(p, driving="sle")), p["d_cut"])
    rep = eta_tip(c.points, domain_for_curve(c), p["delta_list"], times=c.times)
    out.csv("eta_tip.csv", "delta,eta_tip", zip(rep.delta_list, rep.eta_values))
    rep.to_csv(out.path("witnesses.csv"))


def cmd_lerw(cfg, p, out):
    from . import lattice

    def make(n):
        if p["domain"] == "square":
            return lattice.square_domain(p["half"], n)
        return lattice.grid_approximation(lattice.disk_polygon(), n)

    if p["modulus"]:
        rows = lattice.structure_modulus_mc(make, p["n_list"], r=p["r"], N=p["N"], seed=cfg.seed)
        out.csv("structure_modulus.csv", "n,delta,threshold,failures,samples,p_fail",
                [(r.n, r.delta, r.threshold, r.failures, r.samples, r.p_fail) for r in rows])
        return
    dom = make(p["n"])
    lengths = []
    for k in range(p["N"]):
        w = lattice.lerw_sample(dom, cfg.seed, k)
        lattice.write_walk(out.path(f"walks/walk_{k:04d}.txt"), w)
        lengths.append((k, len(w), int(w.sites[-1][0]), int(w.sites[-1][1])))
    out.csv("lerw.csv", "sample,length,end_x,end_y", lengths)
    w0 = lattice.read_walk(out.root / "walks/walk_0000.txt")
    _curve_plot(out, "lerw.svg", [("boundary", np.append(dom.boundary_polygon,
                                                         dom.boundary_polygon[:1])),
                                  ("LERW", w0.points)], f"LERW, n = {p['n']}")


def cmd_sle_sample(cfg, p, out):
    from .trace import trace_curve, write_curve

    curves = []
    for k in range(p["N"]):
        d = _driving(cfg, dict(p, driving="sle"), stream=k)
        write_driving(out, f"driving_{k:04d}.csv", d)
        c = trace_curve(d, p["d_cut"])
        write_curve(c, out.path(f"curve_{k:04d}.csv"))
        curves.append((f"sample {k}", c.points))
    _curve_plot(out, "curves.svg", curves[:6], f"SLE_{p['kappa']:g} samples")


def cmd_moment_scan(cfg, p, out):
    from .sle_stats import reverse_sle_moment_scan, zeta

    fit = reverse_sle_moment_scan(p["kappa"], p["lambda"], p["t_list"], p["N"], cfg.seed, p["dt"])
    out.csv("moment_scan.csv", "t,mean_moment,stderr", fit.rows)
    pred = -zeta(p["kappa"], p["lambda"]) / 2
    svg.plot([("E|h'(i)|^lambda", fit.xs, fit.ys)], out.path("moment_scan.svg"),
             f"slope {fit.slope:.4f} vs {pred:.4f}", "t", "mean moment", logx=True, logy=True)
    print(f"slope {fit.slope:.4f}, predicted {pred:.4f}")


def cmd_tail_scan(cfg, p, out):
    from .sle_stats import derivative_tail_scan

    res = derivative_tail_scan(p["kappa"], p["beta"], p["d_star_list"], p["T"], p["N"], cfg.seed)
    out.csv("tail_scan.csv", "d_star,failure_freq,q_pred", res.rows)
    svg.plot([("failure frequency", [r[0] for r in res.rows], [r[1] for r in res.rows])],
             out.path("tail_scan.svg"), f"exponent {res.exponent:.3f}, q {res.q_pred:.3f}",
             "d_star", "failure frequency", logx=True, logy=True)
    print(f"c = {res.c:.6g}, fitted exponent {res.exponent:.4f}, q(beta) = {res.q_pred:.4f}")


def cmd_grid_map(cfg, p, out):
    from .conformal import psi_convergence_experiment
    from .lattice import disk_polygon

    fit = psi_convergence_experiment(disk_polygon(), p["n_list"], p["samples"], p["band"], cfg.seed)
    out.csv("grid_map.csv", "n,sup_gap,median_gap,log_n_over_sqrt_n", fit.rows)
    svg.plot([("sup gap", fit.xs, fit.ys),
              ("log n / sqrt n", fit.xs, [r[3] for r in fit.rows])],
             out.path("grid_map.svg"), f"exponent {-fit.slope:.3f}", "n", "gap",
             logx=True, logy=True)
    print(f"decay exponent {-fit.slope:.4f}")


def cmd_lerw_vs_sle(cfg, p, out):
    from .coupling import COUPLING_LABEL, lerw_vs_sle

    res = lerw_vs_sle(p["n_list"], p["N"], cfg.seed, p["T"], p["eps_sigma"], p["dt"], p["d_cut"])
    out.csv("lerw_vs_sle.csv", "n,median_distance,mean_distance,checklist_rate,samples",
            [(r.n, r.median_distance, r.mean_distance, r.checklist_rate, r.samples)
             for r in res.rows])
    out.csv("lerw_vs_sle_seeds.csv",
            "n,sample,sigma,distance,driving_gap,eta_tip_ok,derivative_ok,checklist_ok",
            [(r.n, r.sample, r.sigma, r.distance, r.gap, r.eta_ok, r.deriv_ok, r.checklist_ok)
             for r in res.reports])
    svg.plot([("median distance", [r.n for r in res.rows], [r.median_distance for r in res.rows])],
             out.path("lerw_vs_sle.svg"), COUPLING_LABEL, "n", "sup distance on [0, sigma]",
             logx=True, logy=True)
    print(COUPLING_LABEL)
    for r in res.rows:
        print(f"n={r.n}: median {r.median_distance:.4g}, checklist {100 * r.checklist_rate:.0f}%")


def cmd_exponents(cfg, p, out):
    from .sle_stats import optimize_exponents

    e = optimize_exponents()
    out.csv("exponents.csv", "beta_star,r_star,m_star,mu", [(e.beta_star, e.r_star, e.m_star, e.mu)])
    print(f"beta* = {e.beta_star:.6f}  r* = {e.r_star:.6f}  m* = {e.m_star:.6f}  (mu = {e.mu:.6f})")


DISPATCH = {
    "trace": cmd_trace, "extract": cmd_extract, "compare": cmd_compare,
    "perturb-scan": cmd_perturb_scan, "eta-tip": cmd_eta_tip, "lerw": cmd_lerw,
    "sle-sample": cmd_sle_sample, "moment-scan": cmd_moment_scan, "tail-scan": cmd_tail_scan,
    "grid-map": cmd_grid_map, "lerw-vs-sle": cmd_lerw_vs_sle, "exponents": cmd_exponents,
}


def run(cfg: ExperimentConfig) -> RunManifest:
    t0 = time.perf_counter()
    out = _Out(Path(cfg.output_dir))
    DISPATCH[cfg.command](cfg, cfg.params, out)
    inputs = {}
    if cfg.source is not None:
        inputs[str(cfg.source)] = _sha256(cfg.source)
    for v in cfg.params.values():
        if isinstance(v, Path) and v.exists():
            inputs[str(v)] = _sha256(v)
    echo = {"command": cfg.command, "seed": cfg.seed, "output_dir": str(cfg.output_dir),
            "params": {k: (str(v) if isinstance(v, Path) else v) for k, v in cfg.params.items()}}
    man = RunManifest(echo, __version__, time.perf_counter() - t0, inputs, list(out.files))
    fd, tmp = tempfile.mkstemp(dir=out.root, prefix=".manifest.", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(man.to_json() + "\n")
    os.replace(tmp, out.root / "manifest.json")
    return man


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loewner-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML experiment file")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.command, args.seed, args.out, dict(os.environ))
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        man = run(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LoewnerLabError as exc:
        print(f"{args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("wrote %d files to %s in %.1f s", len(man.outputs), cfg.output_dir, man.wall_time)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
