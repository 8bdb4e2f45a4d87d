"""Command-line front end: check, scan, roots, map and oracle."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from .classifier import separation_margins, stability_report
from .config import ConfigError, load_config, swept_background
from .lopatinskii import scan_hemisphere

log = logging.getLogger("elastosheet")

EXIT_OK, EXIT_NEGATIVE, EXIT_CONFIG = 0, 1, 2

SCAN_HEADER = ["theta", "gamma", "delta", "abs_det_norm", "flag"]
ROOTS_HEADER = ["theta", "V1", "V2", "ups1_r", "ups1_l", "pole2_r_m", "pole2_r_p", "pole2_l_m", "pole2_l_p",
                "om_r_m", "om_r_p", "om_l_m", "om_l_p", "min_gap"]
MAP_HEADER = ["param_value", "h1_margin", "g_margin", "verdict", "min_gap"]


def fmt(x) -> str:
    """Round-trippable, platform-stable text for a float (empty for missing values)."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


class _Output:
    """Writes to a path, or to standard output when no path is given."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        if self.path is None:
            return sys.stdout
        try:
            self.fh = open(self.path, "w", encoding="utf-8", newline="")
        except OSError as exc:
            raise ConfigError("--out", f"cannot write {self.path}: {exc}") from exc
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()
        return False


def _theta_grid(cfg):
    return np.linspace(0.0, math.pi, cfg.grid["theta_points"], endpoint=False)


def cmd_check(cfg, args) -> int:
    v = stability_report(cfg.background)
    with _Output(args.out) as fh:
        json.dump(v.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK if v.verdict == "stable_conditions_hold" else EXIT_NEGATIVE


def cmd_scan(cfg, args) -> int:
    tol = cfg.tolerances
    rep = scan_hemisphere(cfg.background, cfg.grid, det_zero=tol["det_zero"], root_refine=tol["root_refine"],
                          threads=args.threads)
    with _Output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for th, g, d, val, flag in rep.rows():
            w.writerow([fmt(th), fmt(g), fmt(d), fmt(val), flag])
    print(f"verdict: {rep.verdict}; interior zeros: {len(rep.unstable_zeros)}; "
          f"boundary zeros: {len(rep.neutral_zeros)}", file=sys.stderr)
    return EXIT_NEGATIVE if rep.unstable_mode_found else EXIT_OK


def cmd_roots(cfg, args) -> int:
    bg = cfg.background
    rep = separation_margins(bg, _theta_grid(cfg), with_roots=True)
    anomalous = {th for th, _ in rep.anomalies}
    for th, msg in rep.anomalies:
        print(f"warning: root count anomaly at theta={th!r}: {msg}", file=sys.stderr)
    with _Output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROOTS_HEADER)
        for i, sl in enumerate(rep.slices):
            V = sl.roots if (sl.roots is not None and sl.theta not in anomalous) else (None, None)
            w.writerow([fmt(sl.theta), fmt(V[0]), fmt(V[1]), fmt(sl.ups1_r), fmt(sl.ups1_l),
                        fmt(sl.pole2_r[0]), fmt(sl.pole2_r[1]), fmt(sl.pole2_l[0]), fmt(sl.pole2_l[1]),
                        fmt(sl.omega_r[0]), fmt(sl.omega_r[1]), fmt(sl.omega_l[0]), fmt(sl.omega_l[1]),
                        fmt(rep.row_min_gap(i))])
    return EXIT_NEGATIVE if rep.anomalies else EXIT_OK


def cmd_map(cfg, args) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep", "the map command needs a sweep section")
    sw = cfg.sweep
    thetas = _theta_grid(cfg)
    with _Output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MAP_HEADER)
        for p in np.linspace(sw.start, sw.stop, sw.steps):
            bg = swept_background(cfg.background, sw.parameter, float(p))
            v = stability_report(bg)
            sep = separation_margins(bg, thetas)
            w.writerow([fmt(p), fmt(v.margins[0]), fmt(v.margins[1]), v.verdict, fmt(sep.min_gap)])
    return EXIT_OK


def run_oracles(cfg) -> dict:
    from .oracles import diagonalization_oracle, factored_oracle, schur_oracle

    tol = cfg.tolerances
    n = cfg.oracle.get("samples", {})
    defect = float(cfg.oracle.get("involution_defect", 0.0))
    rng = np.random.default_rng(cfg.seed)
    diag = diagonalization_oracle(rng, int(n.get("diagonalization", 100)), defect=defect, base=cfg.background)
    schur, eig = schur_oracle(rng, int(n.get("schur", 200)), base=cfg.background)
    fac, min_factor, skipped = factored_oracle(rng, int(n.get("factored", 500)), bg=cfg.background)
    out = {
        "diagonalization": {"max_residual": diag, "tolerance": tol["diag_residual"],
                            "pass": diag <= tol["diag_residual"]},
        "schur": {"max_residual_over_lambda": schur, "max_eigenvalue_gap_over_lambda": eig,
                  "tolerance": tol["schur_residual"],
                  "pass": schur <= tol["schur_residual"] and eig <= tol["schur_residual"]},
        "factored_determinant": {"max_relative_error": fac, "min_nonvanishing_factor": min_factor,
                                 "skipped_samples": skipped, "tolerance": tol["factored_residual"],
                                 "pass": fac <= tol["factored_residual"] and min_factor > 0},
    }
    out["pass"] = all(v["pass"] for v in out.values())
    return out


def cmd_oracle(cfg, args) -> int:
    out = run_oracles(cfg)
    with _Output(args.out) as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK if out["pass"] else EXIT_NEGATIVE


HELP = {"check": "report the stability conditions as JSON",
        "scan": "scan the frequency hemisphere for zeros of the Lopatinskii determinant",
        "roots": "tabulate neutral roots and frequency-set branches per direction",
        "map": "sweep one background parameter and tabulate the verdicts",
        "oracle": "run the internal consistency oracles"}

COMMANDS = {"check": cmd_check, "scan": cmd_scan, "roots": cmd_roots, "map": cmd_map, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elastosheet", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--out", default=None, help="output file (standard output when omitted)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ELASTOSHEET_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command in ("scan", "roots", "map") and args.out is None:
        print("error: --out is required for this command", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
