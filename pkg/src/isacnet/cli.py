"""Command-line front end: ``isacnet <command> [options]``.

Every command writes one table (CSV by default, JSON with ``--format json``)
to ``--out`` or stdout. With ``--out`` a manifest ``<out>.manifest.json`` is
written next to the table. Exit codes: 0 success, 1 runtime error (a JSON
error record goes to stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path


from .comm import rc_approx, rc_exact
from .configio import (RunManifest, config_hash, load_config, now_iso, tool_version, write_manifest,
                       write_table)
from .errors import IsacError
from .montecarlo import mc_comm_rate, mc_sense_rate
from .network import Allocation, NetworkConfig, validate_allocation
from .numerics import NESTED_TOL, SINGLE_TOL, QuadSpec
from .region import boundary_sweep, comm_corner, sense_corner, solve_p1, time_share_bound
from .sensing import rs_cluster, rs_q1

COMMANDS = ("comm-rate", "sense-rate", "ase-sweep", "mc", "validate", "region", "sum-ase")
LN2 = math.log(2.0)


class UsageError(Exception):
    pass


def parse_range(text: str, integer: bool = True):
    """``"a"`` or ``"start:stop:step"`` (stop inclusive) to a list of values."""
    parts = text.split(":")
    conv = int if integer else float
    try:
        if len(parts) == 1:
            return [conv(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (conv(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop:step") from None
    if step <= 0 or stop < start:
        raise UsageError(f"bad range {text!r}; need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = [start + i * step for i in range(n)]
    return vals if integer else [round(v, 12) for v in vals]


def parse_sweep(text: str):
    if "=" not in text:
        raise UsageError(f"bad sweep {text!r}; expected param=start:stop:step")
    name, rng = text.split("=", 1)
    name = name.strip()
    if name not in NetworkConfig.__dataclass_fields__:
        raise UsageError(f"unknown sweep parameter {name!r}")
    integer = name in ("m_t", "m_r", "j_max")
    return name, parse_range(rng, integer)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isacnet", description="Rate, ASE and tradeoff-region tools for "
                                "cooperative sensing-and-communication cellular networks.")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="config file, or 'defaults'")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    for flag in ("--k", "--l", "--j", "--q"):
        common.add_argument(flag, default=None, help="value or start:stop:step")
    common.add_argument("--sweep", default=None, help="network parameter sweep, param=start:stop:step")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--bits", action="store_true", help="report rates in bits instead of nats")
    common.add_argument("--n", type=int, default=None, help="Monte Carlo realizations")

    for name, helptext in [("comm-rate", "average user rate and comm ASE"),
                           ("sense-rate", "average radar information rate and sensing ASE"),
                           ("ase-sweep", "comm, sensing and total ASE over allocations"),
                           ("mc", "Monte Carlo rates"),
                           ("region", "tradeoff frontier and time-sharing segment"),
                           ("sum-ase", "weighted-sum ASE maximisation")]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        if name == "sum-ase":
            sp.add_argument("--rho", default="0:1:0.25", help="weight or start:stop:step")
    sp = sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo tables")
    sp.add_argument("target", choices=("comm", "sense"))
    return p


def _grid(args, base: Allocation):
    vals = {}
    for name in ("k", "l", "j", "q"):
        text = getattr(args, name)
        vals[name] = parse_range(text) if text is not None else [getattr(base, name)]
    sweep_name, sweep_vals = (parse_sweep(args.sweep) if args.sweep else (None, [None]))
    swept = [n.upper() for n in ("k", "l", "j", "q") if len(vals[n]) > 1]
    if sweep_name:
        swept = [sweep_name] + swept
    return vals, sweep_name, sweep_vals, swept


def _iter(cfg, vals, sweep_name, sweep_vals):
    for sv in sweep_vals:
        c = cfg.replace(**{sweep_name: sv}) if sweep_name else cfg
        for k, l, j, q in itertools.product(vals["k"], vals["l"], vals["j"], vals["q"]):
            yield sv, c, Allocation(k, l, j, q)


def _key(swept, sweep_name, sv, a):
    row = {}
    for name in swept:
        row[name] = sv if name == sweep_name else getattr(a, name.lower())
    return row


def _rs(c, a, spec):
    if a.q == 1:
        return rs_q1(c, a.k, spec, j=a.j)
    return rs_cluster(c, a.k, a.j, a.q, spec)


def run_command(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    started = now_iso()
    try:
        loaded = load_config(args.config)
        cfg = loaded.network
        seed = args.seed if args.seed is not None else loaded.run.seed
        n_mc = args.n if args.n is not None else loaded.run.n_realizations
        rel = loaded.run.rel_tol
        single = QuadSpec(rel, SINGLE_TOL.abs_tol) if rel else SINGLE_TOL
        nested = QuadSpec(max(rel, 1e-5), NESTED_TOL.abs_tol) if rel else NESTED_TOL
        scale = 1.0 / LN2 if args.bits else 1.0
        units = "bits" if args.bits else "nats"
        vals, sweep_name, sweep_vals, swept = _grid(args, loaded.allocation)
        rw = loaded.run.r_window_km
        rows, cols = [], []

        if args.command == "comm-rate":
            cols = swept + ["rc_exact", "rc_approx", "ase_exact", "ase_approx", "units"]
            for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                ex, ap = rc_exact(c, a, single), rc_approx(c, a.k, a.l, a.j, a.q, single)
                rows.append({**_key(swept, sweep_name, sv, a), "rc_exact": ex.rate_nats * scale,
                             "rc_approx": ap.rate_nats * scale, "ase_exact": ex.ase * scale,
                             "ase_approx": ap.ase * scale, "units": units})
        elif args.command == "sense-rate":
            cols = swept + ["method", "rs", "rs_no_hole", "ase", "units"]
            for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                r = _rs(c, a, nested)
                base = rs_q1(c, a.k, nested, hole_corrected=False).rate_nats * scale if a.q == 1 else None
                rows.append({**_key(swept, sweep_name, sv, a), "method": r.method, "rs": r.rate_nats * scale,
                             "rs_no_hole": base, "ase": r.ase * scale, "units": units})
        elif args.command == "ase-sweep":
            cols = swept + ["feasible", "comm_ase", "sense_ase", "sum_ase", "units"]
            for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                row = _key(swept, sweep_name, sv, a)
                if not validate_allocation(c, a):
                    rows.append({**row, "feasible": 0, "units": units})
                    continue
                ca = rc_approx(c, a.k, a.l, a.j, a.q, single).ase * scale
                sa = _rs(c, a, nested).ase * scale
                rows.append({**row, "feasible": 1, "comm_ase": ca, "sense_ase": sa, "sum_ase": ca + sa,
                             "units": units})
        elif args.command == "mc":
            cols = swept + ["mc_comm_mean", "mc_comm_ci", "mc_sense_mean", "mc_sense_ci", "n", "units"]
            for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                mc = mc_comm_rate(c, a, n_mc, seed, args.jobs, r_window=rw)
                ms = mc_sense_rate(c, a, n_mc, seed, args.jobs, r_window=rw)
                rows.append({**_key(swept, sweep_name, sv, a), "mc_comm_mean": mc.mean * scale,
                             "mc_comm_ci": mc.half_width_95 * scale, "mc_sense_mean": ms.mean * scale,
                             "mc_sense_ci": ms.half_width_95 * scale, "n": n_mc, "units": units})
        elif args.command == "validate":
            if args.target == "comm":
                cols = swept + ["rc_exact", "rc_approx", "mc_mean", "mc_ci", "rel_err_exact",
                                "rel_err_approx", "units"]
                for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                    ex = rc_exact(c, a, single).rate_nats
                    ap = rc_approx(c, a.k, a.l, a.j, a.q, single).rate_nats
                    m = mc_comm_rate(c, a, n_mc, seed, args.jobs, r_window=rw)
                    rows.append({**_key(swept, sweep_name, sv, a), "rc_exact": ex * scale,
                                 "rc_approx": ap * scale, "mc_mean": m.mean * scale,
                                 "mc_ci": m.half_width_95 * scale, "rel_err_exact": ex / m.mean - 1,
                                 "rel_err_approx": ap / m.mean - 1, "units": units})
            else:
                cols = swept + ["method", "rs", "rs_no_hole", "mc_mean", "mc_ci", "rel_err", "rel_err_no_hole",
                                "units"]
                for sv, c, a in _iter(cfg, vals, sweep_name, sweep_vals):
                    r = _rs(c, a, nested)
                    base = rs_q1(c, a.k, nested, hole_corrected=False).rate_nats if a.q == 1 else math.nan
                    m = mc_sense_rate(c, a, n_mc, seed, args.jobs, r_window=rw)
                    rows.append({**_key(swept, sweep_name, sv, a), "method": r.method,
                                 "rs": r.rate_nats * scale, "rs_no_hole": base * scale,
                                 "mc_mean": m.mean * scale, "mc_ci": m.half_width_95 * scale,
                                 "rel_err": r.rate_nats / m.mean - 1, "rel_err_no_hole": base / m.mean - 1,
                                 "units": units})
        elif args.command == "region":
            cols = (([sweep_name] if sweep_name else [])
                    + ["kind", "comm_ase", "sense_ase", "K", "L", "J", "Q", "units"])
            for sv in sweep_vals:
                c = cfg.replace(**{sweep_name: sv}) if sweep_name else cfg
                b = boundary_sweep(c, jobs=args.jobs)
                cc, sc = comm_corner(c), sense_corner(c, jobs=args.jobs)
                pts = list(b.points) + list(time_share_bound(cc, sc, 11).points)
                for p in pts:
                    a = p.alloc
                    rows.append({**({sweep_name: sv} if sweep_name else {}), "kind": p.provenance,
                                 "comm_ase": p.comm_ase * scale, "sense_ase": p.sense_ase * scale,
                                 "K": a.k if a else None, "L": a.l if a else None, "J": a.j if a else None,
                                 "Q": a.q if a else None, "units": units})
        elif args.command == "sum-ase":
            rhos = parse_range(args.rho, integer=False)
            if any(not 0 <= r <= 1 for r in rhos):
                raise UsageError("rho must lie in [0, 1]")
            cols = ["rho", "t_ase", "comm_ase", "sense_ase", "K", "L", "J", "Q", "units"]
            b = boundary_sweep(cfg, jobs=args.jobs)
            for rho in rhos:
                r = solve_p1(cfg, rho, boundary=b)
                a = r.best_point.alloc
                rows.append({"rho": rho, "t_ase": r.t_ase * scale, "comm_ase": r.best_point.comm_ase * scale,
                             "sense_ase": r.best_point.sense_ase * scale, "K": a.k, "L": a.l, "J": a.j,
                             "Q": a.q, "units": units})

        text = write_table(cols, rows, args.format)
        if args.out:
            out = Path(args.out)
            out.write_text(text)
            man = RunManifest(config_hash(loaded.as_dict()), args.command, int(seed), tool_version(), started,
                              now_iso(), [out.name])
            write_manifest(man, out.with_name(out.name + ".manifest.json"))
        else:
            sys.stdout.write(text)
        return 0
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"error": "UsageError", "message": str(e), "exit_code": 2}) + "\n")
        return 2
    except (IsacError, OSError, ValueError) as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": 1}) + "\n")
        return 1


def main() -> None:
    sys.exit(run_command())
