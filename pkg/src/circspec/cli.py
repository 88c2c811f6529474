"""Command line front end.

Every command writes one or more CSV files into ``--out`` (default: the
current directory) and prints a one-line summary.  Options may also come from
a flat ``key = value`` file given with ``--config``; explicit flags win.

Exit status: 0 on success, 1 for invalid input or I/O errors, 2 when a
numerical method fails.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .analysis import default_grid, detect_lambda_bifurcations, sweep
from .asymptotics import (
    ar_truncation_bound,
    build_local_ar_operator,
    predicted_mode,
    predicted_spectrum,
)
from .errors import CircSpecError, DegeneracyError, NumericalFailureError
from .maps import CircleMap, NoiseSpec
from .orbits import find_periodic_orbits
from .simulate import simulate_chain
from .transfer import assemble, invariant_density, spectrum

HEADERS = {
    "orbits": ["period", "point_index", "x", "derivative", "multiplier", "stability"],
    "spectrum": ["index", "re", "im", "modulus", "residual"],
    "predicted": ["orbit_period", "multiplier", "j", "branch", "re", "im", "modulus", "kind"],
    "density": ["x", "rho_numeric", "rho_predicted"],
    "sweep": ["b", "n_stable_orbits", "n_unstable_orbits", "mod1_count", "neutral_flag",
              "top_moduli"],
    "events": ["b_lo", "b_hi", "count_before", "count_after"],
    "histogram": ["bin_left", "bin_right", "count", "density_estimate"],
}


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


# -- argument handling --------------------------------------------------------

def _add_map_args(p):
    p.add_argument("--b", type=float, help="sine-circle parameter b")
    p.add_argument("--omega", type=float, default=1.0, help="sine-circle rotation (default 1)")
    p.add_argument("--sigma", type=float, default=1.0, help="noise level sigma0 (default 1)")
    p.add_argument("--noise-amplitude", type=float, default=0.0,
                   help="cosine modulation of sigma, |a| < 1 (default 0: constant)")
    p.add_argument("--noise-phase", type=float, default=0.0)


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="flat key = value option file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circspec",
        description="Spectra of Gaussian perturbations of circle maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbits", help="periodic orbits up to a period bound")
    _add_map_args(p)
    p.add_argument("--pmax", type=int, default=2)
    p.add_argument("--scan-n", type=int, default=4096)
    _add_common(p)

    p = sub.add_parser("spectrum", help="top eigenvalues of the discretised operator")
    _add_map_args(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid-n", type=int, help="grid size (default: resolution rule)")
    p.add_argument("--top-k", type=int, default=6)
    _add_common(p)

    p = sub.add_parser("predict", help="limiting eigenvalues from periodic orbits")
    _add_map_args(p)
    p.add_argument("--pmax", type=int, default=2)
    p.add_argument("--jmax", type=int, default=4)
    _add_common(p)

    p = sub.add_parser("density", help="stationary density, optionally with prediction")
    _add_map_args(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--pmax", type=int, default=2)
    p.add_argument("--predicted", action="store_true",
                   help="add the predicted Hermite density (single stable orbit only)")
    _add_common(p)

    p = sub.add_parser("sweep", help="modulus-one count across a range of b")
    p.add_argument("--b-lo", type=float)
    p.add_argument("--b-hi", type=float)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--noise-amplitude", type=float, default=0.0)
    p.add_argument("--noise-phase", type=float, default=0.0)
    p.add_argument("--pmax", type=int, default=2)
    p.add_argument("--jmax", type=int, default=4)
    p.add_argument("--top-k", type=int, default=6)
    p.add_argument("--eps", type=float, help="also compute numeric spectra at this noise")
    p.add_argument("--grid-n", type=int)
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo histogram of the noisy chain")
    _add_map_args(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--steps", type=int, default=10**6)
    p.add_argument("--burn-in", type=int, help="discarded steps (default 1%% of steps)")
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("oracle-ar", help="spectrum of the truncated AR(1) operator")
    p.add_argument("--c", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--half-width", type=float, help="truncation half-width L")
    p.add_argument("--grid-n", type=int, default=400)
    p.add_argument("--top-k", type=int, default=8)
    _add_common(p)
    return parser


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        for key, val in cfg.items():
            if key not in known or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                cfg[key] = val.lower() in ("1", "true", "yes", "on")
        sub.set_defaults(**cfg)
        # parse again: string defaults go through the option types, flags win
        args = parser.parse_args(argv)
    return args


# -- helpers ------------------------------------------------------------------------

def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))


def _positive(name, value):
    if value is not None and not value > 0:
        raise UsageError(f"--{name} must be positive")


def _noise(args) -> NoiseSpec:
    if args.noise_amplitude:
        return NoiseSpec("cosine", {"sigma0": args.sigma, "amplitude": args.noise_amplitude,
                                    "phase": args.noise_phase})
    return NoiseSpec.constant(args.sigma)


def _map(args) -> CircleMap:
    _require(args, "b")
    return CircleMap.sine_circle(args.b, args.omega)


def _grid(args, noise):
    if args.grid_n is None:
        return default_grid(args.eps, noise)
    if args.grid_n < 64:
        raise UsageError("--grid-n must be >= 64")
    return args.grid_n


def _prepare_out(args):
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {args.out}: {exc}") from exc
    if not os.access(args.out, os.W_OK):
        raise UsageError(f"output directory {args.out} is not writable")


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# -- commands -------------------------------------------------------------------

def cmd_orbits(args):
    if args.pmax < 1 or args.scan_n < 256:
        raise UsageError("--pmax must be >= 1 and --scan-n >= 256")
    cmap = _map(args)
    _prepare_out(args)
    orbs = find_periodic_orbits(cmap, args.pmax, scan_n=args.scan_n)
    rows = [(o.period, i, x, d, o.multiplier, o.stability)
            for o in orbs for i, (x, d) in enumerate(zip(o.points, o.derivatives))]
    write_csv(os.path.join(args.out, "orbits.csv"), HEADERS["orbits"], rows)
    n_st = sum(o.is_stable for o in orbs)
    return f"orbits: {len(orbs)} found ({n_st} stable) for b={args.b:g}"


def _spectrum_rows(spec):
    return [(i, v.real, v.imag, abs(v), r)
            for i, (v, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]


def cmd_spectrum(args):
    _require(args, "eps")
    _positive("eps", args.eps)
    if args.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    cmap, noise = _map(args), _noise(args)
    n = _grid(args, noise)
    _prepare_out(args)
    spec = spectrum(assemble(cmap, noise, args.eps, n), args.top_k)
    write_csv(os.path.join(args.out, "spectrum.csv"), HEADERS["spectrum"], _spectrum_rows(spec))
    lam2 = spec.eigenvalues[1] if len(spec.eigenvalues) > 1 else np.nan
    return f"spectrum: N={n}, top {len(spec.eigenvalues)} written, lambda_2={lam2:.6g}"


def cmd_predict(args):
    if args.pmax < 1 or args.jmax < 0:
        raise UsageError("--pmax must be >= 1 and --jmax >= 0")
    cmap = _map(args)
    _prepare_out(args)
    orbs = find_periodic_orbits(cmap, args.pmax)
    pred = predicted_spectrum(orbs, args.jmax)
    rows = [(e.period, e.multiplier, e.j, e.branch, e.value.real, e.value.imag,
             abs(e.value), e.kind) for e in pred]
    write_csv(os.path.join(args.out, "predicted.csv"), HEADERS["predicted"], rows)
    return f"predict: {len(pred)} limiting eigenvalues from {len(orbs)} orbits"


def cmd_density(args):
    _require(args, "eps")
    _positive("eps", args.eps)
    cmap, noise = _map(args), _noise(args)
    n = _grid(args, noise)
    _prepare_out(args)
    op = assemble(cmap, noise, args.eps, n)
    rho = invariant_density(op)
    pred = [None] * n
    note = ""
    if args.predicted:
        stable = [o for o in find_periodic_orbits(cmap, args.pmax) if o.is_stable]
        if len(stable) == 1:
            pred = predicted_mode(stable[0], noise, 0, 0, args.eps, op.nodes).values
        else:
            note = f" (prediction skipped: {len(stable)} stable orbits)"
    rows = zip(op.nodes, rho, pred)
    write_csv(os.path.join(args.out, "density.csv"), HEADERS["density"], rows)
    return f"density: N={n}, peak at x={op.nodes[np.argmax(rho)]:.6g}{note}"


def cmd_sweep(args):
    _require(args, "b_lo", "b_hi")
    if not args.b_lo < args.b_hi:
        raise UsageError("--b-lo must be < --b-hi")
    _positive("step", args.step)
    _positive("eps", args.eps)
    if args.pmax < 1 or args.jmax < 0 or args.top_k < 1:
        raise UsageError("--pmax >= 1, --jmax >= 0 and --top-k >= 1 required")
    if args.grid_n is not None and args.grid_n < 64:
        raise UsageError("--grid-n must be >= 64")
    noise = _noise(args)
    _prepare_out(args)
    recs = sweep("sine-circle", noise, (args.b_lo, args.b_hi, args.step), args.pmax,
                 args.jmax, args.eps, base_params={"omega": args.omega},
                 top_k=args.top_k, n_grid=args.grid_n)
    events = detect_lambda_bifurcations(recs)
    rows = [(r.param, r.n_stable, r.n_unstable, r.mod1_count, r.neutral,
             ";".join(fmt(m) for m in r.top_moduli)) for r in recs]
    write_csv(os.path.join(args.out, "sweep.csv"), HEADERS["sweep"], rows)
    write_csv(os.path.join(args.out, "events.csv"), HEADERS["events"],
              [(e.param_lo, e.param_hi, e.count_before, e.count_after) for e in events])
    where = ", ".join(f"[{e.param_lo:g}, {e.param_hi:g}] {e.count_before}->{e.count_after}"
                      for e in events)
    return f"sweep: {len(recs)} points, {len(events)} event(s) {where}".rstrip()


def cmd_simulate(args):
    _require(args, "eps")
    _positive("eps", args.eps)
    burn = args.burn_in if args.burn_in is not None else args.steps // 100
    if not (0 <= burn < args.steps):
        raise UsageError("need --steps > --burn-in >= 0")
    if args.bins < 16:
        raise UsageError("--bins must be >= 16")
    cmap, noise = _map(args), _noise(args)
    _prepare_out(args)
    st = simulate_chain(cmap, noise, args.eps, args.x0, args.steps, burn, args.bins, args.seed)
    rows = zip(st.edges[:-1], st.edges[1:], st.counts, st.density_estimate)
    write_csv(os.path.join(args.out, "histogram.csv"), HEADERS["histogram"], rows)
    return f"simulate: {st.counts.sum()} samples in {st.bins} bins (seed {args.seed})"


def cmd_oracle_ar(args):
    _require(args, "c")
    _positive("sigma", args.sigma)
    if args.top_k < 1 or args.grid_n < 2:
        raise UsageError("--top-k >= 1 and --grid-n >= 2 required")
    L = args.half_width
    if L is None and abs(abs(args.c) - 1.0) > 1e-6:
        L = ar_truncation_bound(args.c, args.sigma)
    _prepare_out(args)
    # a neutral c is rejected inside the builder before L is looked at
    op = build_local_ar_operator(args.c, args.sigma, L or 0.0, args.grid_n)
    spec = spectrum(op, min(args.top_k, args.grid_n))
    write_csv(os.path.join(args.out, "spectrum.csv"), HEADERS["spectrum"], _spectrum_rows(spec))
    return f"oracle-ar: c={args.c:g}, L={op.half_width:g}, top {len(spec.eigenvalues)} written"


COMMANDS = {
    "orbits": cmd_orbits,
    "spectrum": cmd_spectrum,
    "predict": cmd_predict,
    "density": cmd_density,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "oracle-ar": cmd_oracle_ar,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse reports bad flags with status 2; map them to validation errors
        return 0 if exc.code == 0 else 1
    try:
        msg = COMMANDS[args.command](args)
    except (NumericalFailureError, DegeneracyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, CircSpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(msg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
