"""Command-line interface: diagram data generation and file I/O.

Subcommands
-----------
critical-curves   scaled energy-momentum curves of the clusters at infinity
prop5             energy ladder of an escape family against its limit value
minimize          constrained energy minimization at fixed angular momentum
integrate         symplectic integration of a state file to a trajectory CSV
diagram           infinity curves merged with the numerically recovered
                  minimal branch, one CSV for plotting

All numeric CSV output uses 17 significant digits and ends with a metadata
comment block, so identical inputs and seed give byte-identical files.
Masses accept exact fractions ("1/2,1/3,1/6").
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__
from .bivectors import Bivector4
from .dynamics import IntegratorConfig, integrate
from .escape import EscapeParams, escape_sweep
from .kepler import critical_curve_energy, curve_point
from .minimize import MinimizeConfig, minimize_at_momentum, sweep_momentum_ratio
from .phase import Masses, angular_momentum, check_pair, energy, load_state, state_to_dict

PAIRS = ((1, 2), (1, 3), (2, 3))

_SERIES_K_MAX = 0.05


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_masses(text: str) -> Masses:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated masses")
    try:
        values = [float(Fraction(p.strip())) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad mass value: {exc}") from exc
    if any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("masses must be positive")
    return Masses(*values)


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(","))
        return check_pair((i, j))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad pair: {exc}") from exc


def _parse_k_grid(text: str) -> np.ndarray:
    try:
        lo_s, hi_s, n_s = text.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("k-grid must be lo:hi:n") from exc
    if not (0.0 < lo <= hi <= 0.25 and n >= 1):
        raise argparse.ArgumentTypeError("k-grid must satisfy 0 < lo <= hi <= 0.25, n >= 1")
    return np.linspace(lo, hi, n)


def _require_rank4_cli(l1: float, l2: float) -> None:
    if l1 * l2 == 0.0 or l1 < 0 or l2 < 0:
        raise SystemExit(
            "error: rank-4 angular momentum required; both --l1 and --l2 "
            "must be positive (l1*l2 = 0 gives rank < 4)"
        )


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: list[str], rows: list[list[str]], meta: dict) -> None:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    lines += [f"# {key} = {value}" for key, value in meta.items()]
    _atomic_write(path, "\n".join(lines) + "\n")


def _meta(masses: Masses, seed) -> dict:
    return {
        "masses": ",".join(_fmt(m) for m in masses.as_array()),
        "seed": seed if seed is not None else "none",
        "version": __version__,
    }


def _diagram_rows(masses: Masses, chi_steps: int) -> list[tuple]:
    """Infinity-curve and series rows (source, pair-string, k, h, chi)."""
    rows = []
    chis = np.linspace(0.0, 1.0, chi_steps + 2)[1:-1]  # open interval
    for pair in PAIRS:
        tag = f"{pair[0]}-{pair[1]}"
        for chi in chis:
            pt = curve_point(masses, pair, float(chi))
            rows.append(("infinity-curve", tag, pt.k, pt.h, pt.chi))
        for chi in chis:
            k = float(chi * (1.0 - chi))
            if chi <= 0.5 and k <= _SERIES_K_MAX:
                _, series = critical_curve_energy(masses, pair, k)
                rows.append(("series", tag, k, series, float(chi)))
    return rows


def _sorted_row_strings(rows: list[tuple]) -> list[list[str]]:
    rows = sorted(rows, key=lambda r: (r[0], r[1], r[2]))
    return [[r[0], r[1], _fmt(r[2]), _fmt(r[3]), _fmt(r[4])] for r in rows]


def cmd_critical_curves(args) -> int:
    rows = _diagram_rows(args.masses, args.chi_steps)
    _write_csv(
        args.out,
        ["source", "pair", "k", "h", "chi"],
        _sorted_row_strings(rows),
        _meta(args.masses, args.seed),
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_prop5(args) -> int:
    _require_rank4_cli(args.l1, args.l2)
    params = EscapeParams(args.masses, args.pair, args.k_index, args.l1, args.l2)
    betas = args.beta_start * args.beta_factor ** np.arange(args.beta_count)
    result = escape_sweep(params, betas)

    rows = [[_fmt(r.beta), _fmt(r.energy), _fmt(r.gap)] for r in result.records]
    meta = _meta(args.masses, args.seed)
    meta.update(
        {
            "pair": f"{args.pair[0]}-{args.pair[1]}",
            "k_index": args.k_index,
            "l1": _fmt(args.l1),
            "l2": _fmt(args.l2),
            "limit": _fmt(result.limit),
            "limit_estimate": _fmt(result.limit_estimate),
            "beta0": _fmt(result.beta0) if result.beta0 is not None else "none",
            "tail_slope": _fmt(result.tail_slope),
        }
    )
    _write_csv(args.out, ["beta", "H", "gap"], rows, meta)
    print(
        f"limit {result.limit:.12g}, extrapolated {result.limit_estimate:.12g}, "
        f"beta0 {result.beta0}, tail slope {result.tail_slope:.3f}"
    )
    return 0


def cmd_minimize(args) -> int:
    _require_rank4_cli(args.l1, args.l2)
    c = np.zeros(6)
    c[0] = args.l1
    c[5] = args.l2
    target = Bivector4(c)
    config = MinimizeConfig(
        restarts=args.restarts,
        max_outer=args.max_outer,
        constraint_tol=args.constraint_tol,
        rng_seed=args.seed if args.seed is not None else 0,
    )
    result = minimize_at_momentum(args.masses, target, config)
    payload = {
        "H_min": result.H_min,
        "constraint_residual": result.constraint_residual,
        "restarts_agreeing": result.restarts_agreeing,
        "restarts": config.restarts,
        "converged": result.converged,
        "projected_gradient": result.projected_gradient,
        "l1": args.l1,
        "l2": args.l2,
        "seed": config.rng_seed,
        "version": __version__,
        "state": state_to_dict(result.state),
    }
    _atomic_write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(
        f"H_min {result.H_min:.12g}, residual {result.constraint_residual:.3g}, "
        f"{result.restarts_agreeing}/{config.restarts} restarts agree, "
        f"converged={result.converged}"
    )
    return 0


def cmd_integrate(args) -> int:
    state = load_state(args.state, recenter=args.recenter)
    cfg = IntegratorConfig(
        dt=args.dt, t_end=args.t_end, scheme=args.scheme, record_every=args.record_every
    )
    traj = integrate(state, cfg)

    header = ["t"]
    for body in (1, 2, 3):
        header += [f"q{body}{c}" for c in "xyzw"]
    for body in (1, 2, 3):
        header += [f"v{body}{c}" for c in "xyzw"]
    header += ["H", "L12", "L13", "L14", "L23", "L24", "L34"]

    rows = []
    for t, st in zip(traj.times, traj.states):
        row = [_fmt(t)]
        row += [_fmt(v) for v in st.positions.flatten()]
        row += [_fmt(v) for v in st.velocities.flatten()]
        row.append(_fmt(energy(st)))
        row += [_fmt(v) for v in angular_momentum(st).components]
        rows.append(row)

    meta = _meta(state.masses, args.seed)
    meta.update(
        {
            "dt": _fmt(args.dt),
            "t_end": _fmt(args.t_end),
            "scheme": args.scheme,
            "aborted": str(traj.aborted).lower(),
        }
    )
    _write_csv(args.out, header, rows, meta)
    print(
        f"integrated to t={traj.times[-1]:g} ({len(traj.times)} samples), "
        f"max |dH|={np.abs(traj.energy_drift).max():.3g}, "
        f"max |dL|={traj.momentum_drift.max():.3g}"
        + (f", ABORTED: {traj.abort_reason}" if traj.aborted else "")
    )
    return 0


def cmd_diagram(args) -> int:
    rows = _diagram_rows(args.masses, args.chi_steps)
    config = MinimizeConfig(
        restarts=args.restarts,
        rng_seed=args.seed if args.seed is not None else 0,
    )
    for point in sweep_momentum_ratio(args.masses, _parse_k_grid(args.k_grid), config):
        rows.append(("minimal-branch", "", point.k, point.h, point.l1))
    _write_csv(
        args.out,
        ["source", "pair", "k", "h", "chi"],
        _sorted_row_strings(rows),
        _meta(args.masses, args.seed),
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _add_common(p: argparse.ArgumentParser, default_masses="1,1,1") -> None:
    p.add_argument(
        "--masses",
        type=_parse_masses,
        default=_parse_masses(default_masses),
        help="three masses, fractions accepted (default %(default)s)",
    )
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--seed", type=int, default=None, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threebody4d",
        description="numerical toolkit for the three-body problem in R^4 "
        "at fixed rank-4 angular momentum",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical-curves", help="scaled curves of the clusters at infinity")
    _add_common(p)
    p.add_argument("--chi-steps", type=int, default=200, help="points per curve")
    p.set_defaults(func=cmd_critical_curves)

    p = sub.add_parser("prop5", help="escape-family energy ladder vs its limit")
    _add_common(p)
    p.add_argument("--pair", type=_parse_pair, default=(1, 2), help="binary pair i,j")
    p.add_argument("--k-index", type=int, choices=(1, 2), default=1)
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--beta-start", type=float, default=10.0)
    p.add_argument("--beta-factor", type=float, default=2.0)
    p.add_argument("--beta-count", type=int, default=20)
    p.set_defaults(func=cmd_prop5)

    p = sub.add_parser("minimize", help="energy minimum at fixed angular momentum")
    _add_common(p)
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-outer", type=int, default=30)
    p.add_argument("--constraint-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("integrate", help="integrate a state file")
    _add_common(p)
    p.add_argument("--state", required=True, help="input state JSON file")
    p.add_argument("--recenter", action="store_true", help="recenter input if needed")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--scheme", choices=("leapfrog", "fourth-order-composition"),
                   default="leapfrog")
    p.add_argument("--record-every", type=int, default=1)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("diagram", help="infinity curves plus the minimal branch")
    _add_common(p)
    p.add_argument("--chi-steps", type=int, default=200)
    p.add_argument("--k-grid", default="0.005:0.25:10", help="lo:hi:n for the branch")
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=cmd_diagram)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
