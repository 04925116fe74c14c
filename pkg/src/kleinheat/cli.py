"""Command-line front end.

Every subcommand accepts ``--config FILE`` (TOML).  Top-level keys and keys in
a table named after the subcommand become defaults; flags given on the command
line win.  Exit codes: 0 success, 1 a checked property failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiments import (
    SCHEMA_VERSION,
    exponent_sweep,
    main_theorem_table,
    rows_to_csv,
    sandwich_suite,
    to_json,
)
from . import __version__
from .heat import IncompleteOrbitError, heat_kernel_h3, heat_kernel_quotient
from .hyperbolic import Point, hyperbolic_distance, origin
from .orbits import (
    DEFAULT_FRONTIER_CAP,
    GroupFileError,
    OrbitEnumerationError,
    bundled_group,
    bundled_group_names,
    enumerate_orbit,
    load_group,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_grid(text) -> list[float]:
    """``"1,2,5"`` or ``"start:stop:step"`` (inclusive) or a list; must be increasing."""
    if isinstance(text, (int, float)):
        vals = [float(text)]
    elif isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        vals = []
        for part in str(text).split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                bits = [float(b) for b in part.split(":")]
                if len(bits) != 3 or bits[2] <= 0:
                    raise UsageError(f"bad range {part!r}; use start:stop:step")
                n = int(math.floor((bits[1] - bits[0]) / bits[2] + 1e-9)) + 1
                vals.extend(bits[0] + k * bits[2] for k in range(n))
            else:
                vals.append(float(part))
    if not vals:
        raise UsageError("empty grid")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError(f"grid must be increasing: {vals}")
    return vals


def parse_point(text, d: int) -> Point:
    if text is None:
        return origin(d)
    vals = text if isinstance(text, (list, tuple)) else [float(v) for v in str(text).split(",")]
    if len(vals) != d:
        raise UsageError(f"point {text!r} must have {d} coordinates")
    try:
        return Point(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def resolve_group(name):
    if name is None:
        raise UsageError("--group is required")
    if os.path.exists(name):
        return load_group(name)
    if name in bundled_group_names():
        return bundled_group(name)
    raise UsageError(
        f"unknown group {name!r}: not a file and not one of {', '.join(bundled_group_names())}"
    )


def _grid_arg(s):
    try:
        return parse_grid(s)
    except (UsageError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, args):
        self.path = args.out
        fmt = args.format
        if fmt is None:
            suffix = Path(self.path).suffix.lower() if self.path else ""
            fmt = {".json": "json", ".csv": "csv"}.get(suffix, "text")
        self.format = fmt

    def emit(self, text: str):
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else str(v) for v in r))
    return "\n".join(lines) + "\n"


def _report(out: Output, command, header, rows, extra=None, params=None):
    if out.format == "json":
        body = [dict(zip(header, r)) for r in rows]
        out.emit(to_json({"rows": body, **(extra or {})}, command=command, parameters=params or {}))
    elif out.format == "csv":
        out.emit(_csv(header, rows))
    else:
        text = _table(header, rows)
        for k, v in (extra or {}).items():
            text += f"{k}: {_fmt(v)}\n"
        out.emit(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_count(args, out):
    G = resolve_group(args.group)
    x = parse_point(args.x, G.dimension)
    y = parse_point(args.y, G.dimension)
    rhos = args.rho
    ball = enumerate_orbit(G, x, y, rhos[-1], frontier_cap=args.frontier_cap)
    rows = [(r, ball.within(r), ball.complete) for r in rhos]
    _report(out, "count", ("rho", "N", "complete"), rows, params=_params(args))
    return EXIT_OK


def cmd_heat(args, out):
    rows = []
    if args.group is None:
        x = parse_point(args.x, 3)
        y = parse_point(args.y, 3)
        rho = hyperbolic_distance(x, y)
        for t in args.t:
            rows.append((t, float(heat_kernel_h3(rho, t)), 0.0, True))
    else:
        G = resolve_group(args.group)
        x = parse_point(args.x, G.dimension)
        y = parse_point(args.y, G.dimension)
        for t in args.t:
            hv = heat_kernel_quotient(G, x, y, t, args.eps, require_complete=not args.allow_incomplete)
            rows.append((t, hv.value, hv.tail_bound, math.isfinite(hv.tail_bound)))
    _report(out, "heat", ("t", "p", "tail_bound", "certified"), rows, params=_params(args))
    return EXIT_OK


def cmd_nu(args, out):
    from .selberg import nu_direct, nu_ode, nu_theta

    rows = []
    worst = 0.0
    for lam in args.lam:
        for rho in args.rho:
            a = nu_direct(args.dim, lam, rho).nu
            b = nu_theta(args.dim, lam, rho).nu
            c = nu_ode(args.dim, lam, rho).nu
            spread = max(abs(a - b), abs(a - c), abs(b - c)) / max(abs(a), 1e-300)
            worst = max(worst, spread)
            rows.append((lam, rho, a, b, c, spread))
    ok = worst < args.tolerance
    _report(
        out,
        "nu",
        ("lambda", "rho", "nu_direct", "nu_theta", "nu_ode", "rel_spread"),
        rows,
        {"max_rel_spread": worst, "routes_agree": ok},
        _params(args),
    )
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify_delsarte(args, out):
    from .delsarte import delsarte_ball_check, spherical_mean_check

    x = parse_point(args.x, args.dim)
    rows = []
    fails = 0
    for lam in args.lam:
        for rho in args.rho:
            fn = spherical_mean_check if args.sphere else delsarte_ball_check
            r = fn(args.dim, lam, x, rho, args.samples, args.seed, threads=args.threads)
            fails += not r.passes(args.threshold)
            rows.append((lam, rho, r.mean.real, r.mean.imag, r.target.real, r.target.imag, r.z_real, r.z_imag))
    _report(
        out,
        "verify-delsarte",
        ("lambda", "rho", "mean_re", "mean_im", "target_re", "target_im", "z_re", "z_im"),
        rows,
        {"failures": fails},
        _params(args),
    )
    return EXIT_OK if fails == 0 else EXIT_CHECK


def cmd_verify_spectral(args, out):
    from .selberg import spectral_bound_report

    rep = spectral_bound_report(args.dim, args.beta, args.rho, args.resolution, C4=args.c4)
    rows = list(zip(rep.rhos, rep.item1, rep.envelope, rep.item2))
    ok = rep.item1_decreasing and rep.item1_under_envelope and rep.item2_spread <= 2
    _report(
        out,
        "verify-spectral",
        ("rho", "item1_sup", "envelope", "item2_sup"),
        rows,
        {
            "item1_decreasing": rep.item1_decreasing,
            "item1_under_envelope": rep.item1_under_envelope,
            "item2_spread": rep.item2_spread,
            "ok": ok,
        },
        _params(args),
    )
    return EXIT_OK if ok else EXIT_CHECK


def cmd_sandwich(args, out):
    G = resolve_group(args.group)
    x = parse_point(args.x, G.dimension)
    y = parse_point(args.y, G.dimension)
    rep = sandwich_suite(
        G, x, y, args.delta, args.rho, n_configs=args.configs, seed=args.seed
    )
    rows = [(a["rho"], a["delta"], a["lower"], a["N"], a["upper"], a["ok"]) for a in rep.averaged]
    _report(
        out,
        "sandwich",
        ("rho", "delta", "avg_lower", "N", "avg_upper", "ok"),
        rows,
        {"configs": rep.configs, "violations": len(rep.violations), "complete": rep.complete},
        _params(args),
    )
    return EXIT_OK if rep.ok else EXIT_CHECK


def cmd_experiment(args, out):
    G = resolve_group(args.group)
    x = parse_point(args.x, G.dimension)
    rows = main_theorem_table(G, x, args.rho, args.eps, alpha=args.alpha)
    if out.format == "csv":
        out.emit(rows_to_csv(rows))
    elif out.format == "json":
        out.emit(to_json(rows, command="experiment", parameters=_params(args)))
    else:
        _report(
            out,
            "experiment",
            ("rho", "N", "p", "p_tail", "V", "ratio", "complete"),
            [(r.rho, r.count_N, r.heat_p, r.heat_tail, r.volume_V, r.ratio, r.complete) for r in rows],
            {"note": rows[0].flags["note"] if rows else ""},
        )
    return EXIT_OK


def cmd_exponent(args, out):
    G = resolve_group(args.group)
    x = parse_point(args.x, G.dimension)
    rep = exponent_sweep(G, x, args.rho)
    _report(
        out,
        "exponent",
        ("rho", "N"),
        list(zip(rep.rhos, rep.counts)),
        {
            "estimate": rep.estimate,
            "window_estimates": rep.window_estimates,
            "window_spread": rep.spread,
            "complete": rep.complete,
        },
        _params(args),
    )
    return EXIT_OK


def _params(args) -> dict:
    skip = {"func", "command", "config", "out", "format", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# parser


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults, except ``None`` ones."""

    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default values")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument(
        "--format", choices=("text", "json", "csv"),
        help="output format; inferred from the --out suffix, else text",
    )
    common.add_argument(
        "--threads", type=int, default=os.cpu_count() or 1,
        help="worker threads for Monte Carlo batches",
    )
    common.add_argument("--seed", type=int, default=0, help="random seed")

    p = argparse.ArgumentParser(
        prog="kleinheat",
        description="Orbit counting, heat kernels and Selberg transforms on hyperbolic space.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} (output schema {SCHEMA_VERSION})")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(
            name, parents=[common], help=help_, description=help_,
            formatter_class=_HelpFormatter,
        )
        sp.set_defaults(func=func)
        return sp

    def group_args(sp, need_y=True):
        sp.add_argument("--group", help=f"group file or bundled name ({', '.join(bundled_group_names())})")
        sp.add_argument("--x", help="basepoint x as comma-separated coordinates; default the origin")
        if need_y:
            sp.add_argument("--y", help="basepoint y; default the origin")

    sp = add("count", cmd_count, "count orbit points N(x, y, rho)")
    group_args(sp)
    sp.add_argument("--rho", type=_grid_arg, default=[5.0], help="radius or grid")
    sp.add_argument("--frontier-cap", type=int, default=DEFAULT_FRONTIER_CAP, help="stop with exit 2 once the walk frontier exceeds this")

    sp = add("heat", cmd_heat, "heat kernel of H^3, or of a quotient when --group is given")
    group_args(sp)
    sp.add_argument("--t", type=_grid_arg, default=[1.0], help="time or grid")
    sp.add_argument("--eps", type=float, default=1e-12, help="tail tolerance")
    sp.add_argument("--allow-incomplete", action="store_true", help="accept uncertified orbit walks")

    sp = add("nu", cmd_nu, "Selberg transform nu_rho(lambda) by three routes")
    sp.add_argument("--dim", type=int, default=3, choices=(2, 3), help="dimension of H^d")
    sp.add_argument("--lambda", dest="lam", type=_grid_arg, default=[0.0], help="eigenvalue or grid")
    sp.add_argument("--rho", type=_grid_arg, default=[2.0], help="radius or grid")
    sp.add_argument("--tolerance", type=float, default=1e-6, help="allowed relative spread between routes")

    sp = add("verify-delsarte", cmd_verify_delsarte, "Monte Carlo check of the ball (or sphere) mean of y^s")
    sp.add_argument("--dim", type=int, default=3, choices=(2, 3), help="dimension of H^d")
    sp.add_argument("--lambda", dest="lam", type=_grid_arg, default=[1.0], help="eigenvalue or grid")
    sp.add_argument("--rho", type=_grid_arg, default=[1.0], help="radius or grid")
    sp.add_argument("--x", help="centre; default the origin")
    sp.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples per configuration")
    sp.add_argument("--threshold", type=float, default=4.0, help="maximal |z|")
    sp.add_argument("--sphere", action="store_true", help="check sphere means instead of ball means")

    sp = add("verify-spectral", cmd_verify_spectral, "small- and large-eigenvalue bounds on nu_rho")
    sp.add_argument("--dim", type=int, default=3, choices=(2, 3), help="dimension of H^d")
    sp.add_argument("--beta", type=float, default=4.0, help="decay exponent beta")
    sp.add_argument("--rho", type=_grid_arg, default=[50.0, 100.0, 200.0], help="radius grid")
    sp.add_argument("--resolution", type=int, default=200, help="lambda samples per regime")
    sp.add_argument("--c4", type=float, default=3.0, help="envelope constant")

    sp = add("sandwich", cmd_sandwich, "orbit-count sandwich inequalities")
    group_args(sp)
    sp.add_argument("--delta", type=_grid_arg, default=[0.1, 0.3, 0.7], help="radius of the ball the second point is drawn from, or grid")
    sp.add_argument("--rho", type=_grid_arg, default=[1.5, 3.0, 4.5], help="radius or grid")
    sp.add_argument("--configs", type=int, default=1000, help="number of random configurations")

    sp = add("experiment", cmd_experiment, "table of N / (p V) against rho")
    group_args(sp, need_y=False)
    sp.add_argument("--rho", type=_grid_arg, default=parse_grid("1:12:1"), help="radius grid")
    sp.add_argument("--eps", type=float, default=1e-12, help="heat-kernel tail tolerance")
    sp.add_argument("--alpha", type=float, default=None, help="assumed heat-kernel decay exponent (recorded only)")

    sp = add("exponent", cmd_exponent, "growth-rate estimate of N(x, x, rho)")
    group_args(sp, need_y=False)
    sp.add_argument("--rho", type=_grid_arg, default=parse_grid("4:14:0.5"), help="radius grid")
    return p


def _config_defaults(parser, argv) -> None:
    """Load ``--config`` and install its values as subparser defaults."""
    if "--config" not in " ".join(argv):
        return
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        data = tomllib.loads(Path(known.config).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in sub.choices), None)
    values = {k: v for k, v in data.items() if not isinstance(v, dict)}
    if command and isinstance(data.get(command), dict):
        values.update(data[command])
    sp = sub.choices.get(command)
    if sp is None:
        return
    dests = {a.dest: a for a in sp._actions}
    aliases = {"lambda": "lam", "frontier-cap": "frontier_cap", "allow-incomplete": "allow_incomplete"}
    clean = {}
    for key, val in values.items():
        dest = aliases.get(key, key.replace("-", "_"))
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for command {command!r}")
        action = dests[dest]
        if action.type is _grid_arg:
            val = parse_grid(val)
        clean[dest] = val
    sp.set_defaults(**clean)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
        args = parser.parse_args(argv)
        out = Output(args)
        return args.func(args, out)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, GroupFileError, json.JSONDecodeError) as exc:
        print(f"kleinheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IncompleteOrbitError as exc:
        print(f"kleinheat: error: {exc} (use --allow-incomplete for a lower bound)", file=sys.stderr)
        return EXIT_USAGE
    except (OrbitEnumerationError, ValueError) as exc:
        print(f"kleinheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
