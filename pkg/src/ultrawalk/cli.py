"""Command-line front end.

Every command writes one table (CSV by default, ``--format json`` for the
JSON mirror) to stdout or ``--output``.  Errors are written to stderr as a
single JSON line ``{"error": {"code": ..., "kind": ..., "message": ...}}``
and mapped to exit codes: 2 validation/domain, 3 resource cap,
4 oracle disagreement under ``--self-check``.

Option precedence, highest first: command-line flag, the command's own
section of ``--config``, its ``[landscape]`` section, its ``[defaults]``
section, built-in default.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import classical_walk as cw
from . import hamiltonian as ham
from . import quantum_walk as qw
from . import reference_graphs as rg
from .errors import DomainError, OracleMismatchError, UltrawalkError, ValidationError
from .tables import DistributionRow, Table, distribution_table, series_table
from .ultrametric import TreeParams, class_members

CAP_ENV = "ULTRAWALK_DENSE_CAP"
COMMANDS = (
    "spectrum",
    "evolve",
    "time-average",
    "limit",
    "mean-distance",
    "classical",
    "decay-fit",
    "graph",
    "compare",
)
LANDSCAPES = ("explicit", "linear", "logarithmic", "exponential")
ORACLE_TOL = 1e-10
SPECTRUM_TOL = 1e-9


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors become validation errors instead of argparse's exit 2 text."""

    def error(self, message):
        raise ValidationError(message)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _window(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"window needs two values lo,hi, got {text!r}")
    return vals[0], vals[1]


def _t_grid(text: str) -> np.ndarray:
    """``start:stop:num`` (linear) or ``log:start:stop:num`` (geometric)."""
    parts = text.split(":")
    geometric = parts[0] == "log"
    if geometric:
        parts = parts[1:]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"t grid must be start:stop:num, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad t grid {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("t grid needs num >= 1")
    if geometric:
        if not 0.0 < a <= b:
            raise argparse.ArgumentTypeError("log grid needs 0 < start <= stop")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _add_io(sp):
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None, help="write here instead of stdout")


def _add_tree(sp):
    sp.add_argument("--p", type=int, default=None, help="branching (prime)")
    sp.add_argument("--M", type=int, default=None, help="depth")


def _add_couplings(sp):
    sp.add_argument("--eps", type=_float_list, default=None, help="eps_1,...,eps_M (explicit landscape)")
    sp.add_argument("--eps0", type=float, default=None, help="diagonal override (default: row sums zero)")
    sp.add_argument("--landscape", choices=LANDSCAPES, default=None)
    sp.add_argument("--w0", type=float, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--ref-level", type=int, default=None, help="landscape reference level (default M)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ultrawalk", description="Quantum and classical walks on p-adic ball hierarchies.")
    parser.add_argument("--config", default=None, help="INI file supplying option defaults")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("spectrum", help="distinct eigenvalues and multiplicities")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--self-check", action="store_true", help="compare with dense diagonalisation")
    _add_io(sp)

    sp = sub.add_parser("evolve", help="quantum class profile at t, or series over a t grid")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--t-grid", type=_t_grid, default=None, help="start:stop:num or log:start:stop:num")
    sp.add_argument("--self-check", action="store_true", help="compare with dense exp(itH)")
    _add_io(sp)

    sp = sub.add_parser("time-average", help="long-time class profile (exact rationals)")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--numeric", action="store_true", help="also integrate numerically over [0, T]")
    sp.add_argument("--T", type=float, default=None)
    sp.add_argument("--steps", type=int, default=None)
    _add_io(sp)

    sp = sub.add_parser("limit", help="infinite-depth time averages and finite-depth gaps")
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--K", type=int, default=None, help="largest class index listed")
    sp.add_argument("--M", type=_int_list, default=None, help="depths for gap rows, e.g. 1,2,10")
    _add_io(sp)

    sp = sub.add_parser("mean-distance", help="time-averaged mean distance from the origin")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--t", type=float, default=None, help="instantaneous value at t (needs couplings)")
    sp.add_argument("--t-grid", type=_t_grid, default=None)
    _add_io(sp)

    sp = sub.add_parser("classical", help="classical class distribution at t, or series")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--t-grid", type=_t_grid, default=None)
    sp.add_argument("--self-check", action="store_true", help="compare with dense exp(tQ)")
    _add_io(sp)

    sp = sub.add_parser("decay-fit", help="fit decay laws to the classical return probability")
    _add_tree(sp)
    _add_couplings(sp)
    sp.add_argument("--window", type=_window, default=None, help="t_min,t_max")
    sp.add_argument("--model", choices=cw.MODELS + ("all",), default="all")
    sp.add_argument("--points", type=int, default=200)
    _add_io(sp)

    sp = sub.add_parser("graph", help="reference graph probabilities or time averages")
    sp.add_argument("--family", choices=rg.FAMILIES, default=None)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--time-average", action="store_true")
    sp.add_argument("--T", type=float, default=None, help="averaging time (line, numeric)")
    sp.add_argument("--nmax", type=int, default=None, help="largest line site listed")
    sp.add_argument("--numeric", action="store_true", help="cycle: add the quadrature average over [0, T]")
    _add_io(sp)

    sp = sub.add_parser("compare", help="largest time-averaged probability per family")
    sp.add_argument("--N", type=int, default=100, help="cycle and complete graph size")
    sp.add_argument("--hypercube-N", type=int, default=800)
    sp.add_argument("--T", type=float, default=1000.0, help="line averaging time")
    sp.add_argument("--nmax", type=int, default=40)
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--M", type=_int_list, default="1,2,3,4,5,6,7,8,9,10")
    _add_io(sp)
    return parser


def _subparsers(parser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def _apply_config(parser, path: str, command: str) -> None:
    cfg = configparser.ConfigParser()
    cfg.optionxform = lambda s: s.replace("-", "_")
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc.strerror}")
    except configparser.Error as exc:
        raise ValidationError(f"malformed config {path!r}: {exc}".replace("\n", " "))
    sp = _subparsers(parser).get(command)
    if sp is None:
        return
    dests = {a.dest for a in sp._actions}
    merged = {}
    for section in ("defaults", "landscape", command):
        if not cfg.has_section(section):
            continue
        for key, val in cfg.items(section):
            if section == "landscape" and key == "kind":
                key = "landscape"
            if key not in dests:
                if section == command:
                    raise ValidationError(f"config [{section}]: unknown option {key!r}")
                continue
            merged[key] = val
    for key, val in merged.items():
        act = next(a for a in sp._actions if a.dest == key)
        if isinstance(act, argparse._StoreTrueAction):
            merged[key] = cfg.BOOLEAN_STATES.get(val.lower())
            if merged[key] is None:
                raise ValidationError(f"config option {key!r}: not a boolean: {val!r}")
    # string defaults are converted by argparse with the option's type
    sp.set_defaults(**merged)


def _peek_command(argv: list[str]) -> tuple[str | None, str | None]:
    config = None
    command = None
    it = iter(range(len(argv)))
    for i in it:
        a = argv[i]
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
            next(it, None)
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
        elif a in COMMANDS and command is None:
            command = a
    return config, command


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    config, command = _peek_command(argv)
    if config and command:
        _apply_config(parser, config, command)
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# parameter resolution
# ---------------------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValidationError(f"{args.command}: missing required option(s) {flags}")


def _tree(args) -> TreeParams:
    _require(args, "p", "M")
    return TreeParams(args.p, args.M)


def _has_couplings(args) -> bool:
    return args.eps is not None or args.landscape is not None


def _landscape(args):
    kind = args.landscape or "explicit"
    if kind == "explicit":
        if args.eps is None:
            raise ValidationError(f"{args.command}: give --eps or --landscape")
        return ham.Explicit(tuple(args.eps))
    if args.eps is not None:
        raise ValidationError(f"--eps conflicts with --landscape {kind}")
    _require(args, "w0", "alpha")
    cls = {"linear": ham.Linear, "logarithmic": ham.Logarithmic, "exponential": ham.Exponential}[kind]
    return cls(args.w0, args.alpha, args.ref_level)


def _walk(args) -> qw.WalkParams:
    tp = _tree(args)
    wp = qw.WalkParams.from_landscape(_landscape(args), tp)
    if args.eps0 is not None:
        wp = qw.WalkParams(tp, wp.es.with_eps0(args.eps0))
    return wp


def _times(args):
    if args.t is not None and args.t_grid is not None:
        raise ValidationError("--t and --t-grid are mutually exclusive")
    if args.t is None and args.t_grid is None:
        raise ValidationError(f"{args.command}: give --t or --t-grid")
    return args.t_grid


def _meta(**kw) -> dict:
    return {k: v for k, v in kw.items() if v is not None}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _class_rows(entity: str, tp: TreeParams, values) -> list[DistributionRow]:
    return [
        DistributionRow(entity, k, tp.class_size(k), class_members(k, tp)[0], values[k])
        for k in range(tp.M + 1)
    ]


def cmd_spectrum(args) -> Table:
    wp = _walk(args)
    spec = wp.spectrum
    rows = [
        DistributionRow("eta", m, int(mult), None, float(eta))
        for m, (eta, mult) in enumerate(zip(spec.etas, spec.mults))
    ]
    if args.self_check:
        numeric = ham.spectrum_numeric(ham.build_hamiltonian(wp.es, wp.tp))
        closed = np.sort(spec.expanded())
        scale = max(1.0, float(np.max(np.abs(closed))))
        err = float(np.max(np.abs(np.sort(numeric) - closed)))
        if err > SPECTRUM_TOL * scale:
            raise OracleMismatchError(f"spectrum differs from dense diagonalisation by {err:.3e}")
    return distribution_table(rows, "spectrum", _meta(p=wp.p, M=wp.M, eps0=wp.es.eps0))


def _check_quantum_oracle(wp, ts) -> None:
    worst = 0.0
    for t in np.atleast_1d(ts):
        closed = qw.amplitude(wp, float(t)).expand()
        dense = qw.evolve_oracle(wp, float(t))
        worst = max(worst, float(np.max(np.abs(closed - dense))))
    if worst > ORACLE_TOL:
        raise OracleMismatchError(f"closed-form amplitude differs from dense exp(itH) by {worst:.3e}")


def cmd_evolve(args) -> Table:
    wp = _walk(args)
    grid = _times(args)
    meta = _meta(p=wp.p, M=wp.M)
    if grid is None:
        if args.self_check:
            _check_quantum_oracle(wp, [args.t])
        prof = qw.probabilities(wp, args.t)
        meta["t"] = args.t
        return distribution_table(_class_rows("probability", wp.tp, prof.values), "evolve", meta)
    if args.self_check:
        _check_quantum_oracle(wp, grid)
    P = np.abs(qw.amplitude_grid(wp, grid)) ** 2
    series = {f"P_V{k}": (grid, P[:, k]) for k in range(wp.M + 1)}
    return series_table(series, "evolve", meta)


def cmd_time_average(args) -> Table:
    tp = _tree(args)
    exact = qw.time_averaged_exact(tp.p, tp.M)
    rows = _class_rows("time_average", tp, exact)
    meta = _meta(p=tp.p, M=tp.M)
    if args.numeric:
        _require(args, "T")
        wp = _walk(args)
        num = qw.time_averaged_numeric(wp, args.T, args.steps)
        rows += _class_rows("time_average_numeric", tp, [float(v) for v in num.values])
        meta["T"] = args.T
    return distribution_table(rows, "time-average", meta)


def cmd_limit(args) -> Table:
    _require(args, "p", "K")
    if args.K < 0:
        raise ValidationError(f"--K must be >= 0, got {args.K}")
    p = args.p
    TreeParams(p, 1)  # validates p
    rows = [DistributionRow("limit", k, None, None, qw.time_averaged_limit(p, k)) for k in range(args.K + 1)]
    for M in args.M or []:
        tp = TreeParams(p, M)
        finite = qw.time_averaged_exact(p, M)
        for k in range(min(M, args.K) + 1):
            gap = finite[k] - qw.time_averaged_limit(p, k)
            rows.append(DistributionRow(f"gap_M{M}", k, tp.class_size(k), None, gap))
        rows.append(DistributionRow(f"gap_closed_M{M}", None, None, None, qw.limit_gap(p, M)))
    return distribution_table(rows, "limit", _meta(p=p, K=args.K))


def cmd_mean_distance(args) -> Table:
    tp = _tree(args)
    p, M = tp.p, tp.M
    meta = _meta(p=p, M=M)
    if args.t is not None or args.t_grid is not None:
        wp = _walk(args)
        grid = _times(args)
        if grid is None:
            row = DistributionRow("mean_distance_t", None, None, None, qw.mean_distance(wp, args.t))
            meta["t"] = args.t
            return distribution_table([row], "mean-distance", meta)
        ys = [qw.mean_distance(wp, float(t)) for t in grid]
        return series_table({"mean_distance": (grid, ys)}, "mean-distance", meta)
    closed = qw.mean_distance_closed(p, M)
    rows = [
        DistributionRow("mean_distance_closed", None, None, None, closed),
        DistributionRow("mean_distance_weighted", None, None, None, qw.mean_distance_weighted(p, M)),
        DistributionRow("scaled_mean_distance", None, None, None, closed * p**M / M),
        DistributionRow("scaled_limit", None, None, None, qw.scaled_mean_distance_limit(p)),
    ]
    return distribution_table(rows, "mean-distance", meta)


def _check_classical_oracle(wp, ts) -> None:
    worst = 0.0
    for t in np.atleast_1d(ts):
        closed = cw.classical_distribution(wp, float(t)).expand()
        dense = cw.classical_oracle(wp, float(t))
        worst = max(worst, float(np.max(np.abs(closed - dense))))
    if worst > ORACLE_TOL:
        raise OracleMismatchError(f"spectral classical distribution differs from dense exp(tQ) by {worst:.3e}")


def cmd_classical(args) -> Table:
    wp = _walk(args)
    grid = _times(args)
    meta = _meta(p=wp.p, M=wp.M)
    if args.self_check:
        _check_classical_oracle(wp, [args.t] if grid is None else grid)
    if grid is None:
        prof = cw.classical_distribution(wp, args.t)
        meta["t"] = args.t
        return distribution_table(_class_rows("probability", wp.tp, prof.values), "classical", meta)
    P = cw.classical_grid(wp, grid)
    series = {f"P_V{k}": (grid, P[:, k]) for k in range(wp.M + 1)}
    series["excess_return"] = (grid, np.atleast_1d(cw.excess_return(wp, grid)))
    return series_table(series, "classical", meta)


DECAY_COLUMNS = ("model", "slope", "intercept", "residual", "t_min", "t_max")


def cmd_decay_fit(args) -> Table:
    tp = _tree(args)
    _require(args, "window")
    ls = _landscape(args)
    models = cw.MODELS if args.model == "all" else (args.model,)
    records = []
    for model in models:
        res = cw.fit_decay(ls, tp, args.window, model, n_points=args.points)
        d = res.to_dict()
        d["t_min"], d["t_max"] = d.pop("window")
        records.append(d)
    return Table(DECAY_COLUMNS, records, "decay-fit", _meta(p=tp.p, M=tp.M, landscape=args.landscape))


def _graph_time_average(args) -> list[DistributionRow]:
    fam, N = args.family, args.N
    if fam == "hypercube":
        sites, shells = rg.hypercube_time_averaged(N)
        rows = [DistributionRow("site_average", k, math.comb(N, k), (1 << k) - 1, v) for k, v in enumerate(sites)]
        rows += [DistributionRow("shell_average", k, math.comb(N, k), (1 << k) - 1, v) for k, v in enumerate(shells)]
        return rows
    if fam == "complete":
        origin, other = rg.complete_time_averaged(N)
        return [DistributionRow("site_average", 0, 1, 0, origin), DistributionRow("site_average", 1, N - 1, 1, other)]
    if fam == "cycle":
        rows = [DistributionRow("site_average", n, 1, n, v) for n, v in enumerate(rg.cycle_time_averaged(N))]
        if args.numeric:
            _require(args, "T")
            num = rg.graph_time_average_numeric(rg.cycle_adjacency(N), args.T)
            rows += [DistributionRow("site_average_numeric", n, 1, n, float(v)) for n, v in enumerate(num)]
        return rows
    _require(args, "T")
    nmax = 40 if args.nmax is None else args.nmax
    avg = rg.line_time_averages(nmax, args.T)
    return [DistributionRow("site_average", n, 1 if n == 0 else 2, n, float(v)) for n, v in enumerate(avg)]


def _graph_at_time(args) -> list[DistributionRow]:
    fam, N, t = args.family, args.N, args.t
    if fam == "hypercube":
        return [
            DistributionRow("probability", k, math.comb(N, k), (1 << k) - 1, float(rg.hypercube_probability(k, N, t)))
            for k in range(N + 1)
        ]
    if fam == "complete":
        return [
            DistributionRow("probability", 0, 1, 0, float(rg.complete_probability(True, N, t))),
            DistributionRow("probability", 1, N - 1, 1, float(rg.complete_probability(False, N, t))),
        ]
    if fam == "cycle":
        return [DistributionRow("probability", n, 1, n, float(v)) for n, v in enumerate(rg.cycle_probabilities(N, t))]
    nmax = 40 if args.nmax is None else args.nmax
    if t < 0:
        raise DomainError("line probabilities are tabulated for t >= 0")
    # the norm row sums far enough past t that the omitted orders are negligible
    J = rg.bessel_j_orders(max(nmax, int(t) + 60), t)[0]
    rows = [DistributionRow("probability", n, 1 if n == 0 else 2, n, float(J[n] ** 2)) for n in range(nmax + 1)]
    rows.append(DistributionRow("bessel_norm", None, None, None, float(J[0] ** 2 + 2.0 * np.sum(J[1:] ** 2))))
    return rows


def cmd_graph(args) -> Table:
    _require(args, "family")
    rg.GraphSpec(args.family, args.N)
    if args.time_average == (args.t is not None):
        raise ValidationError("graph: give exactly one of --t and --time-average")
    rows = _graph_time_average(args) if args.time_average else _graph_at_time(args)
    return distribution_table(rows, "graph", _meta(family=args.family, N=args.N, t=args.t, T=args.T))


def cmd_compare(args) -> Table:
    rows = [
        DistributionRow("cycle_max", None, None, None, max(rg.cycle_time_averaged(args.N))),
        DistributionRow("hypercube_max", None, None, None, max(rg.hypercube_time_averaged(args.hypercube_N)[0])),
        DistributionRow("line_max", None, None, None, rg.max_time_averaged(rg.GraphSpec("line"), args.T, args.nmax)),
        DistributionRow("complete_origin", None, None, None, rg.complete_time_averaged(args.N)[0]),
    ]
    p = args.p
    TreeParams(p, 1)
    rows.append(DistributionRow("ultrametric_bound", None, None, None, Fraction(p - 1, p + 1)))
    for M in args.M:
        tp = TreeParams(p, M)
        rows.append(DistributionRow(f"ultrametric_M{M}", 0, 1, 0, qw.time_averaged_exact(tp.p, tp.M)[0]))
    meta = _meta(N=args.N, hypercube_N=args.hypercube_N, T=args.T, p=p)
    return distribution_table(rows, "compare", meta)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "time-average": cmd_time_average,
    "limit": cmd_limit,
    "mean-distance": cmd_mean_distance,
    "classical": cmd_classical,
    "decay-fit": cmd_decay_fit,
    "graph": cmd_graph,
    "compare": cmd_compare,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _read_cap_env() -> None:
    raw = os.environ.get(CAP_ENV)
    if raw is None or raw == "":
        return
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"{CAP_ENV} must be an integer, got {raw!r}")
    ham.set_dense_cap(cap)


def _emit_error(exc: UltrawalkError) -> int:
    msg = " ".join(str(exc).split())
    line = json.dumps({"error": {"code": exc.exit_code, "kind": exc.kind, "message": msg}})
    sys.stderr.write(line + "\n")
    return exc.exit_code


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _read_cap_env()
        args = parse_args(argv)
        table = HANDLERS[args.command](args)
        text = table.render(args.format)
    except UltrawalkError as exc:
        return _emit_error(exc)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
