"""Command-line interface.

Subcommands map one-to-one onto the library operations; artifacts are JSON
(reports, certificates, summaries) and CSV (trajectories, transforms), all
floats rendered with 17 significant digits so reruns with identical flags
and --seed are byte-identical.

Exit codes: 0 success / stable / valid certificate, 1 numeric failure,
2 unstable spectrum or invalid certificate, 3 inconclusive boundary case,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .dynamics import simulate
from .errors import BoundaryInconclusiveError, CkstabError, ConfigError, UnstableSpectrumError
from .fraccalc import FracOrder, SampledFunction, ck_derivative, katugampola_integral
from .perron import certify
from .specfun import MLParams, mittag_leffler
from .spectral import eigenvalues, sector_check

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_UNSTABLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with fixed float formatting (17 significant digits)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {dumps(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{pad}  {dumps(v, indent + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": float(obj.real), "im": float(obj.imag)}, indent)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return json.dumps(obj)


def trajectory_csv_lines(traj) -> list:
    header = "t," + ",".join(f"x{i+1}" for i in range(traj.dim)) + ",norm"
    lines = [header]
    norms = traj.node_norms()
    real_states = np.real(traj.states)
    for k in range(traj.n_nodes):
        cols = [_fmt_float(traj.t_nodes[k])]
        cols += [_fmt_float(v) for v in real_states[k]]
        cols.append(_fmt_float(norms[k]))
        lines.append(",".join(cols))
    return lines


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _out_dir(args) -> Path | None:
    env = os.environ.get("CKSTAB_OUT")
    chosen = env if env else args.out
    if chosen is None:
        return None
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, name: str, text: str) -> None:
    out = _out_dir(args)
    if out is None:
        print(text)
    else:
        (out / name).write_text(text + "\n")
        print(f"wrote {out / name}")


def _matrix_from_args(args) -> np.ndarray:
    if args.matrix is not None:
        try:
            rows = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--matrix is not valid JSON: {exc}") from exc
        return np.asarray(rows, dtype=float)
    text = Path(args.matrix_csv).read_text().strip().splitlines()
    return np.asarray([[float(v) for v in line.split(",")] for line in text if line.strip()])


def _order_from_args(args) -> FracOrder:
    return FracOrder(alpha=args.alpha, rho=args.rho, t0=args.t0)


def _system_from_args(args) -> cfgmod.SystemConfig:
    name = args.system
    if name in cfgmod.BUILTIN_SYSTEMS:
        cfg = cfgmod.builtin_config(name)
    else:
        cfg = cfgmod.load_config(name)
    overrides = {}
    if getattr(args, "alpha", None) is not None or getattr(args, "rho", None) is not None or getattr(args, "t0", None) is not None:
        overrides["order"] = FracOrder(
            alpha=args.alpha if args.alpha is not None else cfg.order.alpha,
            rho=args.rho if args.rho is not None else cfg.order.rho,
            t0=args.t0 if args.t0 is not None else cfg.order.t0,
        )
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _read_samples_csv(path: str):
    lines = Path(path).read_text().strip().splitlines()
    body = [ln for ln in lines if ln.strip() and not ln.lower().startswith("t,")]
    data = np.asarray([[float(v) for v in ln.split(",")] for ln in body])
    return data[:, 0], data[:, 1]


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_ml(args) -> int:
    value, info = mittag_leffler(MLParams(args.alpha, args.beta), complex(args.re, args.im), full_output=True)
    payload = {
        "alpha": args.alpha,
        "beta": args.beta,
        "z": complex(args.re, args.im),
        "value": value,
        "error_estimate": info.error_estimate,
        "regime": info.regime,
        "terms": info.terms,
    }
    _emit(args, "ml.json", dumps(payload))
    return EXIT_OK


def _fracop(args, derivative: bool) -> int:
    order = _order_from_args(args)
    times, values = _read_samples_csv(args.input)
    f = SampledFunction.from_times(times, values, order)
    if derivative:
        result = ck_derivative(f, order, caputo=(args.type == "caputo"))
    else:
        result = katugampola_integral(f, order, alpha_i=args.order_i)
    lines = ["t,result"]
    for t, v in zip(times, np.real(result.values)):
        lines.append(f"{_fmt_float(t)},{_fmt_float(v)}")
    _emit(args, "fracderiv.csv" if derivative else "fracint.csv", "\n".join(lines))
    return EXIT_OK


def _cmd_eigen(args) -> int:
    eigs = eigenvalues(_matrix_from_args(args))
    _emit(args, "eigen.json", dumps({"eigenvalues": [complex(e) for e in eigs]}))
    return EXIT_OK


def _cmd_check_stability(args) -> int:
    report = sector_check(_matrix_from_args(args), args.alpha)
    _emit(args, "stability.json", dumps(report.to_dict()))
    return {"stable": EXIT_OK, "unstable": EXIT_UNSTABLE, "inconclusive": EXIT_INCONCLUSIVE}[
        report.verdict
    ]


def _cmd_simulate(args) -> int:
    cfg = _system_from_args(args)
    sim = cfg.simulation_or_default()
    horizon = args.horizon if args.horizon is not None else sim.horizon
    steps = args.steps if args.steps is not None else sim.steps
    x0 = np.asarray([float(v) for v in args.x0.split(",")]) if args.x0 else sim.x0
    traj = simulate(cfg.closed_loop(), cfg.nonlinearity, x0, cfg.order, horizon, steps)
    summary = {
        "system": cfg.name,
        "alpha": cfg.order.alpha,
        "rho": cfg.order.rho,
        "t0": cfg.order.t0,
        "horizon": horizon,
        "steps": steps,
        "x0": list(map(float, x0)),
        "sup_norm": traj.sup_norm,
        "final_norm": traj.final_norm,
        "diverged": traj.diverged,
        "cut_index": traj.cut_index,
    }
    out = _out_dir(args)
    csv_text = "\n".join(trajectory_csv_lines(traj))
    if out is None:
        print(csv_text)
        print(dumps(summary), file=sys.stderr)
    else:
        (out / "trajectory.csv").write_text(csv_text + "\n")
        (out / "summary.json").write_text(dumps(summary) + "\n")
        print(f"wrote {out / 'trajectory.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    cfg = _system_from_args(args)
    cert = certify(
        cfg.closed_loop(),
        cfg.nonlinearity,
        cfg.order.alpha,
        cfg.order,
        r=args.radius,
        samples=args.samples,
        seed=args.seed,
    )
    payload = {"system": cfg.name, **cert.to_dict()}
    _emit(args, "certificate.json", dumps(payload))
    return EXIT_OK if cert.valid else EXIT_UNSTABLE


def _cmd_demo_lorenz(args) -> int:
    started = time.perf_counter()
    cfg = cfgmod.builtin_config("lorenz")
    closed = cfg.closed_loop()
    eigs = eigenvalues(closed)
    report = sector_check(closed, cfg.order.alpha)
    print("closed-loop matrix A + B K:")
    for row in closed:
        print("   [" + ", ".join(f"{v:g}" for v in row) + "]")
    print("eigenvalues: " + ", ".join(f"{e.real:.4f}{e.imag:+.4f}j" for e in eigs))
    print(
        f"sector test at alpha={cfg.order.alpha}: min|arg| = "
        f"{min(abs(a) for a in report.args):.6f} > alpha*pi/2 = {report.threshold:.6f} "
        f"-> {report.verdict} (margin {report.margin:.6f})"
    )
    sim = cfg.simulation_or_default()
    traj = simulate(closed, cfg.nonlinearity, sim.x0, cfg.order, sim.horizon, sim.steps)
    norms = traj.node_norms()
    print(
        f"simulated from x0={[float(v) for v in sim.x0]} over t in "
        f"[{cfg.order.t0}, {sim.horizon}] ({sim.steps} steps):"
    )
    print(
        f"  |x(t0)| = {norms[0]:.6g}, sup = {traj.sup_norm:.6g}, "
        f"final |x| = {traj.final_norm:.6g} -> decayed by {norms[0] / traj.final_norm:.3g}x"
    )
    out = _out_dir(args)
    if out is not None:
        (out / "demo-lorenz.json").write_text(
            dumps(
                {
                    "eigenvalues": [complex(e) for e in eigs],
                    "report": report.to_dict(),
                    "sup_norm": traj.sup_norm,
                    "final_norm": traj.final_norm,
                }
            )
            + "\n"
        )
    print(f"({time.perf_counter() - started:.2f} s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="ckstab", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="directory for artifacts (env CKSTAB_OUT overrides)")
    parser.add_argument("--seed", type=int, default=0, help="seed for all sampling")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ml", help="evaluate the two-parameter Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--re", type=float, required=True)
    p.add_argument("--im", type=float, default=0.0)
    p.set_defaults(func=_cmd_ml)

    for name, deriv in (("fracint", False), ("fracderiv", True)):
        p = sub.add_parser(
            name,
            help=(
                "apply the fractional "
                + ("derivative" if deriv else "integral")
                + " to CSV samples (t,value)"
            ),
        )
        p.add_argument("--input", required=True, help="CSV of t,value rows")
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--rho", type=float, default=1.0)
        p.add_argument("--t0", type=float, default=1.0)
        if deriv:
            p.add_argument("--type", choices=("caputo", "katugampola"), default="caputo")
            p.set_defaults(func=lambda a: _fracop(a, True))
        else:
            p.add_argument("--order-i", dest="order_i", type=float, default=None,
                           help="integration order (defaults to --alpha)")
            p.set_defaults(func=lambda a: _fracop(a, False))

    for name, handler, needs_alpha in (
        ("eigen", _cmd_eigen, False),
        ("check-stability", _cmd_check_stability, True),
    ):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} of a matrix")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--matrix", help="inline JSON rows, e.g. '[[0,-1],[1,0]]'")
        group.add_argument("--matrix-csv", help="CSV file with matrix rows")
        if needs_alpha:
            p.add_argument("--alpha", type=float, required=True)
        p.set_defaults(func=handler)

    p = sub.add_parser("simulate", help="simulate a configured system (closed loop)")
    p.add_argument("--system", default="lorenz", help="built-in name or config JSON path")
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--x0", help="comma-separated initial state")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("certify", help="emit a contraction certificate")
    p.add_argument("--system", default="lorenz")
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--samples", type=int, default=4096)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("demo-lorenz", help="reproduce the stabilized Lorenz benchmark")
    p.set_defaults(func=_cmd_demo_lorenz)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BoundaryInconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except UnstableSpectrumError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (CkstabError, ValueError, ArithmeticError) as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
