"""Command-line harness: bound verification, sweeps, oracle checks and COP-constrained allocation.

Exit codes: 0 pass, 1 bound violation or failed check, 2 usage, 3 I/O, 4 numerical failure.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .exceptions import DomainError, InfeasibleError, IntegratorError, TricycleError
from .optimizer import allocate_tau_h, solve_fixed_cop
from .oracle import perturbation_order_check
from .protocol import build_cycle, validate_cycle
from .thermo import QuadratureSpec, branch_functionals, cycle_metrics

log = logging.getLogger("tricycle")

FORMAT_VERSION = "tricycle-sweep/1"
BOUND_TOL = 1e-10

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

SWEEP_COLUMNS = [
    "tau_c", "tau_p", "tau_h", "alpha", "eps", "eps_r", "R", "dS_en", "Lbar2",
    "lh", "rh", "lh_minus_rh", "L_c", "L_h", "L_p", "Sigma_c", "Sigma_h", "Sigma_p", "status",
]
OPTIMIZE_COLUMNS = ["tau_c", "tau_h", "tau_p", "alpha", "eps_check", "residual", "status"]


class UsageError(Exception):
    pass


def _range5(lo, hi, step):
    return [lo + k * step for k in range(int(round((hi - lo) / step)) + 1)]


@dataclass
class RunConfig:
    """Everything a CLI run needs.  Defaults are the reference parameter set."""

    Tc: float = 2.0
    Tp: float = 2.4
    Th: float = 6.0
    zeta_c: float = 2.0
    zeta_h: float = 2.0
    delta_c: float = None
    hbar: float = 1.0
    kB: float = 1.0
    gamma0: float = 1.0
    alpha: list = field(default_factory=lambda: [0.0, 0.4, 0.8, 1.2])
    tau_c: list = field(default_factory=lambda: _range5(10.0, 40.0, 5.0))
    tau_p: list = field(default_factory=lambda: _range5(10.0, 40.0, 5.0))
    cop_target: float = None
    nodes: int = 801
    refinement: int = 1
    oracle_taus: list = field(default_factory=lambda: [40.0, 80.0, 160.0])
    oracle_steps: int = None
    static_drive: bool = False
    out: str = None
    format: str = "csv"

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def quadrature(self):
        return QuadratureSpec(self.nodes, self.refinement)

    def cycle(self, alpha):
        return build_cycle(
            Tc=self.Tc, Th=self.Th, Tp=self.Tp, zeta_c=self.zeta_c, zeta_h=self.zeta_h,
            delta_c=self.delta_c, alpha=alpha, gamma0=self.gamma0, hbar=self.hbar, kB=self.kB,
            driven=not self.static_drive,
        )

    def validate(self):
        if self.format not in ("csv", "jsonl"):
            raise UsageError(f"unknown format {self.format!r}")
        try:
            cfg = self.cycle(self.alpha[0] if self.alpha else 0.0)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        problems = validate_cycle(cfg)
        if problems:
            raise UsageError("invalid cycle: " + "; ".join(map(str, problems)))


def parse_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def parse_range(text):
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step")
        return _range5(*parts)
    return parse_list(text)


def _threads():
    env = os.environ.get("TRICYCLE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring TRICYCLE_THREADS=%r", env)
    return os.cpu_count() or 1


def _parallel_map(fn, items):
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _prewarm(run, spec):
    for alpha in run.alpha:
        cfg = run.cycle(alpha)
        for b in cfg.branches.values():
            branch_functionals(b, spec)


def _empty_row(**known):
    row = {k: None for k in SWEEP_COLUMNS}
    row.update(known)
    return row


def _metrics_row(cfg, alloc, alpha, spec):
    m = cycle_metrics(cfg.with_durations(alloc.tau_c, alloc.tau_h, alloc.tau_p), spec)
    br = m.branches
    status = "OK" if m.lh_minus_rh >= -BOUND_TOL else "VIOLATION"
    return {
        "tau_c": alloc.tau_c, "tau_p": alloc.tau_p, "tau_h": alloc.tau_h, "alpha": alpha,
        "eps": m.eps, "eps_r": m.eps_r, "R": m.R, "dS_en": m.dS_en, "Lbar2": m.Lbar2,
        "lh": m.lh, "rh": m.rh, "lh_minus_rh": m.lh_minus_rh,
        "L_c": br["c"].length, "L_h": br["h"].length, "L_p": br["p"].length,
        "Sigma_c": br["c"].sigma, "Sigma_h": br["h"].sigma, "Sigma_p": br["p"].sigma,
        "status": status,
    }


def evaluate_grid(run):
    """One row per grid point, ordered by (alpha, tau_c, tau_p) or (alpha, tau_c) in fixed-COP mode."""
    spec = run.quadrature()
    _prewarm(run, spec)
    if run.cop_target is None:
        points = [(a, tc, tp) for a in run.alpha for tc in run.tau_c for tp in run.tau_p]
    else:
        points = [(a, tc, None) for a in run.alpha for tc in run.tau_c]

    def one(point):
        alpha, tc, tp = point
        cfg = run.cycle(alpha)
        try:
            if tp is None:
                alloc = solve_fixed_cop(cfg, tc, run.cop_target, spec)
            else:
                alloc = allocate_tau_h(cfg, tc, tp, spec)
        except (InfeasibleError, DomainError, ZeroDivisionError):
            return _empty_row(tau_c=tc, tau_p=tp, alpha=alpha, status="INFEASIBLE")
        return _metrics_row(cfg, alloc, alpha, spec)

    return _parallel_map(one, points)


def evaluate_optimize(run):
    if run.cop_target is None:
        raise UsageError("optimize needs --cop-target")
    spec = run.quadrature()
    _prewarm(run, spec)
    points = [(a, tc) for a in run.alpha for tc in run.tau_c]

    def one(point):
        alpha, tc = point
        cfg = run.cycle(alpha)
        try:
            alloc = solve_fixed_cop(cfg, tc, run.cop_target, spec)
        except (InfeasibleError, DomainError, ZeroDivisionError):
            return {"tau_c": tc, "tau_h": None, "tau_p": None, "alpha": alpha,
                    "eps_check": None, "residual": None, "status": "INFEASIBLE"}
        m = cycle_metrics(cfg.with_durations(alloc.tau_c, alloc.tau_h, alloc.tau_p), spec)
        return {"tau_c": tc, "tau_h": alloc.tau_h, "tau_p": alloc.tau_p, "alpha": alpha,
                "eps_check": m.eps, "residual": alloc.residual,
                "status": "OK" if alloc.residual_ok else "RESIDUAL"}

    return _parallel_map(one, points)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    x = float(x)
    return x if math.isfinite(x) else None


def write_rows(rows, columns, fmt, stream, comment=None):
    if fmt == "csv":
        if comment:
            stream.write(f"# {comment}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    else:
        for row in rows:
            # repr of a float round-trips, matching the 17-digit CSV values
            stream.write(json.dumps({c: _json_value(row[c]) for c in columns}) + "\n")


def _emit(run, rows, columns, comment):
    buf = io.StringIO()
    write_rows(rows, columns, run.format, buf, comment)
    text = buf.getvalue()
    if run.out:
        with open(run.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid_comment(run):
    mode = "grid" if run.cop_target is None else f"cop-target={run.cop_target!r}"
    return f"{FORMAT_VERSION} mode={mode} root-policy=max-cooling-rate nodes={run.nodes}"


def _require_grid(run):
    if not run.alpha or not run.tau_c or (run.cop_target is None and not run.tau_p):
        raise UsageError("empty grid")


def cmd_verify_bound(run):
    _require_grid(run)
    rows = evaluate_grid(run)
    _emit(run, rows, SWEEP_COLUMNS, _grid_comment(run))
    feasible = [r for r in rows if r["status"] != "INFEASIBLE"]
    bad = [r for r in feasible if r["status"] == "VIOLATION"]
    log.info("%d points, %d feasible, %d violations", len(rows), len(feasible), len(bad))
    return EXIT_FAIL if bad else EXIT_OK


def cmd_sweep(run):
    _require_grid(run)
    _emit(run, evaluate_grid(run), SWEEP_COLUMNS, _grid_comment(run))
    return EXIT_OK


def cmd_optimize(run):
    if not run.alpha or not run.tau_c:
        raise UsageError("empty grid")
    rows = evaluate_optimize(run)
    _emit(run, rows, OPTIMIZE_COLUMNS, f"{FORMAT_VERSION} optimize cop-target={run.cop_target!r}")
    return EXIT_OK


def cmd_oracle_check(run):
    if len(run.oracle_taus) < 3:
        raise UsageError("oracle-check needs a ladder of at least 3 durations")
    alpha = run.alpha[0] if run.alpha else 0.0
    try:
        report = perturbation_order_check(run.cycle(alpha), run.oracle_taus, run.oracle_steps)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    lines = [f"# {FORMAT_VERSION} oracle-check alpha={alpha!r}", "tau,state_error,heat_error"]
    for tau, e, d in zip(report.taus, report.state_errors, report.heat_errors):
        lines.append(f"{_fmt(tau)},{_fmt(e)},{_fmt(d)}")
    if report.exact:
        lines.append("slopes undefined: expansion exact (static drive)")
    else:
        lines.append(f"slope_state={_fmt(report.slope_state)} slope_heat={_fmt(report.slope_heat)} "
                     f"window=[{report.window[0]}, {report.window[1]}]")
    lines.append("PASS" if report.passed else "FAIL")
    text = "\n".join(lines) + "\n"
    if run.out:
        with open(run.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "verify-bound": cmd_verify_bound,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "optimize": cmd_optimize,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="tricycle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--alpha", type=parse_list, metavar="LIST")
        p.add_argument("--tau-c", type=parse_range, metavar="RANGE")
        p.add_argument("--tau-p", type=parse_range, metavar="RANGE")
        p.add_argument("--cop-target", type=float, metavar="X")
        p.add_argument("--nodes", type=int, metavar="N")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=["csv", "jsonl"])
        if name == "oracle-check":
            p.add_argument("--tau-ladder", type=parse_list, metavar="LIST", dest="oracle_taus")
            p.add_argument("--steps", type=int, dest="oracle_steps")
            p.add_argument("--static", action="store_true", default=None, dest="static_drive")
    return parser


def load_run_config(args):
    run = RunConfig.from_json(args.config) if args.config else RunConfig()
    for key in ("alpha", "tau_c", "tau_p", "cop_target", "nodes", "out", "format",
                "oracle_taus", "oracle_steps", "static_drive"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(run, key, value)
    return run


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = load_run_config(args)
        run.validate()
        return COMMANDS[args.command](run)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (json.JSONDecodeError, TypeError) as exc:
        print(f"usage error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (IntegratorError, TricycleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
