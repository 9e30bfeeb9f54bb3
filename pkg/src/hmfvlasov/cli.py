"""Command-line entry point: ``hmfvlasov <command> --config job.yaml``.

Exit codes: 0 success, 1 configuration error, 2 conservation abort,
3 check failure.
"""

import argparse
import logging
import os
import re
import sys

from . import config as cfgmod
from .checks import run_battery
from .exceptions import ConfigError, ConservationError, DomainError
from .neighborhood import SWEEP_COLUMNS, inhomogeneous_robustness, scan_phase_diagram, write_csv
from .stability import build_initial_condition, stability_functional
from .vlasov import run

EXIT_OK, EXIT_CONFIG, EXIT_CONSERVATION, EXIT_CHECK = 0, 1, 2, 3
STABILITY_COLUMNS = ("kind", "T", "eps", "delta", "M", "I", "term_unity", "term_integral", "verdict")

log = logging.getLogger("hmfvlasov")


def _resolution(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected <nq>x<np>, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def build_parser():
    parser = argparse.ArgumentParser(prog="hmfvlasov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("stability", "evaluate the stability functional"),
                            ("simulate", "run one Vlasov simulation"),
                            ("sweep", "run a phase-diagram campaign"),
                            ("check", "run the invariant battery")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML job file (defaults are used when omitted)")
        p.add_argument("--out", help="output directory (overrides the job file)")
        p.add_argument("--workers", type=int, help="worker processes (default: $HMF_WORKERS or 1)")
        p.add_argument("--resolution", type=_resolution, help="grid override <nq>x<np>")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    if args.config:
        cfg = cfgmod.load(args.config)
        if cfg.command != args.command:
            raise ConfigError(f"job file is for '{cfg.command}', not '{args.command}'", "command")
    else:
        cfg = cfgmod.RunConfig(args.command, cfgmod.JOBS[args.command]())
    if args.out:
        cfg.out = args.out
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("workers must be >= 1", "workers")
        cfg.workers = args.workers
    if args.resolution:
        cfg = cfg.with_resolution(*args.resolution)
    return cfg


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return f"{v:.16g}"


def cmd_stability(cfg):
    spec = cfg.job.state.build()
    report = stability_functional(spec)
    print(f"I = {report.I:.15g}")
    print(f"  1 + integral: {report.term_unity:.15g} + {report.term_integral:.15g}")
    print(f"  M = {report.M_used:.15g}")
    print(f"  verdict: {report.verdict.value}")
    row = (spec.kind.value, spec.T, spec.eps, spec.delta, report.M_used, report.I,
           report.term_unity, report.term_integral, report.verdict.value)
    write_csv(os.path.join(cfg.out, "stability.csv"), STABILITY_COLUMNS,
              [[_fmt(v) for v in row]])
    return report


def cmd_simulate(cfg):
    job = cfg.job
    spec = job.state.build()
    M = job.M if job.M is not None else spec.magnetization()
    grid = build_initial_condition(spec, M, job.grid.n_q, job.grid.n_p, job.grid.p_max)
    series = run(grid, job.run.build())
    path = os.path.join(cfg.out, "timeseries.csv")
    series.to_csv(path)
    print(f"wrote {path}: {len(series)} rows, M(t_end) = {series.M_final:.6e}")
    return series


def cmd_sweep(cfg):
    job = cfg.job
    protocol = job.build_protocol()
    workers = cfg.resolved_workers()
    if job.family == "homogeneous":
        results = scan_phase_diagram(job.eps, job.delta, protocol, workers)
    else:
        results = inhomogeneous_robustness(job.eps, job.delta, protocol, workers)
    path = os.path.join(cfg.out, "sweep.csv")
    write_csv(path, SWEEP_COLUMNS, [r.row() for r in results])
    for r in results:
        extra = f" ({r.error})" if r.error else ""
        verdict = r.verdict.value if r.verdict else "Failed"
        print(f"eps={r.eps:g} delta={r.delta:g} M_f={r.M_f:.3e} {verdict}{extra}")
    print(f"wrote {path}")
    return results


def cmd_check(cfg):
    failed = 0
    for item in run_battery(cfg.job, cfg.out):
        print(item.line(), flush=True)
        failed += not item.ok
    print(f"{failed} failure(s)")
    return failed


COMMANDS = {"stability": cmd_stability, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "check": cmd_check}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        os.makedirs(cfg.out, exist_ok=True)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = COMMANDS[args.command](cfg)
    except ConservationError as exc:
        print(f"conservation abort: {exc}", file=sys.stderr)
        return EXIT_CONSERVATION
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "check" and result:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
