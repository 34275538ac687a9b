"""Command line entry point: ``pmpublic {run,sweep,exact,check,trace}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from ..pm_scenario import CONTEXT_IDS
from ..protocol import SamplingMode, plan_round, render_trace, run_round
from ..streams import RoundStream
from .estimate import DEFAULT_ROUNDS, RunConfig, StateSpec, closed_form_sigma, estimate_sigma
from .exact import exact_sigma
from .experiments import channel_checks, fmt, invariance_experiments, rows_to_csv, rows_to_json, sweep_passersby

log = logging.getLogger("pmpublic")

EXIT_INVALID = 2
EXIT_CHECK_FAILED = 3


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser, passersby_list: bool = False) -> None:
    if passersby_list:
        p.add_argument("--passersby", type=_int_list, default=[1, 2, 3], help="comma separated, e.g. 1,2,3")
    else:
        p.add_argument("--passersby", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in SamplingMode], default="replace")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmpublic", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="estimate the witness for one configuration")
    _add_common(p)
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--state", default="mixed", help="mixed | haar | haar:<seed> | file:<path>")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep", help="witness versus number of passersby for Haar states")
    _add_common(p, passersby_list=True)
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--states", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("exact", help="sampling-free witness values")
    _add_common(p, passersby_list=True)
    p.add_argument("--method", choices=("auto", "channel", "recursion", "enumerate"), default="auto")
    p.add_argument("--state", default="mixed")

    p = sub.add_parser("check", help="invariance experiments and channel checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("trace", help="render a single round")
    _add_common(p)
    p.add_argument("--round", type=int, default=0, dest="round_index")
    p.add_argument("--state", default="mixed")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text)


def _table(records: list[dict], fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _first_trace(state: StateSpec, n: int, mode: SamplingMode, seed: int, index: int) -> str:
    stream = RoundStream(seed, index)
    plan = plan_round(n, stream, mode)
    return render_trace(run_round(state.resolve(), plan, stream))


def cmd_run(args) -> int:
    state = StateSpec.parse(args.state, args.seed)
    cfg = RunConfig(args.passersby, args.rounds, args.seed, state, args.mode, args.workers)
    if args.verbose:
        log.info("round 0 of the run:\n%s", _first_trace(state, cfg.n_passersby, cfg.sampling_mode, cfg.seed, 0))
    est = estimate_sigma(cfg)
    rec = {
        "n_passersby": cfg.n_passersby,
        "rounds": cfg.rounds,
        "sigma": est.sigma,
        "sigma_stderr": est.sigma_stderr,
        "closed_form": closed_form_sigma(cfg.n_passersby),
        "nc_bound": 4,
    }
    for cid in CONTEXT_IDS:
        rec[f"mean_{cid}"] = est.per_context[cid].mean
    if args.format == "json":
        rec = {k: float(fmt(v)) if isinstance(v, float) else v for k, v in rec.items()}
    _emit(_table([rec], args.format), args.out)
    return 0


def cmd_sweep(args) -> int:
    rows = sweep_passersby(args.passersby, args.states, args.rounds, args.seed, args.mode, args.workers)
    _emit(rows_to_json(rows) if args.format == "json" else rows_to_csv(rows), args.out)
    return 0


def cmd_exact(args) -> int:
    rho0 = StateSpec.parse(args.state, args.seed).resolve()
    recs = []
    for n in args.passersby:
        recs.append(
            {
                "n_passersby": n,
                "mode": args.mode,
                "exact": exact_sigma(n, args.mode, rho0, method=args.method),
                "closed_form": closed_form_sigma(n),
            }
        )
    if args.format == "json":
        recs = [{k: float(fmt(v)) if isinstance(v, float) else v for k, v in r.items()} for r in recs]
    _emit(_table(recs, args.format), args.out)
    return 0


def cmd_check(args) -> int:
    ok = True
    for report in (invariance_experiments(args.seed), channel_checks(args.seed, args.trials)):
        for line in report.lines():
            print(line)
        ok = ok and report.passed
    print("ALL PASS" if ok else "CHECK FAILED")
    return 0 if ok else EXIT_CHECK_FAILED


def cmd_trace(args) -> int:
    state = StateSpec.parse(args.state, args.seed)
    _emit(_first_trace(state, args.passersby, SamplingMode.parse(args.mode), args.seed, args.round_index), args.out)
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "exact": cmd_exact, "check": cmd_check, "trace": cmd_trace}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
