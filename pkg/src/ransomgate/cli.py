"""Command-line entry point: ``ransomgate <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import glob
import logging
import sys
from pathlib import Path

from . import boost, collector, evaluate, gate, simulator
from .trace import TraceFormatError, read_trace

log = logging.getLogger("ransomgate")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    """Comma list ``0.1,0.5`` or range ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            n = int(round((stop - start) / step))
            return [round(start + i * step, 10) for i in range(n + 1)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a float list or start:stop:step, got {text!r}")


def _expand(pattern: str) -> list[Path]:
    p = Path(pattern)
    if p.is_dir():
        paths = sorted(p.glob("*.trace"))
    else:
        paths = sorted(Path(x) for x in glob.glob(pattern))
    if not paths:
        raise DataError(f"no trace files match {pattern!r}")
    return paths


def _load(pattern: str):
    return [read_trace(p) for p in _expand(pattern)]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ransomgate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="generate a synthetic trace corpus")
    p.add_argument("--kind", choices=simulator.KINDS, required=True)
    p.add_argument("--experiments", type=int, default=40)
    p.add_argument("--instances", type=int, default=4)
    p.add_argument("--duration-min", type=float, default=30.0)
    p.add_argument("--interval", type=float, default=0.5, help="seconds per sample")
    p.add_argument("--features", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.1, help="relative noise on increments")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("train", help="train a stump ensemble from a decision gate")
    p.add_argument("--traces", required=True, help="glob or directory of training traces")
    p.add_argument("--alpha", type=int, required=True, help="gate offset in states")
    p.add_argument("--beta", type=int, required=True, help="gate length in states")
    p.add_argument("--delta", type=float, required=True, help="smoothing factor in [0, 1]")
    p.add_argument("--benign-samples", type=int, default=None, help="benign draws per trace (default beta)")
    p.add_argument("--rounds", type=int, default=boost.DEFAULT_ROUNDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file")

    p = sub.add_parser("sweep", help="cross-fold accuracy over a gate parameter grid")
    p.add_argument("--traces", required=True)
    p.add_argument("--alphas", type=_int_list, required=True)
    p.add_argument("--betas", type=_int_list, required=True)
    p.add_argument("--deltas", type=_float_list, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--rounds", type=int, default=boost.DEFAULT_ROUNDS)
    p.add_argument("--balance", action="store_true", help="equalize classes per trace")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="heatmap CSV")

    p = sub.add_parser("detect", help="run online detection over one trace")
    p.add_argument("--model", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--tau", type=float, default=0.75)
    p.add_argument("--scores", action="store_true", help="include per-state scores in the report")
    p.add_argument("--out", required=True, help="JSON report")

    p = sub.add_parser("evaluate", help="detection-rate curves and delay histogram")
    p.add_argument("--model", required=True)
    p.add_argument("--positive", required=True, help="glob or directory of test-positive traces")
    p.add_argument("--negative", required=True, help="glob or directory of test-negative traces")
    p.add_argument("--taus", type=_float_list, default=_float_list("0:1:0.01"))
    p.add_argument("--delay-tau", type=float, default=0.75, help="tau for the delay histogram")
    p.add_argument("--out", required=True, help="curves CSV")
    p.add_argument("--delays", required=True, help="delay histogram CSV")

    p = sub.add_parser("collect", help="sample this machine's counters into a trace")
    p.add_argument("--interval", type=float, default=0.5)
    p.add_argument("--duration", type=float, required=True, help="seconds")
    p.add_argument("--machine-id", default=None)
    p.add_argument("--out", required=True, help="trace file")
    return parser


def cmd_simulate(args):
    cfg = simulator.SimConfig(
        n_features=args.features,
        sample_interval=args.interval,
        noise_std=args.noise,
        duration_min=args.duration_min,
        seed=args.seed,
    )
    traces = simulator.generate_corpus(args.kind, args.experiments, args.instances, cfg, args.seed)
    simulator.write_corpus(traces, args.out, args.kind, args.seed)
    log.info("wrote %d traces to %s", len(traces), args.out)


def cmd_train(args):
    traces = _load(args.traces)
    g = gate.DecisionGate(args.alpha, args.beta, args.delta, args.benign_samples)
    data = gate.build_training_set(traces, g, args.seed)
    model = boost.train_adaboost(data, args.rounds, args.seed)
    model.training_meta["gate"] = [g.alpha, g.beta, g.delta, g.benign_samples]
    boost.save_model(model, args.out)
    log.info("trained %d stumps on %d states", len(model.stumps), len(data))


def cmd_sweep(args):
    traces = _load(args.traces)
    grid = evaluate.sweep_gates(
        traces, args.alphas, args.betas, args.deltas, args.folds, args.seed, args.rounds, args.balance
    )
    grid.to_csv(args.out)


def cmd_detect(args):
    model = boost.load_model(args.model)
    trace = read_trace(args.trace)
    report = evaluate.detect_online(model, trace, args.tau, keep_scores=args.scores)
    Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")


def cmd_evaluate(args):
    model = boost.load_model(args.model)
    pos, neg = _load(args.positive), _load(args.negative)
    taus = sorted(set(args.taus) | {args.delay_tau})
    curves = evaluate.threshold_curves(model, pos, neg, taus)
    curves.to_csv(args.out)
    evaluate.delay_histogram(curves.positive_reports[args.delay_tau]).to_csv(args.delays)


def cmd_collect(args):
    summary = collector.collect(
        collector.PlatformSource(), args.interval, args.duration, args.out, machine_id=args.machine_id
    )
    log.info("collected %d rows (%d gaps, %d missed deadlines)",
             summary.rows, len(summary.gaps), summary.missed_deadlines)


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "collect": cmd_collect,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (DataError, TraceFormatError, boost.ModelFormatError, evaluate.SchemaMismatchError,
            collector.SourceError, ValueError, OSError) as exc:
        sys.stderr.write(f"ransomgate {args.command}: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
