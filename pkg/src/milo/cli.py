"""Command-line front end.

Subcommands: preprocess, sample, schedule, eval, oracle. Every error
prints one line to stderr, ``error: <Code>: <message>``, and exits with
2 for validation problems (including unreadable or malformed inputs),
3 for I/O problems on the output side, 4 for an oracle instance over
the enumeration cap. MILO_THREADS caps preprocessing parallelism.
"""

from __future__ import annotations

import argparse
import math
import struct
import sys
import time

import numpy as np

from .curriculum import (
    DEFAULT_KAPPA,
    CurriculumConfig,
    build_plan,
    full_schedule,
    subset_for_epoch,
)
from .dataio import load_embeddings, load_labels, make_dataset
from .errors import InvalidHeader, MiloError
from .kernel import METRICS, MetricConfig, build_kernel
from .maximizer import brute_force_opt, naive_greedy
from .setfuncs import (
    DEFAULT_LAMBDA,
    SetFunctionKind,
    evaluate,
    graph_cut,
)
from .store import (
    encode_subset_record,
    load_metadata,
    read_subset_file,
    store_metadata,
)

__all__ = ["main"]

_FUNCTIONS = ("facility_location", "graph_cut", "disparity_sum", "disparity_min")


def _set_function(name: str, lam: float) -> SetFunctionKind:
    if name == "graph_cut":
        return graph_cut(lam)
    return SetFunctionKind(name, lam)


def _add_metric_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", choices=METRICS, default="cosine")
    parser.add_argument("--kw", type=float, default=1.0, help="rbf bandwidth multiplier")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="milo", description="curriculum subset selection over similarity kernels"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preprocess", help="build and persist a curriculum plan")
    pre.add_argument("--embeddings", required=True)
    pre.add_argument("--labels", required=True)
    pre.add_argument("--out", required=True, help="metadata directory")
    size = pre.add_mutually_exclusive_group(required=True)
    size.add_argument("--fraction", type=float, help="subset fraction in (0, 1]")
    size.add_argument("--size", type=int, help="subset size k")
    pre.add_argument("--epochs", type=int, required=True, help="total training epochs T")
    pre.add_argument("--r", type=int, default=1, help="epochs between subset refreshes")
    pre.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    pre.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    pre.add_argument("--epsilon", type=float, default=0.01)
    pre.add_argument("--seed", type=int, default=0)
    _add_metric_flags(pre)
    pre.add_argument("--force", action="store_true", help="overwrite a non-empty directory")

    sample = sub.add_parser("sample", help="print the subset for one epoch")
    sample.add_argument("--meta", required=True)
    sample.add_argument("--epoch", type=int, required=True)
    sample.add_argument("--format", choices=("text", "msub"), default="text")

    schedule = sub.add_parser("schedule", help="emit subsets for every epoch")
    schedule.add_argument("--meta", required=True)
    schedule.add_argument("--out", required=True)
    schedule.add_argument("--format", choices=("msub", "text"), default="msub")

    ev = sub.add_parser("eval", help="evaluate f(S) on a subset file")
    ev.add_argument("--embeddings", required=True)
    ev.add_argument("--subset", required=True, help="MSUB file of row indices")
    ev.add_argument("--function", choices=_FUNCTIONS, required=True)
    ev.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    _add_metric_flags(ev)

    oracle = sub.add_parser("oracle", help="exact optimum and greedy certification")
    oracle.add_argument("--embeddings", required=True)
    oracle.add_argument("--size", type=int, required=True, help="subset size k")
    oracle.add_argument("--function", choices=_FUNCTIONS, required=True)
    oracle.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    _add_metric_flags(oracle)

    return parser


def _cmd_preprocess(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    embeddings = load_embeddings(args.embeddings)
    labels = load_labels(args.labels)
    dataset = make_dataset(embeddings, labels)
    if args.fraction is not None:
        if not 0.0 < args.fraction <= 1.0:
            raise InvalidHeader("--fraction", "fraction", args.fraction)
        k = math.floor(args.fraction * dataset.n)
    else:
        k = args.size
    config = CurriculumConfig(
        k=k,
        T=args.epochs,
        R=args.r,
        kappa=args.kappa,
        lam=args.lam,
        epsilon=args.epsilon,
        seed=args.seed,
        metric=MetricConfig(args.metric, args.kw),
    )
    loaded = time.perf_counter()
    plan = build_plan(dataset, config)
    built = time.perf_counter()
    store_metadata(args.out, plan, force=args.force)
    done = time.perf_counter()
    budgets = " ".join(str(b) for b in plan.partition.budgets)
    print("preprocess summary")
    print(f"  n = {plan.n}")
    print(f"  classes = {plan.partition.num_classes}")
    print(f"  k = {config.k}")
    print(f"  budgets = {budgets}")
    print(f"  sge_epochs = {config.sge_epochs}")
    print(f"  n_sge = {config.n_sge}")
    print(f"  metadata = {args.out}")
    print(f"  load_seconds = {loaded - started:.3f}")
    print(f"  build_seconds = {built - loaded:.3f}")
    print(f"  store_seconds = {done - built:.3f}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    plan = load_metadata(args.meta)
    subset = subset_for_epoch(plan, args.epoch)
    if args.format == "msub":
        sys.stdout.buffer.write(encode_subset_record(subset))
        sys.stdout.buffer.flush()
    else:
        for index in subset:
            print(int(index))
    return 0


def _cmd_schedule(args: argparse.Namespace) -> int:
    plan = load_metadata(args.meta)
    schedule = full_schedule(plan)
    if args.format == "msub":
        with open(args.out, "wb") as sink:
            for epoch, subset in schedule:
                sink.write(struct.pack("<Q", epoch))
                sink.write(encode_subset_record(subset))
    else:
        with open(args.out, "w", encoding="utf-8") as sink:
            for epoch, subset in schedule:
                sink.write(f"{epoch}\t{' '.join(str(int(i)) for i in subset)}\n")
    print(f"wrote {len(schedule)} epochs to {args.out}")
    return 0


def _kernel_over_all(args: argparse.Namespace):
    embeddings = load_embeddings(args.embeddings)
    config = MetricConfig(args.metric, args.kw)
    return build_kernel(embeddings, np.arange(embeddings.n), config)


def _cmd_eval(args: argparse.Namespace) -> int:
    kernel = _kernel_over_all(args)
    subset = read_subset_file(args.subset)
    value = evaluate(_set_function(args.function, args.lam), kernel, subset)
    print(f"{value:.6g}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    kernel = _kernel_over_all(args)
    kind = _set_function(args.function, args.lam)
    best, optimum = brute_force_opt(kind, kernel, args.size)
    greedy = naive_greedy(kind, kernel, args.size)
    ratio = greedy.final_value / optimum if optimum != 0.0 else 1.0
    print(f"optimum_value = {optimum:.6g}")
    print(f"optimum_subset = {' '.join(str(i) for i in best)}")
    print(f"greedy_value = {greedy.final_value:.6g}")
    print(f"greedy_ratio = {ratio:.6f}")
    return 0


_HANDLERS = {
    "preprocess": _cmd_preprocess,
    "sample": _cmd_sample,
    "schedule": _cmd_schedule,
    "eval": _cmd_eval,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except MiloError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
