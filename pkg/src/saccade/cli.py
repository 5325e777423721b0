"""Command-line entry point: ``saccade {evolve,evaluate,heatmap,trace,synth}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import analysis
from .brain import decode_genome, load_genome, save_genome
from .evolution import (
    EvolutionConfig,
    derive_rng,
    STREAM_ELITE,
    run_evolution,
    seed_from_elite,
)
from .idx import load_mnist, synthetic_digits, write_pbm

log = logging.getLogger("saccade")


class UsageError(Exception):
    pass


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def load_dataset(kind: str, split: str = "train", mnist_dir: str = "", per_class: int = 100):
    if kind == "synthetic":
        return synthetic_digits()
    if not mnist_dir:
        raise UsageError("--mnist-dir is required with --dataset mnist")
    return load_mnist(mnist_dir, split, per_class if split == "train" else None)


def _load_brain(args):
    if args.stub == "oracle":
        return analysis.oracle_stub
    if args.stub == "all":
        return analysis.all_guess_stub()
    if args.stub == "empty":
        return decode_genome(b"")
    if not args.genome:
        raise UsageError("--genome is required (or --stub for calibration)")
    return decode_genome(load_genome(args.genome))


def cmd_evolve(args) -> int:
    text = Path(args.config).read_text() if args.config else ""
    overrides = {f.name: getattr(args, f.name) for f in fields(EvolutionConfig)}
    cfg = EvolutionConfig.from_text(text, **overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = load_dataset(cfg.dataset, "train", cfg.mnist_dir, cfg.per_class)
    initial = None
    if args.seed_genome:
        initial = seed_from_elite(load_genome(args.seed_genome), derive_rng(cfg.seed, STREAM_ELITE), cfg)
    (out / "config.txt").write_text(cfg.to_text())
    result = run_evolution(cfg, data, initial, threads=args.threads,
                           checkpoint_path=out / "checkpoint.json", resume_from=args.resume)
    (out / "fitness_log.csv").write_text(result.log.to_csv())
    save_genome(out / "best.genome", result.best, generation=result.population.generation,
                fitness=str(result.best_fitness), seed=cfg.seed)
    print(f"generation {result.population.generation}: best fitness {float(result.best_fitness):.4f}")
    return 0


def cmd_evaluate(args) -> int:
    net = _load_brain(args)
    data = load_dataset(args.dataset, args.split, args.mnist_dir, args.per_class)
    acc = analysis.evaluate_accuracy(net, data, args.seed, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "accuracy.csv").write_text(acc.to_csv())
    print(acc.pretty())
    return 0


def cmd_heatmap(args) -> int:
    net = _load_brain(args)
    data = load_dataset(args.dataset, args.split, args.mnist_dir, args.per_class)
    counts = analysis.visit_heatmap(net, data, args.seed, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, pgm_path = analysis.write_heatmap(out, counts)
    print(f"wrote {csv_path} and {pgm_path} ({int(counts.sum())} pixel views)")
    return 0


def cmd_trace(args) -> int:
    net = _load_brain(args)
    data = load_dataset(args.dataset, args.split, args.mnist_dir, args.per_class)
    if not 0 <= args.index < len(data):
        raise UsageError(f"--index must lie in [0, {len(data) - 1}]")
    start = args.start if args.start else analysis.starts_for(data, args.seed)[args.index]
    if callable(net) and not hasattr(net, "arrays"):
        net = net(int(data.labels[args.index]))
    result, paths = analysis.trace_episode(net, data.images[args.index], start, args.out)
    print(f"label {int(data.labels[args.index])}: guesses {sorted(result.final_guesses)} "
          f"after {result.steps_used} steps; wrote {paths['jsonl']}")
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = synthetic_digits()
    for img, label in zip(data.images, data.labels):
        write_pbm(out / f"digit_{label}.pbm", img)
    print(f"wrote {len(data)} digits to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saccade", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", help="run the genetic algorithm")
    evolve.add_argument("--config", help="flat 'key = value' config file")
    evolve.add_argument("--out", default="run")
    evolve.add_argument("--threads", type=int, default=1)
    evolve.add_argument("--resume", help="checkpoint to continue from")
    evolve.add_argument("--seed-genome", help="start from mutants of this elite genome")
    for f in fields(EvolutionConfig):
        evolve.add_argument(_flag(f.name), dest=f.name, default=None,
                            type=str if f.type == "str" else (int if f.type == "int" else float))
    evolve.set_defaults(func=cmd_evolve)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "per-class accuracy of a genome"),
        ("heatmap", cmd_heatmap, "fovea visit counts over a dataset"),
        ("trace", cmd_trace, "record one episode"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--genome")
        p.add_argument("--stub", choices=("oracle", "all", "empty"), help="calibration brain instead of a genome")
        p.add_argument("--dataset", choices=("synthetic", "mnist"), default="synthetic")
        p.add_argument("--split", choices=("train", "test"), default="test")
        p.add_argument("--mnist-dir", default="")
        p.add_argument("--per-class", type=int, default=100)
        p.add_argument("--seed", type=int, default=0, help="seed for random start positions")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=".")
        if name == "trace":
            p.add_argument("--index", type=int, default=0)
            p.add_argument("--start", type=int, nargs=2, metavar=("X", "Y"))
        p.set_defaults(func=func)

    synth = sub.add_parser("synth", help="write the synthetic digit bitmaps")
    synth.add_argument("--out", default="synthetic")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"saccade {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
