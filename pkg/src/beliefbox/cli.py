"""Command-line entry point: ``beliefbox run|bfi2|train-predictor|eval-predictor|report``."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import config as cfgmod
from .backend import HTTPBackend, load_script
from .datasets import load_dataset, sample_items
from .debate import DebateConfig
from .errors import BeliefBoxError, ConfigError
from .experiments import (
    BFI2_TRAITS,
    ExperimentResult,
    load_item_bank,
    run_bfi2,
    run_openmindedness,
    run_peer_pressure,
    run_persuasion,
    write_outputs,
)

SYNTHETIC_BANK = "bfi2_synthetic.json"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML (or .json) run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--backend-url", dest="backend_url")
    p.add_argument("--model")
    p.add_argument("--temperature", type=float)
    p.add_argument("--concurrency", type=int)
    p.add_argument("--dataset")
    p.add_argument("--scripted", help="JSON script for the deterministic scripted backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefbox", description="Belief-box multi-agent debate experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its output directory")
    _common(run)
    run.add_argument("--experiment", choices=cfgmod.EXPERIMENTS)
    run.add_argument("--runs", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--sample-size", dest="sample_size", type=int)

    bfi = sub.add_parser("bfi2", help="administer the BFI-2 inventory and print trait scores")
    _common(bfi)
    bfi.add_argument("--item-bank", dest="item_bank", help="item bank JSON (default: packaged synthetic bank)")
    bfi.add_argument("--runs", type=int)

    train = sub.add_parser("train-predictor", help="fit a belief-update predictor")
    train.add_argument("--examples", required=True, help="transcripts.jsonl or example rows")
    train.add_argument("--regressor", choices=("ridge", "forest"), default="ridge")
    train.add_argument("--trees", type=int, default=100)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--model-out", dest="model_out", required=True)
    train.add_argument("--granularity", choices=("prompt", "last_turn"), default="prompt",
                       help="text mined from transcripts for each reassessment")

    ev = sub.add_parser("eval-predictor", help="report predictor MAE against a median baseline")
    ev.add_argument("--model", required=True)
    ev.add_argument("--examples", required=True)
    ev.add_argument("--split", choices=("all", "test"), default="all")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--granularity", choices=("prompt", "last_turn"), default="prompt")

    rep = sub.add_parser("report", help="merge results.csv files into plot-ready tables and figures")
    rep.add_argument("--inputs", nargs="+", required=True, help="results.csv files or run directories")
    rep.add_argument("--out", required=True)
    rep.add_argument("--no-figures", dest="figures", action="store_false")

    synth = sub.add_parser("synth-corpus", help="write the rule-generated predictor corpus")
    synth.add_argument("--n", type=int, default=2000)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    return parser


def resolve_config(args: argparse.Namespace) -> cfgmod.RunConfig:
    cfg = cfgmod.load_config(args.config) if args.config else cfgmod.RunConfig()
    if args.command == "bfi2":
        cfg.experiment = "bfi2"
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "concurrency": args.concurrency,
        "dataset": args.dataset,
        "scripted": args.scripted,
        "backend.base_url": args.backend_url,
        "backend.model": args.model,
        "backend.temperature": args.temperature,
        "experiment": getattr(args, "experiment", None),
        "runs": getattr(args, "runs", None),
        "rounds": getattr(args, "rounds", None),
        "sample_size": getattr(args, "sample_size", None),
        "item_bank": getattr(args, "item_bank", None),
    }
    cfgmod.apply_overrides(cfg, overrides)
    # echo absolute paths so the config reproduces the run from anywhere
    base = Path(args.config).resolve().parent if args.config else Path.cwd()
    for key in ("dataset", "scripted", "item_bank"):
        value = getattr(cfg, key)
        from_flag = overrides[key] is not None
        if value:
            setattr(cfg, key, str((Path.cwd() if from_flag else base).joinpath(value).resolve()))
    cfg.validate()
    return cfg


def make_backend(cfg: cfgmod.RunConfig):
    if cfg.scripted:
        return load_script(cfg.scripted)
    return HTTPBackend(cfg.backend_config())


def execute(cfg: cfgmod.RunConfig, backend=None) -> ExperimentResult:
    """Load every input, then build the backend (if not given) and run."""
    runs = cfg.effective_runs
    if cfg.experiment == "bfi2":
        if cfg.item_bank:
            bank = load_item_bank(cfg.item_bank)
        else:
            with resources.as_file(resources.files("beliefbox") / "data" / SYNTHETIC_BANK) as p:
                bank = load_item_bank(p)
        backend = backend or make_backend(cfg)
        return run_bfi2(bank, backend, cfg.levels, runs=runs, concurrency=cfg.concurrency)

    data = load_dataset(cfg.dataset, cfg.dataset_kind)
    if cfg.sample_size is not None:
        data = sample_items(data, min(cfg.sample_size, len(data)), cfg.seed)
    backend = backend or make_backend(cfg)
    if cfg.experiment == "open-mindedness":
        return run_openmindedness(data, backend, cfg.levels, cfg.directions, runs=runs, concurrency=cfg.concurrency)
    debate_cfg = DebateConfig(rounds=cfg.rounds, runs=runs, seed=cfg.seed, change_threshold=cfg.change_threshold)
    if cfg.experiment == "persuasion":
        return run_persuasion(
            data, backend, cfg.conditions, debate_cfg,
            target_level=cfg.target_level, persuader_level=cfg.persuader_level, concurrency=cfg.concurrency,
        )
    return run_peer_pressure(
        data, backend, cfg.group_sizes, debate_cfg,
        openness=cfg.openness, strength=cfg.strength, concurrency=cfg.concurrency,
    )


def format_table(result: ExperimentResult) -> str:
    rows = [("condition", "metric", "n", "value")]
    rows += [(r.condition, r.metric, str(r.n), f"{r.value:.4f}") for r in result.rows]
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def format_bfi2(result: ExperimentResult) -> str:
    levels = sorted({r.condition for r in result.rows}, key=lambda c: int(c.split("=")[1]))
    header = ["trait"] + levels
    lines = [header]
    for trait in BFI2_TRAITS:
        cells = [trait]
        for lvl in levels:
            try:
                cells.append(f"{result.value(lvl, 'score:' + trait):.1f}")
            except KeyError:
                cells.append("-")
        lines.append(cells)
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths)))
                     for row in lines)


def _write_run(cfg: cfgmod.RunConfig, result: ExperimentResult) -> Path:
    out = Path(cfg.out)
    write_outputs(result, out)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    out = Path(cfg.out)
    if out.exists() and not out.is_dir():
        raise ConfigError(f"output path exists and is not a directory: {out}")
    result = execute(cfg)
    _write_run(cfg, result)
    print(format_bfi2(result) if cfg.experiment == "bfi2" else format_table(result))
    print(f"wrote {out}")
    return 0


def cmd_bfi2(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    result = execute(cfg)
    if args.out:
        _write_run(cfg, result)
    print(format_bfi2(result))
    return 0


def _report_lines(report: dict) -> list[str]:
    return [
        f"n {report['n']}",
        f"MAE {report['mae']:.3f}",
        f"baseline MAE {report['baseline_mae']:.3f} (constant {report['baseline_value']:g})",
    ]


def cmd_train_predictor(args: argparse.Namespace) -> int:
    from .predictor import evaluate, load_examples, split_dataset, train_predictor

    examples = load_examples(args.examples, args.granularity)
    if len(examples) < 3:
        raise ConfigError(f"need at least 3 examples to train, found {len(examples)}")
    train, val, test = split_dataset(examples, args.seed)
    if not test:
        test = val or train
    model = train_predictor(train, val, kind=args.regressor, seed=args.seed, trees=args.trees)
    model.save(args.model_out)
    print(f"split train={len(train)} validation={len(val)} test={len(test)}")
    print("\n".join(_report_lines(evaluate(model, test))))
    print(f"wrote {args.model_out}")
    return 0


def cmd_eval_predictor(args: argparse.Namespace) -> int:
    from .predictor import BeliefPredictor, evaluate, load_examples, split_dataset

    model = BeliefPredictor.load(args.model)
    examples = load_examples(args.examples, args.granularity)
    if args.split == "test":
        examples = split_dataset(examples, args.seed)[2]
    if not examples:
        raise ConfigError("no evaluation examples")
    print("\n".join(_report_lines(evaluate(model, examples))))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .report import build_report

    for path in build_report(args.inputs, args.out, figures=args.figures):
        print(f"wrote {path}")
    return 0


def cmd_synth_corpus(args: argparse.Namespace) -> int:
    from .predictor import synthetic_corpus, write_examples

    write_examples(args.out, synthetic_corpus(args.n, args.seed))
    print(f"wrote {args.n} examples to {args.out}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "bfi2": cmd_bfi2,
    "train-predictor": cmd_train_predictor,
    "eval-predictor": cmd_eval_predictor,
    "report": cmd_report,
    "synth-corpus": cmd_synth_corpus,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (BeliefBoxError, OSError, KeyError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"beliefbox {args.command}: error [{module}.{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
