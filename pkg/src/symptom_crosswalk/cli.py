"""Command-line front door for the crosswalk engine.

One binary, subcommand style. Logs go to standard error; data goes to
files (written atomically) or standard output, so outputs stay pipeable.
Option values resolve as flags > CROSSWALK_* environment variables >
defaults.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .crosswalk import (
    DEFAULT_TAU,
    build_link_map,
    build_model,
    calibrate,
    convert_participant,
    load_model,
    save_model,
    serialize_model,
)
from .embedding import (
    fetch_embeddings,
    format_pair_report,
    load_embeddings,
    pair_report,
    serialize_embeddings,
    similarity_matrix,
)
from .errors import CrosswalkError
from .evaluation import run_crosswalk_experiment, score_external, within_inventory_curve
from .inventory import deduplicate, enforce_completeness, parse_inventory, parse_scores
from .jsonio import atomic_write_json, atomic_write_text

log = logging.getLogger("crosswalk")


def _env(name: str, default):
    return os.environ.get(f"CROSSWALK_{name}", default)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    tau: float
    seed: int | None
    mode: str
    ratio: float
    jobs: int

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise CrosswalkError(f"--tau must be in [0, 1], got {self.tau}")
        if not 0.0 < self.ratio < 1.0:
            raise CrosswalkError(f"--ratio must be in (0, 1), got {self.ratio}")
        if self.mode not in ("deterministic", "stochastic"):
            raise CrosswalkError(f"--mode must be det or stoch, got {self.mode!r}")
        if self.jobs < 1:
            raise CrosswalkError(f"--jobs must be >= 1, got {self.jobs}")


_MODE_ALIASES = {"det": "deterministic", "deterministic": "deterministic",
                 "stoch": "stochastic", "stochastic": "stochastic"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosswalk",
        description="Link symptom inventories by text similarity and convert scores between them.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, *, scores=False, embeddings=False, out=False):
        p.add_argument("--inventory", action="append", default=[], metavar="PATH",
                       help="inventory definition JSON (repeatable; order matters)")
        if scores:
            p.add_argument("--scores", metavar="PATH", help="cohort score CSV")
        if embeddings:
            p.add_argument("--embeddings", action="append", default=[], metavar="PATH",
                           help="embedding vector JSON, one per --inventory")
            p.add_argument("--embed-service", default=_env("EMBED_SERVICE", None),
                           metavar="URL", help="embedding service base URL")
        if out:
            p.add_argument("--out", required=True, metavar="PATH", help="output path")
        p.add_argument("--tau", type=float, default=float(_env("TAU", DEFAULT_TAU)),
                       help="similarity threshold separating linked from fallback items")
        p.add_argument("--seed", type=int,
                       default=(int(_env("SEED", "")) if _env("SEED", "") else None),
                       help="64-bit seed for splits and stochastic conversion")
        p.add_argument("--mode", choices=sorted(_MODE_ALIASES), default=_env("MODE", "det"),
                       help="conversion mode (det|stoch)")
        p.add_argument("--ratio", type=float, default=float(_env("RATIO", 0.5)),
                       help="train fraction for participant splits")
        p.add_argument("--jobs", type=int, default=int(_env("JOBS", 1)),
                       help="maximum worker threads for batched embedding fetches")

    p = sub.add_parser("validate", help="parse inventories (and optionally scores) and report")
    common(p, scores=True)

    p = sub.add_parser("embed", help="fetch embeddings for an inventory and write a vector file")
    common(p, embeddings=True, out=True)

    p = sub.add_parser("link", help="compute the similarity matrix and link map for two inventories")
    common(p, embeddings=True, out=True)
    p.add_argument("--pair-report", metavar="PATH", help="also write the all-pairs similarity CSV")

    p = sub.add_parser("calibrate", help="estimate percentile thresholds for one inventory")
    common(p, scores=True, out=True)

    p = sub.add_parser("build", help="build and save a crosswalk model artifact")
    common(p, scores=True, embeddings=True, out=True)

    p = sub.add_parser("convert", help="convert a participant score CSV through a model")
    common(p, scores=True, out=True)
    p.add_argument("--model", required=True, metavar="PATH", help="crosswalk model artifact")

    p = sub.add_parser("evaluate", help="split, build on train, and score held-out participants")
    common(p, scores=True, embeddings=True, out=True)
    p.add_argument("--per-item-csv", metavar="PATH", help="also write per-item metrics CSV")

    p = sub.add_parser("within", help="within-inventory accuracy vs number of regressor items")
    common(p, scores=True, out=True)
    p.add_argument("--repetitions", type=int, default=5)

    p = sub.add_parser("score-external", help="score a third-party prediction file")
    common(p, scores=True, out=True)
    p.add_argument("--predictions", required=True, metavar="PATH")

    p = sub.add_parser("serve", help="serve loaded models over HTTP")
    common(p)
    p.add_argument("--models", nargs="+", required=True, metavar="PATH")
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="ADDR:PORT")

    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        tau=args.tau,
        seed=args.seed,
        mode=_MODE_ALIASES[args.mode],
        ratio=args.ratio,
        jobs=args.jobs,
    )


def _check_inputs(*paths: str | None) -> None:
    missing = [p for p in paths if p and not Path(p).exists()]
    if missing:
        raise CrosswalkError(f"input file(s) not found: {', '.join(missing)}")


def _inventories(args, expected: int | None = None):
    if expected is not None and len(args.inventory) != expected:
        raise CrosswalkError(
            f"{args.subcommand} needs exactly {expected} --inventory argument(s), "
            f"got {len(args.inventory)}"
        )
    if not args.inventory:
        raise CrosswalkError(f"{args.subcommand} needs at least one --inventory")
    _check_inputs(*args.inventory)
    return [parse_inventory(p) for p in args.inventory]


def _embeddings_for(args, inventories, jobs: int):
    if args.embeddings:
        if len(args.embeddings) != len(inventories):
            raise CrosswalkError(
                f"got {len(args.embeddings)} --embeddings for {len(inventories)} inventories"
            )
        _check_inputs(*args.embeddings)
        return [load_embeddings(p, inv) for p, inv in zip(args.embeddings, inventories)]
    if args.embed_service:
        return [
            fetch_embeddings(args.embed_service, inv, max_workers=jobs) for inv in inventories
        ]
    raise CrosswalkError("provide --embeddings files or an --embed-service URL")


def _cmd_validate(args, cfg) -> int:
    inventories = _inventories(args)
    for inv in inventories:
        print(f"inventory {inv.inventory_id}: {len(inv)} items ok")
    if args.scores:
        _check_inputs(args.scores)
        cohort = parse_scores(args.scores, inventories)
        deduped = deduplicate(cohort)
        print(f"scores: {len(cohort)} participants ok")
        for inv in inventories:
            complete, excluded = enforce_completeness(deduped, inv)
            print(f"  {inv.inventory_id}: {len(complete)} complete, {excluded} excluded")
    return 0


def _cmd_embed(args, cfg) -> int:
    inventories = _inventories(args, expected=1)
    sets = _embeddings_for(args, inventories, cfg.jobs)
    atomic_write_json(args.out, serialize_embeddings(sets[0]))
    log.info("wrote embeddings for %s to %s", inventories[0].inventory_id, args.out)
    return 0


def _cmd_link(args, cfg) -> int:
    inventories = _inventories(args, expected=2)
    ea, eb = _embeddings_for(args, inventories, cfg.jobs)
    sims = similarity_matrix(ea, eb)
    link_map = build_link_map(sims)
    atomic_write_json(
        args.out,
        {
            "source_inventory_id": link_map.source_inventory_id,
            "target_inventory_id": link_map.target_inventory_id,
            "tie_policy": link_map.tie_policy,
            "links": {
                target: {"source_item": link.source_item_id, "similarity": link.similarity}
                for target, link in link_map.links.items()
            },
        },
    )
    if args.pair_report:
        atomic_write_text(args.pair_report, format_pair_report(pair_report([sims])))
    return 0


def _cmd_calibrate(args, cfg) -> int:
    # first --inventory is calibrated; any others only validate the score file
    inventories = _inventories(args)
    inv = inventories[0]
    _check_inputs(args.scores)
    cohort = parse_scores(args.scores, inventories)
    complete, excluded = enforce_completeness(deduplicate(cohort), inv)
    cal = calibrate(complete, inv)
    atomic_write_json(
        args.out,
        {
            "inventory_id": cal.inventory_id,
            "thresholds": {item: list(th) for item, th in cal.thresholds.items()},
            "n": dict(cal.sample_sizes),
            "excluded": excluded,
        },
    )
    return 0


def _cmd_build(args, cfg) -> int:
    inventories = _inventories(args, expected=2)
    source_inv, target_inv = inventories
    _check_inputs(args.scores)
    cohort = parse_scores(args.scores, inventories)
    ea, eb = _embeddings_for(args, inventories, cfg.jobs)
    sims = similarity_matrix(ea, eb)
    model = build_model(
        sims, cohort, source_inv, target_inv, tau=cfg.tau, backend_tag=ea.backend_tag
    )
    save_model(model, args.out)
    log.info(
        "built %s->%s model (tau=%.3f, %d fallback items) -> %s",
        model.source_inventory_id, model.target_inventory_id,
        cfg.tau, len(model.fallbacks), args.out,
    )
    return 0


def _cmd_convert(args, cfg) -> int:
    _check_inputs(args.model, args.scores)
    model = load_model(args.model)
    if cfg.mode == "stochastic" and cfg.seed is None:
        raise CrosswalkError("stochastic conversion requires --seed")
    # a synthetic inventory over the model's source items lets parse_scores
    # validate the CSV without the original definition file
    from .inventory import Inventory, Item, LikertScale

    scale = LikertScale(("0", "1", "2", "3", "4"))
    source_inv = Inventory(
        inventory_id=model.source_inventory_id,
        name=model.source_inventory_id,
        reference_period="",
        items=tuple(
            Item(item_id=i, text=i, scale=scale) for i in model.source_item_ids
        ),
    )
    cohort = parse_scores(args.scores, [source_inv])
    complete, excluded = enforce_completeness(deduplicate(cohort), source_inv)
    if excluded:
        log.warning("skipping %d participants without complete source responses", excluded)
    rng = np.random.default_rng(cfg.seed) if cfg.mode == "stochastic" else None
    lines = ["participant_id,inventory_id,item_id,score,age,sex,timestamp"]
    for rec in complete.records:
        responses = rec.responses_for(model.source_inventory_id)
        estimates = convert_participant(model, responses, mode=cfg.mode, rng=rng)
        age = "" if rec.age is None else f"{rec.age:g}"
        sex = "" if rec.sex == "unknown" else rec.sex
        for item_id in sorted(estimates):
            lines.append(
                f"{rec.participant_id},{model.target_inventory_id},{item_id},"
                f"{estimates[item_id]},{age},{sex},"
            )
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_evaluate(args, cfg) -> int:
    inventories = _inventories(args, expected=2)
    source_inv, target_inv = inventories
    _check_inputs(args.scores)
    cohort = parse_scores(args.scores, inventories)
    ea, eb = _embeddings_for(args, inventories, cfg.jobs)
    seed = cfg.seed if cfg.seed is not None else 0
    result = run_crosswalk_experiment(
        cohort, source_inv, target_inv, ea, eb,
        tau=cfg.tau, ratio=cfg.ratio, seed=seed,
        mode=cfg.mode, conversion_seed=seed,
    )
    atomic_write_json(args.out, result.report.to_dict())
    if args.per_item_csv:
        atomic_write_text(args.per_item_csv, result.report.per_item_csv())
    log.info(
        "evaluated %s->%s on %d held-out participants: EMA %.1f%% (random guess %.0f%%)",
        source_inv.inventory_id, target_inv.inventory_id,
        result.report.n_participants, result.report.ema,
        result.report.random_guess_ema,
    )
    return 0


def _cmd_within(args, cfg) -> int:
    # first --inventory is analysed; any others only validate the score file
    inventories = _inventories(args)
    inv = inventories[0]
    _check_inputs(args.scores)
    cohort = parse_scores(args.scores, inventories)
    curve = within_inventory_curve(
        cohort, inv,
        seed=cfg.seed if cfg.seed is not None else 0,
        repetitions=args.repetitions,
        ratio=cfg.ratio,
    )
    atomic_write_text(args.out, curve.to_csv())
    log.info("within-inventory bound for %s: %.1f%%", inv.inventory_id, curve.all_items_ema)
    return 0


def _cmd_score_external(args, cfg) -> int:
    inventories = _inventories(args)
    _check_inputs(args.scores, args.predictions)
    cohort = parse_scores(args.scores, inventories)
    report = score_external(args.predictions, cohort)
    atomic_write_json(args.out, report.to_dict())
    return 0


def _cmd_serve(args, cfg) -> int:
    from .service import load_service_state, run_service

    _check_inputs(*args.inventory, *args.models)
    if not args.inventory:
        raise CrosswalkError("serve needs at least one --inventory")
    state = load_service_state(args.inventory, args.models)
    log.info("serving %d inventories, %d crosswalks on %s",
             len(state.inventories), len(state.models), args.bind)
    run_service(state, bind=args.bind)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "embed": _cmd_embed,
    "link": _cmd_link,
    "calibrate": _cmd_calibrate,
    "build": _cmd_build,
    "convert": _cmd_convert,
    "evaluate": _cmd_evaluate,
    "within": _cmd_within,
    "score-external": _cmd_score_external,
    "serve": _cmd_serve,
}


def run(argv: list[str]) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("CROSSWALK_LOG", "INFO"),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return _COMMANDS[args.subcommand](args, cfg)
    except CrosswalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
