"""Command-line entry point.

Usage:
    python -m vbgdetect corpus gen --out data/synth --scale 0.1
    python -m vbgdetect corpus ingest --dir captures/meet --label real --source-tag ingested_meet --manifest data/meet.jsonl
    python -m vbgdetect extract comat --manifest data/synth/manifest.jsonl --out feats/comat --bins 64
    python -m vbgdetect attack apply --input frame.png --chain "median:3+jpeg:80" --output out.png
    python -m vbgdetect train cnn --manifest data/synth/manifest.jsonl --out runs/cnn.vbgm
    python -m vbgdetect eval robustness --config scenario.yaml --report runs/robustness.csv
    python -m vbgdetect gradcheck
    python -m vbgdetect report --input runs/robustness.csv --output runs/robustness.md

Exit codes: 0 success, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from vbgdetect.config import settings
from vbgdetect.errors import InvalidInputError, MissingArtifactError, VbgError

logger = logging.getLogger(__name__)


def load_config_file(path: str | None) -> dict[str, Any]:
    """Parse a YAML or JSON config file (``yaml.safe_load`` reads both)."""
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError(f"config file not found: {p}")
    data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise InvalidInputError(f"{p}: config must be a mapping")
    return data


def _with_seed(cfg: dict[str, Any], seed: int | None) -> dict[str, Any]:
    return cfg if seed is None else {**cfg, "seed": seed}


# ── corpus ──


def cmd_corpus_gen(args: argparse.Namespace) -> int:
    from vbgdetect.models.schemas import CorpusConfig
    from vbgdetect.services.corpus import build_manifest, reference_proportional

    raw = _with_seed(load_config_file(args.config), args.seed)
    cfg = reference_proportional(args.scale, **raw) if args.scale else CorpusConfig(**raw)
    path = build_manifest(cfg, args.out)
    print(path)
    return 0


def cmd_corpus_ingest(args: argparse.Namespace) -> int:
    from vbgdetect.services.corpus import ingest, load_manifest, write_manifest

    manifest = Path(args.manifest)
    existing = load_manifest(manifest) if manifest.exists() else []
    entries = ingest(
        args.dir,
        args.label,
        args.source_tag,
        split=args.split,
        scenario_tags=args.tag or [],
        existing=existing,
        skip_invalid=args.skip_invalid,
    )
    write_manifest(existing + entries, manifest)
    print(f"{len(entries)} entries added to {manifest}")
    return 0


# ── extract ──


def cmd_extract(args: argparse.Namespace) -> int:
    from vbgdetect.features.comat import build_tensor, normalize_tensor, rebin_tensor, render_planes
    from vbgdetect.features.container import write_crspam, write_feature_csv, write_tensor
    from vbgdetect.features.crspam import crspam1372
    from vbgdetect.imaging.codec import load_frame
    from vbgdetect.models.schemas import Split, TensorProvenance
    from vbgdetect.services.batch import parallel_map
    from vbgdetect.services.corpus import entry_path, load_manifest
    from vbgdetect.services.harness import select

    entries = select(load_manifest(args.manifest), [Split(args.split)] if args.split else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def one(entry):
        src = entry_path(entry, args.manifest)
        frame = load_frame(src)
        stem = f"{entry.label.value}_{entry.content_hash}"
        prov = dict(source_path=str(src), content_hash=entry.content_hash, width=frame.width, height=frame.height)
        if args.kind == "comat":
            t = build_tensor(frame, normalize=False)
            if args.bins:
                t = rebin_tensor(t, args.bins)
            t = normalize_tensor(t)
            write_tensor(t, out / f"{stem}.cmt6", TensorProvenance(kind="comat", bin_count=t.bin_count, **prov))
            if args.render:
                render_planes(t, args.render, stem)
            return None
        vec = crspam1372(frame)
        write_crspam(vec, out / f"{stem}.crsp", TensorProvenance(kind="crspam", **prov))
        return (str(src), entry.label.value, vec.values)

    rows = parallel_map(one, entries, desc=f"extract {args.kind}")
    if args.kind == "crspam":
        write_feature_csv(rows, out / "features.csv")
    print(f"{len(entries)} {args.kind} features written to {out}")
    return 0


# ── attack ──


def cmd_attack_apply(args: argparse.Namespace) -> int:
    from vbgdetect.attacks.chain import apply_chain, parse_chain
    from vbgdetect.imaging.codec import load_frame, save_frame
    from vbgdetect.utils.hashing import content_hash, hash_key

    chain = parse_chain(args.chain)
    frame = load_frame(args.input)
    key = hash_key(content_hash(frame)) if args.per_frame_seed else 0
    save_frame(apply_chain(frame, chain, key), args.output)
    print(f"{chain.label} -> {args.output}")
    return 0


# ── train / eval ──


def _scenario(args: argparse.Namespace, name: str, **fields):
    from vbgdetect.models.schemas import Scenario

    raw = _with_seed(load_config_file(args.config), args.seed)
    raw.update({k: v for k, v in fields.items() if v is not None})
    raw["name"] = name
    return Scenario.model_validate(raw)


def _write_report(report, path: str | None, runner) -> None:
    from vbgdetect.services.report import emit_report, render_markdown

    if path:
        emit_report(report, path)
        runner.trace.write(path)
    print(render_markdown(report), end="")


def cmd_train(args: argparse.Namespace) -> int:
    from vbgdetect.services.harness import ScenarioRunner

    train: dict[str, Any] = {}
    if args.epochs is not None:
        train["epochs"] = args.epochs
    if args.bins is not None:
        train["bins"] = args.bins
    scn = _scenario(
        args,
        "unaware",
        detector={"cnn": "cnn_comat", "svm": "svm_crspam"}[args.kind],
        train_manifest=args.manifest,
        test_manifest=args.test_manifest,
        out_model_path=args.out,
    )
    if train:
        scn = scn.model_copy(update={"train": {**scn.train, **train}})
    runner = ScenarioRunner(work_dir=args.work_dir)
    report = runner.run_unaware(scn)
    _write_report(report, args.report, runner)
    for key in ("C", "gamma", "cv_accuracy"):
        if key in report.notes:
            print(f"{key}={report.notes[key]}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from vbgdetect.services.harness import ScenarioRunner

    name = {"aware": "aware_attack"}.get(args.scenario, args.scenario)
    scn = _scenario(
        args,
        name,
        detector=args.detector,
        train_manifest=args.train_manifest,
        test_manifest=args.test_manifest,
        control_manifest=args.control_manifest,
        model_path=args.model,
        out_model_path=args.out_model,
    )
    runner = ScenarioRunner(work_dir=args.work_dir)
    _write_report(runner.run(scn), args.report, runner)
    return 0


# ── gradcheck / report ──


def cmd_gradcheck(args: argparse.Namespace) -> int:
    from convnet import Architecture, grad_check

    report = grad_check(
        Architecture.reduced(dropout=args.dropout),
        epsilon=args.epsilon,
        tolerance=args.tolerance,
        seed=args.seed or 0,
    )
    print(
        json.dumps(
            {
                "passed": report.passed,
                "max_rel_error": report.max_rel_error,
                "tolerance": report.tolerance,
                "checked": report.checked,
                "kinks": report.kinks,
                "worst": report.worst,
            },
            indent=2,
        )
    )
    return 0 if report.passed else 3


def cmd_report(args: argparse.Namespace) -> int:
    from vbgdetect.services.report import emit_report, load_report

    emit_report(load_report(args.input), args.output, args.format)
    print(args.output)
    return 0


# ── Parser ──


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vbgdetect", description="Virtual-background forensics toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config file)")
    common.add_argument("--config", help="YAML or JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="Build or extend datasets").add_subparsers(dest="action", required=True)
    gen = corpus.add_parser("gen", parents=[common], help="Generate the synthetic corpus")
    gen.add_argument("--out", required=True, help="Output directory")
    gen.add_argument("--scale", type=float, help="Reference split sizes scaled by this factor (e.g. 0.1)")
    gen.set_defaults(func=cmd_corpus_gen)
    ing = corpus.add_parser("ingest", parents=[common], help="Add a directory of frames to a manifest")
    ing.add_argument("--dir", required=True)
    ing.add_argument("--label", required=True, choices=["real", "virtual", "attack_virtual"])
    ing.add_argument("--source-tag", required=True)
    ing.add_argument("--manifest", required=True, help="Manifest to create or append to")
    ing.add_argument("--split", default="test", choices=["train", "val", "test"])
    ing.add_argument("--tag", action="append", help="Scenario tag (repeatable)")
    ing.add_argument("--skip-invalid", action="store_true", help="Log and skip undecodable files")
    ing.set_defaults(func=cmd_corpus_ingest)

    extract = sub.add_parser("extract", parents=[common], help="Write feature files for a manifest")
    extract.add_argument("kind", choices=["comat", "crspam"])
    extract.add_argument("--manifest", required=True)
    extract.add_argument("--out", required=True)
    extract.add_argument("--split", choices=["train", "val", "test"])
    extract.add_argument("--bins", type=int, help="Rebin co-mat planes to this many bins")
    extract.add_argument("--render", help="Also render co-mat planes as PNGs into this directory")
    extract.set_defaults(func=cmd_extract)

    attack = sub.add_parser("attack", help="Post-processing attacks").add_subparsers(dest="action", required=True)
    apply_ = attack.add_parser("apply", parents=[common], help="Apply an attack chain to one frame")
    apply_.add_argument("--input", required=True)
    apply_.add_argument("--chain", required=True, help="e.g. median:3+jpeg:80")
    apply_.add_argument("--output", required=True)
    apply_.add_argument("--per-frame-seed", action="store_true", help="Mix the frame's content hash into noise seeds")
    apply_.set_defaults(func=cmd_attack_apply)

    train = sub.add_parser("train", parents=[common], help="Train a detector on clean frames")
    train.add_argument("kind", choices=["cnn", "svm"])
    train.add_argument("--manifest", required=True)
    train.add_argument("--test-manifest")
    train.add_argument("--out", help="Model output path")
    train.add_argument("--epochs", type=int)
    train.add_argument("--bins", type=int)
    train.add_argument("--report")
    train.add_argument("--work-dir")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", parents=[common], help="Run an experiment scenario")
    ev.add_argument(
        "scenario", choices=["unaware", "robustness", "lighting", "aware", "mismatch", "prejpeg", "table"]
    )
    ev.add_argument("--detector", choices=["cnn_comat", "svm_crspam"])
    ev.add_argument("--train-manifest")
    ev.add_argument("--test-manifest")
    ev.add_argument("--control-manifest")
    ev.add_argument("--model", help="Trained model to evaluate or fine-tune")
    ev.add_argument("--out-model")
    ev.add_argument("--report", help="Report path (.csv, .json or .md)")
    ev.add_argument("--work-dir")
    ev.set_defaults(func=cmd_eval)

    gc = sub.add_parser("gradcheck", parents=[common], help="Finite-difference check of backprop")
    gc.add_argument("--tolerance", type=float, default=settings.GRADCHECK_TOLERANCE)
    gc.add_argument("--epsilon", type=float, default=settings.GRADCHECK_EPSILON)
    gc.add_argument("--dropout", action="store_true", help="Check with frozen dropout masks")
    gc.set_defaults(func=cmd_gradcheck)

    rep = sub.add_parser("report", parents=[common], help="Convert a report between formats")
    rep.add_argument("--input", required=True)
    rep.add_argument("--output", required=True)
    rep.add_argument("--format", choices=["csv", "json", "markdown"])
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VbgError as exc:
        logger.error("%s", exc.detail)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("Invalid configuration: %s", exc)
        return 2
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        return 3
    except Exception:
        logger.exception("Unexpected failure")
        return 3


if __name__ == "__main__":
    sys.exit(main())
