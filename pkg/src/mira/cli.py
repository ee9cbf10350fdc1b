"""Command-line entry point wrapping every engine capability.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
With --json, errors are emitted to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classifier import BatchItemError, classify_batch, fit
from .config import EngineConfig, load_config
from .evaluation import EvaluationReport, cross_validate
from .store import ModelArtifactError, downsample, load_model, save_model
from .synthgen import CorpusSpec, SynthError, generate_corpus, generate_replay
from .types import (
    Classification,
    LabeledEvent,
    ValidationError,
    classification_from_dict,
    classification_to_dict,
    event_to_dict,
    labeled_event_from_dict,
    labeled_event_to_dict,
    read_jsonl,
    to_json,
    validate_event,
)


class CliError(Exception):
    """Usage/validation failure (exit 2)."""


def _load_engine_config(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    if not Path(path).exists():
        raise CliError(f"config file not found: {path}")
    return load_config(path)


def _read_labeled(path: str) -> list[LabeledEvent]:
    if not Path(path).exists():
        raise CliError(f"data file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fp:
        for i, raw in enumerate(read_jsonl(fp)):
            try:
                out.append(labeled_event_from_dict(raw))
            except (KeyError, ValidationError, ValueError) as exc:
                raise CliError(f"{path}:{i + 1}: invalid labeled event: {exc}") from exc
    if not out:
        raise CliError(f"{path} contains no labeled events")
    return out


def _read_events(path: str) -> list:
    if not Path(path).exists():
        raise CliError(f"events file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fp:
        for i, raw in enumerate(read_jsonl(fp)):
            try:
                out.append(validate_event(raw))
            except ValidationError as exc:
                raise CliError(f"{path}:{i + 1}: invalid event: {exc}") from exc
    return out


# --- subcommands ---------------------------------------------------------------

def cmd_train(args: argparse.Namespace) -> int:
    config = _load_engine_config(args.config)
    data = _read_labeled(args.data)
    model = fit(data, config)
    save_model(model, args.out)
    classes = len({r.label.class_id for r in model.rows})
    print(f"version {model.version}: {len(model.rows)} rows, {classes} classes -> {args.out}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    if not Path(args.model).exists():
        raise CliError(f"model artifact not found: {args.model}")
    model = load_model(args.model)
    events = _read_events(args.events)
    results = classify_batch(model, events)
    uncertain = 0
    with open(args.out, "w", encoding="utf-8") as fp:
        for r in results:
            if isinstance(r, BatchItemError):
                print(f"event {r.event_id}: {r.error}", file=sys.stderr)
                continue
            uncertain += 1 if r.uncertain else 0
            fp.write(to_json(classification_to_dict(r)))
            fp.write("\n")
    print(f"classified {len(events)} events ({uncertain} uncertain) "
          f"with model version {model.version} -> {args.out}")
    return 0


def _print_report(report: EvaluationReport) -> None:
    header = f"{'fold':>4}  {'weighted F1':>11}  {'macro F1':>9}  {'accuracy':>9}  {'false unc.':>10}"
    print(header)
    print("-" * len(header))
    for fm in report.folds:
        print(f"{fm.fold:>4}  {fm.weighted_f1:>11.4f}  {fm.macro_f1:>9.4f}"
              f"  {fm.accuracy:>9.4f}  {fm.false_uncertainty_rate:>10.4f}")
    print(f"{'mean':>4}  {report.weighted_f1:>11.4f}  {report.macro_f1:>9.4f}"
          f"  {report.accuracy:>9.4f}  {report.false_uncertainty_rate:>10.4f}")
    for w in report.warnings:
        print(f"warning: {w}")
    # Full-precision aggregate for machine comparison against the JSON report.
    print(f"aggregate weighted_f1: {report.weighted_f1!r}")
    print(f"aggregate macro_f1: {report.macro_f1!r}")


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_engine_config(args.config)
    data = _read_labeled(args.data)
    report = cross_validate(
        data, config, k_folds=args.folds, seed=args.seed, baseline=args.baseline)
    _print_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            json.dump(report.to_dict(), fp, indent=2, sort_keys=True)
            fp.write("\n")
        print(f"report -> {args.out}")
    return 0


def cmd_downsample(args: argparse.Namespace) -> int:
    config = _load_engine_config(args.config)
    data = _read_labeled(args.data)
    kept = downsample(data, config)
    before: dict[str, int] = {}
    after: dict[str, int] = {}
    for le in data:
        before[le.label.class_id] = before.get(le.label.class_id, 0) + 1
    for le in kept:
        after[le.label.class_id] = after.get(le.label.class_id, 0) + 1
    with open(args.out, "w", encoding="utf-8") as fp:
        for le in kept:
            fp.write(to_json(labeled_event_to_dict(le)))
            fp.write("\n")
    print(f"{'class':<12} {'before':>7} {'after':>7}")
    for cid in sorted(before):
        print(f"{cid:<12} {before[cid]:>7} {after.get(cid, 0):>7}")
    print(f"{'total':<12} {len(data):>7} {len(kept):>7}")
    return 0


def _load_spec(args: argparse.Namespace) -> CorpusSpec:
    if args.spec:
        if not Path(args.spec).exists():
            raise CliError(f"spec file not found: {args.spec}")
        with open(args.spec, encoding="utf-8") as fp:
            raw = json.load(fp)
    else:
        raw = {}
    if args.seed is not None:
        raw["seed"] = args.seed
    try:
        return CorpusSpec.from_dict(raw)
    except (SynthError, TypeError) as exc:
        raise CliError(f"invalid corpus spec: {exc}") from exc


def cmd_synth_corpus(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    events, truth = generate_corpus(spec)
    with open(args.out, "w", encoding="utf-8") as fp:
        for le in events:
            fp.write(to_json(labeled_event_to_dict(le)))
            fp.write("\n")
    truth_path = f"{args.out}.truth.jsonl"
    with open(truth_path, "w", encoding="utf-8") as fp:
        for event_id in sorted(truth.class_by_event):
            fp.write(to_json({
                "event_id": event_id,
                "class_id": truth.class_by_event[event_id],
                "pattern_id": truth.pattern_by_event[event_id],
            }))
            fp.write("\n")
    print(f"{len(events)} labeled events ({spec.n_classes} classes) -> {args.out}")
    print(f"truth sidecar -> {truth_path}")
    return 0


def cmd_synth_replay(args: argparse.Namespace) -> int:
    spec = _load_spec(args)
    events, truth = generate_replay(
        spec, n_events=args.n_events, novel_class_rate=args.novel_rate,
        seed=args.replay_seed)
    with open(args.out, "w", encoding="utf-8") as fp:
        for e in events:
            fp.write(to_json(event_to_dict(e)))
            fp.write("\n")
    truth_path = f"{args.out}.truth.jsonl"
    with open(truth_path, "w", encoding="utf-8") as fp:
        for event_id in sorted(truth):
            fp.write(to_json({"event_id": event_id, "class_id": truth[event_id]}))
            fp.write("\n")
    print(f"{len(events)} events -> {args.out}")
    print(f"truth sidecar -> {truth_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    store_dir = args.store or os.environ.get("MIRA_STORE")
    if not store_dir:
        raise CliError("--store (or MIRA_STORE) is required")
    config_path = args.config or os.environ.get("MIRA_CONFIG")
    listen = args.listen or os.environ.get("MIRA_LISTEN") or "127.0.0.1:8750"
    host, _, port_s = listen.rpartition(":")
    if not host or not port_s.isdigit():
        raise CliError(f"invalid listen address {listen!r}; expected host:port")
    config = _load_engine_config(config_path)
    serve(store_dir, config, host=host, port=int(port_s), ui_dir=args.ui)
    return 0


def cmd_review(args: argparse.Namespace) -> int:
    if not Path(args.model).exists():
        raise CliError(f"model artifact not found: {args.model}")
    model = load_model(args.model)
    if not Path(args.results).exists():
        raise CliError(f"results file not found: {args.results}")
    items: list[Classification] = []
    with open(args.results, encoding="utf-8") as fp:
        for i, raw in enumerate(read_jsonl(fp)):
            try:
                items.append(classification_from_dict(raw))
            except (KeyError, ValidationError) as exc:
                raise CliError(f"{args.results}:{i + 1}: invalid classification: {exc}") from exc
    uncertain = sorted(
        (c for c in items if c.uncertain), key=lambda c: (c.confidence, c.probability))
    print(f"{len(uncertain)} uncertain of {len(items)} classifications "
          f"(model version {model.version}, thresholds p>={model.thresholds.min_probability}"
          f" c>={model.thresholds.min_confidence})")
    for c in uncertain:
        print(f"\nevent {c.event_id}: predicted {c.predicted.class_id}"
              f" [{c.predicted.kind.value}]"
              f" p={c.probability:.4f} c={c.confidence:.4f}")
        for n in c.neighbors:
            print(f"    row {n.training_row_id:>6}  d={n.distance:.4f}  {n.label.class_id}")
    return 0


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mira", description="Root-cause triage engine for failed replay events")
    parser.add_argument("--json", action="store_true", help="emit errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model from labeled events")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="batch-classify events with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="stratified cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--baseline", choices=["custom", "euclidean"], default="custom")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("downsample", help="trim near-duplicate groups per class")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("synth", help="generate synthetic corpora and replays")
    synth_sub = p.add_subparsers(dest="synth_command", required=True)
    sp = synth_sub.add_parser("corpus")
    sp.add_argument("--spec", help="JSON corpus spec (defaults apply)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth_corpus)
    sp = synth_sub.add_parser("replay")
    sp.add_argument("--spec", help="JSON corpus spec the training corpus used")
    sp.add_argument("--seed", type=int, help="corpus seed override")
    sp.add_argument("--replay-seed", type=int, default=1)
    sp.add_argument("--n-events", type=int, default=2000)
    sp.add_argument("--novel-rate", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", help="store directory (or MIRA_STORE)")
    p.add_argument("--config", help="config file (or MIRA_CONFIG)")
    p.add_argument("--listen", help="host:port (or MIRA_LISTEN; default 127.0.0.1:8750)")
    p.add_argument("--ui", help="serve a built frontend from this directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("review", help="list uncertain classifications with evidence")
    p.add_argument("--model", required=True)
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_review)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValidationError, SynthError, ModelArtifactError) as exc:
        _emit_error(args, exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 1
        _emit_error(args, exc)
        return 1


def _emit_error(args: argparse.Namespace, exc: Exception) -> None:
    if getattr(args, "json", False):
        payload: dict = {"error": str(exc)}
        field = getattr(exc, "field", None)
        if field:
            payload["field"] = field
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
