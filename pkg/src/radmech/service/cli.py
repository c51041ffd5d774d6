"""Operator command line.

Every verb reads one TOML config (``--config``), applies flag overrides, and
writes its artifacts under a run directory together with a snapshot of the
effective configuration.  Exit codes: 0 success, 2 configuration error,
1 runtime failure.

Verbs: ``train-sites``, ``train-ranker``, ``train-contrastive``, ``eval``,
``predict``, ``pathway``, ``serve``, and ``make-data`` (synthesizes the
desk-scale corpus and pathway fixture when no corpus download is present).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..chemgraph.parse import SmilesError, parse_smiles
from ..dataset import load_corpus
from ..neural import TrainConfig, load_model, save_model, write_curve_csv
from ..orbchain import RuleSet
from ..pathway import (
    ContextSpec,
    ScriptedModel,
    SearchConfig,
    Target,
    expand,
    load_benchmark,
    match_targets,
)
from ..predictor import (
    ContrastivePipeline,
    TwoStepPipeline,
    evaluate_end_to_end,
    evaluate_ranker,
    evaluate_sites,
)
from ..workflows import (
    train_contrastive_model,
    train_ranker_model,
    train_site_model,
)

log = logging.getLogger(__name__)


class ConfigError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _require(cfg: dict, dotted: str):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"missing config key: {dotted}")
        node = node[part]
    return node


def _get(cfg: dict, dotted: str, default=None):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _run_dir(args, cfg, verb: str) -> str:
    base = args.run_dir or _get(cfg, "output.run_dir", os.path.join("runs", verb))
    os.makedirs(base, exist_ok=True)
    return base


def _snapshot(run_dir: str, cfg: dict, args):
    payload = {"config": cfg, "overrides": {
        k: v for k, v in vars(args).items() if k != "func" and v is not None
    }}
    with open(os.path.join(run_dir, "config_snapshot.json"), "w") as fh:
        json.dump(payload, fh, indent=2, default=str)


def _records(args, cfg, splits=("train",)):
    data_dir = args.data or _require(cfg, "data.dir")
    corpus = load_corpus(data_dir)
    out = []
    for split in splits:
        out.extend(corpus.subset(split=split))
    if not out:
        raise ConfigError(f"no records for splits {splits} under {data_dir}")
    return corpus, out


def _train_config(args, cfg) -> TrainConfig:
    return TrainConfig(
        learning_rate=_get(cfg, "train.learning_rate", 0.001),
        batch_size=_get(cfg, "train.batch_size", 32),
        max_epochs=args.epochs or _get(cfg, "train.max_epochs", 60),
        patience=_get(cfg, "train.patience", 5),
        seed=args.seed if args.seed is not None else _get(cfg, "train.seed", 0),
    )


def _models_dir(args, cfg) -> str:
    return (args.models_dir or os.environ.get("RADMECH_MODELS_DIR")
            or _require(cfg, "models.dir"))


def cmd_train_sites(args, cfg):
    run_dir = _run_dir(args, cfg, "train-sites")
    _snapshot(run_dir, cfg, args)
    _, records = _records(args, cfg)
    model = train_site_model(records, _train_config(args, cfg))
    out = args.out or os.path.join(_models_dir(args, cfg), "site.npz")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    save_model(model, out)
    write_curve_csv(model.metadata, os.path.join(run_dir, "site_curve.csv"))
    print(f"site model -> {out}")
    return 0


def cmd_train_ranker(args, cfg):
    run_dir = _run_dir(args, cfg, "train-ranker")
    _snapshot(run_dir, cfg, args)
    _, records = _records(args, cfg)
    representation = args.representation or _get(cfg, "train.representation", "drfp")
    model = train_ranker_model(records, representation, _train_config(args, cfg),
                               k_max=_get(cfg, "train.ranker_negatives", 40))
    out = args.out or os.path.join(_models_dir(args, cfg), "ranker.npz")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    save_model(model, out)
    write_curve_csv(model.metadata, os.path.join(run_dir, "ranker_curve.csv"))
    print(f"ranker model ({representation}) -> {out}")
    return 0


def cmd_train_contrastive(args, cfg):
    run_dir = _run_dir(args, cfg, "train-contrastive")
    _snapshot(run_dir, cfg, args)
    _, records = _records(args, cfg)
    model = train_contrastive_model(
        records, _train_config(args, cfg),
        per_type_max=_get(cfg, "train.contrastive_negatives", 15),
    )
    out = args.out or os.path.join(_models_dir(args, cfg), "contrastive.npz")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    save_model(model, out)
    write_curve_csv(model.metadata, os.path.join(run_dir, "contrastive_curve.csv"))
    print(f"contrastive model -> {out}")
    return 0


def _load_pipeline(name: str, models_dir: str, k_atoms: int = 10,
                   rules=None):
    if name == "two_step":
        return TwoStepPipeline(
            load_model(os.path.join(models_dir, "site.npz")),
            load_model(os.path.join(models_dir, "ranker.npz")),
            k_atoms=k_atoms, rules=rules,
        )
    if name == "contrastive":
        return ContrastivePipeline(
            load_model(os.path.join(models_dir, "contrastive.npz")), rules=rules,
        )
    raise ConfigError(f"unknown pipeline {name!r}")


def cmd_eval(args, cfg):
    run_dir = _run_dir(args, cfg, "eval")
    _snapshot(run_dir, cfg, args)
    split_map = {
        "core-test": ("core", "test"), "specific-test": ("specific", "test"),
        "combined-test": (None, "test"), "combined-train": (None, "train"),
    }
    if args.split not in split_map:
        raise ConfigError(f"unknown split {args.split!r}")
    category, split = split_map[args.split]
    corpus, _ = _records(args, cfg, splits=("train", "test"))
    records = corpus.subset(category=category, split=split)
    models_dir = _models_dir(args, cfg)
    if args.pipeline == "sites":
        report = evaluate_sites(
            load_model(os.path.join(models_dir, "site.npz")), records,
            ns=(2, 3, 5, 10),
        )
    elif args.pipeline == "ranker":
        report = evaluate_ranker(
            load_model(os.path.join(models_dir, "ranker.npz")), records,
        )
    else:
        report = evaluate_end_to_end(
            _load_pipeline(args.pipeline, models_dir), records,
        )
    out = os.path.join(run_dir, f"eval_{args.pipeline}_{args.split}.json")
    with open(out, "w") as fh:
        fh.write(report.to_json())
    csv_path = os.path.join(run_dir, f"eval_{args.pipeline}_{args.split}_buckets.csv")
    with open(csv_path, "w") as fh:
        fh.write(report.bucket_csv())
    print(report.to_json())
    print(f"report -> {out}")
    return 0


def cmd_predict(args, cfg):
    models_dir = _models_dir(args, cfg)
    rules = RuleSet() if not args.no_rules else None
    pipe = _load_pipeline(args.pipeline, models_dir, k_atoms=args.k_atoms,
                          rules=rules)
    try:
        ms = parse_smiles(args.reactants).with_maps()
    except SmilesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    predictions = pipe.predict(ms, top_n=args.top_n)
    if not predictions:
        print("no candidate mechanisms", file=sys.stderr)
        return 1
    for p in predictions:
        print(f"{p.rank:2d}  {p.score:8.4f}  {p.step.to_line()}")
    return 0


def cmd_pathway(args, cfg):
    run_dir = _run_dir(args, cfg, "pathway")
    _snapshot(run_dir, cfg, args)
    if args.fixture:
        from ..pathway import run_benchmark_case

        cases = load_benchmark(args.fixture)
        recovered = 0
        rows = []
        model = None
        if not args.oracle:
            model = _load_pipeline(args.pipeline, _models_dir(args, cfg))
        for ci, case in enumerate(cases):
            case_model = ScriptedModel(case.oracle_steps) if args.oracle else model
            ok, search = run_benchmark_case(
                case, case_model, breadth=args.breadth,
                score_threshold=args.threshold,
                apply_rules=not args.no_rules,
            )
            recovered += ok
            rows.append({"case": ci, "depth": case.depth, "recovered": bool(ok),
                         "nodes": search.result.size})
            print(f"case {ci:3d} depth {case.depth}: "
                  f"{'hit' if ok else 'miss'} ({search.result.size} nodes)")
        rate = 100.0 * recovered / len(cases) if cases else 0.0
        summary = {"cases": len(cases), "recovered": recovered, "rate_pct": rate,
                   "model": "oracle" if args.oracle else args.pipeline,
                   "rows": rows}
        out = os.path.join(run_dir, "pathway_summary.json")
        with open(out, "w") as fh:
            json.dump(summary, fh, indent=2)
        print(f"recovery: {recovered}/{len(cases)} ({rate:.1f}%) -> {out}")
        return 0
    # direct search mode
    if not args.reactants:
        raise ConfigError("pathway needs --fixture or --reactants")
    model = _load_pipeline(args.pipeline, _models_dir(args, cfg))
    targets = tuple(Target.structure(t) for t in (args.target or []))
    context = tuple(ContextSpec(c) for c in (args.context or []))
    search_cfg = SearchConfig(depth=args.depth, breadth=args.breadth,
                              score_threshold=args.threshold,
                              apply_rules=not args.no_rules)
    search = expand(parse_smiles(args.reactants), search_cfg, context, model)
    hits = match_targets(search, targets)
    print(f"tree: {search.result.size} nodes, {len(hits)} hit(s)")
    for h in hits:
        print(f"  {h.target.label} at node {h.node_id}: {h.molecule}")
    return 0


def cmd_serve(args, cfg):
    import uvicorn

    from .app import create_app

    models_dir = _models_dir(args, cfg)
    app = create_app(models_dir=models_dir,
                     ui_dir=args.ui_dir or _get(cfg, "serve.ui_dir"))
    port = args.port or int(os.environ.get("RADMECH_PORT",
                                           _get(cfg, "serve.port", 8000)))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_make_data(args, cfg):
    from ..synth import SynthConfig, build_pathway_cases, make_corpus_files

    out = args.out or _get(cfg, "data.dir", "data/synthetic")
    seed = args.seed if args.seed is not None else 7
    n = args.n_records
    synth_cfg = SynthConfig(
        n_core_train=n, n_core_test=max(20, n // 5),
        n_specific_train=n, n_specific_test=max(20, n // 5), seed=seed,
    )
    make_corpus_files(out, synth_cfg)
    fixture = os.path.join(out, "pathway_cases.jsonl")
    n_cases = build_pathway_cases(fixture, n_cases=args.n_cases, seed=seed + 1)
    print(f"corpus -> {out}")
    print(f"pathway fixture ({n_cases} cases) -> {fixture}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radmech",
        description="mechanistic radical reaction predictor",
    )
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--run-dir", help="artifact directory for this run")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, models=True, data=False):
        if models:
            p.add_argument("--models-dir", help="directory of model files")
        if data:
            p.add_argument("--data", help="corpus directory")
            p.add_argument("--seed", type=int)
            p.add_argument("--epochs", type=int)

    p = sub.add_parser("train-sites", help="train the reactive-site classifier")
    common(p, data=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_sites)

    p = sub.add_parser("train-ranker", help="train the plausibility ranker")
    common(p, data=True)
    p.add_argument("--out")
    p.add_argument("--representation", choices=["drfp", "predefined"])
    p.set_defaults(func=cmd_train_ranker)

    p = sub.add_parser("train-contrastive", help="train the pair scorer")
    common(p, data=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_contrastive)

    p = sub.add_parser("eval", help="run an evaluation protocol")
    common(p, data=True)
    p.add_argument("--pipeline", required=True,
                   choices=["sites", "ranker", "two_step", "contrastive"])
    p.add_argument("--split", default="combined-test",
                   choices=["core-test", "specific-test", "combined-test",
                            "combined-train"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="rank mechanisms for reactants")
    common(p)
    p.add_argument("--reactants", required=True)
    p.add_argument("--pipeline", default="two_step",
                   choices=["two_step", "contrastive"])
    p.add_argument("--top-n", type=int, default=10, dest="top_n")
    p.add_argument("--k-atoms", type=int, default=10, dest="k_atoms")
    p.add_argument("--no-rules", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pathway", help="expand and search a pathway tree")
    common(p)
    p.add_argument("--fixture", help="benchmark JSONL file")
    p.add_argument("--oracle", action="store_true",
                   help="replay recorded steps instead of a trained model")
    p.add_argument("--pipeline", default="contrastive",
                   choices=["two_step", "contrastive"])
    p.add_argument("--reactants")
    p.add_argument("--target", action="append")
    p.add_argument("--context", action="append")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--breadth", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--no-rules", action="store_true")
    p.set_defaults(func=cmd_pathway)

    p = sub.add_parser("serve", help="run the HTTP service")
    common(p)
    p.add_argument("--port", type=int)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", dest="ui_dir",
                   help="serve a built frontend at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("make-data", help="generate the synthetic corpus")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-records", type=int, default=220)
    p.add_argument("--n-cases", type=int, default=24)
    p.set_defaults(func=cmd_make_data)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures exit 1 with the message
        if args.verbose:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
