"""Command line entry point.

    fashionrec --config toy.ini ingest
    fashionrec --config toy.ini featurize
    fashionrec --config toy.ini codebook
    fashionrec --config toy.ini train --model all
    fashionrec --config toy.ini recommend
    fashionrec --config toy.ini retrieve --topk 10
    fashionrec --config toy.ini evaluate --ratings ratings.csv
    fashionrec --config toy.ini report

Every run prints one JSON summary line on stdout. Exit codes: 0 success,
1 usage error, 2 missing artifact, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from fashionrec import pipeline
from fashionrec._io import atomic_write_text
from fashionrec.pipeline import MissingArtifact, PipelineConfig

EXIT_OK, EXIT_USAGE, EXIT_MISSING, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fashionrec", description="Complementary clothing recommendation pipeline")
    p.add_argument("--config", help="INI-style configuration file")
    p.add_argument("--manifest", help="corpus manifest (JSONL)")
    p.add_argument("--inventory", help="inventory manifest (JSONL)")
    p.add_argument("--work", help="work directory for artifacts")
    p.add_argument("--metric", choices=["l1", "l2", "kl"])
    p.add_argument("--seed", type=int, help="seed for every stage that takes one")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("ingest", help="read, clean and split the manifest")
    f = sub.add_parser("featurize", help="compute part descriptors")
    f.add_argument("--descriptor", choices=["hsv", "bow"])
    c = sub.add_parser("codebook", help="train the descriptor (or patch) codebook")
    c.add_argument("--target", choices=["descriptor", "patch"], default="descriptor")
    c.add_argument("-K", type=int, dest="K")
    t = sub.add_parser("train", help="train a recommender")
    t.add_argument("--model", required=True, choices=["pr", "cnnc", "gmm", "mcl", "tar", "hybrid", "all"])
    r = sub.add_parser("recommend", help="transform queries into hidden-part descriptors")
    r.add_argument("--image", help="single query image id (default: the whole test split)")
    r.add_argument("--hidden", help="part to predict")
    r.add_argument("--model", action="append", choices=["pr", "cnnc", "gmm", "mcl", "tar", "hybrid"],
                   help="restrict to these models (repeatable)")
    q = sub.add_parser("retrieve", help="rank inventory items for each recommendation")
    q.add_argument("--topk", type=int)
    e = sub.add_parser("evaluate", help="score algorithms from crowd ratings")
    e.add_argument("--ratings")
    sub.add_parser("report", help="HTML gallery of retrievals")
    m = sub.add_parser("make-toy", help="write a synthetic corpus, inventory and config")
    m.add_argument("out_dir")
    m.add_argument("-n", type=int, default=600)
    m.add_argument("--n-inventory", type=int, default=300)
    return p


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config)
    if args.manifest:
        cfg.manifest = str(Path(args.manifest).resolve())
    if args.inventory:
        cfg.inventory = str(Path(args.inventory).resolve())
    if args.work:
        cfg.work = str(Path(args.work).resolve())
    if args.metric:
        cfg.metric = args.metric
    if args.seed is not None:
        cfg.split_seed = cfg.feature_seed = cfg.model_seed = cfg.report_seed = args.seed
    if getattr(args, "descriptor", None):
        cfg.descriptor = args.descriptor
    if getattr(args, "K", None):
        if args.target == "patch":
            cfg.patch_K = args.K
        else:
            cfg.K = args.K
    if getattr(args, "topk", None):
        cfg.topk = args.topk
    cfg.validate()
    return cfg


TOY_CONFIG = """\
[paths]
manifest = corpus.jsonl
inventory = inventory.jsonl
work = work

[corpus]
parts = top, bottom
n_train = {n_train}
n_test = {n_test}
seed = 0

[features]
descriptor = hsv
K = 16

[models]
hidden = top
cnnc_k = 5
gmm_M = 8
mcl_T = 4
eta = 0.01
tau = 0.5
tar_mode = uniform

[retrieval]
metric = l1
topk = 10
"""


def _make_toy(args) -> dict:
    from fashionrec.synthetic import make_toy_corpus

    paths = make_toy_corpus(args.out_dir, n=args.n, n_inventory=args.n_inventory, seed=args.seed or 0)
    n_test = max(1, args.n // 6)
    cfg_path = Path(args.out_dir) / "toy.ini"
    atomic_write_text(cfg_path, TOY_CONFIG.format(n_train=args.n - n_test, n_test=n_test))
    return {"config": str(cfg_path), **{k: str(v) for k, v in paths.items()}}


def run(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"fashionrec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    summary = {"command": args.command}
    try:
        if args.command == "make-toy":
            result = _make_toy(args)
        else:
            cfg = _config(args)
            cmd = args.command
            if cmd == "ingest":
                result = pipeline.run_ingest(cfg)
            elif cmd == "featurize":
                result = pipeline.run_featurize(cfg)
            elif cmd == "codebook":
                result = pipeline.run_codebook(cfg, args.target)
            elif cmd == "train":
                result = pipeline.run_train(cfg, args.model)
            elif cmd == "recommend":
                result = pipeline.run_recommend(cfg, args.image, args.hidden, args.model)
            elif cmd == "retrieve":
                result = pipeline.run_retrieve(cfg)
            elif cmd == "evaluate":
                result = pipeline.run_evaluate(cfg, args.ratings)
            else:
                result = pipeline.run_report(cfg)
        code = EXIT_OK
        summary.update(status="ok", result=result)
    except MissingArtifact as exc:
        code = EXIT_MISSING
        summary.update(status="missing_artifact", artifact=exc.name, path=exc.path, error=str(exc))
    except (ValueError, KeyError, OSError) as exc:
        code = EXIT_DATA
        summary.update(status="data_error", error=f"{type(exc).__name__}: {exc}")
    summary["elapsed_s"] = round(time.perf_counter() - started, 3)
    print(json.dumps(summary, sort_keys=True, default=str))
    if code:
        print(f"fashionrec: {summary.get('error')}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
