#!/usr/bin/env python3
"""Build a small synthetic corpus and train the three demo models.

Produces everything `radmech serve` needs in a couple of minutes:

    python scripts/make_demo_models.py --out-dir demo

writes demo/data/{core,specific}_{train,test}.txt, the pathway fixture, and
demo/models/{site,ranker,contrastive}.npz.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from radmech.dataset import load_corpus
from radmech.neural import TrainConfig, save_model
from radmech.synth import SynthConfig, build_pathway_cases, make_corpus_files
from radmech.workflows import (
    train_contrastive_model,
    train_ranker_model,
    train_site_model,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo")
    parser.add_argument("--n-records", type=int, default=110)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--quick", action="store_true",
                        help="tiny corpus and few epochs (CI-sized)")
    args = parser.parse_args()

    if args.quick:
        args.n_records = 40
        args.epochs = 8

    data_dir = os.path.join(args.out_dir, "data")
    models_dir = os.path.join(args.out_dir, "models")
    os.makedirs(models_dir, exist_ok=True)

    if not os.path.exists(os.path.join(data_dir, "core_train.txt")):
        make_corpus_files(data_dir, SynthConfig(
            n_core_train=args.n_records, n_core_test=max(15, args.n_records // 4),
            n_specific_train=args.n_records,
            n_specific_test=max(15, args.n_records // 4),
            seed=args.seed,
        ))
        build_pathway_cases(os.path.join(data_dir, "pathway_cases.jsonl"),
                            n_cases=24, seed=args.seed + 4)
    corpus = load_corpus(data_dir)
    train = corpus.subset(split="train")
    print(corpus.describe())

    cfg = TrainConfig(max_epochs=args.epochs, seed=0)
    print("training site classifier ...")
    save_model(train_site_model(train, cfg),
               os.path.join(models_dir, "site.npz"))
    print("training plausibility ranker ...")
    save_model(
        train_ranker_model(train, "drfp",
                           TrainConfig(max_epochs=max(5, args.epochs // 2), seed=0),
                           k_max=40),
        os.path.join(models_dir, "ranker.npz"),
    )
    print("training contrastive pair scorer ...")
    save_model(train_contrastive_model(train, cfg),
               os.path.join(models_dir, "contrastive.npz"))
    print(f"models -> {models_dir}")
    print(f"serve with: radmech serve --models-dir {models_dir}")


if __name__ == "__main__":
    main()
