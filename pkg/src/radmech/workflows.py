"""End-to-end training workflows shared by the CLI, scripts, and tests."""

from __future__ import annotations

import logging
from typing import Iterable, Optional

from .dataset import (
    build_contrastive_arrays,
    build_ranker_arrays,
    build_site_arrays,
    dataset_hash,
)
from .neural import (
    ContrastiveModel,
    NetworkSpec,
    TrainConfig,
    TrainedModel,
    train_classifier,
    train_contrastive,
    train_siamese,
)

log = logging.getLogger(__name__)

SITE_SPEC = NetworkSpec((512, 256, 1), "gelu", 0.0, 5e-5)
RANKER_SPEC_DRFP = NetworkSpec((400, 200, 1), "gelu", 0.5, 0.0)
RANKER_SPEC_PREDEFINED = NetworkSpec((512, 256, 1), "gelu", 0.5, 0.0)
CONTRASTIVE_SPEC = NetworkSpec((128, 64, 1), "gelu", 0.5, 0.0)


def train_site_model(records: Iterable, config: TrainConfig = TrainConfig(),
                     spec: NetworkSpec = SITE_SPEC) -> TrainedModel:
    records = list(records)
    X, y, skipped = build_site_arrays(records, "twostep_800")
    log.info("site training: %d atoms (%d records skipped)", len(X), skipped)
    model = train_classifier(X, y, spec, config, metadata={
        "feature_variant": "twostep_800",
        "dataset_hash": dataset_hash(records),
        "config": config.__dict__,
    })
    return model


def train_ranker_model(records: Iterable, representation: str = "drfp",
                       config: TrainConfig = TrainConfig(),
                       k_max: int = 40,
                       spec: Optional[NetworkSpec] = None) -> TrainedModel:
    records = list(records)
    if spec is None:
        spec = RANKER_SPEC_DRFP if representation == "drfp" else RANKER_SPEC_PREDEFINED
    Xp, Xm, skipped = build_ranker_arrays(records, representation, k_max,
                                          seed=config.seed)
    log.info("ranker training: %d pairs (%d records skipped)", len(Xp), skipped)
    variant = "drfp_2048" if representation == "drfp" else "predefined_3200"
    model = train_siamese(Xp, Xm, spec, config, metadata={
        "feature_variant": variant,
        "dataset_hash": dataset_hash(records),
        "config": config.__dict__,
    })
    return model


def train_contrastive_model(records: Iterable,
                            config: TrainConfig = TrainConfig(),
                            per_type_max: int = 15,
                            spec: NetworkSpec = CONTRASTIVE_SPEC) -> ContrastiveModel:
    records = list(records)
    P1, P2, N1, N2, skipped = build_contrastive_arrays(
        records, per_type_max, seed=config.seed
    )
    log.info("contrastive training: %d tuples (%d records skipped)",
             len(P1), skipped)
    model = train_contrastive(P1, P2, N1, N2, spec, config, metadata={
        "feature_variant": "contrastive_140",
        "dataset_hash": dataset_hash(records),
        "config": config.__dict__,
    })
    return model
