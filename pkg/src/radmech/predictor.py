"""Inference pipelines and the evaluation harness.

Two pipelines produce ranked mechanistic steps from a reactant set:

* two-step: a reactive-site classifier scores every atom, candidate
  mechanisms are enumerated over the top-k atoms, and a Siamese ranker
  orders them by plausibility.
* contrastive: a pair scorer ranks all ordered atom pairs directly and the
  top pairs are expanded into their mechanisms, skipping pairs with no
  admissible orbital interaction.

The harness reproduces the top-N protocols: reactive-site identification
(both true atoms within the top N scored atoms), plausibility ranking (true
step within the top N ranked candidates), and full-pipeline recovery with
per-category and per-size breakdowns plus a CSV export.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .chemgraph.model import MoleculeSet
from .orbchain import (
    MechanisticStep,
    NoReactivePairError,
    RuleSet,
    check_rules,
    enumerate_candidates,
)
from .dataset import sample_ranker_negatives, true_step
from .featurize import descriptor_matrix, drfp, reaction_vector
from .neural import (
    ContrastiveModel,
    TrainedModel,
    forward_batch,
    sigmoid,
)

log = logging.getLogger(__name__)

DEFAULT_NS = (1, 2, 3, 5, 10)
SIZE_BUCKETS = ((0, 10), (11, 20), (21, 30), (31, 10 ** 9))


class PipelineError(ValueError):
    pass


def _squash(z: np.ndarray) -> np.ndarray:
    """Logistic squashed into the open interval despite float saturation."""
    return np.clip(sigmoid(z), 1e-12, 1.0 - 1e-12)


@dataclass(frozen=True)
class Prediction:
    step: MechanisticStep
    rank: int
    score: float
    pipeline: str


def _ranked(steps_scores: list, pipeline: str, top_n: int) -> list:
    """Sort by score (ties by canonical step string) and cut to top_n."""
    ordered = sorted(
        steps_scores,
        key=lambda t: (-t[1], t[0].products_key, t[0].arrows_key),
    )
    out = []
    for rank, (step, score) in enumerate(ordered[:top_n], start=1):
        out.append(Prediction(step.with_score(score), rank, float(score), pipeline))
    return out


def _variant_of(model: TrainedModel) -> str:
    return model.metadata.get("feature_variant", "")


class TwoStepPipeline:
    """Reactive-site filtering followed by plausibility ranking."""

    name = "two_step"

    def __init__(self, site_model: TrainedModel, ranker_model: TrainedModel,
                 k_atoms: int = 10, rules: Optional[RuleSet] = None):
        if k_atoms < 2:
            raise PipelineError("k_atoms must be at least 2")
        if _variant_of(site_model) != "twostep_800":
            raise PipelineError(
                f"site model variant {_variant_of(site_model)!r} is not twostep_800"
            )
        if _variant_of(ranker_model) not in ("drfp_2048", "predefined_3200"):
            raise PipelineError(
                f"ranker model variant {_variant_of(ranker_model)!r} unknown"
            )
        self.site_model = site_model
        self.ranker_model = ranker_model
        self.k_atoms = k_atoms
        self.rules = rules

    def site_scores(self, ms: MoleculeSet) -> list:
        refs = [ref for ref, _ in ms.atoms()]
        X = descriptor_matrix(ms, refs, "twostep_800")
        scores = forward_batch(self.site_model, X)
        return list(zip(refs, scores))

    def rank_steps(self, steps: list) -> list:
        if _variant_of(self.ranker_model) == "drfp_2048":
            X = np.stack([drfp(s).bits.astype(np.float64) for s in steps])
        else:
            X = np.stack([reaction_vector(s).values for s in steps])
        # plausibility displayed on (0, 1); monotone, so ranking is unchanged
        return list(_squash(forward_batch(self.ranker_model, X)))

    def predict(self, ms: MoleculeSet, top_n: int = 10) -> list:
        mapped = ms.with_maps()
        scored = self.site_scores(mapped)
        scored.sort(key=lambda t: (-t[1], t[0]))
        kept = {ref for ref, _ in scored[: self.k_atoms]}
        candidates = enumerate_candidates(mapped, allowed_atoms=kept)
        if self.rules is not None:
            candidates = [c for c in candidates if check_rules(c, self.rules).passed]
        if not candidates:
            log.info("two-step pipeline found no candidates")
            return []
        scores = self.rank_steps(candidates)
        return _ranked(list(zip(candidates, scores)), self.name, top_n)


class ContrastivePipeline:
    """Direct ranking of ordered reactive-atom pairs."""

    name = "contrastive"

    def __init__(self, model: ContrastiveModel, rules: Optional[RuleSet] = None):
        self.model = model
        self.rules = rules

    def pair_scores(self, ms: MoleculeSet) -> tuple:
        refs = [ref for ref, _ in ms.atoms()]
        X = descriptor_matrix(ms, refs, "contrastive_140")
        f_vals = forward_batch(self.model.f, X)
        g_vals = forward_batch(self.model.g, X)
        scores = _squash(np.outer(f_vals, g_vals))
        return refs, scores

    def predict(self, ms: MoleculeSet, top_n: int = 10) -> list:
        mapped = ms.with_maps()
        refs, scores = self.pair_scores(mapped)
        maps = [mapped.atom(r).map_number for r in refs]
        order = []
        for i in range(len(refs)):
            for j in range(len(refs)):
                order.append((float(scores[i, j]), i, j))
        order.sort(key=lambda t: (-t[0], maps[t[1]], maps[t[2]]))
        found = {}
        cand_cache = {}
        for score, i, j in order:
            if len(found) >= top_n and score < min(v[1] for v in found.values()):
                break
            key = frozenset((refs[i], refs[j]))
            if key not in cand_cache:
                cand_cache[key] = enumerate_candidates(mapped, allowed_atoms=set(key))
            for step in cand_cache[key]:
                if step.pair_atoms != (maps[i], maps[j]):
                    continue
                if self.rules is not None and not check_rules(step, self.rules).passed:
                    continue
                if step.step_key not in found:
                    found[step.step_key] = (step, score)
        return _ranked(list(found.values()), self.name, top_n)


def predict_two_step(ms: MoleculeSet, site_model: TrainedModel,
                     ranker_model: TrainedModel, k_atoms: int = 10,
                     top_n: int = 10) -> list:
    return TwoStepPipeline(site_model, ranker_model, k_atoms).predict(ms, top_n)


def predict_contrastive(ms: MoleculeSet, model: ContrastiveModel,
                        top_n: int = 10) -> list:
    return ContrastivePipeline(model).predict(ms, top_n)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalReport:
    pipeline: str
    ns: tuple
    overall: dict
    by_category: dict
    by_bucket: dict
    n_records: int
    n_skipped: int
    mean_time_s: float
    bucket_counts: dict = field(default_factory=dict)

    def accuracy(self, n: int) -> float:
        return self.overall[n]

    def is_monotone(self) -> bool:
        ordered = [self.overall[n] for n in sorted(self.ns)]
        return all(a <= b + 1e-9 for a, b in zip(ordered, ordered[1:]))

    def to_json(self) -> str:
        return json.dumps({
            "pipeline": self.pipeline,
            "ns": list(self.ns),
            "overall": {str(k): v for k, v in self.overall.items()},
            "by_category": {
                c: {str(k): v for k, v in row.items()}
                for c, row in self.by_category.items()
            },
            "by_bucket": {
                b: {str(k): v for k, v in row.items()}
                for b, row in self.by_bucket.items()
            },
            "bucket_counts": self.bucket_counts,
            "n_records": self.n_records,
            "n_skipped": self.n_skipped,
            "mean_time_s": self.mean_time_s,
        }, indent=2)

    def bucket_csv(self) -> str:
        lines = ["bucket,count," + ",".join(f"top{n}" for n in self.ns)]
        for label in self.by_bucket:
            row = self.by_bucket[label]
            cells = [label, str(self.bucket_counts.get(label, 0))]
            cells += [f"{row[n]:.2f}" for n in self.ns]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def bucket_label(heavy_atoms: int) -> str:
    for lo, hi in SIZE_BUCKETS:
        if lo <= heavy_atoms <= hi:
            if hi >= 10 ** 9:
                return f">{lo - 1}"
            return f"<={hi}" if lo == 0 else f"{lo}-{hi}"
    return "?"


def _aggregate(successes: list, ns: tuple) -> dict:
    if not successes:
        return {n: 0.0 for n in ns}
    return {
        n: 100.0 * sum(1 for s in successes if s.get(n)) / len(successes)
        for n in ns
    }


def _build_report(pipeline: str, ns: tuple, rows: list, skipped: int,
                  times: list) -> EvalReport:
    by_cat = {}
    by_bucket = {}
    bucket_counts = {}
    for row in rows:
        by_cat.setdefault(row["category"], []).append(row)
        by_bucket.setdefault(row["bucket"], []).append(row)
    for label in by_bucket:
        bucket_counts[label] = len(by_bucket[label])
    report = EvalReport(
        pipeline=pipeline,
        ns=ns,
        overall=_aggregate(rows, ns),
        by_category={c: _aggregate(v, ns) for c, v in sorted(by_cat.items())},
        by_bucket={
            b: _aggregate(by_bucket[b], ns)
            for b in sorted(by_bucket, key=_bucket_sort_key)
        },
        n_records=len(rows),
        n_skipped=skipped,
        mean_time_s=float(np.mean(times)) if times else 0.0,
        bucket_counts=bucket_counts,
    )
    return report


def _bucket_sort_key(label: str) -> int:
    if label.startswith("<="):
        return int(label[2:])
    if label.startswith(">"):
        return int(label[1:]) + 1
    return int(label.split("-")[0])


def evaluate_sites(model: TrainedModel, records: Iterable,
                   ns: tuple = DEFAULT_NS) -> EvalReport:
    """Success at N iff both true reactive atoms are among the N highest
    scored atoms of the record."""
    rows, times = [], []
    skipped = 0
    variant = _variant_of(model) or "twostep_800"
    for rec in records:
        try:
            truth = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        t0 = time.perf_counter()
        refs = [ref for ref, a in rec.reactants.atoms() if a.map_number is not None]
        X = descriptor_matrix(rec.reactants, refs, variant)
        scores = forward_batch(model, X)
        times.append(time.perf_counter() - t0)
        ranked_maps = [
            rec.reactants.atom(r).map_number
            for r, _ in sorted(zip(refs, scores), key=lambda t: (-t[1], t[0]))
        ]
        want = set(truth.site_atoms)
        row = {
            "category": rec.category or "core",
            "bucket": bucket_label(rec.reactants.heavy_atom_count),
        }
        for n in ns:
            row[n] = want <= set(ranked_maps[:n])
        rows.append(row)
    return _build_report("sites", ns, rows, skipped, times)


def evaluate_ranker(model: TrainedModel, records: Iterable,
                    ns: tuple = DEFAULT_NS, distractors: int = 40,
                    seed: int = 0) -> EvalReport:
    """Candidates come from true-reactive-atom enumeration plus sampled
    distractors; success at N iff the true step ranks within the top N."""
    rows, times = [], []
    skipped = 0
    variant = _variant_of(model)
    for ri, rec in enumerate(records):
        try:
            truth = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        sites = {rec.reactants.map_to_ref[m] for m in truth.site_atoms}
        pool = {s.step_key: s for s in enumerate_candidates(rec.reactants, sites)}
        for neg in sample_ranker_negatives(rec, distractors, seed + ri):
            pool.setdefault(neg.step_key, neg)
        pool.setdefault(truth.step_key, truth)
        steps = sorted(pool.values(), key=lambda s: (s.products_key, s.arrows_key))
        t0 = time.perf_counter()
        if variant == "drfp_2048":
            X = np.stack([drfp(s).bits.astype(np.float64) for s in steps])
        else:
            X = np.stack([reaction_vector(s).values for s in steps])
        scores = forward_batch(model, X)
        times.append(time.perf_counter() - t0)
        ranked = sorted(
            zip(steps, scores),
            key=lambda t: (-t[1], t[0].products_key, t[0].arrows_key),
        )
        row = {
            "category": rec.category or "core",
            "bucket": bucket_label(rec.reactants.heavy_atom_count),
        }
        for n in ns:
            row[n] = any(s.step_key == truth.step_key for s, _ in ranked[:n])
        rows.append(row)
    return _build_report("ranker", ns, rows, skipped, times)


def evaluate_end_to_end(pipeline, records: Iterable,
                        ns: tuple = DEFAULT_NS) -> EvalReport:
    """Full-pipeline top-N recovery with category and size breakdowns."""
    rows, times = [], []
    skipped = 0
    top = max(ns)
    for rec in records:
        try:
            truth = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        t0 = time.perf_counter()
        predictions = pipeline.predict(rec.reactants, top_n=top)
        times.append(time.perf_counter() - t0)
        keys = [p.step.step_key for p in predictions]
        row = {
            "category": rec.category or "core",
            "bucket": bucket_label(rec.reactants.heavy_atom_count),
        }
        for n in ns:
            row[n] = truth.step_key in keys[:n]
        rows.append(row)
    return _build_report(pipeline.name, ns, rows, skipped, times)
