"""Corpus ingestion, supervised label derivation, and negative sampling.

A corpus directory holds one reaction-line file per category and split
(``core_train.txt``, ``core_test.txt``, ``specific_train.txt``,
``specific_test.txt``).  An optional adapter callable rewrites each raw line
before parsing, which is where a native export format of an external
database gets mapped onto the line grammar of this package.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .chemgraph.reaction import ReactionRecord, format_reaction, parse_reaction
from .chemgraph.model import ChemGraphError
from .orbchain import (
    MechanisticStep,
    NoReactivePairError,
    apply_interaction,
    enumerate_candidates,
    infer_reactive_pair,
)

log = logging.getLogger(__name__)

SPLIT_FILES = {
    ("core", "train"): "core_train.txt",
    ("core", "test"): "core_test.txt",
    ("specific", "train"): "specific_train.txt",
    ("specific", "test"): "specific_test.txt",
}


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class ParseFailure:
    file: str
    line_number: int
    message: str


@dataclass
class Corpus:
    records: tuple
    failures: tuple = ()

    def subset(self, category: Optional[str] = None,
               split: Optional[str] = None) -> list:
        out = []
        for rec in self.records:
            if category not in (None, "combined") and rec.category != category:
                continue
            if split is not None and rec.split != split:
                continue
            out.append(rec)
        return out

    @property
    def counts(self) -> dict:
        table = {}
        for rec in self.records:
            key = (rec.category or "core", rec.split or "train")
            table[key] = table.get(key, 0) + 1
        return table

    def describe(self) -> str:
        lines = []
        totals = {"train": 0, "test": 0}
        for cat in ("core", "specific"):
            row = [self.counts.get((cat, s), 0) for s in ("train", "test")]
            totals["train"] += row[0]
            totals["test"] += row[1]
            lines.append(f"{cat}: train={row[0]} test={row[1]}")
        lines.append(f"combined: train={totals['train']} test={totals['test']}")
        if self.failures:
            lines.append(f"parse failures: {len(self.failures)}")
        return "\n".join(lines)


def _load_lines(path: str, category: str, split: str,
                adapter: Optional[Callable]) -> tuple:
    records, failures = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            try:
                line = adapter(raw) if adapter else raw
                rec = parse_reaction(line)
            except ChemGraphError as exc:
                failures.append(ParseFailure(os.path.basename(path), lineno, str(exc)))
                continue
            records.append(ReactionRecord(
                rec.reactants, rec.products, rec.arrows,
                rec.category or category, split,
            ))
    return records, failures


def load_corpus(path: str, adapter: Optional[Callable] = None) -> Corpus:
    """Load a corpus directory (or a single reaction-line file).

    Parse failures are collected with their line numbers, not fatal; a file
    in which every line fails raises.
    """
    records, failures = [], []
    if os.path.isdir(path):
        missing = [f for f in SPLIT_FILES.values()
                   if not os.path.exists(os.path.join(path, f))]
        present = [kv for kv in SPLIT_FILES.items()
                   if os.path.exists(os.path.join(path, kv[1]))]
        if not present:
            raise DatasetError(
                f"no corpus files found under {path}; expected {sorted(missing)}"
            )
        if missing:
            log.warning("corpus files missing under %s: %s", path, missing)
        for (category, split), fname in present:
            recs, fails = _load_lines(
                os.path.join(path, fname), category, split, adapter
            )
            records.extend(recs)
            failures.extend(fails)
    elif os.path.exists(path):
        records, failures = _load_lines(path, "core", "train", adapter)
    else:
        raise DatasetError(f"missing dataset path {path}")
    if not records and failures:
        raise DatasetError(f"every line of {path} failed to parse")
    corpus = Corpus(tuple(records), tuple(failures))
    if not records:
        log.warning("loaded an empty corpus from %s", path)
    log.info("corpus loaded:\n%s", corpus.describe())
    return corpus


def dataset_hash(records: Iterable) -> str:
    digest = hashlib.sha256()
    for line in sorted(format_reaction(rec) for rec in records):
        digest.update(line.encode("utf8"))
        digest.update(b"\n")
    return digest.hexdigest()[:16]


def split_overlap(corpus: Corpus) -> list:
    """Canonical reaction strings present in both train and test."""
    def keyset(split):
        return {
            format_reaction(ReactionRecord(r.reactants, r.products, r.arrows))
            for r in corpus.subset(split=split)
        }
    return sorted(keyset("train") & keyset("test"))


# -- supervised labels --------------------------------------------------------


@dataclass(frozen=True)
class SiteLabel:
    record_index: int
    map_number: int
    label: int


@dataclass(frozen=True)
class AtomPairLabel:
    a_i: int
    a_j: int
    y: int


def true_step(rec: ReactionRecord) -> MechanisticStep:
    """The record's labeled step, realized through its inferred orbital pair."""
    pair = infer_reactive_pair(rec)
    return apply_interaction(rec.reactants, pair)


def derive_site_labels(records: Iterable) -> tuple:
    """Label every mapped reactant atom of every record; the two orbital
    center atoms are positive.  Returns (labels, skipped_count)."""
    labels = []
    skipped = 0
    for ri, rec in enumerate(records):
        try:
            step = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        positive = set(step.site_atoms)
        for _, atom in rec.reactants.atoms():
            if atom.map_number is None:
                continue
            labels.append(SiteLabel(
                ri, atom.map_number, 1 if atom.map_number in positive else 0
            ))
    if skipped:
        log.warning("site labeling skipped %d records without a consistent pair",
                    skipped)
    return labels, skipped


def sample_ranker_negatives(rec: ReactionRecord, k_max: int = 40,
                            seed: int = 0) -> list:
    """Up to `k_max` implausible steps over the record's reactants, drawn
    from orbital pairs other than the reactive one."""
    truth = true_step(rec)
    pool = [
        c for c in enumerate_candidates(rec.reactants)
        if c.step_key != truth.step_key
    ]
    if not pool:
        return []
    rng = np.random.default_rng(seed)
    if len(pool) <= k_max:
        return pool
    picks = rng.choice(len(pool), size=k_max, replace=False)
    return [pool[i] for i in sorted(picks)]


def sample_contrastive_negatives(rec: ReactionRecord, per_type_max: int = 15,
                                 seed: int = 0) -> list:
    """Corrupted atom pairs: (a'1, a*2), (a*1, a'2), and (a'1, a'2), at most
    `per_type_max` of each.  Corrupting atoms are drawn uniformly from mapped
    reactant atoms outside the positive pair."""
    truth = true_step(rec)
    a1, a2 = truth.pair_atoms
    pool = sorted(
        atom.map_number for _, atom in rec.reactants.atoms()
        if atom.map_number is not None and atom.map_number not in (a1, a2)
    )
    rng = np.random.default_rng(seed)
    out = []
    seen = {(a1, a2)}

    def draw_single(fixed_first: Optional[int], fixed_second: Optional[int]):
        candidates = []
        for p in pool:
            pair = (p, fixed_second) if fixed_second is not None else (fixed_first, p)
            if pair not in seen:
                candidates.append(pair)
        if not candidates:
            return
        k = min(per_type_max, len(candidates))
        for i in sorted(rng.choice(len(candidates), size=k, replace=False)):
            pair = candidates[i]
            seen.add(pair)
            out.append(AtomPairLabel(pair[0], pair[1], 0))

    draw_single(None, a2)          # (a'1, a*2)
    draw_single(a1, None)          # (a*1, a'2)
    both = [
        (p, q) for p in pool for q in pool if p != q and (p, q) not in seen
    ]
    if both:
        k = min(per_type_max, len(both))
        for i in sorted(rng.choice(len(both), size=k, replace=False)):
            pair = both[i]
            seen.add(pair)
            out.append(AtomPairLabel(pair[0], pair[1], 0))
    return out


LABEL_TSV_VERSION = 1


def export_site_labels_tsv(labels: Iterable, path: str):
    """Versioned TSV of (record id, atom map, label) rows."""
    with open(path, "w") as fh:
        fh.write(f"# site-labels v{LABEL_TSV_VERSION}\n")
        fh.write("record\tmap\tlabel\n")
        for label in labels:
            fh.write(f"{label.record_index}\t{label.map_number}\t{label.label}\n")


def load_site_labels_tsv(path: str) -> list:
    labels = []
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# site-labels v"):
            raise DatasetError(f"not a site-label file: {path}")
        version = int(header.rsplit("v", 1)[1])
        if version != LABEL_TSV_VERSION:
            raise DatasetError(f"unsupported site-label version {version}")
        fh.readline()  # column header
        for line in fh:
            record, map_number, label = line.split("\t")
            labels.append(SiteLabel(int(record), int(map_number), int(label)))
    return labels


# -- training-array assembly ---------------------------------------------------


def build_site_arrays(records: Iterable, variant: str = "twostep_800") -> tuple:
    """Descriptor matrix and 0/1 labels for every mapped reactant atom."""
    from .featurize import atom_descriptor  # deferred, avoids import cycle

    rows, labels = [], []
    skipped = 0
    for rec in records:
        try:
            step = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        positive = set(step.site_atoms)
        for ref, atom in rec.reactants.atoms():
            if atom.map_number is None:
                continue
            rows.append(atom_descriptor(rec.reactants, ref, variant).values)
            labels.append(1.0 if atom.map_number in positive else 0.0)
    if not rows:
        raise DatasetError("no usable records for site training")
    return np.stack(rows), np.asarray(labels), skipped


def build_ranker_arrays(records: Iterable, representation: str = "drfp",
                        k_max: int = 40, seed: int = 0) -> tuple:
    """Paired plausible/implausible feature rows for the Siamese ranker."""
    from .featurize import drfp, reaction_vector

    def featurize_step(step):
        if representation == "drfp":
            return drfp(step).bits.astype(np.float64)
        if representation == "predefined":
            return reaction_vector(step).values
        raise DatasetError(f"unknown reaction representation {representation!r}")

    plus, minus = [], []
    skipped = 0
    for ri, rec in enumerate(records):
        try:
            truth = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        negatives = sample_ranker_negatives(rec, k_max, seed + ri)
        if not negatives:
            skipped += 1
            continue
        tfeat = featurize_step(truth)
        for neg in negatives:
            plus.append(tfeat)
            minus.append(featurize_step(neg))
    if not plus:
        raise DatasetError("no usable records for ranker training")
    return np.stack(plus), np.stack(minus), skipped


def build_contrastive_arrays(records: Iterable, per_type_max: int = 15,
                             seed: int = 0,
                             variant: str = "contrastive_140") -> tuple:
    """Aligned (P1, P2, N1, N2) descriptor arrays for the pair scorer."""
    from .featurize import atom_descriptor

    P1, P2, N1, N2 = [], [], [], []
    skipped = 0
    for ri, rec in enumerate(records):
        try:
            truth = true_step(rec)
        except NoReactivePairError:
            skipped += 1
            continue
        negatives = sample_contrastive_negatives(rec, per_type_max, seed + ri)
        if not negatives:
            skipped += 1
            log.warning("record %d yields no contrastive negatives", ri)
            continue
        refs = rec.reactants.map_to_ref
        a1, a2 = truth.pair_atoms
        d1 = atom_descriptor(rec.reactants, refs[a1], variant).values
        d2 = atom_descriptor(rec.reactants, refs[a2], variant).values
        cache = {a1: d1, a2: d2}

        def desc(m):
            if m not in cache:
                cache[m] = atom_descriptor(rec.reactants, refs[m], variant).values
            return cache[m]

        for neg in negatives:
            P1.append(d1)
            P2.append(d2)
            N1.append(desc(neg.a_i))
            N2.append(desc(neg.a_j))
    if not P1:
        raise DatasetError("no usable records for contrastive training")
    return np.stack(P1), np.stack(P2), np.stack(N1), np.stack(N2), skipped
