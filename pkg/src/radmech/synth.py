"""Synthetic desk-scale corpus of radical elementary steps.

When the real training corpus is not present, the test and demo workflows
need labeled records whose "productive" step is decidable from local
structure.  This module samples reactant sets from two fragment pools
(textbook-style and atmospheric-style), enumerates their candidate
mechanisms, and marks as productive the candidate preferred by a fixed
hand-written plausibility heuristic: weak-bond homolysis, hydrogen
abstraction by electronegative radicals, anti-Markovnikov addition,
peroxy-forming recombination, and beta-scission toward conjugation.  The
heuristic is deterministic, so the generated labels are a learnable function
of the reactant graphs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chemgraph.model import MoleculeSet
from .chemgraph.parse import parse_smiles
from .chemgraph.canon import canonical_key, molecule_smiles
from .chemgraph.masses import molecular_mass
from .chemgraph.reaction import ReactionRecord, format_reaction
from .orbchain import MechanisticStep, enumerate_candidates

CORE_RADICALS = [
    "[Cl]", "[Br]", "[OH]", "[CH3]", "[CH2]C", "C[CH]C", "[O]O", "C[O]", "[H]",
    "[CH2]CC", "CC([CH2])C",
]
CORE_PARTNERS = [
    "ClCl", "BrBr", "OO", "C", "CC", "CCC", "CC(C)C", "C=C", "C=CC",
    "C=C(C)C", "CCO", "CO", "CC=O", "CC(=O)C", "C1CCCCC1", "C=CC=C",
    "CCCC", "CCC(C)C", "C(C)(C)C",
]
SPECIFIC_RADICALS = [
    "[OH]", "[O][O]", "[O]O", "C[O]", "CO[O]", "[N]=O", "[CH3]",
]
SPECIFIC_PARTNERS = [
    "C=C(C)C=C", "C=CC=C", "CC=CC", "O", "OO", "C=O", "CO", "CCO", "CC=O",
    "C=C(C)C", "CC(=C)C=C", "C=CCC=C", "CC(C)=O",
]


def _chain_smiles(rng: np.random.Generator, heavy: int) -> str:
    """A functionalized chain of roughly `heavy` heavy atoms.

    Branches, ethers, hydroxyls, halogens, and scattered double bonds break
    the symmetry of a bare alkane, so the candidate space genuinely grows
    with size instead of collapsing onto a few equivalent positions."""
    from .chemgraph.model import Atom, Bond, Molecule, smallest_capacity

    n = max(3, heavy)
    elements = ["C"] * n
    for i in range(2, n - 1):
        if rng.random() < 0.05:
            elements[i] = "O"  # ether linkage
    bonds = [[i, i + 1, 1] for i in range(n - 1)]
    for b in bonds:
        i, j, _ = b
        if elements[i] == "C" and elements[j] == "C" and rng.random() < 0.10:
            left = bonds[i - 1][2] if i > 0 else 1
            right = bonds[j][2] if j < n - 1 else 1
            if left == 1 and right == 1:
                b[2] = 2
    order_sum = [0] * n
    for i, j, order in bonds:
        order_sum[i] += order
        order_sum[j] += order
    atoms = list(elements)
    extra_bonds = []
    for i in range(n):
        cap = smallest_capacity(elements[i], 0, order_sum[i]) or order_sum[i]
        free = cap - order_sum[i]
        if free >= 1 and elements[i] == "C" and rng.random() < 0.12:
            sub = rng.choice(["C", "O", "Cl"], p=[0.6, 0.25, 0.15])
            atoms.append(str(sub))
            extra_bonds.append((i, len(atoms) - 1, 1))
            order_sum[i] += 1
    mol_atoms = []
    totals = order_sum + [0] * (len(atoms) - n)
    for i, j, order in extra_bonds:
        totals[j] += order
    for idx, element in enumerate(atoms):
        cap = smallest_capacity(element, 0, totals[idx])
        mol_atoms.append(Atom(element, 0, 0, cap - totals[idx], None, idx))
    mol_bonds = tuple(
        Bond(i, j, order) for i, j, order in
        [tuple(b) for b in bonds] + extra_bonds
    )
    return molecule_smiles(Molecule(tuple(mol_atoms), mol_bonds),
                           canonical=True, keep_maps=False)


def _attacked_map(step: MechanisticStep) -> Optional[int]:
    """Map number of the attacked bond end (the somo arrow's bond target)."""
    if step.family in ("homolysis", "recombination"):
        return None
    for a in step.arrows.arrows:
        if len(a.src) == 1 and len(a.dst) == 2:
            return next(m for m in a.dst if m != a.src[0])
    return None


def plausibility(step: MechanisticStep) -> float:
    """Deterministic preference over candidate steps (higher is better)."""
    r = step.reactants
    score = {
        "abstraction": 5.0,
        "addition": 8.2,
        "cascade_addition": 8.0,
        "recombination": 4.0,
        "beta_scission": 3.0,
        "homolysis": 0.5,
    }[step.family]

    def elem(map_number):
        return r.atom(r.map_to_ref[map_number]).element

    a1, a2 = step.pair_atoms
    e1, e2 = elem(a1), elem(a2)
    attacked = _attacked_map(step)

    if step.family == "homolysis":
        if {e1, e2} in ({"O"}, {"Cl"}, {"Br"}, {"O", "Cl"}):
            score += 6.0  # weak O-O and halogen-halogen bonds
    if step.family == "abstraction":
        attacked_elem = elem(attacked) if attacked is not None else None
        if attacked_elem == "H":
            score += 2.0
        elif attacked_elem in ("Cl", "Br", "I"):
            score += 1.5  # halogen atom transfer
        else:
            score -= 3.5  # heavy group transfer is rare
        if e1 in ("O", "F", "Cl", "Br"):
            score += 0.7
        far_ref = r.map_to_ref.get(a2)
        if far_ref is not None:
            mol = r.molecule_of(far_ref)
            heavy_nbrs = sum(
                1 for j, _ in mol.neighbors(far_ref[1])
                if mol.atoms[j].element != "H"
            )
            score += min(0.3, 0.15 * heavy_nbrs)
            if mol.pi_count(far_ref[1]) == 0 and any(
                mol.pi_count(j) for j, _ in mol.neighbors(far_ref[1])
            ):
                score += 0.3  # allylic position
    if step.family in ("addition", "cascade_addition"):
        if attacked is not None:
            ref = r.map_to_ref[attacked]
            h_here = r.atom(ref).implicit_hydrogens
            score += 0.15 * h_here  # prefer the less substituted end
    if step.family == "recombination":
        for mol in r.molecules:
            if canonical_key(MoleculeSet((mol,), "reactants")) == "[O][O]":
                score += 5.0  # trapping by molecular oxygen
    if step.family == "beta_scission":
        for mol in step.products.molecules:
            if any(b.order >= 2 for b in mol.bonds):
                score += 1.2
    return score


def pick_true_step(candidates: list) -> Optional[MechanisticStep]:
    if not candidates:
        return None
    return max(candidates, key=lambda s: (plausibility(s), s.products_key))


class HeuristicPipeline:
    """Prediction interface backed by the hand heuristic, no training.

    Scores are squashed to (0, 1); useful for pathway machinery tests and as
    a zero-setup baseline."""

    name = "heuristic"

    def predict(self, ms: MoleculeSet, top_n: int = 10) -> list:
        from .predictor import Prediction

        scored = [
            (s, 1.0 / (1.0 + np.exp(-(plausibility(s) - 6.0))))
            for s in enumerate_candidates(ms)
        ]
        scored.sort(key=lambda t: (-t[1], t[0].products_key, t[0].arrows_key))
        return [
            Prediction(step.with_score(score), rank, score, self.name)
            for rank, (step, score) in enumerate(scored[:top_n], start=1)
        ]


@dataclass(frozen=True)
class SynthConfig:
    n_core_train: int = 220
    n_core_test: int = 40
    n_specific_train: int = 220
    n_specific_test: int = 40
    seed: int = 7
    large_fraction: float = 0.25   # records with long-chain partners
    test_large_fraction: float = 0.5   # keep every size bucket populated


def _sample_reactants(rng: np.random.Generator, category: str,
                      allow_large: bool) -> str:
    radicals = CORE_RADICALS if category == "core" else SPECIFIC_RADICALS
    partners = CORE_PARTNERS if category == "core" else SPECIFIC_PARTNERS
    roll = rng.random()
    if roll < 0.08:
        return partners[rng.integers(len(partners))]  # closed shell alone
    if roll < 0.16:
        return "{}.{}".format(
            radicals[rng.integers(len(radicals))],
            radicals[rng.integers(len(radicals))],
        )
    partner = partners[rng.integers(len(partners))]
    if allow_large:
        partner = _chain_smiles(rng, int(rng.integers(9, 36)))
    return "{}.{}".format(radicals[rng.integers(len(radicals))], partner)


def make_records(n: int, category: str, split: str, seed: int,
                 large_fraction: float = 0.12) -> list:
    rng = np.random.default_rng(seed)
    records = []
    seen = set()
    attempts = 0
    while len(records) < n and attempts < n * 30:
        attempts += 1
        smi = _sample_reactants(rng, category, rng.random() < large_fraction)
        try:
            ms = parse_smiles(smi).with_maps()
        except Exception:
            continue
        candidates = enumerate_candidates(ms)
        truth = pick_true_step(candidates)
        if truth is None:
            continue
        line_key = (canonical_key(truth.reactants), truth.products_key,
                    truth.arrows_key)
        if line_key in seen:
            continue
        seen.add(line_key)
        records.append(ReactionRecord(
            truth.reactants, truth.products, truth.arrows, category, split,
        ))
    return records


def make_corpus_files(directory: str, config: SynthConfig = SynthConfig()):
    """Write the four corpus split files; train/test draws are disjoint."""
    os.makedirs(directory, exist_ok=True)
    plan = [
        ("core", "train", config.n_core_train, config.seed, config.large_fraction),
        ("specific", "train", config.n_specific_train, config.seed + 202,
         config.large_fraction),
        ("core", "test", config.n_core_test, config.seed + 101,
         config.test_large_fraction),
        ("specific", "test", config.n_specific_test, config.seed + 303,
         config.test_large_fraction),
    ]
    seen_keys = set()
    for category, split, n, seed, large in plan:
        records = make_records(n, category, split, seed, large)
        kept = []
        for rec in records:
            key = format_reaction(ReactionRecord(rec.reactants, rec.products, rec.arrows))
            if split == "train":
                seen_keys.add(key)
                kept.append(rec)
            elif key not in seen_keys:
                seen_keys.add(key)  # test records stay unique across categories
                kept.append(rec)
        path = os.path.join(directory, f"{category}_{split}.txt")
        with open(path, "w") as fh:
            for rec in kept:
                fh.write(format_reaction(rec) + "\n")
    return directory


# -- pathway benchmark fixture --------------------------------------------------


def build_pathway_cases(path: str, n_cases: int = 24, seed: int = 11,
                        max_depth: int = 3) -> int:
    """Construct pathway benchmark cases by chaining heuristic-true steps.

    Each JSONL case records the root reactants, the oracle step lines, one
    structure target and one mass target reachable at the stated depth, and
    the context molecules consumed along the way.  States evolve exactly as
    the pathway search evolves them, so the recorded chains replay."""
    from .pathway import ContextSpec, child_state, normalize_state

    rng = np.random.default_rng(seed)
    starts = [
        ("C=C(C)C=C.[OH]", ["[O][O]"]),
        ("C=CC=C.[OH]", ["[O][O]"]),
        ("C=C(C)C.[OH]", ["[O][O]"]),
        ("CC=CC.[Cl]", []),
        ("ClCl.C", []),
        ("OO.[CH3]", []),
        ("C=C.[CH3]", ["C=C"]),
        ("CCC.[Cl]", []),
        ("C=CC.[O]O", []),
        ("CC(C)C.[OH]", ["[O][O]"]),
        ("C=C(C)C=C.[O]O", []),
        ("CCO.[OH]", []),
    ]
    cases = []
    attempt = 0
    while len(cases) < n_cases and attempt < n_cases * 8:
        root_smiles, context = starts[attempt % len(starts)]
        attempt += 1
        depth = int(rng.integers(1, max_depth + 1))
        state = normalize_state(parse_smiles(root_smiles))
        root_keys = {
            molecule_smiles(m, canonical=True, keep_maps=False)
            for m in state.molecules
        }
        ledger = {ContextSpec(c, 2).key: 2 for c in context}
        oracle_steps = []
        ok = True
        for _ in range(depth):
            candidates = enumerate_candidates(state)
            truth = pick_true_step(candidates)
            if truth is None:
                ok = False
                break
            oracle_steps.append(truth.to_line())
            state, ledger, _ = child_state(state, truth, ledger)
        if not ok:
            continue
        novel = [
            m for m in state.molecules
            if molecule_smiles(m, canonical=True, keep_maps=False) not in root_keys
        ]
        if not novel:
            continue
        target_mol = max(novel, key=lambda m: (len(m.atoms), molecule_smiles(m)))
        target = molecule_smiles(target_mol, canonical=True, keep_maps=False)
        mass = molecular_mass(target_mol, "monoisotopic")
        case = {
            "reactants": root_smiles,
            "targets": [
                {"kind": "structure", "smiles": target},
                {"kind": "mass", "mass": round(mass, 4), "tolerance": 0.01},
            ],
            "context": [{"smiles": c, "frequency": 2} for c in context],
            "depth": depth,
            "oracle_steps": oracle_steps,
        }
        cases.append(case)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        for case in cases:
            fh.write(json.dumps(case) + "\n")
    return len(cases)
