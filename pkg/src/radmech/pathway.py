"""Breadth-first mechanistic pathway search.

Starting from a root reactant set, the tree is expanded level by level: at
each node the prediction model proposes up to `breadth` steps whose score
clears the threshold (and the chemistry rules, when enabled).  Each child
state is the step's full product set, hydrogen-normalized, with consumed
context molecules reinserted while the node's ledger permits.  Duplicate
states at the same depth are merged, and the whole tree is capped by a node
budget.

Targets (canonical structures or monoisotopic masses within a tolerance)
are matched against every molecule of every node; hits carry the replayable
root-to-node step chain.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .chemgraph.model import Molecule, MoleculeSet, collapse_hydrogens
from .chemgraph.canon import canonical_key, molecule_smiles
from .chemgraph.masses import molecular_mass
from .chemgraph.parse import parse_smiles
from .chemgraph.reaction import check_balance, parse_reaction
from .orbchain import MechanisticStep, RuleSet, check_rules, infer_reactive_pair, apply_interaction

log = logging.getLogger(__name__)


class PathwayError(ValueError):
    pass


class ReplayError(PathwayError):
    """A stored path no longer reproduces its node states."""


class BenchmarkError(PathwayError):
    pass


@dataclass(frozen=True)
class Target:
    kind: str  # structure | mass
    structure_key: Optional[str] = None
    mass: Optional[float] = None
    tolerance: float = 0.01
    label: str = ""

    def __post_init__(self):
        if self.kind == "structure":
            if not self.structure_key:
                raise PathwayError("structure target needs a molecule")
        elif self.kind == "mass":
            if self.mass is None:
                raise PathwayError("mass target needs a mass")
            if self.tolerance <= 0:
                raise PathwayError("mass tolerance must be positive")
        else:
            raise PathwayError(f"unknown target kind {self.kind!r}")

    @classmethod
    def structure(cls, smiles: str) -> "Target":
        key = canonical_key(collapse_hydrogens(parse_smiles(smiles)))
        return cls("structure", structure_key=key, label=smiles)

    @classmethod
    def by_mass(cls, mass: float, tolerance: float = 0.01) -> "Target":
        return cls("mass", mass=mass, tolerance=tolerance,
                   label=f"{mass}±{tolerance}")

    def matches(self, mol: Molecule) -> bool:
        if self.kind == "structure":
            key = canonical_key(MoleculeSet((mol,), "reactants"))
            return key == self.structure_key
        return abs(molecular_mass(mol, "monoisotopic") - self.mass) <= self.tolerance


@dataclass(frozen=True)
class ContextSpec:
    smiles: str
    frequency: int = 1

    def __post_init__(self):
        if self.frequency < 1:
            raise PathwayError("context frequency must be at least 1")
        parse_smiles(self.smiles)  # validate eagerly

    @property
    def key(self) -> str:
        return canonical_key(collapse_hydrogens(parse_smiles(self.smiles)))


@dataclass(frozen=True)
class SearchConfig:
    depth: int = 3
    breadth: int = 10
    score_threshold: float = 0.0
    apply_rules: bool = True
    node_budget: int = 2000

    def __post_init__(self):
        if self.depth < 1 or self.breadth < 1:
            raise PathwayError("depth and breadth must be positive")
        if self.node_budget < 1:
            raise PathwayError("node budget must be positive")


@dataclass
class PathwayNode:
    node_id: int
    state: MoleculeSet
    depth: int
    cumulative_score: float = 1.0
    parent_id: Optional[int] = None
    incoming: Optional[MechanisticStep] = None
    incoming_score: Optional[float] = None
    children: list = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    inserted: dict = field(default_factory=dict)
    expanded: bool = False

    @property
    def state_key(self) -> str:
        return canonical_key(self.state)


@dataclass(frozen=True)
class Hit:
    target: Target
    node_id: int
    molecule: str
    path_node_ids: tuple
    steps: tuple  # MechanisticStep chain root -> node


@dataclass
class PathwayResult:
    nodes: dict
    root_id: int
    truncated: bool = False
    hits: list = field(default_factory=list)

    def node(self, node_id: int) -> PathwayNode:
        return self.nodes[node_id]

    @property
    def size(self) -> int:
        return len(self.nodes)


def normalize_state(ms: MoleculeSet) -> MoleculeSet:
    """Hydrogen-collapsed, canonically ordered, freshly mapped state."""
    collapsed = collapse_hydrogens(ms)
    molecules = sorted(
        (m for m in collapsed.molecules),
        key=lambda m: molecule_smiles(m, canonical=True, keep_maps=False),
    )
    rebuilt = []
    for mol in molecules:
        rebuilt.append(parse_smiles(
            molecule_smiles(mol, canonical=True, keep_maps=False)
        ).molecules[0])
    return MoleculeSet(tuple(rebuilt), "reactants").with_maps()


def _state_counts(ms: MoleculeSet) -> dict:
    counts = {}
    for mol in ms.molecules:
        key = molecule_smiles(mol, canonical=True, keep_maps=False)
        counts[key] = counts.get(key, 0) + 1
    return counts


def child_state(parent_state: MoleculeSet, step: MechanisticStep,
                ledger: dict) -> tuple:
    """Next state after a step: products, plus consumed context molecules
    reinserted while the ledger permits.  Returns (state, new_ledger,
    inserted_counts)."""
    parent_counts = _state_counts(collapse_hydrogens(parent_state))
    product_counts = _state_counts(collapse_hydrogens(step.products))
    molecules = list(collapse_hydrogens(step.products).molecules)
    new_ledger = dict(ledger)
    inserted = {}
    for ctx_key, remaining in ledger.items():
        consumed = max(0, parent_counts.get(ctx_key, 0)
                       - product_counts.get(ctx_key, 0))
        k = min(consumed, remaining)
        if k > 0:
            for _ in range(k):
                molecules.extend(parse_smiles(ctx_key).molecules)
            new_ledger[ctx_key] = remaining - k
            inserted[ctx_key] = k
    state = normalize_state(MoleculeSet(tuple(
        parse_smiles(molecule_smiles(m, canonical=True, keep_maps=False)).molecules[0]
        for m in molecules
    ), "reactants"))
    return state, new_ledger, inserted


class PathwaySearch:
    """Incremental breadth-first expansion with per-node steering."""

    def __init__(self, root_reactants: MoleculeSet, cfg: SearchConfig,
                 context: Iterable = (), model=None):
        self.cfg = cfg
        self.model = model
        self.rules = RuleSet() if cfg.apply_rules else None
        ledger = {}
        for spec in context:
            ledger[spec.key] = ledger.get(spec.key, 0) + spec.frequency
        root = PathwayNode(
            node_id=0, state=normalize_state(root_reactants), depth=0,
            ledger=ledger,
        )
        self.result = PathwayResult(nodes={0: root}, root_id=0)
        self._dedup = {(0, root.state_key, _ledger_key(ledger)): 0}
        self._next_id = 1

    def expand_node(self, node_id: int) -> list:
        """Expand one leaf; idempotent (returns existing children)."""
        if node_id not in self.result.nodes:
            raise PathwayError(f"unknown node {node_id}")
        node = self.result.nodes[node_id]
        if node.expanded:
            return list(node.children)
        if node.depth >= self.cfg.depth:
            raise PathwayError(
                f"node {node_id} is at the depth limit {self.cfg.depth}"
            )
        node.expanded = True
        predictions = self.model.predict(node.state, top_n=self.cfg.breadth)
        created = []
        for pred in predictions:
            if pred.score < self.cfg.score_threshold:
                continue
            if self.rules is not None and not check_rules(pred.step, self.rules).passed:
                continue
            if self.result.size >= self.cfg.node_budget:
                self.result.truncated = True
                log.warning("node budget %d reached, tree truncated",
                            self.cfg.node_budget)
                break
            state, ledger, inserted = child_state(
                node.state, pred.step, node.ledger
            )
            depth = node.depth + 1
            dedup_key = (depth, canonical_key(state), _ledger_key(ledger))
            if dedup_key in self._dedup:
                existing = self._dedup[dedup_key]
                if existing not in node.children:
                    node.children.append(existing)
                continue
            child = PathwayNode(
                node_id=self._next_id, state=state, depth=depth,
                cumulative_score=node.cumulative_score * pred.score,
                parent_id=node.node_id, incoming=pred.step,
                incoming_score=pred.score, ledger=ledger, inserted=inserted,
            )
            self._next_id += 1
            self.result.nodes[child.node_id] = child
            self._dedup[dedup_key] = child.node_id
            node.children.append(child.node_id)
            created.append(child.node_id)
        return created

    def expand_level(self) -> list:
        """Expand every unexpanded node at the shallowest incomplete depth."""
        frontier_depth = None
        created = []
        for node in sorted(self.result.nodes.values(), key=lambda n: n.node_id):
            if node.expanded or node.depth >= self.cfg.depth:
                continue
            if frontier_depth is None:
                frontier_depth = node.depth
            if node.depth != frontier_depth:
                break
            created.extend(self.expand_node(node.node_id))
            if self.result.truncated:
                break
        return created

    def expand_all(self) -> PathwayResult:
        for _ in range(self.cfg.depth):
            if not self.expand_level() and all(
                n.expanded or n.depth >= self.cfg.depth
                for n in self.result.nodes.values()
            ):
                break
        return self.result

    def path_to(self, node_id: int) -> tuple:
        ids = []
        cur = self.result.nodes[node_id]
        while cur is not None:
            ids.append(cur.node_id)
            cur = self.result.nodes.get(cur.parent_id) if cur.parent_id is not None else None
        return tuple(reversed(ids))


def _ledger_key(ledger: dict) -> tuple:
    return tuple(sorted(ledger.items()))


def expand(root_reactants: MoleculeSet, cfg: SearchConfig,
           context: Iterable, model) -> PathwaySearch:
    """Expand the whole tree breadth-first to the configured depth."""
    search = PathwaySearch(root_reactants, cfg, context, model)
    search.expand_all()
    return search


def match_targets(search: PathwaySearch, targets: Iterable) -> list:
    """All (target, node) matches, best cumulative path score first; each hit
    carries its root-to-node chain."""
    hits = []
    for node in sorted(
        search.result.nodes.values(),
        key=lambda n: (-n.cumulative_score, n.node_id),
    ):
        for target in targets:
            for mol in node.state.molecules:
                if target.matches(mol):
                    ids = search.path_to(node.node_id)
                    steps = tuple(
                        search.result.nodes[i].incoming
                        for i in ids if search.result.nodes[i].incoming is not None
                    )
                    hits.append(Hit(
                        target, node.node_id,
                        molecule_smiles(mol, canonical=True, keep_maps=False),
                        ids, steps,
                    ))
                    break
    search.result.hits = hits
    return hits


def replay_path(search: PathwaySearch, hit: Hit) -> list:
    """Re-apply the hit's steps from the root, asserting state identity and
    balance at every depth.  Returns the serialized mechanism chain."""
    lines = []
    ids = hit.path_node_ids
    for parent_id, child_id in zip(ids, ids[1:]):
        parent = search.result.nodes[parent_id]
        child = search.result.nodes[child_id]
        step = child.incoming
        if step is None:
            raise ReplayError(f"node {child_id} has no incoming step")
        if canonical_key(collapse_hydrogens(step.reactants)) != parent.state_key:
            raise ReplayError(
                f"step into node {child_id} does not start from its parent state"
            )
        check_balance(step.reactants, step.products)
        expected, _, _ = child_state(parent.state, step, parent.ledger)
        if canonical_key(expected) != child.state_key:
            raise ReplayError(
                f"replaying into node {child_id} produced a different state"
            )
        lines.append(step.to_line())
    return lines


# ---------------------------------------------------------------------------
# benchmark fixtures and the scripted oracle model


@dataclass(frozen=True)
class BenchmarkCase:
    reactants: MoleculeSet
    targets: tuple
    context: tuple
    depth: int
    oracle_steps: tuple = ()  # reaction lines, root-first


def load_benchmark(path: str) -> list:
    """JSONL benchmark cases; malformed lines raise an itemized error."""
    if not os.path.exists(path):
        raise BenchmarkError(f"missing benchmark file {path}")
    cases = []
    errors = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
                targets = []
                for t in obj["targets"]:
                    if t["kind"] == "structure":
                        targets.append(Target.structure(t["smiles"]))
                    else:
                        targets.append(Target.by_mass(
                            float(t["mass"]), float(t.get("tolerance", 0.01))
                        ))
                context = tuple(
                    ContextSpec(c["smiles"], int(c.get("frequency", 1)))
                    for c in obj.get("context", [])
                )
                cases.append(BenchmarkCase(
                    reactants=parse_smiles(obj["reactants"]),
                    targets=tuple(targets),
                    context=context,
                    depth=int(obj["depth"]),
                    oracle_steps=tuple(obj.get("oracle_steps", [])),
                ))
            except (KeyError, ValueError, TypeError) as exc:
                errors.append(f"line {lineno}: {exc}")
    if errors:
        raise BenchmarkError(
            "malformed benchmark cases: " + "; ".join(errors)
        )
    return cases


def run_benchmark_case(case: BenchmarkCase, model, breadth: int = 10,
                       score_threshold: float = 0.0,
                       apply_rules: bool = False,
                       node_budget: int = 1500) -> tuple:
    """Expand level by level up to the case depth, stopping as soon as a
    structure target is recovered.  Returns (recovered, search)."""
    cfg = SearchConfig(depth=case.depth, breadth=breadth,
                       score_threshold=score_threshold,
                       apply_rules=apply_rules, node_budget=node_budget)
    search = PathwaySearch(case.reactants, cfg, case.context, model)
    structures = [t for t in case.targets if t.kind == "structure"]
    for _ in range(case.depth + 1):
        hits = match_targets(search, structures)
        if hits:
            return True, search
        if not search.expand_level():
            break
    return bool(match_targets(search, structures)), search


class ScriptedModel:
    """Replays recorded steps: the model used for oracle-recovery tests.

    Each recorded step is keyed by its hydrogen-normalized reactant state;
    prediction returns the recorded step for the current state (score 0.99)
    and nothing else."""

    name = "scripted"

    def __init__(self, step_lines: Iterable):
        from .predictor import Prediction  # deferred to avoid import cycle

        self._prediction_cls = Prediction
        self.by_state = {}
        for line in step_lines:
            rec = parse_reaction(line)
            step = apply_interaction(rec.reactants, infer_reactive_pair(rec))
            key = canonical_key(collapse_hydrogens(step.reactants))
            self.by_state.setdefault(key, step)

    def predict(self, ms: MoleculeSet, top_n: int = 10) -> list:
        key = canonical_key(collapse_hydrogens(ms))
        step = self.by_state.get(key)
        if step is None:
            return []
        return [self._prediction_cls(step.with_score(0.99), 1, 0.99, self.name)]
