"""Orbital-level mechanism engine.

A radical elementary step is modeled as the interaction of two reactive
molecular orbitals over the reactant graphs.  This module enumerates the
idealized orbitals of a molecule set, rewrites reactants along a chosen
orbital interaction into atom-mapped products plus fish-hook arrows, inverts
labeled records back to their reactive orbital pair, and enumerates the full
candidate mechanism space with deduplication.

Interaction rule table (oriented):

* (somo, somo)                -> bond formation between the radical centers.
* self-pair on sigma or pi    -> homolysis, one electron to each end.
* (somo x, bond a-n @ a)      -> bond x-a forms, bond a-n breaks, the
  surviving electron lands on n.  Abstraction when the target is a sigma
  bond, addition when it is a pi bond, beta-scission style when x is
  already bonded to the attacked end (the new bond becomes a pi).
* (somo x, pi a-n @ a, chain) -> conjugated cascade: the electron shift
  propagates across alternating unfilled/filled pi slots, the radical
  landing at the far end of the last coupled orbital.

Bond orbitals are enumerated once per bond (and once per implicit hydrogen);
the attacked end is an orientation chosen at candidate-generation time, so
both regiochemical outcomes appear as separate candidates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterator, Optional, Union

from .chemgraph.model import (
    Atom,
    Bond,
    ChemGraphError,
    Molecule,
    MoleculeSet,
)
from .chemgraph.canon import canonical_key, canonical_ranks, write_smiles
from .chemgraph.reaction import Arrow, ArrowCode, ReactionRecord

log = logging.getLogger(__name__)

FILLED = 2
HALF = 1
EMPTY = 0

ATOM_KINDS = ("lone_pair", "somo", "empty_p")
BOND_KINDS = ("sigma", "pi")
STAR_KINDS = ("sigma_star", "pi_star")

MAX_COUPLED_ORBITALS = 3  # attacked pi + bridge slot + one more pi


class OrbitalError(ChemGraphError):
    pass


class InadmissibleInteraction(OrbitalError):
    """The orbital pair cannot produce a chemically valid rewrite."""


class NoReactivePairError(OrbitalError):
    """No orbital pair reproduces the labeled record."""


@dataclass(frozen=True)
class ImplicitH:
    """One of the indistinguishable implicit hydrogens on a heavy atom."""

    parent: tuple
    slot: int = 0


End = Union[tuple, ImplicitH]


@dataclass(frozen=True)
class MolecularOrbital:
    """An idealized orbital: center atom, electron count, optional bond
    partner, and an optional conjugation chain of coupled orbitals."""

    center: tuple
    electrons: int
    neighbor: Optional[End] = None
    kind: str = ""
    chain: tuple = ()
    slot: int = 0

    def __post_init__(self):
        e, n, k = self.electrons, self.neighbor, self.kind
        ok = (
            (e == 2 and n is None and k == "lone_pair")
            or (e == 1 and n is None and k == "somo")
            or (e == 2 and n is not None and k in BOND_KINDS)
            or (e == 0 and n is None and k == "empty_p")
            or (e == 0 and n is not None and k in STAR_KINDS)
        )
        if not ok:
            raise OrbitalError(f"inconsistent orbital {k} e={e} neighbor={n}")
        for prev, cur in zip((self,) + self.chain, self.chain):
            if {prev.electrons, cur.electrons} != {0, 2}:
                raise OrbitalError("chain orbitals must alternate filled/unfilled")
            if not _shares_atom(prev, cur):
                raise OrbitalError("chain orbitals must share an atom")

    @property
    def is_bond(self) -> bool:
        return self.kind in BOND_KINDS

    def ends(self) -> tuple:
        return (self.center, self.neighbor)


def _shares_atom(a: MolecularOrbital, b: MolecularOrbital) -> bool:
    def atoms(mo):
        out = {mo.center}
        if isinstance(mo.neighbor, tuple):
            out.add(mo.neighbor)
        elif isinstance(mo.neighbor, ImplicitH):
            out.add(mo.neighbor.parent)
        return out

    return bool(atoms(a) & atoms(b))


@dataclass(frozen=True)
class ReactivePair:
    """An (unordered) orbital pair plus the orientation details needed to
    make its rewrite unique: the attacked bond end and any cascade path."""

    m1: MolecularOrbital
    m2: MolecularOrbital
    self_pair: bool = False
    attack: Optional[End] = None
    cascade: tuple = ()  # links (entry, near, far): entry-near forms, near-far breaks
    family: str = ""

    def __post_init__(self):
        if not (
            self.m1.electrons == 1
            or self.m2.electrons == 1
            or (self.self_pair and self.m1.electrons == 2)
        ):
            raise OrbitalError(
                "reactive pair must involve a half-occupied orbital or be a "
                "filled self-pair (homolysis)"
            )


@dataclass(frozen=True)
class MechanisticStep:
    """One elementary step: reactants, products, arrows, and provenance."""

    reactants: MoleculeSet
    products: MoleculeSet
    arrows: ArrowCode
    pair: ReactivePair
    score: Optional[float] = None
    family: str = ""
    pair_atoms: tuple = ()  # (map1, map2), f/g orientation
    site_atoms: tuple = ()  # center atom maps for site labeling

    @cached_property
    def products_key(self) -> str:
        return canonical_key(self.products)

    @cached_property
    def arrows_key(self) -> str:
        return _canonical_arrow_string(self.reactants, self.arrows)

    @cached_property
    def step_key(self) -> tuple:
        return (canonical_key(self.reactants), self.products_key, self.arrows_key)

    def to_line(self, category: Optional[str] = None) -> str:
        left = write_smiles(self.reactants, canonical=True, keep_maps=True)
        right = write_smiles(self.products, canonical=True, keep_maps=True)
        line = f"{left}>>{right}|{self.arrows.format()}"
        if category:
            line += f"|{category}"
        return line

    def with_score(self, score: float) -> "MechanisticStep":
        return MechanisticStep(
            self.reactants, self.products, self.arrows, self.pair,
            score, self.family, self.pair_atoms, self.site_atoms,
        )


def _canonical_arrow_string(reactants: MoleculeSet, arrows: ArrowCode) -> str:
    """Arrows rewritten over symmetry ranks so that relabeled or symmetry-
    equivalent mechanisms compare equal."""
    labels = {}
    for mi, mol in enumerate(reactants.molecules):
        mol_key = canonical_key(MoleculeSet((mol,), reactants.role))
        ranks = canonical_ranks(mol)
        for ai, atom in enumerate(mol.atoms):
            if atom.map_number is not None:
                labels[atom.map_number] = (mol_key, ranks[ai])
    def designator(d):
        return tuple(sorted(labels[m] for m in d))
    rendered = sorted(
        (designator(a.src), designator(a.dst)) for a in arrows.arrows
    )
    return repr(rendered)


def describe_orbital(ms: MoleculeSet, mo: MolecularOrbital) -> str:
    """Debug form ``kind@map`` or ``kind@map(neighbor_map)``."""
    center = ms.atom(mo.center).map_number
    if mo.neighbor is None:
        return f"{mo.kind}@{center}"
    if isinstance(mo.neighbor, ImplicitH):
        return f"{mo.kind}@{center}(H)"
    return f"{mo.kind}@{center}({ms.atom(mo.neighbor).map_number})"


# ---------------------------------------------------------------------------
# orbital enumeration


def _canonical_bond_ends(ms: MoleculeSet, i: tuple, j: tuple) -> tuple:
    """Heavy atoms are preferred centers; ties resolve by position."""
    ai, aj = ms.atom(i), ms.atom(j)
    if (ai.element == "H") != (aj.element == "H"):
        return (j, i) if ai.element == "H" else (i, j)
    return (i, j) if i <= j else (j, i)


def _pi_continuations(ms: MoleculeSet, mi: int, exit_atom: int, avoid: set) -> list:
    """Conjugated continuations leaving `exit_atom`: (bridge_to, far) pairs
    where bridge is a single bond and (bridge_to, far) carries a pi bond."""
    mol = ms.molecules[mi]
    out = []
    for p, order in mol.neighbors(exit_atom):
        if order != 1 or p in avoid:
            continue
        for q, order2 in mol.neighbors(p):
            if order2 >= 2 and q != exit_atom and q not in avoid:
                out.append((p, q))
    return sorted(out)


def enumerate_mos(ms: MoleculeSet) -> list:
    """All idealized molecular orbitals of a reactant set.

    Per atom: one SOMO per unpaired electron, one lone-pair orbital per lone
    pair, one empty orbital per vacant valence slot, and a sigma/sigma* pair
    per implicit hydrogen.  Per explicit bond: sigma/sigma*, plus pi/pi* for
    each bond order beyond one.  Conjugated pi orbitals carry their coupled
    chain.
    """
    mos = []
    for mi, mol in enumerate(ms.molecules):
        for ai, atom in enumerate(mol.atoms):
            ref = (mi, ai)
            for s in range(atom.radical_electrons):
                mos.append(MolecularOrbital(ref, HALF, None, "somo", slot=s))
            for s in range(mol.lone_pairs(ai)):
                mos.append(MolecularOrbital(ref, FILLED, None, "lone_pair", slot=s))
            for s in range(mol.empty_orbitals(ai)):
                mos.append(MolecularOrbital(ref, EMPTY, None, "empty_p", slot=s))
            for s in range(atom.implicit_hydrogens):
                h = ImplicitH(ref, s)
                mos.append(MolecularOrbital(ref, FILLED, h, "sigma", slot=s))
                mos.append(MolecularOrbital(ref, EMPTY, h, "sigma_star", slot=s))
        for b in mol.bonds:
            c, n = _canonical_bond_ends(ms, (mi, b.i), (mi, b.j))
            mos.append(MolecularOrbital(c, FILLED, n, "sigma"))
            mos.append(MolecularOrbital(c, EMPTY, n, "sigma_star"))
            for s in range(b.order - 1):
                chain = ()
                conts = _pi_continuations(ms, mi, n[1], {c[1], n[1]})
                if conts:
                    p, q = conts[0]
                    bridge = MolecularOrbital((mi, n[1]), EMPTY, (mi, p), "pi_star")
                    nc, nn = _canonical_bond_ends(ms, (mi, p), (mi, q))
                    chain = (bridge, MolecularOrbital(nc, FILLED, nn, "pi"))
                mos.append(MolecularOrbital(c, FILLED, n, "pi", chain=chain, slot=s))
                mos.append(MolecularOrbital(c, EMPTY, n, "pi_star", slot=s))
    return mos


def count_possible(ms: MoleculeSet) -> int:
    """Size of the possible (not plausible) mechanism space: all unordered
    orbital pairs plus the admissible self-pairs (homolyses)."""
    mos = enumerate_mos(ms)
    m = len(mos)
    homolyses = sum(1 for mo in mos if mo.kind in BOND_KINDS)
    return m * (m - 1) // 2 + homolyses


# ---------------------------------------------------------------------------
# graph rewriting


class _Assembly:
    """Mutable scratch graph for applying one orbital interaction."""

    def __init__(self, ms: MoleculeSet):
        self.atoms = []
        self.bonds = {}
        self.of_ref = {}
        for ref, atom in ms.atoms():
            self.of_ref[ref] = len(self.atoms)
            self.atoms.append({
                "element": atom.element,
                "charge": atom.formal_charge,
                "radicals": atom.radical_electrons,
                "h": atom.implicit_hydrogens,
                "map": atom.map_number,
            })
        for mi, mol in enumerate(ms.molecules):
            for b in mol.bonds:
                self.bonds[self._key(self.of_ref[(mi, b.i)], self.of_ref[(mi, b.j)])] = b.order
        self.next_map = ms.max_map + 1
        self._materialized = {}

    @staticmethod
    def _key(i: int, j: int) -> tuple:
        return (i, j) if i < j else (j, i)

    def resolve(self, end: End) -> int:
        if isinstance(end, ImplicitH):
            key = (end.parent, end.slot)
            if key in self._materialized:
                return self._materialized[key]
            parent = self.of_ref[end.parent]
            if self.atoms[parent]["h"] <= 0:
                raise InadmissibleInteraction("no implicit hydrogen available")
            self.atoms[parent]["h"] -= 1
            gi = len(self.atoms)
            self.atoms.append({
                "element": "H", "charge": 0, "radicals": 0, "h": 0,
                "map": self.next_map,
            })
            self.next_map += 1
            self.bonds[self._key(parent, gi)] = 1
            self._materialized[key] = gi
            return gi
        return self.of_ref[end]

    def bond_order(self, i: int, j: int) -> int:
        return self.bonds.get(self._key(i, j), 0)

    def adjust_bond(self, i: int, j: int, delta: int):
        key = self._key(i, j)
        order = self.bonds.get(key, 0) + delta
        if order < 0 or order > 3:
            raise InadmissibleInteraction(f"bond order {order} out of range")
        if order == 0:
            self.bonds.pop(key, None)
        else:
            self.bonds[key] = order

    def adjust_radical(self, i: int, delta: int):
        r = self.atoms[i]["radicals"] + delta
        if r < 0 or r > 2:
            raise InadmissibleInteraction(f"{r} unpaired electrons on one atom")
        self.atoms[i]["radicals"] = r

    def map_of(self, i: int) -> int:
        m = self.atoms[i]["map"]
        if m is None:
            raise OrbitalError("arrow references an unmapped atom")
        return m

    def to_set(self, role: str) -> MoleculeSet:
        n = len(self.atoms)
        adjacency = {i: [] for i in range(n)}
        for (i, j), order in self.bonds.items():
            adjacency[i].append(j)
            adjacency[j].append(i)
        seen = set()
        components = []
        for i in range(n):
            if i in seen:
                continue
            comp = []
            stack = [i]
            seen.add(i)
            while stack:
                k = stack.pop()
                comp.append(k)
                for j in adjacency[k]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            components.append(sorted(comp))
        molecules = []
        for comp in components:
            local = {g: l for l, g in enumerate(comp)}
            atoms = tuple(
                Atom(
                    self.atoms[g]["element"], self.atoms[g]["charge"],
                    self.atoms[g]["radicals"], self.atoms[g]["h"],
                    self.atoms[g]["map"], l,
                )
                for l, g in enumerate(comp)
            )
            bonds = tuple(sorted(
                (
                    Bond(local[i], local[j], order)
                    for (i, j), order in self.bonds.items()
                    if i in local and j in local
                ),
                key=lambda b: (b.i, b.j),
            ))
            try:
                molecules.append(Molecule(atoms, bonds))
            except ChemGraphError as exc:
                raise InadmissibleInteraction(str(exc)) from exc
        molecules.sort(key=lambda m: (
            canonical_key(MoleculeSet((m,), role)),
            min((a.map_number or 0) for a in m.atoms),
        ))
        return MoleculeSet(tuple(molecules), role)


def apply_interaction(ms: MoleculeSet, pair: ReactivePair) -> MechanisticStep:
    """Rewrite a reactant set along an orbital interaction.

    Returns the balanced, atom-mapped step.  If the interaction touches an
    implicit hydrogen, that hydrogen is promoted to an explicit mapped atom
    on both sides of the step.  Raises InadmissibleInteraction when the
    rewrite would violate valence or electron bookkeeping.
    """
    asm = _Assembly(ms)
    arrows = []

    def bond_designator(i: int, j: int) -> tuple:
        return tuple(sorted((asm.map_of(i), asm.map_of(j))))

    if pair.family == "homolysis":
        a = asm.resolve(pair.m1.center)
        n = asm.resolve(pair.m1.neighbor)
        reactants_p = asm.to_set("reactants") if asm._materialized else ms
        src = bond_designator(a, n)
        asm.adjust_bond(a, n, -1)
        asm.adjust_radical(a, +1)
        asm.adjust_radical(n, +1)
        arrows = [Arrow(src, (asm.map_of(a),)), Arrow(src, (asm.map_of(n),))]
        site = (asm.map_of(a), asm.map_of(n))
        # implicit hydrogens are not scoreable atoms: address via the parent
        far = asm.resolve(_resolved(pair.m1.neighbor))
        pair_atoms = tuple(sorted((asm.map_of(a), asm.map_of(far))))
    elif pair.family == "recombination":
        x = asm.resolve(pair.m1.center)
        y = asm.resolve(pair.m2.center)
        reactants_p = ms
        asm.adjust_bond(x, y, +1)
        asm.adjust_radical(x, -1)
        asm.adjust_radical(y, -1)
        new = bond_designator(x, y)
        arrows = [Arrow((asm.map_of(x),), new), Arrow((asm.map_of(y),), new)]
        site = tuple(sorted((asm.map_of(x), asm.map_of(y))))
        pair_atoms = site
    else:
        # oriented somo-on-bond families, cascades included
        x = asm.resolve(pair.m1.center)
        a = asm.resolve(pair.attack)
        far_end = pair.m2.neighbor if pair.attack == pair.m2.center else pair.m2.center
        n = asm.resolve(far_end)
        if x in (a, n):
            raise InadmissibleInteraction("somo overlaps the attacked bond")
        reactants_p = asm.to_set("reactants") if asm._materialized else ms
        new = None
        src_bond = bond_designator(a, n)
        asm.adjust_bond(x, a, +1)
        asm.adjust_bond(a, n, -1)
        asm.adjust_radical(x, -1)
        new = bond_designator(x, a)
        arrows = [Arrow((asm.map_of(x),), new), Arrow(src_bond, new)]
        seen_atoms = {x, a, n}
        entry = n
        if pair.cascade:
            for (entry_ref, near_ref, far_ref) in pair.cascade:
                e = asm.resolve(entry_ref)
                p = asm.resolve(near_ref)
                q = asm.resolve(far_ref)
                if e != entry or p in seen_atoms or q in seen_atoms:
                    raise InadmissibleInteraction("cascade path revisits an atom")
                bridge = bond_designator(e, p)
                broken = bond_designator(p, q)
                arrows.append(Arrow(src_bond, bridge))
                asm.adjust_bond(e, p, +1)
                asm.adjust_bond(p, q, -1)
                arrows.append(Arrow(broken, bridge))
                src_bond = broken
                seen_atoms.update({p, q})
                entry = q
            asm.adjust_radical(entry, +1)
            arrows.append(Arrow(src_bond, (asm.map_of(entry),)))
        else:
            asm.adjust_radical(n, +1)
            arrows.append(Arrow(src_bond, (asm.map_of(n),)))
        center = asm.resolve(pair.m2.center)
        site = (asm.map_of(x), asm.map_of(center))
        pair_atoms = (asm.map_of(x), asm.map_of(center))

    products = asm.to_set("products")
    return MechanisticStep(
        reactants_p, products, ArrowCode(tuple(arrows)), pair,
        None, pair.family, pair_atoms, site,
    )


# ---------------------------------------------------------------------------
# candidate generation


def _resolved(end: End) -> tuple:
    return end.parent if isinstance(end, ImplicitH) else end


def _touches(mo: MolecularOrbital, allowed: set) -> bool:
    if mo.center in allowed:
        return True
    if mo.neighbor is not None and _resolved(mo.neighbor) in allowed:
        return True
    return False


def _is_open_target(ms: MoleculeSet, mo: MolecularOrbital) -> bool:
    """Sigma orbitals of multiple bonds are buried below their pi system and
    do not interact directly; everything else in a bond kind is fair game."""
    if mo.kind == "pi":
        return True
    if mo.kind != "sigma":
        return False
    if isinstance(mo.neighbor, ImplicitH):
        return True
    mol = ms.molecule_of(mo.center)
    bond = mol.bond_between(mo.center[1], mo.neighbor[1])
    return bond is not None and bond.order == 1


def candidate_pairs(ms: MoleculeSet, mos: Optional[list] = None,
                    allowed: Optional[set] = None) -> Iterator:
    """All admissible oriented interactions, in deterministic order."""
    if mos is None:
        mos = enumerate_mos(ms)
    if allowed is not None:
        mos = [mo for mo in mos if _touches(mo, allowed)]
    somos = [mo for mo in mos if mo.kind == "somo" and mo.slot == 0]
    bonds = [mo for mo in mos if mo.kind in BOND_KINDS and _is_open_target(ms, mo)]

    for b in bonds:
        yield ReactivePair(b, b, self_pair=True, family="homolysis")

    for s1, s2 in combinations(somos, 2):
        if s1.center == s2.center:
            continue
        yield ReactivePair(s1, s2, family="recombination")

    for s in somos:
        for b in bonds:
            ends = [b.center, b.neighbor]
            if s.center in (ends[0], _resolved(ends[1])):
                continue
            for attack in ends:
                mol = ms.molecule_of(s.center)
                bonded = (
                    not isinstance(attack, ImplicitH)
                    and s.center[0] == attack[0]
                    and mol.bond_between(s.center[1], attack[1]) is not None
                )
                if bonded:
                    family = "beta_scission"
                elif b.kind == "sigma":
                    family = "abstraction"
                else:
                    family = "addition"
                yield ReactivePair(s, b, attack=attack, family=family)
                if b.kind == "pi":
                    far = ends[1] if attack == ends[0] else ends[0]
                    far_ref = _resolved(far)
                    conts = _pi_continuations(
                        ms, far_ref[0], far_ref[1],
                        {b.center[1], _resolved(b.neighbor)[1]},
                    )
                    for p, q in conts:
                        mi = far_ref[0]
                        link = (far_ref, (mi, p), (mi, q))
                        yield ReactivePair(
                            s, b, attack=attack, cascade=(link,),
                            family="cascade_addition",
                        )


def enumerate_candidates(ms: MoleculeSet, allowed_atoms: Optional[set] = None) -> list:
    """Deduplicated candidate steps, ordered by canonical products then
    arrows.  `allowed_atoms` restricts pairing to orbitals centered on (or
    bonding) those atom refs."""
    if allowed_atoms is not None and not allowed_atoms:
        return []
    mapped = ms.with_maps()
    steps = {}
    for pair in candidate_pairs(mapped, allowed=allowed_atoms):
        try:
            step = apply_interaction(mapped, pair)
        except InadmissibleInteraction:
            continue
        key = step.step_key
        if key not in steps:
            steps[key] = step
    ordered = sorted(steps.values(), key=lambda s: (s.products_key, s.arrows_key))
    return ordered


# ---------------------------------------------------------------------------
# record inversion


def infer_reactive_pair(rec: ReactionRecord, return_matches: bool = False):
    """Recover the oriented reactive pair that reproduces (products, arrows).

    Raises NoReactivePairError if no admissible pair reproduces the record.
    If several do (symmetry), the first in deterministic candidate order is
    returned and the ambiguity is logged.
    """
    want_products = write_smiles(rec.products, canonical=True, keep_maps=True)
    want_arrows = rec.arrows.format()
    allowed = {
        rec.reactants.map_to_ref[m]
        for m in rec.arrows.referenced_maps()
    }
    matches = []
    for pair in candidate_pairs(rec.reactants, allowed=allowed):
        try:
            step = apply_interaction(rec.reactants, pair)
        except (InadmissibleInteraction, OrbitalError):
            continue
        if (
            write_smiles(step.products, canonical=True, keep_maps=True) == want_products
            and step.arrows.format() == want_arrows
        ):
            matches.append(pair)
            if not return_matches:
                break
    if not matches:
        raise NoReactivePairError(
            "no orbital pair reproduces the labeled record"
        )
    if return_matches:
        if len(matches) > 1:
            log.info("record has %d consistent orbital pairs", len(matches))
        return matches
    return matches[0]


# ---------------------------------------------------------------------------
# chemistry rules


@dataclass(frozen=True)
class RuleSet:
    bredt: bool = True

    @classmethod
    def disabled(cls) -> "RuleSet":
        return cls(bredt=False)


@dataclass(frozen=True)
class RuleCheck:
    passed: bool
    reason: Optional[str] = None


def _bredt_violation(mol: Molecule) -> Optional[int]:
    """Index of an sp2 bridgehead atom in a small bridged bicyclic, if any.

    Bridgeheads are the junction atoms of two rings (each of size <= 7)
    sharing a path of at least three atoms; fused systems sharing a single
    edge are untouched.
    """
    rings = [r for r in mol.rings if len(r) <= 7]
    for r1, r2 in combinations(rings, 2):
        shared = set(r1) & set(r2)
        if len(shared) < 3:
            continue
        for atom in shared:
            out1 = any(n in set(r1) - shared for n, _ in mol.neighbors(atom))
            out2 = any(n in set(r2) - shared for n, _ in mol.neighbors(atom))
            if out1 and out2 and mol.pi_count(atom) > 0:
                return atom
    return None


def check_rules(step: MechanisticStep, rules: RuleSet = RuleSet()) -> RuleCheck:
    """Fail a step iff one of its products violates an enabled rule."""
    if rules.bredt:
        for mol in step.products.molecules:
            bad = _bredt_violation(mol)
            if bad is not None:
                return RuleCheck(False, f"bredt: sp2 bridgehead atom {bad}")
    return RuleCheck(True)
