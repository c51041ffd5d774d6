"""Canonical atom ranking and SMILES output.

Ranking uses iterative neighborhood refinement: atoms start from local
invariants (element, charge, radicals, hydrogen count, degree, bond order
sum) and are repeatedly re-ranked by the multiset of (bond order, neighbor
rank) pairs until stable.  Symmetric atoms end up sharing a rank.

Canonical output resolves remaining ties by individualization: each member
of the first tied cell is promoted in turn, refinement is rerun, and the
lexicographically smallest emitted string wins.  Atoms left tied only by
automorphism emit identical strings, so the search is cheap on molecules of
the size handled here.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

from .model import Molecule, MoleculeSet, smallest_capacity

_BOND_TOKEN = {1: "", 2: "=", 3: "#"}


def _dense(keys: list) -> list:
    order = sorted(set(keys))
    index = {k: r for r, k in enumerate(order)}
    return [index[k] for k in keys]


def _initial_keys(mol: Molecule) -> list:
    keys = []
    for i, a in enumerate(mol.atoms):
        keys.append((
            a.element,
            a.formal_charge,
            a.radical_electrons,
            a.implicit_hydrogens,
            mol.degree(i),
            mol.bond_order_sum(i),
        ))
    return keys


def _refine(mol: Molecule, ranks: list) -> list:
    while True:
        keys = [
            (ranks[i], tuple(sorted((order, ranks[j]) for j, order in mol.neighbors(i))))
            for i in range(len(mol.atoms))
        ]
        new = _dense(keys)
        if new == ranks:
            return ranks
        ranks = new


def canonical_ranks(mol: Molecule) -> list:
    """Per-atom integer ranks, invariant under atom reindexing.

    Symmetric atoms share ranks; refinement breaks all structural ties.
    """
    if not mol.atoms:
        return []
    return _refine(mol, _dense(_initial_keys(mol)))


def _atom_token(mol: Molecule, i: int, keep_maps: bool) -> str:
    a = mol.atoms[i]
    bare_default = None
    if a.element != "H" and a.formal_charge == 0:
        cap = smallest_capacity(a.element, 0, mol.bond_order_sum(i))
        if cap is not None:
            bare_default = cap - mol.bond_order_sum(i)
    wants_map = keep_maps and a.map_number is not None
    if (
        bare_default is not None
        and a.radical_electrons == 0
        and a.implicit_hydrogens == bare_default
        and not wants_map
    ):
        return a.element
    parts = ["[", a.element]
    if a.implicit_hydrogens == 1:
        parts.append("H")
    elif a.implicit_hydrogens > 1:
        parts.append(f"H{a.implicit_hydrogens}")
    if a.formal_charge == 1:
        parts.append("+")
    elif a.formal_charge == -1:
        parts.append("-")
    elif a.formal_charge > 1:
        parts.append(f"+{a.formal_charge}")
    elif a.formal_charge < -1:
        parts.append(str(a.formal_charge))
    if wants_map:
        parts.append(f":{a.map_number}")
    parts.append("]")
    return "".join(parts)


def _emit(mol: Molecule, position: list, keep_maps: bool) -> str:
    """Write one molecule following the total atom order `position`."""
    n = len(mol.atoms)
    if n == 0:
        return ""
    start = position.index(min(position))

    # first pass: DFS tree and back edges in emission order
    visited = set()
    children = {i: [] for i in range(n)}
    back_edges = []
    preorder = {}
    seen_back = set()

    def dfs(node: int, par: int):
        visited.add(node)
        preorder[node] = len(preorder)
        for j, _ in sorted(mol.neighbors(node), key=lambda t: position[t[0]]):
            if j == par:
                continue
            if j in visited:
                edge = (min(node, j), max(node, j))
                if edge not in seen_back:
                    seen_back.add(edge)
                    back_edges.append((node, j))
            else:
                children[node].append(j)
                dfs(j, node)

    dfs(start, -1)

    ring_digits = {i: [] for i in range(n)}  # atom -> [(digit, order, opening)]
    for digit, (late, early) in enumerate(
        sorted(back_edges, key=lambda e: (preorder[e[1]], preorder[e[0]])), start=1
    ):
        bond = mol.bond_between(late, early)
        ring_digits[early].append((digit, bond.order, True))
        ring_digits[late].append((digit, bond.order, False))

    def digit_token(digit: int) -> str:
        return str(digit) if digit < 10 else f"%{digit:02d}"

    out = []

    def write(node: int):
        out.append(_atom_token(mol, node, keep_maps))
        for digit, order, opening in sorted(ring_digits[node]):
            if opening:
                out.append(_BOND_TOKEN[order])
            out.append(digit_token(digit))
        kids = children[node]
        for k, child in enumerate(kids):
            bond = mol.bond_between(node, child)
            token = _BOND_TOKEN[bond.order] + ""
            if k < len(kids) - 1:
                out.append("(")
                out.append(token)
                write(child)
                out.append(")")
            else:
                out.append(token)
                write(child)

    write(start)
    return "".join(out)


def _canonical_emit(mol: Molecule, ranks: list, keep_maps: bool) -> str:
    counts = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    tied = [r for r in sorted(counts) if counts[r] > 1]
    if not tied:
        return _emit(mol, ranks, keep_maps)
    cell = [i for i, r in enumerate(ranks) if r == tied[0]]
    best: Optional[str] = None
    for member in cell:
        keys = [(ranks[i], 0 if i == member else 1) for i in range(len(ranks))]
        candidate = _canonical_emit(mol, _refine(mol, _dense(keys)), keep_maps)
        if best is None or candidate < best:
            best = candidate
    return best


@lru_cache(maxsize=65536)
def molecule_smiles(mol: Molecule, canonical: bool = True, keep_maps: bool = True) -> str:
    if not mol.atoms:
        return ""
    if canonical:
        return _canonical_emit(mol, canonical_ranks(mol), keep_maps)
    return _emit(mol, list(range(len(mol.atoms))), keep_maps)


def write_smiles(ms: MoleculeSet, canonical: bool = True, keep_maps: bool = True) -> str:
    """Serialize a molecule set; canonical output is invariant under input
    atom and molecule reordering."""
    parts = [molecule_smiles(m, canonical, keep_maps) for m in ms.molecules]
    if canonical:
        parts.sort()
    return ".".join(parts)


def canonical_key(ms: MoleculeSet) -> str:
    """Map-free canonical string, the graph-identity key of a molecule set."""
    return write_smiles(ms, canonical=True, keep_maps=False)


def isomorphic(a: MoleculeSet, b: MoleculeSet) -> bool:
    """Graph isomorphism of molecule sets (atoms by element/charge/radicals/
    hydrogens, bonds by order), ignoring maps and ordering."""
    return canonical_key(a) == canonical_key(b)
