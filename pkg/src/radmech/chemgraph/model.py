"""Molecular graphs: atoms, bonds, molecules, and molecule sets.

All types are immutable after construction and safe to share across threads.
Valence bookkeeping is enforced when molecules are built so that downstream
orbital reasoning can trust the stored electron counts.
"""

from __future__ import annotations

from dataclasses import dataclass, InitVar
from functools import cached_property
from typing import Iterator, Optional

SUPPORTED_ELEMENTS = ("H", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")

VALENCE_ELECTRONS = {
    "H": 1, "C": 4, "N": 5, "O": 6, "F": 7,
    "P": 5, "S": 6, "Cl": 7, "Br": 7, "I": 7,
}

PERIOD = {
    "H": 1, "C": 2, "N": 2, "O": 2, "F": 2,
    "P": 3, "S": 3, "Cl": 3, "Br": 4, "I": 5,
}

PAULING_EN = {
    "H": 2.20, "C": 2.55, "N": 3.04, "O": 3.44, "F": 3.98,
    "P": 2.19, "S": 2.58, "Cl": 3.16, "Br": 2.96, "I": 2.66,
}

# Allowed sigma-framework sizes (sum of bond orders plus implicit hydrogens)
# keyed by element and formal charge.  Tuples list the permitted valence
# states in increasing order; combinations absent from this table are
# rejected as unsupported charge states.
_BOND_CAPACITIES = {
    ("H", 0): (1,), ("H", 1): (0,), ("H", -1): (0,),
    ("C", 0): (4,), ("C", 1): (3,), ("C", -1): (3,),
    ("N", 0): (3,), ("N", 1): (4,), ("N", -1): (2,),
    ("O", 0): (2,), ("O", 1): (3,), ("O", -1): (1,),
    ("F", 0): (1,), ("F", -1): (0,),
    ("Cl", 0): (1,), ("Cl", -1): (0,),
    ("Br", 0): (1,), ("Br", -1): (0,),
    ("I", 0): (1,), ("I", -1): (0,),
    ("S", 0): (2, 4, 6), ("S", 1): (3, 5), ("S", -1): (1,),
    ("P", 0): (3, 5), ("P", 1): (4,), ("P", -1): (2,),
}

# (molecule index, atom index) within a MoleculeSet.
AtomRef = tuple


class ChemGraphError(ValueError):
    """Base error for molecular graph construction and parsing."""


class ValenceError(ChemGraphError):
    pass


def bond_capacities(element: str, charge: int) -> tuple:
    try:
        return _BOND_CAPACITIES[(element, charge)]
    except KeyError:
        raise ValenceError(
            f"unsupported charge state {element}{charge:+d}"
        ) from None


def smallest_capacity(element: str, charge: int, needed: int) -> Optional[int]:
    """Smallest allowed valence state that accommodates `needed` bonds."""
    for cap in bond_capacities(element, charge):
        if cap >= needed:
            return cap
    return None


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    radical_electrons: int = 0
    implicit_hydrogens: int = 0
    map_number: Optional[int] = None
    index: int = 0

    def __post_init__(self):
        if self.element not in SUPPORTED_ELEMENTS:
            raise ChemGraphError(f"unsupported element {self.element!r}")
        if self.implicit_hydrogens < 0:
            raise ChemGraphError("negative implicit hydrogen count")
        if self.map_number is not None and self.map_number < 1:
            raise ChemGraphError("atom map numbers are positive integers")
        if self.radical_electrons not in (0, 1, 2):
            raise ValenceError(
                f"{self.element} with {self.radical_electrons} unpaired electrons"
            )


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    order: int = 1
    aromatic_source: bool = False

    def __post_init__(self):
        if self.i == self.j:
            raise ChemGraphError("bond endpoints must be distinct")
        if self.i > self.j:
            i, j = self.j, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)
        if self.order not in (1, 2, 3):
            raise ChemGraphError(f"bond order {self.order} outside 1..3")

    def other(self, idx: int) -> int:
        return self.j if idx == self.i else self.i


@dataclass(frozen=True)
class Molecule:
    """A connected, kekulized molecular graph."""

    atoms: tuple = ()
    bonds: tuple = ()
    checked: InitVar[bool] = True

    def __post_init__(self, checked):
        if checked:
            self._validate()

    def _validate(self):
        n = len(self.atoms)
        seen_pairs = set()
        for b in self.bonds:
            if not (0 <= b.i < n and 0 <= b.j < n):
                raise ChemGraphError("bond endpoint out of range")
            if (b.i, b.j) in seen_pairs:
                raise ChemGraphError(f"duplicate bond {b.i}-{b.j}")
            seen_pairs.add((b.i, b.j))
        if n and not self._connected():
            raise ChemGraphError("molecule graph is not connected")
        for i, a in enumerate(self.atoms):
            if a.index != i:
                raise ChemGraphError("atom index does not match position")
            self._validate_atom(i)

    def _connected(self) -> bool:
        n = len(self.atoms)
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j, _ in self.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def _validate_atom(self, i: int):
        a = self.atoms[i]
        orders = self.bond_order_sum(i)
        needed = orders + a.implicit_hydrogens
        cap = smallest_capacity(a.element, a.formal_charge, needed)
        if cap is None:
            raise ValenceError(
                f"{a.element}{a.formal_charge:+d} cannot carry "
                f"{needed} bonds (atom {i})"
            )
        own = VALENCE_ELECTRONS[a.element] - a.formal_charge
        nonbonding = own - needed
        if nonbonding < a.radical_electrons or (nonbonding - a.radical_electrons) % 2:
            raise ValenceError(
                f"inconsistent electron bookkeeping on {a.element} (atom {i}): "
                f"{nonbonding} nonbonding vs {a.radical_electrons} unpaired"
            )
        lone = (nonbonding - a.radical_electrons) // 2
        sigma = len(self.neighbors(i)) + a.implicit_hydrogens
        pi = orders - len(self.neighbors(i))
        slots = 1 if a.element == "H" else (4 if PERIOD[a.element] == 2 else 6)
        if sigma + pi + a.radical_electrons + lone > slots:
            raise ValenceError(f"orbital overfill on {a.element} (atom {i})")

    # -- graph queries -------------------------------------------------

    @cached_property
    def _adjacency(self):
        adj = {i: [] for i in range(len(self.atoms))}
        for b in self.bonds:
            adj[b.i].append((b.j, b.order))
            adj[b.j].append((b.i, b.order))
        return {i: tuple(sorted(v)) for i, v in adj.items()}

    def neighbors(self, i: int) -> tuple:
        """Pairs of (neighbor index, bond order)."""
        return self._adjacency[i]

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        lo, hi = min(i, j), max(i, j)
        for b in self.bonds:
            if b.i == lo and b.j == hi:
                return b
        return None

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def bond_order_sum(self, i: int) -> int:
        return sum(order for _, order in self.neighbors(i))

    def pi_count(self, i: int) -> int:
        return self.bond_order_sum(i) - self.degree(i)

    def lone_pairs(self, i: int) -> int:
        a = self.atoms[i]
        own = VALENCE_ELECTRONS[a.element] - a.formal_charge
        nonbonding = own - self.bond_order_sum(i) - a.implicit_hydrogens
        return (nonbonding - a.radical_electrons) // 2

    def empty_orbitals(self, i: int) -> int:
        a = self.atoms[i]
        slots = 1 if a.element == "H" else 4
        used = (
            self.degree(i)
            + a.implicit_hydrogens
            + self.pi_count(i)
            + a.radical_electrons
            + self.lone_pairs(i)
        )
        return max(0, slots - used)

    @property
    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")

    @cached_property
    def rings(self) -> tuple:
        """All simple cycles up to size 8, as tuples of atom indices.

        Each cycle is reported once, rooted at its smallest atom index and
        oriented toward the smaller of its two neighbors in the cycle.
        """
        cycles = set()
        n = len(self.atoms)
        for start in range(n):
            stack = [(start, (start,))]
            while stack:
                node, path = stack.pop()
                for nxt, _ in self.neighbors(node):
                    if nxt == start and len(path) >= 3:
                        if min(path) == start and path[1] < path[-1]:
                            cycles.add(path)
                    elif nxt not in path and nxt > start and len(path) < 8:
                        stack.append((nxt, path + (nxt,)))
        return tuple(sorted(cycles))

    def ring_membership(self, i: int) -> tuple:
        """Sizes of rings (<= 8) containing atom i, sorted ascending."""
        return tuple(sorted(len(r) for r in self.rings if i in r))


@dataclass(frozen=True)
class MoleculeSet:
    """An ordered collection of molecules with set-wide unique atom maps."""

    molecules: tuple = ()
    role: str = "reactants"

    def __post_init__(self):
        if self.role not in ("reactants", "products"):
            raise ChemGraphError(f"unknown molecule set role {self.role!r}")
        seen = set()
        for mol in self.molecules:
            for a in mol.atoms:
                if a.map_number is None:
                    continue
                if a.map_number in seen:
                    raise ChemGraphError(
                        f"duplicate atom map {a.map_number} in molecule set"
                    )
                seen.add(a.map_number)

    def atoms(self) -> Iterator:
        """Yields (ref, atom) over all molecules."""
        for mi, mol in enumerate(self.molecules):
            for ai, atom in enumerate(mol.atoms):
                yield (mi, ai), atom

    def atom(self, ref: AtomRef) -> Atom:
        mi, ai = ref
        return self.molecules[mi].atoms[ai]

    def molecule_of(self, ref: AtomRef) -> Molecule:
        return self.molecules[ref[0]]

    @cached_property
    def map_to_ref(self) -> dict:
        out = {}
        for ref, atom in self.atoms():
            if atom.map_number is not None:
                out[atom.map_number] = ref
        return out

    @property
    def max_map(self) -> int:
        return max(self.map_to_ref, default=0)

    @property
    def atom_count(self) -> int:
        return sum(len(m.atoms) for m in self.molecules)

    @property
    def heavy_atom_count(self) -> int:
        return sum(m.heavy_atom_count for m in self.molecules)

    def fully_mapped(self) -> bool:
        return all(a.map_number is not None for _, a in self.atoms())

    def with_maps(self) -> "MoleculeSet":
        """Assign map numbers to unmapped atoms, preserving existing ones."""
        if self.fully_mapped():
            return self
        used = set(self.map_to_ref)
        counter = 1
        new_mols = []
        for mol in self.molecules:
            atoms = []
            for a in mol.atoms:
                if a.map_number is None:
                    while counter in used:
                        counter += 1
                    used.add(counter)
                    atoms.append(
                        Atom(a.element, a.formal_charge, a.radical_electrons,
                             a.implicit_hydrogens, counter, a.index)
                    )
                else:
                    atoms.append(a)
            new_mols.append(Molecule(tuple(atoms), mol.bonds))
        return MoleculeSet(tuple(new_mols), self.role)

    def without_maps(self) -> "MoleculeSet":
        new_mols = []
        for mol in self.molecules:
            atoms = tuple(
                Atom(a.element, a.formal_charge, a.radical_electrons,
                     a.implicit_hydrogens, None, a.index)
                for a in mol.atoms
            )
            new_mols.append(Molecule(atoms, mol.bonds))
        return MoleculeSet(tuple(new_mols), self.role)


def collapse_explicit_hydrogens(mol: Molecule) -> Molecule:
    """Fold plain explicit hydrogens (neutral, no radicals, singly bonded to
    a heavy atom) back into implicit counts on their heavy neighbor."""
    absorbed = {}
    for i, a in enumerate(mol.atoms):
        if (
            a.element == "H"
            and a.formal_charge == 0
            and a.radical_electrons == 0
            and a.implicit_hydrogens == 0
            and mol.degree(i) == 1
        ):
            j, order = mol.neighbors(i)[0]
            if order == 1 and mol.atoms[j].element != "H":
                absorbed[i] = j
    if not absorbed:
        return mol
    gains = {}
    for i, j in absorbed.items():
        gains[j] = gains.get(j, 0) + 1
    keep = [i for i in range(len(mol.atoms)) if i not in absorbed]
    local = {g: l for l, g in enumerate(keep)}
    atoms = tuple(
        Atom(
            mol.atoms[g].element, mol.atoms[g].formal_charge,
            mol.atoms[g].radical_electrons,
            mol.atoms[g].implicit_hydrogens + gains.get(g, 0),
            mol.atoms[g].map_number, l,
        )
        for l, g in enumerate(keep)
    )
    bonds = tuple(
        Bond(local[b.i], local[b.j], b.order, b.aromatic_source)
        for b in mol.bonds
        if b.i in local and b.j in local
    )
    return Molecule(atoms, bonds)


def collapse_hydrogens(ms: MoleculeSet) -> MoleculeSet:
    return MoleculeSet(
        tuple(collapse_explicit_hydrogens(m) for m in ms.molecules), ms.role
    )


def total_electron_count(ms: MoleculeSet) -> int:
    """2 * bonds + 2 * lone pairs + unpaired electrons, hydrogens included."""
    total = 0
    for mol in ms.molecules:
        for b in mol.bonds:
            total += 2 * b.order
        for i, a in enumerate(mol.atoms):
            total += 2 * a.implicit_hydrogens  # one sigma bond per implicit H
            total += 2 * mol.lone_pairs(i)
            total += a.radical_electrons
    return total
