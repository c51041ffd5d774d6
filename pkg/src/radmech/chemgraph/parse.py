"""SMILES parsing for the supported element subset.

The accepted grammar covers atoms (bare organic-subset symbols and bracket
atoms with charge, explicit hydrogen counts, and atom maps), bond symbols
``- = # :``, branches, ring closures (including ``%nn``), dot-separated
components, and aromatic lowercase notation.  Aromatic input is kekulized at
parse time; failure to kekulize is a parse error.  Stereo markers are ignored
with a warning and isotope labels are rejected, since neither participates in
the radical chemistry handled here.

Radical electrons are inferred from the valence deficit of bracket atoms:
the smallest allowed valence state at least as large as the explicit bond and
hydrogen count determines the number of unpaired electrons.  Bare atoms are
completed with implicit hydrogens and carry no radicals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .model import (
    Atom,
    Bond,
    ChemGraphError,
    Molecule,
    MoleculeSet,
    SUPPORTED_ELEMENTS,
    ValenceError,
    bond_capacities,
    smallest_capacity,
)

log = logging.getLogger(__name__)

_ORGANIC_BARE = ("Cl", "Br", "C", "N", "O", "S", "P", "F", "I")
_AROMATIC_BARE = ("c", "n", "o", "s", "p")
_BOND_SYMBOLS = {"-": 1, "=": 2, "#": 3}


class SmilesError(ChemGraphError):
    """Syntax or valence error with the offending string position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


@dataclass
class _RawAtom:
    element: str
    aromatic: bool = False
    charge: int = 0
    hcount: Optional[int] = None  # None: bare atom, infer later
    map_number: Optional[int] = None
    position: int = 0
    component: int = 0


@dataclass
class _RawBond:
    i: int
    j: int
    order: Optional[int]  # None: unspecified
    aromatic_marker: bool = False
    position: int = 0


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list = []
        self.bonds: list = []
        self.component = 0

    def error(self, message: str):
        raise SmilesError(message, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def parse(self):
        prev: Optional[int] = None
        pending_order: Optional[int] = None
        pending_aromatic = False
        pending_pos = 0
        branch_stack: list = []
        ring_open: dict = {}

        while self.pos < len(self.text):
            ch = self.peek()
            if ch == " ":
                self.error("unexpected whitespace")
            if ch == ".":
                if branch_stack:
                    self.error("component separator inside branch")
                if pending_order is not None or pending_aromatic:
                    self.error("dangling bond before separator")
                prev = None
                self.component += 1
                self.pos += 1
                continue
            if ch == "(":
                if prev is None:
                    self.error("branch with no preceding atom")
                branch_stack.append(prev)
                self.pos += 1
                continue
            if ch == ")":
                if not branch_stack:
                    self.error("unmatched closing parenthesis")
                prev = branch_stack.pop()
                self.pos += 1
                continue
            if ch in _BOND_SYMBOLS:
                pending_order = _BOND_SYMBOLS[ch]
                pending_pos = self.pos
                self.pos += 1
                continue
            if ch == ":":
                pending_aromatic = True
                pending_order = None
                pending_pos = self.pos
                self.pos += 1
                continue
            if ch in "/\\":
                log.warning("ignoring stereo bond marker at position %d", self.pos)
                self.pos += 1
                continue
            if ch.isdigit() or ch == "%":
                if prev is None:
                    self.error("ring closure with no preceding atom")
                digit_pos = self.pos
                if ch == "%":
                    self.pos += 1
                    num = ""
                    while self.peek().isdigit():
                        num += self.take()
                    if len(num) < 2:
                        self.error("'%' ring closure needs two digits")
                else:
                    num = self.take()
                ring_id = int(num)
                if ring_id in ring_open:
                    other, other_order, other_arom = ring_open.pop(ring_id)
                    if other == prev:
                        self.error("ring closure bonds an atom to itself")
                    order = pending_order
                    if order is not None and other_order is not None and order != other_order:
                        self.error(f"conflicting ring bond orders for ring {ring_id}")
                    order = order if order is not None else other_order
                    self.bonds.append(_RawBond(
                        other, prev, order,
                        pending_aromatic or other_arom, digit_pos,
                    ))
                else:
                    ring_open[ring_id] = (prev, pending_order, pending_aromatic)
                pending_order = None
                pending_aromatic = False
                continue
            # otherwise an atom
            idx = self._parse_atom()
            if prev is not None:
                self.bonds.append(_RawBond(
                    prev, idx, pending_order, pending_aromatic, pending_pos,
                ))
            elif pending_order is not None or pending_aromatic:
                self.error("bond symbol with no preceding atom")
            pending_order = None
            pending_aromatic = False
            prev = idx

        if branch_stack:
            self.error("unclosed branch")
        if ring_open:
            self.error(f"unclosed ring closure {sorted(ring_open)[0]}")
        if pending_order is not None or pending_aromatic:
            self.error("dangling bond at end of input")
        if not self.atoms:
            self.error("empty SMILES")

    def _parse_atom(self) -> int:
        start = self.pos
        ch = self.peek()
        if ch == "[":
            raw = self._parse_bracket_atom()
        else:
            raw = None
            for sym in _ORGANIC_BARE:
                if self.text.startswith(sym, self.pos):
                    self.pos += len(sym)
                    raw = _RawAtom(sym, position=start)
                    break
            if raw is None and ch in _AROMATIC_BARE:
                self.pos += 1
                raw = _RawAtom(ch.upper(), aromatic=True, position=start)
            if raw is None:
                self.error(f"unexpected character {ch!r}")
        raw.component = self.component
        self.atoms.append(raw)
        return len(self.atoms) - 1

    def _parse_bracket_atom(self) -> _RawAtom:
        start = self.pos
        self.pos += 1  # consume '['
        if self.peek().isdigit():
            self.error("isotope labels are not supported")
        element = None
        aromatic = False
        for sym in SUPPORTED_ELEMENTS:
            if self.text.startswith(sym, self.pos):
                # prefer the longest match (Cl/Br before C/B)
                if element is None or len(sym) > len(element):
                    element = sym
        if element is not None:
            self.pos += len(element)
        else:
            ch = self.peek()
            if ch in _AROMATIC_BARE:
                element = ch.upper()
                aromatic = True
                self.pos += 1
            else:
                self.error(f"unsupported element in bracket atom")
        while self.peek() == "@":
            log.warning("ignoring stereo marker at position %d", self.pos)
            self.pos += 1
        hcount = 0
        if self.peek() == "H":
            self.pos += 1
            digits = ""
            while self.peek().isdigit():
                digits += self.take()
            hcount = int(digits) if digits else 1
        charge = 0
        if self.peek() in "+-":
            sign = 1 if self.take() == "+" else -1
            digits = ""
            while self.peek().isdigit():
                digits += self.take()
            if digits:
                charge = sign * int(digits)
            else:
                charge = sign
                while self.peek() == ("+" if sign > 0 else "-"):
                    self.take()
                    charge += sign
        map_number = None
        if self.peek() == ":":
            self.take()
            digits = ""
            while self.peek().isdigit():
                digits += self.take()
            if not digits:
                self.error("atom map expects digits")
            map_number = int(digits)
            if map_number < 1:
                self.error("atom map numbers start at 1")
        if self.peek() != "]":
            self.error("malformed bracket atom")
        self.pos += 1
        return _RawAtom(element, aromatic, charge, hcount, map_number, start)


def _kekulize(atoms: list, bonds: list):
    """Resolve aromatic notation to alternating single/double bonds.

    An aromatic bond is one written ``:`` or left unspecified between two
    aromatic atoms.  Each aromatic atom contributes a pi-bond demand derived
    from its smallest valence state; a perfect matching over the demanding
    atoms assigns the double bonds.  No matching means the input cannot be
    kekulized and is rejected.
    """
    aromatic_bonds = []
    explicit_orders = [0] * len(atoms)
    adj = {i: [] for i in range(len(atoms))}
    for bi, b in enumerate(bonds):
        is_aromatic = b.aromatic_marker or (
            b.order is None and atoms[b.i].aromatic and atoms[b.j].aromatic
        )
        if is_aromatic:
            b.order = 1
            b.aromatic_marker = True
            aromatic_bonds.append(bi)
            adj[b.i].append((b.j, bi))
            adj[b.j].append((b.i, bi))
        elif b.order is None:
            b.order = 1

    needs = {}
    for i, a in enumerate(atoms):
        if not a.aromatic:
            continue
        if a.charge < 0:
            continue  # anionic aromatic atoms contribute a lone pair, not a double bond
        sigma = sum(b.order for b in bonds if i in (b.i, b.j))
        h = a.hcount or 0
        caps = bond_capacities(a.element, a.charge)
        demand = max(0, min(1, caps[0] - sigma - h))
        if demand:
            needs[i] = True

    matched_bonds = set()

    def match(remaining: list, used: set) -> bool:
        if not remaining:
            return True
        i = remaining[0]
        if i in used:
            return match(remaining[1:], used)
        for j, bi in sorted(adj[i]):
            if j in used or j not in needs:
                continue
            matched_bonds.add(bi)
            if match(remaining[1:], used | {i, j}):
                return True
            matched_bonds.discard(bi)
        return False

    if not match(sorted(needs), set()):
        bad = sorted(needs)[0] if needs else 0
        raise SmilesError("cannot kekulize aromatic system", atoms[bad].position)
    for bi in matched_bonds:
        bonds[bi].order = 2


def _finalize_atom(raw: _RawAtom, order_sum: int) -> Atom:
    if raw.hcount is None:
        cap = smallest_capacity(raw.element, raw.charge, order_sum)
        if cap is None:
            raise SmilesError(
                f"{raw.element} cannot carry {order_sum} bonds", raw.position
            )
        h = cap - order_sum
        radicals = 0
    else:
        h = raw.hcount
        needed = order_sum + h
        cap = smallest_capacity(raw.element, raw.charge, needed)
        if cap is None:
            raise SmilesError(
                f"{raw.element}{raw.charge:+d} cannot carry {needed} bonds",
                raw.position,
            )
        radicals = cap - needed
        if radicals > 2:
            raise SmilesError(
                f"{raw.element} with {radicals} unpaired electrons", raw.position
            )
    return Atom(raw.element, raw.charge, radicals, h, raw.map_number)


def parse_smiles(text: str, role: str = "reactants") -> MoleculeSet:
    """Parse dot-separated, optionally atom-mapped SMILES into a MoleculeSet."""
    parser = _Parser(text.strip())
    parser.parse()
    _kekulize(parser.atoms, parser.bonds)

    order_sums = [0] * len(parser.atoms)
    for b in parser.bonds:
        order_sums[b.i] += b.order
        order_sums[b.j] += b.order

    # group atoms by component, preserving input order
    comp_ids = sorted({a.component for a in parser.atoms})
    molecules = []
    for comp in comp_ids:
        indices = [i for i, a in enumerate(parser.atoms) if a.component == comp]
        local = {g: l for l, g in enumerate(indices)}
        atoms = []
        for l, g in enumerate(indices):
            raw = parser.atoms[g]
            try:
                atom = _finalize_atom(raw, order_sums[g])
            except ValenceError as exc:
                raise SmilesError(str(exc), raw.position) from exc
            atoms.append(Atom(
                atom.element, atom.formal_charge, atom.radical_electrons,
                atom.implicit_hydrogens, atom.map_number, l,
            ))
        bonds = []
        for b in parser.bonds:
            if b.i in local and b.j in local:
                bonds.append(Bond(local[b.i], local[b.j], b.order, b.aromatic_marker))
            elif (b.i in local) != (b.j in local):
                raise SmilesError("bond crosses component separator", b.position)
        try:
            molecules.append(Molecule(tuple(atoms), tuple(bonds)))
        except ChemGraphError as exc:
            first = parser.atoms[indices[0]]
            raise SmilesError(str(exc), first.position) from exc
    try:
        return MoleculeSet(tuple(molecules), role)
    except ChemGraphError as exc:
        raise SmilesError(str(exc), 0) from exc
