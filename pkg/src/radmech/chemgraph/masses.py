"""Atomic mass tables (IUPAC values) and molecular mass computation."""

from __future__ import annotations

from .model import Molecule, MoleculeSet

MONOISOTOPIC = {
    "H": 1.00782503207,
    "C": 12.0,
    "N": 14.0030740048,
    "O": 15.9949146196,
    "F": 18.9984031630,
    "P": 30.9737616320,
    "S": 31.9720711744,
    "Cl": 34.9688526820,
    "Br": 78.9183376000,
    "I": 126.9044719000,
}

AVERAGE = {
    "H": 1.008,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998403163,
    "P": 30.973761998,
    "S": 32.06,
    "Cl": 35.45,
    "Br": 79.904,
    "I": 126.90447,
}


def molecular_mass(mol: Molecule, mode: str = "monoisotopic") -> float:
    """Mass in daltons, implicit hydrogens included."""
    if mode == "monoisotopic":
        table = MONOISOTOPIC
    elif mode == "average":
        table = AVERAGE
    else:
        raise ValueError(f"unknown mass mode {mode!r}")
    total = 0.0
    for a in mol.atoms:
        total += table[a.element] + a.implicit_hydrogens * table["H"]
    return total


def set_mass(ms: MoleculeSet, mode: str = "monoisotopic") -> float:
    return sum(molecular_mass(m, mode) for m in ms.molecules)
