"""Molecular graph substrate: parsing, serialization, masses, reactions."""

from .model import (
    Atom,
    AtomRef,
    Bond,
    ChemGraphError,
    Molecule,
    MoleculeSet,
    PAULING_EN,
    PERIOD,
    SUPPORTED_ELEMENTS,
    VALENCE_ELECTRONS,
    ValenceError,
    total_electron_count,
)
from .parse import SmilesError, parse_smiles
from .canon import (
    canonical_key,
    canonical_ranks,
    isomorphic,
    molecule_smiles,
    write_smiles,
)
from .masses import AVERAGE, MONOISOTOPIC, molecular_mass, set_mass
from .reaction import (
    Arrow,
    ArrowCode,
    ReactionError,
    ReactionRecord,
    check_balance,
    format_reaction,
    parse_arrows,
    parse_reaction,
)

__all__ = [
    "Atom", "AtomRef", "Bond", "ChemGraphError", "Molecule", "MoleculeSet",
    "PAULING_EN", "PERIOD", "SUPPORTED_ELEMENTS", "VALENCE_ELECTRONS",
    "ValenceError", "total_electron_count",
    "SmilesError", "parse_smiles",
    "canonical_key", "canonical_ranks", "isomorphic", "molecule_smiles",
    "write_smiles",
    "AVERAGE", "MONOISOTOPIC", "molecular_mass", "set_mass",
    "Arrow", "ArrowCode", "ReactionError", "ReactionRecord", "check_balance",
    "format_reaction", "parse_arrows", "parse_reaction",
]
