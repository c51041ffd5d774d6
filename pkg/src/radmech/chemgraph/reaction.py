"""Mechanistic reaction records and fish-hook arrow codes.

Line format, one record per line:

    <reactant SMILES> >> <product SMILES> | <arrow>;<arrow>;... [| category]

An arrow token is ``SRC>DST`` where SRC and DST are orbital designators:
either a single atom map number (an atom-centered orbital) or ``A-B``, two
map numbers joined by a dash (a bond orbital).  Each broken two-electron
bond contributes a pair of single-electron arrows.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .model import ChemGraphError, MoleculeSet
from .parse import parse_smiles
from .canon import write_smiles


class ReactionError(ChemGraphError):
    pass


@dataclass(frozen=True, order=True)
class Arrow:
    """One fish-hook arrow between orbital designators (sorted map tuples)."""

    src: tuple
    dst: tuple

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(sorted(self.src)))
        object.__setattr__(self, "dst", tuple(sorted(self.dst)))
        for side in (self.src, self.dst):
            if len(side) not in (1, 2):
                raise ReactionError(f"bad orbital designator {side}")

    def format(self) -> str:
        return f"{_fmt_designator(self.src)}>{_fmt_designator(self.dst)}"


def _fmt_designator(d: tuple) -> str:
    return "-".join(str(x) for x in d)


def _parse_designator(text: str) -> tuple:
    parts = text.split("-")
    if not all(p.isdigit() for p in parts) or len(parts) not in (1, 2):
        raise ReactionError(f"bad orbital designator {text!r}")
    return tuple(sorted(int(p) for p in parts))


@dataclass(frozen=True)
class ArrowCode:
    arrows: tuple = ()

    def format(self) -> str:
        return ";".join(a.format() for a in sorted(self.arrows))

    def referenced_maps(self) -> set:
        maps = set()
        for a in self.arrows:
            maps.update(a.src)
            maps.update(a.dst)
        return maps

    def validate_against(self, reactants: MoleculeSet):
        known = reactants.map_to_ref
        for m in self.referenced_maps():
            if m not in known:
                raise ReactionError(f"dangling map number {m} in arrows")
        bond_sources = Counter()
        for a in self.arrows:
            if len(a.src) == 2:
                lo, hi = known[a.src[0]], known[a.src[1]]
                if lo[0] != hi[0]:
                    raise ReactionError(
                        f"arrow source bond {a.src} spans molecules"
                    )
                mol = reactants.molecules[lo[0]]
                if mol.bond_between(lo[1], hi[1]) is None:
                    raise ReactionError(f"arrow source bond {a.src} does not exist")
                bond_sources[a.src] += 1
        for designator, count in bond_sources.items():
            if count != 2:
                raise ReactionError(
                    f"bond orbital {designator} must source a fish-hook pair, "
                    f"got {count} arrow(s)"
                )


def parse_arrows(text: str) -> ArrowCode:
    tokens = [t.strip() for t in text.split(";") if t.strip()]
    if not tokens:
        raise ReactionError("empty arrow code")
    arrows = []
    for tok in tokens:
        if ">" not in tok:
            raise ReactionError(f"arrow token {tok!r} lacks '>'")
        src, dst = tok.split(">", 1)
        arrows.append(Arrow(_parse_designator(src.strip()), _parse_designator(dst.strip())))
    return ArrowCode(tuple(arrows))


@dataclass(frozen=True)
class ReactionRecord:
    reactants: MoleculeSet
    products: MoleculeSet
    arrows: ArrowCode
    category: Optional[str] = None
    split: Optional[str] = None

    def __post_init__(self):
        check_balance(self.reactants, self.products)
        self.arrows.validate_against(self.reactants)


def check_balance(reactants: MoleculeSet, products: MoleculeSet):
    """Atom-map multisets (with elements) and hydrogen totals must agree."""
    r_maps = Counter(
        (a.element, a.map_number) for _, a in reactants.atoms()
    )
    p_maps = Counter(
        (a.element, a.map_number) for _, a in products.atoms()
    )
    if r_maps != p_maps:
        missing = r_maps - p_maps
        extra = p_maps - r_maps
        raise ReactionError(
            f"unbalanced reaction: reactant-only {sorted(missing)}, "
            f"product-only {sorted(extra)}"
        )
    r_h = sum(a.implicit_hydrogens for _, a in reactants.atoms())
    p_h = sum(a.implicit_hydrogens for _, a in products.atoms())
    if r_h != p_h:
        raise ReactionError(
            f"unbalanced hydrogens: {r_h} reactant vs {p_h} product"
        )


def parse_reaction(line: str) -> ReactionRecord:
    body = line.strip()
    if ">>" not in body:
        raise ReactionError("reaction line lacks '>>'")
    left, rest = body.split(">>", 1)
    fields = [f.strip() for f in rest.split("|")]
    if len(fields) < 2:
        raise ReactionError("reaction line lacks arrow code field")
    if len(fields) > 3:
        raise ReactionError("too many fields in reaction line")
    product_text = fields[0]
    arrows = parse_arrows(fields[1])
    category = fields[2] if len(fields) == 3 and fields[2] else None
    reactants = parse_smiles(left.strip(), role="reactants")
    products = parse_smiles(product_text, role="products")
    return ReactionRecord(reactants, products, arrows, category)


def format_reaction(rec: ReactionRecord) -> str:
    left = write_smiles(rec.reactants, canonical=True, keep_maps=True)
    right = write_smiles(rec.products, canonical=True, keep_maps=True)
    line = f"{left}>>{right}|{rec.arrows.format()}"
    if rec.category:
        line += f"|{rec.category}"
    return line
