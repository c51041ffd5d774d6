"""Vector representations: per-atom descriptors, reaction feature vectors,
and the differential reaction fingerprint.

Atom descriptors concatenate an atomic block (one-hot element, charge,
unpaired electrons, hydrogen count, degree, ring membership within the
descriptor radius, electronegativity, ...) with graph-topological counts:
per-distance shells of element/bond/degree histograms, edge-type counts,
bounded walk signatures, and ring sizes inside the radius ball.  Two sizes
are published: a radius-3 vector of length 800 and a radius-1 vector of
length 140.  Slots the layout does not use are zero-reserved so the
published lengths stay fixed.

All representations are index-free: they depend only on the local graph, so
they are invariant to atom renumbering and molecule reordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chemgraph.model import (
    AtomRef,
    Molecule,
    MoleculeSet,
    PAULING_EN,
    PERIOD,
    SUPPORTED_ELEMENTS,
)
from .chemgraph.canon import molecule_smiles
from .orbchain import MechanisticStep

ATOM_VARIANTS = {"twostep_800": (800, 3), "contrastive_140": (140, 1)}
REACTION_VECTOR_LENGTH = 3200
FINGERPRINT_BITS = 2048
FINGERPRINT_RADIUS = (0, 4)
FINGERPRINT_SEED = 42

_ELEMENT_INDEX = {e: i for i, e in enumerate(SUPPORTED_ELEMENTS)}
_ATOMIC_LENGTH = 85
_SHELL_LENGTH = 55  # element(10) + element*order(30) + degree(7) + charge(5) + radicals(3)
_EDGE_LENGTH = 165  # unordered element pairs(55) * order(3)
_RING_LENGTH = 6    # ring sizes 3..8
_PATH2_LENGTH = 90  # (order, order, end element)
_PATH3_LENGTH = 270  # (order, order, order, end element)


@dataclass(frozen=True)
class AtomDescriptor:
    values: np.ndarray
    variant: str
    radius: int


@dataclass(frozen=True)
class ReactionVector:
    values: np.ndarray
    variant: str = "predefined"


@dataclass(frozen=True)
class ReactionFingerprint:
    bits: np.ndarray
    variant: str = "drfp"
    radius: tuple = FINGERPRINT_RADIUS
    seed: int = FINGERPRINT_SEED


def _one_hot(value: int, low: int, high: int) -> list:
    vec = [0.0] * (high - low + 1)
    if low <= value <= high:
        vec[value - low] = 1.0
    return vec


def _ball(mol: Molecule, center: int, radius: int) -> dict:
    """Graph distances from the center, capped at `radius`."""
    dist = {center: 0}
    frontier = [center]
    for d in range(1, radius + 1):
        nxt = []
        for i in frontier:
            for j, _ in mol.neighbors(i):
                if j not in dist:
                    dist[j] = d
                    nxt.append(j)
        frontier = nxt
    return dist


def _rings_in_ball(mol: Molecule, ball: set) -> list:
    return [r for r in mol.rings if set(r) <= ball]


def _atomic_block(mol: Molecule, i: int, ball: set) -> list:
    a = mol.atoms[i]
    out = []
    out += _one_hot(_ELEMENT_INDEX[a.element], 0, 9)
    out += _one_hot(max(-2, min(2, a.formal_charge)), -2, 2)
    out += _one_hot(a.radical_electrons, 0, 2)
    out += _one_hot(min(4, a.implicit_hydrogens), 0, 4)
    out += _one_hot(min(5, mol.degree(i)), 0, 5)
    out += _one_hot(min(6, mol.bond_order_sum(i)), 0, 6)
    out += _one_hot(min(3, mol.pi_count(i)), 0, 3)
    out += _one_hot(min(4, mol.lone_pairs(i)), 0, 4)
    out += _one_hot(min(2, mol.empty_orbitals(i)), 0, 2)
    local_rings = [r for r in _rings_in_ball(mol, ball) if i in r]
    out.append(1.0 if local_rings else 0.0)
    smallest = min((len(r) for r in local_rings), default=0)
    out += _one_hot(smallest, 3, 8)
    out.append(PAULING_EN[a.element])
    out += _one_hot(PERIOD[a.element], 1, 5)
    out.append(1.0 if mol.degree(i) <= 1 else 0.0)
    out.append(1.0 if any(
        mol.atoms[j].radical_electrons for j, _ in mol.neighbors(i)) else 0.0)
    out.append(1.0 if a.implicit_hydrogens else 0.0)
    out.append(float(sum(1 for j, _ in mol.neighbors(i)
                         if mol.atoms[j].element != "H")))
    out += [0.0] * (_ATOMIC_LENGTH - len(out))  # reserved slots
    assert len(out) == _ATOMIC_LENGTH
    return out


def _shell_block(mol: Molecule, dist: dict, d: int) -> list:
    members = [i for i, dd in dist.items() if dd == d]
    elem = [0.0] * 10
    elem_order = [0.0] * 30
    degree = [0.0] * 7
    charge = [0.0] * 5
    radicals = [0.0] * 3
    for i in members:
        a = mol.atoms[i]
        elem[_ELEMENT_INDEX[a.element]] += 1.0
        degree[min(6, mol.degree(i))] += 1.0
        charge[max(-2, min(2, a.formal_charge)) + 2] += 1.0
        radicals[a.radical_electrons] += 1.0
        for j, order in mol.neighbors(i):
            if dist.get(j) == d - 1:
                elem_order[_ELEMENT_INDEX[a.element] * 3 + order - 1] += 1.0
    return elem + elem_order + degree + charge + radicals


def _edge_block(mol: Molecule, ball: set) -> list:
    out = [0.0] * _EDGE_LENGTH
    pair_index = {}
    k = 0
    for x in range(10):
        for y in range(x, 10):
            pair_index[(x, y)] = k
            k += 1
    for b in mol.bonds:
        if b.i in ball and b.j in ball:
            e1 = _ELEMENT_INDEX[mol.atoms[b.i].element]
            e2 = _ELEMENT_INDEX[mol.atoms[b.j].element]
            key = pair_index[(min(e1, e2), max(e1, e2))]
            out[key * 3 + b.order - 1] += 1.0
    return out


def _ring_block(mol: Molecule, ball: set) -> list:
    out = [0.0] * _RING_LENGTH
    for r in _rings_in_ball(mol, ball):
        if 3 <= len(r) <= 8:
            out[len(r) - 3] += 1.0
    return out


def _path_blocks(mol: Molecule, center: int) -> tuple:
    path2 = [0.0] * _PATH2_LENGTH
    path3 = [0.0] * _PATH3_LENGTH
    for j1, o1 in mol.neighbors(center):
        for j2, o2 in mol.neighbors(j1):
            if j2 == center:
                continue
            e2 = _ELEMENT_INDEX[mol.atoms[j2].element]
            path2[((o1 - 1) * 3 + (o2 - 1)) * 10 + e2] += 1.0
            for j3, o3 in mol.neighbors(j2):
                if j3 in (center, j1):
                    continue
                e3 = _ELEMENT_INDEX[mol.atoms[j3].element]
                path3[(((o1 - 1) * 9 + (o2 - 1) * 3) + (o3 - 1)) * 10 + e3] += 1.0
    return path2, path3


def atom_descriptor(ms: MoleculeSet, atom: AtomRef, variant: str) -> AtomDescriptor:
    """Fixed-length descriptor of one atom in its molecule-set context."""
    if variant not in ATOM_VARIANTS:
        raise ValueError(f"unknown descriptor variant {variant!r}")
    length, radius = ATOM_VARIANTS[variant]
    mi, ai = atom
    try:
        mol = ms.molecules[mi]
        mol.atoms[ai]
    except IndexError:
        raise ValueError(f"dangling atom reference {atom}") from None
    dist = _ball(mol, ai, radius)
    ball = set(dist)
    out = _atomic_block(mol, ai, ball)
    for d in range(1, radius + 1):
        out += _shell_block(mol, dist, d)
    if variant == "twostep_800":
        out += _edge_block(mol, ball)
        out += _ring_block(mol, ball)
        path2, path3 = _path_blocks(mol, ai)
        out += path2
        out += path3
    out += [0.0] * (length - len(out))  # reserved to the published length
    assert len(out) == length
    return AtomDescriptor(np.asarray(out, dtype=np.float64), variant, radius)


def descriptor_matrix(ms: MoleculeSet, refs: list, variant: str) -> np.ndarray:
    return np.stack([atom_descriptor(ms, r, variant).values for r in refs])


def reaction_vector(step: MechanisticStep) -> ReactionVector:
    """Concatenated reactant- and product-side descriptors of the two
    reactive atoms (4 x 800)."""
    if not step.pair_atoms:
        raise ValueError("step lacks a reactive pair annotation")
    m1, m2 = step.pair_atoms
    parts = []
    for side in (step.reactants, step.products):
        for m in (m1, m2):
            ref = side.map_to_ref[m]
            parts.append(atom_descriptor(side, ref, "twostep_800").values)
    return ReactionVector(np.concatenate(parts))


def _fnv1a(seed: int, text: str) -> int:
    h = 14695981039346656037
    for byte in f"{seed}:{text}".encode("utf8"):
        h ^= byte
        h = (h * 1099511628211) % (1 << 64)
    return h


def _fragment_string(mol: Molecule, ball: set) -> str:
    """Canonical string of the induced subgraph over `ball`."""
    members = sorted(ball)
    local = {g: l for l, g in enumerate(members)}
    from .chemgraph.model import Atom, Bond  # local import to avoid cycles

    atoms = tuple(
        Atom(mol.atoms[g].element, mol.atoms[g].formal_charge,
             mol.atoms[g].radical_electrons, mol.atoms[g].implicit_hydrogens,
             None, l)
        for l, g in enumerate(members)
    )
    bonds = tuple(
        Bond(local[b.i], local[b.j], b.order)
        for b in mol.bonds if b.i in ball and b.j in ball
    )
    frag = Molecule(atoms, bonds, checked=False)
    return molecule_smiles(frag, canonical=True, keep_maps=False)


@lru_cache(maxsize=4096)
def _molecule_shingles(mol: Molecule, radii: tuple) -> frozenset:
    shingles = set()
    for i in range(len(mol.atoms)):
        dist = _ball(mol, i, radii[1])
        for r in range(radii[0], radii[1] + 1):
            ball = {j for j, d in dist.items() if d <= r}
            shingles.add(_fragment_string(mol, ball))
    return frozenset(shingles)


def _substructure_set(ms: MoleculeSet, radii: tuple) -> set:
    shingles = set()
    for mol in ms.molecules:
        shingles |= _molecule_shingles(mol, radii)
    return shingles


def drfp(step: MechanisticStep, bits: int = FINGERPRINT_BITS,
         radii: tuple = FINGERPRINT_RADIUS,
         seed: int = FINGERPRINT_SEED) -> ReactionFingerprint:
    """Differential reaction fingerprint: hashed symmetric difference of the
    circular substructure sets of the two reaction sides."""
    left = _substructure_set(step.reactants, radii)
    right = _substructure_set(step.products, radii)
    vec = np.zeros(bits, dtype=np.uint8)
    for shingle in left.symmetric_difference(right):
        vec[_fnv1a(seed, shingle) % bits] = 1
    return ReactionFingerprint(vec, radius=radii, seed=seed)


def fingerprint_matrix(steps: list) -> np.ndarray:
    return np.stack([drfp(s).bits.astype(np.float64) for s in steps])


def reaction_vector_matrix(steps: list) -> np.ndarray:
    return np.stack([reaction_vector(s).values for s in steps])


def export_vectors(path: str, values: np.ndarray, variant: str,
                   seed: int = FINGERPRINT_SEED):
    """Flat binary export with a self-describing header (length, variant,
    seed) so files remain interpretable without this package."""
    values = np.atleast_2d(np.asarray(values))
    header = np.frombuffer(
        json.dumps({
            "length": int(values.shape[1]),
            "variant": variant,
            "seed": int(seed),
            "rows": int(values.shape[0]),
        }).encode("utf8"),
        dtype=np.uint8,
    )
    np.savez(path, __header__=header, values=values)


def load_vectors(path: str) -> tuple:
    data = np.load(path, allow_pickle=False)
    header = json.loads(bytes(data["__header__"]).decode("utf8"))
    values = data["values"]
    if values.shape[1] != header["length"]:
        raise ValueError("vector file header disagrees with payload shape")
    return values, header
