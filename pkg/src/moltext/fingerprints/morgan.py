"""Circular (Morgan / ECFP-style) fingerprints."""

from __future__ import annotations

from moltext.fingerprints.base import Fingerprint, fnv1a64, fold
from moltext.smiles.elements import ATOMIC_NUMBER
from moltext.smiles.graph import MolGraph

MAX_RADIUS = 10


def _hash(text: str) -> int:
    return fnv1a64(text.encode("ascii"))


def atom_invariants(mol: MolGraph) -> list[tuple[int, ...]]:
    ring_atoms = mol.ring_atoms
    return [
        (
            ATOMIC_NUMBER[a.element],
            mol.degree(a.index),
            a.total_h,
            a.charge,
            int(a.index in ring_atoms),
            int(a.aromatic),
        )
        for a in mol.atoms
    ]


def morgan_environments(mol: MolGraph, radius: int) -> list[list[int]]:
    """Environment identifiers per iteration: ``result[r][atom]``."""
    if not 0 <= radius <= MAX_RADIUS:
        raise ValueError(f"radius must be in [0, {MAX_RADIUS}]")
    ids = [_hash(",".join(map(str, inv))) for inv in atom_invariants(mol)]
    layers = [ids]
    for it in range(1, radius + 1):
        prev = layers[-1]
        new = []
        for i in range(len(mol.atoms)):
            env = sorted((int(mol.bonds[k].order), prev[j]) for j, k in mol.adjacency[i])
            text = f"{it}|{prev[i]}|" + ";".join(f"{o}:{h}" for o, h in env)
            new.append(_hash(text))
        layers.append(new)
    return layers


def morgan_fp(mol: MolGraph, radius: int = 2, bit_width: int = 2048) -> Fingerprint:
    """Set one bit per distinct atom environment of every radius up to ``radius``."""
    positions = {fold(h, bit_width) for layer in morgan_environments(mol, radius) for h in layer}
    return Fingerprint.from_indices("morgan", (radius, bit_width), bit_width, positions)
