"""Linear-path fingerprints in the style of the RDKit topological fingerprint."""

from __future__ import annotations

from moltext.fingerprints.base import Fingerprint, fnv1a64, fold
from moltext.smiles.graph import BondOrder, MolGraph

MAX_PATH_LENGTH = 7
_BOND_SYMBOL = {BondOrder.SINGLE: "-", BondOrder.DOUBLE: "=", BondOrder.TRIPLE: "#", BondOrder.AROMATIC: ":"}


def _atom_label(mol: MolGraph, i: int) -> str:
    atom = mol.atoms[i]
    return atom.element.lower() if atom.aromatic else atom.element


def linear_paths(mol: MolGraph, max_len: int) -> set[str]:
    """Canonical strings of all simple paths with 0..max_len bonds."""
    labels = [_atom_label(mol, i) for i in range(len(mol.atoms))]
    out: set[str] = set()

    def record(path: list[int]) -> None:
        if len(path) > 1 and path[0] > path[-1]:
            return  # each path is recorded once, from its smaller end
        parts = [labels[path[0]]]
        for a, b in zip(path, path[1:]):
            parts.append(_BOND_SYMBOL[mol.bonds[mol.bond_between(a, b)].order])
            parts.append(labels[b])
        forward = "".join(parts)
        backward = "".join(reversed(parts))
        out.add(min(forward, backward))

    for start in range(len(mol.atoms)):
        stack = [[start]]
        while stack:
            path = stack.pop()
            record(path)
            if len(path) - 1 == max_len:
                continue
            on_path = set(path)
            for nb, _ in mol.adjacency[path[-1]]:
                if nb not in on_path:
                    stack.append(path + [nb])
    return out


def path_fp(mol: MolGraph, max_len: int = MAX_PATH_LENGTH, bit_width: int = 2048) -> Fingerprint:
    """Hash every distinct linear path of up to ``max_len`` bonds into ``bit_width`` bits.

    Single atoms count as paths of length zero, so any molecule sets at least one bit.
    """
    if not 1 <= max_len <= MAX_PATH_LENGTH:
        raise ValueError(f"max_len must be in [1, {MAX_PATH_LENGTH}]")
    positions = {fold(fnv1a64(p.encode("ascii")), bit_width) for p in linear_paths(mol, max_len)}
    return Fingerprint.from_indices("path", (max_len, bit_width), bit_width, positions)
