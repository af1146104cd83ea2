"""Molecular graph value types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property


class ErrorKind(str, enum.Enum):
    UNCLOSED_RING = "UnclosedRing"
    UNCLOSED_BRANCH = "UnclosedBranch"
    UNKNOWN_SYMBOL = "UnknownSymbol"
    BAD_BRACKET_ATOM = "BadBracketAtom"
    VALENCE_ERROR = "ValenceError"
    AROMATICITY_ERROR = "AromaticityError"
    EMPTY_INPUT = "EmptyInput"
    WILDCARD_UNSUPPORTED = "WildcardUnsupported"


class ParseError(ValueError):
    """A SMILES string violated the grammar or a chemistry rule.

    ``position`` is the character offset of the offending symbol.
    """

    def __init__(self, kind: ErrorKind, position: int, message: str = "") -> None:
        self.kind = kind
        self.position = position
        self.message = message or kind.value
        super().__init__(f"{kind.value} at position {position}: {self.message}")


class BondOrder(enum.IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


@dataclass(frozen=True)
class Atom:
    element: str
    index: int
    isotope: int | None = None
    charge: int = 0
    explicit_h: int | None = None
    implicit_h: int = 0
    aromatic: bool = False
    chirality: str | None = None
    # Neighbour atom indices in the order the chirality marker refers to;
    # -1 stands for the bracket hydrogen.
    chiral_order: tuple[int, ...] = ()
    bracket: bool = False
    position: int = 0

    @property
    def total_h(self) -> int:
        return self.explicit_h if self.explicit_h is not None else self.implicit_h


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    # Order in one Kekule structure; equals ``order`` except for aromatic bonds.
    kekule: int = 1
    # Directional marker ('/' or '\\') read in the begin -> end direction.
    stereo: str | None = None

    @property
    def endpoints(self) -> frozenset[int]:
        return frozenset((self.begin, self.end))

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin


@dataclass(frozen=True)
class DoubleBondStereo:
    """Geometric relation between ``ref_begin`` and ``ref_end`` across a double bond."""

    bond: int
    ref_begin: int
    ref_end: int
    relation: str  # "cis" or "trans"


@dataclass(frozen=True)
class MolGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    rings: tuple[tuple[int, ...], ...] = ()
    double_bond_stereo: tuple[DoubleBondStereo, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per atom: ``(neighbour, bond index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for k, b in enumerate(self.bonds):
            adj[b.begin].append((b.end, k))
            adj[b.end].append((b.begin, k))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(i for ring in self.rings for i in ring)

    @cached_property
    def ring_bonds(self) -> frozenset[int]:
        out = set()
        for ring in self.rings:
            for i in range(len(ring)):
                out.add(self.bond_between(ring[i], ring[i - 1]))
        return frozenset(out)

    @cached_property
    def _bond_index(self) -> dict[frozenset[int], int]:
        return {b.endpoints: k for k, b in enumerate(self.bonds)}

    def bond_between(self, a: int, b: int) -> int | None:
        return self._bond_index.get(frozenset((a, b)))

    def degree(self, atom: int) -> int:
        return len(self.adjacency[atom])

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            seen[start] = True
            stack, comp = [start], []
            while stack:
                a = stack.pop()
                comp.append(a)
                for nb, _ in self.adjacency[a]:
                    if not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
            comps.append(sorted(comp))
        return comps
