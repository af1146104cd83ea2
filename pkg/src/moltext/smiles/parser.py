"""SMILES parser.

Reads the OpenSMILES subset used by ChEBI-style data: organic-subset and
bracket atoms (isotope, chirality, H count, charge, atom class), branches,
ring closures including ``%nn``, the bond symbols ``- = # : / \\`` and
dot-separated components. Parsing is followed by chemistry checks
(kekulization of aromatic input, organic-subset valences) and aromaticity
perception; see :mod:`moltext.smiles.perception`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from moltext.smiles.elements import (
    BRACKET_AROMATIC,
    ORGANIC_AROMATIC,
    ORGANIC_VALENCES,
    is_element,
)
from moltext.smiles.graph import ErrorKind, MolGraph, ParseError
from moltext.smiles import perception

_BOND_SYMBOLS = "-=#:/\\"
_DIGITS = frozenset("0123456789")
_CHIRAL_CLASSES = {"@TH1": "@", "@TH2": "@@"}


@dataclass
class _RawAtom:
    element: str
    aromatic: bool
    position: int
    bracket: bool = False
    isotope: int | None = None
    charge: int = 0
    hcount: int | None = None
    chirality: str | None = None
    # Neighbour slots in textual order; None marks a ring bond not closed yet.
    order: list = field(default_factory=list)


@dataclass
class _RawBond:
    begin: int
    end: int
    symbol: str | None  # None means implicit
    position: int


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.atoms: list[_RawAtom] = []
        self.bonds: list[_RawBond] = []
        self.pairs: set[frozenset[int]] = set()
        # ring label -> (atom, bond symbol, position, slot index in atom.order)
        self.open_rings: dict[int, tuple[int, str | None, int, int]] = {}

    def error(self, kind: ErrorKind, pos: int, msg: str = "") -> ParseError:
        return ParseError(kind, pos, msg)

    def run(self) -> tuple[list[_RawAtom], list[_RawBond]]:
        text = self.text
        if not text:
            raise self.error(ErrorKind.EMPTY_INPUT, 0, "empty SMILES")
        prev: int | None = None
        pending: tuple[str, int] | None = None
        branches: list[tuple[int, int, int]] = []  # (atom, '(' position, atom count)
        last_dot: int | None = None
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            start = self.pos
            if ch == "*":
                raise self.error(ErrorKind.WILDCARD_UNSUPPORTED, start, "wildcard atom")
            if ch == "[" or ch.isalpha():
                idx = self._atom()
                if prev is not None:
                    self._add_bond(prev, idx, pending[0] if pending else None,
                                   pending[1] if pending else start)
                    self.atoms[idx].order.insert(0, prev)
                    self.atoms[prev].order.append(idx)
                elif pending is not None:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, pending[1],
                                     "bond without a preceding atom")
                prev, pending, last_dot = idx, None, None
                continue
            self.pos += 1
            if ch == "(":
                if prev is None or pending is not None:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, "misplaced '('")
                branches.append((prev, start, len(self.atoms)))
            elif ch == ")":
                if not branches:
                    raise self.error(ErrorKind.UNCLOSED_BRANCH, start, "unmatched ')'")
                if pending is not None:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, pending[1], "dangling bond")
                atom, _, count = branches.pop()
                if len(self.atoms) == count:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, "empty branch")
                prev = atom
            elif ch in _BOND_SYMBOLS:
                if prev is None or pending is not None:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, f"misplaced bond {ch!r}")
                pending = (ch, start)
            elif ch in _DIGITS or ch == "%":
                if prev is None:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, "ring label without atom")
                if ch == "%":
                    digits = text[self.pos:self.pos + 2]
                    if len(digits) != 2 or not set(digits) <= _DIGITS:
                        raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, "bad %nn ring label")
                    self.pos += 2
                    label = int(digits)
                else:
                    label = int(ch)
                self._ring(prev, label, pending, start)
                pending = None
            elif ch == ".":
                if prev is None or pending is not None or branches:
                    raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, "misplaced '.'")
                prev, last_dot = None, start
            else:
                raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, f"unexpected {ch!r}")
        problems = []
        if pending is not None:
            problems.append((pending[1], ErrorKind.UNKNOWN_SYMBOL, "dangling bond"))
        if last_dot is not None:
            problems.append((last_dot, ErrorKind.UNKNOWN_SYMBOL, "trailing '.'"))
        for _, pos, _ in branches:
            problems.append((pos, ErrorKind.UNCLOSED_BRANCH, "unclosed '('"))
        for label, (_, _, pos, _) in self.open_rings.items():
            problems.append((pos, ErrorKind.UNCLOSED_RING, f"ring {label} never closed"))
        if problems:
            pos, kind, msg = min(problems, key=lambda p: p[0])
            raise self.error(kind, pos, msg)
        return self.atoms, self.bonds

    def _add_bond(self, a: int, b: int, symbol: str | None, pos: int) -> None:
        key = frozenset((a, b))
        if a == b:
            raise self.error(ErrorKind.UNKNOWN_SYMBOL, pos, "atom bonded to itself")
        if key in self.pairs:
            raise self.error(ErrorKind.UNKNOWN_SYMBOL, pos, "duplicate bond")
        self.pairs.add(key)
        self.bonds.append(_RawBond(a, b, symbol, pos))

    def _ring(self, atom: int, label: int, pending, pos: int) -> None:
        sym = pending[0] if pending else None
        if label not in self.open_rings:
            self.open_rings[label] = (atom, sym, pos, len(self.atoms[atom].order))
            self.atoms[atom].order.append(None)
            return
        other, other_sym, other_pos, slot = self.open_rings.pop(label)
        if sym is not None and other_sym is not None and sym != other_sym:
            if not ({sym, other_sym} <= {"/", "\\"}):
                raise self.error(ErrorKind.UNKNOWN_SYMBOL, pos, "conflicting ring bond orders")
        if other_sym is not None:
            # the marker at the opening label reads opening atom -> closing atom
            self._add_bond(other, atom, other_sym, other_pos)
        else:
            self._add_bond(atom, other, sym, pos)
        self.atoms[other].order[slot] = atom
        self.atoms[atom].order.append(other)

    def _atom(self) -> int:
        text, start = self.text, self.pos
        if text[start] == "[":
            atom = self._bracket()
        else:
            two = text[start:start + 2]
            if two in ("Cl", "Br"):
                atom = _RawAtom(two, False, start)
                self.pos += 2
            elif text[start] in ORGANIC_VALENCES:
                atom = _RawAtom(text[start], False, start)
                self.pos += 1
            elif text[start] in ORGANIC_AROMATIC:
                atom = _RawAtom(ORGANIC_AROMATIC[text[start]], True, start)
                self.pos += 1
            else:
                raise self.error(ErrorKind.UNKNOWN_SYMBOL, start, f"unknown atom {text[start]!r}")
        self.atoms.append(atom)
        return len(self.atoms) - 1

    def _bracket(self) -> _RawAtom:
        text, start = self.text, self.pos
        end = text.find("]", start)
        if end < 0:
            raise self.error(ErrorKind.BAD_BRACKET_ATOM, start, "unterminated bracket atom")
        body = text[start + 1:end]
        self.pos = end + 1
        bad = lambda msg: self.error(ErrorKind.BAD_BRACKET_ATOM, start, msg)  # noqa: E731
        i = 0
        while i < len(body) and body[i] in _DIGITS:
            i += 1
        isotope = int(body[:i]) if i else None
        if i < len(body) and body[i] == "*":
            raise self.error(ErrorKind.WILDCARD_UNSUPPORTED, start, "wildcard atom")
        element = aromatic = None
        for size in (2, 1):
            sym = body[i:i + size]
            if len(sym) != size:
                continue
            if sym in BRACKET_AROMATIC:
                element, aromatic = BRACKET_AROMATIC[sym], True
            elif sym[0].isupper() and is_element(sym):
                element, aromatic = sym, False
            if element is not None:
                i += size
                break
        if element is None:
            raise bad(f"unknown element in [{body}]")
        chirality = None
        if body.startswith("@", i):
            for cls, mark in _CHIRAL_CLASSES.items():
                if body.startswith(cls, i):
                    chirality, i = mark, i + len(cls)
                    break
            else:
                if body.startswith("@@", i):
                    chirality, i = "@@", i + 2
                else:
                    chirality, i = "@", i + 1
                if i < len(body) and body[i].isupper() and body[i] != "H":
                    raise bad("unsupported chirality class")
        hcount = 0
        if body.startswith("H", i):
            i += 1
            j = i
            while j < len(body) and body[j] in _DIGITS:
                j += 1
            hcount = int(body[i:j]) if j > i else 1
            i = j
        charge = 0
        if i < len(body) and body[i] in "+-":
            sign = 1 if body[i] == "+" else -1
            j = i + 1
            while j < len(body) and body[j] in _DIGITS:
                j += 1
            if j > i + 1:
                charge = sign * int(body[i + 1:j])
            else:
                while j < len(body) and body[j] == body[i]:
                    j += 1
                charge = sign * (j - i)
            i = j
        if i < len(body) and body[i] == ":":
            j = i + 1
            while j < len(body) and body[j] in _DIGITS:
                j += 1
            if j == i + 1:
                raise bad("empty atom class")
            i = j
        if i != len(body):
            raise bad(f"unexpected {body[i:]!r} in bracket atom")
        atom = _RawAtom(element, bool(aromatic), start, bracket=True, isotope=isotope,
                        charge=charge, hcount=hcount, chirality=chirality)
        if chirality is not None and hcount:
            atom.order.append(-1)
        return atom


def parse(smiles: str) -> MolGraph:
    """Parse a SMILES string into a :class:`MolGraph`.

    Raises :class:`ParseError` describing the first violation found.

    >>> [a.element for a in parse("CCO").atoms]
    ['C', 'C', 'O']
    """
    atoms, bonds = _Parser(smiles).run()
    return perception.build_graph(atoms, bonds)


def is_valid(smiles: str) -> bool:
    try:
        parse(smiles)
    except ParseError:
        return False
    return True
