"""Substructure patterns written in a subset of SMARTS.

Supported: ``*``, ``a``, ``A``, organic symbols, and bracket expressions
built from ``#n``, element symbols, ``Hn``, ``R``, charges and recursive
``$(...)`` with the operators ``!``, ``&``, ``,`` and ``;``. Bonds may be
``~ - = # : @`` combined the same way. Branches and ring closures work as
in SMILES. This covers every pattern in the MACCS key table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

from moltext.smiles.elements import ATOMIC_NUMBER, is_element
from moltext.smiles.graph import BondOrder, MolGraph

AtomTest = Callable[["MatchContext", int], bool]
BondTest = Callable[["MatchContext", int], bool]

_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_AROMATIC = {"b", "c", "n", "o", "p", "s"}


class MatchContext:
    """Per-molecule data shared by all pattern tests."""

    def __init__(self, mol: MolGraph) -> None:
        self.mol = mol
        self._recursive: dict[tuple[int, int], bool] = {}
        self._allowed: dict[str, frozenset[int]] = {}

    @cached_property
    def ring_bonds(self) -> frozenset[int]:
        out = set()
        for ring in self.mol.rings:
            for j in range(len(ring)):
                out.add(self.mol.bond_between(ring[j], ring[j - 1]))
        return frozenset(out)

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return self.mol.ring_atoms

    def hydrogens(self, i: int) -> int:
        """Implicit plus bracket hydrogens plus explicit hydrogen neighbours."""
        mol = self.mol
        return mol.atoms[i].total_h + sum(mol.atoms[nb].element == "H" for nb, _ in mol.adjacency[i])

    def allowed(self, text: str, test: AtomTest) -> frozenset[int]:
        """Molecule atoms passing an atom expression, cached by expression text."""
        hit = self._allowed.get(text)
        if hit is None:
            hit = self._allowed[text] = frozenset(i for i in range(len(self.mol.atoms)) if test(self, i))
        return hit

    def recursive(self, pattern: Pattern, atom: int) -> bool:
        key = (id(pattern), atom)
        if key not in self._recursive:
            self._recursive[key] = pattern.has_match(self, root=atom)
        return self._recursive[key]


def _element_test(symbol: str, aromatic: bool | None) -> AtomTest:
    z = ATOMIC_NUMBER[symbol]

    def test(ctx: MatchContext, i: int) -> bool:
        atom = ctx.mol.atoms[i]
        if ATOMIC_NUMBER[atom.element] != z:
            return False
        return aromatic is None or atom.aromatic == aromatic

    return test


def _all(tests: list) -> Callable:
    return lambda ctx, i: all(t(ctx, i) for t in tests)


def _any(tests: list) -> Callable:
    return lambda ctx, i: any(t(ctx, i) for t in tests)


def _not(test: Callable) -> Callable:
    return lambda ctx, i: not test(ctx, i)


def _implicit_bond(ctx: MatchContext, k: int) -> bool:
    return ctx.mol.bonds[k].order in (BondOrder.SINGLE, BondOrder.AROMATIC)


_BOND_PRIMITIVES: dict[str, BondTest] = {
    "~": lambda ctx, k: True,
    "-": lambda ctx, k: ctx.mol.bonds[k].order == BondOrder.SINGLE,
    "=": lambda ctx, k: ctx.mol.bonds[k].order == BondOrder.DOUBLE,
    "#": lambda ctx, k: ctx.mol.bonds[k].order == BondOrder.TRIPLE,
    ":": lambda ctx, k: ctx.mol.bonds[k].order == BondOrder.AROMATIC,
    "@": lambda ctx, k: k in ctx.ring_bonds,
}


class _ExprParser:
    """Operator-precedence parser shared by atom and bond expressions."""

    def __init__(self, text: str, primitive: Callable[["_ExprParser"], Callable]) -> None:
        self.text = text
        self.pos = 0
        self.primitive = primitive

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Callable:
        test = self._low_and()
        if self.pos != len(self.text):
            raise ValueError(f"unexpected {self.text[self.pos:]!r} in pattern expression")
        return test

    def _low_and(self) -> Callable:
        parts = [self._or()]
        while self.peek() == ";":
            self.pos += 1
            parts.append(self._or())
        return parts[0] if len(parts) == 1 else _all(parts)

    def _or(self) -> Callable:
        parts = [self._high_and()]
        while self.peek() == ",":
            self.pos += 1
            parts.append(self._high_and())
        return parts[0] if len(parts) == 1 else _any(parts)

    def _high_and(self) -> Callable:
        parts = [self._unary()]
        while self.peek() and self.peek() not in ";,":
            if self.peek() == "&":
                self.pos += 1
            parts.append(self._unary())
        return parts[0] if len(parts) == 1 else _all(parts)

    def _unary(self) -> Callable:
        if self.peek() == "!":
            self.pos += 1
            return _not(self._unary())
        return self.primitive(self)


def _read_int(p: _ExprParser) -> int | None:
    start = p.pos
    while p.peek().isdigit():
        p.pos += 1
    return int(p.text[start:p.pos]) if p.pos > start else None


def _atom_primitive(p: _ExprParser) -> AtomTest:
    ch = p.peek()
    if ch == "$":
        depth, start = 0, p.pos + 1
        for j in range(start, len(p.text)):
            depth += {"(": 1, ")": -1}.get(p.text[j], 0)
            if depth == 0:
                break
        inner = Pattern(p.text[start + 1:j])
        p.pos = j + 1
        return lambda ctx, i: ctx.recursive(inner, i)
    two = p.text[p.pos:p.pos + 2]
    if len(two) == 2 and two[0].isupper() and two[1].islower() and is_element(two):
        p.pos += 2
        return _element_test(two, False)
    if ch == "#":
        p.pos += 1
        z = _read_int(p)
        return lambda ctx, i: ATOMIC_NUMBER[ctx.mol.atoms[i].element] == z
    if ch == "*":
        p.pos += 1
        return lambda ctx, i: True
    if ch == "a" and p.text[p.pos:p.pos + 2] != "as":
        p.pos += 1
        return lambda ctx, i: ctx.mol.atoms[i].aromatic
    if ch == "A":
        p.pos += 1
        return lambda ctx, i: not ctx.mol.atoms[i].aromatic
    if ch == "H":
        p.pos += 1
        n = _read_int(p)
        n = 1 if n is None else n
        return lambda ctx, i: ctx.hydrogens(i) == n
    if ch == "R":
        p.pos += 1
        n = _read_int(p)
        if n is None:
            return lambda ctx, i: i in ctx.ring_atoms
        if n == 0:
            return lambda ctx, i: i not in ctx.ring_atoms
        return lambda ctx, i: sum(i in r for r in ctx.mol.rings) == n
    if ch in "+-":
        sign = 1 if ch == "+" else -1
        p.pos += 1
        n = _read_int(p)
        charge = sign * (1 if n is None else n)
        return lambda ctx, i: ctx.mol.atoms[i].charge == charge
    if ch.islower() and ch in "bcnops":
        p.pos += 1
        return _element_test(ch.upper(), True)
    if ch.isupper():
        p.pos += 1
        return _element_test(ch, False)
    raise ValueError(f"unsupported pattern primitive {ch!r}")


def _bond_primitive(p: _ExprParser) -> BondTest:
    ch = p.peek()
    if ch in _BOND_PRIMITIVES:
        p.pos += 1
        return _BOND_PRIMITIVES[ch]
    raise ValueError(f"unsupported bond primitive {ch!r}")


@dataclass
class Pattern:
    """A compiled substructure pattern."""

    text: str
    atoms: list[AtomTest] = field(default_factory=list, init=False)
    atom_texts: list[str] = field(default_factory=list, init=False)
    # (earlier atom, later atom, bond test)
    bonds: list[tuple[int, int, BondTest]] = field(default_factory=list, init=False)

    def __post_init__(self) -> None:
        self._compile()
        self.adjacent: list[list[tuple[int, BondTest]]] = [[] for _ in self.atoms]
        for a, b, test in self.bonds:
            self.adjacent[a].append((b, test))
            self.adjacent[b].append((a, test))

    def _compile(self) -> None:
        text = self.text
        pos = 0
        prev: int | None = None
        stack: list[int] = []
        bond_text: str | None = None
        rings: dict[int, tuple[int, str | None]] = {}
        while pos < len(text):
            ch = text[pos]
            if ch == "(":
                stack.append(prev)
                pos += 1
            elif ch == ")":
                prev = stack.pop()
                pos += 1
            elif ch.isdigit():
                label = int(ch)
                pos += 1
                if label in rings:
                    other, other_bond = rings.pop(label)
                    self._bond(other, prev, bond_text or other_bond)
                else:
                    rings[label] = (prev, bond_text)
                bond_text = None
            elif ch in "~-=#:@!;&,":
                start = pos
                while pos < len(text) and text[pos] in "~-=#:@!;&,":
                    pos += 1
                bond_text = text[start:pos]
            else:
                if ch == "[":
                    depth, j = 0, pos
                    while True:
                        depth += {"[": 1, "]": -1}.get(text[j], 0)
                        if depth == 0:
                            break
                        j += 1
                    atom_text = text[pos:j + 1]
                    test = _ExprParser(text[pos + 1:j], _atom_primitive).parse()
                    pos = j + 1
                else:
                    if ch in ("*", "a", "A"):
                        symbol = ch
                    elif text[pos:pos + 2] in _ORGANIC:
                        symbol = text[pos:pos + 2]
                    elif ch in _ORGANIC or ch in _AROMATIC:
                        symbol = ch
                    else:
                        raise ValueError(f"unsupported pattern atom {ch!r}")
                    atom_text = symbol
                    test = _ExprParser(symbol, _atom_primitive).parse()
                    pos += len(symbol)
                self.atoms.append(test)
                self.atom_texts.append(atom_text)
                idx = len(self.atoms) - 1
                if prev is not None:
                    self._bond(prev, idx, bond_text)
                prev, bond_text = idx, None
        if rings or stack:
            raise ValueError(f"unbalanced pattern {text!r}")

    def _bond(self, a: int, b: int, bond_text: str | None) -> None:
        test = _implicit_bond if not bond_text else _ExprParser(bond_text, _bond_primitive).parse()
        self.bonds.append((min(a, b), max(a, b), test))

    def _order(self, allowed: list[frozenset[int]], root: int | None) -> list[int]:
        """Visit order: most selective atom first, then grow along pattern bonds."""
        n = len(self.atoms)
        first = 0 if root is not None else min(range(n), key=lambda k: (len(allowed[k]), k))
        order, seen = [first], {first}
        while len(order) < n:
            frontier = [k for k in range(n) if k not in seen
                        and any(j in seen for j, _ in self.adjacent[k])]
            nxt = min(frontier, key=lambda k: (len(allowed[k]), k))
            order.append(nxt)
            seen.add(nxt)
        return order

    def _search(self, ctx: MatchContext, root: int | None):
        """Yield injective atom mappings as tuples indexed by pattern atom."""
        mol = ctx.mol
        n_pat = len(self.atoms)
        allowed = [ctx.allowed(text, test) for text, test in zip(self.atom_texts, self.atoms)]
        if not all(allowed) or (root is not None and root not in allowed[0]):
            return
        order = self._order(allowed, root)
        position = {k: p for p, k in enumerate(order)}
        # for each step: bonds back to atoms placed earlier
        back = [[(j, t) for j, t in self.adjacent[k] if position[j] < position[k]] for k in order]
        mapping = [-1] * n_pat
        used: set[int] = set()

        def extend(step: int):
            if step == n_pat:
                yield tuple(mapping)
                return
            k = order[step]
            if step == 0:
                cands = [root] if root is not None else sorted(allowed[k])
            else:
                cands = [nb for nb, _ in mol.adjacency[mapping[back[step][0][0]]]]
            for i in cands:
                if i in used or i not in allowed[k]:
                    continue
                ok = True
                for j, test in back[step]:
                    bond = mol.bond_between(mapping[j], i)
                    if bond is None or not test(ctx, bond):
                        ok = False
                        break
                if not ok:
                    continue
                mapping[k] = i
                used.add(i)
                yield from extend(step + 1)
                mapping[k] = -1
                used.discard(i)

        yield from extend(0)

    def has_match(self, ctx: MatchContext, root: int | None = None) -> bool:
        return next(self._search(ctx, root), None) is not None

    def count_unique(self, ctx: MatchContext, limit: int | None = None) -> int:
        """Number of distinct matched atom sets, stopping early past ``limit``."""
        seen: set[frozenset[int]] = set()
        for m in self._search(ctx, None):
            seen.add(frozenset(m))
            if limit is not None and len(seen) > limit:
                break
        return len(seen)
