"""Canonical SMILES.

Atoms are ranked by iterated neighbourhood refinement of an invariant tuple
(atomic number, isotope, charge, H count, aromaticity, degree, ring
membership). Remaining ties are broken by individualizing each candidate of
the first tied class in turn and refining again; every leaf of that search
is written out and the lexicographically smallest string wins. Leaves that
produce identical strings reveal automorphisms, which prune symmetric
branches of the search.

Stereo markers take no part in ranking; they are re-expressed relative to
the output atom order so that they keep their meaning.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import replace

from moltext.smiles.elements import ATOMIC_NUMBER, ORGANIC_AROMATIC, ORGANIC_VALENCES, default_hydrogens
from moltext.smiles.graph import BondOrder, MolGraph
from moltext.smiles.parser import parse

# Hard cap on search leaves; only reached by highly symmetric cages.
MAX_LEAVES = 2000

_FLIP = {"/": "\\", "\\": "/"}
_BOND_CHAR = {BondOrder.DOUBLE: "=", BondOrder.TRIPLE: "#"}
_AROMATIC_SYMBOLS = {v: k for k, v in ORGANIC_AROMATIC.items()}


def _dense_rank(keys: list) -> list[int]:
    index = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [index[k] for k in keys]


def _refine(ranks: list[int], nbrs) -> list[int]:
    classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[j], code) for j, code in nbrs[i])))
            for i in range(len(ranks))
        ]
        new = _dense_rank(keys)
        count = len(set(new))
        if count == classes:
            return new
        ranks, classes = new, count


def initial_invariants(mol: MolGraph) -> list[tuple]:
    ring_atoms = mol.ring_atoms
    return [
        (
            ATOMIC_NUMBER[a.element],
            a.isotope if a.isotope is not None else -1,
            a.charge,
            a.total_h,
            a.aromatic,
            mol.degree(a.index),
            a.index in ring_atoms,
        )
        for a in mol.atoms
    ]


def _bare_ok(mol: MolGraph, i: int) -> bool:
    """True if the atom can be written without brackets and re-parse identically."""
    atom = mol.atoms[i]
    if atom.isotope is not None or atom.charge or atom.element not in ORGANIC_VALENCES:
        return False
    if atom.aromatic and atom.element not in _AROMATIC_SYMBOLS:
        return False
    valence = 0
    arom_valence = 0
    has_double = has_pi = False
    for _, k in mol.adjacency[i]:
        b = mol.bonds[k]
        valence += b.kekule
        if b.order == BondOrder.AROMATIC:
            arom_valence += 1
            has_pi = has_pi or b.kekule == 2
        else:
            arom_valence += b.order
            has_double = has_double or b.order >= 2
    if atom.aromatic:
        if has_double:
            needs = False
        elif atom.element == "C":
            needs = arom_valence <= 3
        elif atom.element in ("N", "P", "B"):
            needs = arom_valence == 2
        else:
            needs = False
        if needs != has_pi:
            return False
    return default_hydrogens(atom.element, valence) == atom.total_h


def _parity(reference: tuple[int, ...], observed: list[int]) -> int:
    perm = [reference.index(x) for x in observed]
    inversions = sum(
        1 for x in range(len(perm)) for y in range(x + 1, len(perm)) if perm[x] > perm[y]
    )
    return inversions % 2


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def write_smiles(mol: MolGraph, ranks: list[int]) -> tuple[str, list[int]]:
    """Write ``mol`` by depth-first traversal in rank order.

    Returns the string and the atoms in the order they appear in it.
    """
    atoms, bonds = mol.atoms, mol.bonds
    n = len(atoms)
    nbr_sorted = [sorted(mol.adjacency[i], key=lambda t: ranks[t[0]]) for i in range(n)]
    visited = [False] * n
    parent = [-1] * n
    parent_bond = [-1] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    pre: list[int] = []
    starts: list[int] = []
    for start in sorted(range(n), key=ranks.__getitem__):
        if visited[start]:
            continue
        starts.append(start)
        visited[start] = True
        pre.append(start)
        stack = [(start, iter(nbr_sorted[start]))]
        while stack:
            a, it = stack[-1]
            for b, k in it:
                if not visited[b]:
                    visited[b] = True
                    parent[b], parent_bond[b] = a, k
                    children[a].append((b, k))
                    pre.append(b)
                    stack.append((b, iter(nbr_sorted[b])))
                    break
            else:
                stack.pop()
    pos = {a: p for p, a in enumerate(pre)}
    tree_bonds = {k for k in parent_bond if k >= 0}

    ring_open: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    ring_close: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, b in enumerate(bonds):
        if k in tree_bonds:
            continue
        u, v = (b.begin, b.end) if pos[b.begin] < pos[b.end] else (b.end, b.begin)
        ring_open[u].append((v, k))
        ring_close[v].append((u, k))

    # ring tokens per atom: (label, bond, partner, closing?)
    free: list[int] = list(range(1, 100))
    label_of: dict[int, int] = {}
    ring_tokens: list[list[tuple[int, int, int, bool]]] = [[] for _ in range(n)]
    for a in pre:
        for u, k in sorted(ring_close[a], key=lambda t: pos[t[0]]):
            d = label_of.pop(k)
            ring_tokens[a].append((d, k, u, True))
            heapq.heappush(free, d)
        for v, k in sorted(ring_open[a], key=lambda t: pos[t[0]]):
            d = heapq.heappop(free)
            label_of[k] = d
            ring_tokens[a].append((d, k, v, False))

    out_order = []
    for a in range(n):
        order = [parent[a]] if parent[a] >= 0 else []
        if atoms[a].chirality is not None and -1 in atoms[a].chiral_order:
            order.append(-1)
        order.extend(t[2] for t in ring_tokens[a])
        order.extend(c for c, _ in children[a])
        out_order.append(order)

    marks = _stereo_marks(mol, pos, tree_bonds, out_order)

    def bond_symbol(k: int, frm: int, to: int) -> str:
        b = bonds[k]
        if b.order == BondOrder.AROMATIC:
            return ""
        if b.order in _BOND_CHAR:
            return _BOND_CHAR[b.order]
        if k in marks:
            m_from, _, mark = marks[k]
            return mark if m_from == frm else _FLIP[mark]
        if atoms[frm].aromatic and atoms[to].aromatic:
            return "-"
        return ""

    def atom_symbol(a: int) -> str:
        atom = atoms[a]
        chirality = atom.chirality
        if chirality is not None:
            if sorted(atom.chiral_order) != sorted(out_order[a]):
                chirality = None
            elif _parity(atom.chiral_order, out_order[a]):
                chirality = "@" if chirality == "@@" else "@@"
        sym = atom.element.lower() if atom.aromatic else atom.element
        if chirality is None and _bare_ok(mol, a):
            return sym
        parts = ["[", "" if atom.isotope is None else str(atom.isotope), sym, chirality or ""]
        h = atom.total_h
        if h:
            parts.append("H" if h == 1 else f"H{h}")
        q = atom.charge
        if q:
            parts.append(("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else ""))
        parts.append("]")
        return "".join(parts)

    out: list[str] = []
    for c_index, start in enumerate(starts):
        if c_index:
            out.append(".")
        stack: list = [start]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                out.append(item)
                continue
            a = item
            out.append(atom_symbol(a))
            for d, k, partner, closing in ring_tokens[a]:
                if closing:
                    out.append(bond_symbol(k, a, partner))
                out.append(_ring_label(d))
            kids = children[a]
            pending = []
            for idx, (c, k) in enumerate(kids):
                last = idx == len(kids) - 1
                seq = [] if last else ["("]
                seq += [bond_symbol(k, a, c), c]
                if not last:
                    seq.append(")")
                pending.append(seq)
            for seq in reversed(pending):
                for tok in reversed(seq):
                    stack.append(tok)
    return "".join(out), pre


def _stereo_marks(mol: MolGraph, pos, tree_bonds, out_order) -> dict[int, tuple[int, int, str]]:
    """Directional markers (from, to, mark) reproducing each stored cis/trans relation."""
    bonds = mol.bonds
    marks: dict[int, tuple[int, int, str]] = {}
    plain_doubles = {
        a
        for k, b in enumerate(bonds)
        if b.order == BondOrder.DOUBLE and k not in {s.bond for s in mol.double_bond_stereo}
        for a in (b.begin, b.end)
    }
    entries = sorted(
        mol.double_bond_stereo,
        key=lambda s: min(pos[bonds[s.bond].begin], pos[bonds[s.bond].end]),
    )
    for st in entries:
        b = bonds[st.bond]
        first, second = (b.begin, b.end) if pos[b.begin] < pos[b.end] else (b.end, b.begin)
        refs = {b.begin: st.ref_begin, b.end: st.ref_end}
        relation = st.relation
        chosen = {}
        for d, other in ((first, second), (second, first)):
            cands = []
            for nb in out_order[d]:
                if nb < 0 or nb == other:
                    continue
                k = mol.bond_between(d, nb)
                if k not in tree_bonds or bonds[k].order != BondOrder.SINGLE:
                    continue
                cands.append((k not in marks, nb in plain_doubles, len(cands), nb, k))
            if not cands:
                break
            *_, nb, k = min(cands)
            chosen[d] = (nb, k)
            if nb != refs[d]:
                relation = "trans" if relation == "cis" else "cis"
        if len(chosen) != 2:
            continue

        def direction(d: int) -> str | None:
            nb, k = chosen[d]
            if k not in marks:
                return None
            frm, _, mark = marks[k]
            return mark if frm == d else _FLIP[mark]

        s_first, s_second = direction(first), direction(second)
        if s_first is None and s_second is None:
            nb, k = chosen[first]
            s_first = "/" if pos[first] < pos[nb] else "\\"
        if s_first is None:
            s_first = s_second if relation == "cis" else _FLIP[s_second]
        if s_second is None:
            s_second = s_first if relation == "cis" else _FLIP[s_first]
        if (s_first == s_second) != (relation == "cis"):
            continue
        for d, s in ((first, s_first), (second, s_second)):
            nb, k = chosen[d]
            marks[k] = (d, nb, s)
    return marks


class _Search:
    def __init__(self, mol: MolGraph) -> None:
        self.mol = mol
        self.nbrs = [
            [(j, int(mol.bonds[k].order)) for j, k in mol.adjacency[i]]
            for i in range(len(mol.atoms))
        ]
        self.best: tuple[str, list[int]] | None = None
        self.automorphisms: list[list[int]] = []
        self.leaves = 0

    def run(self, ranks: list[int], prefix: tuple[int, ...] = ()) -> None:
        ranks = _refine(ranks, self.nbrs)
        counts = Counter(ranks)
        tied = [r for r, c in counts.items() if c > 1]
        if not tied:
            self._leaf(ranks)
            return
        target = min(tied)
        cell = [i for i, r in enumerate(ranks) if r == target]
        explored: list[int] = []
        for v in cell:
            if self.leaves >= MAX_LEAVES:
                return
            if explored and self._same_orbit(v, explored, prefix):
                continue
            explored.append(v)
            split = _dense_rank([(r, 0 if i == v else 1) for i, r in enumerate(ranks)])
            self.run(split, prefix + (v,))

    def _leaf(self, ranks: list[int]) -> None:
        self.leaves += 1
        text, order = write_smiles(self.mol, ranks)
        if self.best is None or text < self.best[0]:
            self.best = (text, order)
        elif text == self.best[0]:
            perm = list(range(len(order)))
            for x, y in zip(self.best[1], order):
                perm[x] = y
            if perm != list(range(len(order))):
                self.automorphisms.append(perm)

    def _same_orbit(self, v: int, explored: list[int], prefix: tuple[int, ...]) -> bool:
        parent = list(range(len(self.mol.atoms)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        usable = False
        for perm in self.automorphisms:
            if all(perm[p] == p for p in prefix):
                usable = True
                for x, y in enumerate(perm):
                    rx, ry = find(x), find(y)
                    if rx != ry:
                        parent[rx] = ry
        if not usable:
            return False
        root = find(v)
        return any(find(u) == root for u in explored)


def _drop_symmetric_stereo(mol: MolGraph, ranks: list[int]) -> MolGraph:
    """Remove stereo marks that cannot distinguish anything.

    A double-bond end carrying two equivalent substituents, or an acyclic
    centre with two equivalent neighbours, has no configuration.
    """
    ring_atoms = mol.ring_atoms
    keep_db = []
    for st in mol.double_bond_stereo:
        b = mol.bonds[st.bond]
        ok = True
        for d, other in ((b.begin, b.end), (b.end, b.begin)):
            subs = [nb for nb, _ in mol.adjacency[d] if nb != other]
            seen = [ranks[nb] for nb in subs]
            if mol.atoms[d].total_h:
                ok = ok and len(subs) == 1
            else:
                ok = ok and len(set(seen)) == len(seen)
        if ok:
            keep_db.append(st)
    atoms = list(mol.atoms)
    for i, atom in enumerate(atoms):
        if atom.chirality is None or i in ring_atoms:
            continue
        seen = [ranks[nb] for nb, _ in mol.adjacency[i]] + ["H"] * atom.total_h
        if len(set(seen)) != len(seen):
            atoms[i] = replace(atom, chirality=None, chiral_order=())
    if len(keep_db) == len(mol.double_bond_stereo) and atoms == list(mol.atoms):
        return mol
    return replace(mol, atoms=tuple(atoms), double_bond_stereo=tuple(keep_db))


def canonicalize(mol: MolGraph) -> str:
    """Canonical SMILES for a parsed molecule.

    >>> canonicalize(parse("OCC")) == canonicalize(parse("CCO"))
    True
    """
    if not mol.atoms:
        return ""
    start = _dense_rank(initial_invariants(mol))
    nbrs = [[(j, int(mol.bonds[k].order)) for j, k in mol.adjacency[i]] for i in range(len(mol.atoms))]
    mol = _drop_symmetric_stereo(mol, _refine(start, nbrs))
    search = _Search(mol)
    search.run(start)
    assert search.best is not None
    return search.best[0]


def canonical_smiles(smiles: str) -> str:
    """Parse and canonicalize; raises ParseError for invalid input."""
    return canonicalize(parse(smiles))
