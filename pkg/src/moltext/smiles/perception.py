"""Chemistry checks that turn raw parser output into a :class:`MolGraph`.

Aromaticity model
-----------------
Each ring of the smallest set of smallest rings (SSSR) is tested on its own:
every member must be sp2-capable and the ring must hold 4n+2 pi electrons.
Rings that fail alone are retried as a pair with each fused neighbour (two
rings sharing a bond), which picks up azulene-type systems. Larger fused
envelopes are not examined.

Pi electrons per atom: 1 for an atom carrying a double bond that is a ring
bond; 0 for an exocyclic double bond to a heteroatom (ring carbonyls) and for
C+ / neutral B; 2 for a lone-pair donor (pyrrole-type N/P/As, furan-type
O/S/Se, C-). Atoms with a triple bond, more than one double bond, an
exocyclic C=C, or no pi system at all disqualify the ring. The count never
looks at where a Kekule structure placed its double bonds, so the outcome
is the same for aromatic and Kekule spellings of one molecule.
"""

from __future__ import annotations

from dataclasses import replace

import networkx as nx

from moltext.smiles.elements import AROMATIC_CAPABLE, allowed_valences, default_hydrogens
from moltext.smiles.graph import (
    Atom,
    Bond,
    BondOrder,
    DoubleBondStereo,
    ErrorKind,
    MolGraph,
    ParseError,
)

_ORDERS = {None: 1, "-": 1, "/": 1, "\\": 1, "=": 2, "#": 3}
_FLIP = {"/": "\\", "\\": "/"}


def _needs_double(raw, v: int, has_double: bool) -> bool:
    """Whether an aromatic atom must receive a double bond when kekulized."""
    if has_double:
        return False
    if raw.bracket:
        allowed = allowed_valences(raw.element, raw.charge)
        return (v + 1) in allowed or (v not in allowed and any(x > v for x in allowed))
    if raw.element == "C":
        return v <= 3
    if raw.element in ("N", "P", "B"):
        return v == 2
    return False


def _kekulize(raws, orders, aromatic_bonds, bonds) -> dict[int, int]:
    """Assign double bonds to aromatic bonds; returns bond index -> 1/2."""
    n = len(raws)
    v = [raw.hcount or 0 for raw in raws]
    has_double = [False] * n
    for k, b in enumerate(bonds):
        inc = 1 if k in aromatic_bonds else orders[k]
        v[b.begin] += inc
        v[b.end] += inc
        if k not in aromatic_bonds and orders[k] >= 2:
            has_double[b.begin] = has_double[b.end] = True
    needs = {i for i, raw in enumerate(raws)
             if raw.aromatic and _needs_double(raw, v[i], has_double[i])}
    result = {k: 1 for k in aromatic_bonds}
    if not needs:
        return result
    g = nx.Graph()
    g.add_nodes_from(sorted(needs))
    for k in sorted(aromatic_bonds):
        b = bonds[k]
        if b.begin in needs and b.end in needs:
            g.add_edge(b.begin, b.end, bond=k)
    matched: set[int] = set()
    for comp in nx.connected_components(g):
        sub = g.subgraph(comp)
        if len(comp) % 2:
            matching = set()
        else:
            matching = nx.max_weight_matching(sub, maxcardinality=True)
        for a, b in matching:
            result[g.edges[a, b]["bond"]] = 2
            matched.update((a, b))
    unmatched = needs - matched
    if unmatched:
        first = min(unmatched, key=lambda i: raws[i].position)
        raise ParseError(ErrorKind.AROMATICITY_ERROR, raws[first].position,
                         "cannot kekulize aromatic system")
    return result


def _canonical_cycle(cycle: list[int]) -> tuple[int, ...]:
    k = cycle.index(min(cycle))
    cycle = cycle[k:] + cycle[:k]
    if len(cycle) > 2 and cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[1:][::-1]
    return tuple(cycle)


def _reduce(vec: int, basis: dict[int, int]) -> int:
    while vec:
        top = vec.bit_length() - 1
        if top not in basis:
            return vec
        vec ^= basis[top]
    return 0


def find_rings(n_atoms: int, edges: list[tuple[int, int]]) -> tuple[tuple[int, ...], ...]:
    """Relevant cycles: every cycle that is not a sum of strictly shorter cycles.

    Unlike a smallest set of smallest rings this set does not depend on atom
    order, which keeps ring-based perception invariant under renumbering.
    """
    g = nx.Graph()
    g.add_nodes_from(range(n_atoms))
    g.add_edges_from(edges)
    bridges = {frozenset(e) for e in nx.bridges(g)}
    ring_edges = [e for e in edges if frozenset(e) not in bridges]
    if not ring_edges:
        return ()
    rg = nx.Graph(ring_edges)
    edge_bit = {frozenset(e): i for i, e in enumerate(ring_edges)}
    longest = max(len(c) for c in nx.minimum_cycle_basis(rg))
    by_length: dict[int, list[tuple[int, ...]]] = {}
    for c in nx.simple_cycles(rg, length_bound=longest):
        if len(c) >= 3:
            by_length.setdefault(len(c), []).append(_canonical_cycle(c))
    rings: list[tuple[int, ...]] = []
    basis: dict[int, int] = {}
    for length in sorted(by_length):
        cycles = sorted(set(by_length[length]))
        vectors = []
        for c in cycles:
            vec = 0
            for j in range(len(c)):
                vec |= 1 << edge_bit[frozenset((c[j], c[j - 1]))]
            vectors.append(vec)
        # relevance is judged against shorter cycles only
        rings.extend(c for c, v in zip(cycles, vectors) if _reduce(v, basis))
        for v in vectors:
            r = _reduce(v, basis)
            if r:
                basis[r.bit_length() - 1] = r
    rings.sort(key=lambda r: (len(r), sorted(r)))
    return tuple(rings)


def _pi_electrons(i: int, atoms: list[Atom], bonds: list[Bond], adj, ring_bond_set) -> int | None:
    atom = atoms[i]
    if atom.element not in AROMATIC_CAPABLE:
        return None
    doubles = []
    singles = 0
    for nb, k in adj[i]:
        order = bonds[k].kekule
        if order == 3:
            return None
        if order == 2:
            doubles.append((nb, k))
        else:
            singles += 1
    if len(doubles) > 1:
        return None
    if doubles:
        nb, k = doubles[0]
        if k in ring_bond_set:
            return 1
        return None if atoms[nb].element == "C" else 0
    el, q = atom.element, atom.charge
    valence = singles + atom.total_h
    if el == "C":
        return {-1: 2, 1: 0}.get(q)
    if el in ("N", "P", "As"):
        return 2 if q == 0 and valence == 3 else (2 if q == -1 and valence == 2 else None)
    if el in ("O", "S", "Se"):
        return 2 if q == 0 and valence == 2 else None
    if el == "B":
        return 0 if q == 0 and valence == 3 else None
    return None


def _huckel(total: int) -> bool:
    return total >= 2 and (total - 2) % 4 == 0


def perceive_aromaticity(atoms, bonds, rings, adj) -> tuple[set[int], set[int]]:
    """Return (aromatic atom indices, aromatic bond indices)."""
    bond_of = {frozenset((b.begin, b.end)): k for k, b in enumerate(bonds)}
    ring_bonds = []
    for ring in rings:
        ring_bonds.append({bond_of[frozenset((ring[j], ring[j - 1]))] for j in range(len(ring))})
    ring_bond_set = set().union(*ring_bonds) if ring_bonds else set()
    electrons = {}
    for ring in rings:
        for i in ring:
            if i not in electrons:
                electrons[i] = _pi_electrons(i, atoms, bonds, adj, ring_bond_set)

    def qualifies(members) -> bool:
        counts = [electrons[i] for i in members]
        return None not in counts and _huckel(sum(counts))

    aromatic = [qualifies(ring) for ring in rings]
    for x in range(len(rings)):
        for y in range(x + 1, len(rings)):
            if aromatic[x] and aromatic[y]:
                continue
            if not ring_bonds[x] & ring_bonds[y]:
                continue
            if qualifies(set(rings[x]) | set(rings[y])):
                aromatic[x] = aromatic[y] = True
    arom_atoms: set[int] = set()
    arom_bonds: set[int] = set()
    for ring, rb, flag in zip(rings, ring_bonds, aromatic):
        if flag:
            arom_atoms.update(ring)
            arom_bonds.update(rb)
    return arom_atoms, arom_bonds


def _double_bond_stereo(atoms, bonds, adj, small_ring_bonds) -> tuple[DoubleBondStereo, ...]:
    out = []
    for k, b in enumerate(bonds):
        if b.order != BondOrder.DOUBLE or k in small_ring_bonds:
            continue
        refs = []
        for d, other in ((b.begin, b.end), (b.end, b.begin)):
            subs = [(nb, kk) for nb, kk in adj[d] if nb != other]
            if not subs or len(subs) > 2:
                break
            marks = []
            for nb, kk in subs:
                sb = bonds[kk]
                if sb.stereo is None or sb.order != BondOrder.SINGLE:
                    continue
                marks.append((nb, sb.stereo if sb.begin == d else _FLIP[sb.stereo]))
            if not marks:
                break
            if len(marks) == 2 and marks[0][1] == marks[1][1]:
                break
            refs.append(marks[0])
        if len(refs) != 2:
            continue
        (n1, s1), (n2, s2) = refs
        out.append(DoubleBondStereo(k, n1, n2, "cis" if s1 == s2 else "trans"))
    return tuple(out)


def build_graph(raws, raw_bonds) -> MolGraph:
    n = len(raws)
    edges = [(b.begin, b.end) for b in raw_bonds]
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    bridges = {frozenset(e) for e in nx.bridges(g)}

    orders: list[int] = []
    aromatic_bonds: set[int] = set()
    for k, rb in enumerate(raw_bonds):
        a, b = raws[rb.begin], raws[rb.end]
        is_bridge = frozenset((rb.begin, rb.end)) in bridges
        if rb.symbol == ":":
            if not (a.aromatic and b.aromatic) or is_bridge:
                raise ParseError(ErrorKind.AROMATICITY_ERROR, rb.position,
                                 "aromatic bond outside an aromatic ring")
            aromatic_bonds.add(k)
            orders.append(1)
        elif rb.symbol is None and a.aromatic and b.aromatic and not is_bridge:
            aromatic_bonds.add(k)
            orders.append(1)
        else:
            orders.append(_ORDERS[rb.symbol])

    ring_atoms = {i for e in edges if frozenset(e) not in bridges for i in e}
    for i, raw in enumerate(raws):
        if raw.aromatic and i not in ring_atoms:
            raise ParseError(ErrorKind.AROMATICITY_ERROR, raw.position,
                             "aromatic atom outside a ring")

    kekule = _kekulize(raws, orders, aromatic_bonds, raw_bonds)

    valence = [0] * n
    for k, rb in enumerate(raw_bonds):
        o = kekule.get(k, orders[k])
        valence[rb.begin] += o
        valence[rb.end] += o
    atoms: list[Atom] = []
    for i, raw in enumerate(raws):
        implicit = 0
        if not raw.bracket:
            h = default_hydrogens(raw.element, valence[i])
            if h is None:
                raise ParseError(ErrorKind.VALENCE_ERROR, raw.position,
                                 f"{raw.element} with valence {valence[i]}")
            implicit = h
        chirality, chiral_order = raw.chirality, ()
        if chirality is not None:
            if None in raw.order or len(raw.order) < 3:
                chirality = None
            else:
                chiral_order = tuple(raw.order)
        atoms.append(Atom(
            element=raw.element, index=i, isotope=raw.isotope, charge=raw.charge,
            explicit_h=raw.hcount if raw.bracket else None, implicit_h=implicit,
            aromatic=raw.aromatic, chirality=chirality, chiral_order=chiral_order,
            bracket=raw.bracket, position=raw.position,
        ))

    bonds = [
        Bond(rb.begin, rb.end, BondOrder(kekule.get(k, orders[k])), kekule.get(k, orders[k]),
             rb.symbol if rb.symbol in _FLIP else None)
        for k, rb in enumerate(raw_bonds)
    ]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, b in enumerate(bonds):
        adj[b.begin].append((b.end, k))
        adj[b.end].append((b.begin, k))

    rings = find_rings(n, edges)
    arom_atoms, arom_bonds = perceive_aromaticity(atoms, bonds, rings, adj)
    atoms = [replace(a, aromatic=a.index in arom_atoms) for a in atoms]
    bonds = [
        Bond(b.begin, b.end, BondOrder.AROMATIC, b.kekule, None) if k in arom_bonds else b
        for k, b in enumerate(bonds)
    ]
    small_ring_bonds = {
        k for k, b in enumerate(bonds)
        for ring in rings if len(ring) < 8 and _edge_in_ring(b, ring)
    }
    stereo = _double_bond_stereo(atoms, bonds, adj, small_ring_bonds)
    return MolGraph(tuple(atoms), tuple(bonds), rings, stereo)


def _edge_in_ring(b: Bond, ring: tuple[int, ...]) -> bool:
    if b.begin not in ring or b.end not in ring:
        return False
    i, j = ring.index(b.begin), ring.index(b.end)
    return abs(i - j) in (1, len(ring) - 1)


