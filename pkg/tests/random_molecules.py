"""Random molecule generator used by property tests.

Molecules are built as graphs and written out with a randomized depth-first
order, so one graph yields many different but equivalent SMILES strings.
"""

from __future__ import annotations

import numpy as np

_ELEMENTS = ["C", "N", "O", "S", "F", "Cl"]
_WEIGHTS = [0.6, 0.12, 0.12, 0.05, 0.05, 0.06]
_VALENCE = {"C": 4, "N": 3, "O": 2, "S": 2, "F": 1, "Cl": 1}
_BOND = {1: "", 2: "=", 3: "#"}


def random_graph(rng: np.random.Generator, max_atoms: int = 20):
    """Return (elements, {(i, j): order}) for a connected, valence-respecting graph."""
    n = int(rng.integers(1, max_atoms + 1))
    elements = [str(e) for e in rng.choice(_ELEMENTS, size=n, p=_WEIGHTS)]
    elements[0] = "C"
    free = [_VALENCE[e] for e in elements]
    bonds: dict[tuple[int, int], int] = {}
    placed = [0]
    for i in range(1, n):
        parents = [j for j in placed if free[j] >= 1]
        if not parents:
            break
        j = parents[int(rng.integers(len(parents)))]
        order = 1
        room = min(free[i], free[j])
        r = rng.random()
        if room >= 3 and r < 0.04:
            order = 3
        elif room >= 2 and r < 0.2:
            order = 2
        bonds[(j, i)] = order
        free[i] -= order
        free[j] -= order
        placed.append(i)
    elements = [elements[i] for i in placed]
    for _ in range(int(rng.integers(0, 3))):
        cands = [i for i in range(len(elements)) if free[placed[i]] >= 1]
        if len(cands) < 2:
            break
        a, b = sorted(int(x) for x in rng.choice(cands, size=2, replace=False))
        if (a, b) in bonds or (b, a) in bonds:
            continue
        bonds[(a, b)] = 1
        free[placed[a]] -= 1
        free[placed[b]] -= 1
    if rng.random() < 0.3:
        # fuse a benzene ring onto a carbon with spare valence
        hosts = [i for i, e in enumerate(elements) if e == "C" and free[placed[i]] >= 1]
        if hosts:
            host = hosts[int(rng.integers(len(hosts)))]
            base = len(elements)
            elements += ["C"] * 6
            for k in range(6):
                bonds[(base + k, base + (k + 1) % 6)] = 2 if k % 2 == 0 else 1
            bonds[(host, base)] = 1
    return elements, bonds


def write_random(elements, bonds, rng: np.random.Generator) -> str:
    """Write the graph as SMILES in a random depth-first order."""
    n = len(elements)
    adj: list[list[int]] = [[] for _ in range(n)]
    order = {}
    for (a, b), o in bonds.items():
        adj[a].append(b)
        adj[b].append(a)
        order[frozenset((a, b))] = o
    start = int(rng.integers(n))
    seen = [False] * n
    children: list[list[int]] = [[] for _ in range(n)]
    pre: list[int] = []
    stack = [(start, -1)]
    while stack:
        a, p = stack.pop()
        if seen[a]:
            continue
        seen[a] = True
        pre.append(a)
        if p >= 0:
            children[p].append(a)
        nbrs = list(adj[a])
        rng.shuffle(nbrs)
        for b in nbrs:
            if not seen[b]:
                stack.append((b, a))
    tree = {frozenset((p, c)) for p in range(n) for c in children[p]}
    pos = {a: i for i, a in enumerate(pre)}
    labels: list[list[str]] = [[] for _ in range(n)]
    next_label = 1
    for key in sorted((k for k in order if k not in tree), key=lambda k: sorted(pos[x] for x in k)):
        a, b = sorted(key, key=pos.__getitem__)
        text = str(next_label) if next_label < 10 else f"%{next_label:02d}"
        labels[a].append(_BOND[order[key]] + text)
        labels[b].append(text)
        next_label += 1

    def emit(a: int) -> str:
        out = elements[a] + "".join(labels[a])
        kids = children[a]
        for idx, c in enumerate(kids):
            piece = _BOND[order[frozenset((a, c))]] + emit(c)
            out += piece if idx == len(kids) - 1 else f"({piece})"
        return out

    return emit(start)
