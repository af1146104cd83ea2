"""Periodic table data and valence rules used by the SMILES parser."""

from __future__ import annotations

SYMBOLS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co "
    "Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb "
    "Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os "
    "Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm "
    "Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og"
).split()

ATOMIC_NUMBER = {sym: i + 1 for i, sym in enumerate(SYMBOLS)}

# Organic subset: atoms that may be written without brackets.
ORGANIC_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}
ORGANIC_AROMATIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
BRACKET_AROMATIC = {**ORGANIC_AROMATIC, "se": "Se", "as": "As"}
AROMATIC_CAPABLE = frozenset(BRACKET_AROMATIC.values())

# Main-group column (number of valence electrons) for charge-shifted valence.
_GROUP = {
    "B": 13, "Al": 13, "Ga": 13, "In": 13, "Tl": 13,
    "C": 14, "Si": 14, "Ge": 14, "Sn": 14, "Pb": 14,
    "N": 15, "P": 15, "As": 15, "Sb": 15, "Bi": 15,
    "O": 16, "S": 16, "Se": 16, "Te": 16, "Po": 16,
    "F": 17, "Cl": 17, "Br": 17, "I": 17, "At": 17,
}
_PERIOD2 = frozenset({"B", "C", "N", "O", "F"})
_GROUP_VALENCES = {13: (3,), 14: (4,), 15: (3, 5), 16: (2, 4, 6), 17: (1, 3, 5, 7)}


def is_element(symbol: str) -> bool:
    return symbol in ATOMIC_NUMBER


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...]:
    """Valences an atom may take, shifted isoelectronically by its charge.

    N+ behaves like C, O- like F, C- like N and so on. Returns an empty tuple
    for elements without a main-group valence model (metals, noble gases).
    """
    group = _GROUP.get(element)
    if group is None:
        return ()
    if charge == 0 and element in ORGANIC_VALENCES:
        return ORGANIC_VALENCES[element]
    shifted = group - charge
    if shifted not in _GROUP_VALENCES:
        return ()
    vals = _GROUP_VALENCES[shifted]
    if element in _PERIOD2 or shifted in (13, 14):
        return vals[:1]
    return vals


def default_hydrogens(element: str, valence: int) -> int | None:
    """Implicit H count for an organic-subset atom, or None if over-valent."""
    for v in ORGANIC_VALENCES[element]:
        if v >= valence:
            return v - valence
    return None
