"""Lexical SMILES tokenizer (character-split vocabulary)."""

from __future__ import annotations

import re

# Bracket atoms stay whole, Cl/Br are one token, %nn ring labels are one token,
# everything else is a single character. An unterminated bracket swallows the rest
# of the string so that joining the tokens always gives back the input.
_TOKEN_RE = re.compile(r"\[[^\]]*\]|\[.*|Cl|Br|%\d\d|.", re.DOTALL)


def tokenize_smiles(smiles: str) -> list[str]:
    """Split a SMILES string into tokens without any chemistry checks.

    >>> tokenize_smiles("C(=O)Cl")
    ['C', '(', '=', 'O', ')', 'Cl']
    """
    return _TOKEN_RE.findall(smiles)
