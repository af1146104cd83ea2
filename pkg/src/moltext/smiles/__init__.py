"""SMILES parsing, validation and canonicalization."""

from moltext.smiles.canon import canonical_smiles, canonicalize
from moltext.smiles.graph import Atom, Bond, BondOrder, ErrorKind, MolGraph, ParseError
from moltext.smiles.parser import is_valid, parse
from moltext.smiles.tokenizer import tokenize_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "ErrorKind",
    "MolGraph",
    "ParseError",
    "canonical_smiles",
    "canonicalize",
    "is_valid",
    "parse",
    "tokenize_smiles",
]
