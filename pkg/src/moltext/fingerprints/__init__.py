"""Molecular fingerprints and Tanimoto similarity."""

from moltext.fingerprints.base import Fingerprint, fnv1a64, fts_batch, tanimoto
from moltext.fingerprints.maccs import maccs_fp, maccs_keys
from moltext.fingerprints.morgan import morgan_environments, morgan_fp
from moltext.fingerprints.paths import linear_paths, path_fp

FAMILIES = ("maccs", "path", "morgan")


def fingerprint(mol, family: str, radius: int = 2, max_len: int = 7, bit_width: int = 2048) -> Fingerprint:
    """Dispatch on family name; ``radius`` and ``max_len`` apply to morgan and path only."""
    if family == "maccs":
        return maccs_fp(mol)
    if family == "path":
        return path_fp(mol, max_len, bit_width)
    if family == "morgan":
        return morgan_fp(mol, radius, bit_width)
    raise ValueError(f"unknown fingerprint family {family!r}; expected one of {FAMILIES}")


__all__ = [
    "FAMILIES",
    "Fingerprint",
    "fingerprint",
    "fnv1a64",
    "fts_batch",
    "linear_paths",
    "maccs_fp",
    "maccs_keys",
    "morgan_environments",
    "morgan_fp",
    "path_fp",
    "tanimoto",
]
