"""Deterministic seed derivation.

A single master seed fans out to independent child streams through a labeled
hash, so adding a stage (or a column) never perturbs the randomness consumed
by any other stage. Derivation is stable across platforms and interpreter
runs, unlike ``hash()``.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, label: str) -> int:
    """Return the child seed for ``label`` under master ``seed`` (u64)."""
    payload = f"{int(seed)}:{label}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def generator(seed: int, label: str) -> np.random.Generator:
    """A fresh numpy generator on the (seed, label) child stream."""
    return np.random.default_rng(derive_seed(seed, label))
