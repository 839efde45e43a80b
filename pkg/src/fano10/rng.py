"""Deterministic labeled randomness.

Every stochastic routine takes (seed, label) and derives an independent stream
from sha256, so reruns and parallel checks cannot interfere with each other.
Python's builtin hash() is salted per process and is never used here.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def _digest_int(seed: int, label: str) -> int:
    h = hashlib.sha256(f"{seed}|{label}".encode()).digest()
    return int.from_bytes(h[:16], "big")


def stream(seed: int, label: str) -> random.Random:
    return random.Random(_digest_int(seed, label))


def np_stream(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(_digest_int(seed, label))
