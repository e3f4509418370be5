"""Seeded randomness.

Every random draw in the package goes through :func:`make_rng`, which wraps
numpy's PCG64 bit generator.  Sub-streams for individual checks are derived
from the run seed and a textual label, so adding or reordering checks never
perturbs the numbers another check sees.
"""

from __future__ import annotations

import zlib

import numpy as np


def make_rng(seed: int, label: str | None = None) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``, optionally split by ``label``."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    if label is not None:
        entropy.append(zlib.crc32(label.encode("utf-8")))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def random_operator(rng: np.random.Generator, dim: int) -> np.ndarray:
    """I.i.d. complex Gaussian matrix scaled to unit operator norm."""
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return m / np.linalg.norm(m, 2)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = random_operator(rng, dim)
    h = 0.5 * (m + m.conj().T)
    return h / np.linalg.norm(h, 2)


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
