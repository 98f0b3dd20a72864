"""Shared helpers: Gauss-Legendre rules, seed derivation, float formatting."""

from __future__ import annotations

import hashlib
from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; weights integrate dx (sum to 2)."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def segment_nodes(lo: float, hi: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """GL nodes/weights on [lo, hi]; weights integrate dx over the segment."""
    xi, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    return lo + half * (xi + 1.0), half * w


def panel_nodes(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL rule: `panels` equal panels, `order` nodes each."""
    edges = np.linspace(lo, hi, panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = segment_nodes(a, b, order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _stable_tag_int(tag) -> int:
    digest = hashlib.sha256(repr(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed_sequence(seed: int, *tags) -> np.random.SeedSequence:
    """Deterministic per-task SeedSequence from a root seed and task labels.

    Labels are hashed with SHA-256 so the derivation is stable across runs,
    platforms and process boundaries (unlike Python's salted hash()).
    """
    entropy = [int(seed) & _MASK64] + [_stable_tag_int(t) for t in tags]
    return np.random.SeedSequence(entropy)


def derive_rng(seed: int, *tags) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(seed, *tags))


def fmt17(x) -> str:
    """Decimal float with 17 significant digits (round-trips doubles)."""
    return format(float(x), ".17g")
