"""Finite vector families realizing 'for all vectors' conditions.

The conditions verified in this package are orthogonality statements
about sesquilinear forms, so they hold for every vector exactly when
they hold on a polarization family: the computational basis plus the
normalized pairwise sums e_i + e_j and e_i + i e_j.  A fixed-seed batch
of random vectors is appended downstream as an independent guard against
implementation bugs.
"""

from __future__ import annotations

import numpy as np

STABILITY_SEED = 0x5AB1E
STABILITY_COUNT = 4


def spanning_family(dim: int) -> list[np.ndarray]:
    """Polarization family of size dim**2: {e_i} + {(e_i+e_j)/sqrt2} + {(e_i+ie_j)/sqrt2}."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    eye = np.eye(dim, dtype=np.complex128)
    fam = [eye[:, i].copy() for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            fam.append((eye[:, i] + eye[:, j]) / np.sqrt(2))
    for i in range(dim):
        for j in range(i + 1, dim):
            fam.append((eye[:, i] + 1j * eye[:, j]) / np.sqrt(2))
    return fam


def stability_vectors(dim: int, count: int = STABILITY_COUNT, seed: int = STABILITY_SEED) -> list[np.ndarray]:
    """Deterministic unit vectors used to cross-check family sufficiency."""
    rng = np.random.default_rng(seed + dim)
    out = []
    for _ in range(count):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        out.append(v / np.linalg.norm(v))
    return out
