"""Resource sharing: each D2D link reuses the uplink resource of the CUE
farthest from its receiver, which splits the links into one group per CUE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AllocationResult:
    assignment: np.ndarray  # CUE index per link
    group_sizes: np.ndarray  # links per CUE, length M

    def members(self, cue: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cue)


def allocate(d2d_receivers, cues) -> AllocationResult:
    """Assign every link to the CUE farthest from its receiver.

    Ties go to the lowest CUE index. The cost is one distance per
    (link, CUE) pair.

    Parameters
    ----------
    d2d_receivers : array_like, shape (K, 2)
    cues : array_like, shape (M, 2)
    """
    cues = np.asarray(cues, dtype=float).reshape(-1, 2)
    rx = np.asarray(d2d_receivers, dtype=float).reshape(-1, 2)
    if len(cues) == 0:
        raise ValueError("at least one CUE is required")
    diff = rx[:, None, :] - cues[None, :, :]
    # squared distances preserve the ordering and avoid sqrt rounding ties
    d2 = np.einsum("kmi,kmi->km", diff, diff)
    assignment = np.argmax(d2, axis=1) if len(rx) else np.zeros(0, dtype=int)
    sizes = np.bincount(assignment, minlength=len(cues))
    return AllocationResult(assignment.astype(int), sizes)


def effective_density(lam: float, num_cues: int) -> float:
    """Density of the links sharing one CUE's resource."""
    if num_cues < 1:
        raise ValueError("num_cues must be at least 1")
    if lam < 0:
        raise ValueError("density must be non-negative")
    return lam / num_cues
