"""Spatial sampling in a disk and distance distributions between random points."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class Point2D(NamedTuple):
    x: float
    y: float


ORIGIN = Point2D(0.0, 0.0)


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic generator for stream ``index`` of ``seed``.

    Distinct indices give statistically independent streams, and the same
    ``(seed, index)`` pair always reproduces the same sequence.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_uniform_disk(center, radius: float, rng: np.random.Generator,
                        size: int | None = None) -> np.ndarray:
    """Area-uniform point(s) in the disk of ``radius`` around ``center``.

    Parameters
    ----------
    center : array_like, shape (2,) or (n, 2)
        Disk center. A stack of centers together with ``size=n`` draws one
        point per center.
    radius : float
    rng : numpy.random.Generator
    size : int, optional
        Number of points. ``None`` returns a single point of shape (2,).

    Returns
    -------
    numpy.ndarray
        Shape (2,) if ``size`` is None, otherwise (size, 2).
    """
    n = 1 if size is None else size
    r = radius * np.sqrt(rng.random(n))
    t = 2.0 * np.pi * rng.random(n)
    pts = np.column_stack((r * np.cos(t), r * np.sin(t))) + np.asarray(center, dtype=float)
    return pts[0] if size is None else pts


def sample_ppp_disk(density: float, radius: float, rng: np.random.Generator,
                    center=ORIGIN) -> np.ndarray:
    """Homogeneous Poisson point process restricted to a disk.

    The count is Poisson with mean ``density * pi * radius**2``; given the
    count the points are i.i.d. uniform over the disk.

    Returns
    -------
    numpy.ndarray, shape (n, 2)
    """
    if density < 0:
        raise ValueError("density must be non-negative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = int(rng.poisson(density * math.pi * radius * radius))
    return sample_uniform_disk(center, radius, rng, size=n)


def thin(points: np.ndarray, keep_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Independently retain each point with probability ``keep_prob``."""
    return points[rng.random(len(points)) < keep_prob]


def distance(a, b) -> float | np.ndarray:
    """Euclidean distance, broadcasting over trailing coordinate axes."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    out = np.hypot(d[..., 0], d[..., 1])
    return float(out) if out.ndim == 0 else out


def pdf_pairwise_distance(r, R: float):
    """Density of the distance between two independent uniform points in a disk.

    Parameters
    ----------
    r : float or array_like
        Distance(s); the density vanishes outside ``[0, 2R]``.
    R : float
        Disk radius.
    """
    r = np.asarray(r, dtype=float)
    inside = (r >= 0) & (r <= 2 * R)
    u = np.clip(r / (2 * R), 0.0, 1.0)
    val = 2 * r / R ** 2 * (2 / np.pi * np.arccos(u) - r / (np.pi * R) * np.sqrt(1 - u * u))
    out = np.where(inside, np.maximum(val, 0.0), 0.0)
    return float(out) if out.ndim == 0 else out


def mean_pairwise_distance(R: float) -> float:
    """Mean distance between two independent uniform points in a disk of radius R."""
    return 128.0 * R / (45.0 * math.pi)


def conditional_mean_farthest(R: float) -> float:
    """Approximate mean distance to the farther of two uniform points in a disk."""
    return 512.0 * R / (45.0 * math.pi ** 2)


def farthest_mean_oracle(R: float, num_cues: int, n: int,
                         rng: np.random.Generator) -> float:
    """Sample mean of ``max`` over ``num_cues`` independent pairwise distances.

    Each candidate distance comes from its own independent pair of uniform
    points in the disk, so the candidates are i.i.d. with the pairwise
    distance law.
    """
    a = sample_uniform_disk(ORIGIN, R, rng, size=n * num_cues)
    b = sample_uniform_disk(ORIGIN, R, rng, size=n * num_cues)
    d = distance(a, b).reshape(n, num_cues)
    return float(d.max(axis=1).mean())
