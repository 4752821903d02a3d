"""Homogeneous PPP geometry: window sampling and direct nearest-distance draws.

Base stations form a homogeneous Poisson point process of intensity
``bs_density`` (BS/km^2); the observer sits at the origin.  Two samplers are
provided: a square-window sampler (draw a Poisson count, scatter points
uniformly, sort distances) and a window-free direct sampler that draws the
first ``count`` ordered distances from their exact law, where squared
distances are cumulative sums of i.i.d. Exponential increments with mean
``1/(pi * bs_density)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NetworkConfig:
    """Physical scenario: density, path loss, noise and window half-width.

    Distances are in km, ``bs_density`` in BS/km^2, ``noise_power`` in the
    same linear power units as the unit-mean fading gains.
    """

    bs_density: float = 1.0
    pathloss_exponent: float = 4.0
    noise_power: float = 0.1
    half_width: float = 40.0

    def __post_init__(self) -> None:
        if not self.bs_density > 0:
            raise ValueError(f"bs_density must be > 0, got {self.bs_density}")
        if not self.pathloss_exponent > 0:
            raise ValueError(
                f"pathloss_exponent must be > 0, got {self.pathloss_exponent}"
            )
        if not self.noise_power >= 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be > 0, got {self.half_width}")

    @property
    def expected_window_count(self) -> float:
        """Mean number of points in the (2L)^2 window."""
        return self.bs_density * (2.0 * self.half_width) ** 2


@dataclass(frozen=True)
class PppRealization:
    """One spatial draw: ascending distances from the origin to every BS."""

    distances: np.ndarray
    point_count: int

    def __post_init__(self) -> None:
        if self.point_count != len(self.distances):
            raise ValueError(
                f"point_count {self.point_count} != len(distances) "
                f"{len(self.distances)}"
            )
        if self.point_count > 1 and np.any(np.diff(self.distances) < 0):
            raise ValueError("distances must be sorted ascending")


def sample_window_realization(
    cfg: NetworkConfig, rng: np.random.Generator
) -> PppRealization:
    """Draw one realization on the [-L, L]^2 window.

    The point count is Poisson(bs_density * (2L)^2), locations are uniform on
    the window, and the returned distances are sorted ascending.  An empty
    draw yields an empty distance list; callers decide how to handle
    realizations with fewer points than they need.
    """
    count = int(rng.poisson(cfg.expected_window_count))
    if count == 0:
        return PppRealization(distances=np.empty(0), point_count=0)
    pts = rng.uniform(-cfg.half_width, cfg.half_width, size=(count, 2))
    sq = pts[:, 0] * pts[:, 0] + pts[:, 1] * pts[:, 1]
    sq.sort()
    return PppRealization(distances=np.sqrt(sq), point_count=count)


def nearest_window_distances(
    cfg: NetworkConfig, count: int, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Fast path: total window count plus the sorted ``count`` nearest distances.

    Consumes the stream exactly like :func:`sample_window_realization` and
    returns bit-identical leading distances; only the sorting is truncated.
    If the realization holds fewer than ``count`` points, all of them are
    returned and the caller sees the shortfall via the returned total.
    """
    total = int(rng.poisson(cfg.expected_window_count))
    if total == 0:
        return 0, np.empty(0)
    pts = rng.uniform(-cfg.half_width, cfg.half_width, size=(total, 2))
    sq = pts[:, 0] * pts[:, 0] + pts[:, 1] * pts[:, 1]
    if total > count:
        sq = np.partition(sq, count - 1)[:count]
    sq.sort()
    return total, np.sqrt(sq)


def sample_ordered_distances_direct(
    bs_density: float, count: int, rng: np.random.Generator
) -> PppRealization:
    """Draw the first ``count`` ordered BS distances without a window.

    Squared distances are cumulative sums of i.i.d. Exponential increments
    with mean 1/(pi*bs_density), so the i-th squared distance is
    Gamma(i, 1/(pi*bs_density)) distributed.
    """
    if not bs_density > 0:
        raise ValueError(f"bs_density must be > 0, got {bs_density}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    sq = rng.exponential(1.0 / (math.pi * bs_density), size=count).cumsum()
    return PppRealization(distances=np.sqrt(sq), point_count=count)


def serving_distance_density(r, bs_density: float):
    """Density of the nearest-BS distance: 2*pi*lam*r*exp(-pi*lam*r^2).

    Accepts scalars or arrays in ``r``; rejects negative radii.
    """
    if not bs_density > 0:
        raise ValueError(f"bs_density must be > 0, got {bs_density}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be >= 0")
    out = 2.0 * math.pi * bs_density * r * np.exp(-math.pi * bs_density * r * r)
    return out if out.ndim else float(out)
