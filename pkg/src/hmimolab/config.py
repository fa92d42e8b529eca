"""Scenario parameters, antenna placement and user placement.

All quantities are SI unless the name says otherwise.  User variances follow
the distance power law sigma_k^2 = (d_k / reference_distance_m)^(-alpha); the
reference distance defaults to 1 m, and experiment presets may normalize to
the cell edge or to the matched-filter power budget instead (see
:mod:`hmimolab.experiments`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one scenario.

    ``rho`` is always derived as P/(M*N0); it is a property so it can never
    drift from the stored fields.
    """

    m: int
    k: int
    p_watts: float
    n0_watts: float
    wavelength_m: float
    pathloss_exponent: float = 3.5
    cell_radius_m: float = 500.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive integers")
        if self.p_watts <= 0 or self.n0_watts <= 0:
            raise ValueError("p_watts and n0_watts must be positive")
        if self.wavelength_m <= 0 or self.cell_radius_m <= 0:
            raise ValueError("wavelength_m and cell_radius_m must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def rho(self) -> float:
        return self.p_watts / (self.m * self.n0_watts)

    @staticmethod
    def wavelength_from_carrier(carrier_hz: float) -> float:
        if carrier_hz <= 0:
            raise ValueError("carrier frequency must be positive")
        return SPEED_OF_LIGHT / carrier_hz


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar element positions (meters) plus the construction mode."""

    positions: np.ndarray  # (M, 2)
    mode: str  # "aperture" | "spacing"
    dimension_m: float  # aperture side or inter-element spacing

    def __post_init__(self):
        object.__setattr__(self, "positions", _readonly(np.asarray(self.positions, float)))
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must have shape (M, 2)")
        d = pairwise_distances(self.positions)
        off = d[~np.eye(len(d), dtype=bool)]
        if off.size and off.min() <= 0.0:
            raise ValueError("element positions must be pairwise distinct")

    @property
    def m(self) -> int:
        return self.positions.shape[0]


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def build_array_geometry(m: int, mode: str, dimension_m: float,
                         line: bool = False) -> ArrayGeometry:
    """Place ``m`` elements on a square grid (or a line in spacing mode).

    aperture mode: ``dimension_m`` is the side of a square aperture and the
    grid spans it boundary-inclusive, so adjacent spacing is side/(sqrt(m)-1).
    spacing mode: ``dimension_m`` is the inter-element distance.
    """
    if dimension_m <= 0:
        raise ValueError("dimension_m must be positive")
    if mode not in ("aperture", "spacing"):
        raise ValueError(f"unknown geometry mode {mode!r}")

    if mode == "spacing" and line:
        xs = np.arange(m) * dimension_m
        pos = np.column_stack([xs, np.zeros(m)])
        return ArrayGeometry(pos, mode, dimension_m)

    side = math.isqrt(m)
    if side * side != m:
        raise ValueError(f"m={m} is not a perfect square; grid layout needs one")
    if mode == "aperture" and side < 2:
        raise ValueError("aperture mode needs m >= 4 so the grid can span the side")

    spacing = dimension_m / (side - 1) if mode == "aperture" else dimension_m
    xs = np.arange(side) * spacing
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pos = np.column_stack([gx.ravel(), gy.ravel()])
    return ArrayGeometry(pos, mode, dimension_m)


@dataclass(frozen=True)
class UserLayout:
    """Distances (m) and large-scale power gains for the K users."""

    distances_m: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "distances_m", _readonly(self.distances_m))
        object.__setattr__(self, "variances", _readonly(self.variances))
        if self.distances_m.shape != self.variances.shape or self.distances_m.ndim != 1:
            raise ValueError("distances and variances must be matching 1-D arrays")
        if np.any(self.distances_m <= 0) or np.any(self.variances <= 0):
            raise ValueError("distances and variances must be positive")

    @property
    def k(self) -> int:
        return self.distances_m.size

    def interferer_variances(self, user: int) -> np.ndarray:
        return np.delete(self.variances, user)


def pathloss_variance(distances_m: np.ndarray, pathloss_exponent: float,
                      reference_distance_m: float = 1.0) -> np.ndarray:
    return (np.asarray(distances_m, float) / reference_distance_m) ** (-pathloss_exponent)


def place_users(k: int, cell_radius_m: float, rng: np.random.Generator,
                pathloss_exponent: float = 3.5,
                min_distance_m: float = 10.0,
                reference_distance_m: float = 1.0) -> UserLayout:
    """Draw K users area-uniformly in a disc and fill pathloss variances.

    Radial distance is R*sqrt(u) with u uniform on (0, 1], floored at
    ``min_distance_m`` so the power law stays bounded.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < min_distance_m < cell_radius_m:
        raise ValueError("min_distance_m must lie strictly inside the cell")
    u = 1.0 - rng.random(k)  # (0, 1]; u = 1 puts the user on the cell edge
    d = np.maximum(cell_radius_m * np.sqrt(u), min_distance_m)
    var = pathloss_variance(d, pathloss_exponent, reference_distance_m)
    return UserLayout(d, var)


def equal_distance_layout(k: int, distance_m: float, pathloss_exponent: float,
                          reference_distance_m: float = 1.0) -> UserLayout:
    """All users at the same distance; used for symmetric benchmark scenarios."""
    d = np.full(k, float(distance_m))
    return UserLayout(d, pathloss_variance(d, pathloss_exponent, reference_distance_m))


def layout_with_variances(distances_m: np.ndarray, variances: np.ndarray) -> UserLayout:
    """Layout with explicitly overridden variances (e.g. power-normalized)."""
    return UserLayout(np.asarray(distances_m, float), np.asarray(variances, float))
