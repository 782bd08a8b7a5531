"""
Two-body propagation. Circular shells advance the argument of latitude at the mean
motion; eccentric (TLE-derived) sets solve Kepler's equation from mean elements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.errors import UnsupportedElementsError
from src.orbit.constants import EARTH_RADIUS, MU_EARTH
from src.orbit.epoch import Epoch
from src.orbit.frames import EciPosition

TWO_PI = 2.0 * np.pi
KEPLER_TOLERANCE = 1e-12
KEPLER_MAX_ITERATIONS = 30


@dataclass(frozen=True)
class OrbitalElements:
    """
    Mean/osculating element set (angles in radians, normalized to [0, 2*pi)).

    For eccentric orbits ``arg_latitude_at_epoch`` is the mean argument of latitude,
    i.e. argument of perigee plus mean anomaly.
    """

    semi_major_axis: float
    inclination: float
    raan: float
    arg_latitude_at_epoch: float
    epoch: Epoch
    eccentricity: float = 0.0
    arg_perigee: float = 0.0

    def __post_init__(self):
        if not self.semi_major_axis > EARTH_RADIUS:
            raise ValueError(f"Semi-major axis {self.semi_major_axis} m is inside the Earth")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"Eccentricity {self.eccentricity} outside [0, 1)")
        for name in ("inclination", "raan", "arg_latitude_at_epoch", "arg_perigee"):
            object.__setattr__(self, name, float(getattr(self, name)) % TWO_PI)

    @property
    def mean_motion(self) -> float:
        """Mean motion in rad/s."""
        return mean_motion(self.semi_major_axis)


def mean_motion(semi_major_axis):
    return np.sqrt(MU_EARTH / semi_major_axis**3)


def _position(radius, arg_latitude, raan, inclination) -> NDArray[np.float64]:
    cu, su = np.cos(arg_latitude), np.sin(arg_latitude)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inclination), np.sin(inclination)
    x = radius * (cu * co - su * ci * so)
    y = radius * (cu * so + su * ci * co)
    z = radius * (su * si)
    return np.stack([x, y, z], axis=-1)


def solve_kepler(mean_anomaly, eccentricity):
    """Eccentric anomaly by Newton iteration; works elementwise on arrays."""
    mean_anomaly = np.asarray(mean_anomaly, dtype=float)
    eccentricity = np.asarray(eccentricity, dtype=float)
    E = np.where(eccentricity < 0.8, mean_anomaly, np.pi * np.ones_like(mean_anomaly))
    for _ in range(KEPLER_MAX_ITERATIONS):
        step = (E - eccentricity * np.sin(E) - mean_anomaly) / (1.0 - eccentricity * np.cos(E))
        E = E - step
        if np.all(np.abs(step) < KEPLER_TOLERANCE):
            break
    return E


def propagate_circular(elements: OrbitalElements, t: Epoch) -> EciPosition:
    if elements.eccentricity != 0.0:
        raise UnsupportedElementsError(
            f"Circular propagator got eccentricity {elements.eccentricity}; use propagate_kepler"
        )
    dt = t - elements.epoch
    u = elements.arg_latitude_at_epoch + elements.mean_motion * dt
    return _position(elements.semi_major_axis, u, elements.raan, elements.inclination)


def propagate_kepler(elements: OrbitalElements, t: Epoch) -> EciPosition:
    e = elements.eccentricity
    dt = t - elements.epoch
    M = elements.arg_latitude_at_epoch - elements.arg_perigee + elements.mean_motion * dt
    E = solve_kepler(np.mod(M, TWO_PI), e)
    nu = 2.0 * np.arctan2(np.sqrt(1.0 + e) * np.sin(E / 2.0), np.sqrt(1.0 - e) * np.cos(E / 2.0))
    radius = elements.semi_major_axis * (1.0 - e * np.cos(E))
    return _position(radius, elements.arg_perigee + nu, elements.raan, elements.inclination)


def propagate(elements: OrbitalElements, t: Epoch) -> EciPosition:
    if elements.eccentricity == 0.0:
        return propagate_circular(elements, t)
    return propagate_kepler(elements, t)


@dataclass(frozen=True)
class ElementArrays:
    """Column-wise view of many element sets for vectorised propagation."""

    semi_major_axis: NDArray[np.float64]
    inclination: NDArray[np.float64]
    raan: NDArray[np.float64]
    arg_latitude_at_epoch: NDArray[np.float64]
    eccentricity: NDArray[np.float64]
    arg_perigee: NDArray[np.float64]
    epoch_seconds: NDArray[np.float64]

    @classmethod
    def from_elements(cls, elements: list[OrbitalElements]) -> ElementArrays:
        def column(name):
            return np.array([getattr(e, name) for e in elements], dtype=float)

        return cls(
            semi_major_axis=column("semi_major_axis"),
            inclination=column("inclination"),
            raan=column("raan"),
            arg_latitude_at_epoch=column("arg_latitude_at_epoch"),
            eccentricity=column("eccentricity"),
            arg_perigee=column("arg_perigee"),
            epoch_seconds=np.array([e.epoch.utc_seconds for e in elements], dtype=float),
        )


def propagate_many(arrays: ElementArrays, t: Epoch) -> NDArray[np.float64]:
    """ECI positions of shape (n, 3); circular entries take the closed form."""
    n = mean_motion(arrays.semi_major_axis)
    dt = t.utc_seconds - arrays.epoch_seconds
    u = arrays.arg_latitude_at_epoch + n * dt
    radius = arrays.semi_major_axis.copy()

    eccentric = arrays.eccentricity > 0.0
    if np.any(eccentric):
        e = arrays.eccentricity[eccentric]
        w = arrays.arg_perigee[eccentric]
        M = np.mod(u[eccentric] - w, TWO_PI)
        E = solve_kepler(M, e)
        nu = 2.0 * np.arctan2(np.sqrt(1.0 + e) * np.sin(E / 2.0), np.sqrt(1.0 - e) * np.cos(E / 2.0))
        radius[eccentric] = arrays.semi_major_axis[eccentric] * (1.0 - e * np.cos(E))
        u[eccentric] = w + nu

    return _position(radius, u, arrays.raan, arrays.inclination)
