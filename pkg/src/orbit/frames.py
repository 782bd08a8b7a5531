"""
Frame conversions on a spherical Earth: ECI <-> ECEF through a linear GMST model,
geodetic -> ECEF, and the local North-East-Down basis.
All functions accept a single (3,) vector or a stack of shape (n, 3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.errors import DegenerateFrameError
from src.orbit.constants import EARTH_RADIUS, GMST_AT_J2000_DEG, GMST_RATE_DEG_PER_DAY
from src.orbit.epoch import Epoch

EciPosition = NDArray[np.float64]
EcefPosition = NDArray[np.float64]


@dataclass(frozen=True)
class NedFrame:
    origin: EcefPosition
    north: NDArray[np.float64]
    east: NDArray[np.float64]
    down: NDArray[np.float64]


def gmst(t: Epoch) -> float:
    """Greenwich mean sidereal time in radians, wrapped to [0, 2*pi)."""
    degrees = (GMST_AT_J2000_DEG + GMST_RATE_DEG_PER_DAY * t.days_since_j2000) % 360.0
    return np.deg2rad(degrees)


def _rotate_z(p: NDArray[np.float64], angle: float) -> NDArray[np.float64]:
    p = np.asarray(p, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty_like(p)
    out[..., 0] = c * p[..., 0] - s * p[..., 1]
    out[..., 1] = s * p[..., 0] + c * p[..., 1]
    out[..., 2] = p[..., 2]
    return out


def eci_to_ecef(p: EciPosition, t: Epoch) -> EcefPosition:
    """Rotates about z by -GMST(t)."""
    return _rotate_z(p, -gmst(t))


def ecef_to_eci(p: EcefPosition, t: Epoch) -> EciPosition:
    return _rotate_z(p, gmst(t))


def geodetic_to_ecef(lat: float, lng: float, alt: float = 0.0) -> EcefPosition:
    """
    Spherical-Earth geodetic conversion.

    :param lat: float -- Latitude in degrees, [-90, 90]
    :param lng: float -- Longitude in degrees, [-180, 180]
    :param alt: float -- Altitude above the sphere in meters
    :return: ECEF position in meters
    """
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"Latitude {lat} outside [-90, 90]")
    if not -180.0 <= lng <= 180.0:
        raise ValueError(f"Longitude {lng} outside [-180, 180]")
    phi, lam = np.deg2rad(lat), np.deg2rad(lng)
    r = EARTH_RADIUS + alt
    return np.array([r * np.cos(phi) * np.cos(lam), r * np.cos(phi) * np.sin(lam), r * np.sin(phi)])


def ned_basis(origin: EcefPosition) -> NedFrame:
    """Local North-East-Down basis at ``origin``; undefined on the polar axis."""
    origin = np.asarray(origin, dtype=float)
    norm = np.linalg.norm(origin)
    if norm == 0.0:
        raise DegenerateFrameError("NED frame undefined at the geocenter")
    down = -origin / norm
    east = np.cross(np.array([0.0, 0.0, 1.0]), -down)
    east_norm = np.linalg.norm(east)
    if east_norm < 1e-12:
        raise DegenerateFrameError("NED frame undefined on the z-axis (east direction degenerate)")
    east = east / east_norm
    north = np.cross(east, down)
    return NedFrame(origin=origin, north=north, east=east, down=down)
