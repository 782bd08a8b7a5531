"""
Visibility geometry on quasi-static snapshots: slant ranges, elevations, SC access,
cross-layer candidate sets and the directional-angle test used to pick descent nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from src.errors import ConstellationError, GeometryError
from src.network.constellation import Constellation, layer_of
from src.orbit.epoch import Epoch
from src.orbit.frames import EcefPosition

DEFAULT_SC_MIN_ELEVATION = 25.0  # deg
DEFAULT_CROSS_LAYER_MIN_ELEVATION = 10.0  # deg


@dataclass(frozen=True)
class StateAtT:
    """
    Positions of every satellite (row g - 1 for global ID g) and of the SC at one instant.
    Derived quantities are memoised on the snapshot; the positions themselves never change.
    """

    t: Epoch
    positions: NDArray[np.float64]
    sc_position: EcefPosition
    sc_min_elevation: float = DEFAULT_SC_MIN_ELEVATION
    _candidates: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def capture(
        cls, c: Constellation, t: Epoch, sc_position: EcefPosition, sc_min_elevation: float = DEFAULT_SC_MIN_ELEVATION
    ) -> StateAtT:
        positions = c.positions_ecef(t)
        positions.setflags(write=False)
        return cls(t=t, positions=positions, sc_position=np.asarray(sc_position, dtype=float), sc_min_elevation=sc_min_elevation)

    def position(self, g: int) -> EcefPosition:
        return self.positions[g - 1]

    @cached_property
    def sc_elevations(self) -> NDArray[np.float64]:
        """Elevation (deg) of every satellite above the SC horizon."""
        return elevations_seen_from(self.sc_position, self.positions)

    @cached_property
    def sc_ranges(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.positions - self.sc_position, axis=1)


@dataclass(frozen=True)
class DirectionalAngles:
    theta1: float
    theta2: float

    @property
    def same_sign(self) -> bool:
        return (self.theta1 >= 0.0) == (self.theta2 >= 0.0)


def _unit(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def slant_range(a: EcefPosition, b: EcefPosition) -> float:
    return float(np.linalg.norm(np.asarray(b, dtype=float) - np.asarray(a, dtype=float)))


def elevation(observer: EcefPosition, target: EcefPosition) -> float:
    """Angle (deg) of the observer->target line above the observer's local horizontal plane."""
    observer = np.asarray(observer, dtype=float)
    line = np.asarray(target, dtype=float) - observer
    if np.linalg.norm(observer) == 0.0:
        raise GeometryError("Observer at the geocenter has no horizon")
    if np.linalg.norm(line) == 0.0:
        raise GeometryError("Elevation undefined for coincident observer and target")
    sine = np.dot(_unit(line), _unit(observer))
    return float(np.degrees(np.arcsin(np.clip(sine, -1.0, 1.0))))


def elevations_seen_from(observer: EcefPosition, targets: NDArray[np.float64]) -> NDArray[np.float64]:
    """Elevation (deg) of each target row above the horizon of a single observer."""
    lines = targets - observer
    sine = _unit(lines) @ _unit(np.asarray(observer, dtype=float))
    return np.degrees(np.arcsin(np.clip(sine, -1.0, 1.0)))


def elevations_of_target(observers: NDArray[np.float64], target: EcefPosition) -> NDArray[np.float64]:
    """Elevation (deg) of a single target above the horizon of each observer row."""
    lines = target - observers
    sine = np.einsum("ij,ij->i", _unit(lines), _unit(observers))
    return np.degrees(np.arcsin(np.clip(sine, -1.0, 1.0)))


def is_accessible_by_sc(sc: EcefPosition, sat: EcefPosition, min_elev: float = DEFAULT_SC_MIN_ELEVATION) -> bool:
    return elevation(sc, sat) >= min_elev


def cross_layer_candidates(
    ssn: int,
    state: StateAtT,
    c: Constellation,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
    lower_layer: int | None = None,
) -> list[int]:
    """
    Global IDs on ``lower_layer`` (default: the layer just below) that see ``ssn`` at
    least ``min_elevation`` above their own horizon, ascending. A lower layer that sets
    its own minimum elevation uses that instead.
    """
    u, _ = layer_of(ssn, c)
    if u == 1:
        raise ConstellationError(f"Satellite {ssn} is on layer 1; there is no lower layer")
    lower = u - 1 if lower_layer is None else lower_layer
    if not 1 <= lower < u:
        raise ConstellationError(f"Layer {lower} is not below layer {u} of satellite {ssn}")
    layer_threshold = c.layer_spec(lower).min_elevation
    if layer_threshold is not None:
        min_elevation = layer_threshold

    key = (ssn, lower, min_elevation)
    cached = state._candidates.get(key)
    if cached is not None:
        return cached

    ids = c.layer_ids(lower)
    lower_positions = state.positions[ids.start - 1 : ids.stop - 1]
    visible = elevations_of_target(lower_positions, state.position(ssn)) >= min_elevation
    result = [ids.start + int(k) for k in np.flatnonzero(visible)]
    state._candidates[key] = result
    return result


def _same_sign_dots(sc, ssn, candidates, dsn) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    x3 = ssn - sc
    x1 = candidates - ssn
    x2 = dsn - ssn
    reference = np.cross(x3, x2)
    return np.cross(x3, x1) @ reference, reference


def directional_angles(
    sc: EcefPosition, ssn: EcefPosition, candidate: EcefPosition, dsn: EcefPosition
) -> DirectionalAngles:
    """
    Angles of SSN->candidate and SSN->DSN against SC->SSN. theta2 is the positive
    reference; theta1 is negative when the candidate lies on the other side of the
    plane spanned by SC->SSN and SSN->DSN.
    """
    sc, ssn, candidate, dsn = (np.asarray(v, dtype=float) for v in (sc, ssn, candidate, dsn))
    x1, x2, x3 = candidate - ssn, dsn - ssn, ssn - sc
    for name, v in (("SSN->candidate", x1), ("SSN->DSN", x2), ("SC->SSN", x3)):
        if np.linalg.norm(v) == 0.0:
            raise GeometryError(f"Zero-length {name} vector")

    def angle(a, b):
        cosine = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(np.arccos(np.clip(cosine, -1.0, 1.0)))

    side = np.dot(np.cross(x3, x1), np.cross(x3, x2))
    theta1 = angle(x3, x1)
    return DirectionalAngles(theta1=-theta1 if side < 0 else theta1, theta2=angle(x3, x2))


def same_sign_mask(
    sc: EcefPosition, ssn: EcefPosition, candidates: NDArray[np.float64], dsn: EcefPosition
) -> NDArray[np.bool_]:
    """Vectorised same-sign test for many candidate rows; coplanar candidates count as same-sign."""
    dots, _ = _same_sign_dots(sc, ssn, candidates, dsn)
    return dots >= 0.0


def accessible_set(
    state: StateAtT, layers_in_scheme: Iterable[int], min_elev: float, c: Constellation
) -> list[int]:
    """G(t): satellites of the given layers the SC sees at ``min_elev`` or higher, ascending."""
    layers = sorted(set(layers_in_scheme))
    if not layers:
        return []
    in_layers = np.isin(c.layer_index_array, layers)
    visible = in_layers & (state.sc_elevations >= min_elev)
    return [int(k) + 1 for k in np.flatnonzero(visible)]
