"""
Assembly of the multi-layer satellite set: Walker shells, GEO slots and TLE shells,
ordered by altitude and numbered with layer-contiguous global IDs.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from src.errors import ConstellationError
from src.orbit.constants import EARTH_RADIUS
from src.orbit.epoch import Epoch
from src.orbit.frames import eci_to_ecef, gmst
from src.orbit.propagator import ElementArrays, OrbitalElements, propagate_many
from src.orbit.tle import load_tle_file
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

LayerKind = Literal["walker", "geo", "tle"]


@dataclass(frozen=True)
class LayerSpec:
    """
    Definition of one altitude shell. Layer indices are 1-based and ordered low to high.

    ``longitudes_deg`` is only used by GEO-slot layers, ``tle_path`` only by TLE layers.
    """

    index: int
    name: str
    kind: LayerKind = "walker"
    planes: int = 1
    sats_per_plane: int = 1
    altitude: float = 0.0  # m
    inclination: float = 0.0  # deg
    raan_spread: float = 360.0  # deg
    phasing_offset: float = 0.0  # deg between adjacent planes
    min_elevation: float | None = None  # deg; None uses the cross-layer default
    tle_path: str | None = None
    longitudes_deg: tuple[float, ...] = ()


@dataclass(frozen=True)
class SatelliteId:
    global_id: int
    layer: int
    local_index: int


@dataclass(frozen=True)
class BuiltLayer:
    """Elements of one layer; element k has local index k + 1."""

    spec: LayerSpec
    elements: tuple[OrbitalElements, ...]

    @property
    def altitude(self) -> float:
        if self.spec.kind == "tle":
            return float(np.mean([e.semi_major_axis for e in self.elements])) - EARTH_RADIUS
        return self.spec.altitude

    def __len__(self) -> int:
        return len(self.elements)


def build_walker(spec: LayerSpec, epoch: Epoch) -> BuiltLayer:
    """
    P planes with RAAN spread evenly over ``raan_spread`` and sigma satellites per
    plane spaced evenly in argument of latitude, the phasing offset accumulating per plane.
    Local indices run plane-major: i = p * sigma + q + 1.
    """
    if spec.kind != "walker":
        raise ConstellationError(f"Layer '{spec.name}' is of kind '{spec.kind}', not 'walker'")
    if spec.planes <= 0 or spec.sats_per_plane <= 0:
        raise ConstellationError(
            f"Layer '{spec.name}' needs at least one plane and one satellite per plane "
            f"(got {spec.planes} x {spec.sats_per_plane})"
        )

    a = EARTH_RADIUS + spec.altitude
    inclination = math.radians(spec.inclination)
    raan_step = math.radians(spec.raan_spread) / spec.planes
    slot_step = 2.0 * math.pi / spec.sats_per_plane
    phasing = math.radians(spec.phasing_offset)

    elements = []
    for p in range(spec.planes):
        for q in range(spec.sats_per_plane):
            elements.append(
                OrbitalElements(
                    semi_major_axis=a,
                    inclination=inclination,
                    raan=p * raan_step,
                    arg_latitude_at_epoch=q * slot_step + p * phasing,
                    epoch=epoch,
                )
            )
    return BuiltLayer(spec, tuple(elements))


def build_geo_slots(spec: LayerSpec, epoch: Epoch) -> BuiltLayer:
    """Equatorial circular satellites sitting over the given longitudes at ``epoch``."""
    if not spec.longitudes_deg:
        raise ConstellationError(f"GEO layer '{spec.name}' lists no longitudes")
    a = EARTH_RADIUS + spec.altitude
    theta = gmst(epoch)
    elements = tuple(
        OrbitalElements(
            semi_major_axis=a,
            inclination=0.0,
            raan=0.0,
            arg_latitude_at_epoch=math.radians(lon) + theta,
            epoch=epoch,
        )
        for lon in spec.longitudes_deg
    )
    return BuiltLayer(spec, elements)


def build_tle_layer(spec: LayerSpec) -> BuiltLayer:
    if not spec.tle_path:
        raise ConstellationError(f"TLE layer '{spec.name}' has no tle_path")
    elements = tuple(load_tle_file(spec.tle_path))
    if not elements:
        raise ConstellationError(f"TLE file '{spec.tle_path}' of layer '{spec.name}' holds no records")
    return BuiltLayer(spec, elements)


def build_layer(spec: LayerSpec, epoch: Epoch) -> BuiltLayer:
    if spec.kind == "walker":
        return build_walker(spec, epoch)
    if spec.kind == "geo":
        return build_geo_slots(spec, epoch)
    if spec.kind == "tle":
        return build_tle_layer(spec)
    raise ConstellationError(f"Unknown layer kind '{spec.kind}'")


@dataclass(frozen=True)
class Constellation:
    """All satellites of a scenario with layer-contiguous global IDs 1..|S|."""

    layers: tuple[BuiltLayer, ...]
    offsets: tuple[int, ...] = field(repr=False)  # offsets[u - 1] = sum of sizes below layer u

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def size(self) -> int:
        return self.offsets[-1] + len(self.layers[-1])

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)

    def layer(self, u: int) -> BuiltLayer:
        if not 1 <= u <= self.n_layers:
            raise ConstellationError(f"Layer {u} outside [1, {self.n_layers}]")
        return self.layers[u - 1]

    def layer_spec(self, u: int) -> LayerSpec:
        return self.layer(u).spec

    def global_id(self, u: int, local_index: int) -> int:
        size = len(self.layer(u))
        if not 1 <= local_index <= size:
            raise ConstellationError(f"Local index {local_index} outside [1, {size}] on layer {u}")
        return self.offsets[u - 1] + local_index

    def layer_ids(self, u: int) -> range:
        """Global IDs of layer ``u``."""
        start = self.offsets[u - 1] + 1
        return range(start, start + len(self.layer(u)))

    def satellite(self, g: int) -> SatelliteId:
        u, i = layer_of(g, self)
        return SatelliteId(global_id=g, layer=u, local_index=i)

    def elements(self, g: int) -> OrbitalElements:
        u, i = layer_of(g, self)
        return self.layers[u - 1].elements[i - 1]

    @cached_property
    def element_arrays(self) -> ElementArrays:
        return ElementArrays.from_elements([e for layer in self.layers for e in layer.elements])

    @cached_property
    def layer_index_array(self) -> NDArray[np.int64]:
        """Layer index per satellite, position g - 1."""
        return np.repeat(np.arange(1, self.n_layers + 1), self.layer_sizes)

    def positions_ecef(self, t: Epoch) -> NDArray[np.float64]:
        """ECEF positions of shape (|S|, 3); row g - 1 belongs to global ID g."""
        return eci_to_ecef(propagate_many(self.element_arrays, t), t)


def assign_global_ids(layers: list[BuiltLayer]) -> Constellation:
    """Numbers the layers' satellites 1..|S|, lowest layer first."""
    if not layers:
        raise ConstellationError("A constellation needs at least one layer")
    indices = [layer.spec.index for layer in layers]
    if len(set(indices)) != len(indices):
        raise ConstellationError(f"Duplicate layer indices {indices}")
    if indices != list(range(1, len(layers) + 1)):
        raise ConstellationError(f"Layer indices must run consecutively from 1 in order, got {indices}")
    altitudes = [layer.altitude for layer in layers]
    if any(lo >= hi for lo, hi in zip(altitudes, altitudes[1:])):
        raise ConstellationError(f"Layer altitudes must strictly increase with the index, got {altitudes}")
    if any(len(layer) == 0 for layer in layers):
        raise ConstellationError("Empty layer")

    offsets = [0]
    for layer in layers[:-1]:
        offsets.append(offsets[-1] + len(layer))
    constellation = Constellation(layers=tuple(layers), offsets=tuple(offsets))
    logger.info(
        f"Assembled {constellation.n_layers} layer(s) with sizes {list(constellation.layer_sizes)} "
        f"(global IDs 1..{constellation.size})."
    )
    return constellation


def build_constellation(specs: list[LayerSpec], epoch: Epoch) -> Constellation:
    return assign_global_ids([build_layer(spec, epoch) for spec in specs])


def layer_of(g: int, c: Constellation) -> tuple[int, int]:
    """(layer, local index) of global ID ``g``."""
    if not 1 <= g <= c.size:
        raise ConstellationError(f"Global ID {g} outside [1, {c.size}]")
    u = bisect_right(c.offsets, g - 1)
    return u, g - c.offsets[u - 1]


def plane_slot(i: int, spec: LayerSpec) -> tuple[int, int]:
    """Zero-based (plane, slot) of local index ``i`` on a Walker layer."""
    return divmod(i - 1, spec.sats_per_plane)


def local_index(p: int, q: int, spec: LayerSpec) -> int:
    return (p % spec.planes) * spec.sats_per_plane + (q % spec.sats_per_plane) + 1


def _require_grid(spec: LayerSpec) -> None:
    if spec.kind != "walker":
        raise ConstellationError(f"Layer {spec.index} ('{spec.name}') is not a Walker grid layer")
    if spec.planes < 3 or spec.sats_per_plane < 3:
        raise ConstellationError(
            f"Layer {spec.index} ('{spec.name}') is a degenerate grid ({spec.planes} planes x "
            f"{spec.sats_per_plane} satellites); four distinct neighbours need at least 3 x 3"
        )


def intra_layer_neighbors(u: int, i: int, c: Constellation) -> set[int]:
    """Local indices of the two in-plane and two adjacent-plane neighbours on the wrapped grid."""
    spec = c.layer_spec(u)
    _require_grid(spec)
    c.global_id(u, i)  # range check
    p, q = plane_slot(i, spec)
    return {
        local_index(p, q - 1, spec),
        local_index(p, q + 1, spec),
        local_index(p - 1, q, spec),
        local_index(p + 1, q, spec),
    }
