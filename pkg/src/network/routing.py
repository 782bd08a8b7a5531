"""
Telecommand routing over the multi-layer network.

CLD routes pick the SC-accessible satellite on the lowest available scheme layer as
SSN, descend boundary by boundary to the target layer (choosing each next node among
the visible candidates on the DSN side of the SC-SSN line), and finish on the target
layer with dimension-ordered grid routing. The two baselines relay through a single
MEO or GEO layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal, NamedTuple

import numpy as np

from src.errors import ConstellationError, DescentBlockedError, UnreachableError
from src.network.access import (
    DEFAULT_CROSS_LAYER_MIN_ELEVATION,
    StateAtT,
    cross_layer_candidates,
    same_sign_mask,
)
from src.network.constellation import Constellation, intra_layer_neighbors, layer_of, local_index, plane_slot
from src.orbit.epoch import Epoch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SGS = 0  # node id of the source ground station in hop lists
SCHEME_NAMES = ("CLD-I", "CLD-II", "CLD-III", "NONCLD-MEO", "NONCLD-GEO")
DEFAULT_SCHEME_LAYERS: dict[str, tuple[int, ...] | None] = {
    "CLD-I": None,  # every layer of the scenario
    "CLD-II": (1, 3),
    "CLD-III": (1, 4),
    "NONCLD-MEO": (1, 3),
    "NONCLD-GEO": (1, 4),
}

LinkClass = Literal["ground-space", "isl"]
Segment = Literal["uplink", "cross", "intra"]


@dataclass(frozen=True)
class Scheme:
    """
    A routing scheme and the layers it may use. Baselines access the network only
    through their relay layers; the target layer is destination-only for them.
    """

    name: str
    layers_used: frozenset[int]
    target_layer: int = 1

    @property
    def is_cld(self) -> bool:
        return self.name.startswith("CLD")

    @property
    def access_layers(self) -> frozenset[int]:
        if self.is_cld:
            return self.layers_used
        return self.layers_used - {self.target_layer}

    @property
    def relay_layer(self) -> int:
        """Highest access layer; the MEO/GEO relay for the baselines."""
        return max(self.access_layers)


def make_scheme(name: str, n_layers: int, layers: Iterable[int] | None = None) -> Scheme:
    if name not in DEFAULT_SCHEME_LAYERS:
        raise ValueError(f"Unknown scheme '{name}', expected one of {', '.join(SCHEME_NAMES)}")
    if layers is None:
        layers = DEFAULT_SCHEME_LAYERS[name] or range(1, n_layers + 1)
    layers = frozenset(int(u) for u in layers)
    bad = [u for u in layers if not 1 <= u <= n_layers]
    if bad:
        raise ValueError(f"Scheme {name} uses layer(s) {sorted(bad)} outside [1, {n_layers}]")
    if 1 not in layers:
        raise ValueError(f"Scheme {name} must include the target layer 1")
    scheme = Scheme(name=name, layers_used=layers)
    if not scheme.is_cld and not scheme.access_layers:
        raise ValueError(f"Baseline scheme {name} needs a relay layer above layer 1")
    return scheme


@dataclass(frozen=True)
class Hop:
    src: int
    dst: int
    link_class: LinkClass
    length: float  # m
    segment: Segment
    layer: int  # layer of dst


@dataclass(frozen=True)
class Route:
    """
    Path from the SGS to the DSN at one instant. ``r1`` is used alone when the SSN is
    on the target layer; otherwise ``r2`` runs SSN..TSN and ``r3`` TSN..DSN (empty when
    TSN is the DSN).
    """

    scheme: str
    t: Epoch
    ssn: int
    dsn: int
    tsn: int | None
    r1: tuple[int, ...]
    r2: tuple[int, ...]
    r3: tuple[int, ...]
    hops: tuple[Hop, ...]
    fallback: bool = False

    @property
    def nodes(self) -> tuple[int, ...]:
        if self.r1:
            return self.r1
        return self.r2 + self.r3[1:]

    @property
    def hop_count(self) -> int:
        """n_h, counting the SGS->SSN uplink."""
        return len(self.hops)


class UnderLayerChoice(NamedTuple):
    sat: int
    fallback: bool


class CrossLayerDescent(NamedTuple):
    nodes: tuple[int, ...]
    fallback: bool


def _build_route(
    scheme: str,
    state: StateAtT,
    c: Constellation,
    r1=(),
    r2=(),
    r3=(),
    tsn: int | None = None,
    fallback: bool = False,
) -> Route:
    r1, r2, r3 = tuple(r1), tuple(r2), tuple(r3)
    nodes = r1 if r1 else r2 + r3[1:]
    cross_nodes = set(r2[1:])

    hops = [
        Hop(
            src=SGS,
            dst=nodes[0],
            link_class="ground-space",
            length=float(state.sc_ranges[nodes[0] - 1]),
            segment="uplink",
            layer=layer_of(nodes[0], c)[0],
        )
    ]
    for a, b in zip(nodes, nodes[1:]):
        hops.append(
            Hop(
                src=a,
                dst=b,
                link_class="isl",
                length=float(np.linalg.norm(state.position(b) - state.position(a))),
                segment="cross" if b in cross_nodes else "intra",
                layer=layer_of(b, c)[0],
            )
        )
    return Route(
        scheme=scheme,
        t=state.t,
        ssn=nodes[0],
        dsn=nodes[-1],
        tsn=tsn,
        r1=r1,
        r2=r2,
        r3=r3,
        hops=tuple(hops),
        fallback=fallback,
    )


def get_closest_sat_to_sc(candidates: Iterable[int], sc, u: int, state: StateAtT, c: Constellation) -> int:
    """Candidate on layer ``u`` nearest to the SC; ties go to the lowest global ID."""
    layer_ids = c.layer_ids(u)
    ids = sorted(g for g in candidates if g in layer_ids)
    if not ids:
        raise ValueError(f"No candidate satellite on layer {u}")
    ranges = np.linalg.norm(state.positions[np.asarray(ids) - 1] - np.asarray(sc, dtype=float), axis=1)
    return ids[int(np.argmin(ranges))]


def get_best_under_layer_sat(
    ssn: int,
    dsn: int,
    state: StateAtT,
    c: Constellation,
    lower_layer: int | None = None,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
) -> UnderLayerChoice:
    """
    Next descent node below ``ssn``. The DSN is taken directly when it is visible;
    otherwise the nearest candidate whose directional angle shares the DSN's sign.
    Without such a candidate the nearest visible one is used and flagged.
    """
    u, _ = layer_of(ssn, c)
    lower = u - 1 if lower_layer is None else lower_layer
    candidates = cross_layer_candidates(ssn, state, c, min_elevation, lower)
    if not candidates:
        raise DescentBlockedError(ssn, lower)

    dsn_layer, _ = layer_of(dsn, c)
    if lower == dsn_layer and dsn in candidates:
        return UnderLayerChoice(dsn, False)

    ids = np.asarray(candidates)
    ssn_position = state.position(ssn)
    positions = state.positions[ids - 1]
    ranges = np.linalg.norm(positions - ssn_position, axis=1)
    same_side = same_sign_mask(state.sc_position, ssn_position, positions, state.position(dsn))

    if np.any(same_side):
        pick = np.flatnonzero(same_side)[int(np.argmin(ranges[same_side]))]
        return UnderLayerChoice(int(ids[pick]), False)

    logger.warning(
        f"No same-sign candidate below satellite {ssn} towards DSN {dsn} at {state.t.isoformat()}; "
        f"using the nearest of {len(candidates)} visible layer-{lower} satellite(s)."
    )
    return UnderLayerChoice(int(ids[int(np.argmin(ranges))]), True)


def _ring_steps(start: int, stop: int, size: int) -> list[int]:
    """Positions visited going the shorter way round a ring (ties: increasing)."""
    forward = (stop - start) % size
    backward = size - forward if forward else 0
    step, count = (1, forward) if forward <= backward else (-1, backward)
    return [(start + step * k) % size for k in range(1, count + 1)]


def ring_distance(a: int, b: int, size: int) -> int:
    forward = (b - a) % size
    return min(forward, size - forward)


def get_intra_layer_route(src: int, dst: int, u: int, c: Constellation) -> list[int]:
    """
    Dimension-ordered route on a Walker grid: along the source plane to the
    destination slot first, then across planes to the destination plane.
    """
    spec = c.layer_spec(u)
    if spec.kind != "walker":
        raise ConstellationError(f"Layer {u} ('{spec.name}') is not a Walker grid layer")
    (u_src, i_src), (u_dst, i_dst) = layer_of(src, c), layer_of(dst, c)
    if u_src != u or u_dst != u:
        raise ConstellationError(f"Satellites {src} and {dst} are not both on layer {u}")

    p_src, q_src = plane_slot(i_src, spec)
    p_dst, q_dst = plane_slot(i_dst, spec)
    route = [src]
    for q in _ring_steps(q_src, q_dst, spec.sats_per_plane):
        route.append(c.global_id(u, local_index(p_src, q, spec)))
    for p in _ring_steps(p_src, p_dst, spec.planes):
        route.append(c.global_id(u, local_index(p, q_dst, spec)))
    return route


def get_cross_layer_route(
    ssn: int,
    dsn: int,
    state: StateAtT,
    c: Constellation,
    layers_used: Iterable[int] | None = None,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
) -> CrossLayerDescent:
    """
    Descends from ``ssn`` one boundary at a time through the scheme's layers down to
    the DSN's layer; layers outside the scheme are spanned by a single hop.
    """
    u_s, _ = layer_of(ssn, c)
    u_d, _ = layer_of(dsn, c)
    if u_s <= u_d:
        raise ConstellationError(f"SSN {ssn} (layer {u_s}) is not above DSN {dsn} (layer {u_d})")
    allowed = set(range(1, c.n_layers + 1) if layers_used is None else layers_used) | {u_d}
    steps = sorted((u for u in allowed if u_d <= u < u_s), reverse=True)

    nodes = [ssn]
    fallback = False
    for lower in steps:
        choice = get_best_under_layer_sat(nodes[-1], dsn, state, c, lower, min_elevation)
        nodes.append(choice.sat)
        fallback = fallback or choice.fallback
    return CrossLayerDescent(tuple(nodes), fallback)


def cld_prepare(
    c: Constellation,
    state: StateAtT,
    scheme: Scheme,
    dsn_global: int,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
) -> Route:
    """
    CLD route preparation for one DSN at the snapshot's instant.

    Scans the scheme's layers upward from the DSN's layer for SC-accessible satellites.
    If the DSN's own layer is reachable the route stays on it; otherwise the nearest
    accessible satellite of the lowest reachable layer descends to the target layer.

    When that descent is blocked, the other accessible satellites are tried as SSN:
    the rest of the same layer by SC range, then the higher layers. Each SSN first
    descends through every scheme layer; if that is blocked, intermediate layers are
    dropped (largest layer sets first) and spanned by a single cross-layer hop.
    """
    if not scheme.is_cld:
        raise ValueError(f"cld_prepare handles CLD schemes only, got {scheme.name}")
    u_d, _ = layer_of(dsn_global, c)

    accessible_by_layer: dict[int, list[int]] = {}
    for u in sorted(v for v in scheme.layers_used if v >= u_d):
        accessible = _accessible_on(u, state, c)
        if accessible:
            accessible_by_layer[u] = accessible
    if not accessible_by_layer:
        raise UnreachableError(f"No satellite of {scheme.name} layers is accessible at {state.t.isoformat()}")

    u_min = min(accessible_by_layer)
    if u_min == u_d:
        ssn = get_closest_sat_to_sc(accessible_by_layer[u_min], state.sc_position, u_min, state, c)
        r1 = get_intra_layer_route(ssn, dsn_global, u_d, c)
        return _build_route(scheme.name, state, c, r1=r1)

    first_block = None
    for ssn in _ssn_order(accessible_by_layer, state):
        for layers in _descent_layer_sets(ssn, u_d, scheme.layers_used, c):
            try:
                descent = get_cross_layer_route(ssn, dsn_global, state, c, layers, min_elevation)
            except DescentBlockedError as exc:
                first_block = first_block or exc
                continue
            if first_block is not None:
                logger.debug(
                    f"{scheme.name} -> {dsn_global} at {state.t.isoformat()}: {first_block}; "
                    f"descending from {ssn} through layers {sorted(layers, reverse=True)} instead."
                )
            tsn = descent.nodes[-1]
            r3 = get_intra_layer_route(tsn, dsn_global, u_d, c) if tsn != dsn_global else []
            return _build_route(scheme.name, state, c, r2=descent.nodes, r3=r3, tsn=tsn, fallback=descent.fallback)
    raise first_block


def _ssn_order(accessible_by_layer: dict[int, list[int]], state: StateAtT) -> list[int]:
    """Accessible satellites, lowest layer first, each layer nearest to the SC first (ties: lowest ID)."""
    order = []
    for u in sorted(accessible_by_layer):
        order.extend(sorted(accessible_by_layer[u], key=lambda g: (float(state.sc_ranges[g - 1]), g)))
    return order


def _descent_layer_sets(ssn: int, u_d: int, layers_used: Iterable[int], c: Constellation) -> list[frozenset[int]]:
    """Layer sets a descent from ``ssn`` may pass through, from all scheme layers down to none."""
    u_s, _ = layer_of(ssn, c)
    intermediate = sorted(u for u in layers_used if u_d < u < u_s)
    sets = []
    for size in range(len(intermediate), -1, -1):
        sets.extend(frozenset(kept) | {u_d, u_s} for kept in combinations(intermediate, size))
    return sets


def _accessible_on(u: int, state: StateAtT, c: Constellation) -> list[int]:
    ids = c.layer_ids(u)
    visible = state.sc_elevations[ids.start - 1 : ids.stop - 1] >= state.sc_min_elevation
    return [ids.start + int(k) for k in np.flatnonzero(visible)]


def route_non_cld_meo(
    c: Constellation,
    state: StateAtT,
    dsn_global: int,
    meo_layer: int = 3,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
    scheme_name: str = "NONCLD-MEO",
) -> Route:
    """Baseline: always enter through the MEO layer, drop to the nearest visible target-layer satellite."""
    u_d, _ = layer_of(dsn_global, c)
    accessible = _accessible_on(meo_layer, state, c)
    if not accessible:
        raise UnreachableError(f"No layer-{meo_layer} satellite accessible at {state.t.isoformat()}")
    ssn = get_closest_sat_to_sc(accessible, state.sc_position, meo_layer, state, c)

    candidates = cross_layer_candidates(ssn, state, c, min_elevation, u_d)
    if not candidates:
        raise DescentBlockedError(ssn, u_d)
    ids = np.asarray(candidates)
    ranges = np.linalg.norm(state.positions[ids - 1] - state.position(ssn), axis=1)
    tsn = int(ids[int(np.argmin(ranges))])

    r3 = get_intra_layer_route(tsn, dsn_global, u_d, c) if tsn != dsn_global else []
    return _build_route(scheme_name, state, c, r2=(ssn, tsn), r3=r3, tsn=tsn)


def route_non_cld_geo(
    c: Constellation,
    state: StateAtT,
    dsn_global: int,
    geo_layer: int = 4,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
    scheme_name: str = "NONCLD-GEO",
) -> Route:
    """Baseline: SGS -> GEO -> DSN over a single cross-layer hop."""
    u_d, _ = layer_of(dsn_global, c)
    accessible = _accessible_on(geo_layer, state, c)
    if not accessible:
        raise UnreachableError(f"No layer-{geo_layer} satellite accessible at {state.t.isoformat()}")

    # Nearest first, ties by ID
    ranked = sorted(accessible, key=lambda g: (float(state.sc_ranges[g - 1]), g))
    for geo in ranked:
        if dsn_global in cross_layer_candidates(geo, state, c, min_elevation, u_d):
            return _build_route(scheme_name, state, c, r2=(geo, dsn_global), tsn=dsn_global)
    raise UnreachableError(f"DSN {dsn_global} is not visible from any accessible GEO satellite at {state.t.isoformat()}")


def compute_route(
    scheme: Scheme,
    c: Constellation,
    state: StateAtT,
    dsn_global: int,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
) -> Route:
    if scheme.is_cld:
        return cld_prepare(c, state, scheme, dsn_global, min_elevation)
    if scheme.name == "NONCLD-MEO":
        return route_non_cld_meo(c, state, dsn_global, scheme.relay_layer, min_elevation, scheme.name)
    if scheme.name == "NONCLD-GEO":
        return route_non_cld_geo(c, state, dsn_global, scheme.relay_layer, min_elevation, scheme.name)
    raise ValueError(f"Unknown scheme '{scheme.name}'")


def validate_route(
    route: Route,
    state: StateAtT,
    c: Constellation,
    min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION,
) -> list[str]:
    """Re-checks a route hop by hop; returns human-readable violations (empty when valid)."""
    problems = []
    nodes = route.nodes
    if len(set(nodes)) != len(nodes):
        problems.append(f"repeated node in {nodes}")
    if nodes[0] != route.ssn or nodes[-1] != route.dsn:
        problems.append(f"route {nodes} does not run from SSN {route.ssn} to DSN {route.dsn}")
    if len(route.hops) != len(nodes):
        problems.append(f"{len(route.hops)} hops for {len(nodes)} nodes")
    if state.sc_elevations[route.ssn - 1] < state.sc_min_elevation:
        problems.append(f"SSN {route.ssn} not accessible by the SC")

    for a, b in zip(nodes, nodes[1:]):
        (ua, ia), (ub, ib) = layer_of(a, c), layer_of(b, c)
        if ua == ub:
            if ib not in intra_layer_neighbors(ua, ia, c):
                problems.append(f"{a} -> {b} is not an intra-layer neighbour link")
        elif ub > ua or b not in cross_layer_candidates(a, state, c, min_elevation, ub):
            problems.append(f"{a} -> {b} is not a feasible cross-layer link")
    return problems
