"""
Mission assembly: sample instants, target selection and the per-sample loop that
binds propagation, routing and metrics together.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import pandas as pd

from src.errors import MissionError, SimulationError, UnreachableError
from src.metrics import LinkConfig, MissionResult, SampleRecord, aggregate, latency, path_length, q_indicator
from src.network.access import DEFAULT_CROSS_LAYER_MIN_ELEVATION, DEFAULT_SC_MIN_ELEVATION, StateAtT
from src.network.constellation import Constellation, layer_of
from src.network.routing import Scheme, compute_route
from src.orbit.epoch import Epoch
from src.orbit.frames import geodetic_to_ecef
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_SAMPLE_COUNT = 500
DEFAULT_TARGET_STRIDE = 4


@dataclass(frozen=True)
class GroundSite:
    """The SatNetOps Center (SC), i.e. the source ground station."""

    lat: float  # deg
    lng: float  # deg
    alt: float = 0.0  # m
    min_elevation: float = DEFAULT_SC_MIN_ELEVATION  # deg

    @property
    def position(self):
        return geodetic_to_ecef(self.lat, self.lng, self.alt)


@dataclass(frozen=True)
class MissionSpec:
    t_start: Epoch
    t_stop: Epoch
    sample_count: int
    sc: GroundSite
    schemes: tuple[Scheme, ...]
    configurations: tuple[LinkConfig, ...]
    targets: tuple[int, ...]
    cross_layer_min_elevation: float = DEFAULT_CROSS_LAYER_MIN_ELEVATION
    sample_interval: float | None = None  # s; set for fixed-step sampling

    def __post_init__(self):
        if not self.t_stop > self.t_start:
            raise ValueError(f"Mission stop {self.t_stop.isoformat()} is not after start {self.t_start.isoformat()}")
        if self.sample_interval is None and self.sample_count < 1:
            raise ValueError(f"Sample count must be at least 1, got {self.sample_count}")
        if self.sample_interval is not None and self.sample_interval <= 0:
            raise ValueError(f"Sample interval must be positive, got {self.sample_interval}")

    def check_targets(self, c: Constellation) -> None:
        for g in self.targets:
            if layer_of(g, c)[0] != 1:
                raise ValueError(f"Target {g} is not on layer 1")


def sample_times(spec: MissionSpec) -> list[Epoch]:
    """Instants over [t_start, t_stop): T evenly spaced, or every ``sample_interval`` seconds."""
    span = spec.t_stop - spec.t_start
    if spec.sample_interval is not None:
        count = max(1, int(span // spec.sample_interval))
        step = spec.sample_interval
    else:
        count = spec.sample_count
        step = span / count
    return [spec.t_start + k * step for k in range(count)]


def default_targets(layer_size: int = 78, stride: int = DEFAULT_TARGET_STRIDE) -> list[int]:
    """Every ``stride``-th satellite of the target layer, starting at 1."""
    if stride < 1:
        raise ValueError(f"Target stride must be at least 1, got {stride}")
    return list(range(1, layer_size + 1, stride))


def _evaluate_sample(c: Constellation, spec: MissionSpec, sc_position, t: Epoch) -> list[SampleRecord]:
    state = StateAtT.capture(c, t, sc_position, spec.sc.min_elevation)
    records = []
    for scheme in spec.schemes:
        q = q_indicator(scheme, state, c)
        for dsn in spec.targets:
            route = None
            if q:
                try:
                    route = compute_route(scheme, c, state, dsn, spec.cross_layer_min_elevation)
                except UnreachableError as exc:
                    logger.debug(f"{scheme.name} -> {dsn} at {t.isoformat()}: {exc}")
                except SimulationError as exc:
                    raise MissionError(f"{scheme.name}, target {dsn}, t={t.isoformat()}: {exc}") from exc

            if route is None:
                records.extend(SampleRecord(scheme.name, link.name, dsn, t, 0) for link in spec.configurations)
                continue
            length = path_length(route).total
            records.extend(
                SampleRecord(scheme.name, link.name, dsn, t, 1, route.hop_count, length, latency(route, link))
                for link in spec.configurations
            )
    return records


def run_mission(
    c: Constellation, spec: MissionSpec, workers: int = 1, shuffle_seed: int | None = None
) -> list[MissionResult]:
    """
    Evaluates every (scheme, configuration, target, sample). One snapshot is taken per
    sample and shared by all schemes and targets; output order never depends on the
    order in which samples are evaluated.

    :param workers: int -- Threads evaluating samples concurrently
    :param shuffle_seed: int -- When set, samples are submitted in a shuffled order
    """
    spec.check_targets(c)
    times = sample_times(spec)
    order = list(range(len(times)))
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(order)

    sc_position = spec.sc.position
    logger.info(
        f"Running mission: {len(spec.schemes)} scheme(s) x {len(spec.configurations)} configuration(s) x "
        f"{len(spec.targets)} target(s) x {len(times)} sample(s) ..."
    )

    c.element_arrays, c.layer_index_array  # build the shared caches before threads read them
    by_sample: dict[int, list[SampleRecord]] = {}
    report_every = max(1, len(times) // 10)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {k: pool.submit(_evaluate_sample, c, spec, sc_position, times[k]) for k in order}
            for done, k in enumerate(order, start=1):
                by_sample[k] = futures[k].result()
                if done % report_every == 0:
                    logger.info(f"{done}/{len(times)} samples evaluated.")
    else:
        for done, k in enumerate(order, start=1):
            by_sample[k] = _evaluate_sample(c, spec, sc_position, times[k])
            if done % report_every == 0:
                logger.info(f"{done}/{len(times)} samples evaluated.")

    records = [record for k in range(len(times)) for record in by_sample[k]]
    results = aggregate(records)
    unreachable = sum(1 for r in records if not r.reachable)
    logger.info(f"Mission done: {len(records)} sample record(s), {unreachable} unreachable.")
    return results


def access_report(c: Constellation, spec: MissionSpec) -> pd.DataFrame:
    """|G(t)| per layer per sample, for inspecting the SC access behaviour."""
    sc_position = spec.sc.position
    rows = []
    for t in sample_times(spec):
        state = StateAtT.capture(c, t, sc_position, spec.sc.min_elevation)
        visible = state.sc_elevations >= spec.sc.min_elevation
        for u in range(1, c.n_layers + 1):
            ids = c.layer_ids(u)
            rows.append((t.isoformat(), u, int(visible[ids.start - 1 : ids.stop - 1].sum())))
    df = pd.DataFrame(rows, columns=["t_iso8601", "layer", "accessible_count"])

    never = [u for u, count in df.groupby("layer")["accessible_count"].max().items() if count == 0]
    if never:
        logger.warning(f"Layer(s) {never} are never accessible by the SC during the mission.")
    return df
