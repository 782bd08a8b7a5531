"""
Path length, latency and resilience of telecommand routes, and their per-target /
per-scheme aggregation.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
import pandas as pd

from src.network.access import StateAtT, accessible_set
from src.network.constellation import Constellation
from src.network.routing import Route, Scheme
from src.orbit.constants import SPEED_OF_LIGHT
from src.orbit.epoch import Epoch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

PATH_IDENTITY_RTOL = 1e-6


@dataclass(frozen=True)
class LinkConfig:
    """
    Link-rate preset. ``frame_size`` is the TC frame size in bytes, the two delays are
    per-hop constants in seconds.
    """

    name: str
    ground_space_rate: float  # bit/s
    isl_rate: float  # bit/s
    frame_size: int = 1024
    processing_delay: float = 100e-6
    queuing_delay: float = 100e-6

    def __post_init__(self):
        if self.ground_space_rate <= 0 or self.isl_rate <= 0:
            raise ValueError(f"Link configuration {self.name}: rates must be positive")
        if self.frame_size <= 0:
            raise ValueError(f"Link configuration {self.name}: frame size must be positive")

    @property
    def frame_bits(self) -> int:
        return self.frame_size * 8

    def rate_for(self, link_class: str) -> float:
        return self.ground_space_rate if link_class == "ground-space" else self.isl_rate


PRESET_CONFIGURATIONS: dict[str, LinkConfig] = {
    "I": LinkConfig("I", ground_space_rate=324e6, isl_rate=324e6),
    "II": LinkConfig("II", ground_space_rate=1.8e9, isl_rate=10e9),
    "III": LinkConfig("III", ground_space_rate=619.2e6, isl_rate=10e9),
}


class PathLength(NamedTuple):
    total: float
    segments: dict[tuple[str, int], float]


def path_length(route: Route) -> PathLength:
    """Sum of hop lengths, with the per-(segment, layer) breakdown that must add up to it."""
    total = math.fsum(hop.length for hop in route.hops)
    segments: dict[tuple[str, int], list[float]] = defaultdict(list)
    for hop in route.hops:
        segments[(hop.segment, hop.layer)].append(hop.length)
    breakdown = {key: math.fsum(lengths) for key, lengths in sorted(segments.items())}
    segment_total = math.fsum(breakdown.values())
    if not math.isclose(total, segment_total, rel_tol=PATH_IDENTITY_RTOL, abs_tol=1e-9):
        raise RuntimeError(f"Hop sum {total} m disagrees with segment sum {segment_total} m")
    return PathLength(total, breakdown)


def latency(route: Route, link: LinkConfig) -> float:
    """T_D: propagation, transmission, queuing and processing delay summed over every hop."""
    per_hop_fixed = link.queuing_delay + link.processing_delay
    return math.fsum(
        hop.length / SPEED_OF_LIGHT + link.frame_bits / link.rate_for(hop.link_class) + per_hop_fixed
        for hop in route.hops
    )


def q_indicator(scheme: Scheme, state: StateAtT, c: Constellation, min_elev: float | None = None) -> int:
    """1 when the SC sees at least one satellite of the scheme's access layers."""
    threshold = state.sc_min_elevation if min_elev is None else min_elev
    return int(len(accessible_set(state, scheme.access_layers, threshold, c)) > 0)


def resilience(per_sample_q: Iterable[int], mean_hop_count: float | None) -> float:
    """R = sum(Q) / (n_h * T); zero when no sample was reachable."""
    q = list(per_sample_q)
    if not q:
        raise ValueError("Resilience needs at least one sample")
    if mean_hop_count is None or not np.isfinite(mean_hop_count) or sum(q) == 0:
        return 0.0
    if mean_hop_count < 1:
        raise ValueError(f"Mean hop count {mean_hop_count} below 1")
    return sum(q) / (mean_hop_count * len(q))


@dataclass(frozen=True)
class SampleRecord:
    scheme: str
    configuration: str
    dsn_id: int
    t: Epoch
    reachable: int
    hops: int | None = None
    path_m: float | None = None
    latency_s: float | None = None


@dataclass(frozen=True)
class MissionResult:
    scheme: str
    configuration: str
    dsn_id: int
    records: tuple[SampleRecord, ...] = field(repr=False)
    mean_latency_s: float = float("nan")
    mean_path_m: float = float("nan")
    mean_hops: float = float("nan")
    resilience: float = 0.0

    @property
    def reachable_samples(self) -> int:
        return sum(r.reachable for r in self.records)


RECORD_COLUMNS = ["scheme", "configuration", "dsn_id", "t", "reachable", "hops", "path_m", "latency_s"]


def records_frame(records: Iterable[SampleRecord]) -> pd.DataFrame:
    """Sample records as a DataFrame sorted by (scheme, configuration, dsn_id, t)."""
    df = pd.DataFrame(
        [
            (r.scheme, r.configuration, r.dsn_id, r.t.utc_seconds, r.reachable, r.hops, r.path_m, r.latency_s)
            for r in records
        ],
        columns=RECORD_COLUMNS,
    )
    df = df.astype({"hops": "float64", "path_m": "float64", "latency_s": "float64"})
    return df.sort_values(["scheme", "configuration", "dsn_id", "t"], kind="mergesort").reset_index(drop=True)


def aggregate(records: Iterable[SampleRecord]) -> list[MissionResult]:
    """Per-(scheme, configuration, target) means over reachable samples plus resilience."""
    records = sorted(records, key=lambda r: (r.scheme, r.configuration, r.dsn_id, r.t))
    grouped: dict[tuple[str, str, int], list[SampleRecord]] = defaultdict(list)
    for record in records:
        grouped[(record.scheme, record.configuration, record.dsn_id)].append(record)

    results = []
    for (scheme, configuration, dsn_id), group in sorted(grouped.items()):
        reachable = [r for r in group if r.reachable]
        if reachable:
            mean_latency = math.fsum(r.latency_s for r in reachable) / len(reachable)
            mean_path = math.fsum(r.path_m for r in reachable) / len(reachable)
            mean_hops = math.fsum(r.hops for r in reachable) / len(reachable)
        else:
            mean_latency = mean_path = mean_hops = float("nan")
        results.append(
            MissionResult(
                scheme=scheme,
                configuration=configuration,
                dsn_id=dsn_id,
                records=tuple(group),
                mean_latency_s=mean_latency,
                mean_path_m=mean_path,
                mean_hops=mean_hops,
                resilience=resilience([r.reachable for r in group], mean_hops if reachable else None),
            )
        )
    return results


def per_target_frame(results: Iterable[MissionResult]) -> pd.DataFrame:
    df = pd.DataFrame(
        [
            (r.scheme, r.configuration, r.dsn_id, r.mean_latency_s, r.mean_path_m, r.mean_hops, r.resilience)
            for r in results
        ],
        columns=["scheme", "configuration", "dsn_id", "mean_latency_s", "mean_path_m", "mean_hops", "resilience"],
    )
    return df.sort_values(["scheme", "configuration", "dsn_id"], kind="mergesort").reset_index(drop=True)


def overall_means(results: Iterable[MissionResult]) -> pd.DataFrame:
    """
    Mean over targets of the per-target means, per (scheme, configuration).
    Targets that were never reachable do not enter the latency/path/hop means.
    """
    per_target = per_target_frame(results)
    grouped = per_target.groupby(["scheme", "configuration"], sort=True)
    overall = grouped.agg(
        mean_latency_s=("mean_latency_s", "mean"),
        mean_path_m=("mean_path_m", "mean"),
        mean_hops=("mean_hops", "mean"),
        mean_resilience=("resilience", "mean"),
        min_target_mean_latency_s=("mean_latency_s", "min"),
        targets=("dsn_id", "count"),
    ).reset_index()
    for row in overall.itertuples():
        if np.isnan(row.mean_latency_s):
            logger.warning(f"Scheme {row.scheme} never reached any target in configuration {row.configuration}.")
    return overall
