"""
Result artifacts: per-target and per-sample CSV tables and a JSON summary with
overall means and pairwise latency ratios.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from typing import Iterable

import pandas as pd

from src.metrics import MissionResult, overall_means, per_target_frame, records_frame
from src.orbit.epoch import Epoch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

FLOAT_FORMAT = "%.9g"
PER_TARGET_FILE = "per_target_latency.csv"
PER_SAMPLE_FILE = "per_sample.csv"
SUMMARY_FILE = "summary.json"
ACCESS_REPORT_FILE = "access_report.csv"

PER_TARGET_COLUMNS = ["scheme", "configuration", "dsn_id", "mean_latency_s", "mean_path_m", "mean_hops", "resilience"]
PER_SAMPLE_COLUMNS = ["scheme", "configuration", "dsn_id", "t_iso8601", "reachable", "hops", "path_m", "latency_s"]


def _number(value):
    """9 significant digits; NaN becomes null."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(f"{value:.9g}")


def ratio_key(numerator: str, denominator: str) -> str:
    def slug(name):
        return name.lower().replace("-", "_")

    return f"ratio_{slug(numerator)}_over_{slug(denominator)}"


def _write_csv(df: pd.DataFrame, path: str) -> None:
    with open(path, "w", newline="") as csv_file:
        df.to_csv(csv_file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(df)} row(s) to '{path}'.")


def build_summary(results: list[MissionResult], effective: dict | None = None) -> dict:
    overall = overall_means(results)
    summary: dict = {"overall": {}, "ratios": {}}
    for row in overall.itertuples(index=False):
        summary["overall"].setdefault(row.scheme, {})[row.configuration] = {
            "mean_latency_s": _number(row.mean_latency_s),
            "mean_path_m": _number(row.mean_path_m),
            "mean_hops": _number(row.mean_hops),
            "mean_resilience": _number(row.mean_resilience),
            "min_target_mean_latency_s": _number(row.min_target_mean_latency_s),
            "targets": int(row.targets),
        }

    for configuration, group in overall.groupby("configuration", sort=True):
        latencies = dict(zip(group["scheme"], group["mean_latency_s"]))
        ratios = {}
        for a, b in itertools.permutations(sorted(latencies), 2):
            value = latencies[a] / latencies[b] if latencies[b] and not math.isnan(latencies[b]) else float("nan")
            ratios[ratio_key(a, b)] = _number(value)
        summary["ratios"][configuration] = ratios

    if effective is not None:
        summary["scenario"] = effective
    return summary


def emit_results(results: Iterable[MissionResult], out_dir: str, effective: dict | None = None) -> list[str]:
    """
    Writes per_target_latency.csv, per_sample.csv and summary.json into ``out_dir``.

    :return: list of written file paths
    """
    results = list(results)
    if not results:
        raise ValueError("No mission results to emit")
    os.makedirs(out_dir, exist_ok=True)

    per_target = per_target_frame(results)[PER_TARGET_COLUMNS]

    samples = records_frame(record for result in results for record in result.records)
    samples["t_iso8601"] = [Epoch(s).isoformat() for s in samples["t"]]
    samples = samples[PER_SAMPLE_COLUMNS]

    paths = [os.path.join(out_dir, name) for name in (PER_TARGET_FILE, PER_SAMPLE_FILE, SUMMARY_FILE)]
    _write_csv(per_target, paths[0])
    _write_csv(samples, paths[1])
    with open(paths[2], "w", newline="") as json_file:
        json.dump(build_summary(results, effective), json_file, indent=2, sort_keys=True, default=str)
        json_file.write("\n")
    logger.info(f"Wrote summary to '{paths[2]}'.")
    return paths


def emit_access_report(report: pd.DataFrame, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, ACCESS_REPORT_FILE)
    _write_csv(report, path)
    return path
