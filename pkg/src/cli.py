"""
Command-line front-end: scenario loading, mission execution and artifact emission.
Exit codes: 0 success, 1 usage error, 2 scenario error, 3 runtime failure.
"""

from __future__ import annotations

import os
import sys
from datetime import datetime
from typing import NamedTuple

from src.errors import ConstellationError, ScenarioError, TleFormatError
from src.metrics import PRESET_CONFIGURATIONS, LinkConfig
from src.network.constellation import Constellation, LayerSpec, build_constellation
from src.network.routing import SCHEME_NAMES, make_scheme
from src.orbit.epoch import Epoch
from src.report import emit_access_report, emit_results
from src.scenario import (
    DEFAULT_SAMPLE_COUNT,
    DEFAULT_TARGET_STRIDE,
    GroundSite,
    MissionSpec,
    access_report,
    default_targets,
    run_mission,
)
from src.utils.config_manager import ConfigManager, check_keys
from src.utils.logger import set_global_level, setup_logger
from src.utils.utils import UsageError, parse_args

logger = setup_logger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_SCENARIO, EXIT_RUNTIME = 0, 1, 2, 3

TOP_KEYS = {"layers", "sc", "mission", "links", "scheme_layers", "output"}
LAYER_KEYS = {
    "index",
    "name",
    "kind",
    "planes",
    "sats_per_plane",
    "altitude_km",
    "inclination_deg",
    "raan_spread_deg",
    "phasing_offset_deg",
    "min_elevation_deg",
    "tle_path",
    "longitudes_deg",
}
SC_KEYS = {"lat", "lng", "alt_m", "min_elevation_deg"}
MISSION_KEYS = {
    "t_start",
    "t_stop",
    "samples",
    "sample_mode",
    "sample_interval_s",
    "targets",
    "target_stride",
    "schemes",
    "configurations",
    "cross_layer_min_elevation_deg",
    "workers",
}
LINK_KEYS = {"frame_size_bytes", "processing_delay_s", "queuing_delay_s", "configurations"}
LINK_CONFIG_KEYS = {"ground_space_rate_bps", "isl_rate_bps"}
OUTPUT_KEYS = {"directory"}

_MISSING = object()


class Scenario(NamedTuple):
    constellation: Constellation
    mission: MissionSpec
    link_configs: list[LinkConfig]
    output_dir: str
    effective: dict
    workers: int = 1


def _value(block: dict, key: str, path: str, cast=float, default=_MISSING):
    if key not in block or block[key] is None:
        if default is _MISSING:
            raise ScenarioError(f"Missing mandatory key '{key}'", field=f"{path}.{key}" if path else key)
        return default
    try:
        return cast(block[key])
    except (TypeError, ValueError):
        raise ScenarioError(f"Invalid value {block[key]!r}", field=f"{path}.{key}")


def _epoch(block: dict, key: str, path: str) -> Epoch:
    value = _value(block, key, path, cast=lambda v: v)
    try:
        if isinstance(value, datetime):
            return Epoch.from_datetime(value)
        return Epoch.parse(str(value))
    except ValueError:
        raise ScenarioError(f"Expected 'YYYY-MM-DD HH:MM:SS', got {value!r}", field=f"{path}.{key}")


def _layer_specs(raw_layers, base_dir: str) -> list[LayerSpec]:
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ScenarioError("Expected a non-empty list of layers", field="layers")
    specs = []
    for position, raw in enumerate(raw_layers, start=1):
        path = f"layers[{position - 1}]"
        check_keys(raw, LAYER_KEYS, path)
        kind = _value(raw, "kind", path, str, "walker")
        if kind not in ("walker", "geo", "tle"):
            raise ScenarioError(f"Unknown layer kind '{kind}'", field=f"{path}.kind")
        tle_path = _value(raw, "tle_path", path, str, None)
        if kind == "tle":
            if tle_path is None:
                raise ScenarioError("TLE layer needs 'tle_path'", field=f"{path}.tle_path")
            if not os.path.isabs(tle_path):
                tle_path = os.path.join(base_dir, tle_path)
        longitudes = tuple(float(v) for v in raw.get("longitudes_deg") or ())
        specs.append(
            LayerSpec(
                index=_value(raw, "index", path, int, position),
                name=_value(raw, "name", path, str, f"layer-{position}"),
                kind=kind,
                planes=_value(raw, "planes", path, int, len(longitudes) or 1),
                sats_per_plane=_value(raw, "sats_per_plane", path, int, 1),
                altitude=_value(raw, "altitude_km", path, float, 0.0 if kind == "tle" else _MISSING) * 1e3,
                inclination=_value(raw, "inclination_deg", path, float, 0.0),
                raan_spread=_value(raw, "raan_spread_deg", path, float, 360.0),
                phasing_offset=_value(raw, "phasing_offset_deg", path, float, 0.0),
                min_elevation=_value(raw, "min_elevation_deg", path, float, None),
                tle_path=tle_path,
                longitudes_deg=longitudes,
            )
        )
    return specs


def _link_configs(raw_links: dict, names: list[str]) -> list[LinkConfig]:
    check_keys(raw_links, LINK_KEYS, "links")
    frame_size = _value(raw_links, "frame_size_bytes", "links", int, 1024)
    processing = _value(raw_links, "processing_delay_s", "links", float, 100e-6)
    queuing = _value(raw_links, "queuing_delay_s", "links", float, 100e-6)
    raw_configs = raw_links.get("configurations") or {}
    check_keys(raw_configs, set(PRESET_CONFIGURATIONS) | set(names), "links.configurations")

    configs = []
    for name in names:
        path = f"links.configurations.{name}"
        preset = PRESET_CONFIGURATIONS.get(name)
        raw = raw_configs.get(name, {})
        check_keys(raw, LINK_CONFIG_KEYS, path)
        if preset is None and not raw:
            raise ScenarioError(f"Unknown link configuration '{name}'", field="mission.configurations")
        try:
            configs.append(
                LinkConfig(
                    name=name,
                    ground_space_rate=_value(raw, "ground_space_rate_bps", path, float, getattr(preset, "ground_space_rate", _MISSING)),
                    isl_rate=_value(raw, "isl_rate_bps", path, float, getattr(preset, "isl_rate", _MISSING)),
                    frame_size=frame_size,
                    processing_delay=processing,
                    queuing_delay=queuing,
                )
            )
        except ValueError as exc:
            raise ScenarioError(str(exc), field=path)
    return configs


def build_scenario(config: dict, base_dir: str = ".") -> Scenario:
    """Validates a raw scenario dictionary and assembles constellation and mission."""
    check_keys(config, TOP_KEYS, "")
    for block in ("layers", "sc", "mission"):
        if block not in config:
            raise ScenarioError(f"Missing mandatory block '{block}'", field=block)

    sc_raw, mission_raw = config["sc"], config["mission"]
    check_keys(sc_raw, SC_KEYS, "sc")
    check_keys(mission_raw, MISSION_KEYS, "mission")
    try:
        sc = GroundSite(
            lat=_value(sc_raw, "lat", "sc"),
            lng=_value(sc_raw, "lng", "sc"),
            alt=_value(sc_raw, "alt_m", "sc", float, 0.0),
            min_elevation=_value(sc_raw, "min_elevation_deg", "sc", float, 25.0),
        )
        sc.position
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc), field="sc")

    t_start = _epoch(mission_raw, "t_start", "mission")
    t_stop = _epoch(mission_raw, "t_stop", "mission")
    try:
        constellation = build_constellation(_layer_specs(config["layers"], base_dir), t_start)
    except (ConstellationError, TleFormatError, FileNotFoundError) as exc:
        raise ScenarioError(str(exc), field="layers")

    scheme_layers = config.get("scheme_layers") or {}
    check_keys(scheme_layers, set(SCHEME_NAMES), "scheme_layers")
    scheme_names = _value(mission_raw, "schemes", "mission", list, list(SCHEME_NAMES))
    schemes = []
    for name in scheme_names:
        try:
            schemes.append(make_scheme(str(name), constellation.n_layers, scheme_layers.get(name)))
        except ValueError as exc:
            raise ScenarioError(str(exc), field="mission.schemes")

    config_names = [str(n) for n in _value(mission_raw, "configurations", "mission", list, ["I", "II", "III"])]
    link_configs = _link_configs(config.get("links") or {}, config_names)

    layer1_size = len(constellation.layer(1))
    stride = _value(mission_raw, "target_stride", "mission", int, DEFAULT_TARGET_STRIDE)
    targets = _value(mission_raw, "targets", "mission", list, None)
    try:
        targets = [int(g) for g in targets] if targets is not None else default_targets(layer1_size, stride)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), field="mission.targets")
    for g in targets:
        if not 1 <= g <= layer1_size:
            raise ScenarioError(f"Target {g} not on layer 1", field="mission.targets")

    sample_mode = _value(mission_raw, "sample_mode", "mission", str, "count")
    if sample_mode not in ("count", "interval"):
        raise ScenarioError(f"Unknown sample mode '{sample_mode}'", field="mission.sample_mode")
    interval = _value(mission_raw, "sample_interval_s", "mission", float, 3600.0) if sample_mode == "interval" else None

    try:
        mission = MissionSpec(
            t_start=t_start,
            t_stop=t_stop,
            sample_count=_value(mission_raw, "samples", "mission", int, DEFAULT_SAMPLE_COUNT),
            sc=sc,
            schemes=tuple(schemes),
            configurations=tuple(link_configs),
            targets=tuple(targets),
            cross_layer_min_elevation=_value(mission_raw, "cross_layer_min_elevation_deg", "mission", float, 10.0),
            sample_interval=interval,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc), field="mission")

    output = config.get("output") or {}
    check_keys(output, OUTPUT_KEYS, "output")
    return Scenario(
        constellation=constellation,
        mission=mission,
        link_configs=link_configs,
        output_dir=_value(output, "directory", "output", str, "results"),
        effective=config,
        workers=_value(mission_raw, "workers", "mission", int, 1),
    )


def load_scenario(path: str, overrides: dict | None = None) -> Scenario:
    """
    Loads and validates a scenario file; dotted-path ``overrides`` take precedence
    over the file's values.
    """
    manager = ConfigManager(path)
    config = manager.with_overrides(overrides or {})
    scenario = build_scenario(config, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info(
        f"Scenario '{path}' ready: {scenario.constellation.size} satellites, "
        f"{len(scenario.mission.targets)} target(s), {len(scenario.mission.schemes)} scheme(s)."
    )
    return scenario


def _overrides(args: dict) -> dict:
    overrides = {
        "mission.schemes": args.get("schemes"),
        "mission.configurations": args.get("configs"),
        "mission.targets": args.get("targets"),
        "mission.workers": args.get("workers"),
        "output.directory": args.get("out"),
    }
    if args.get("samples") is not None:
        overrides["mission.samples"] = args["samples"]
        overrides["mission.sample_mode"] = "count"
    return overrides


def cli_main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc.usage}error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    set_global_level(args["log_level"])
    command = args["command"]
    try:
        scenario = load_scenario(args["scenario"], _overrides(args))
        if command == "validate":
            logger.info("Scenario is valid.")
            return EXIT_OK
        if command == "access-report":
            emit_access_report(access_report(scenario.constellation, scenario.mission), scenario.output_dir)
            return EXIT_OK

        results = run_mission(
            scenario.constellation, scenario.mission, workers=scenario.workers, shuffle_seed=args.get("shuffle_seed")
        )
        emit_results(results, scenario.output_dir, scenario.effective)
        return EXIT_OK
    except (ScenarioError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        sys.stderr.write(f"scenario error: {exc}\n")
        return EXIT_SCENARIO
    except Exception as exc:
        sys.stderr.write(f"runtime failure: {exc}\n")
        return EXIT_RUNTIME
