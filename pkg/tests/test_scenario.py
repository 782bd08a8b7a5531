import dataclasses

import numpy as np
import pytest

from src.metrics import PRESET_CONFIGURATIONS, overall_means, per_target_frame
from src.network.routing import SCHEME_NAMES, make_scheme
from src.orbit.epoch import Epoch
from src.scenario import GroundSite, MissionSpec, access_report, default_targets, run_mission, sample_times

from tests.conftest import T_START

CALGARY = GroundSite(51.0447, -114.0719, 0.0, 25.0)


def mission(samples=500, interval=None, targets=(1, 41), schemes=SCHEME_NAMES, configurations=("I", "II", "III")):
    return MissionSpec(
        t_start=T_START,
        t_stop=T_START + 86400.0,
        sample_count=samples,
        sc=CALGARY,
        schemes=tuple(make_scheme(name, 4) for name in schemes),
        configurations=tuple(PRESET_CONFIGURATIONS[name] for name in configurations),
        targets=targets,
        sample_interval=interval,
    )


class TestSampleTimes:
    def test_step(self):
        times = sample_times(mission(500))
        assert len(times) == 500
        assert times[0] == T_START
        assert times[1] - times[0] == pytest.approx(172.8)
        assert times[-1] < T_START + 86400.0

    def test_single_sample(self):
        assert sample_times(mission(1)) == [T_START]

    def test_hourly(self):
        by_count = sample_times(mission(24))
        by_interval = sample_times(mission(interval=3600.0))
        assert len(by_count) == len(by_interval) == 24
        assert [t.utc_seconds for t in by_count] == pytest.approx([t.utc_seconds for t in by_interval])
        assert by_count[1] - by_count[0] == pytest.approx(3600.0)


class TestTargets:
    def test_every_fourth(self):
        targets = default_targets()
        assert targets[0] == 1 and targets[-1] == 77
        assert len(targets) == 20

    def test_stride_one(self):
        assert default_targets(78, 1) == list(range(1, 79))

    def test_all_on_layer_one(self, default_scenario):
        mission(targets=tuple(default_targets())).check_targets(default_scenario.constellation)

    def test_rejects_other_layers(self, default_scenario):
        with pytest.raises(ValueError, match="layer 1"):
            mission(targets=(1, 100)).check_targets(default_scenario.constellation)


class TestMissionSpec:
    def test_stop_after_start(self):
        with pytest.raises(ValueError):
            dataclasses.replace(mission(), t_stop=T_START)

    def test_positive_samples(self):
        with pytest.raises(ValueError):
            mission(0)

    def test_sc_position(self):
        assert CALGARY.position[2] == pytest.approx(4954.32e3, abs=10.0)


def _fingerprint(results):
    return [(r.scheme, r.configuration, r.dsn_id, r.records) for r in results], per_target_frame(results).to_csv()


class TestRunMission:
    def test_cardinality_and_order(self, default_scenario):
        spec = mission(6)
        results = run_mission(default_scenario.constellation, spec)
        assert len(results) == 5 * 3 * 2
        assert sum(len(r.records) for r in results) == 5 * 3 * 2 * 6
        keys = [(r.scheme, r.configuration, r.dsn_id) for r in results]
        assert keys == sorted(keys)

    def test_shuffled_and_threaded_runs_match(self, default_scenario):
        c = default_scenario.constellation
        spec = mission(8)
        reference = _fingerprint(run_mission(c, spec))
        assert _fingerprint(run_mission(c, spec, shuffle_seed=99)) == reference
        assert _fingerprint(run_mission(c, spec, workers=4, shuffle_seed=3)) == reference

    def test_snapshot_shared_across_configurations(self, default_scenario):
        results = run_mission(default_scenario.constellation, mission(4, configurations=("I", "II")))
        by_key = {(r.scheme, r.configuration, r.dsn_id): r for r in results}
        for scheme in SCHEME_NAMES:
            a, b = by_key[(scheme, "I", 1)], by_key[(scheme, "II", 1)]
            assert [(x.reachable, x.hops, x.path_m) for x in a.records] == [(x.reachable, x.hops, x.path_m) for x in b.records]

    def test_meo_baseline_is_unreachable_from_calgary(self, default_scenario):
        results = run_mission(default_scenario.constellation, mission(5, schemes=("NONCLD-MEO",), configurations=("I",)))
        assert all(r.reachable_samples == 0 and r.resilience == 0.0 for r in results)

    def test_rejects_foreign_targets(self, default_scenario):
        with pytest.raises(ValueError):
            run_mission(default_scenario.constellation, mission(2, targets=(800,)))


@pytest.fixture(scope="module")
def full_mission(default_scenario):
    return run_mission(default_scenario.constellation, default_scenario.mission, workers=4)


@pytest.mark.slow
class TestFullDefaultMission:
    def test_cardinality(self, full_mission):
        assert len(full_mission) == 5 * 3 * 20
        assert sum(len(r.records) for r in full_mission) == 150000

    def test_cld_i_reaches_whenever_restricted_schemes_do(self, full_mission):
        by_key = {(r.scheme, r.configuration, r.dsn_id): r for r in full_mission}
        for (scheme, configuration, dsn_id), result in by_key.items():
            if scheme not in ("CLD-II", "CLD-III"):
                continue
            cld_i = by_key[("CLD-I", configuration, dsn_id)]
            for mine, other in zip(cld_i.records, result.records):
                assert mine.t == other.t
                assert mine.reachable >= other.reachable

    def test_cld_i_more_resilient_than_meo_baseline(self, full_mission):
        overall = overall_means(full_mission).set_index(["scheme", "configuration"])
        for configuration in ("I", "II", "III"):
            cld_i = overall.loc[("CLD-I", configuration), "mean_resilience"]
            assert cld_i > 0.0
            assert cld_i >= 1.01 * overall.loc[("NONCLD-MEO", configuration), "mean_resilience"]

    def test_geo_baseline_slower_and_longer_than_cld_i(self, full_mission):
        overall = overall_means(full_mission).set_index(["scheme", "configuration"])
        for configuration in ("I", "II", "III"):
            geo, cld_i = overall.loc[("NONCLD-GEO", configuration)], overall.loc[("CLD-I", configuration)]
            assert geo.mean_latency_s > cld_i.mean_latency_s
            assert geo.mean_path_m > cld_i.mean_path_m

    def test_configuration_sensitivity(self, full_mission):
        overall = overall_means(full_mission).set_index(["scheme", "configuration"])
        for scheme in SCHEME_NAMES:
            i, ii, iii = (overall.loc[(scheme, name), "mean_latency_s"] for name in ("I", "II", "III"))
            if np.isnan(i):
                continue
            assert i > ii and i > iii
            assert abs(ii - iii) < 0.1 * iii


def test_access_report(default_scenario):
    report = access_report(default_scenario.constellation, mission(12))
    assert list(report.columns) == ["t_iso8601", "layer", "accessible_count"]
    assert len(report) == 12 * 4
    assert report.iloc[0].t_iso8601 == Epoch.parse("2022-09-01 01:00:00").isoformat()
    assert (report[report.layer == 3].accessible_count == 0).all()
    assert (report[report.layer == 4].accessible_count > 0).all()
