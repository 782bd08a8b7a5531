import dataclasses
import random

import numpy as np
import pytest

from src.errors import ConstellationError, DescentBlockedError, UnreachableError
from src.metrics import path_length
from src.network.access import StateAtT, cross_layer_candidates, directional_angles, same_sign_mask
from src.network.constellation import LayerSpec, build_constellation, layer_of
from src.network.routing import (
    SCHEME_NAMES,
    cld_prepare,
    compute_route,
    get_best_under_layer_sat,
    get_closest_sat_to_sc,
    get_cross_layer_route,
    get_intra_layer_route,
    make_scheme,
    route_non_cld_geo,
    route_non_cld_meo,
    validate_route,
)
from src.scenario import sample_times

from tests.conftest import T_START, equatorial, grid, walker_layer
from tests.oracles import torus_distance, torus_distances

KM = 1e3
SC = equatorial(0.0, 0)
FAR = (150.0, 170.0, 190.0, 210.0, 230.0)

# Layer 1: 3 x 3 grid, IDs 1..9; layer 2: a single relay, ID 10.
TSN, MIRROR, ISN, DSN, RELAY = 1, 2, 3, 4, 10


def snapshot(longitudes, sc_min_elevation=25.0, relay_altitude_km=2000.0, relay_longitude=0.0, layer1_min_elevation=None):
    """Hand-placed equatorial snapshot: layer-1 satellites at ``longitudes``, the relay above ``relay_longitude``."""
    c = build_constellation(
        [
            dataclasses.replace(walker_layer(1, 3, 3, 1015.0), min_elevation=layer1_min_elevation),
            LayerSpec(index=2, name="relay", kind="geo", altitude=relay_altitude_km * KM, longitudes_deg=(0.0,)),
        ],
        T_START,
    )
    positions = np.stack([equatorial(lon, 1015) for lon in longitudes] + [equatorial(relay_longitude, relay_altitude_km)])
    return c, StateAtT(t=T_START, positions=positions, sc_position=SC, sc_min_elevation=sc_min_elevation)


def descent_snapshot(tsn=5.0, mirror=-4.0, isn=17.5, dsn=30.0, **kwargs):
    return snapshot([tsn, mirror, isn, dsn, *FAR], **kwargs)


def two_relay_snapshot():
    """Layer 1 out of the SC's view; relays 10 (over the SC) and 11 (10 deg east), only 11 sees layer 1."""
    c = build_constellation(
        [
            walker_layer(1, 3, 3, 1015.0),
            LayerSpec(index=2, name="relays", kind="geo", altitude=2000 * KM, longitudes_deg=(0.0, 10.0)),
        ],
        T_START,
    )
    longitudes = [25.0, 40.0, 60.0, 80.0, 100.0, 150.0, 170.0, 190.0, 210.0]
    positions = np.stack([equatorial(lon, 1015) for lon in longitudes] + [equatorial(0.0, 2000), equatorial(10.0, 2000)])
    return c, StateAtT(t=T_START, positions=positions, sc_position=SC)


def three_layer_snapshot():
    """The SC sees only satellite 11 on layer 3; the layer-2 relay (10) sits a quarter turn away."""
    c = build_constellation(
        [
            walker_layer(1, 3, 3, 1015.0),
            LayerSpec(index=2, name="relay", kind="geo", altitude=2000 * KM, longitudes_deg=(90.0,)),
            LayerSpec(index=3, name="high", kind="geo", altitude=20000 * KM, longitudes_deg=(0.0,)),
        ],
        T_START,
    )
    longitudes = [30.0, 40.0, 50.0, 150.0, 170.0, 190.0, 210.0, 230.0, 250.0]
    positions = np.stack(
        [equatorial(lon, 1015) for lon in longitudes] + [equatorial(90.0, 2000), equatorial(0.0, 20000)]
    )
    return c, StateAtT(t=T_START, positions=positions, sc_position=SC)


class TestSchemes:
    def test_defaults(self):
        assert make_scheme("CLD-I", 4).layers_used == {1, 2, 3, 4}
        assert make_scheme("CLD-II", 4).layers_used == {1, 3}
        assert make_scheme("CLD-III", 4).layers_used == {1, 4}
        assert make_scheme("NONCLD-MEO", 4).access_layers == {3}
        geo = make_scheme("NONCLD-GEO", 4)
        assert geo.access_layers == {4}
        assert geo.relay_layer == 4

    def test_override(self):
        assert make_scheme("CLD-II", 5, [1, 2, 5]).layers_used == {1, 2, 5}

    @pytest.mark.parametrize("name, layers", [("CLD-IV", None), ("CLD-II", [1, 7]), ("CLD-II", [2, 3]), ("NONCLD-GEO", [1])])
    def test_invalid(self, name, layers):
        with pytest.raises(ValueError):
            make_scheme(name, 4, layers)


class TestClosestSat:
    def test_single_and_nearest(self):
        c, state = descent_snapshot()
        assert get_closest_sat_to_sc([ISN], SC, 1, state, c) == ISN
        assert get_closest_sat_to_sc([TSN, MIRROR, ISN], SC, 1, state, c) == MIRROR

    def test_tie_goes_to_lowest_id(self):
        c, state = descent_snapshot(tsn=5.0, mirror=-5.0)
        assert get_closest_sat_to_sc([MIRROR, TSN], SC, 1, state, c) == TSN

    def test_ignores_other_layers_and_rejects_empty(self):
        c, state = descent_snapshot()
        assert get_closest_sat_to_sc([RELAY, ISN], SC, 1, state, c) == ISN
        with pytest.raises(ValueError):
            get_closest_sat_to_sc([RELAY], SC, 1, state, c)


class TestBestUnderLayerSat:
    def test_same_side_candidate_beats_nearer_mirror(self):
        c, state = descent_snapshot()
        assert get_best_under_layer_sat(RELAY, DSN, state, c) == (TSN, False)

    def test_nearer_same_side_member(self):
        c, state = descent_snapshot()
        ranges = {g: np.linalg.norm(state.position(g) - state.position(RELAY)) for g in (TSN, ISN)}
        assert ranges[TSN] < ranges[ISN]
        c, state = descent_snapshot(tsn=160.0)
        assert get_best_under_layer_sat(RELAY, DSN, state, c) == (ISN, False)

    def test_visible_dsn_taken_directly(self):
        c, state = descent_snapshot(dsn=10.0)
        choice = get_best_under_layer_sat(RELAY, DSN, state, c)
        assert choice == (DSN, False)
        sc, ssn, dsn = state.sc_position, state.position(RELAY), state.position(DSN)
        angles = directional_angles(sc, ssn, dsn, dsn)
        assert abs(angles.theta1 - angles.theta2) < 1e-9

    def test_fallback_when_no_same_side_candidate(self):
        c, state = descent_snapshot(tsn=160.0, isn=165.0)
        assert get_best_under_layer_sat(RELAY, DSN, state, c) == (MIRROR, True)

    def test_layer_minimum_elevation_overrides_default(self):
        c, state = descent_snapshot()
        assert TSN in cross_layer_candidates(RELAY, state, c)
        c, state = descent_snapshot(layer1_min_elevation=60.0)
        assert cross_layer_candidates(RELAY, state, c, min_elevation=0.0) == []
        with pytest.raises(DescentBlockedError):
            get_best_under_layer_sat(RELAY, DSN, state, c)

    def test_blocked(self):
        c, state = snapshot([140.0, 150.0, 160.0, 170.0, *FAR])
        with pytest.raises(DescentBlockedError) as err:
            get_best_under_layer_sat(RELAY, DSN, state, c)
        assert err.value.layer == 1
        assert isinstance(err.value, UnreachableError)


class TestIntraLayerRoute:
    def test_same_node(self):
        assert get_intra_layer_route(7, 7, 1, grid(6, 13)) == [7]

    def test_examples(self):
        c = grid(6, 13)
        assert len(get_intra_layer_route(1, 2 * 13 + 5 + 1, 1, c)) - 1 == 7
        assert get_intra_layer_route(1, 13, 1, c) == [1, 13]

    def test_slots_first_then_planes(self):
        c = grid(6, 13)
        assert get_intra_layer_route(1, 2 * 13 + 2 + 1, 1, c) == [1, 2, 3, 16, 29]

    def test_ring_tie_goes_forward(self):
        assert get_intra_layer_route(1, 11, 1, grid(4, 5)) == [1, 6, 11]

    @pytest.mark.parametrize("planes, sats", [(4, 5), (6, 13)])
    def test_exhaustive_bfs(self, planes, sats):
        c = grid(planes, sats)
        distances = torus_distances(planes, sats)
        n = planes * sats
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                route = get_intra_layer_route(i, j, 1, c)
                assert len(route) - 1 == distances[(i, j)]
                assert route[0] == i and route[-1] == j
                assert len(set(route)) == len(route)

    def test_random_pairs_oneweb(self):
        c = grid(18, 40)
        rng = random.Random(2022)
        for _ in range(1000):
            i, j = rng.randint(1, 720), rng.randint(1, 720)
            assert len(get_intra_layer_route(i, j, 1, c)) - 1 == torus_distance(18, 40, i, j)

    def test_rejects_mixed_layers(self):
        c, _ = descent_snapshot()
        with pytest.raises(ConstellationError):
            get_intra_layer_route(1, RELAY, 1, c)
        with pytest.raises(ConstellationError):
            get_intra_layer_route(RELAY, RELAY, 2, c)


class TestCrossLayerRoute:
    def test_single_boundary(self):
        c, state = descent_snapshot()
        assert get_cross_layer_route(RELAY, DSN, state, c) == ((RELAY, TSN), False)

    def test_ssn_must_be_above_dsn(self):
        c, state = descent_snapshot()
        with pytest.raises(ConstellationError):
            get_cross_layer_route(TSN, DSN, state, c)


class TestCldPrepare:
    def test_descent_route(self):
        c, state = descent_snapshot(sc_min_elevation=80.0)
        route = cld_prepare(c, state, make_scheme("CLD-I", 2), DSN)
        assert route.r1 == ()
        assert route.r2 == (RELAY, TSN)
        assert route.r3 == (TSN, DSN)
        assert route.nodes == (RELAY, TSN, DSN)
        assert route.hop_count == 3
        assert [h.segment for h in route.hops] == ["uplink", "cross", "intra"]
        assert route.hops[0].length == pytest.approx(2000 * KM)
        assert validate_route(route, state, c) == []

    def test_target_layer_access(self):
        c, state = descent_snapshot()
        route = cld_prepare(c, state, make_scheme("CLD-I", 2), DSN)
        assert route.r1 == (MIRROR, TSN, DSN)
        assert route.tsn is None
        assert route.hop_count == 3
        assert validate_route(route, state, c) == []

    def test_dsn_accessible(self):
        c, state = descent_snapshot(mirror=-8.0, dsn=2.0)
        route = cld_prepare(c, state, make_scheme("CLD-I", 2), DSN)
        assert route.r1 == (DSN,)
        assert route.hop_count == 1
        assert path_length(route).total == pytest.approx(np.linalg.norm(state.position(DSN) - SC))

    def test_nothing_accessible(self):
        c, state = snapshot([60.0, 80.0, 100.0, 120.0, -60.0, -80.0, -100.0, -120.0, 90.0], relay_longitude=180.0)
        with pytest.raises(UnreachableError):
            cld_prepare(c, state, make_scheme("CLD-I", 2), DSN)

    def test_next_accessible_ssn_when_nearest_is_blocked(self):
        c, state = two_relay_snapshot()
        with pytest.raises(DescentBlockedError):
            get_cross_layer_route(10, 1, state, c)
        route = cld_prepare(c, state, make_scheme("CLD-I", 2), 1)
        assert route.ssn == 11
        assert route.r2 == (11, 1)
        assert route.r3 == ()
        assert route.hop_count == 2
        assert validate_route(route, state, c) == []

    def test_every_descent_blocked(self):
        c, state = snapshot([140.0, 150.0, 160.0, 170.0, *FAR])
        with pytest.raises(DescentBlockedError):
            cld_prepare(c, state, make_scheme("CLD-I", 2), DSN)

    def test_blocked_intermediate_layer_is_spanned(self):
        c, state = three_layer_snapshot()
        with pytest.raises(DescentBlockedError) as err:
            get_cross_layer_route(11, 1, state, c)
        assert err.value.layer == 2

        route = cld_prepare(c, state, make_scheme("CLD-I", 3), 1)
        assert route.r2 == (11, 1)
        assert [h.segment for h in route.hops] == ["uplink", "cross"]
        assert validate_route(route, state, c) == []
        assert cld_prepare(c, state, make_scheme("CLD-III", 3, [1, 3]), 1).nodes == route.nodes


class TestBaselines:
    def test_meo_no_sign_filter(self):
        c, state = descent_snapshot()
        route = route_non_cld_meo(c, state, DSN, meo_layer=2)
        assert route.r2 == (RELAY, MIRROR)
        assert route.nodes == (RELAY, MIRROR, TSN, DSN)
        assert validate_route(route, state, c) == []

    def test_meo_dsn_under_relay(self):
        c, state = descent_snapshot(dsn=0.0)
        route = route_non_cld_meo(c, state, DSN, meo_layer=2)
        assert route.tsn == DSN
        assert route.r3 == ()
        assert route.hop_count == 2

    def test_geo_single_hop(self):
        c, state = descent_snapshot()
        route = route_non_cld_geo(c, state, TSN, geo_layer=2)
        assert route.nodes == (RELAY, TSN)
        assert route.hop_count == 2
        expected = 2000 * KM + np.linalg.norm(state.position(TSN) - state.position(RELAY))
        assert path_length(route).total == pytest.approx(expected)

    def test_geo_dsn_out_of_view(self):
        c, state = descent_snapshot()
        with pytest.raises(UnreachableError):
            route_non_cld_geo(c, state, DSN, geo_layer=2)

    def test_meo_never_reaches_sc_in_default_scenario(self, default_scenario, default_state):
        # Equatorial MEO peaks near 13.5 degrees of elevation from 51 N
        c = default_scenario.constellation
        with pytest.raises(UnreachableError):
            route_non_cld_meo(c, default_state, 1)


def _default_routes(scenario, every=50, targets=(1, 21, 41, 61, 77)):
    c, mission = scenario.constellation, scenario.mission
    for t in sample_times(mission)[::every]:
        state = StateAtT.capture(c, t, mission.sc.position, mission.sc.min_elevation)
        for name in SCHEME_NAMES:
            scheme = make_scheme(name, c.n_layers)
            for dsn in targets:
                try:
                    yield state, compute_route(scheme, c, state, dsn)
                except UnreachableError:
                    continue


class TestDefaultScenarioRoutes:
    def test_routes_are_feasible(self, default_scenario):
        c = default_scenario.constellation
        count = 0
        for state, route in _default_routes(default_scenario):
            count += 1
            assert validate_route(route, state, c) == []
            assert route.nodes[-1] == route.dsn
            assert route.hop_count == len(route.nodes)
        assert count > 0

    def test_descent_respects_sign_rule(self, default_scenario):
        c = default_scenario.constellation
        for state, route in _default_routes(default_scenario):
            if not route.scheme.startswith("CLD") or not route.r2 or route.fallback:
                continue
            longest_chain = layer_of(route.ssn, c)[0] if route.scheme == "CLD-I" else 2
            assert 2 <= len(route.r2) <= longest_chain
            dsn = state.position(route.dsn)
            for a, b in zip(route.r2, route.r2[1:]):
                assert same_sign_mask(state.sc_position, state.position(a), state.position(b)[None, :], dsn)[0]

    def test_geo_baseline_two_hops(self, default_scenario):
        for _, route in _default_routes(default_scenario):
            if route.scheme == "NONCLD-GEO":
                assert route.hop_count == 2
                assert layer_of(route.ssn, default_scenario.constellation)[0] == 4

    def test_cld_i_routes_wherever_geo_only_cld_does(self, default_scenario):
        c, mission = default_scenario.constellation, default_scenario.mission
        cld_i, cld_iii = make_scheme("CLD-I", c.n_layers), make_scheme("CLD-III", c.n_layers)
        checked = 0
        for t in sample_times(mission):
            state = StateAtT.capture(c, t, mission.sc.position, mission.sc.min_elevation)
            try:
                compute_route(cld_iii, c, state, 33)
            except UnreachableError:
                continue
            route = compute_route(cld_i, c, state, 33)
            assert validate_route(route, state, c) == []
            checked += 1
        assert checked > 0

    def test_deterministic(self, default_scenario, default_state):
        c = default_scenario.constellation
        scheme = make_scheme("CLD-I", c.n_layers)
        def route_or_none():
            try:
                return compute_route(scheme, c, default_state, 41)
            except UnreachableError:
                return None

        assert route_or_none() == route_or_none()
