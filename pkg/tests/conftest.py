import os

import numpy as np
import pytest

from src.network.access import StateAtT
from src.network.constellation import LayerSpec, build_constellation
from src.orbit.constants import EARTH_RADIUS
from src.orbit.epoch import Epoch

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_SCENARIO = os.path.join(ROOT, "configs", "scenario.yaml")

T_START = Epoch.parse("2022-09-01 01:00:00")


@pytest.fixture(scope="session")
def t_start():
    return T_START


@pytest.fixture(scope="session")
def default_scenario():
    from src.cli import load_scenario

    return load_scenario(DEFAULT_SCENARIO)


@pytest.fixture(scope="session")
def default_state(default_scenario):
    mission = default_scenario.mission
    return StateAtT.capture(default_scenario.constellation, mission.t_start, mission.sc.position, mission.sc.min_elevation)


def walker_layer(index, planes, sats_per_plane, altitude_km, inclination=90.0, name=None):
    return LayerSpec(
        index=index,
        name=name or f"shell-{index}",
        planes=planes,
        sats_per_plane=sats_per_plane,
        altitude=altitude_km * 1e3,
        inclination=inclination,
    )


def grid(planes, sats_per_plane):
    """Single Walker layer, so global and local indices coincide."""
    return build_constellation([walker_layer(1, planes, sats_per_plane, 1015)], T_START)


def equatorial(longitude_deg, altitude_km):
    """ECEF point (m) over the equator."""
    lam = np.deg2rad(longitude_deg)
    r = EARTH_RADIUS + altitude_km * 1e3
    return np.array([r * np.cos(lam), r * np.sin(lam), 0.0])
