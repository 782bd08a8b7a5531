# src/orbit/__init__.py

from .epoch import Epoch
from .frames import NedFrame, eci_to_ecef, ecef_to_eci, geodetic_to_ecef, gmst, ned_basis
from .propagator import (
    ElementArrays,
    OrbitalElements,
    propagate,
    propagate_circular,
    propagate_kepler,
    propagate_many,
)
from .tle import load_tle_file, parse_tle
