"""Spherical-Earth geometry: satellite ground tracks, UE drops, slant range, elevation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPosition:
    latitude: float  # deg
    longitude: float  # deg
    altitude: float = 0.0  # m above mean sea level

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude < 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180)")
        if self.altitude < 0:
            raise ValueError(f"altitude {self.altitude} is negative")


def wrap_longitude(lon: float) -> float:
    return (lon + 180.0) % 360.0 - 180.0


def to_ecef(pos: GeoPosition) -> np.ndarray:
    r = EARTH_RADIUS_M + pos.altitude
    lat = math.radians(pos.latitude)
    lon = math.radians(pos.longitude)
    return np.array([r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)])


def destination(start: GeoPosition, bearing_deg: float, angular_distance_rad: float) -> GeoPosition:
    """Point reached by a great-circle walk from ``start`` with initial bearing, same altitude."""
    lat1 = math.radians(start.latitude)
    lon1 = math.radians(start.longitude)
    brg = math.radians(bearing_deg)
    d = angular_distance_rad
    sin_lat2 = math.sin(lat1) * math.cos(d) + math.cos(lat1) * math.sin(d) * math.cos(brg)
    lat2 = math.asin(max(-1.0, min(1.0, sin_lat2)))
    lon2 = lon1 + math.atan2(math.sin(brg) * math.sin(d) * math.cos(lat1), math.cos(d) - math.sin(lat1) * sin_lat2)
    return GeoPosition(math.degrees(lat2), wrap_longitude(math.degrees(lon2)), start.altitude)


def central_angle(a: GeoPosition, b: GeoPosition) -> float:
    """Great-circle angle between the ground points of a and b (haversine), radians."""
    lat1, lat2 = math.radians(a.latitude), math.radians(b.latitude)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class SatelliteState:
    """Constant-altitude satellite on a great-circle track.

    ``speed`` is the orbital speed at altitude; the sub-satellite point
    therefore covers ``speed * t * R_E / (R_E + h)`` metres of ground.
    """

    start: GeoPosition
    speed: float  # m/s
    heading_deg: float = 270.0  # initial bearing, 270 = due west

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("satellite speed must be positive")


def propagate(sat: SatelliteState, t: float) -> GeoPosition:
    if t < 0:
        raise ValueError("t must be non-negative")
    angle = sat.speed * t / (EARTH_RADIUS_M + sat.start.altitude)
    return destination(sat.start, sat.heading_deg, angle)


def slant_range(sat: GeoPosition, ue: GeoPosition) -> float:
    if sat.altitude <= ue.altitude:
        raise ValueError("satellite must be above the UE")
    return float(np.linalg.norm(to_ecef(sat) - to_ecef(ue)))


def elevation_angle(sat: GeoPosition, ue: GeoPosition) -> float:
    """Elevation of ``sat`` above the local horizon of ``ue``, degrees in [-90, 90]."""
    ue_xyz = to_ecef(ue)
    los = to_ecef(sat) - ue_xyz
    up = ue_xyz / np.linalg.norm(ue_xyz)
    s = float(np.dot(los, up) / np.linalg.norm(los))
    return math.degrees(math.asin(max(-1.0, min(1.0, s))))


@dataclass
class LosAnchor:
    anchor: np.ndarray  # satellite ECEF at the last LOS resampling, m
    cube_side: float = 3500.0

    def __post_init__(self):
        if self.cube_side <= 0:
            raise ValueError("cube_side must be positive")


def los_resample_due(link: LosAnchor, sat_now: GeoPosition | np.ndarray) -> bool:
    """True iff the satellite moved further than ``cube_side`` along any ECEF axis."""
    xyz = sat_now if isinstance(sat_now, np.ndarray) else to_ecef(sat_now)
    return bool(np.any(np.abs(xyz - link.anchor) > link.cube_side))


def drop_ues_in_disc(center: GeoPosition, radius_m: float, n: int, rng: np.random.Generator) -> list[GeoPosition]:
    """``n`` ground positions uniform in area within ``radius_m`` of ``center``."""
    out = []
    for _ in range(n):
        r = radius_m * math.sqrt(rng.random())
        bearing = 360.0 * rng.random()
        out.append(destination(GeoPosition(center.latitude, center.longitude, 0.0), bearing, r / EARTH_RADIUS_M))
    return out
