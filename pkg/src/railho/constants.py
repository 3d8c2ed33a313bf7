"""Shared physical constants and unit helpers."""

SPEED_OF_LIGHT_MPS = 3.0e8  # matches the precision of every other model parameter


def kmh_to_mps(speed_kmh: float) -> float:
    return speed_kmh / 3.6


def mps_to_kmh(speed_mps: float) -> float:
    return speed_mps * 3.6
