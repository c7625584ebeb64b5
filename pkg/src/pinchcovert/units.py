"""Decibel <-> linear conversions. All internal math is in linear watts."""
from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)[()]


def linear_to_db(x):
    return (10.0 * np.log10(np.asarray(x, dtype=float)))[()]


def dbm_to_watts(dbm):
    """``30 dBm -> 1 W``."""
    return db_to_linear(np.asarray(dbm, dtype=float) - 30.0)


def watts_to_dbm(watts):
    return linear_to_db(watts) + 30.0
