"""Eavesdropper-side energy detection under bounded noise uncertainty.

Eve compares her received power with a threshold ``gamma``.  Her noise power
is uniform in dB over ``nominal_db +/- rho_db``, i.e. it has density
``1 / (2 x ln rho)`` on ``[nominal/rho, nominal*rho]``.  Under H0 she sees
``delta1 + noise`` (direct TPA signal), under H1 ``delta2 + noise`` (direct plus
backscattered).  Detection error probability (DEP) = false alarm + miss, with
equal priors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import PowerConfig, RfConstants, channel_gain_eve_ground
from .geometry import Point, distance
from .units import db_to_linear, linear_to_db

MC_CHUNK = 1 << 18


class UncertaintyRegionError(ValueError):
    """The eavesdropper location-uncertainty ball contains the device."""


@dataclass(frozen=True)
class NoiseUncertainty:
    nominal: float
    rho: float

    def __post_init__(self):
        if not self.nominal > 0:
            raise ValueError("nominal noise power must be positive")
        if not self.rho > 1:
            raise ValueError(f"noise uncertainty ratio must exceed 1, got {self.rho}")

    @classmethod
    def from_db(cls, nominal_dbm: float, rho_db: float) -> NoiseUncertainty:
        return cls(float(db_to_linear(nominal_dbm - 30.0)), float(db_to_linear(rho_db)))

    @property
    def x_lo(self) -> float:
        return self.nominal / self.rho

    @property
    def x_hi(self) -> float:
        return self.rho * self.nominal

    @property
    def log_rho(self) -> float:
        return math.log(self.rho)


@dataclass(frozen=True)
class EveUncertainty:
    """Bounded location error ``chi`` (m), CSI error ``delta`` and the
    estimated small-scale magnitude ``g_est``."""

    chi: float = 0.0
    delta: float = 0.1
    g_est: float = 1.278

    def __post_init__(self):
        if self.chi < 0 or self.delta < 0:
            raise ValueError("chi and delta must be non-negative")
        if not self.g_est > 0:
            raise ValueError("g_est must be positive")


@dataclass(frozen=True)
class DetectionReport:
    delta1: float
    delta2: float
    threshold_opt: float
    dep_min: float
    dep_worst_case: float
    # diagnostics: closed forms before clamping to [0, 1]
    dep_min_raw: float
    dep_worst_case_raw: float
    separable: bool


class OptimalDetection(NamedTuple):
    threshold: float
    dep_min: float


def noise_pdf(x, model: NoiseUncertainty):
    x = np.asarray(x, dtype=float)
    inside = (x >= model.x_lo) & (x <= model.x_hi)
    with np.errstate(divide="ignore"):
        dens = 1.0 / (2.0 * x * model.log_rho)
    return np.where(inside, dens, 0.0)[()]


def hypothesis_powers(
    p0: float,
    d_pT_e: float,
    d_pT_b: float,
    eve_gain: float,
    cfg: PowerConfig,
    constants: RfConstants,
) -> tuple[float, float]:
    """Mean received power at Eve under H0 and H1 (noise excluded).

    ``eve_gain`` is the full BD-to-Eve power gain ``eta d^-alpha |g|^2``.
    """
    if d_pT_e <= 0 or d_pT_b <= 0:
        raise ValueError("distances must be positive")
    delta1 = p0 * constants.eta / d_pT_e**2
    excess = cfg.reflect_gain * p0 * constants.eta / d_pT_b**2 * eve_gain
    return delta1, delta1 + excess


def dep_false_alarm(gamma, delta1, model: NoiseUncertainty):
    u = np.asarray(gamma, dtype=float) - delta1
    with np.errstate(divide="ignore", invalid="ignore"):
        theta1 = np.log(model.x_hi / u) / (2.0 * model.log_rho)
    out = np.where(u < model.x_lo, 1.0, np.where(u > model.x_hi, 0.0, theta1))
    return out[()]


def dep_miss(gamma, delta2, model: NoiseUncertainty):
    u = np.asarray(gamma, dtype=float) - delta2
    with np.errstate(divide="ignore", invalid="ignore"):
        theta2 = np.log(u / model.x_lo) / (2.0 * model.log_rho)
    out = np.where(u < model.x_lo, 0.0, np.where(u > model.x_hi, 1.0, theta2))
    return out[()]


def dep_total(gamma, delta1, delta2, model: NoiseUncertainty):
    if delta2 < delta1:
        raise ValueError("delta2 must be >= delta1")
    return dep_false_alarm(gamma, delta1, model) + dep_miss(gamma, delta2, model)


def min_dep_raw(excess, model: NoiseUncertainty):
    """Unclamped minimum total DEP for a backscatter excess power at Eve."""
    with np.errstate(divide="ignore"):
        out = np.log(model.x_hi / (model.x_lo + np.asarray(excess, dtype=float))) / (2.0 * model.log_rho)
    return out[()]


def _clamp01(p: float) -> float:
    return min(1.0, max(0.0, p))


def optimal_detection(delta1: float, delta2: float, model: NoiseUncertainty) -> OptimalDetection:
    """Optimal threshold ``x_lo + delta2`` and the resulting minimum DEP.

    When ``delta2 - delta1`` exceeds the noise spread ``x_hi - x_lo`` the two
    hypotheses no longer overlap and the minimum DEP is 0.
    """
    if delta2 < delta1:
        raise ValueError("delta2 must be >= delta1")
    return OptimalDetection(model.x_lo + delta2, _clamp01(float(min_dep_raw(delta2 - delta1, model))))


def worst_case_eve_point(bd: Point, eve_est: Point, chi: float) -> Point:
    """Point of the location-uncertainty ball closest to the device."""
    d = distance(bd, eve_est)
    if d <= chi:
        raise UncertaintyRegionError(
            "eavesdropper uncertainty region contains the device "
            f"(|b - e_est| = {d:g} m <= chi = {chi:g} m)"
        )
    return tuple(e + chi * (b - e) / d for b, e in zip(bd, eve_est))


def worst_case_eve_gain(bd: Point, eve_est: Point, unc: EveUncertainty, constants: RfConstants) -> float:
    """Largest BD-to-Eve power gain allowed by the location and CSI bounds."""
    d_worst = distance(bd, worst_case_eve_point(bd, eve_est, unc.chi))
    return float(channel_gain_eve_ground(d_worst, (1.0 + unc.delta) * unc.g_est, constants))


def backscatter_excess(p0, d_pT_b, eve_gain, cfg: PowerConfig, constants: RfConstants):
    """Backscattered power reaching Eve, ``delta2 - delta1``."""
    return cfg.reflect_gain * p0 * constants.eta / d_pT_b**2 * eve_gain


def worst_case_dep(
    p0: float,
    d_pT_b: float,
    worst_gain: float,
    cfg: PowerConfig,
    constants: RfConstants,
    model: NoiseUncertainty,
    clamp: bool = True,
) -> float:
    """Lower bound on Eve's minimum DEP over the uncertainty set.

    ``clamp=False`` returns the raw closed form, which is what the
    covertness constraint is written against.
    """
    if d_pT_b <= 0:
        raise ValueError("distance must be positive")
    raw = float(min_dep_raw(backscatter_excess(p0, d_pT_b, worst_gain, cfg, constants), model))
    return _clamp01(raw) if clamp else raw


def detection_report(
    p0: float,
    d_pT_e: float,
    d_pT_b: float,
    eve_gain: float,
    worst_gain: float,
    cfg: PowerConfig,
    constants: RfConstants,
    model: NoiseUncertainty,
) -> DetectionReport:
    d1, d2 = hypothesis_powers(p0, d_pT_e, d_pT_b, eve_gain, cfg, constants)
    threshold, p_min = optimal_detection(d1, d2, model)
    raw_min = float(min_dep_raw(d2 - d1, model))
    raw_worst = worst_case_dep(p0, d_pT_b, worst_gain, cfg, constants, model, clamp=False)
    return DetectionReport(
        delta1=d1,
        delta2=d2,
        threshold_opt=threshold,
        dep_min=p_min,
        dep_worst_case=_clamp01(raw_worst),
        dep_min_raw=raw_min,
        dep_worst_case_raw=raw_worst,
        separable=raw_min < 0,
    )


def monte_carlo_dep(
    gamma: float,
    delta1: float,
    delta2: float,
    model: NoiseUncertainty,
    n: int,
    seed: int = 42,
) -> tuple[float, float]:
    """Empirical false-alarm and miss probabilities from ``n`` noise draws.

    Draws are made in fixed-size chunks, each from its own child of
    ``SeedSequence(seed)``, so results depend only on ``(n, seed)``.
    """
    if n < 1:
        raise ValueError("need at least one Monte-Carlo sample")
    nominal_db = float(linear_to_db(model.nominal))
    rho_db = float(linear_to_db(model.rho))
    n_chunks = -(-n // MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    false_alarms = misses = 0
    for i, child in enumerate(children):
        size = min(MC_CHUNK, n - i * MC_CHUNK)
        rng = np.random.default_rng(child)
        noise = 10.0 ** (rng.uniform(nominal_db - rho_db, nominal_db + rho_db, size) / 10.0)
        false_alarms += int(np.count_nonzero(delta1 + noise >= gamma))
        misses += int(np.count_nonzero(delta2 + noise <= gamma))
    return false_alarms / n, misses / n
