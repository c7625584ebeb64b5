"""Free-space link budgets for the downlink (energy harvesting) and the
backscatter uplink.

Only squared channel magnitudes are carried.  The unit-modulus phase factors
(in-waveguide and free-space) never enter a power expression, so they are not
modelled.  Functions accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import SPEED_OF_LIGHT


@dataclass(frozen=True)
class RfConstants:
    carrier_frequency: float = 28e9
    effective_index: float = 1.4
    path_loss_exponent: float = 2.0
    wavelength: float = field(init=False)
    guided_wavelength: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")
        if not self.effective_index >= 1:
            raise ValueError("effective_index must be >= 1")
        if not self.path_loss_exponent > 0:
            raise ValueError("path_loss_exponent must be positive")
        lam = SPEED_OF_LIGHT / self.carrier_frequency
        object.__setattr__(self, "wavelength", lam)
        object.__setattr__(self, "guided_wavelength", lam / self.effective_index)
        # reference path loss at 1 m
        object.__setattr__(self, "eta", lam**2 / (16 * math.pi**2))


@dataclass(frozen=True)
class PowerConfig:
    """Transmit power, BD reflection parameters and uplink receiver settings.

    kappa is the fraction of incident power the BD reflects, zeta the
    backscattering efficiency, noise_rpa the receiver noise power at the RPA
    (watts) and bandwidth the uplink bandwidth (Hz).
    """

    p0: float
    p_max: float
    kappa: float = 0.375
    zeta: float = 1.0
    noise_rpa: float = 1e-3 * 10 ** (-11.6)
    bandwidth: float = 10e3

    def __post_init__(self):
        if not 0 <= self.p0 <= self.p_max:
            raise ValueError(f"need 0 <= p0 <= p_max, got p0={self.p0}, p_max={self.p_max}")
        for name in ("kappa", "zeta"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.noise_rpa > 0:
            raise ValueError("noise_rpa must be positive")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def reflect_gain(self) -> float:
        """zeta * kappa, the end-to-end fraction of harvested power re-radiated."""
        return self.zeta * self.kappa


@dataclass(frozen=True)
class LinkBudget:
    harvested_power: float
    received_power: float
    snr: float
    rate: float


def _check_positive(d, what="distance"):
    if np.any(np.asarray(d) <= 0):
        raise ValueError(f"{what} must be positive (1/d path-loss model is singular at 0)")


def channel_gain_downlink(d_pT_i, constants: RfConstants):
    """|h|^2 = eta / d^2 for the TPA-to-receiver link."""
    _check_positive(d_pT_i)
    return constants.eta / np.asarray(d_pT_i, dtype=float) ** 2


def channel_gain_eve_ground(d_b_e, g, constants: RfConstants):
    """|h_b^e|^2 = eta * d^-alpha * |g|^2 for the floor-level BD-to-Eve link."""
    _check_positive(d_b_e)
    d = np.asarray(d_b_e, dtype=float)
    return constants.eta * d ** (-constants.path_loss_exponent) * np.abs(g) ** 2


def harvested_power(p0, d_pT_b, constants: RfConstants):
    return p0 * channel_gain_downlink(d_pT_b, constants)


def received_power(p0, d_pT_b, d_b_pR, cfg: PowerConfig, constants: RfConstants):
    _check_positive(d_b_pR)
    return cfg.reflect_gain * harvested_power(p0, d_pT_b, constants) * constants.eta / np.asarray(d_b_pR) ** 2


def rate_from_snr(snr, bandwidth: float):
    return bandwidth * np.log2(1.0 + snr)


def backscatter_budget(
    p0: float, d_pT_b: float, d_b_pR: float, cfg: PowerConfig, constants: RfConstants
) -> LinkBudget:
    _check_positive(d_b_pR)
    pb = harvested_power(p0, d_pT_b, constants)
    pa = cfg.reflect_gain * p0 * constants.eta**2 / (d_pT_b * d_b_pR) ** 2
    snr = pa / cfg.noise_rpa
    return LinkBudget(
        harvested_power=float(pb),
        received_power=float(pa),
        snr=float(snr),
        rate=float(rate_from_snr(snr, cfg.bandwidth)),
    )
