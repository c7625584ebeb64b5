"""Flat ``key = value`` scenario files.

Example::

    # reference run
    p_max = 50 dBm
    sigma_p = -116 dBm
    chi = 2
    delta = 0.3

Powers take ``dBm``, ``W`` or ``mW`` (bare numbers are watts), frequencies
take ``Hz``/``kHz``/``MHz``/``GHz``, ratios take ``dB`` (bare numbers are
linear), lengths are metres with an optional ``m``.  Unset keys fall back to
the defaults below.
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field, fields
from typing import Any, Optional

from .channel import PowerConfig, RfConstants
from .detection import EveUncertainty, NoiseUncertainty
from .geometry import NodeLayout, Room, Scenario, WaveguidePair
from .optimizer import CovertnessSpec, ReliabilitySpec, System
from .units import db_to_linear, dbm_to_watts


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _kind(kind: str, default: Any = None):
    return field(default=default, metadata={"kind": kind})


def _dbm(v: float) -> float:
    return float(dbm_to_watts(v))


def _db(v: float) -> float:
    return float(db_to_linear(v))


@dataclass(frozen=True)
class Config:
    # geometry
    length: float = _kind("length", 20.0)
    width: float = _kind("length", 20.0)
    height: float = _kind("length", 3.0)
    y_t: float = _kind("length", -0.5)
    y_r: float = _kind("length", 0.5)
    bd_x: Optional[float] = _kind("length")  # default L/2
    bd_y: float = _kind("length", 0.0)
    d_b_e: float = _kind("length", 5.0)
    eve_angle: float = _kind("float", 0.0)  # degrees, bearing of Eve seen from the BD
    tpa_x: Optional[float] = _kind("length")  # default L/4; used by `detect`
    rpa_x: Optional[float] = _kind("length")  # default L/2
    # RF
    carrier_frequency: float = _kind("frequency", 28e9)
    n_eff: float = _kind("float", 1.4)
    alpha: float = _kind("float", 2.0)
    # power and uplink
    p_max: float = _kind("power", _dbm(50.0))
    p0: Optional[float] = _kind("power")  # default p_max; used by `detect`
    kappa: float = _kind("float", 0.375)
    zeta: float = _kind("float", 1.0)
    sigma_p: float = _kind("power", _dbm(-116.0))
    bandwidth: float = _kind("frequency", 10e3)
    gamma_th: float = _kind("ratio", _db(0.0))
    # eavesdropper
    sigma_e_nominal: float = _kind("power", _dbm(-90.0))
    rho: float = _kind("ratio", _db(3.0))
    chi: float = _kind("length", 0.0)
    delta: float = _kind("float", 0.1)
    g_est: float = _kind("float", 1.278)
    epsilon: float = _kind("float", 0.05)
    # numerics
    seed: int = _kind("int", 42)
    mc_samples: int = _kind("int", 1_000_000)
    ao_tol: float = _kind("float", 1e-3)
    ao_max_iter: int = _kind("int", 50)
    delta3_form: str = _kind("str", "derived")

    def replace(self, **changes) -> Config:
        return dataclasses.replace(self, **changes)

    def with_text_overrides(self, overrides: dict[str, str]) -> Config:
        return self.replace(**{k: parse_value(k, v) for k, v in overrides.items()})

    @property
    def bd(self) -> tuple[float, float, float]:
        return (self.length / 2 if self.bd_x is None else self.bd_x, self.bd_y, 0.0)

    @property
    def eve_estimate(self) -> tuple[float, float, float]:
        xb, yb, _ = self.bd
        a = math.radians(self.eve_angle)
        # exact for the axis-aligned default bearing
        dx = self.d_b_e if self.eve_angle == 0 else self.d_b_e * math.cos(a)
        dy = 0.0 if self.eve_angle == 0 else self.d_b_e * math.sin(a)
        return (xb + dx, yb + dy, 0.0)

    def scenario(self) -> Scenario:
        return Scenario(
            Room(self.length, self.width, self.height),
            WaveguidePair(self.y_t, self.y_r),
            NodeLayout(
                bd=self.bd,
                eve_estimate=self.eve_estimate,
                tpa_x=self.length / 4 if self.tpa_x is None else self.tpa_x,
                rpa_x=self.length / 2 if self.rpa_x is None else self.rpa_x,
            ),
        )

    def to_system(self) -> System:
        try:
            return System(
                scenario=self.scenario(),
                rf=RfConstants(self.carrier_frequency, self.n_eff, self.alpha),
                power=PowerConfig(
                    p0=self.p_max if self.p0 is None else self.p0,
                    p_max=self.p_max,
                    kappa=self.kappa,
                    zeta=self.zeta,
                    noise_rpa=self.sigma_p,
                    bandwidth=self.bandwidth,
                ),
                noise=NoiseUncertainty(self.sigma_e_nominal, self.rho),
                eve=EveUncertainty(self.chi, self.delta, self.g_est),
                covertness=CovertnessSpec(self.epsilon),
                reliability=ReliabilitySpec(self.gamma_th),
                delta3_form=self.delta3_form,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


KINDS = {f.name: f.metadata["kind"] for f in fields(Config)}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf"
_VALUE_RE = re.compile(rf"^\s*({_NUM})\s*([A-Za-z]*)\s*$")
_POWER_UNITS = {"": None, "w": 1.0, "mw": 1e-3, "uw": 1e-6}
_FREQ_UNITS = {"": 1.0, "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


def parse_value(key: str, text: str) -> Any:
    if key not in KINDS:
        raise ConfigError(f"unknown key {key!r}")
    kind = KINDS[key]
    text = str(text).strip()
    if kind == "str":
        return text
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    m = _VALUE_RE.match(text)
    if not m:
        raise ConfigError(f"{key}: cannot parse value {text!r}")
    num, unit = float(m.group(1)), m.group(2).lower()
    if kind == "power":
        if unit == "dbm":
            return _dbm(num)
        if unit in _POWER_UNITS:
            return num * (_POWER_UNITS[unit] or 1.0)
    elif kind == "frequency":
        if unit in _FREQ_UNITS:
            return num * _FREQ_UNITS[unit]
    elif kind == "ratio":
        if unit == "db":
            return _db(num)
        if unit == "":
            return num
    elif kind == "length":
        if unit in ("", "m"):
            return num
    elif kind == "float" and unit == "":
        return num
    raise ConfigError(f"{key}: unit {m.group(2)!r} not valid for a {kind} value")


def parse_config(text: str, base: Optional[Config] = None) -> Config:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in KINDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = parse_value(key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return dataclasses.replace(base or Config(), **values)


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def render_config(cfg: Config) -> str:
    """Serialise in canonical units (W, Hz, linear ratios, m); exact round trip."""
    lines = []
    for f in fields(Config):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        unit = {"power": " W", "frequency": " Hz"}.get(f.metadata["kind"], "")
        lines.append(f"{f.name} = {v!r}{unit}" if not isinstance(v, str) else f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
