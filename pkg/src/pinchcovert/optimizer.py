"""Covert uplink rate maximisation over transmit power and TPA position.

The joint problem is solved by alternating two closed-form subproblems:

* power step: for a fixed TPA position the rate grows with ``P0``, so the
  optimum is the largest power allowed by the budget and by covertness,
  provided it still meets the SNR floor;
* position step: for a fixed power the rate grows as the TPA approaches the
  BD, so the optimum is the point nearest to ``x_b`` inside the SNR interval
  and outside the covert exclusion zone around the BD.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .channel import LinkBudget, PowerConfig, RfConstants, backscatter_budget
from .detection import (
    EveUncertainty,
    NoiseUncertainty,
    UncertaintyRegionError,
    backscatter_excess,
    min_dep_raw,
    worst_case_eve_gain,
)
from .geometry import Scenario, link_distances, tpa_bd_distance
from .units import watts_to_dbm

DEFAULT_TOL = 1e-3  # bits/s
DEFAULT_MAX_ITER = 50
CHECK_RTOL = 1e-9


class Binding(str, enum.Enum):
    COVERTNESS = "covertness"
    POWER_BUDGET = "power_budget"
    RELIABILITY = "reliability"
    POSITION_BOX = "position_box"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class CovertnessSpec:
    """Eve's worst-case minimum DEP must stay at or above ``1 - epsilon``."""

    epsilon: float = 0.05

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")

    def xi(self, noise: NoiseUncertainty) -> float:
        """Backscatter power Eve may receive while covertness still holds.

        Equal to ``x_hi * rho**(-2 (1 - eps)) - x_lo``; written via expm1 to
        keep precision for small epsilon.
        """
        return noise.x_lo * math.expm1(2.0 * self.epsilon * noise.log_rho)


@dataclass(frozen=True)
class ReliabilitySpec:
    gamma_th: float = 1.0  # linear SNR floor, 0 dB

    def __post_init__(self):
        if self.gamma_th < 0:
            raise ValueError("gamma_th must be non-negative")


def delta3_value(y_t: float, y_b: float, height: float, form: str = "derived") -> float:
    """Constant offset in the TPA position radicands.

    ``derived`` is the lateral plus vertical squared offset of the TPA above
    the BD; ``printed`` keeps the alternative ``(y_t + y_b)^2 - H^2`` for
    diagnostics.
    """
    if form == "printed":
        return (y_t + y_b) ** 2 - height**2
    if form == "derived":
        return (y_t - y_b) ** 2 + height**2
    raise ValueError(f"unknown delta3 form {form!r}")


@dataclass(frozen=True)
class System:
    """Everything one solve needs.  ``power.p0`` is ignored by the solvers."""

    scenario: Scenario
    rf: RfConstants
    power: PowerConfig
    noise: NoiseUncertainty
    eve: EveUncertainty
    covertness: CovertnessSpec
    reliability: ReliabilitySpec
    delta3_form: str = "derived"

    def __post_init__(self):
        if self.delta3_form not in ("derived", "printed"):
            raise ValueError(f"delta3_form must be 'derived' or 'printed', got {self.delta3_form!r}")

    @cached_property
    def worst_gain(self) -> float:
        """Worst-case BD-to-Eve gain; infinite when Eve may sit on the BD."""
        lay = self.scenario.layout
        try:
            return worst_case_eve_gain(lay.bd, lay.eve_estimate, self.eve, self.rf)
        except UncertaintyRegionError:
            return math.inf

    @cached_property
    def xi(self) -> float:
        return self.covertness.xi(self.noise)

    @cached_property
    def d_b_pR(self) -> float:
        return link_distances(self.scenario).d_b_pR

    @property
    def length(self) -> float:
        return self.scenario.room.length

    @property
    def x_b(self) -> float:
        return self.scenario.layout.bd[0]

    @property
    def delta3(self) -> float:
        _, yb, _ = self.scenario.layout.bd
        return delta3_value(self.scenario.waveguides.y_t, yb, self.scenario.room.height, self.delta3_form)

    def d_pT_b(self, tpa_x):
        return tpa_bd_distance(tpa_x, self.scenario)

    def budget(self, p0: float, tpa_x: float) -> LinkBudget:
        return backscatter_budget(p0, float(self.d_pT_b(tpa_x)), self.d_b_pR, self.power, self.rf)

    def covert_dep(self, p0, tpa_x):
        """Unclamped worst-case minimum DEP at ``(p0, tpa_x)`` (array friendly)."""
        p0 = np.asarray(p0, dtype=float)
        with np.errstate(invalid="ignore"):
            excess = backscatter_excess(p0, self.d_pT_b(tpa_x), self.worst_gain, self.power, self.rf)
        # no transmission leaks nothing, even towards an unbounded gain
        excess = np.where((p0 == 0) | (self.power.reflect_gain == 0), 0.0, excess)
        return min_dep_raw(excess, self.noise)


class PowerBounds(NamedTuple):
    p_snr: float
    p_covert: float


class PositionBounds(NamedTuple):
    snr_lo: Optional[float]
    snr_hi: Optional[float]
    covert_lo: Optional[float]
    covert_hi: Optional[float]


@dataclass
class SolveResult:
    p0_opt: float
    tpa_x_opt: float
    rate: float
    feasible: bool
    iterations: int
    trace: list[tuple[float, float, float]] = field(default_factory=list)
    binding_constraint: Binding = Binding.INFEASIBLE

    @property
    def p0_dbm(self) -> float:
        return float(watts_to_dbm(self.p0_opt)) if self.p0_opt > 0 else -math.inf


class ConstraintCheck(NamedTuple):
    reliability: bool
    covertness: bool
    power_budget: bool
    position_box: bool

    @property
    def all(self) -> bool:
        return all(self)


def power_bounds(tpa_x: float, system: System) -> PowerBounds:
    """SNR floor and covertness cap on ``P0`` at a fixed TPA position."""
    zk = system.power.reflect_gain
    eta = system.rf.eta
    gamma = system.reliability.gamma_th
    d_t = float(system.d_pT_b(tpa_x))
    if zk == 0:
        return PowerBounds(0.0 if gamma == 0 else math.inf, math.inf)
    p_snr = gamma * system.power.noise_rpa * (d_t * system.d_b_pR) ** 2 / (zk * eta**2)
    p_cov = system.xi * d_t**2 / (zk * eta * system.worst_gain)
    return PowerBounds(p_snr, p_cov)


def solve_power(tpa_x: float, system: System) -> Optional[float]:
    """Optimal transmit power at a fixed TPA position, ``None`` if infeasible."""
    if system.xi <= 0:
        return None
    p_snr, p_cov = power_bounds(tpa_x, system)
    cap = min(system.power.p_max, p_cov)
    if p_snr > cap:
        return None
    return cap


def _half_width(radicand: float) -> Optional[float]:
    return math.sqrt(radicand) if radicand >= 0 else None


def position_bounds(p0: float, system: System) -> PositionBounds:
    """SNR interval and covert exclusion zone for the TPA at fixed ``p0``.

    A ``None`` pair means the corresponding radicand is negative: an empty
    SNR interval, or no exclusion zone at all.
    """
    zk = system.power.reflect_gain
    eta = system.rf.eta
    gamma = system.reliability.gamma_th
    d3 = system.delta3
    xb = system.x_b

    if gamma == 0:
        snr_rad = math.inf
    else:
        snr_rad = zk * p0 * eta**2 / (gamma * system.power.noise_rpa * system.d_b_pR**2) - d3
    if zk * p0 == 0:
        cov_rad = -d3
    elif system.xi <= 0:
        cov_rad = math.inf
    else:
        cov_rad = zk * eta * p0 * system.worst_gain / system.xi - d3

    s = _half_width(snr_rad)
    c = _half_width(cov_rad)
    return PositionBounds(
        None if s is None else xb - s,
        None if s is None else xb + s,
        None if c is None else xb - c,
        None if c is None else xb + c,
    )


def _nearest_outside(lo: float, hi: float, cov_lo: float, cov_hi: float, xb: float) -> Optional[float]:
    """Point of ``[lo, hi]`` minus ``(cov_lo, cov_hi)`` nearest to ``xb``."""
    candidates = [min(max(xb, lo), hi), lo, hi, cov_lo, cov_hi]
    ok = [x for x in candidates if lo <= x <= hi and not cov_lo < x < cov_hi]
    if not ok:
        return None
    return min(ok, key=lambda x: (abs(x - xb), x))


def solve_position(p0: float, system: System) -> Optional[float]:
    """Optimal TPA position at fixed power, ``None`` if no position is feasible."""
    b = position_bounds(p0, system)
    if b.snr_lo is None:
        return None
    lo = max(0.0, b.snr_lo)
    hi = min(system.length, b.snr_hi)
    if lo > hi:
        return None
    xb = system.x_b
    if b.covert_lo is None:
        return min(max(xb, lo), hi)
    # the two exclusion edges are equidistant from x_b; the lower one wins ties
    if lo <= b.covert_lo <= hi:
        return b.covert_lo
    if lo <= b.covert_hi <= hi:
        return b.covert_hi
    return _nearest_outside(lo, hi, b.covert_lo, b.covert_hi, xb)


def check_constraints(p0: float, tpa_x: float, system: System, rtol: float = CHECK_RTOL) -> ConstraintCheck:
    gamma = system.reliability.gamma_th
    snr = system.budget(p0, tpa_x).snr
    target = 1.0 - system.covertness.epsilon
    dep = float(system.covert_dep(p0, tpa_x))
    p_max = system.power.p_max
    return ConstraintCheck(
        reliability=snr >= gamma * (1 - rtol),
        covertness=dep >= target - rtol * max(target, 1e-300),
        power_budget=-rtol * p_max <= p0 <= p_max * (1 + rtol),
        position_box=0.0 <= tpa_x <= system.length,
    )


def _binding(p0: float, tpa_x: float, system: System) -> Binding:
    p_snr, p_cov = power_bounds(tpa_x, system)
    if math.isfinite(p_cov) and abs(p0 - p_cov) <= CHECK_RTOL * max(p_cov, 1e-300):
        return Binding.COVERTNESS
    if abs(p0 - system.power.p_max) <= CHECK_RTOL * system.power.p_max:
        return Binding.POWER_BUDGET
    if abs(p0 - p_snr) <= CHECK_RTOL * max(p_snr, 1e-300):
        return Binding.RELIABILITY
    return Binding.POSITION_BOX


def _infeasible(tpa_x: float, iterations: int, trace) -> SolveResult:
    return SolveResult(0.0, float(tpa_x), 0.0, False, iterations, trace, Binding.INFEASIBLE)


def _finish(p0: float, tpa_x: float, iterations: int, trace, system: System) -> SolveResult:
    if not check_constraints(p0, tpa_x, system).all:
        return _infeasible(tpa_x, iterations, trace)
    rate = system.budget(p0, tpa_x).rate
    return SolveResult(p0, tpa_x, rate, True, iterations, trace, _binding(p0, tpa_x, system))


def _snr_best_position(system: System) -> Optional[float]:
    b = position_bounds(system.power.p_max, system)
    if b.snr_lo is None:
        return None
    lo, hi = max(0.0, b.snr_lo), min(system.length, b.snr_hi)
    if lo > hi:
        return None
    return min(max(system.x_b, lo), hi)


def solve_ao(
    system: System,
    init_p0: Optional[float] = None,
    init_x: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveResult:
    """Alternate the power and position steps until the rate settles.

    Starts from ``(p_max / 4, L / 4)`` unless told otherwise.  If the power
    step is infeasible at the starting position, the position is re-seeded
    once at the SNR-best point for full power, the only place where a
    feasible power can exist if one exists anywhere.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    p = system.power.p_max / 4 if init_p0 is None else float(init_p0)
    x = system.length / 4 if init_x is None else float(init_x)

    prev = system.budget(p, x).rate if check_constraints(p, x, system).all else math.nan
    trace: list[tuple[float, float, float]] = []
    for k in range(1, max_iter + 1):
        p_new = solve_power(x, system)
        if p_new is None and k == 1:
            x_seed = _snr_best_position(system)
            if x_seed is not None:
                x = x_seed
                p_new = solve_power(x, system)
        if p_new is None:
            return _infeasible(x, k, trace)
        x_new = solve_position(p_new, system)
        if x_new is None:
            # the current position stays feasible for p_new; keep it
            x_new = x
        rate = system.budget(p_new, x_new).rate
        trace.append((p_new, x_new, rate))
        p, x = p_new, x_new
        if abs(rate - prev) < tol:
            break
        prev = rate
    return _finish(p, x, len(trace), trace, system)


def solve_baseline(fixed_x: float, system: System) -> SolveResult:
    """Power-only optimisation with the TPA pinned at ``fixed_x``."""
    if not 0.0 <= fixed_x <= system.length:
        raise ValueError(f"fixed_x={fixed_x} outside [0, {system.length}]")
    p = solve_power(fixed_x, system)
    if p is None:
        return _infeasible(fixed_x, 1, [])
    rate = system.budget(p, fixed_x).rate
    return _finish(p, float(fixed_x), 1, [(p, float(fixed_x), rate)], system)
