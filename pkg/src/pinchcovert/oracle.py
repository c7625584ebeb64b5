"""Brute-force checks of the closed forms.

Every check here evaluates the problem definition directly on a grid (or by
sampling) and compares with the closed-form answer.  The grids never use the
closed forms they check.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import rate_from_snr
from .detection import NoiseUncertainty, dep_false_alarm, dep_miss, dep_total, monte_carlo_dep, optimal_detection
from .optimizer import SolveResult, System, check_constraints, position_bounds, solve_ao

LEMMA_POINTS = 1_000_000
REFINE_POINTS = 20_001
P1_POINTS = 500


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class OracleVerdict:
    name: str
    closed_form_value: float
    grid_value: float
    abs_gap: float
    rel_gap: float
    grid_resolution: float
    passed: bool
    # optimiser location, when the check compares an argmin/argmax too
    closed_form_arg: Optional[float] = None
    grid_arg: Optional[float] = None
    arg_gap: Optional[float] = None
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        s = (
            f"[{status}] {self.name}: closed={self.closed_form_value:.10g} grid={self.grid_value:.10g} "
            f"abs_gap={self.abs_gap:.3g} rel_gap={self.rel_gap:.3g} resolution={self.grid_resolution:.3g}"
        )
        if self.arg_gap is not None:
            s += f" arg_gap={self.arg_gap:.3g}"
        if self.note:
            s += f" ({self.note})"
        return s


def _gaps(a: float, b: float) -> tuple[float, float]:
    gap = abs(a - b)
    scale = max(abs(a), abs(b))
    return gap, (gap / scale if scale > 0 else 0.0)


def verify_lemma1(
    delta1: float,
    delta2: float,
    model: NoiseUncertainty,
    grid: Optional[GridSpec] = None,
    prob_tol: float = 1e-6,
    refine_points: int = REFINE_POINTS,
) -> OracleVerdict:
    """Grid-minimise the total DEP over the threshold and compare with the
    closed-form optimum.

    A coarse pass over ``grid`` is followed by a second dense pass across the
    two coarse cells around the coarse minimiser.  The threshold check uses the
    coarse step; the threshold gap is measured to the nearest grid point whose
    DEP is within ``prob_tol`` of the grid minimum, so flat minima pass.
    """
    if grid is None:
        grid = GridSpec(model.x_lo + delta1, model.x_hi + delta2, LEMMA_POINTS)
    g = grid.values()
    vals = dep_total(g, delta1, delta2, model)
    i = int(np.argmin(vals))
    fine = np.linspace(g[max(i - 1, 0)], g[min(i + 1, len(g) - 1)], refine_points)
    g = np.concatenate([g, fine])
    vals = np.concatenate([vals, dep_total(fine, delta1, delta2, model)])

    j = int(np.argmin(vals))
    grid_min, grid_arg = float(vals[j]), float(g[j])
    threshold, p_star = optimal_detection(delta1, delta2, model)
    near = g[vals <= grid_min + prob_tol]
    arg_gap = float(np.min(np.abs(near - threshold)))
    abs_gap, rel_gap = _gaps(p_star, grid_min)
    return OracleVerdict(
        name="lemma1",
        closed_form_value=p_star,
        grid_value=grid_min,
        abs_gap=abs_gap,
        rel_gap=rel_gap,
        grid_resolution=grid.step,
        passed=abs_gap <= prob_tol and arg_gap <= grid.step,
        closed_form_arg=threshold,
        grid_arg=grid_arg,
        arg_gap=arg_gap,
    )


@dataclass(frozen=True)
class P1Grid:
    best_rate: Optional[float]
    best_power: Optional[float]
    best_x: Optional[float]
    feasible_points: int


def grid_p1(system: System, power_grid: GridSpec, pos_grid: GridSpec) -> P1Grid:
    """Exact constraint and rate evaluation at every (power, position) node."""
    P, X = np.meshgrid(power_grid.values(), pos_grid.values(), indexing="ij")
    pw, rf = system.power, system.rf
    d_t = system.d_pT_b(X)
    # received power from the link equations, no bound algebra
    pa = pw.reflect_gain * (P * rf.eta / d_t**2) * rf.eta / system.d_b_pR**2
    snr = pa / pw.noise_rpa
    dep = system.covert_dep(P, X)
    ok = (
        (snr >= system.reliability.gamma_th)
        & (dep >= 1.0 - system.covertness.epsilon)
        & (P >= 0) & (P <= pw.p_max)
        & (X >= 0) & (X <= system.length)
    )
    n = int(np.count_nonzero(ok))
    if n == 0:
        return P1Grid(None, None, None, 0)
    rate = np.where(ok, rate_from_snr(snr, pw.bandwidth), -np.inf)
    k = np.unravel_index(int(np.argmax(rate)), rate.shape)
    return P1Grid(float(rate[k]), float(P[k]), float(X[k]), n)


def _discretisation_slack(res: SolveResult, system: System, dp: float, dx: float) -> float:
    """Rate lost by backing the AO point off one grid cell in power and one
    cell away from the BD, provided that cell stays reliable."""
    p = max(res.p0_opt - dp, 0.0)
    away = 1.0 if res.tpa_x_opt >= system.x_b else -1.0
    x = min(max(res.tpa_x_opt + away * dx, 0.0), system.length)
    if system.budget(p, x).snr < system.reliability.gamma_th:
        return res.rate
    return res.rate - system.budget(p, x).rate


def verify_p1(
    system: System,
    power_grid: Optional[GridSpec] = None,
    pos_grid: Optional[GridSpec] = None,
    ao: Optional[SolveResult] = None,
) -> OracleVerdict:
    if power_grid is None:
        power_grid = GridSpec(0.0, system.power.p_max, P1_POINTS)
    if pos_grid is None:
        pos_grid = GridSpec(0.0, system.length, P1_POINTS)
    if ao is None:
        ao = solve_ao(system)
    grid = grid_p1(system, power_grid, pos_grid)
    resolution = max(power_grid.step, pos_grid.step)

    if grid.best_rate is None:
        return OracleVerdict(
            "p1", ao.rate, 0.0, ao.rate, 1.0 if ao.rate else 0.0, resolution, passed=True,
            note="no feasible grid node" + ("" if not ao.feasible else "; AO feasible on a sub-grid region"),
        )
    if not ao.feasible:
        return OracleVerdict(
            "p1", 0.0, grid.best_rate, grid.best_rate, 1.0, resolution, passed=False,
            note="AO reports infeasible but the grid found feasible points",
        )
    exact = check_constraints(ao.p0_opt, ao.tpa_x_opt, system).all
    slack = _discretisation_slack(ao, system, power_grid.step, pos_grid.step)
    not_beaten = grid.best_rate <= ao.rate * (1 + 1e-9) + 1e-9
    close = ao.rate - grid.best_rate <= slack * (1 + 1e-9) + 1e-9
    abs_gap, rel_gap = _gaps(ao.rate, grid.best_rate)
    return OracleVerdict(
        "p1", ao.rate, grid.best_rate, abs_gap, rel_gap, resolution,
        passed=bool(exact and not_beaten and close),
        closed_form_arg=ao.tpa_x_opt, grid_arg=grid.best_x, arg_gap=abs(ao.tpa_x_opt - grid.best_x),
        note=f"slack={slack:.4g} bits/s, constraints exact={exact}",
    )


def _transitions(x: np.ndarray, mask: np.ndarray) -> list[float]:
    flips = np.nonzero(mask[1:] != mask[:-1])[0]
    return [float(0.5 * (x[i] + x[i + 1])) for i in flips]


@dataclass(frozen=True)
class BoundaryMatch:
    form: str
    closed_form: list[float]
    grid: list[float]
    max_gap: float
    matches: bool


@dataclass(frozen=True)
class Delta3Comparison:
    p0: float
    step: float
    radicand_shift: float
    derived: BoundaryMatch
    printed: BoundaryMatch
    p1_derived: OracleVerdict
    p1_printed: OracleVerdict
    selected_form: str

    @property
    def passed(self) -> bool:
        return getattr(self, self.selected_form).matches

    def lines(self) -> list[str]:
        out = []
        for m in (self.derived, self.printed):
            tag = "match" if m.matches else "MISMATCH"
            out.append(
                f"  delta3 {m.form:8s} {tag}: closed-form bounds {[round(v, 6) for v in m.closed_form]} "
                f"vs grid {[round(v, 6) for v in m.grid]} (max gap {m.max_gap:.3g}, step {self.step:.3g})"
            )
        out.append(f"  radicand shift derived - printed = {self.radicand_shift:.6g} m^2")
        return out


def _match_boundaries(form: str, closed: list[float], grid: list[float], step: float) -> BoundaryMatch:
    if len(closed) != len(grid):
        return BoundaryMatch(form, closed, grid, math.inf, False)
    gap = max((abs(a - b) for a, b in zip(sorted(closed), sorted(grid))), default=0.0)
    return BoundaryMatch(form, closed, grid, gap, gap <= step)


def verify_delta3_variants(system: System, points: int = 100_001, p0: Optional[float] = None) -> Delta3Comparison:
    """Compare the closed-form TPA position bounds under both Delta3 forms
    with the feasibility boundary of a dense position grid at fixed power."""
    derived_sys = dataclasses.replace(system, delta3_form="derived")
    printed_sys = dataclasses.replace(system, delta3_form="printed")
    if p0 is None:
        ao = solve_ao(derived_sys)
        p0 = ao.p0_opt if ao.feasible and ao.p0_opt > 0 else system.power.p_max

    grid = GridSpec(0.0, system.length, points)
    x = grid.values()
    snr = system.power.reflect_gain * p0 * system.rf.eta**2 / (system.d_pT_b(x) * system.d_b_pR) ** 2
    snr_ok = snr / system.power.noise_rpa >= system.reliability.gamma_th
    cov_ok = system.covert_dep(np.full_like(x, p0), x) >= 1.0 - system.covertness.epsilon
    grid_edges = sorted(_transitions(x, snr_ok) + _transitions(x, cov_ok))

    matches = {}
    for name, s in (("derived", derived_sys), ("printed", printed_sys)):
        b = position_bounds(p0, s)
        closed = sorted(v for v in b if v is not None and 0.0 < v < system.length)
        matches[name] = _match_boundaries(name, closed, grid_edges, grid.step)

    return Delta3Comparison(
        p0=p0,
        step=grid.step,
        radicand_shift=derived_sys.delta3 - printed_sys.delta3,
        derived=matches["derived"],
        printed=matches["printed"],
        p1_derived=verify_p1(derived_sys),
        p1_printed=verify_p1(printed_sys),
        selected_form=system.delta3_form,
    )


def verify_monte_carlo(
    gamma: float,
    delta1: float,
    delta2: float,
    model: NoiseUncertainty,
    n: int,
    seed: int = 42,
    tol: Optional[float] = None,
) -> tuple[OracleVerdict, OracleVerdict]:
    """Empirical false-alarm / miss rates against their closed forms.

    Default tolerance ``5 / sqrt(n)`` bounds the binomial 3-sigma band
    (0.005 at one million draws).
    """
    if tol is None:
        tol = 5.0 / math.sqrt(n) if n > 0 else math.inf
    pf_emp, pm_emp = monte_carlo_dep(gamma, delta1, delta2, model, n, seed)
    out = []
    for name, emp, exact in (
        ("false_alarm", pf_emp, float(dep_false_alarm(gamma, delta1, model))),
        ("miss", pm_emp, float(dep_miss(gamma, delta2, model))),
    ):
        abs_gap, rel_gap = _gaps(exact, emp)
        out.append(OracleVerdict(f"monte_carlo_{name}", exact, emp, abs_gap, rel_gap, tol, abs_gap <= tol, note=f"n={n}"))
    return out[0], out[1]
