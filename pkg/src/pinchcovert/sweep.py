"""Parameter sweeps: AO plus the three fixed-position baselines per point.

Sweep files use the same ``key = value`` layout as scenario files::

    name = fig3a
    variable = d_b_e
    values = linspace(1, 10, 19)
    curve.chi0_d01 = chi = 0; delta = 0.1
    curve.chi2_d03 = chi = 2; delta = 0.3

Sweep values are in the variable's natural unit: metres for ``d_b_e`` and
``chi``, dBm for ``p_max``, ``sigma_e_nominal`` and ``sigma_p``, plain
numbers for ``delta`` and ``epsilon``.
"""
from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import Config, ConfigError, parse_value
from .optimizer import SolveResult, solve_ao, solve_baseline

SWEEP_UNITS = {
    "d_b_e": "m",
    "chi": "m",
    "delta": "",
    "p_max": "dBm",
    "sigma_e_nominal": "dBm",
    "epsilon": "",
    "sigma_p": "dBm",
}
ALGOS = ("ao", "baseline_x0", "baseline_xL4", "baseline_xL2")
BASELINE_FRACTIONS = {"baseline_x0": 0.0, "baseline_xL4": 0.25, "baseline_xL2": 0.5}
CSV_HEADER = ["sweep_value", "curve_id", "algo", "p0_opt_dbm", "tpa_x_m", "rate_bps", "feasible"]

_LINSPACE_RE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*(\d+)\s*\)$")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple[float, ...]
    curves: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = (("default", ()),)
    name: str = "sweep"

    def __post_init__(self):
        if self.variable not in SWEEP_UNITS:
            raise ConfigError(f"sweep variable {self.variable!r} not one of {sorted(SWEEP_UNITS)}")
        if not self.values:
            raise ConfigError("sweep values list is empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if not self.curves:
            raise ConfigError("sweep needs at least one curve")
        for curve_id, overrides in self.curves:
            for key, value in overrides:
                parse_value(key, value)  # raises on a bad key or value
            if not re.fullmatch(r"[\w.\-]+", curve_id):
                raise ConfigError(f"bad curve id {curve_id!r}")

    def point_config(self, base: Config, curve: int, value: float) -> Config:
        _, overrides = self.curves[curve]
        cfg = base.with_text_overrides(dict(overrides))
        unit = SWEEP_UNITS[self.variable]
        return cfg.replace(**{self.variable: parse_value(self.variable, f"{value!r} {unit}")})


def _parse_values(text: str) -> tuple[float, ...]:
    m = _LINSPACE_RE.match(text.strip())
    if m:
        lo, hi, n = float(m.group(1)), float(m.group(2)), int(m.group(3))
        return tuple(float(v) for v in np.linspace(lo, hi, n))
    if not text.strip():
        return ()
    return tuple(float(v) for v in text.split(","))


def _parse_overrides(text: str) -> tuple[tuple[str, str], ...]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        key, sep, value = (s.strip() for s in item.partition("="))
        if not sep:
            raise ConfigError(f"curve override {item!r} is not 'key = value'")
        out.append((key, value))
    return tuple(out)


def parse_sweep(text: str) -> SweepSpec:
    fields: dict[str, str] = {}
    curves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise ConfigError(f"sweep line {lineno}: expected 'key = value'")
        try:
            if key.startswith("curve."):
                curves.append((key[len("curve."):], _parse_overrides(value)))
            elif key in ("name", "variable", "values"):
                fields[key] = value
            else:
                raise ConfigError(f"unknown sweep key {key!r}")
        except (ConfigError, ValueError) as exc:
            raise ConfigError(f"sweep line {lineno}: {exc}") from None
    if "variable" not in fields or "values" not in fields:
        raise ConfigError("sweep file needs 'variable' and 'values'")
    try:
        values = _parse_values(fields["values"])
    except ValueError as exc:
        raise ConfigError(f"bad sweep values: {exc}") from None
    return SweepSpec(
        variable=fields["variable"],
        values=values,
        curves=tuple(curves) or (("default", ()),),
        name=fields.get("name", "sweep"),
    )


def load_sweep(path) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_sweep(fh.read())


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    curve_id: str
    algo: str
    result: SolveResult = field(compare=False)

    def csv_fields(self) -> list[str]:
        r = self.result
        return [
            repr(float(self.sweep_value)),
            self.curve_id,
            self.algo,
            repr(float(r.p0_dbm)) if r.feasible and r.p0_opt > 0 else "",
            repr(float(r.tpa_x_opt)),
            repr(float(r.rate)),
            "true" if r.feasible else "false",
        ]


def _solve_point(base: Config, spec: SweepSpec, curve: int, value: float) -> dict[str, SolveResult]:
    cfg = spec.point_config(base, curve, value)
    system = cfg.to_system()
    out = {"ao": solve_ao(system, tol=cfg.ao_tol, max_iter=cfg.ao_max_iter)}
    for algo, frac in BASELINE_FRACTIONS.items():
        out[algo] = solve_baseline(frac * system.length, system)
    return out


def run_sweep(base: Config, spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Solve every (curve, value) point; rows come back ordered by
    (curve, algo, value) regardless of worker count."""
    tasks = [(c, v) for c in range(len(spec.curves)) for v in spec.values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _solve_point(base, spec, *t), tasks))
    else:
        results = [_solve_point(base, spec, *t) for t in tasks]
    by_task = dict(zip(tasks, results))
    rows = []
    for c, (curve_id, _) in enumerate(spec.curves):
        for algo in ALGOS:
            for v in spec.values:
                rows.append(SweepRow(v, curve_id, algo, by_task[(c, v)][algo]))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
