from pathlib import Path

import pytest

from pinchcovert.config import Config, load_config

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"


@pytest.fixture
def fig3a_config() -> Config:
    return load_config(SCENARIOS / "fig3a.conf")


@pytest.fixture
def fig3a_system(fig3a_config):
    return fig3a_config.to_system()


def random_config(rng, attempts: int = 100) -> Config:
    """A random but physically sensible scenario (may or may not be feasible)."""
    from pinchcovert.config import ConfigError
    from pinchcovert.units import db_to_linear, dbm_to_watts

    for _ in range(attempts):
        length = rng.uniform(10.0, 30.0)
        cfg = Config(
            length=length,
            width=rng.uniform(8.0, 30.0),
            height=rng.uniform(2.5, 4.0),
            y_t=rng.uniform(-2.0, 2.0),
            y_r=rng.uniform(-2.0, 2.0),
            bd_x=rng.uniform(0.2, 0.8) * length,
            bd_y=rng.uniform(-2.0, 2.0),
            d_b_e=rng.uniform(2.0, 10.0),
            eve_angle=rng.uniform(0.0, 360.0),
            rpa_x=rng.uniform(0.0, length),
            p_max=float(dbm_to_watts(rng.uniform(30.0, 50.0))),
            sigma_p=float(dbm_to_watts(rng.uniform(-120.0, -106.0))),
            gamma_th=float(db_to_linear(rng.uniform(-5.0, 5.0))),
            sigma_e_nominal=float(dbm_to_watts(rng.uniform(-95.0, -85.0))),
            rho=float(db_to_linear(rng.uniform(1.0, 5.0))),
            chi=rng.uniform(0.0, 1.5),
            delta=rng.uniform(0.0, 0.4),
            epsilon=rng.uniform(0.01, 0.3),
        )
        try:
            cfg.to_system()
        except ConfigError:
            continue
        return cfg
    raise RuntimeError("could not draw a valid scenario")


# acceptance bookkeeping: criterion -> [(check, passed, detail)]
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, check: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((check, bool(passed), detail))
    print(f"criterion {criterion} [{check}]: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[crit]
        failed = [c for c, ok, _ in checks if not ok]
        status = "FAIL" if failed else "PASS"
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{status} criterion {crit}: {len(checks) - len(failed)}/{len(checks)} checks passed{extra}")
