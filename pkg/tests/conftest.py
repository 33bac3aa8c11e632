import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_rotvec(rng, max_angle=np.pi - 1e-3):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return axis * rng.uniform(0.0, max_angle)


def noise_free_frames(r0, omega_fn, h, steps, e, bias=(0.0, 0.0, 0.0)):
    """Truth attitudes and exact measurement frames for a prescribed body rate."""
    from geoest import dynamics as dy
    from geoest import measurement as ms
    ts, rs, om = dy.integrate_attitude(r0, omega_fn, h, steps)
    frames = ms.generate_stream(ts, rs, om, e, ms.NoiseModel(), ms.GyroNoiseModel(bias=bias), 0)
    return rs, frames


ACCEPTANCE_LINES: list[str] = []


def record(cid: str, ok: bool, detail: str) -> None:
    """Print and keep one PASS/FAIL line for an acceptance criterion, then assert it."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {cid}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
