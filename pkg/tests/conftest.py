"""Shared helpers for the test suite."""

import numpy as np
import pytest

from mfikit.frontend import to_symbol_rate
from mfikit.sim import ImpairmentSpec, ModFormat, simulate_link


def received_symbols(
    fmt: ModFormat,
    osnr_db: float,
    seed: int,
    n: int = 65536,
    linewidth_hz: float = 200e3,
    cd_ps_nm: float = 0.0,
) -> np.ndarray:
    """Simulate one capture and bring it back to symbol rate."""
    spec = ImpairmentSpec(
        osnr_db=osnr_db,
        linewidth_hz=linewidth_hz,
        applied_cd_ps_nm=cd_ps_nm,
        seed=seed,
    )
    frame = simulate_link(fmt, n, spec)
    return to_symbol_rate(frame)


@pytest.fixture(scope="session")
def rng_factory():
    def make(seed: int) -> np.random.Generator:
        return np.random.default_rng(seed)

    return make
