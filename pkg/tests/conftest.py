from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest
from scipy.special import wofz

from resonance_kit import bundled_model, locate_resonances

# reference zero of det L₊ for the bundled scalar model (g = 0.1, λ₀ = 1),
# computed from the Faddeeva closed form in test_resonance.py
ZETA_SCALAR = 1.0192693750234245 - 0.011077986399268925j

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def model(name: str):
    return bundled_model(name)


@lru_cache(maxsize=None)
def located(name: str):
    m = model(name)
    return locate_resonances(m)


def faddeeva_L(z, g=0.1, lam0=1.0):
    """Scalar Gaussian model ``M = g e^{-λ²/2}``: ``L₊(z) = z - λ₀ + iπ g² w(z)``."""
    z = np.asarray(z, dtype=complex)
    return z - lam0 + 1j * np.pi * g * g * wofz(z)


def faddeeva_dL(z, g=0.1):
    z = np.asarray(z, dtype=complex)
    return 1 + 1j * np.pi * g * g * (-2 * z * wofz(z) + 2j / np.sqrt(np.pi))


@pytest.fixture(scope="session")
def scalar():
    return model("scalar")


@pytest.fixture(scope="session")
def two_channel():
    return model("two_channel")


@pytest.fixture(scope="session")
def coupled():
    return model("coupled")


@pytest.fixture(scope="session")
def scalar_res():
    return located("scalar")


@pytest.fixture(scope="session")
def two_channel_res():
    return located("two_channel")


@pytest.fixture(scope="session")
def coupled_res():
    return located("coupled")


@pytest.fixture
def record():
    """Store one acceptance verdict for the terminal summary."""

    def _record(num: int, ok: bool, detail: str):
        ACCEPTANCE[num] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
