"""Pytest configuration and fixtures."""

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from dirac_ist.core.config import GaussianSpec, PotentialSpec, ScenarioConfig
from dirac_ist.models.fields import Grid2D, LaxParameters, Potential
from dirac_ist.services.potentials import build_potential, gaussian_field

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def config_dir() -> Path:
    """Directory of the example scenario files.

    Returns:
        Path to ``configs/``
    """
    return CONFIG_DIR


@pytest.fixture(scope="session")
def params() -> LaxParameters:
    """Default Lax parameters b = (1, 0, -1).

    Returns:
        LaxParameters instance
    """
    return LaxParameters(b1=1.0, b2=0.0, b3=-1.0)


@pytest.fixture(scope="session")
def grid32() -> Grid2D:
    """Coarse grid on [-4, 4]^2.

    Returns:
        Grid with n = 32
    """
    return Grid2D(-4.0, 4.0, -4.0, 4.0, 32)


@pytest.fixture(scope="session")
def grid64() -> Grid2D:
    """Standard grid on [-4, 4]^2.

    Returns:
        Grid with n = 64
    """
    return Grid2D(-4.0, 4.0, -4.0, 4.0, 64)


@pytest.fixture(scope="session")
def potential_factory() -> Callable[..., Potential]:
    """Build tapered Gaussian potentials with a common amplitude.

    Returns:
        Factory ``(grid, amplitude=0.1, fields=("q1", "q2", "q3", "q4")) -> Potential``
    """
    defaults = PotentialSpec()

    def factory(grid: Grid2D, amplitude: float = 0.1, fields=("q1", "q2", "q3", "q4")) -> Potential:
        components = {}
        for name in ("q1", "q2", "q3", "q4"):
            base: GaussianSpec = getattr(defaults, name)
            scale = amplitude if name in fields else 0.0
            components[name] = base.model_copy(update={"amplitude": scale})
        return build_potential(grid, defaults.model_copy(update=components))

    return factory


@pytest.fixture(scope="session")
def gaussian_factory() -> Callable[..., Potential]:
    """Build untapered Gaussian potentials from the default centres.

    Returns:
        Factory ``(grid, amplitude=0.1, shifts=None) -> Potential``; ``shifts`` moves each centre by (dx, dy)
    """
    defaults = PotentialSpec()

    def factory(grid: Grid2D, amplitude: float = 0.1, shifts=None) -> Potential:
        fields = []
        for index, name in enumerate(("q1", "q2", "q3", "q4")):
            base: GaussianSpec = getattr(defaults, name)
            dx, dy = shifts[index] if shifts is not None else (0.0, 0.0)
            spec = base.model_copy(update={"amplitude": amplitude, "x0": base.x0 + dx, "y0": base.y0 + dy})
            fields.append(gaussian_field(grid, spec))
        return Potential.from_fields(grid, np.stack(fields))

    return factory


@pytest.fixture
def scenario() -> Callable[..., ScenarioConfig]:
    """Scenario factory applying dotted overrides to the defaults.

    Returns:
        Factory ``(**sections) -> ScenarioConfig`` where each keyword is a section update
    """

    def factory(**sections: dict) -> ScenarioConfig:
        data = ScenarioConfig().model_dump()
        data["lax"] = {"b1": 1.0, "b2": 0.0, "b3": -1.0}
        for section, update in sections.items():
            data[section].update(update)
        return ScenarioConfig.model_validate(data)

    return factory


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data.

    Returns:
        numpy Generator
    """
    return np.random.default_rng(1234)
