"""Tests for the time evolution of scattering data."""

from typing import Callable

import numpy as np
import pytest

from dirac_ist.core.config import ScenarioConfig
from dirac_ist.core.exceptions import ValidationException, WindowOverflowException
from dirac_ist.models.fields import Grid2D, KernelAxis, LaxParameters, Potential
from dirac_ist.services.convergence import refinement_study
from dirac_ist.services.direct_scattering import ScatteringData, born_kernels
from dirac_ist.services.spectral_evolution import (
    EvolutionOperator,
    departing_max,
    evolve,
    required_padding,
    transport_residual,
)


@pytest.fixture(scope="module")
def padded64(potential_factory: Callable[..., Potential], grid64: Grid2D) -> ScatteringData:
    """First-order kernels on a padded axis, room for |t| <= 1.

    Args:
        potential_factory: Potential factory fixture
        grid64: Grid fixture

    Returns:
        Scattering data
    """
    pot = potential_factory(grid64, amplitude=0.2)
    return born_kernels(pot, KernelAxis.for_grid(grid64, padding=12))


@pytest.mark.unit
def test_zero_time_returns_input(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test evolving by zero is the identity.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    assert evolve(padded64, params, 0.0) is padded64


@pytest.mark.unit
def test_shifts_follow_the_transport_equations(params: LaxParameters) -> None:
    """Test the physical argument shifts of each kernel.

    Args:
        params: Lax parameters fixture
    """
    shifts = EvolutionOperator(params, 0.5).shifts()

    assert shifts == {
        "F13": (0.5, 0.5),
        "F23": (0.0, 0.5),
        "G31": (0.5, 0.5),
        "G32": (0.5, 0.0),
    }


@pytest.mark.unit
def test_node_shifts_move_tables_exactly(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test a time of two grid steps moves every table by whole nodes.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    h = padded64.axis.h
    moved = evolve(padded64, params, 2.0 * h)

    np.testing.assert_allclose(moved.f13[:-2, :-2], padded64.f13[2:, 2:], atol=1e-11)
    np.testing.assert_allclose(moved.f23[:, :-2], padded64.f23[:, 2:], atol=1e-11)
    np.testing.assert_allclose(moved.g31[:-2, :-2], padded64.g31[2:, 2:], atol=1e-11)
    np.testing.assert_allclose(moved.g32[:-2, :], padded64.g32[2:, :], atol=1e-11)
    assert moved.t == pytest.approx(2.0 * h)


@pytest.mark.unit
def test_evolution_composes(params: LaxParameters) -> None:
    """Test evolving smooth tables by t1 then t2 matches evolving by t1 + t2.

    Args:
        params: Lax parameters fixture
    """
    grid = Grid2D(-4.0, 4.0, -4.0, 4.0, 128)
    axis = KernelAxis.for_grid(grid, padding=12)
    A, B = np.meshgrid(axis.nodes, axis.nodes, indexing="ij")
    centres = [(0.5, -0.3, 0.0), (-0.4, 0.2, 0.7), (0.1, 0.6, -1.2), (-0.6, -0.5, 2.0)]
    tables = [np.exp(-((A - a) ** 2 + (B - b) ** 2) / 1.5 ** 2 + 1j * phase) for a, b, phase in centres]
    scat = ScatteringData(axis, grid, *tables)

    once = evolve(scat, params, 0.58)
    twice = evolve(evolve(scat, params, 0.37), params, 0.21)

    for a, b in zip(once.tables, twice.tables):
        assert np.abs(a - b).max() < 1e-6
    assert np.abs(once.f13 - scat.f13).max() > 0.1


@pytest.mark.unit
def test_backward_evolution_inverts(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test evolving forward then backward by whole nodes restores the data.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    t = 3.0 * padded64.axis.h
    restored = evolve(evolve(padded64, params, t), params, -t)

    for a, b in zip(restored.tables, padded64.tables):
        np.testing.assert_allclose(a, b, atol=1e-11)
    assert restored.t == pytest.approx(0.0, abs=1e-15)


@pytest.mark.unit
def test_thread_independent(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test the tables do not depend on the thread count.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    serial = evolve(padded64, params, 0.3, threads=1)
    threaded = evolve(padded64, params, 0.3, threads=4)

    for a, b in zip(serial.tables, threaded.tables):
        np.testing.assert_array_equal(a, b)


@pytest.mark.unit
def test_window_overflow(
    grid64: Grid2D, potential_factory: Callable[..., Potential], params: LaxParameters
) -> None:
    """Test long times on an unpadded axis push kernel mass out of the window.

    Args:
        grid64: Grid fixture
        potential_factory: Potential factory fixture
        params: Lax parameters fixture
    """
    scat = born_kernels(potential_factory(grid64))

    with pytest.raises(WindowOverflowException) as exc_info:
        evolve(scat, params, 6.0)

    assert exc_info.value.details["t"] == 6.0


@pytest.mark.unit
def test_departing_max() -> None:
    """Test only the nodes a shift pushes out are inspected."""
    table = np.zeros((10, 10), dtype=complex)
    table[9, 4] = 2.0
    table[0, 0] = 1.0

    assert departing_max(table, (1.5, 0.0)) == 2.0
    assert departing_max(table, (0.0, -0.5)) == 1.0
    assert departing_max(table, (-0.5, 0.0)) == 1.0
    assert departing_max(table, (0.0, 0.0)) == 0.0


@pytest.mark.unit
@pytest.mark.parametrize("t, h, expected", [(0.0, 0.25, 0), (0.5, 0.25, 5), (-0.5, 0.25, 5), (1.0, 0.3, 7)])
def test_required_padding(params: LaxParameters, t: float, h: float, expected: int) -> None:
    """Test padding covers the largest shift plus the spline margin.

    Args:
        params: Lax parameters fixture
        t: Evolution time
        h: Grid step
        expected: Expected node count
    """
    assert required_padding(params, t, h) == expected


@pytest.mark.unit
def test_transport_residual_detects_wrong_parameters(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test evolved data satisfies its transport equations and not the reversed ones.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    h = padded64.axis.h
    series = [evolve(padded64, params, 0.25 + s * h) for s in (-1, 0, 1)]

    good = transport_residual(series, params)
    bad = transport_residual(series, LaxParameters.unchecked(-1.0, 0.0, 1.0))

    assert good.max < 0.2 * bad.max


@pytest.mark.unit
def test_transport_residual_validates_series(padded64: ScatteringData, params: LaxParameters) -> None:
    """Test the residual needs three equally spaced snapshots.

    Args:
        padded64: Scattering data fixture
        params: Lax parameters fixture
    """
    later = evolve(padded64, params, 0.1)
    latest = evolve(padded64, params, 0.3)

    with pytest.raises(ValidationException):
        transport_residual([padded64, later], params)
    with pytest.raises(ValidationException):
        transport_residual([padded64, later, latest], params)


@pytest.mark.slow
@pytest.mark.integration
def test_transport_residual_converges_at_second_order(scenario: Callable[..., ScenarioConfig]) -> None:
    """Test the transport residual of evolved data falls like h^2.

    Args:
        scenario: Scenario factory fixture
    """
    config = scenario(grid={"n": 32}, time={"t_final": 0.25})

    rows = refinement_study(config, "transport", levels=3)

    assert [r.n for r in rows] == [32, 63, 125]
    assert 1.7 <= rows[-1].order <= 2.3
