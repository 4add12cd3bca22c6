"""Tests for the Lax-pair residual checks."""

from typing import Callable, Dict

import numpy as np
import pytest

from dirac_ist.core.config import ScenarioConfig
from dirac_ist.core.exceptions import ValidationException
from dirac_ist.models.fields import Grid2D, LaxParameters, Potential
from dirac_ist.services.convergence import lax_study
from dirac_ist.services.lax_verify import (
    check_constraint,
    commutator_residual,
    lemma1_residual,
    pair_for,
    smooth_field,
)


@pytest.mark.unit
def test_constraint_holds_for_the_built_p(
    grid32: Grid2D, potential_factory: Callable[..., Potential], params: LaxParameters
) -> None:
    """Test [sigma, P] = [tau, Q] to roundoff and fails once an entry is removed.

    Args:
        grid32: Grid fixture
        potential_factory: Potential factory fixture
        params: Lax parameters fixture
    """
    pair = pair_for(potential_factory(grid32), params)

    assert check_constraint(pair) < 1e-14
    broken = pair.with_p_entry(0, 2, np.zeros((32, 32)))
    assert check_constraint(broken) > 1e-3


@pytest.mark.unit
def test_off_diagonal_couplings_do_not_enter_the_constraint(
    grid32: Grid2D, potential_factory: Callable[..., Potential], params: LaxParameters, rng: np.random.Generator
) -> None:
    """Test v12 and v21 are unconstrained.

    Args:
        grid32: Grid fixture
        potential_factory: Potential factory fixture
        params: Lax parameters fixture
        rng: Random generator fixture
    """
    pair = pair_for(potential_factory(grid32), params)

    changed = pair.with_p_entry(0, 1, rng.normal(size=(32, 32)))

    assert check_constraint(changed) < 1e-14


@pytest.mark.unit
def test_smooth_field_is_seeded(grid32: Grid2D) -> None:
    """Test the smooth test fields are reproducible per seed.

    Args:
        grid32: Grid fixture
    """
    first = smooth_field(grid32, seed=3)

    assert first.shape == (3, 32, 32)
    np.testing.assert_array_equal(first, smooth_field(grid32, seed=3))
    assert not np.array_equal(first, smooth_field(grid32, seed=4))


@pytest.mark.unit
def test_residuals_vanish_without_potential(grid32: Grid2D, params: LaxParameters) -> None:
    """Test both residuals are roundoff for the zero potential.

    Args:
        grid32: Grid fixture
        params: Lax parameters fixture
    """
    zero = [Potential.zeros(grid32)] * 3

    assert commutator_residual(zero, params, 0.1) < 1e-12
    assert lemma1_residual(zero, params, 0.1) < 1e-10


@pytest.mark.unit
def test_residuals_validate_snapshots(grid32: Grid2D, grid64: Grid2D, params: LaxParameters) -> None:
    """Test snapshot count, grids and spacing are checked.

    Args:
        grid32: Grid fixture
        grid64: Grid fixture
        params: Lax parameters fixture
    """
    a, b = Potential.zeros(grid32), Potential.zeros(grid64)

    with pytest.raises(ValidationException):
        commutator_residual([a, a], params, 0.1)
    with pytest.raises(ValidationException):
        commutator_residual([a, b, a], params, 0.1)
    with pytest.raises(ValidationException):
        lemma1_residual([a, a, a], params, 0.0)


def _by_check(rows: list) -> Dict[str, float]:
    return {row.check: row.residual for row in rows}


@pytest.mark.slow
@pytest.mark.integration
def test_residuals_separate_consistent_and_reversed_evolutions(scenario: Callable[..., ScenarioConfig]) -> None:
    """Test a trajectory of the wrong system gives much larger residuals.

    Args:
        scenario: Scenario factory fixture
    """
    config = scenario(grid={"n": 64}, time={"t_final": 0.25})

    good = _by_check(lax_study(config, levels=1))
    bad = _by_check(lax_study(config, levels=1, params=LaxParameters.unchecked(-1.0, 0.0, 1.0)))

    assert set(good) == {"constraint", "commutator", "lemma1"}
    assert good["constraint"] < 1e-14
    assert bad["commutator"] > 10.0 * good["commutator"]
    assert bad["lemma1"] > 10.0 * good["lemma1"]


@pytest.mark.slow
@pytest.mark.integration
def test_residuals_converge_at_second_order(scenario: Callable[..., ScenarioConfig]) -> None:
    """Test the commutator and solution-mapping residuals fall like h^2.

    Args:
        scenario: Scenario factory fixture
    """
    config = scenario(grid={"n": 32}, time={"t_final": 0.25})

    rows = lax_study(config, levels=3)

    for check in ("commutator", "lemma1"):
        last = [r for r in rows if r.check == check][-1]
        assert last.n == 125
        assert 1.7 <= last.order <= 2.3
