import sys

import numpy as np
import pytest

from morkit import ExpressionParameterFunctional, reduce_stationary_coercive
from morkit.toolbox import ThermalBlockProblem, discretize_thermal_block


@pytest.fixture(scope='session')
def thermal_small():
    """Coarse 2x2 thermal block: `(model, h1_0_semi product)`."""
    problem = ThermalBlockProblem(blocks=(2, 2), diameter=np.sqrt(2) / 12)
    return discretize_thermal_block(problem)


@pytest.fixture(scope='session')
def coercivity_min():
    return ExpressionParameterFunctional('min', 'diffusion')


@pytest.fixture
def thermal_reductor(thermal_small, coercivity_min):
    _, product = thermal_small

    def reductor(model, basis):
        return reduce_stationary_coercive(model, basis, error_product=product,
                                          coercivity_estimator=coercivity_min)
    return reductor


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion lines after the run, capture or not."""
    module = (sys.modules.get('tests.test_acceptance')
              or sys.modules.get('test_acceptance'))
    lines = getattr(module, 'REPORT_LINES', None)
    if lines:
        terminalreporter.section('acceptance criteria')
        for line in lines:
            terminalreporter.write_line(line)


def snapshot_basis(model, mus):
    """Plain (non-orthonormalized) snapshot array at the given parameters."""
    snapshots = None
    for mu in mus:
        s = model.solve(mu)
        if snapshots is None:
            snapshots = s
        else:
            snapshots.append(s)
    return snapshots
