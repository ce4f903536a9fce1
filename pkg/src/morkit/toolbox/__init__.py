"""Built-in discretizations used as high-dimensional test models."""

from ..timestepping import explicit_euler
from .burgers import BurgersOperator, BurgersProblem, discretize_burgers
from .export import write_raw, write_vtk
from .thermalblock import ThermalBlockProblem, discretize_thermal_block

__all__ = [
    'ThermalBlockProblem', 'discretize_thermal_block',
    'BurgersProblem', 'BurgersOperator', 'discretize_burgers',
    'explicit_euler', 'write_vtk', 'write_raw',
]
