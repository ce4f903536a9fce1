"""morkit: projection-based model order reduction with pluggable solvers.

High-dimensional models enter through small vector array / operator / model
interfaces, so the reduction algorithms (Galerkin projection, greedy and POD
basis generation, residual-based error estimation, empirical operator
interpolation) run unchanged on the built-in numpy/scipy discretizations and
on external solvers driven over the JSON-line subprocess protocol.
"""

__version__ = '0.1.0'

from .algorithms import NewtonError, PodResult, gram_schmidt, newton, pod, \
    riesz_representatives
from .basis_generation import GreedyError, GreedyResult, greedy, naive_basis, \
    pod_basis, pod_greedy_extension
from .ei import EIData, EmpiricalInterpolatedOperator, ProjectedEIOperator, \
    RestrictedOperator, deim, ei_greedy, interpolate_operator, \
    project_ei_operator, restricted
from .models import InstationaryModel, Model, StationaryModel
from .operators import IdentityOperator, InverseError, LincombOperator, \
    MatrixOperator, Operator, VectorFunctional, ZeroOperator
from .parallel import PoolTaskError, WorkerPool, default_pool_size
from .parameters import ConstantParameterFunctional, \
    ExpressionParameterFunctional, Parameter, ParameterSpace, \
    ProjectionParameterFunctional
from .reduction import EstimatorData, Reconstructor, ReducedInstationaryModel, \
    ReducedStationaryModel, check_orthonormality, project_operator, \
    reduce_instationary, reduce_stationary_coercive
from .storage import load_csr, load_reduced_model, load_vector_array, \
    save_csr, save_reduced_model, save_vector_array
from .timestepping import TimeSteppingError, explicit_euler
from .vectorarrays import ListVectorArray, NumpyVectorArray, VectorArray, inner

__all__ = [
    '__version__',
    'VectorArray', 'NumpyVectorArray', 'ListVectorArray', 'inner',
    'Operator', 'MatrixOperator', 'LincombOperator', 'IdentityOperator',
    'ZeroOperator', 'VectorFunctional', 'InverseError',
    'Model', 'StationaryModel', 'InstationaryModel',
    'Parameter', 'ParameterSpace', 'ProjectionParameterFunctional',
    'ConstantParameterFunctional', 'ExpressionParameterFunctional',
    'gram_schmidt', 'pod', 'PodResult', 'riesz_representatives', 'newton',
    'NewtonError',
    'explicit_euler', 'TimeSteppingError',
    'Reconstructor', 'EstimatorData', 'ReducedStationaryModel',
    'ReducedInstationaryModel', 'project_operator',
    'reduce_stationary_coercive', 'reduce_instationary', 'check_orthonormality',
    'greedy', 'GreedyResult', 'GreedyError', 'naive_basis', 'pod_basis',
    'pod_greedy_extension',
    'EIData', 'ei_greedy', 'deim', 'interpolate_operator', 'restricted',
    'RestrictedOperator', 'EmpiricalInterpolatedOperator',
    'ProjectedEIOperator', 'project_ei_operator',
    'WorkerPool', 'PoolTaskError', 'default_pool_size',
    'save_vector_array', 'load_vector_array', 'save_csr', 'load_csr',
    'save_reduced_model', 'load_reduced_model',
]
