"""P1 finite element discretization of the thermal block problem.

Stationary diffusion on the unit square with homogeneous Dirichlet data,
unit source term and a blockwise-constant conductivity: each of the `m x n`
blocks carries its own parameter entry, yielding an affine operator
decomposition with `Q = m * n` stiffness matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from ..models import StationaryModel
from ..operators import LincombOperator, MatrixOperator, VectorFunctional
from ..parameters import ParameterSpace, ProjectionParameterFunctional
from ..vectorarrays import NumpyVectorArray

__all__ = ['ThermalBlockProblem', 'discretize_thermal_block']


@dataclass
class ThermalBlockProblem:
    """`blocks = (m, n)` conductivity blocks, box parameter range per block."""

    blocks: tuple = (2, 2)
    parameter_range: tuple = (0.1, 1.0)
    diameter: float = math.sqrt(2) / 32

    def __post_init__(self):
        m, n = self.blocks
        if m < 1 or n < 1:
            raise ValueError('need at least one block per direction')
        if self.diameter <= 0:
            raise ValueError('diameter must be positive')


def _triangulate(n_side):
    """Structured triangulation of the unit square, squares split into 2 triangles."""
    nodes_per_side = n_side + 1
    xs = np.linspace(0.0, 1.0, nodes_per_side)
    xv, yv = np.meshgrid(xs, xs, indexing='xy')
    coords = np.column_stack([xv.ravel(), yv.ravel()])

    def node(i, j):
        return j * nodes_per_side + i

    triangles = []
    for j in range(n_side):
        for i in range(n_side):
            v00, v10 = node(i, j), node(i + 1, j)
            v01, v11 = node(i, j + 1), node(i + 1, j + 1)
            triangles.append((v00, v10, v11))
            triangles.append((v00, v11, v01))
    return coords, np.array(triangles, dtype=int)


def _local_stiffness(p):
    """Exact P1 stiffness of one triangle (piecewise-constant gradients)."""
    x, y = p[:, 0], p[:, 1]
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
    det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
    area = abs(det) / 2.0
    return (np.outer(b, b) + np.outer(c, c)) / (4.0 * area), area


def discretize_thermal_block(problem):
    """Discretize the thermal block problem.

    Returns `(model, h1_0_semi_product)`.  Boundary DOFs are eliminated, so
    the model dimension is the number of interior nodes and all products stay
    symmetric positive definite.  The product operator is the conductivity-1
    stiffness matrix, i.e. the sum of all affine terms.
    """
    m, n = problem.blocks
    n_side = max(1, int(round(math.sqrt(2) / problem.diameter)))
    coords, triangles = _triangulate(n_side)
    n_nodes = coords.shape[0]

    q_count = m * n
    rows = [[] for _ in range(q_count)]
    cols = [[] for _ in range(q_count)]
    vals = [[] for _ in range(q_count)]
    load = np.zeros(n_nodes)

    for tri in triangles:
        p = coords[tri]
        local, area = _local_stiffness(p)
        # the barycenter assigns a unique block to elements on block interfaces
        bx, by = p.mean(axis=0)
        ix = min(int(bx * m), m - 1)
        iy = min(int(by * n), n - 1)
        q = iy * m + ix
        for a in range(3):
            load[tri[a]] += area / 3.0  # vertex rule for f = 1
            for b in range(3):
                rows[q].append(tri[a])
                cols[q].append(tri[b])
                vals[q].append(local[a, b])

    on_boundary = (np.isclose(coords[:, 0], 0) | np.isclose(coords[:, 0], 1)
                   | np.isclose(coords[:, 1], 0) | np.isclose(coords[:, 1], 1))
    interior = np.nonzero(~on_boundary)[0]

    matrices = []
    for q in range(q_count):
        full = sps.csr_matrix((vals[q], (rows[q], cols[q])), shape=(n_nodes, n_nodes))
        matrices.append(full[interior][:, interior].tocsr())

    operator = LincombOperator(
        [MatrixOperator(mat) for mat in matrices],
        [ProjectionParameterFunctional('diffusion', q) for q in range(q_count)])
    rhs = VectorFunctional(NumpyVectorArray(load[interior].reshape(1, -1)))
    product = MatrixOperator(sum(matrices[1:], matrices[0]).tocsr())
    lo, hi = problem.parameter_range
    space = ParameterSpace({'diffusion': (q_count, lo, hi)})
    model = StationaryModel(operator, rhs, products={'h1_0_semi': product},
                            parameter_space=space)
    # geometry metadata for visualization / export
    model.grid_info = {'n_side': n_side, 'interior_nodes': interior,
                       'coordinates': coords}
    return model, product
