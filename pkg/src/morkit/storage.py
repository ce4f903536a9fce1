"""File formats: vector array blobs, CSR matrix files, reduced model bundles.

Vector arrays are stored as little-endian float64 binary blobs with a JSON
sidecar recording `dim` and `len`.  Sparse matrices are stored as CSR triplet
files: a JSON header plus binary index/value streams.  Reduced models travel
as a single zip bundle (JSON manifest + binary members) so the online phase
can run in a separate process.
"""

from __future__ import annotations

import json
import zipfile
from pathlib import Path

import numpy as np
import scipy.sparse as sps

from .operators import LincombOperator, MatrixOperator
from .parameters import ParameterSpace, functional_from_dict
from .reduction import EstimatorData, ReducedStationaryModel
from .vectorarrays import NumpyVectorArray

__all__ = [
    'save_vector_array', 'load_vector_array', 'save_csr', 'load_csr',
    'save_reduced_model', 'load_reduced_model',
]


def save_vector_array(path, array):
    path = Path(path)
    data = array.dofs(range(array.dim)).astype('<f8')
    data.tofile(path)
    sidecar = {'dim': array.dim, 'len': len(array)}
    path.with_suffix(path.suffix + '.json').write_text(json.dumps(sidecar))


def load_vector_array(path):
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + '.json').read_text())
    data = np.fromfile(path, dtype='<f8').reshape(sidecar['len'], sidecar['dim'])
    return NumpyVectorArray.from_data(data)


def save_csr(path, matrix):
    """CSR triplet files: `<path>.json` header, `.indptr`, `.indices`, `.data`."""
    path = Path(path)
    matrix = matrix.tocsr()
    header = {'format': 'csr', 'shape': list(matrix.shape),
              'nnz': int(matrix.nnz), 'index_dtype': '<i8', 'value_dtype': '<f8'}
    path.with_suffix(path.suffix + '.json').write_text(json.dumps(header))
    matrix.indptr.astype('<i8').tofile(path.with_suffix(path.suffix + '.indptr'))
    matrix.indices.astype('<i8').tofile(path.with_suffix(path.suffix + '.indices'))
    matrix.data.astype('<f8').tofile(path.with_suffix(path.suffix + '.data'))


def load_csr(path):
    path = Path(path)
    header = json.loads(path.with_suffix(path.suffix + '.json').read_text())
    indptr = np.fromfile(path.with_suffix(path.suffix + '.indptr'), dtype='<i8')
    indices = np.fromfile(path.with_suffix(path.suffix + '.indices'), dtype='<i8')
    data = np.fromfile(path.with_suffix(path.suffix + '.data'), dtype='<f8')
    return sps.csr_matrix((data, indices, indptr), shape=tuple(header['shape']))


def _write_matrix(zf, name, matrix):
    zf.writestr(name, np.ascontiguousarray(matrix, dtype='<f8').tobytes())


def _read_matrix(zf, name, shape):
    return np.frombuffer(zf.read(name), dtype='<f8').reshape(shape)


def save_reduced_model(path, rm):
    """Write a `ReducedStationaryModel` as a single zip bundle."""
    if not isinstance(rm.operator, LincombOperator):
        raise ValueError('expected a lincomb reduced operator')
    manifest = {
        'format': 'morkit-reduced-model', 'version': 1,
        'N': rm.N,
        'operator': {
            'thetas': [c.to_dict() for c in rm.operator.coefficients],
            'matrix_shapes': [list(op.matrix.shape) for op in rm.operator.operators],
        },
        'parameter_space': rm.parameter_space.to_dict() if rm.parameter_space else None,
    }
    if rm.estimator_data is not None:
        ed = rm.estimator_data
        manifest['estimator'] = {
            'thetas': [t.to_dict() for t in ed.thetas],
            'coefficients_shape': list(ed.coefficients.shape),
            'gramian_shape': list(ed.gramian.shape),
            'N': ed.N,
            'coercivity': ed.coercivity_estimator.to_dict(),
        }
    with zipfile.ZipFile(path, 'w') as zf:
        zf.writestr('manifest.json', json.dumps(manifest, indent=2))
        for q, op in enumerate(rm.operator.operators):
            _write_matrix(zf, f'operator_{q}.bin', op.matrix)
        _write_matrix(zf, 'rhs.bin', rm.rhs)
        if rm.estimator_data is not None:
            _write_matrix(zf, 'estimator_coefficients.bin', rm.estimator_data.coefficients)
            _write_matrix(zf, 'estimator_gramian.bin', rm.estimator_data.gramian)


def load_reduced_model(path):
    with zipfile.ZipFile(path) as zf:
        manifest = json.loads(zf.read('manifest.json'))
        if manifest.get('format') != 'morkit-reduced-model':
            raise ValueError('not a reduced model bundle')
        thetas = [functional_from_dict(d) for d in manifest['operator']['thetas']]
        matrices = [_read_matrix(zf, f'operator_{q}.bin', shape)
                    for q, shape in enumerate(manifest['operator']['matrix_shapes'])]
        operator = LincombOperator([MatrixOperator(m) for m in matrices], thetas)
        rhs = _read_matrix(zf, 'rhs.bin', (manifest['N'],))
        estimator_data = None
        if 'estimator' in manifest:
            est = manifest['estimator']
            estimator_data = EstimatorData(
                _read_matrix(zf, 'estimator_coefficients.bin', est['coefficients_shape']),
                _read_matrix(zf, 'estimator_gramian.bin', est['gramian_shape']),
                [functional_from_dict(d) for d in est['thetas']],
                est['N'],
                functional_from_dict(est['coercivity']))
        space = None
        if manifest.get('parameter_space'):
            space = ParameterSpace.from_dict(manifest['parameter_space'])
        return ReducedStationaryModel(operator, rhs, estimator_data,
                                      parameter_space=space)
