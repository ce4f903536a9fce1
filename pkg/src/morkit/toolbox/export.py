"""Solution export: legacy-format ASCII VTK and raw binary with JSON header."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ['write_vtk', 'write_raw']


def write_vtk(path, values, grid_shape, spacing=None, origin=(0.0, 0.0, 0.0),
              name='solution'):
    """Write point scalars on a structured grid as legacy ASCII VTK."""
    values = np.asarray(values, dtype=float).ravel()
    dims = tuple(grid_shape) + (1,) * (3 - len(grid_shape))
    if int(np.prod(dims)) != values.size:
        raise ValueError('grid shape does not match number of values')
    if spacing is None:
        spacing = tuple(1.0 / max(d - 1, 1) for d in dims)
    spacing = tuple(spacing) + (1.0,) * (3 - len(spacing))
    lines = [
        '# vtk DataFile Version 3.0',
        name,
        'ASCII',
        'DATASET STRUCTURED_POINTS',
        f'DIMENSIONS {dims[0]} {dims[1]} {dims[2]}',
        f'ORIGIN {origin[0]} {origin[1]} {origin[2]}',
        f'SPACING {spacing[0]} {spacing[1]} {spacing[2]}',
        f'POINT_DATA {values.size}',
        f'SCALARS {name} double 1',
        'LOOKUP_TABLE default',
    ]
    # repr of a Python float is the shortest decimal that round-trips
    lines.extend(repr(float(v)) for v in values)
    Path(path).write_text('\n'.join(lines) + '\n')


def write_raw(path, values, metadata=None):
    """Write values as little-endian float64 binary plus a JSON header sidecar."""
    path = Path(path)
    values = np.asarray(values, dtype='<f8')
    values.tofile(path)
    header = {'dtype': '<f8', 'shape': list(values.shape)}
    header.update(metadata or {})
    path.with_suffix(path.suffix + '.json').write_text(json.dumps(header, indent=2))
