/**
 * Finite-difference discretization of the 2x2 thermal block problem.
 *
 * -div(kappa(x) grad u) = 1 on the unit square, u = 0 on the boundary,
 * kappa piecewise constant on the four quadrants. The 5-point stencil is
 * assembled edge-wise: the conductance of each grid edge is the kappa value
 * at the edge midpoint, so every edge belongs to exactly one block and the
 * system matrix decomposes exactly as sum_q mu_q * B_q.
 */

import { BandSolver, Csr, csrCombine, csrToDense, denseSolve } from './linalg.js';

export const BLOCK_COUNT = 4;

export interface FdModel {
  /** cells per side; unknowns are the (grid-1)^2 interior nodes */
  grid: number;
  n: number;
  bandwidth: number;
  matrices: Csr[];
  product: Csr;
  rhs: Float64Array;
  parameterSpace: { diffusion: [number, number, number] };
}

/** Interior node (i, j), 1-based grid coordinates, row-major in j. */
export function nodeIndex(grid: number, i: number, j: number): number {
  return (j - 1) * (grid - 1) + (i - 1);
}

function blockOfPoint(x: number, y: number): number {
  const bx = x < 0.5 ? 0 : 1;
  const by = y < 0.5 ? 0 : 1;
  return by * 2 + bx;
}

export function buildThermalBlockModel(grid: number): FdModel {
  if (!Number.isInteger(grid) || grid < 2) {
    throw new Error(`grid must be an integer >= 2, got ${grid}`);
  }
  const side = grid - 1;
  const n = side * side;
  const h = 1 / grid;
  const invH2 = 1 / (h * h);

  // shared 5-point sparsity pattern, columns sorted within each row
  const indptr = new Int32Array(n + 1);
  const indices: number[] = [];
  for (let j = 1; j <= side; j++) {
    for (let i = 1; i <= side; i++) {
      const row = nodeIndex(grid, i, j);
      if (j > 1) indices.push(row - side);
      if (i > 1) indices.push(row - 1);
      indices.push(row);
      if (i < side) indices.push(row + 1);
      if (j < side) indices.push(row + side);
      indptr[row + 1] = indices.length;
    }
  }
  const pattern = Int32Array.from(indices);
  const matrices: Csr[] = [];
  for (let q = 0; q < BLOCK_COUNT; q++) {
    matrices.push({ n, indptr, indices: pattern, data: new Float64Array(pattern.length) });
  }

  const entryPos = (row: number, col: number): number => {
    for (let p = indptr[row]; p < indptr[row + 1]; p++) {
      if (pattern[p] === col) return p;
    }
    throw new Error(`no entry (${row}, ${col}) in the stencil pattern`);
  };

  // every edge touching an interior node: diag += c, off-diagonal -= c when
  // the opposite end is interior too (Dirichlet nodes are eliminated)
  const addEdge = (row: number, neighbor: number, midX: number, midY: number): void => {
    const data = matrices[blockOfPoint(midX, midY)].data;
    data[entryPos(row, row)] += invH2;
    if (neighbor >= 0) data[entryPos(row, neighbor)] -= invH2;
  };

  for (let j = 1; j <= side; j++) {
    for (let i = 1; i <= side; i++) {
      const row = nodeIndex(grid, i, j);
      const x = i * h;
      const y = j * h;
      addEdge(row, i > 1 ? row - 1 : -1, x - h / 2, y);
      addEdge(row, i < side ? row + 1 : -1, x + h / 2, y);
      addEdge(row, j > 1 ? row - side : -1, x, y - h / 2);
      addEdge(row, j < side ? row + side : -1, x, y + h / 2);
    }
  }

  const product = csrCombine(matrices, new Array(BLOCK_COUNT).fill(1));
  const rhs = new Float64Array(n).fill(1);
  return {
    grid, n, bandwidth: side, matrices, product, rhs,
    parameterSpace: { diffusion: [BLOCK_COUNT, 0.1, 1.0] },
  };
}

/** System matrix for one parameter value: sum_q diffusion[q] * B_q. */
export function assembleSystem(model: FdModel, diffusion: number[]): Csr {
  if (diffusion.length !== BLOCK_COUNT) {
    throw new Error(`expected ${BLOCK_COUNT} diffusion values, got ${diffusion.length}`);
  }
  return csrCombine(model.matrices, diffusion);
}

export function solveSystem(model: FdModel, diffusion: number[]): Float64Array {
  const solver = new BandSolver(assembleSystem(model, diffusion), model.bandwidth);
  return solver.solve(model.rhs);
}

/**
 * Compares the banded Cholesky solve against an independent dense Gaussian
 * elimination at a few parameter values; returns the worst absolute
 * entry-wise deviation.
 */
export function selfCheck(model: FdModel): number {
  const samples = [
    [1, 1, 1, 1],
    [0.1, 1, 0.1, 1],
    [0.1, 0.25, 0.55, 1.0],
    [1.0, 0.1, 0.7, 0.3],
  ];
  let worst = 0;
  for (const diffusion of samples) {
    const system = assembleSystem(model, diffusion);
    const banded = new BandSolver(system, model.bandwidth).solve(model.rhs);
    const dense = denseSolve(csrToDense(system), model.n, model.rhs);
    for (let i = 0; i < model.n; i++) {
      worst = Math.max(worst, Math.abs(banded[i] - dense[i]));
    }
  }
  return worst;
}
