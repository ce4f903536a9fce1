/**
 * Small dense / banded linear algebra kernels.
 *
 * The FD system matrices are symmetric positive definite with bandwidth
 * equal to the grid side length, so a banded Cholesky factorization solves
 * them exactly and cheaply. A plain dense Gaussian elimination is kept as an
 * independent reference for the --self-check mode.
 */

/** Compressed sparse row matrix (square). */
export interface Csr {
  n: number;
  indptr: Int32Array;
  indices: Int32Array;
  data: Float64Array;
}

export function csrMatvec(m: Csr, x: Float64Array, out?: Float64Array): Float64Array {
  const y = out ?? new Float64Array(m.n);
  for (let i = 0; i < m.n; i++) {
    let acc = 0;
    for (let p = m.indptr[i]; p < m.indptr[i + 1]; p++) {
      acc += m.data[p] * x[m.indices[p]];
    }
    y[i] = acc;
  }
  return y;
}

export function csrToDense(m: Csr): Float64Array {
  const dense = new Float64Array(m.n * m.n);
  for (let i = 0; i < m.n; i++) {
    for (let p = m.indptr[i]; p < m.indptr[i + 1]; p++) {
      dense[i * m.n + m.indices[p]] += m.data[p];
    }
  }
  return dense;
}

/** out = sum_q coeffs[q] * mats[q]; all matrices must share their sparsity pattern. */
export function csrCombine(mats: Csr[], coeffs: number[]): Csr {
  const base = mats[0];
  const data = new Float64Array(base.data.length);
  for (let q = 0; q < mats.length; q++) {
    const src = mats[q].data;
    const c = coeffs[q];
    for (let p = 0; p < data.length; p++) {
      data[p] += c * src[p];
    }
  }
  return { n: base.n, indptr: base.indptr, indices: base.indices, data };
}

/**
 * Lower band of an SPD matrix: band[i * (bw + 1) + d] = A[i][i - d]
 * for d = 0..bw, zero-padded outside the matrix.
 */
export function csrToBand(m: Csr, bandwidth: number): Float64Array {
  const band = new Float64Array(m.n * (bandwidth + 1));
  for (let i = 0; i < m.n; i++) {
    for (let p = m.indptr[i]; p < m.indptr[i + 1]; p++) {
      const j = m.indices[p];
      const d = i - j;
      if (d < 0) continue; // upper triangle, symmetric
      if (d > bandwidth) throw new Error(`entry outside bandwidth ${bandwidth}`);
      band[i * (bandwidth + 1) + d] += m.data[p];
    }
  }
  return band;
}

/** In-place banded Cholesky A = L L^T; throws if not positive definite. */
export function choleskyBand(band: Float64Array, n: number, bandwidth: number): void {
  const w = bandwidth + 1;
  for (let j = 0; j < n; j++) {
    let diag = band[j * w];
    const kmin = Math.max(0, j - bandwidth);
    for (let k = kmin; k < j; k++) {
      const v = band[j * w + (j - k)];
      diag -= v * v;
    }
    if (diag <= 0 || !Number.isFinite(diag)) {
      throw new Error(`matrix not positive definite at row ${j}`);
    }
    const dsqrt = Math.sqrt(diag);
    band[j * w] = dsqrt;
    const imax = Math.min(n - 1, j + bandwidth);
    for (let i = j + 1; i <= imax; i++) {
      let acc = band[i * w + (i - j)];
      const lo = Math.max(0, i - bandwidth, j - bandwidth);
      for (let k = lo; k < j; k++) {
        acc -= band[i * w + (i - k)] * band[j * w + (j - k)];
      }
      band[i * w + (i - j)] = acc / dsqrt;
    }
  }
}

/** Solve L L^T x = b with the factor from choleskyBand; returns x. */
export function solveBand(
  band: Float64Array, n: number, bandwidth: number, b: Float64Array,
): Float64Array {
  const w = bandwidth + 1;
  const x = Float64Array.from(b);
  for (let i = 0; i < n; i++) {
    let acc = x[i];
    const lo = Math.max(0, i - bandwidth);
    for (let k = lo; k < i; k++) {
      acc -= band[i * w + (i - k)] * x[k];
    }
    x[i] = acc / band[i * w];
  }
  for (let i = n - 1; i >= 0; i--) {
    let acc = x[i];
    const hi = Math.min(n - 1, i + bandwidth);
    for (let k = i + 1; k <= hi; k++) {
      acc -= band[k * w + (k - i)] * x[k];
    }
    x[i] = acc / band[i * w];
  }
  return x;
}

/** Cached banded Cholesky solver for one SPD matrix. */
export class BandSolver {
  private band: Float64Array;

  constructor(matrix: Csr, private readonly bandwidth: number) {
    this.band = csrToBand(matrix, bandwidth);
    choleskyBand(this.band, matrix.n, bandwidth);
    this.n = matrix.n;
  }

  readonly n: number;

  solve(b: Float64Array): Float64Array {
    return solveBand(this.band, this.n, this.bandwidth, b);
  }
}

/**
 * Dense Gaussian elimination with partial pivoting, used only by the
 * self-check as an implementation independent of the banded path.
 */
export function denseSolve(a: Float64Array, n: number, b: Float64Array): Float64Array {
  const m = Float64Array.from(a);
  const x = Float64Array.from(b);
  const perm = new Int32Array(n);
  for (let i = 0; i < n; i++) perm[i] = i;
  for (let col = 0; col < n; col++) {
    let pivot = col;
    for (let r = col + 1; r < n; r++) {
      if (Math.abs(m[r * n + col]) > Math.abs(m[pivot * n + col])) pivot = r;
    }
    if (m[pivot * n + col] === 0) throw new Error('singular matrix');
    if (pivot !== col) {
      for (let c = 0; c < n; c++) {
        const t = m[col * n + c];
        m[col * n + c] = m[pivot * n + c];
        m[pivot * n + c] = t;
      }
      const tb = x[col];
      x[col] = x[pivot];
      x[pivot] = tb;
    }
    const d = m[col * n + col];
    for (let r = col + 1; r < n; r++) {
      const factor = m[r * n + col] / d;
      if (factor === 0) continue;
      for (let c = col; c < n; c++) m[r * n + c] -= factor * m[col * n + c];
      x[r] -= factor * x[col];
    }
  }
  for (let i = n - 1; i >= 0; i--) {
    let acc = x[i];
    for (let c = i + 1; c < n; c++) acc -= m[i * n + c] * x[c];
    x[i] = acc / m[i * n + i];
  }
  return x;
}
