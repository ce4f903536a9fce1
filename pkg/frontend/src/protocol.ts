/**
 * JSON-line solver protocol, version 1.
 *
 * One request object per line on stdin, one response object per line on
 * stdout: {id, op, args} in, {id, ok, result} or {id, ok: false,
 * error: {code, msg}} out. Vectors and matrices never cross the wire;
 * clients hold integer handles and only `dofs` may return dimension-sized
 * payloads. Malformed input of any shape yields an error response, never
 * a crash.
 */

import { BandSolver, Csr, csrMatvec } from './linalg.js';
import { assembleSystem, FdModel } from './model.js';

export const PROTOCOL_VERSION = 1;

export class ProtocolError extends Error {
  constructor(readonly code: string, readonly msg: string) {
    super(msg);
  }
}

interface ArrayObject {
  kind: 'array';
  dim: number;
  vectors: Float64Array[];
}

interface OperatorObject {
  kind: 'operator';
  matrix: Csr;
  solver?: BandSolver;
}

type StoredObject = ArrayObject | OperatorObject;

type Json = unknown;

function badRequest(msg: string): never {
  throw new ProtocolError('BAD_REQUEST', msg);
}

function asFiniteNumber(value: Json, what: string): number {
  if (typeof value !== 'number' || !Number.isFinite(value)) {
    badRequest(`${what} must be a finite number`);
  }
  return value;
}

function asNumberList(value: Json, what: string): number[] {
  if (!Array.isArray(value)) badRequest(`${what} must be an array`);
  return value.map((v) => asFiniteNumber(v, `${what} entry`));
}

export class ServerState {
  private objects = new Map<number, StoredObject>();
  private freed = new Set<number>();
  private nextId = 0;
  private operatorIds: number[] = [];
  private productId = 0;
  private rhsId = 0;
  running = true;

  constructor(private readonly model: FdModel) {
    for (const matrix of model.matrices) {
      this.operatorIds.push(this.store({ kind: 'operator', matrix }));
    }
    this.productId = this.store({ kind: 'operator', matrix: model.product });
    this.rhsId = this.store({ kind: 'array', dim: model.n, vectors: [model.rhs] });
  }

  private store(obj: StoredObject): number {
    this.nextId += 1;
    this.objects.set(this.nextId, obj);
    return this.nextId;
  }

  private get(id: Json, kind: StoredObject['kind']): StoredObject {
    if (typeof id !== 'number' || !Number.isInteger(id)) {
      badRequest(`invalid object id ${JSON.stringify(id)}`);
    }
    if (this.freed.has(id)) {
      throw new ProtocolError('OBJECT_FREED', `object ${id} was freed`);
    }
    const obj = this.objects.get(id);
    if (!obj || obj.kind !== kind) badRequest(`no such object ${id}`);
    return obj;
  }

  private array(args: Record<string, Json>, key = 'array_id'): ArrayObject {
    return this.get(args[key], 'array') as ArrayObject;
  }

  private operator(args: Record<string, Json>): OperatorObject {
    return this.get(args['op_id'], 'operator') as OperatorObject;
  }

  private diffusion(args: Record<string, Json>): number[] {
    const mu = args['mu'];
    if (typeof mu !== 'object' || mu === null || Array.isArray(mu)) {
      badRequest('mu must be an object with a diffusion component');
    }
    const values = asNumberList((mu as Record<string, Json>)['diffusion'], 'mu.diffusion');
    if (values.length !== this.model.matrices.length) {
      badRequest(`diffusion must have ${this.model.matrices.length} entries`);
    }
    return values;
  }

  private indices(value: Json, dim: number): number[] {
    const raw = Array.isArray(value) ? value : badRequest('indices must be an array');
    return raw.map((v) => {
      if (typeof v !== 'number' || !Number.isInteger(v) || v < 0 || v >= dim) {
        badRequest(`index ${JSON.stringify(v)} out of range`);
      }
      return v;
    });
  }

  handle(op: string, args: Record<string, Json>): Json {
    switch (op) {
      case 'hello': return this.opHello();
      case 'model_info': return this.opModelInfo();
      case 'solve': return this.opSolve(args);
      case 'apply': return this.opApply(args);
      case 'apply_inverse': return this.opApplyInverse(args);
      case 'inner': return this.opInner(args);
      case 'lincomb': return this.opLincomb(args);
      case 'axpy': return this.opAxpy(args);
      case 'dofs': return this.opDofs(args);
      case 'append': return this.opAppend(args);
      case 'copy': return this.opCopy(args);
      case 'len': return this.array(args).vectors.length;
      case 'dim': return this.array(args).dim;
      case 'free': return this.opFree(args);
      case 'shutdown': this.running = false; return null;
      default:
        throw new ProtocolError('UNKNOWN_OP', `unknown op ${JSON.stringify(op)}`);
    }
  }

  private opHello(): Json {
    return { version: PROTOCOL_VERSION, name: 'fd-thermalblock' };
  }

  private opModelInfo(): Json {
    return {
      dim: this.model.n,
      operator: {
        kind: 'lincomb',
        operators: this.operatorIds,
        coefficients: this.operatorIds.map((_, q) => (
          { kind: 'projection', component: 'diffusion', index: q })),
      },
      rhs: this.rhsId,
      products: { h1_0_semi: this.productId },
      parameter_space: this.model.parameterSpace,
    };
  }

  private opSolve(args: Record<string, Json>): Json {
    const diffusion = this.diffusion(args);
    let solution: Float64Array;
    try {
      const solver = new BandSolver(assembleSystem(this.model, diffusion), this.model.bandwidth);
      solution = solver.solve(this.model.rhs);
    } catch (e) {
      throw new ProtocolError('SOLVER_FAILURE', String(e));
    }
    return this.store({ kind: 'array', dim: this.model.n, vectors: [solution] });
  }

  private opApply(args: Record<string, Json>): Json {
    const operator = this.operator(args);
    const a = this.array(args);
    if (a.dim !== operator.matrix.n) {
      throw new ProtocolError('DIM_MISMATCH',
        `array dim ${a.dim} does not match operator dim ${operator.matrix.n}`);
    }
    const vectors = a.vectors.map((v) => csrMatvec(operator.matrix, v));
    return this.store({ kind: 'array', dim: a.dim, vectors });
  }

  private opApplyInverse(args: Record<string, Json>): Json {
    const operator = this.operator(args);
    const a = this.array(args);
    if (a.dim !== operator.matrix.n) {
      throw new ProtocolError('DIM_MISMATCH',
        `array dim ${a.dim} does not match operator dim ${operator.matrix.n}`);
    }
    try {
      operator.solver ??= new BandSolver(operator.matrix, this.model.bandwidth);
    } catch (e) {
      throw new ProtocolError('SOLVER_FAILURE', String(e));
    }
    const solver = operator.solver;
    const vectors = a.vectors.map((v) => solver.solve(v));
    return this.store({ kind: 'array', dim: a.dim, vectors });
  }

  private opInner(args: Record<string, Json>): Json {
    const a = this.array(args, 'a');
    const b = this.array(args, 'b');
    if (a.dim !== b.dim) throw new ProtocolError('DIM_MISMATCH', 'array dimensions differ');
    const out: number[] = [];
    for (const va of a.vectors) {
      for (const vb of b.vectors) {
        let acc = 0;
        for (let k = 0; k < a.dim; k++) acc += va[k] * vb[k];
        out.push(acc);
      }
    }
    return out;
  }

  private opLincomb(args: Record<string, Json>): Json {
    const a = this.array(args);
    const rows = args['coefficients'];
    if (!Array.isArray(rows)) badRequest('coefficients must be a matrix');
    const vectors = rows.map((row) => {
      const coeffs = asNumberList(row, 'coefficients row');
      if (coeffs.length !== a.vectors.length) {
        badRequest('coefficient matrix has wrong number of columns');
      }
      const acc = new Float64Array(a.dim);
      for (let j = 0; j < coeffs.length; j++) {
        const c = coeffs[j];
        const v = a.vectors[j];
        for (let k = 0; k < a.dim; k++) acc[k] += c * v[k];
      }
      return acc;
    });
    return this.store({ kind: 'array', dim: a.dim, vectors });
  }

  private opAxpy(args: Record<string, Json>): Json {
    const a = this.array(args);
    const x = this.array(args, 'x_id');
    if (a.dim !== x.dim) throw new ProtocolError('DIM_MISMATCH', 'array dimensions differ');
    if (x.vectors.length !== a.vectors.length && x.vectors.length !== 1) {
      badRequest('axpy length mismatch');
    }
    const rawAlpha = args['alpha'];
    const alphas = Array.isArray(rawAlpha)
      ? asNumberList(rawAlpha, 'alpha')
      : new Array(a.vectors.length).fill(asFiniteNumber(rawAlpha, 'alpha'));
    if (alphas.length !== a.vectors.length) badRequest('invalid alpha shape');
    for (let i = 0; i < a.vectors.length; i++) {
      const target = a.vectors[i];
      const source = x.vectors.length === 1 ? x.vectors[0] : x.vectors[i];
      const alpha = alphas[i];
      // elementwise update is aliasing-safe when target === source
      for (let k = 0; k < a.dim; k++) target[k] += alpha * source[k];
    }
    return null;
  }

  private opDofs(args: Record<string, Json>): Json {
    const a = this.array(args);
    const idx = this.indices(args['indices'], a.dim);
    const out: number[] = [];
    for (const v of a.vectors) {
      for (const i of idx) out.push(v[i]);
    }
    return out;
  }

  private opAppend(args: Record<string, Json>): Json {
    const a = this.array(args);
    const b = this.array(args, 'other_id');
    if (a.dim !== b.dim) throw new ProtocolError('DIM_MISMATCH', 'array dimensions differ');
    for (const v of b.vectors) a.vectors.push(Float64Array.from(v));
    return null;
  }

  private opCopy(args: Record<string, Json>): Json {
    const a = this.array(args);
    const raw = args['indices'];
    const selected = raw === undefined || raw === null
      ? a.vectors
      : this.indices(raw, a.vectors.length).map((i) => a.vectors[i]);
    return this.store({
      kind: 'array', dim: a.dim, vectors: selected.map((v) => Float64Array.from(v)),
    });
  }

  private opFree(args: Record<string, Json>): Json {
    const id = args['id'];
    if (typeof id !== 'number' || !Number.isInteger(id)) badRequest('invalid object id');
    if (this.freed.has(id)) {
      throw new ProtocolError('OBJECT_FREED', `object ${id} was freed`);
    }
    if (!this.objects.has(id)) badRequest(`no such object ${id}`);
    this.objects.delete(id);
    this.freed.add(id);
    return null;
  }
}

/** Processes one raw input line; always returns exactly one response line. */
export function handleLine(state: ServerState, line: string): string {
  let requestId: Json = null;
  let response: Record<string, Json>;
  try {
    let request: Json;
    try {
      request = JSON.parse(line);
    } catch (e) {
      badRequest(`bad json: ${e}`);
    }
    if (typeof request !== 'object' || request === null || Array.isArray(request)) {
      badRequest('request must be an object');
    }
    const req = request as Record<string, Json>;
    requestId = req['id'] ?? null;
    const op = req['op'];
    if (typeof op !== 'string') badRequest('missing op');
    const args = req['args'] ?? {};
    if (typeof args !== 'object' || args === null || Array.isArray(args)) {
      badRequest('args must be an object');
    }
    const result = state.handle(op, args as Record<string, Json>);
    response = { id: requestId, ok: true, result };
  } catch (e) {
    const code = e instanceof ProtocolError ? e.code : 'SOLVER_FAILURE';
    const msg = e instanceof ProtocolError ? e.msg : String(e);
    response = { id: requestId, ok: false, error: { code, msg } };
  }
  return JSON.stringify(response);
}
