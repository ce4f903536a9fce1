import { beforeEach, describe, expect, it } from 'vitest';
import { buildThermalBlockModel, nodeIndex } from '../src/model.js';
import { handleLine, PROTOCOL_VERSION, ServerState } from '../src/protocol.js';

const GRID = 10;

interface Response {
  id: unknown;
  ok: boolean;
  result?: any;
  error?: { code: string; msg: string };
}

let state: ServerState;
let counter: number;

function call(op: string, args: Record<string, unknown> = {}): Response {
  counter += 1;
  const line = JSON.stringify({ id: counter, op, args });
  return JSON.parse(handleLine(state, line));
}

function callOk(op: string, args: Record<string, unknown> = {}): any {
  const response = call(op, args);
  expect(response.ok, JSON.stringify(response.error)).toBe(true);
  expect(response.id).toBe(counter);
  return response.result;
}

function callError(op: string, args: Record<string, unknown> = {}): string {
  const response = call(op, args);
  expect(response.ok).toBe(false);
  return response.error!.code;
}

beforeEach(() => {
  state = new ServerState(buildThermalBlockModel(GRID));
  counter = 0;
});

const MU = { diffusion: [0.5, 1.0, 0.25, 0.75] };
const DIM = (GRID - 1) * (GRID - 1);

describe('protocol handshake and model info', () => {
  it('answers hello with the protocol version', () => {
    const result = callOk('hello', { version: PROTOCOL_VERSION });
    expect(result.version).toBe(PROTOCOL_VERSION);
  });

  it('describes the affinely decomposed model', () => {
    const info = callOk('model_info');
    expect(info.dim).toBe(DIM);
    expect(info.operator.kind).toBe('lincomb');
    expect(info.operator.operators).toHaveLength(4);
    expect(info.operator.coefficients[2]).toEqual(
      { kind: 'projection', component: 'diffusion', index: 2 });
    expect(info.parameter_space).toEqual({ diffusion: [4, 0.1, 1.0] });
    expect(typeof info.rhs).toBe('number');
    expect(typeof info.products.h1_0_semi).toBe('number');
  });
});

describe('solve, apply and apply_inverse', () => {
  it('solve result satisfies the assembled system', () => {
    const info = callOk('model_info');
    const u = callOk('solve', { mu: MU });
    expect(callOk('len', { array_id: u })).toBe(1);
    expect(callOk('dim', { array_id: u })).toBe(DIM);
    // apply each block operator and recombine: must reproduce the rhs (all ones)
    const parts = info.operator.operators.map((opId: number) =>
      callOk('apply', { op_id: opId, array_id: u, mu: null }));
    const all = [...Array(DIM).keys()];
    const residual = new Float64Array(DIM).fill(-1);
    parts.forEach((part: number, q: number) => {
      const values = callOk('dofs', { array_id: part, indices: all });
      for (let k = 0; k < DIM; k++) residual[k] += MU.diffusion[q] * values[k];
    });
    for (let k = 0; k < DIM; k++) expect(Math.abs(residual[k])).toBeLessThan(1e-10);
  });

  it('apply_inverse of the product inverts its apply', () => {
    const info = callOk('model_info');
    const u = callOk('solve', { mu: MU });
    const pu = callOk('apply', { op_id: info.products.h1_0_semi, array_id: u, mu: null });
    const back = callOk('apply_inverse', { op_id: info.products.h1_0_semi, array_id: pu, mu: null });
    const all = [...Array(DIM).keys()];
    const original = callOk('dofs', { array_id: u, indices: all });
    const recovered = callOk('dofs', { array_id: back, indices: all });
    for (let k = 0; k < DIM; k++) {
      expect(Math.abs(original[k] - recovered[k])).toBeLessThan(1e-10);
    }
  });

  it('solves match the Poisson center value for unit diffusion', () => {
    const u = callOk('solve', { mu: { diffusion: [1, 1, 1, 1] } });
    const center = nodeIndex(GRID, GRID / 2, GRID / 2);
    const [value] = callOk('dofs', { array_id: u, indices: [center] });
    expect(Math.abs(value - 0.0736713532653869)).toBeLessThan(5e-3);
  });

  it('rejects solves with malformed parameters', () => {
    expect(callError('solve', {})).toBe('BAD_REQUEST');
    expect(callError('solve', { mu: 'x' })).toBe('BAD_REQUEST');
    expect(callError('solve', { mu: { diffusion: [1, 2] } })).toBe('BAD_REQUEST');
    expect(callError('solve', { mu: { diffusion: [1, 1, 1, 'a'] } })).toBe('BAD_REQUEST');
  });

  it('reports singular block operators as solver failures', () => {
    const info = callOk('model_info');
    const u = callOk('solve', { mu: MU });
    const code = callError('apply_inverse', {
      op_id: info.operator.operators[0], array_id: u, mu: null,
    });
    expect(code).toBe('SOLVER_FAILURE');
  });
});

describe('array operations', () => {
  it('copy, append, lincomb and inner behave like dense arrays', () => {
    const info = callOk('model_info');
    const f = callOk('copy', { array_id: info.rhs });
    callOk('append', { array_id: f, other_id: callOk('copy', { array_id: info.rhs }) });
    expect(callOk('len', { array_id: f })).toBe(2);
    const combo = callOk('lincomb', { array_id: f, coefficients: [[0.25, 0.75]] });
    const gram = callOk('inner', { a: combo, b: combo });
    // rhs is all ones, so any convex combination has squared norm = dim
    expect(gram).toHaveLength(1);
    expect(gram[0]).toBeCloseTo(DIM, 8);
    const sub = callOk('copy', { array_id: f, indices: [1] });
    expect(callOk('len', { array_id: sub })).toBe(1);
  });

  it('supports in-place scaling through aliased axpy', () => {
    const info = callOk('model_info');
    const f = callOk('copy', { array_id: info.rhs });
    // scal(3) as axpy(2, x=self): the client-side identity the bridge relies on
    callOk('axpy', { array_id: f, alpha: 2.0, x_id: f });
    const values = callOk('dofs', { array_id: f, indices: [0, 5, DIM - 1] });
    expect(values).toEqual([3, 3, 3]);
  });

  it('supports per-vector alpha in axpy', () => {
    const info = callOk('model_info');
    const f = callOk('copy', { array_id: info.rhs });
    callOk('append', { array_id: f, other_id: callOk('copy', { array_id: info.rhs }) });
    const ones = callOk('copy', { array_id: info.rhs });
    callOk('axpy', { array_id: f, alpha: [1.0, -2.0], x_id: ones });
    const values = callOk('dofs', { array_id: f, indices: [0] });
    expect(values).toEqual([2, -1]);
  });

  it('never returns dim-sized payloads except for dofs', () => {
    const u = callOk('solve', { mu: MU });
    const line = JSON.stringify(
      { id: 999, op: 'inner', args: { a: u, b: u } });
    const response = handleLine(state, line);
    expect(response.length).toBeLessThan(1024);
  });
});

describe('error handling', () => {
  it('reports freed objects distinctly from unknown ones', () => {
    const u = callOk('solve', { mu: MU });
    callOk('free', { id: u });
    expect(callError('dofs', { array_id: u, indices: [0] })).toBe('OBJECT_FREED');
    expect(callError('free', { id: u })).toBe('OBJECT_FREED');
    expect(callError('dofs', { array_id: 999999, indices: [0] })).toBe('BAD_REQUEST');
  });

  it('rejects unknown ops and malformed requests', () => {
    expect(callError('frobnicate')).toBe('UNKNOWN_OP');
    expect(callError('dofs', { array_id: null, indices: [0] })).toBe('BAD_REQUEST');
    const noOp = JSON.parse(handleLine(state, '{"id": 1}'));
    expect(noOp.ok).toBe(false);
    expect(noOp.error.code).toBe('BAD_REQUEST');
    const badJson = JSON.parse(handleLine(state, 'not json at all'));
    expect(badJson.ok).toBe(false);
    expect(badJson.error.code).toBe('BAD_REQUEST');
  });

  it('rejects out-of-range dof indices', () => {
    const u = callOk('solve', { mu: MU });
    expect(callError('dofs', { array_id: u, indices: [DIM] })).toBe('BAD_REQUEST');
    expect(callError('dofs', { array_id: u, indices: [-1] })).toBe('BAD_REQUEST');
    expect(callError('dofs', { array_id: u, indices: 'all' })).toBe('BAD_REQUEST');
  });

  it('survives a fuzz stream of malformed lines and keeps serving', () => {
    let seed = 12345;
    const rand = () => {
      // xorshift, deterministic across runs
      seed ^= seed << 13; seed ^= seed >>> 17; seed ^= seed << 5;
      return (seed >>> 0) / 4294967296;
    };
    const fragments = ['{', '}', '[', ']', '"op"', '"solve"', ':', ',', 'null',
      '1e308', '-5', 'true', '"id"', '\\', 'ÿ', '{"op":', '"args"'];
    for (let i = 0; i < 1000; i++) {
      let line = '';
      const parts = 1 + Math.floor(rand() * 8);
      for (let p = 0; p < parts; p++) {
        line += fragments[Math.floor(rand() * fragments.length)];
      }
      const response = JSON.parse(handleLine(state, line));
      expect(typeof response.ok).toBe('boolean');
      if (!response.ok) {
        expect(['BAD_REQUEST', 'UNKNOWN_OP', 'SOLVER_FAILURE'])
          .toContain(response.error.code);
      }
    }
    const hello = callOk('hello', { version: PROTOCOL_VERSION });
    expect(hello.version).toBe(PROTOCOL_VERSION);
  });
});
