/**
 * Stdio entry point: a single-threaded finite-difference thermal block
 * solver speaking the JSON-line protocol on stdin/stdout.
 *
 *   node dist/server.js [--grid N] [--self-check]
 *
 * --grid sets the cells per side (default 40); --self-check solves a few
 * parameter values with both the banded Cholesky production path and an
 * independent dense elimination, reports the agreement and exits.
 */

import { createInterface } from 'node:readline';
import { buildThermalBlockModel, selfCheck } from './model.js';
import { handleLine, ServerState } from './protocol.js';

const SELF_CHECK_TOLERANCE = 1e-10;

interface CliOptions {
  grid: number;
  selfCheck: boolean;
}

export function parseArgs(argv: string[]): CliOptions {
  const options: CliOptions = { grid: 40, selfCheck: false };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--grid') {
      const value = Number(argv[++i]);
      if (!Number.isInteger(value) || value < 2) {
        throw new Error(`--grid requires an integer >= 2, got ${argv[i]}`);
      }
      options.grid = value;
    } else if (arg === '--self-check') {
      options.selfCheck = true;
    } else {
      throw new Error(`unknown argument ${arg}`);
    }
  }
  return options;
}

function main(): void {
  let options: CliOptions;
  try {
    options = parseArgs(process.argv.slice(2));
  } catch (e) {
    process.stderr.write(`${e instanceof Error ? e.message : e}\n`);
    process.exit(2);
  }

  const model = buildThermalBlockModel(options.grid);

  if (options.selfCheck) {
    const deviation = selfCheck(model);
    const ok = deviation < SELF_CHECK_TOLERANCE;
    process.stdout.write(
      `self-check grid=${options.grid} unknowns=${model.n} `
      + `max deviation banded vs dense: ${deviation.toExponential(3)} `
      + `(tolerance ${SELF_CHECK_TOLERANCE}): ${ok ? 'OK' : 'FAILED'}\n`);
    process.exit(ok ? 0 : 1);
  }

  const state = new ServerState(model);
  const lines = createInterface({ input: process.stdin, terminal: false });
  lines.on('line', (line) => {
    if (!line.trim()) return;
    process.stdout.write(handleLine(state, line) + '\n');
    if (!state.running) {
      lines.close();
      process.exit(0);
    }
  });
}

main();
