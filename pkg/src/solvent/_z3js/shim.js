// Batch SMT-LIB runner over the z3 WASM build (npm package `z3-solver`).
// Reads a full script from stdin, evaluates it in one context and prints
// the solver responses. Resolution order: NODE_PATH, then the global npm
// root as a last resort.
'use strict';
const fs = require('fs');

function loadZ3() {
  try {
    return require('z3-solver');
  } catch (e) {
    const { execSync } = require('child_process');
    const path = require('path');
    const root = execSync('npm root -g', { encoding: 'utf8' }).trim();
    return require(path.join(root, 'z3-solver'));
  }
}

(async () => {
  const { init } = loadZ3();
  const { Z3 } = await init();
  const ctx = Z3.mk_context(Z3.mk_config());
  const input = fs.readFileSync(0, 'utf8');
  const out = await Z3.eval_smtlib2_string(ctx, input);
  process.stdout.write(out.endsWith('\n') || out === '' ? out : out + '\n');
  process.exit(0);
})().catch((err) => {
  process.stderr.write(String((err && err.stack) || err) + '\n');
  process.exit(3);
});
