#!/usr/bin/env node
// Regenerates tests/fixtures/artifacts/*.json from tests/fixtures/contracts.
//
//   npm install solc@0.8.21 solc0817@npm:solc@0.8.17 solc0517@npm:solc@0.5.17 solc0426@npm:solc@0.4.26
//   node tools/fixtures/compile.js [node_modules dir]
//
// Output is the compiler's standard-JSON output, trimmed to the fields the
// analyzer reads (deployed bytecode, deployed source map, metadata, AST).

const fs = require('fs');
const path = require('path');

const modules = process.argv[2] || path.join(process.cwd(), 'node_modules');
const root = path.resolve(__dirname, '..', '..');
const contractsDir = path.join(root, 'tests', 'fixtures', 'contracts');
const outDir = path.join(root, 'tests', 'fixtures', 'artifacts');

const compilers = {
  '0.4.26': 'solc0426',
  '0.5.17': 'solc0517',
  '0.8.17': 'solc0817',
  '0.8.21': 'solc',
};

// artifact name -> [entry source, compiler version]
const fixtures = {
  fig1_privileged_address: ['Fig1PrivilegedAddress.sol', '0.8.17'],
  fig2_unrestricted_from: ['Fig2UnrestrictedFrom.sol', '0.8.17'],
  fig2_unrestricted_from_v0426: ['Fig2UnrestrictedFromV04.sol', '0.4.26'],
  fig2_unrestricted_from_v0517: ['Fig2UnrestrictedFromV05.sol', '0.5.17'],
  fig2_unrestricted_from_v0821: ['Fig2UnrestrictedFrom.sol', '0.8.21'],
  fig3_owner_inconsistency: ['Fig3OwnerInconsistency.sol', '0.8.17'],
  fig4_empty_transfer_event: ['Fig4EmptyTransferEvent.sol', '0.8.17'],
  fig2_fig4_combined: ['Fig2Fig4Combined.sol', '0.8.17'],
  clean_collection: ['CleanCollection.sol', '0.8.17'],
  clean_legacy: ['CleanLegacy.sol', '0.5.17'],
  fp_pause_guard: ['FpPauseGuard.sol', '0.8.17'],
  fp_assigned_from: ['FpAssignedFrom.sol', '0.8.17'],
  fp_remote_transfer: ['FpRemoteTransfer.sol', '0.8.17'],
  fn_double_emit_mint: ['FnDoubleEmitMint.sol', '0.8.17'],
  fn_log1_transfer: ['FnLog1Transfer.sol', '0.4.26'],
  approval_only: ['ApprovalOnly.sol', '0.8.17'],
  renamed_owner_of: ['RenamedOwnerOf.sol', '0.8.17'],
  pruning_20: ['Pruning20.sol', '0.8.17'],
};

function collectSources(entry, acc) {
  if (acc[entry]) return acc;
  const content = fs.readFileSync(path.join(contractsDir, entry), 'utf8');
  acc[entry] = { content };
  const importRe = /import\s+"\.\/([^"]+)";/g;
  let m;
  while ((m = importRe.exec(content)) !== null) collectSources(m[1], acc);
  return acc;
}

function trim(output) {
  const out = { contracts: {}, sources: {} };
  for (const [file, byName] of Object.entries(output.contracts || {})) {
    out.contracts[file] = {};
    for (const [name, c] of Object.entries(byName)) {
      out.contracts[file][name] = {
        metadata: c.metadata,
        evm: {
          deployedBytecode: {
            object: c.evm.deployedBytecode.object,
            sourceMap: c.evm.deployedBytecode.sourceMap,
          },
        },
      };
    }
  }
  for (const [file, s] of Object.entries(output.sources || {})) {
    out.sources[file] = { id: s.id, ast: s.ast };
  }
  return out;
}

fs.mkdirSync(outDir, { recursive: true });
for (const [name, [entry, version]] of Object.entries(fixtures)) {
  const solc = require(path.join(modules, compilers[version]));
  const input = {
    language: 'Solidity',
    sources: collectSources(entry, {}),
    settings: {
      optimizer: { enabled: false, runs: 200 },
      outputSelection: {
        '*': {
          '*': ['metadata', 'evm.deployedBytecode.object', 'evm.deployedBytecode.sourceMap'],
          '': ['ast'],
        },
      },
    },
  };
  // 0.4.x/0.5.x wrappers expose the standard-JSON entry point under a different name.
  const compile = solc.compileStandardWrapper || solc.compile;
  const output = JSON.parse(compile(JSON.stringify(input)));
  const errors = (output.errors || []).filter((e) => e.severity === 'error');
  if (errors.length > 0) {
    for (const e of errors) console.error(e.formattedMessage);
    process.exit(1);
  }
  const trimmed = trim(output);
  // Keep the source text alongside so format-A artifacts are self-contained.
  for (const [file, s] of Object.entries(input.sources)) trimmed.sources[file].content = s.content;
  fs.writeFileSync(path.join(outDir, name + '.json'), JSON.stringify(trimmed));
  console.log(`${name}: ${entry} @ ${solc.version()}`);
}
