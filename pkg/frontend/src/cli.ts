/** Scripted session driver: label ordering ranges and export annotations.
 *
 *   node dist/cli.js --manifest out/manifest.json \
 *     --label 0:99:lion --label 100:249:zebra --out annotations.jsonl
 *
 * Mirrors the in-browser flow (loadSession -> labelRange -> export) so the
 * annotation path can be exercised end to end without a browser.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { exportAnnotations, labelCounts, labelRange, loadSession, undo } from "./session.js";

interface Args {
  manifest: string;
  labels: { start: number; end: number; label: string }[];
  out: string;
  undo: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { manifest: "", labels: [], out: "", undo: 0 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    if (flag === "--manifest") args.manifest = argv[++i];
    else if (flag === "--out") args.out = argv[++i];
    else if (flag === "--undo") args.undo = Number(argv[++i]);
    else if (flag === "--label") {
      const spec = argv[++i];
      const match = /^(\d+):(\d+):(.+)$/.exec(spec);
      if (!match) throw new Error(`bad --label spec ${spec}; expected start:end:name`);
      args.labels.push({
        start: Number(match[1]),
        end: Number(match[2]),
        label: match[3],
      });
    } else throw new Error(`unknown flag ${flag}`);
  }
  if (!args.manifest || !args.out) {
    throw new Error("usage: --manifest FILE --label start:end:name ... --out FILE");
  }
  return args;
}

function main(): number {
  const args = parseArgs(process.argv.slice(2));
  const session = loadSession(readFileSync(args.manifest, "utf-8"));
  for (const { start, end, label } of args.labels) {
    labelRange(session, start, end, label);
  }
  for (let i = 0; i < args.undo; i++) {
    undo(session);
  }
  writeFileSync(args.out, exportAnnotations(session));
  const counts = [...labelCounts(session).entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, count]) => `${label}=${count}`)
    .join(" ");
  console.log(`exported ${session.labels.size} annotations to ${args.out} (${counts})`);
  return 0;
}

process.exit(main());
