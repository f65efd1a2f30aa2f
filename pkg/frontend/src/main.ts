#!/usr/bin/env node
/**
 * render --spec <figure-spec.json>
 *
 * Reads harness CSVs named by the spec and writes one SVG.  Exit codes:
 * 0 success, 2 bad invocation or figure spec, 1 render failure (missing
 * columns, schema mismatch, empty CSV).
 */

import { loadSpec, render } from "./render";

function main(argv: string[]): number {
  const args = argv.slice(2);
  const specIdx = args.indexOf("--spec");
  if (specIdx < 0 || specIdx + 1 >= args.length) {
    console.error("usage: render --spec <figure-spec.json>");
    return 2;
  }
  let spec;
  try {
    spec = loadSpec(args[specIdx + 1]);
  } catch (err) {
    console.error(`spec error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const out = render(spec);
    console.log(out);
    return 0;
  } catch (err) {
    console.error(`render error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv));
