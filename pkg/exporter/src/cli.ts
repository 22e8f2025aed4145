#!/usr/bin/env node
/**
 * ssl-exporter: turn WAV directories into .fseq features or .cseq codes
 * for the fewshotword assessment toolkit.
 *
 * Exit codes mirror the toolkit: 0 success, 1 usage error, 2 data error,
 * 3 internal error.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { MODEL_REGISTRY } from "./encoder";
import { exportCodes, exportFeatures } from "./export";
import { DataError } from "./fseq";

function commonOptions(cmd: yargs.Argv) {
  return cmd
    .option("audio-dir", { type: "string", demandOption: true, describe: "directory of mono WAV files" })
    .option("out-dir", { type: "string", demandOption: true })
    .option("model-id", {
      type: "string",
      default: "standin-base",
      choices: Object.keys(MODEL_REGISTRY).sort(),
    })
    .option("layer", { type: "number", describe: "encoder block index (default: middle of the stack)" })
    .option("batch-size", { type: "number", default: 8 });
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  const parser = yargs(argv)
    .scriptName("ssl-exporter")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      if (err) throw err;
      throw new UsageError(msg);
    })
    .command(
      "export-features",
      "encode WAVs and write one .fseq per utterance",
      (cmd) => commonOptions(cmd),
      (args) => {
        const result = exportFeatures(args["audio-dir"] as string, args["out-dir"] as string, {
          modelId: args["model-id"] as string,
          layer: args.layer as number | undefined,
          batchSize: args["batch-size"] as number,
        });
        console.log(`${result.fileCount} files -> ${result.outDir} (layer ${result.layer})`);
      },
    )
    .command(
      "export-codes",
      "encode WAVs, assign nearest-centroid codes, write one .cseq per utterance",
      (cmd) =>
        commonOptions(cmd).option("codebook", {
          type: "string",
          demandOption: true,
          describe: ".fseq file of centroid rows",
        }),
      (args) => {
        const result = exportCodes(
          args["audio-dir"] as string,
          args["out-dir"] as string,
          {
            modelId: args["model-id"] as string,
            layer: args.layer as number | undefined,
            batchSize: args["batch-size"] as number,
          },
          args.codebook as string,
        );
        console.log(`${result.fileCount} files -> ${result.outDir} (layer ${result.layer})`);
      },
    )
    .demandCommand(1, "specify a command: export-features or export-codes")
    .help();

  try {
    parser.parse();
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof DataError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`internal error: ${err instanceof Error ? err.message : err}`);
    return 3;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(hideBin(process.argv)));
}
