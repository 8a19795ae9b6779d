#!/usr/bin/env node
/**
 * Usage:
 *   concept-tuner <records.jsonl> <manifest.json> <out-dir> [options]
 *
 * Options:
 *   --epochs N       training epochs (default 2)
 *   --batch-size N   max sequences per batch, originals included (default 8)
 *   --lambda X       attention bonus weight (default 0.1)
 *   --lr X           SGD learning rate (default 0.05)
 *   --seed N         init and shuffle seed (default 1)
 *
 * Writes loss_trace.csv and config_echo.json into the output directory.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { VOCAB_SIZE, buildGroups, loadManifest, loadRecords } from "./data";
import { DEFAULT_MODEL, ToyDecoder } from "./model";
import { DEFAULT_TRAIN, TrainConfig, trainEpochs } from "./train";

function usage(): never {
  process.stderr.write(
    "usage: concept-tuner <records.jsonl> <manifest.json> <out-dir> " +
      "[--epochs N] [--batch-size N] [--lambda X] [--lr X] [--seed N]\n"
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        epochs: { type: "string" },
        "batch-size": { type: "string" },
        lambda: { type: "string" },
        lr: { type: "string" },
        seed: { type: "string" },
      },
    });
  } catch {
    usage();
  }
  if (parsed.positionals.length !== 3) usage();
  const [recordsPath, manifestPath, outDir] = parsed.positionals;

  const cfg: TrainConfig = {
    lambdaWeight: parsed.values.lambda !== undefined ? Number(parsed.values.lambda) : DEFAULT_TRAIN.lambdaWeight,
    learningRate: parsed.values.lr !== undefined ? Number(parsed.values.lr) : DEFAULT_TRAIN.learningRate,
    epochs: parsed.values.epochs !== undefined ? Number(parsed.values.epochs) : DEFAULT_TRAIN.epochs,
    batchSize: parsed.values["batch-size"] !== undefined ? Number(parsed.values["batch-size"]) : DEFAULT_TRAIN.batchSize,
    seed: parsed.values.seed !== undefined ? Number(parsed.values.seed) : DEFAULT_TRAIN.seed,
  };

  const records = loadRecords(recordsPath);
  const manifest = loadManifest(manifestPath);
  const groups = buildGroups(records);
  const model = new ToyDecoder({ ...DEFAULT_MODEL, seed: cfg.seed });
  const trace = trainEpochs(groups, model, cfg);

  fs.mkdirSync(outDir, { recursive: true });
  const csv = ["epoch,step,l_std,l_token,l_att,l_batch"];
  for (const row of trace) {
    csv.push(
      [row.epoch, row.step, row.lStd.toFixed(6), row.lToken.toFixed(6), row.lAtt.toFixed(6), row.lBatch.toFixed(6)].join(",")
    );
  }
  fs.writeFileSync(path.join(outDir, "loss_trace.csv"), csv.join("\n") + "\n");

  const echo = {
    lambda_weight: cfg.lambdaWeight,
    learning_rate: cfg.learningRate,
    epochs: cfg.epochs,
    batch_size: cfg.batchSize,
    seed: cfg.seed,
    attention: { layer: "final", heads: "mean", softmax: "post" },
    vocab_size: VOCAB_SIZE,
    max_seq: DEFAULT_MODEL.maxSeq,
    records: records.length,
    groups: groups.length,
    manifest_datasets: manifest.datasets,
    manifest_total_success: manifest.totalSuccess,
  };
  fs.writeFileSync(path.join(outDir, "config_echo.json"), JSON.stringify(echo, null, 2) + "\n");

  const final = trace.length > 0 ? trace[trace.length - 1].lBatch.toFixed(4) : "n/a";
  process.stderr.write(
    `trained ${cfg.epochs} epoch(s), ${trace.length} step(s); final l_batch=${final}\n`
  );
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
