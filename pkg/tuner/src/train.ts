/**
 * Training loop. Each batch pairs originals with their counterfactuals:
 * originals contribute the plain next-token loss, counterfactuals contribute
 * the concept-token loss plus the attention bonus. One SGD step per batch.
 */

import { ConfigError, NonFiniteLoss } from "./errors";
import { CombinedGroup, planBatches, tokenizeCode } from "./data";
import { lossAtt, lossStd, lossToken, tokenMaskFromSpans } from "./losses";
import { ToyDecoder, sgdStep } from "./model";
import { Tensor, addScalars, scalar } from "./tensor";

export interface TrainConfig {
  lambdaWeight: number;
  learningRate: number;
  epochs: number;
  batchSize: number;
  seed: number;
}

// the losses are sums over positions, not means, so gradients scale with
// sequence length; the default step size is sized for max-length sequences
export const DEFAULT_TRAIN: TrainConfig = {
  lambdaWeight: 0.1,
  learningRate: 0.001,
  epochs: 2,
  batchSize: 8,
  seed: 1,
};

export function validateConfig(cfg: TrainConfig): void {
  if (!Number.isFinite(cfg.lambdaWeight) || cfg.lambdaWeight < 0) {
    throw new ConfigError(`lambdaWeight must be >= 0, got ${cfg.lambdaWeight}`);
  }
  if (!Number.isFinite(cfg.learningRate) || cfg.learningRate <= 0) {
    throw new ConfigError(`learningRate must be > 0, got ${cfg.learningRate}`);
  }
  if (!Number.isInteger(cfg.epochs) || cfg.epochs < 1) {
    throw new ConfigError(`epochs must be a positive integer, got ${cfg.epochs}`);
  }
  if (!Number.isInteger(cfg.batchSize) || cfg.batchSize < 2) {
    throw new ConfigError(`batchSize must be an integer >= 2, got ${cfg.batchSize}`);
  }
  if (!Number.isInteger(cfg.seed) || cfg.seed < 0) {
    throw new ConfigError(`seed must be a non-negative integer, got ${cfg.seed}`);
  }
}

export interface TraceRow {
  epoch: number;
  step: number;
  lStd: number;
  lToken: number;
  lAtt: number;
  lBatch: number;
}

function clipSpans(spans: Array<[number, number]>, limit: number): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (const [a, b] of spans) {
    const start = Math.min(a, limit);
    const end = Math.min(b, limit);
    if (end > start) out.push([start, end]);
  }
  return out;
}

/**
 * Next-token framing: inputs are tokens[0..n-2], targets tokens[1..n-1].
 * The concept mask follows the same shift for the token loss (a target is
 * weighted when the predicted character was modified) while the attention
 * bonus keeps input alignment (reward attending to modified characters).
 */
function frame(code: string, maxSeq: number): { inputs: number[]; targets: number[] } | null {
  const { ids } = tokenizeCode(code, maxSeq);
  if (ids.length < 2) return null;
  return { inputs: ids.slice(0, -1), targets: ids.slice(1) };
}

export function trainEpochs(
  groups: CombinedGroup[],
  model: ToyDecoder,
  cfg: TrainConfig
): TraceRow[] {
  validateConfig(cfg);
  const trace: TraceRow[] = [];
  const maxSeq = model.config.maxSeq;
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const plan = planBatches(groups, cfg.batchSize, cfg.seed + epoch - 1);
    for (let step = 0; step < plan.batches.length; step++) {
      const stdTerms: Tensor[] = [];
      const tokenTerms: Tensor[] = [];
      const attTerms: Tensor[] = [];
      for (const groupIdx of plan.batches[step]) {
        const group = groups[groupIdx];
        const original = frame(group.originalCode, maxSeq);
        if (original !== null) {
          const out = model.forward(original.inputs);
          stdTerms.push(lossStd(out.logits, original.targets));
        }
        for (const cf of group.counterfactuals) {
          const framed = frame(cf.counterfactualCode, maxSeq);
          if (framed === null) continue;
          const limit = framed.inputs.length + 1;
          const text = cf.counterfactualCode.slice(0, limit);
          const { ranges } = tokenizeCode(cf.counterfactualCode, maxSeq);
          const full = tokenMaskFromSpans(text, clipSpans(cf.diffSpans, limit), ranges);
          const out = model.forward(framed.inputs);
          tokenTerms.push(
            lossToken(out.logits, framed.targets, { mask: full.mask.slice(1), spans: full.spans })
          );
          attTerms.push(
            lossAtt(
              out.attention,
              { mask: full.mask.slice(0, -1), spans: full.spans },
              cfg.lambdaWeight
            )
          );
        }
      }
      const lStd = stdTerms.length > 0 ? addScalars(stdTerms) : scalar(0);
      const lToken = tokenTerms.length > 0 ? addScalars(tokenTerms) : scalar(0);
      const lAtt = attTerms.length > 0 ? addScalars(attTerms) : scalar(0);
      const lBatch = addScalars([lStd, lToken, lAtt]);
      const row: TraceRow = {
        epoch,
        step: step + 1,
        lStd: lStd.item(),
        lToken: lToken.item(),
        lAtt: lAtt.item(),
        lBatch: lBatch.item(),
      };
      if (!Number.isFinite(row.lBatch)) {
        throw new NonFiniteLoss(`batch loss diverged at epoch ${epoch} step ${step + 1}`, {
          epoch,
          step: step + 1,
          lStd: row.lStd,
          lToken: row.lToken,
          lAtt: row.lAtt,
          lBatch: row.lBatch,
        });
      }
      trace.push(row);
      lBatch.backward();
      sgdStep(model, cfg.learningRate);
    }
  }
  return trace;
}
