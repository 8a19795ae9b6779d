/**
 * Two-block decoder-only transformer, deliberately tiny.
 *
 * No layer norm and no biases: at this scale they only complicate the
 * adjoints without changing what the tests verify. Residuals around both
 * the attention and MLP sublayers keep optimization stable enough for the
 * descent checks. The forward pass also returns the head-averaged
 * post-softmax attention of the final block, which the attention loss and
 * its gradient flow through.
 */

import { ConfigError } from "./errors";
import {
  add,
  causalSoftmax,
  gatherRows,
  matmul,
  matmulT,
  relu,
  scale,
  sliceRows,
  Tensor,
} from "./tensor";

export interface ModelConfig {
  vocabSize: number;
  dModel: number;
  nHeads: number;
  dFF: number;
  maxSeq: number;
  initStd: number;
  seed: number;
}

export const DEFAULT_MODEL: Omit<ModelConfig, "seed"> = {
  vocabSize: 257,
  dModel: 16,
  nHeads: 2,
  dFF: 32,
  maxSeq: 128,
  initStd: 0.08,
};

/** Deterministic 32-bit generator (mulberry32), uniform in [0, 1). */
export function rng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(next: () => number): () => number {
  return () => {
    const u = Math.max(next(), 1e-12);
    const v = next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  };
}

interface HeadParams {
  wq: Tensor;
  wk: Tensor;
  wv: Tensor;
  wo: Tensor;
}

interface BlockParams {
  heads: HeadParams[];
  w1: Tensor;
  w2: Tensor;
}

export interface ForwardResult {
  /** seq x vocab next-token logits */
  logits: Tensor;
  /** final-block attention, averaged over heads, post-softmax (seq x seq) */
  attention: Tensor;
}

export class ToyDecoder {
  readonly config: ModelConfig;
  readonly embedding: Tensor;
  readonly positional: Tensor;
  readonly blocks: BlockParams[];
  readonly lmHead: Tensor;

  constructor(config: ModelConfig) {
    if (config.vocabSize < 2 || config.vocabSize > 512) {
      throw new ConfigError(`vocabSize must be in [2, 512], got ${config.vocabSize}`);
    }
    if (config.maxSeq < 2 || config.maxSeq > 128) {
      throw new ConfigError(`maxSeq must be in [2, 128], got ${config.maxSeq}`);
    }
    if (config.dModel % config.nHeads !== 0) {
      throw new ConfigError(`dModel ${config.dModel} not divisible by nHeads ${config.nHeads}`);
    }
    this.config = config;
    const draw = gaussian(rng(config.seed));
    const init = (rows: number, cols: number) => {
      const t = new Tensor(rows, cols, undefined, true);
      for (let i = 0; i < t.size; i++) t.data[i] = draw() * config.initStd;
      return t;
    };
    const dHead = config.dModel / config.nHeads;
    this.embedding = init(config.vocabSize, config.dModel);
    this.positional = init(config.maxSeq, config.dModel);
    this.blocks = [];
    for (let b = 0; b < 2; b++) {
      const heads: HeadParams[] = [];
      for (let h = 0; h < config.nHeads; h++) {
        heads.push({
          wq: init(config.dModel, dHead),
          wk: init(config.dModel, dHead),
          wv: init(config.dModel, dHead),
          wo: init(dHead, config.dModel),
        });
      }
      this.blocks.push({
        heads,
        w1: init(config.dModel, config.dFF),
        w2: init(config.dFF, config.dModel),
      });
    }
    this.lmHead = init(config.dModel, config.vocabSize);
  }

  parameters(): Tensor[] {
    const params: Tensor[] = [this.embedding, this.positional, this.lmHead];
    for (const block of this.blocks) {
      for (const head of block.heads) params.push(head.wq, head.wk, head.wv, head.wo);
      params.push(block.w1, block.w2);
    }
    return params;
  }

  zeroGrad(): void {
    for (const p of this.parameters()) p.zeroGrad();
  }

  forward(tokens: number[]): ForwardResult {
    const n = tokens.length;
    if (n < 1 || n > this.config.maxSeq) {
      throw new ConfigError(`sequence length ${n} outside [1, ${this.config.maxSeq}]`);
    }
    const dHead = this.config.dModel / this.config.nHeads;
    let x = add(gatherRows(this.embedding, tokens), sliceRows(this.positional, n));
    let finalAttention: Tensor | null = null;
    for (let b = 0; b < this.blocks.length; b++) {
      const block = this.blocks[b];
      let attnOut: Tensor | null = null;
      let attnSum: Tensor | null = null;
      for (const head of block.heads) {
        const q = matmul(x, head.wq);
        const k = matmul(x, head.wk);
        const v = matmul(x, head.wv);
        const weights = causalSoftmax(scale(matmulT(q, k), 1 / Math.sqrt(dHead)));
        const contribution = matmul(matmul(weights, v), head.wo);
        attnOut = attnOut === null ? contribution : add(attnOut, contribution);
        attnSum = attnSum === null ? weights : add(attnSum, weights);
      }
      x = add(x, attnOut!);
      x = add(x, matmul(relu(matmul(x, block.w1)), block.w2));
      if (b === this.blocks.length - 1) {
        finalAttention = scale(attnSum!, 1 / block.heads.length);
      }
    }
    return { logits: matmul(x, this.lmHead), attention: finalAttention! };
  }
}

/** One plain SGD step over every parameter, then clear the tape state. */
export function sgdStep(model: ToyDecoder, learningRate: number): void {
  for (const p of model.parameters()) {
    if (p.grad === null) continue;
    for (let i = 0; i < p.size; i++) p.data[i] -= learningRate * p.grad[i];
  }
  model.zeroGrad();
}
