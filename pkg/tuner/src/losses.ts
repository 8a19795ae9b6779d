/**
 * The three training losses and the concept token mask they share.
 *
 * loss conventions (sums, not means):
 *   lossStd    = sum_t -log P(target_t)
 *   lossToken  = sum_t -mask_t * log P(target_t)
 *   lossAtt    = -lambda * sum_j sum_{k<j} mask_k * |A_jk|
 *
 * lossAtt is never positive: attention rows are post-softmax, so paying
 * mass to masked columns is rewarded, bounded by row sums of 1.
 */

import { CoverageError, ShapeError } from "./errors";
import { maskedLowerAbsSum, scale, Tensor, weightedCrossEntropy } from "./tensor";

export interface CharRange {
  start: number;
  end: number;
}

export interface ConceptMask {
  /** one 0/1 entry per token */
  mask: number[];
  /** the character spans the mask derives from */
  spans: Array<[number, number]>;
}

/**
 * mask_j = 1 iff token j's character range overlaps any diff span.
 * Span characters that no token covers indicate a broken tokenization and
 * raise CoverageError rather than silently dropping signal.
 */
export function tokenMaskFromSpans(
  text: string,
  spans: Array<[number, number]>,
  tokenization: CharRange[]
): ConceptMask {
  const mask = new Array<number>(tokenization.length).fill(0);
  const covered = new Array<boolean>(text.length).fill(false);
  for (const range of tokenization) {
    if (range.start < 0 || range.end > text.length || range.start >= range.end) {
      throw new ShapeError(`bad token range [${range.start}, ${range.end})`);
    }
    for (let i = range.start; i < range.end; i++) covered[i] = true;
  }
  for (const [a, b] of spans) {
    if (a < 0 || b > text.length || a >= b) {
      throw new ShapeError(`bad span [${a}, ${b}) for text of length ${text.length}`);
    }
    for (let i = a; i < b; i++) {
      if (!covered[i]) {
        throw new CoverageError(`span character ${i} not covered by any token`);
      }
    }
    for (let j = 0; j < tokenization.length; j++) {
      const tok = tokenization[j];
      if (tok.start < b && a < tok.end) mask[j] = 1;
    }
  }
  return { mask, spans };
}

export function lossStd(logits: Tensor, targets: number[]): Tensor {
  const ones = new Array<number>(targets.length).fill(1);
  return weightedCrossEntropy(logits, targets, ones);
}

export function lossToken(logits: Tensor, targets: number[], mask: ConceptMask): Tensor {
  if (mask.mask.length !== targets.length) {
    throw new ShapeError(`mask length ${mask.mask.length} vs ${targets.length} targets`);
  }
  for (const bit of mask.mask) {
    if (bit !== 0 && bit !== 1) throw new ShapeError(`mask entries must be 0/1, got ${bit}`);
  }
  return weightedCrossEntropy(logits, targets, mask.mask);
}

export function lossAtt(attention: Tensor, mask: ConceptMask, lambdaWeight: number): Tensor {
  if (lambdaWeight < 0) throw new ShapeError(`lambda must be >= 0, got ${lambdaWeight}`);
  if (mask.mask.length !== attention.cols) {
    throw new ShapeError(`mask length ${mask.mask.length} vs ${attention.cols} columns`);
  }
  const inner = maskedLowerAbsSum(attention, mask.mask);
  return scale(inner, -lambdaWeight);
}
