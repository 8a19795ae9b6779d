import { describe, expect, it } from "vitest";

import { loadRecords, tokenizeCode } from "../src/data";
import { CoverageError, ShapeError } from "../src/errors";
import { CharRange, lossAtt, lossStd, lossToken, tokenMaskFromSpans } from "../src/losses";
import { tensorFrom } from "../src/tensor";

const LN2 = Math.log(2);

function charTokens(text: string): CharRange[] {
  return Array.from(text, (_, i) => ({ start: i, end: i + 1 }));
}

describe("tokenMaskFromSpans", () => {
  it("is all zeros when there are no spans", () => {
    const { mask } = tokenMaskFromSpans("abcde", [], charTokens("abcde"));
    expect(mask).toEqual([0, 0, 0, 0, 0]);
  });

  it("marks exactly the token holding a one-char span", () => {
    const { mask } = tokenMaskFromSpans("abcde", [[2, 3]], charTokens("abcde"));
    expect(mask).toEqual([0, 0, 1, 0, 0]);
  });

  it("marks every token a span straddles", () => {
    const { mask } = tokenMaskFromSpans("abcde", [[1, 3]], charTokens("abcde"));
    expect(mask).toEqual([0, 1, 1, 0, 0]);
  });

  it("merges overlapping spans into one mask", () => {
    const { mask } = tokenMaskFromSpans(
      "abcde",
      [
        [0, 2],
        [1, 3],
        [4, 5],
      ],
      charTokens("abcde")
    );
    expect(mask).toEqual([1, 1, 1, 0, 1]);
  });

  it("raises CoverageError when a span char falls in a tokenization gap", () => {
    const gappy: CharRange[] = [
      { start: 0, end: 1 },
      { start: 2, end: 3 },
    ];
    expect(() => tokenMaskFromSpans("abc", [[1, 2]], gappy)).toThrow(CoverageError);
    // the same tokenization is fine when no span needs the missing char
    expect(tokenMaskFromSpans("abc", [[0, 1]], gappy).mask).toEqual([1, 0]);
  });

  it("rejects malformed spans and token ranges", () => {
    const toks = charTokens("abc");
    expect(() => tokenMaskFromSpans("abc", [[2, 2]], toks)).toThrow(ShapeError);
    expect(() => tokenMaskFromSpans("abc", [[-1, 2]], toks)).toThrow(ShapeError);
    expect(() => tokenMaskFromSpans("abc", [[0, 9]], toks)).toThrow(ShapeError);
    expect(() => tokenMaskFromSpans("abc", [[0, 1]], [{ start: 0, end: 4 }])).toThrow(ShapeError);
  });

  it("marks the modified characters of a generated record", () => {
    const records = loadRecords("fixtures/records.jsonl");
    const record = records[0];
    const cap = 128;
    const text = record.counterfactualCode.slice(0, cap);
    const { ranges } = tokenizeCode(record.counterfactualCode, cap);
    const spans = record.diffSpans
      .map(([a, b]): [number, number] => [Math.min(a, cap), Math.min(b, cap)])
      .filter(([a, b]) => b > a);
    const { mask } = tokenMaskFromSpans(text, spans, ranges);
    expect(mask.length).toBe(cap);
    for (const [a, b] of spans) {
      for (let i = a; i < b; i++) expect(mask[i]).toBe(1);
    }
    // characters outside every span stay unmarked
    const inSpan = new Set<number>();
    for (const [a, b] of spans) for (let i = a; i < b; i++) inSpan.add(i);
    for (let i = 0; i < cap; i++) {
      if (!inSpan.has(i)) expect(mask[i]).toBe(0);
    }
  });
});

describe("lossStd", () => {
  it("is 2 ln 2 for a uniform two-way choice over two tokens", () => {
    const logits = tensorFrom(2, 2, [0, 0, 0, 0]);
    expect(lossStd(logits, [0, 1]).item()).toBeCloseTo(2 * LN2, 10);
  });

  it("is 3 ln 2 when every target has probability one half", () => {
    const logits = tensorFrom(3, 2, [1, 1, -4, -4, 0.25, 0.25]);
    expect(lossStd(logits, [1, 0, 1]).item()).toBeCloseTo(3 * LN2, 10);
  });

  it("is near zero for a confident correct prediction", () => {
    const logits = tensorFrom(1, 2, [20, 0]);
    expect(lossStd(logits, [0]).item()).toBeLessThan(1e-6);
    expect(lossStd(logits, [0]).item()).toBeGreaterThan(0);
  });

  it("rejects a target outside the vocabulary", () => {
    const logits = tensorFrom(1, 2, [0, 0]);
    expect(() => lossStd(logits, [2])).toThrow(ShapeError);
  });
});

describe("lossToken", () => {
  const mask = (bits: number[]) => ({ mask: bits, spans: [] as Array<[number, number]> });

  it("counts only the masked positions", () => {
    // row 0 is uniform over 4 classes (p = 1/4), row 1 is confidently wrong
    const logits = tensorFrom(2, 4, [0, 0, 0, 0, 50, 0, 0, 0]);
    const value = lossToken(logits, [0, 3], mask([1, 0])).item();
    expect(value).toBeCloseTo(Math.log(4), 10);
  });

  it("is exactly zero under an all-zero mask", () => {
    const logits = tensorFrom(2, 4, [3, -1, 2, 0, 50, 0, 0, 0]);
    expect(lossToken(logits, [0, 3], mask([0, 0])).item()).toBe(0);
  });

  it("equals lossStd under an all-one mask", () => {
    const logits = tensorFrom(3, 5, Array.from({ length: 15 }, (_, i) => Math.sin(i)));
    const targets = [4, 0, 2];
    const full = lossToken(logits, targets, mask([1, 1, 1])).item();
    expect(full).toBeCloseTo(lossStd(logits, targets).item(), 12);
  });

  it("ignores logits at unmasked positions", () => {
    const targets = [1, 0];
    const base = tensorFrom(2, 3, [0.3, -0.2, 0.5, 1, 2, 3]);
    const perturbed = tensorFrom(2, 3, [0.3, -0.2, 0.5, -9, 4, 0]);
    const m = mask([1, 0]);
    expect(lossToken(base, targets, m).item()).toBeCloseTo(
      lossToken(perturbed, targets, m).item(),
      12
    );
  });

  it("rejects mask length mismatch and non-binary entries", () => {
    const logits = tensorFrom(2, 3, [0, 0, 0, 0, 0, 0]);
    expect(() => lossToken(logits, [0, 1], mask([1]))).toThrow(ShapeError);
    expect(() => lossToken(logits, [0, 1], mask([1, 0.5]))).toThrow(ShapeError);
  });
});

describe("lossAtt", () => {
  const mask = (bits: number[]) => ({ mask: bits, spans: [] as Array<[number, number]> });

  it("matches the worked two-token example", () => {
    // row 1 pays 0.7 to the masked column 0: loss is -0.1 * 0.7
    const attention = tensorFrom(2, 2, [1, 0, 0.7, 0.3]);
    expect(lossAtt(attention, mask([1, 0]), 0.1).item()).toBeCloseTo(-0.07, 6);
  });

  it("is zero when lambda is zero or the mask is empty", () => {
    const attention = tensorFrom(2, 2, [1, 0, 0.7, 0.3]);
    expect(lossAtt(attention, mask([1, 0]), 0).item() === 0).toBe(true);
    expect(lossAtt(attention, mask([0, 0]), 0.5).item() === 0).toBe(true);
  });

  it("is never positive on row-stochastic attention", () => {
    let state = 41;
    const next = () => {
      state = (state * 1103515245 + 12345) % 2147483648;
      return state / 2147483648;
    };
    for (let trial = 0; trial < 25; trial++) {
      const n = 2 + (trial % 5);
      const rows: number[] = [];
      for (let i = 0; i < n; i++) {
        const raw = Array.from({ length: n }, (_, j) => (j <= i ? next() + 1e-3 : 0));
        const denom = raw.reduce((a, b) => a + b, 0);
        rows.push(...raw.map((v) => v / denom));
      }
      const attention = tensorFrom(n, n, rows);
      const bits = Array.from({ length: n }, () => (next() < 0.5 ? 0 : 1));
      expect(lossAtt(attention, mask(bits), 0.3).item()).toBeLessThanOrEqual(0);
    }
  });

  it("grows in magnitude as lambda grows", () => {
    const attention = tensorFrom(3, 3, [1, 0, 0, 0.4, 0.6, 0, 0.2, 0.5, 0.3]);
    const bits = mask([1, 1, 0]);
    let previous = 0;
    for (const lambdaWeight of [0, 0.1, 0.5, 1, 2]) {
      const value = Math.abs(lossAtt(attention, bits, lambdaWeight).item());
      expect(value).toBeGreaterThanOrEqual(previous);
      previous = value;
    }
  });

  it("rejects negative lambda and mask length mismatch", () => {
    const attention = tensorFrom(2, 2, [1, 0, 0.5, 0.5]);
    expect(() => lossAtt(attention, mask([1, 0]), -0.1)).toThrow(ShapeError);
    expect(() => lossAtt(attention, mask([1, 0, 1]), 0.1)).toThrow(ShapeError);
  });
});
