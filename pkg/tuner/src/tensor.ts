/**
 * Reverse-mode autodiff over dense row-major Float64 matrices.
 *
 * Every op builds a node holding its parents and a closure that scatters the
 * node's gradient back into them. backward() runs the closures in reverse
 * topological order. Scalars are 1x1 tensors. Only the ops the trainer needs
 * exist; each has a hand-written adjoint.
 */

import { ShapeError } from "./errors";

export class Tensor {
  readonly rows: number;
  readonly cols: number;
  data: Float64Array;
  grad: Float64Array | null = null;
  requiresGrad: boolean;
  parents: Tensor[] = [];
  backwardFn: (() => void) | null = null;

  constructor(rows: number, cols: number, data?: Float64Array, requiresGrad = false) {
    if (rows < 0 || cols < 0 || !Number.isInteger(rows) || !Number.isInteger(cols)) {
      throw new ShapeError(`bad shape ${rows}x${cols}`);
    }
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    if (data && data.length !== rows * cols) {
      throw new ShapeError(`data length ${data.length} != ${rows}x${cols}`);
    }
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.rows * this.cols;
  }

  at(i: number, j: number): number {
    return this.data[i * this.cols + j];
  }

  set(i: number, j: number, value: number): void {
    this.data[i * this.cols + j] = value;
  }

  /** Scalar convenience accessor; throws unless the tensor is 1x1. */
  item(): number {
    if (this.size !== 1) throw new ShapeError(`item() on ${this.rows}x${this.cols}`);
    return this.data[0];
  }

  ensureGrad(): Float64Array {
    if (this.grad === null) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad !== null) this.grad.fill(0);
  }

  /** Run reverse-mode accumulation from this scalar. */
  backward(): void {
    if (this.size !== 1) throw new ShapeError("backward() needs a scalar root");
    const order: Tensor[] = [];
    const seen = new Set<Tensor>();
    const visit = (t: Tensor) => {
      if (seen.has(t)) return;
      seen.add(t);
      for (const p of t.parents) visit(p);
      order.push(t);
    };
    visit(this);
    this.ensureGrad()[0] = 1;
    for (let i = order.length - 1; i >= 0; i--) {
      const node = order[i];
      if (node.backwardFn !== null && node.grad !== null) node.backwardFn();
    }
  }
}

export function tensorFrom(rows: number, cols: number, values: number[], requiresGrad = false): Tensor {
  return new Tensor(rows, cols, Float64Array.from(values), requiresGrad);
}

export function scalar(value: number): Tensor {
  return new Tensor(1, 1, Float64Array.of(value));
}

function track(out: Tensor, parents: Tensor[], backwardFn: () => void): Tensor {
  if (parents.some((p) => p.requiresGrad)) {
    out.requiresGrad = true;
    out.parents = parents;
    out.backwardFn = backwardFn;
  }
  return out;
}

export function add(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) {
    throw new ShapeError(`add ${a.rows}x${a.cols} vs ${b.rows}x${b.cols}`);
  }
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < out.size; i++) out.data[i] = a.data[i] + b.data[i];
  return track(out, [a, b], () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] += g[i];
    }
  });
}

export function scale(a: Tensor, s: number): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < out.size; i++) out.data[i] = a.data[i] * s;
  return track(out, [a], () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i] * s;
  });
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) {
    throw new ShapeError(`matmul ${a.rows}x${a.cols} by ${b.rows}x${b.cols}`);
  }
  const out = new Tensor(a.rows, b.cols);
  for (let i = 0; i < a.rows; i++) {
    for (let k = 0; k < a.cols; k++) {
      const av = a.data[i * a.cols + k];
      if (av === 0) continue;
      for (let j = 0; j < b.cols; j++) {
        out.data[i * b.cols + j] += av * b.data[k * b.cols + j];
      }
    }
  }
  return track(out, [a, b], () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      // dA = dC @ B^T
      for (let i = 0; i < a.rows; i++) {
        for (let k = 0; k < a.cols; k++) {
          let acc = 0;
          for (let j = 0; j < b.cols; j++) {
            acc += g[i * b.cols + j] * b.data[k * b.cols + j];
          }
          ga[i * a.cols + k] += acc;
        }
      }
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      // dB = A^T @ dC
      for (let k = 0; k < b.rows; k++) {
        for (let j = 0; j < b.cols; j++) {
          let acc = 0;
          for (let i = 0; i < a.rows; i++) {
            acc += a.data[i * a.cols + k] * g[i * b.cols + j];
          }
          gb[k * b.cols + j] += acc;
        }
      }
    }
  });
}

/** scores @ with the second operand transposed: a (m x d) by b (n x d) -> m x n. */
export function matmulT(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.cols) {
    throw new ShapeError(`matmulT ${a.rows}x${a.cols} by ${b.rows}x${b.cols}`);
  }
  const out = new Tensor(a.rows, b.rows);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < b.rows; j++) {
      let acc = 0;
      for (let k = 0; k < a.cols; k++) {
        acc += a.data[i * a.cols + k] * b.data[j * b.cols + k];
      }
      out.data[i * b.rows + j] = acc;
    }
  }
  return track(out, [a, b], () => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let k = 0; k < a.cols; k++) {
          let acc = 0;
          for (let j = 0; j < b.rows; j++) {
            acc += g[i * b.rows + j] * b.data[j * b.cols + k];
          }
          ga[i * a.cols + k] += acc;
        }
      }
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let j = 0; j < b.rows; j++) {
        for (let k = 0; k < b.cols; k++) {
          let acc = 0;
          for (let i = 0; i < a.rows; i++) {
            acc += g[i * b.rows + j] * a.data[i * a.cols + k];
          }
          gb[j * b.cols + k] += acc;
        }
      }
    }
  });
}

export function relu(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < out.size; i++) out.data[i] = a.data[i] > 0 ? a.data[i] : 0;
  return track(out, [a], () => {
    if (!a.requiresGrad) return;
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) if (a.data[i] > 0) ga[i] += g[i];
  });
}

/** Row lookup into a table, differentiable into the table (scatter-add). */
export function gatherRows(table: Tensor, ids: number[]): Tensor {
  const out = new Tensor(ids.length, table.cols);
  for (let i = 0; i < ids.length; i++) {
    const row = ids[i];
    if (row < 0 || row >= table.rows) throw new ShapeError(`row ${row} out of table`);
    out.data.set(table.data.subarray(row * table.cols, (row + 1) * table.cols), i * table.cols);
  }
  return track(out, [table], () => {
    if (!table.requiresGrad) return;
    const g = out.grad!;
    const gt = table.ensureGrad();
    for (let i = 0; i < ids.length; i++) {
      const base = ids[i] * table.cols;
      for (let j = 0; j < table.cols; j++) gt[base + j] += g[i * table.cols + j];
    }
  });
}

/** First n rows of a table (positional embeddings), differentiable. */
export function sliceRows(table: Tensor, n: number): Tensor {
  if (n > table.rows) throw new ShapeError(`slice ${n} of ${table.rows} rows`);
  const out = new Tensor(n, table.cols, table.data.slice(0, n * table.cols));
  return track(out, [table], () => {
    if (!table.requiresGrad) return;
    const g = out.grad!;
    const gt = table.ensureGrad();
    for (let i = 0; i < g.length; i++) gt[i] += g[i];
  });
}

/**
 * Row-wise softmax restricted to the causal support j <= i; entries above
 * the diagonal are exactly zero in the output and receive no gradient.
 */
export function causalSoftmax(scores: Tensor): Tensor {
  if (scores.rows !== scores.cols) {
    throw new ShapeError(`causalSoftmax needs square input, got ${scores.rows}x${scores.cols}`);
  }
  const n = scores.rows;
  const out = new Tensor(n, n);
  for (let i = 0; i < n; i++) {
    let max = -Infinity;
    for (let j = 0; j <= i; j++) max = Math.max(max, scores.data[i * n + j]);
    let denom = 0;
    for (let j = 0; j <= i; j++) {
      const e = Math.exp(scores.data[i * n + j] - max);
      out.data[i * n + j] = e;
      denom += e;
    }
    for (let j = 0; j <= i; j++) out.data[i * n + j] /= denom;
  }
  return track(out, [scores], () => {
    if (!scores.requiresGrad) return;
    const g = out.grad!;
    const gs = scores.ensureGrad();
    for (let i = 0; i < n; i++) {
      let dot = 0;
      for (let j = 0; j <= i; j++) dot += g[i * n + j] * out.data[i * n + j];
      for (let j = 0; j <= i; j++) {
        gs[i * n + j] += out.data[i * n + j] * (g[i * n + j] - dot);
      }
    }
  });
}

export function addScalars(terms: Tensor[]): Tensor {
  if (terms.length === 0) return scalar(0);
  let total = 0;
  for (const t of terms) {
    if (t.size !== 1) throw new ShapeError("addScalars needs 1x1 tensors");
    total += t.data[0];
  }
  const out = scalar(total);
  return track(out, terms.slice(), () => {
    const g = out.grad![0];
    for (const t of terms) {
      if (t.requiresGrad) t.ensureGrad()[0] += g;
    }
  });
}

/**
 * Weighted next-token NLL, fused with softmax for stability:
 * sum_t w_t * (logsumexp(logits_t) - logits_t[target_t]).
 */
export function weightedCrossEntropy(logits: Tensor, targets: number[], weights: number[]): Tensor {
  if (targets.length !== logits.rows || weights.length !== logits.rows) {
    throw new ShapeError(
      `cross entropy: ${logits.rows} rows vs ${targets.length} targets, ${weights.length} weights`
    );
  }
  const V = logits.cols;
  let total = 0;
  const softmaxRows = new Float64Array(logits.size);
  for (let t = 0; t < logits.rows; t++) {
    const y = targets[t];
    if (y < 0 || y >= V) throw new ShapeError(`target ${y} outside vocab ${V}`);
    let max = -Infinity;
    for (let v = 0; v < V; v++) max = Math.max(max, logits.data[t * V + v]);
    let denom = 0;
    for (let v = 0; v < V; v++) denom += Math.exp(logits.data[t * V + v] - max);
    const lse = max + Math.log(denom);
    for (let v = 0; v < V; v++) {
      softmaxRows[t * V + v] = Math.exp(logits.data[t * V + v] - lse);
    }
    total += weights[t] * (lse - logits.data[t * V + y]);
  }
  const out = scalar(total);
  return track(out, [logits], () => {
    if (!logits.requiresGrad) return;
    const g = out.grad![0];
    const gl = logits.ensureGrad();
    for (let t = 0; t < logits.rows; t++) {
      const w = weights[t];
      if (w === 0) continue;
      for (let v = 0; v < V; v++) {
        gl[t * V + v] += g * w * softmaxRows[t * V + v];
      }
      gl[t * V + targets[t]] -= g * w;
    }
  });
}

/**
 * sum_j sum_{k<j} colWeights_k * |A_jk| over the strictly lower triangle.
 */
export function maskedLowerAbsSum(a: Tensor, colWeights: number[]): Tensor {
  if (a.rows !== a.cols) throw new ShapeError(`square matrix required, got ${a.rows}x${a.cols}`);
  if (colWeights.length !== a.cols) {
    throw new ShapeError(`weights ${colWeights.length} vs ${a.cols} columns`);
  }
  const n = a.rows;
  let total = 0;
  for (let j = 1; j < n; j++) {
    for (let k = 0; k < j; k++) {
      total += colWeights[k] * Math.abs(a.data[j * n + k]);
    }
  }
  const out = scalar(total);
  return track(out, [a], () => {
    if (!a.requiresGrad) return;
    const g = out.grad![0];
    const ga = a.ensureGrad();
    for (let j = 1; j < n; j++) {
      for (let k = 0; k < j; k++) {
        const v = a.data[j * n + k];
        ga[j * n + k] += g * colWeights[k] * Math.sign(v);
      }
    }
  });
}
