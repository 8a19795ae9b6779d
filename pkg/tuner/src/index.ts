export {
  CoverageError,
  ConfigError,
  GroupTooLarge,
  NonFiniteLoss,
  SchemaError,
  ShapeError,
} from "./errors";
export {
  Tensor,
  addScalars,
  causalSoftmax,
  matmul,
  scalar,
  tensorFrom,
  weightedCrossEntropy,
} from "./tensor";
export { CharRange, ConceptMask, lossAtt, lossStd, lossToken, tokenMaskFromSpans } from "./losses";
export { DEFAULT_MODEL, ModelConfig, ToyDecoder, rng, sgdStep } from "./model";
export {
  BatchPlan,
  CombinedGroup,
  ManifestSummary,
  RecordRow,
  UNK_ID,
  VOCAB_SIZE,
  buildGroups,
  groupSize,
  loadManifest,
  loadRecords,
  planBatches,
  tokenizeCode,
} from "./data";
export { DEFAULT_TRAIN, TraceRow, TrainConfig, trainEpochs, validateConfig } from "./train";
