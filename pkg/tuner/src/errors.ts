export class ShapeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShapeError";
  }
}

export class CoverageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CoverageError";
  }
}

export class ConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConfigError";
  }
}

export class GroupTooLarge extends Error {
  constructor(message: string) {
    super(message);
    this.name = "GroupTooLarge";
  }
}

export class SchemaError extends Error {
  constructor(line: number, field: string, detail: string) {
    super(`line ${line}, field ${field}: ${detail}`);
    this.name = "SchemaError";
  }
}

/** Training aborts with the offending step's component losses attached. */
export class NonFiniteLoss extends Error {
  readonly diagnostics: Record<string, number>;

  constructor(message: string, diagnostics: Record<string, number>) {
    super(`${message} (${JSON.stringify(diagnostics)})`);
    this.name = "NonFiniteLoss";
    this.diagnostics = diagnostics;
  }
}
