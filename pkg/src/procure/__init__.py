"""Concept-oriented counterfactual mutation of small Python programs.

The package turns a corpus of self-contained tasks into pairs of original
and behaviour-matched (or deliberately behaviour-broken) variants, tags the
exact characters that changed, and ships the measurement helpers used to
score models on them.
"""

from .code_model import (
    Cfg,
    ProgramAnalysis,
    StructuralDigest,
    SubjectProgram,
    analyze,
    cfg_equivalent,
    fresh_names,
    parse,
    structural_digest,
)
from .dataset import (
    CombinedGroup,
    DatasetRecord,
    TaskRecord,
    build_combined,
    load_tasks,
    make_record,
    plan_batches,
    read_records,
    record_from_dict,
    split_half,
    write_records,
)
from .diff import annotate_diff, kernel_name, tokenize_text
from .errors import (
    DomainError,
    GroupTooLarge,
    MalformedResponse,
    MissingEntryPoint,
    NotApplicable,
    OrphanCounterfactual,
    ProcureError,
    SandboxUnavailable,
    SchemaError,
    TransportError,
    UnsupportedConstruct,
)
from .llm_gen import (
    BackendConfig,
    GenerationLog,
    MockBackend,
    PromptVariant,
    ScriptedBackend,
    build_prompt,
    extract_code,
    generate_with_retries,
    prompt_spec_for,
)
from .metrics import ccs, mean_pass_at_k, pass_at_k, success_stats
from .perturb import (
    ALL_CONCEPTS,
    Concept,
    CounterfactualCandidate,
    PerturbationSite,
    apply,
    enumerate_sites,
)
from .validate import (
    TestHarness,
    ValidationOutcome,
    Verdict,
    fast_filter,
    run_tests,
    validate_candidate,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CONCEPTS",
    "BackendConfig",
    "Cfg",
    "CombinedGroup",
    "Concept",
    "CounterfactualCandidate",
    "DatasetRecord",
    "DomainError",
    "GenerationLog",
    "GroupTooLarge",
    "MalformedResponse",
    "MissingEntryPoint",
    "MockBackend",
    "NotApplicable",
    "OrphanCounterfactual",
    "PerturbationSite",
    "ProcureError",
    "ProgramAnalysis",
    "PromptVariant",
    "SandboxUnavailable",
    "SchemaError",
    "ScriptedBackend",
    "StructuralDigest",
    "SubjectProgram",
    "TaskRecord",
    "TestHarness",
    "TransportError",
    "UnsupportedConstruct",
    "ValidationOutcome",
    "Verdict",
    "analyze",
    "annotate_diff",
    "apply",
    "build_combined",
    "build_prompt",
    "ccs",
    "cfg_equivalent",
    "enumerate_sites",
    "extract_code",
    "fast_filter",
    "fresh_names",
    "generate_with_retries",
    "kernel_name",
    "load_tasks",
    "make_record",
    "mean_pass_at_k",
    "parse",
    "pass_at_k",
    "plan_batches",
    "prompt_spec_for",
    "read_records",
    "record_from_dict",
    "run_tests",
    "split_half",
    "structural_digest",
    "success_stats",
    "tokenize_text",
    "validate_candidate",
    "write_records",
]
