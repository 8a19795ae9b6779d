"""LLM-backed counterfactual generation with bounded retries.

Prompt text is assembled from versioned asset templates in a fixed section
order (instruction, static analysis, reasoning steps, worked example, target
code); ablation variants drop individual sections without disturbing the
bytes of the rest.  Backends share one interface, so the offline mock and
the HTTP chat endpoint are interchangeable.
"""

from __future__ import annotations

import ast
import enum
import hashlib
import json
import os
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Protocol, Sequence

from . import code_model as cm
from .dataset import TaskRecord
from .errors import (
    MalformedResponse,
    MissingEntryPoint,
    TransportError,
    UnsupportedConstruct,
)
from .perturb import Concept, CounterfactualCandidate, PerturbationSite, enumerate_sites
from .validate import ValidationOutcome, Verdict

DEFAULT_MAX_RETRIES = 5
_STATIC_INFO_LIMIT = 8


class PromptVariant(str, enum.Enum):
    Full = "Full"
    Vanilla = "Vanilla"
    NoOneShot = "NoOneShot"
    NoCoT = "NoCoT"
    NoStaticInfo = "NoStaticInfo"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PromptSpec:
    concept: Concept
    variant: PromptVariant
    static_info: tuple[str, ...]
    cot_steps: tuple[str, ...]
    one_shot: tuple[str, str] | None
    target_code: str


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str
    model: str
    temperature: float = 1.0
    max_retries: int = DEFAULT_MAX_RETRIES
    auth_env: str = "PROCURE_LLM_KEY"


@dataclass(frozen=True)
class BackendReply:
    text: str
    tokens: int | None = None


@dataclass(frozen=True)
class AttemptRecord:
    index: int
    prompt_bytes: int
    response_tokens: int
    verdict: str


@dataclass(frozen=True)
class GenerationLog:
    task_id: str
    concept: str
    variant: str
    attempts: tuple[AttemptRecord, ...]
    total_tokens: int
    succeeded: bool


def _load_assets() -> dict:
    payload = resources.files("procure").joinpath("assets/prompts.json").read_text("utf-8")
    return json.loads(payload)


def prompt_spec_for(
    task: TaskRecord,
    concept: Concept,
    sites: Sequence[PerturbationSite],
    variant: PromptVariant = PromptVariant.Full,
) -> PromptSpec:
    assets = _load_assets()["concepts"][str(concept)]
    return PromptSpec(
        concept=Concept(concept),
        variant=PromptVariant(variant),
        static_info=tuple(s.notes for s in sites[:_STATIC_INFO_LIMIT]),
        cot_steps=tuple(assets["cot"]),
        one_shot=(assets["one_shot_input"], assets["one_shot_output"]),
        target_code=task.full_source,
    )


def build_prompt(task: TaskRecord, sites: Sequence[PerturbationSite], spec: PromptSpec) -> str:
    """Deterministic prompt assembly.  Sections always appear in the same
    order; a variant removes whole sections and leaves the rest untouched."""
    del task, sites  # the spec already carries everything that is rendered
    assets = _load_assets()["concepts"][str(spec.concept)]
    variant = spec.variant
    sections = [assets["instruction"]]
    if variant not in (PromptVariant.Vanilla, PromptVariant.NoStaticInfo) and spec.static_info:
        bullet_lines = "\n".join(f"- {note}" for note in spec.static_info)
        sections.append(f"Static analysis of the target:\n{bullet_lines}")
    if variant not in (PromptVariant.Vanilla, PromptVariant.NoCoT):
        steps = "\n".join(f"{i}. {step}" for i, step in enumerate(spec.cot_steps, start=1))
        sections.append(f"Reasoning steps:\n{steps}")
    if variant not in (PromptVariant.Vanilla, PromptVariant.NoOneShot) and spec.one_shot:
        shot_in, shot_out = spec.one_shot
        sections.append(
            "Example input:\n```python\n"
            + shot_in.rstrip("\n")
            + "\n```\nExample output:\n```python\n"
            + shot_out.rstrip("\n")
            + "\n```"
        )
    sections.append(
        "Target function:\n```python\n" + spec.target_code.rstrip("\n") + "\n```"
    )
    return "\n\n".join(sections)


_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)


def extract_code(response: str) -> str:
    """First fenced code block; failing that, the whole response if it parses
    as Python."""
    m = _FENCE_RE.search(response)
    if m:
        return m.group(2).strip("\n") + "\n"
    stripped = response.strip()
    if stripped:
        try:
            ast.parse(stripped)
        except SyntaxError:
            pass
        else:
            return stripped + "\n"
    raise MalformedResponse("no fenced code block and the body is not Python")


class Backend(Protocol):
    def complete(self, prompt: str) -> BackendReply: ...


class HttpBackend:
    """Chat-completions style JSON endpoint."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def complete(self, prompt: str) -> BackendReply:
        import requests

        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.auth_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        try:
            response = requests.post(
                self.config.endpoint, json=body, headers=headers, timeout=120
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if response.status_code // 100 != 2:
            raise TransportError(f"endpoint returned HTTP {response.status_code}")
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc
        tokens = None
        usage = payload.get("usage")
        if isinstance(usage, dict) and isinstance(usage.get("total_tokens"), int):
            tokens = usage["total_tokens"]
        return BackendReply(text=text, tokens=tokens)


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class MockBackend:
    """Offline backend fed by response fixtures keyed by prompt hash.

    A fixture file <key>.json holds {"responses": [...]} consumed one per
    call.  Without a fixture the backend echoes the prompt's target code
    block, which downstream classifies as failure type I.
    """

    def __init__(self, fixtures_dir: str | None = None):
        self.fixtures_dir = fixtures_dir
        self._cursor: dict[str, int] = {}

    def complete(self, prompt: str) -> BackendReply:
        key = prompt_key(prompt)
        responses: list[str] | None = None
        tokens: list[int] | None = None
        if self.fixtures_dir:
            path = os.path.join(self.fixtures_dir, key + ".json")
            if os.path.exists(path):
                with open(path, "r", encoding="utf-8") as fh:
                    payload = json.load(fh)
                responses = payload.get("responses") or []
                tokens = payload.get("tokens")
        if responses is None:
            blocks = _FENCE_RE.findall(prompt)
            target = blocks[-1][1] if blocks else prompt
            return BackendReply(text=f"```python\n{target.rstrip()}\n```", tokens=None)
        turn = self._cursor.get(key, 0)
        self._cursor[key] = turn + 1
        text = responses[min(turn, len(responses) - 1)] if responses else ""
        reply_tokens = None
        if tokens and turn < len(tokens):
            reply_tokens = tokens[turn]
        return BackendReply(text=text, tokens=reply_tokens)


class ScriptedBackend:
    """Test helper: replays a fixed list of responses or exceptions."""

    def __init__(self, replies: Sequence[str | Exception | BackendReply]):
        self.replies = list(replies)
        self.calls = 0

    def complete(self, prompt: str) -> BackendReply:
        if self.calls >= len(self.replies):
            raise TransportError("scripted backend exhausted")
        reply = self.replies[self.calls]
        self.calls += 1
        if isinstance(reply, Exception):
            raise reply
        if isinstance(reply, BackendReply):
            return reply
        return BackendReply(text=reply)


def make_backend(config: BackendConfig) -> Backend:
    if config.endpoint.startswith("mock:"):
        fixtures = config.endpoint[len("mock:") :] or None
        return MockBackend(fixtures)
    return HttpBackend(config)


def generate_candidate(prompt: str, backend: Backend) -> str:
    """One backend call.  Raises TransportError or MalformedResponse."""
    return extract_code(backend.complete(prompt).text)


def _estimate_tokens(prompt: str, response: str) -> int:
    return (len(prompt) + len(response)) // 4


def generate_with_retries(
    task: TaskRecord,
    concept: Concept,
    config: BackendConfig,
    validator: Callable[[str], ValidationOutcome],
    *,
    backend: Backend | None = None,
    variant: PromptVariant = PromptVariant.Full,
    reserved: frozenset[str] = frozenset(),
) -> tuple[CounterfactualCandidate | ValidationOutcome, GenerationLog]:
    """Prompt, validate, retry.  Stops at the first accepted candidate or
    after max_retries attempts; raises TransportError only when every attempt
    failed in transport."""
    concept = Concept(concept)
    variant = PromptVariant(variant)
    backend = backend if backend is not None else make_backend(config)

    def finish(result, attempts, total_tokens, succeeded):
        log = GenerationLog(
            task_id=task.task_id,
            concept=str(concept),
            variant=str(variant),
            attempts=tuple(attempts),
            total_tokens=total_tokens,
            succeeded=succeeded,
        )
        return result, log

    try:
        program = cm.parse(task.full_source, task.entry_point)
        sites = enumerate_sites(program, concept, reserved=reserved)
    except (SyntaxError, UnsupportedConstruct, MissingEntryPoint) as exc:
        outcome = ValidationOutcome(Verdict.FailureTypeI, f"non-perturbable task: {exc}")
        return finish(outcome, [], 0, False)
    if not sites:
        outcome = ValidationOutcome(
            Verdict.FailureTypeI, f"no eligible sites for {concept}"
        )
        return finish(outcome, [], 0, False)

    spec = prompt_spec_for(task, concept, sites, variant)
    prompt = build_prompt(task, sites, spec)
    prompt_bytes = len(prompt.encode("utf-8"))

    attempts: list[AttemptRecord] = []
    total_tokens = 0
    transport_failures = 0
    last_outcome: ValidationOutcome | None = None
    last_transport: TransportError | None = None

    for index in range(1, config.max_retries + 1):
        try:
            reply = backend.complete(prompt)
        except TransportError as exc:
            transport_failures += 1
            last_transport = exc
            attempts.append(AttemptRecord(index, prompt_bytes, 0, "TransportError"))
            continue
        tokens = (
            reply.tokens
            if reply.tokens is not None
            else _estimate_tokens(prompt, reply.text)
        )
        total_tokens += tokens
        try:
            code = extract_code(reply.text)
        except MalformedResponse as exc:
            last_outcome = ValidationOutcome(Verdict.FailureTypeII, str(exc))
            attempts.append(
                AttemptRecord(index, prompt_bytes, tokens, str(Verdict.FailureTypeII))
            )
            continue
        outcome = validator(code)
        last_outcome = outcome
        attempts.append(AttemptRecord(index, prompt_bytes, tokens, str(outcome.verdict)))
        if outcome.accepted:
            candidate = CounterfactualCandidate(
                concept=concept,
                source=code,
                site=sites[0],
                impact_region=frozenset(),
                rename_map=None,
                attempt=index,
            )
            return finish(candidate, attempts, total_tokens, True)

    if transport_failures == config.max_retries:
        raise last_transport if last_transport else TransportError("all attempts failed")
    assert last_outcome is not None
    return finish(last_outcome, attempts, total_tokens, False)
